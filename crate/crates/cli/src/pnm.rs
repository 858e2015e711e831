//! Binary PGM/PPM and the MF32 container for 32-bit samples.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use tilemedian::{Image, Pixel};

/// A decoded file: one image per channel plus what is needed to write it back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Raster {
    /// `P5` or `P6` with `maxval <= 255`.
    Byte {
        maxval: u16,
        channels: Vec<Image<u8>>,
    },
    /// `P5` or `P6` with `256 <= maxval <= 65535`, big-endian samples.
    Word {
        maxval: u16,
        channels: Vec<Image<u16>>,
    },
    Mf32(Image<u32>),
}

const MF32_MAGIC: &[u8; 4] = b"MF32";

impl Raster {
    pub fn width(&self) -> usize {
        match self {
            Raster::Byte { channels, .. } => channels[0].width(),
            Raster::Word { channels, .. } => channels[0].width(),
            Raster::Mf32(img) => img.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Raster::Byte { channels, .. } => channels[0].height(),
            Raster::Word { channels, .. } => channels[0].height(),
            Raster::Mf32(img) => img.height(),
        }
    }

    pub fn channels(&self) -> usize {
        match self {
            Raster::Byte { channels, .. } => channels.len(),
            Raster::Word { channels, .. } => channels.len(),
            Raster::Mf32(_) => 1,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Self::decode(&bytes).with_context(|| format!("decoding {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(MF32_MAGIC) {
            return decode_mf32(&bytes[4..]);
        }
        let channels = match bytes.get(..2) {
            Some(b"P5") => 1,
            Some(b"P6") => 3,
            _ => bail!("unrecognized header: expected P5, P6 or MF32"),
        };
        let mut h = Header { bytes, pos: 2 };
        let width = h.number("width")?;
        let height = h.number("height")?;
        let maxval = h.number("maxval")?;
        ensure!((1..=65535).contains(&maxval), "unsupported maxval {maxval}");
        ensure!(width > 0 && height > 0, "image has no pixels");
        match bytes.get(h.pos) {
            Some(c) if c.is_ascii_whitespace() => h.pos += 1,
            _ => bail!("missing whitespace after maxval"),
        }
        let raster = &bytes[h.pos..];
        let sample_bytes = if maxval < 256 { 1 } else { 2 };
        let samples = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .context("dimensions overflow")?;
        ensure!(
            raster.len() >= samples * sample_bytes,
            "truncated raster: need {} bytes, have {}",
            samples * sample_bytes,
            raster.len()
        );
        let maxval = maxval as u16;
        if sample_bytes == 1 {
            let values = &raster[..samples];
            Ok(Raster::Byte {
                maxval,
                channels: split(values, width, height, channels)?,
            })
        } else {
            let values: Vec<u16> = raster[..samples * 2]
                .chunks_exact(2)
                .map(|b| u16::from_be_bytes([b[0], b[1]]))
                .collect();
            Ok(Raster::Word {
                maxval,
                channels: split(&values, width, height, channels)?,
            })
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Raster::Byte { maxval, channels } => {
                let mut out = pnm_header(channels.len(), self.width(), self.height(), *maxval);
                out.extend(interleave(channels));
                out
            }
            Raster::Word { maxval, channels } => {
                let mut out = pnm_header(channels.len(), self.width(), self.height(), *maxval);
                out.extend(interleave(channels).into_iter().flat_map(u16::to_be_bytes));
                out
            }
            Raster::Mf32(img) => {
                let mut out = MF32_MAGIC.to_vec();
                out.extend((img.width() as u32).to_le_bytes());
                out.extend((img.height() as u32).to_le_bytes());
                out.extend(img.pixels().iter().flat_map(|v| v.to_le_bytes()));
                out
            }
        }
    }

    /// Applies `f` to every channel.
    pub fn try_map(&self, f: &dyn ChannelFilter) -> tilemedian::Result<Self> {
        Ok(match self {
            Raster::Byte { maxval, channels } => Raster::Byte {
                maxval: *maxval,
                channels: channels.iter().map(|c| f.filter_u8(c)).collect::<Result<_, _>>()?,
            },
            Raster::Word { maxval, channels } => Raster::Word {
                maxval: *maxval,
                channels: channels.iter().map(|c| f.filter_u16(c)).collect::<Result<_, _>>()?,
            },
            Raster::Mf32(img) => Raster::Mf32(f.filter_u32(img)?),
        })
    }
}

/// One filter instantiated at every sample depth.
pub trait ChannelFilter {
    fn filter_u8(&self, img: &Image<u8>) -> tilemedian::Result<Image<u8>>;
    fn filter_u16(&self, img: &Image<u16>) -> tilemedian::Result<Image<u16>>;
    fn filter_u32(&self, img: &Image<u32>) -> tilemedian::Result<Image<u32>>;
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    /// Skips whitespace and `#` comments, then reads a decimal field.
    fn number(&mut self, what: &str) -> Result<usize> {
        loop {
            match self.bytes.get(self.pos) {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while !matches!(self.bytes.get(self.pos), None | Some(b'\n' | b'\r')) {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        ensure!(self.pos > start, "bad header: expected {what}");
        std::str::from_utf8(&self.bytes[start..self.pos])?
            .parse()
            .with_context(|| format!("bad header: {what} out of range"))
    }
}

fn decode_mf32(body: &[u8]) -> Result<Raster> {
    ensure!(body.len() >= 8, "truncated MF32 header");
    let width = u32::from_le_bytes(body[0..4].try_into()?) as usize;
    let height = u32::from_le_bytes(body[4..8].try_into()?) as usize;
    ensure!(width > 0 && height > 0, "image has no pixels");
    let samples = width.checked_mul(height).context("dimensions overflow")?;
    let raster = &body[8..];
    ensure!(
        raster.len() >= samples * 4,
        "truncated raster: need {} bytes, have {}",
        samples * 4,
        raster.len()
    );
    let data = raster[..samples * 4]
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Raster::Mf32(Image::new(width, height, data)?))
}

fn pnm_header(channels: usize, width: usize, height: usize, maxval: u16) -> Vec<u8> {
    let magic = if channels == 1 { "P5" } else { "P6" };
    format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes()
}

fn split<P: Pixel>(values: &[P], width: usize, height: usize, channels: usize) -> Result<Vec<Image<P>>> {
    (0..channels)
        .map(|c| {
            let data = values.iter().skip(c).step_by(channels).copied().collect();
            Ok(Image::new(width, height, data)?)
        })
        .collect()
}

fn interleave<P: Pixel>(channels: &[Image<P>]) -> Vec<P> {
    let n = channels[0].pixels().len();
    (0..n)
        .flat_map(|i| channels.iter().map(move |c| c.pixels()[i]))
        .collect()
}
