use std::fmt;

use crate::error::{Error, Result};

/// Unsigned integer sample type a filter can operate on.
pub trait Pixel: Copy + Ord + Default + Send + Sync + fmt::Debug + 'static {
    const BITS: u32;
    const MAX: Self;

    /// Keeps the low `BITS` bits of `v`.
    fn from_u64_truncating(v: u64) -> Self;
    fn to_u64(self) -> u64;
}

macro_rules! impl_pixel {
    ($($t:ty),*) => {$(
        impl Pixel for $t {
            const BITS: u32 = <$t>::BITS;
            const MAX: Self = <$t>::MAX;

            #[inline]
            fn from_u64_truncating(v: u64) -> Self {
                v as $t
            }

            #[inline]
            fn to_u64(self) -> u64 {
                self as u64
            }
        }
    )*};
}

impl_pixel!(u8, u16, u32);

/// Row-major single-channel image.
#[derive(Clone, PartialEq, Eq)]
pub struct Image<P> {
    width: usize,
    height: usize,
    data: Vec<P>,
}

impl<P: Pixel> Image<P> {
    pub fn new(width: usize, height: usize, data: Vec<P>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: P) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> P) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[P] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [P] {
        &mut self.data
    }

    pub fn into_pixels(self) -> Vec<P> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> P {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: P) {
        self.data[y * self.width + x] = value;
    }

    /// Reads with replicate (clamp-to-edge) borders.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> P {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[P] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Column-major copy: row `x` of the result is column `x` of `self`.
    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.data[y * self.width + x]);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            data,
        }
    }

    pub fn map<Q: Pixel>(&self, f: impl Fn(P) -> Q) -> Image<Q> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&p| f(p)).collect(),
        }
    }
}

impl<P: fmt::Debug> fmt::Debug for Image<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}
