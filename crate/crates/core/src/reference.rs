//! Ground truth and test data.

use crate::error::{Error, Result};
use crate::image::{Image, Pixel};
use crate::parallel;
use crate::rng::SplitMix64;

/// Brute-force median filter: gathers every clamped `k_w x k_h`
/// neighbourhood and selects rank `(k_w k_h + 1) / 2`.
///
/// # Panics
///
/// If either kernel dimension is even.
pub fn oracle_median_filter<P: Pixel>(image: &Image<P>, k_w: usize, k_h: usize) -> Image<P> {
    assert!(k_w % 2 == 1 && k_h % 2 == 1, "kernel dimensions must be odd");
    let (w, h) = (image.width(), image.height());
    if w == 0 || h == 0 {
        return image.clone();
    }
    let (rx, ry) = ((k_w / 2) as i64, (k_h / 2) as i64);
    let rank = (k_w * k_h).div_ceil(2);
    let rows = parallel::map_range(h, |y| {
        let mut window = Vec::with_capacity(k_w * k_h);
        (0..w)
            .map(|x| {
                window.clear();
                for dy in -ry..=ry {
                    for dx in -rx..=rx {
                        window.push(image.get_clamped(x as i64 + dx, y as i64 + dy));
                    }
                }
                *window.select_nth_unstable(rank - 1).1
            })
            .collect::<Vec<P>>()
    });
    Image::new(w, h, rows.concat()).expect("row lengths match")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Constant(u64),
    /// `x + y`, wrapped to the pixel depth.
    Gradient,
    /// Uniform over the full pixel range.
    UniformRandom,
    /// `base` with each pixel replaced by 0 or the maximum value with
    /// probability `density` (each extreme equally likely).
    Impulse {
        base: Box<Pattern>,
        density: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestImageSpec {
    pub width: usize,
    pub height: usize,
    pub pattern: Pattern,
    pub seed: u64,
}

/// Deterministic test image; pixel values depend only on the spec and the
/// pixel type.
pub fn generate<P: Pixel>(spec: &TestImageSpec) -> Result<Image<P>> {
    let mut data = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            data.push(sample::<P>(&spec.pattern, spec.seed, spec.width, x, y)?);
        }
    }
    Image::new(spec.width, spec.height, data)
}

fn sample<P: Pixel>(pattern: &Pattern, seed: u64, width: usize, x: usize, y: usize) -> Result<P> {
    let index = (y * width + x) as u64;
    Ok(match pattern {
        Pattern::Constant(v) => P::from_u64_truncating(*v),
        Pattern::Gradient => P::from_u64_truncating((x + y) as u64),
        Pattern::UniformRandom => P::from_u64_truncating(SplitMix64::at(seed, index)),
        Pattern::Impulse { base, density } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Error::InvalidDensity(*density));
            }
            let mut g = SplitMix64::new(SplitMix64::at(seed ^ 0x1a9d_5e7e, index));
            if g.unit() < *density {
                if g.next_u64() & 1 == 0 {
                    P::default()
                } else {
                    P::MAX
                }
            } else {
                sample(base, seed, width, x, y)?
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Differs {
        x: usize,
        y: usize,
        left: u64,
        right: u64,
        count: usize,
    },
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal)
    }
}

/// Exact comparison; reports the first differing pixel in row-major order.
pub fn compare_images<P: Pixel>(a: &Image<P>, b: &Image<P>) -> Result<Comparison> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::ShapeMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    let mut first = None;
    let mut count = 0;
    for (i, (&p, &q)) in a.pixels().iter().zip(b.pixels()).enumerate() {
        if p != q {
            count += 1;
            first.get_or_insert((i, p, q));
        }
    }
    Ok(match first {
        None => Comparison::Equal,
        Some((i, p, q)) => Comparison::Differs {
            x: i % a.width(),
            y: i / a.width(),
            left: p.to_u64(),
            right: q.to_u64(),
            count,
        },
    })
}
