//! Exact median filtering by hierarchical tiling.
//!
//! Two engines share the same tiling arithmetic ([`geometry`]):
//!
//! * [`oblivious`] compiles a kernel size and root tile into a fixed
//!   program of min/max operations over a scratch array, built from the
//!   comparator networks in [`networks`], and runs it once per root tile.
//! * [`aware`] runs the same recursion as image-wide passes over sorted
//!   row, column and candidate buffers using ordinary merges.
//!
//! [`profile`] reports per-pixel operation counts from both engines.
//! [`reference`] holds the brute-force oracle and test-image generators.
//! Borders are replicated (clamp-to-edge) everywhere.

pub mod aware;
pub mod error;
pub mod geometry;
pub mod image;
pub mod networks;
pub mod oblivious;
pub mod parallel;
pub mod profile;
pub mod reference;
pub mod rng;

pub use error::{Error, Result};
pub use image::{Image, Pixel};

/// Kernel diameter at and above which `auto` picks the data-aware engine.
pub const AUTO_AWARE_MIN_K: usize = 23;

/// Engine selection for [`median_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Oblivious,
    Aware,
    Oracle,
    Auto,
}

impl Variant {
    /// The concrete engine `Auto` resolves to for kernel diameter `k`.
    pub fn resolve(self, k: usize) -> Variant {
        match self {
            Variant::Auto if k < AUTO_AWARE_MIN_K => Variant::Oblivious,
            Variant::Auto => Variant::Aware,
            v => v,
        }
    }
}

/// Options shared by the filter entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FilterOptions {
    /// Worker threads; `0` uses the default pool.
    pub workers: usize,
    /// Upper bound on intermediate buffer bytes for the data-aware engine.
    pub slice_budget: Option<usize>,
}

/// Filters `image` with a `k x k` median using the chosen engine.
pub fn median_filter<P: Pixel>(image: &Image<P>, k: usize, variant: Variant, opts: FilterOptions) -> Result<Image<P>> {
    geometry::KernelSpec::square(k)?;
    match variant.resolve(k) {
        Variant::Oblivious => oblivious::filter_image_oblivious(image, k, opts.workers),
        Variant::Aware => aware::filter_image_aware(image, k, opts.workers, opts.slice_budget),
        _ => {
            if image.is_empty() {
                return Err(Error::EmptyImage);
            }
            Ok(parallel::with_workers(opts.workers, || {
                reference::oracle_median_filter(image, k, k)
            }))
        }
    }
}
