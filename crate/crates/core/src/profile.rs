//! Per-pixel operation counts from the instrumented engines.

use crate::error::{Error, Result};
use crate::reference::{generate, Pattern, TestImageSpec};
use crate::{aware, oblivious, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub k: usize,
    /// Root tile side.
    pub tile: usize,
    pub variant: Variant,
    pub ops_per_pixel: f64,
    pub comparisons_per_pixel: f64,
    /// Per-pixel share of each stage kind (oblivious) or pass (aware).
    pub breakdown: Vec<(&'static str, f64)>,
}

impl Profile {
    /// `name=value` pairs joined by `;`, four decimals each.
    pub fn breakdown_field(&self) -> String {
        self.breakdown
            .iter()
            .map(|(name, v)| format!("{name}={v:.4}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Side of the square image the data-aware counts are taken on.
pub fn aware_image_side(k: usize) -> Result<usize> {
    Ok(16 * aware::aware_root(k)?)
}

/// Counts for a `k x k` median. Oblivious counts are exact and input
/// independent, with column sorts amortized across horizontally adjacent
/// tiles. Data-aware counts come from filtering a uniform random 16-bit
/// image of side [`aware_image_side`] generated from `seed`.
pub fn profile(k: usize, variant: Variant, seed: u64) -> Result<Profile> {
    match variant.resolve(k) {
        Variant::Oblivious => {
            let prog = oblivious::compile_default(k)?;
            let count = oblivious::op_count(&prog);
            let area = prog.root.area() as f64;
            let breakdown = count
                .by_kind
                .iter()
                .map(|(&kind, &ops)| {
                    let ops = match kind {
                        oblivious::StageKind::ColumnSort => prog.root.width * prog.column_sort.size(),
                        _ => ops,
                    };
                    (kind.name(), ops as f64 / area)
                })
                .collect();
            Ok(Profile {
                k,
                tile: prog.root.width,
                variant: Variant::Oblivious,
                ops_per_pixel: count.per_pixel,
                comparisons_per_pixel: count.per_pixel,
                breakdown,
            })
        }
        Variant::Aware => {
            let side = aware_image_side(k)?;
            let image = generate::<u16>(&TestImageSpec {
                width: side,
                height: side,
                pattern: Pattern::UniformRandom,
                seed,
            })?;
            let (_, stats) = aware::filter_image_aware_stats(&image, k, None, 0, None)?;
            let area = (side * side) as f64;
            let per_pixel = stats.comparisons as f64 / area;
            Ok(Profile {
                k,
                tile: aware::aware_root(k)?,
                variant: Variant::Aware,
                ops_per_pixel: per_pixel,
                comparisons_per_pixel: per_pixel,
                breakdown: stats.by_pass.iter().map(|&(p, c)| (p, c as f64 / area)).collect(),
            })
        }
        other => Err(Error::NotInstrumented(other)),
    }
}
