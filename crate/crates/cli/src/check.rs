use anyhow::Result;
use clap::ValueEnum;
use tilemedian::reference::{compare_images, generate, oracle_median_filter, Comparison, Pattern, TestImageSpec};
use tilemedian::{aware, median_filter, FilterOptions, Image, Pixel, Variant};

use crate::{check_kernel, Usage};

const OBLIVIOUS_KERNELS: [usize; 6] = [3, 5, 7, 9, 11, 15];
const AWARE_KERNELS: [usize; 5] = [9, 11, 15, 25, 31];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Matrix {
    /// 64x64 images at 8 bits.
    Small,
    /// 64x64 and 97x61 images at 8, 16 and 32 bits.
    Full,
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value_t = Matrix::Small)]
    matrix: Matrix,
    /// Comma-separated kernel sizes replacing the default lists; the aware
    /// engine only runs for sizes it supports.
    #[arg(long, value_delimiter = ',')]
    kernels: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Corrupts one output pixel per cell to exercise the diff report.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn images() -> Vec<(&'static str, Pattern)> {
    vec![
        ("constant", Pattern::Constant(77)),
        ("gradient", Pattern::Gradient),
        ("uniform", Pattern::UniformRandom),
        (
            "impulse",
            Pattern::Impulse {
                base: Box::new(Pattern::Gradient),
                density: 0.3,
            },
        ),
    ]
}

/// `(variant, k)` cells to run.
fn cells(kernels: Option<&[usize]>) -> Result<Vec<(Variant, usize)>, Usage> {
    let Some(ks) = kernels else {
        let mut out: Vec<_> = OBLIVIOUS_KERNELS.iter().map(|&k| (Variant::Oblivious, k)).collect();
        out.extend(AWARE_KERNELS.iter().map(|&k| (Variant::Aware, k)));
        return Ok(out);
    };
    let mut out = Vec::new();
    for &k in ks {
        check_kernel(k, Variant::Oblivious)?;
        out.push((Variant::Oblivious, k));
        if k >= aware::MIN_KERNEL {
            out.push((Variant::Aware, k));
        }
    }
    Ok(out)
}

struct Cell<'a> {
    image: &'a str,
    size: (usize, usize),
    variant: Variant,
    k: usize,
}

fn run_depth<P: Pixel>(args: &CheckArgs, cells: &[(Variant, usize)], size: (usize, usize)) -> Result<usize> {
    let opts = FilterOptions {
        workers: args.workers,
        slice_budget: None,
    };
    let mut diffs = 0;
    for (name, pattern) in images() {
        let img: Image<P> = generate(&TestImageSpec {
            width: size.0,
            height: size.1,
            pattern,
            seed: 42,
        })?;
        let mut oracles: Vec<(usize, Image<P>)> = Vec::new();
        for &(variant, k) in cells {
            let want = match oracles.iter().find(|o| o.0 == k) {
                Some(o) => &o.1,
                None => {
                    oracles.push((k, oracle_median_filter(&img, k, k)));
                    &oracles.last().expect("just pushed").1
                }
            };
            let mut got = median_filter(&img, k, variant, opts)?;
            if args.inject_fault {
                let (x, y) = (size.0 / 2, size.1 / 2);
                let v = got.get(x, y);
                got.set(x, y, P::from_u64_truncating(v.to_u64() ^ 1));
            }
            let cell = Cell {
                image: name,
                size,
                variant,
                k,
            };
            if !report::<P>(&cell, compare_images(&got, want)?) {
                diffs += 1;
            }
        }
    }
    Ok(diffs)
}

fn report<P: Pixel>(c: &Cell<'_>, cmp: Comparison) -> bool {
    let variant = if c.variant == Variant::Aware {
        "aware"
    } else {
        "oblivious"
    };
    let head = format!(
        "{:<8} {}x{} depth={:<2} {:<9} k={:<2}",
        c.image,
        c.size.0,
        c.size.1,
        P::BITS,
        variant,
        c.k
    );
    match cmp {
        Comparison::Equal => {
            println!("{head} equal");
            true
        }
        Comparison::Differs {
            x,
            y,
            left,
            right,
            count,
        } => {
            println!("{head} DIFF first at ({x},{y}): got {left}, oracle {right}; {count} pixels differ");
            false
        }
    }
}

pub fn run(args: &CheckArgs) -> Result<bool> {
    let cells = cells(args.kernels.as_deref())?;
    let sizes: &[(usize, usize)] = match args.matrix {
        Matrix::Small => &[(64, 64)],
        Matrix::Full => &[(64, 64), (97, 61)],
    };
    let mut total = 0;
    let mut diffs = 0;
    for &size in sizes {
        diffs += run_depth::<u8>(args, &cells, size)?;
        total += cells.len() * 4;
        if args.matrix == Matrix::Full {
            diffs += run_depth::<u16>(args, &cells, size)?;
            diffs += run_depth::<u32>(args, &cells, size)?;
            total += cells.len() * 8;
        }
    }
    println!("{total} cells, {diffs} differ");
    Ok(diffs == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cells() {
        let c = cells(None).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c.iter().filter(|c| c.0 == Variant::Aware).count(), 5);
    }

    #[test]
    fn restricted_cells() {
        assert_eq!(cells(Some(&[3])).unwrap(), vec![(Variant::Oblivious, 3)]);
        assert_eq!(cells(Some(&[9])).unwrap().len(), 2);
        assert!(cells(Some(&[4])).is_err());
    }
}
