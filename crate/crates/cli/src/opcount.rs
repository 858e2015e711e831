use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use tilemedian::profile::{profile, Profile};
use tilemedian::Variant;

use crate::{check_kernel, Usage, VariantArg};

/// Largest doubling ratio accepted per engine.
const OBLIVIOUS_RATIO: f64 = 3.0;
const AWARE_RATIO: f64 = 2.5;

#[derive(Debug, clap::Args)]
pub struct OpcountArgs {
    /// Kernel sizes `A:B[:S]` (inclusive, default step 2) or a single `K`.
    #[arg(long, value_name = "A:B:S")]
    sweep: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Oblivious)]
    variant: VariantArg,
    /// Where to write the CSV; stdout when absent.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Seed of the random image the data-aware counts are taken on.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

pub fn parse_sweep(text: &str) -> Result<Vec<usize>, Usage> {
    let bad = || Usage(format!("--sweep {text:?}: expected A:B[:S] with odd A, B and even S"));
    let fields: Vec<usize> = text
        .split(':')
        .map(|f| f.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (a, b, s) = match fields[..] {
        [k] => (k, k, 2),
        [a, b] => (a, b, 2),
        [a, b, s] => (a, b, s),
        _ => return Err(bad()),
    };
    if a > b || s == 0 || s % 2 == 1 || a % 2 == 0 {
        return Err(bad());
    }
    Ok((a..=b).step_by(s).collect())
}

fn csv(rows: &[Profile]) -> String {
    let mut out = String::from("k,t,variant,ops_per_pixel,comparisons_per_pixel,stage_breakdown\n");
    for p in rows {
        let variant = match p.variant {
            Variant::Aware => "aware",
            _ => "oblivious",
        };
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{:.4},{}",
            p.k,
            p.tile,
            variant,
            p.ops_per_pixel,
            p.comparisons_per_pixel,
            p.breakdown_field()
        );
    }
    out
}

/// `(k, 2k+1, ratio)` for every pair present in `rows` and counted by the
/// same engine.
pub fn doubling_ratios(rows: &[Profile]) -> Vec<(usize, usize, f64)> {
    rows.iter()
        .filter_map(|p| {
            let q = rows.iter().find(|q| q.k == 2 * p.k + 1 && q.variant == p.variant)?;
            Some((p.k, q.k, q.ops_per_pixel / p.ops_per_pixel))
        })
        .collect()
}

pub fn run(args: &OpcountArgs) -> Result<bool> {
    let variant = Variant::from(args.variant);
    if variant == Variant::Oracle {
        return Err(Usage("--variant oracle has no operation counters".into()).into());
    }
    let ks = parse_sweep(&args.sweep)?;
    for &k in &ks {
        check_kernel(k, variant)?;
    }
    let rows = ks
        .iter()
        .map(|&k| profile(k, variant, args.seed))
        .collect::<tilemedian::Result<Vec<_>>>()?;
    let table = csv(&rows);
    match &args.csv {
        Some(path) => std::fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{table}"),
    }
    for (k, k2, ratio) in doubling_ratios(&rows) {
        let (v, limit) = match rows.iter().find(|p| p.k == k).map(|p| p.variant) {
            Some(Variant::Aware) => ("aware", AWARE_RATIO),
            _ => ("oblivious", OBLIVIOUS_RATIO),
        };
        let verdict = if ratio <= limit { "within" } else { "above" };
        eprintln!("ratio {v} k={k}->{k2}: {ratio:.3} ({verdict} {limit})");
    }
    Ok(true)
}
