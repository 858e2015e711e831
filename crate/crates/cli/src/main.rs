mod check;
mod opcount;
mod pnm;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use tilemedian::{aware, median_filter, FilterOptions, Image, Variant};

use crate::pnm::{ChannelFilter, Raster};

#[derive(Debug, Parser)]
#[command(
    name = "tilemedian",
    version,
    about = "Exact median filtering by hierarchical tiling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Median-filter a PGM, PPM or MF32 image.
    Filter(FilterArgs),
    /// Check the generated comparator networks with the zero-one harness.
    Verify(verify::VerifyArgs),
    /// Per-pixel operation counts over a range of kernel sizes.
    Opcount(opcount::OpcountArgs),
    /// Compare every engine against the brute-force oracle.
    Check(check::CheckArgs),
}

#[derive(Debug, clap::Args)]
struct FilterArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    /// Kernel diameter (odd, at least 3).
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
    variant: VariantArg,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Byte budget for the data-aware engine's intermediate buffers.
    #[arg(long, value_name = "BYTES")]
    slice_budget: Option<usize>,
    /// Accepted for symmetry with the other commands; filtering is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Auto,
    Oblivious,
    Aware,
    Oracle,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Auto => Variant::Auto,
            VariantArg::Oblivious => Variant::Oblivious,
            VariantArg::Aware => Variant::Aware,
            VariantArg::Oracle => Variant::Oracle,
        }
    }
}

/// Bad arguments caught after parsing; exits with status 2 like clap's own.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Rejects kernel sizes the chosen engine cannot run.
pub fn check_kernel(k: usize, variant: Variant) -> Result<(), Usage> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Usage(format!("--k {k}: kernel size must be odd and at least 3")));
    }
    if variant == Variant::Aware && k < aware::MIN_KERNEL {
        return Err(Usage(format!(
            "--k {k}: the aware variant needs k >= {}; use --variant oblivious",
            aware::MIN_KERNEL
        )));
    }
    Ok(())
}

struct Median {
    k: usize,
    variant: Variant,
    opts: FilterOptions,
}

impl ChannelFilter for Median {
    fn filter_u8(&self, img: &Image<u8>) -> tilemedian::Result<Image<u8>> {
        median_filter(img, self.k, self.variant, self.opts)
    }

    fn filter_u16(&self, img: &Image<u16>) -> tilemedian::Result<Image<u16>> {
        median_filter(img, self.k, self.variant, self.opts)
    }

    fn filter_u32(&self, img: &Image<u32>) -> tilemedian::Result<Image<u32>> {
        median_filter(img, self.k, self.variant, self.opts)
    }
}

fn cmd_filter(args: &FilterArgs) -> Result<bool> {
    let variant = Variant::from(args.variant);
    check_kernel(args.k, variant)?;
    let raster = Raster::read(&args.input)?;
    let median = Median {
        k: args.k,
        variant,
        opts: FilterOptions {
            workers: args.workers,
            slice_budget: args.slice_budget,
        },
    };
    let out = raster.try_map(&median)?;
    out.write(&args.output)?;
    eprintln!(
        "filtered {}x{} ({} channel{}) with k={} variant={:?}",
        raster.width(),
        raster.height(),
        raster.channels(),
        if raster.channels() == 1 { "" } else { "s" },
        args.k,
        variant.resolve(args.k),
    );
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Filter(a) => cmd_filter(a),
        Command::Verify(a) => verify::run(a),
        Command::Opcount(a) => opcount::run(a),
        Command::Check(a) => check::run(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
