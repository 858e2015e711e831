use thiserror::Error;

/// Errors reported by the filters, the tiling arithmetic and the network tooling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel size {0} must be odd and at least 3")]
    InvalidKernel(usize),
    #[error("tile side {0} must be a power of two")]
    InvalidTile(usize),
    #[error("tile {tile_w}x{tile_h} does not fit inside a {kernel_w}x{kernel_h} kernel")]
    TileLargerThanKernel {
        tile_w: usize,
        tile_h: usize,
        kernel_w: usize,
        kernel_h: usize,
    },
    #[error("root tile {0}x{1} exceeds the 256-pixel limit")]
    RootTooLarge(usize, usize),
    #[error("depth {depth} is past the leaf level {leaf}")]
    DepthOutOfRange { depth: usize, leaf: usize },
    #[error("a 1x1 tile cannot be split")]
    LeafSplit,
    #[error("retention window needs 1 <= seen <= total with odd total (seen {seen}, total {total})")]
    InvalidRetention { total: usize, seen: usize },
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("image is empty")]
    EmptyImage,
    #[error("image shapes differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("kernel {0} is below the data-aware minimum of 9; use the oblivious engine")]
    KernelTooSmallForAware(usize),
    #[error("impulse density {0} is outside [0, 1]")]
    InvalidDensity(f64),
    #[error("network description, line {line}: {message}")]
    NetworkParse { line: usize, message: String },
    #[error("variant {0:?} has no operation counters")]
    NotInstrumented(crate::Variant),
    #[error("invalid comparator ({0}, {1}) on a {2}-wire network")]
    InvalidComparator(usize, usize, usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
