//! Tiling arithmetic shared by both engines.
//!
//! A tile of `t_w x t_h` pixels anchored at `(x0, y0)` reads a footprint of
//! `(k_w + t_w - 1) x (k_h + t_h - 1)` pixels. The footprint is partitioned
//! into the core (the intersection of every pixel's kernel), extra columns
//! left and right of the core, extra rows above and below it, and four
//! corner blocks. Splitting a tile in two grows each child's core by the
//! innermost half of the extra lines on its side, and appends corner
//! elements to every extra line running across the split.
//!
//! All coordinates are absolute pixel coordinates and may be negative or
//! exceed the image; callers clamp reads.

use crate::error::{Error, Result};

/// Odd kernel dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    width: usize,
    height: usize,
}

impl KernelSpec {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        for side in [width, height] {
            if side < 3 || side % 2 == 0 {
                return Err(Error::InvalidKernel(side));
            }
        }
        Ok(Self { width, height })
    }

    pub fn square(k: usize) -> Result<Self> {
        Self::new(k, k)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn radius_x(&self) -> usize {
        (self.width - 1) / 2
    }

    pub fn radius_y(&self) -> usize {
        (self.height - 1) / 2
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    /// 1-based rank of the median within a full kernel.
    pub fn median_rank(&self) -> usize {
        self.area().div_ceil(2)
    }
}

/// Root tile side for a `k x k` kernel: `2^(floor(log2 k) - 1)`.
pub fn root_tile_size(k: usize) -> Result<usize> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidKernel(k));
    }
    Ok(1 << (k.ilog2() - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitAxis {
    /// Halves the width: the children sit side by side and absorb extra columns.
    Horizontal,
    /// Halves the height: the children are stacked and absorb extra rows.
    Vertical,
}

/// Tile size at a given recursion depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileDims {
    pub width: usize,
    pub height: usize,
    pub depth: usize,
}

impl TileDims {
    /// Root tile; both sides must be powers of two.
    pub fn root(width: usize, height: usize) -> Result<Self> {
        for side in [width, height] {
            if !side.is_power_of_two() {
                return Err(Error::InvalidTile(side));
            }
        }
        Ok(Self {
            width,
            height,
            depth: 0,
        })
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::root(side, side)
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn is_leaf(&self) -> bool {
        self.width == 1 && self.height == 1
    }

    /// Depth at which this tile's descendants become single pixels.
    pub fn leaf_depth(&self) -> usize {
        self.depth + self.area().ilog2() as usize
    }

    /// Square tiles split horizontally, others across their longer side.
    pub fn split_axis(&self) -> Option<SplitAxis> {
        if self.is_leaf() {
            None
        } else if self.width >= self.height {
            Some(SplitAxis::Horizontal)
        } else {
            Some(SplitAxis::Vertical)
        }
    }

    pub fn child(&self) -> Option<TileDims> {
        self.split_axis().map(|axis| match axis {
            SplitAxis::Horizontal => TileDims {
                width: self.width / 2,
                height: self.height,
                depth: self.depth + 1,
            },
            SplitAxis::Vertical => TileDims {
                width: self.width,
                height: self.height / 2,
                depth: self.depth + 1,
            },
        })
    }
}

/// Applies the split recurrence `depth` times to `root`.
pub fn tile_dims_at_depth(root: TileDims, depth: usize) -> Result<TileDims> {
    let leaf = root.leaf_depth();
    if depth < root.depth || depth > leaf {
        return Err(Error::DepthOutOfRange { depth, leaf });
    }
    let mut dims = root;
    while dims.depth < depth {
        dims = dims.child().expect("depth bounded by leaf level");
    }
    Ok(dims)
}

/// Half-open integer interval `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: i64,
    pub len: usize,
}

impl Span {
    pub fn new(start: i64, len: usize) -> Self {
        Self { start, len }
    }

    pub fn end(&self) -> i64 {
        self.start + self.len as i64
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: i64) -> bool {
        v >= self.start && v < self.end()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        self.start..self.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: Span,
    pub y: Span,
}

impl Rect {
    pub fn new(x: Span, y: Span) -> Self {
        Self { x, y }
    }

    pub fn width(&self) -> usize {
        self.x.len
    }

    pub fn height(&self) -> usize {
        self.y.len
    }

    pub fn area(&self) -> usize {
        self.x.len * self.y.len
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }

    /// Coordinates in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.y.iter().flat_map(move |y| self.x.iter().map(move |x| (x, y)))
    }
}

/// Low (left or top) or high (right or bottom) side of a tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Low,
    High,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Low, Side::High];

    pub fn index(self) -> usize {
        match self {
            Side::Low => 0,
            Side::High => 1,
        }
    }
}

/// Partition of one tile's footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGeometry {
    pub anchor: (i64, i64),
    pub dims: TileDims,
    pub kernel: KernelSpec,
    pub footprint: Rect,
    pub core: Rect,
    /// Column ranges left and right of the core; each column spans `core.y`.
    pub extra_columns: [Span; 2],
    /// Row ranges above and below the core; each row spans `core.x`.
    pub extra_rows: [Span; 2],
    /// Top-left, top-right, bottom-left, bottom-right.
    pub corners: [Rect; 4],
}

/// Computes the footprint partition of the tile anchored at `anchor`.
pub fn region_partition(anchor: (i64, i64), dims: TileDims, kernel: KernelSpec) -> Result<TileGeometry> {
    let (tw, th) = (dims.width, dims.height);
    if tw == 0 || th == 0 || tw > kernel.width() || th > kernel.height() {
        return Err(Error::TileLargerThanKernel {
            tile_w: tw,
            tile_h: th,
            kernel_w: kernel.width(),
            kernel_h: kernel.height(),
        });
    }
    let (ax, ay) = anchor;
    let rx = kernel.radius_x() as i64;
    let ry = kernel.radius_y() as i64;

    let footprint = Rect::new(
        Span::new(ax - rx, kernel.width() + tw - 1),
        Span::new(ay - ry, kernel.height() + th - 1),
    );
    let core = Rect::new(
        Span::new(ax + tw as i64 - 1 - rx, kernel.width() - tw + 1),
        Span::new(ay + th as i64 - 1 - ry, kernel.height() - th + 1),
    );
    let extra_columns = [Span::new(ax - rx, tw - 1), Span::new(ax + rx + 1, tw - 1)];
    let extra_rows = [Span::new(ay - ry, th - 1), Span::new(ay + ry + 1, th - 1)];
    let corners = [
        Rect::new(extra_columns[0], extra_rows[0]),
        Rect::new(extra_columns[1], extra_rows[0]),
        Rect::new(extra_columns[0], extra_rows[1]),
        Rect::new(extra_columns[1], extra_rows[1]),
    ];
    Ok(TileGeometry {
        anchor,
        dims,
        kernel,
        footprint,
        core,
        extra_columns,
        extra_rows,
        corners,
    })
}

impl TileGeometry {
    pub fn extra_column_rect(&self, side: Side) -> Rect {
        Rect::new(self.extra_columns[side.index()], self.core.y)
    }

    pub fn extra_row_rect(&self, side: Side) -> Rect {
        Rect::new(self.core.x, self.extra_rows[side.index()])
    }

    pub fn corner_count(&self) -> usize {
        self.corners.iter().map(Rect::area).sum()
    }

    /// Pixel covered by a leaf tile.
    pub fn pixel(&self) -> Option<(i64, i64)> {
        self.dims.is_leaf().then_some(self.anchor)
    }
}

/// How one child of a split inherits its parent's state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildSplit {
    pub side: Side,
    pub geometry: TileGeometry,
    /// Parent extra lines (columns for a horizontal split, rows for a
    /// vertical one) merged into the child core. These are the lines on the
    /// child's side nearest to the parent core.
    pub merged_lines: Span,
    /// Parent extra lines that remain extra lines of the child, low and high side.
    pub kept_lines: [Span; 2],
    /// Cross lines (extra rows for a horizontal split) that each gain
    /// `merged_lines.len` corner elements, low and high side.
    pub extended_lines: [Span; 2],
}

impl ChildSplit {
    /// Corner coordinates appended to the cross line at `line`.
    pub fn appended_corners(&self, axis: SplitAxis, line: i64) -> Vec<(i64, i64)> {
        match axis {
            SplitAxis::Horizontal => self.merged_lines.iter().map(|x| (x, line)).collect(),
            SplitAxis::Vertical => self.merged_lines.iter().map(|y| (line, y)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMap {
    pub parent: TileGeometry,
    pub axis: SplitAxis,
    pub children: [ChildSplit; 2],
}

/// Splits `parent` along the axis chosen by [`TileDims::split_axis`].
pub fn split_map(parent: &TileGeometry) -> Result<SplitMap> {
    let axis = parent.dims.split_axis().ok_or(Error::LeafSplit)?;
    let child_dims = parent.dims.child().ok_or(Error::LeafSplit)?;
    let (ax, ay) = parent.anchor;
    let children = Side::BOTH.map(|side| {
        let offset = match side {
            Side::Low => 0,
            Side::High => 1,
        };
        let (anchor, half) = match axis {
            SplitAxis::Horizontal => ((ax + (offset * child_dims.width) as i64, ay), child_dims.width),
            SplitAxis::Vertical => ((ax, ay + (offset * child_dims.height) as i64), child_dims.height),
        };
        let geometry = region_partition(anchor, child_dims, parent.kernel)
            .expect("child tiles are never larger than their parent");
        let (parent_core, child_core) = match axis {
            SplitAxis::Horizontal => (parent.core.x, geometry.core.x),
            SplitAxis::Vertical => (parent.core.y, geometry.core.y),
        };
        let merged_lines = match side {
            Side::Low => Span::new(child_core.start, half),
            Side::High => Span::new(parent_core.end(), half),
        };
        let (kept_lines, extended_lines) = match axis {
            SplitAxis::Horizontal => (geometry.extra_columns, geometry.extra_rows),
            SplitAxis::Vertical => (geometry.extra_rows, geometry.extra_columns),
        };
        ChildSplit {
            side,
            geometry,
            merged_lines,
            kept_lines,
            extended_lines,
        }
    });
    Ok(SplitMap {
        parent: *parent,
        axis,
        children,
    })
}

/// Candidate window for a median once `seen` of `total` values are known.
///
/// `lo..=hi` are 1-based ranks among all seen values (including ones already
/// discarded); every value outside the window is provably not the median.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetentionWindow {
    pub total: usize,
    pub seen: usize,
    pub lo: usize,
    pub hi: usize,
}

impl RetentionWindow {
    pub fn candidates(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn discarded_low(&self) -> usize {
        self.lo - 1
    }

    pub fn discarded_high(&self) -> usize {
        self.seen - self.hi
    }

    pub fn unseen(&self) -> usize {
        self.total - self.seen
    }

    pub fn median_rank(&self) -> usize {
        self.total.div_ceil(2)
    }
}

pub fn retention_window(total: usize, seen: usize) -> Result<RetentionWindow> {
    if seen == 0 || seen > total || total.is_multiple_of(2) {
        return Err(Error::InvalidRetention { total, seen });
    }
    let rank = total.div_ceil(2);
    let unseen = total - seen;
    Ok(RetentionWindow {
        total,
        seen,
        lo: rank.saturating_sub(unseen).max(1),
        hi: seen.min(rank),
    })
}

/// Grid of root tiles covering an image. Tiles that overhang the right or
/// bottom edge are computed in full; only in-bounds pixels are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGrid {
    pub image_width: usize,
    pub image_height: usize,
    pub tile_width: usize,
    pub tile_height: usize,
    pub columns: usize,
    pub rows: usize,
}

impl TileGrid {
    pub fn len(&self) -> usize {
        self.columns * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn anchor(&self, column: usize, row: usize) -> (i64, i64) {
        ((column * self.tile_width) as i64, (row * self.tile_height) as i64)
    }

    pub fn anchors(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.columns).map(move |c| self.anchor(c, r)))
    }

    pub fn padded_width(&self) -> usize {
        self.columns * self.tile_width
    }

    pub fn padded_height(&self) -> usize {
        self.rows * self.tile_height
    }
}

pub fn tile_schedule(width: usize, height: usize, root: TileDims) -> Result<TileGrid> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    Ok(TileGrid {
        image_width: width,
        image_height: height,
        tile_width: root.width,
        tile_height: root.height,
        columns: width.div_ceil(root.width),
        rows: height.div_ceil(root.height),
    })
}
