//! Data-aware engine.
//!
//! The tiling recursion runs as image-wide passes over sorted buffers:
//!
//! * row runs: for every tile column and every padded image row, the row
//!   sorted over the tile column's core columns (shared by all tiles in
//!   that column);
//! * column runs: the same per tile row, read from a transposed copy;
//! * candidates: the retained core values of every tile.
//!
//! Each extend pass applies two splits (horizontal, then vertical) and
//! halves the tile side. Tiles at one level share a retention window, so
//! only the candidate arrays are per tile.

mod merge;

use std::fmt::Write as _;

pub use merge::{kway_merge_binary, merge_path_partition, parallel_merge, MergePathSplit};

use merge::{kway_counted, merge_counted, merge_range, select_merged};

use crate::error::{Error, Result};
use crate::geometry::{retention_window, root_tile_size, KernelSpec, RetentionWindow};
use crate::image::{Image, Pixel};
use crate::networks::{sorting_network, ComparatorNetwork};
use crate::parallel;

/// Smallest kernel the engine accepts.
pub const MIN_KERNEL: usize = 9;

/// Column-major copy of `image`.
pub fn transpose<P: Pixel>(image: &Image<P>) -> Image<P> {
    image.transpose()
}

/// Default root tile side: `max(root_tile_size(k), 2)`.
pub fn aware_root(k: usize) -> Result<usize> {
    check_kernel(k)?;
    Ok(root_tile_size(k)?.max(2))
}

fn check_kernel(k: usize) -> Result<()> {
    KernelSpec::square(k)?;
    if k < MIN_KERNEL {
        return Err(Error::KernelTooSmallForAware(k));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassChecksum {
    pub pass: &'static str,
    pub level: usize,
    pub checksum: u64,
}

impl std::fmt::Display for PassChecksum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "pass={} level={} checksum={:016x}",
            self.pass, self.level, self.checksum
        )
    }
}

/// FNV-1a over the little-endian bytes of each value.
fn checksum<P: Pixel>(values: impl IntoIterator<Item = P>) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for b in v.to_u64().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Intermediate state of one horizontal slice between passes.
#[derive(Debug, Clone)]
pub struct PassBuffers<'a, P> {
    image: &'a Image<P>,
    transposed: &'a Image<P>,
    k: usize,
    /// First image row of the slice.
    y0: usize,
    /// Image rows in the slice.
    height: usize,
    pad_w: usize,
    pad_h: usize,
    tile: usize,
    level: usize,
    window: RetentionWindow,
    /// `[tile column][padded row][run]`.
    rows: Vec<P>,
    /// `[tile row][padded column][run]`.
    cols: Vec<P>,
    /// Row-major over tiles.
    candidates: Vec<Vec<P>>,
    comparisons: u64,
    checksums: Vec<PassChecksum>,
}

impl<'a, P: Pixel> PassBuffers<'a, P> {
    fn radius(&self) -> usize {
        self.k / 2
    }

    pub fn tile(&self) -> usize {
        self.tile
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn window(&self) -> RetentionWindow {
        self.window
    }

    /// Length of every row and column run: the core side `k - tile + 1`.
    pub fn run_len(&self) -> usize {
        self.k + 1 - self.tile
    }

    pub fn tile_columns(&self) -> usize {
        self.pad_w / self.tile
    }

    pub fn tile_rows(&self) -> usize {
        self.pad_h / self.tile
    }

    fn padded_rows(&self) -> usize {
        self.pad_h + 2 * self.radius()
    }

    fn padded_cols(&self) -> usize {
        self.pad_w + 2 * self.radius()
    }

    /// First core column of tile column `tc`.
    pub fn core_x(&self, tc: usize) -> i64 {
        (tc * self.tile + self.tile - 1) as i64 - self.radius() as i64
    }

    /// First core row of tile row `tr`.
    pub fn core_y(&self, tr: usize) -> i64 {
        (self.y0 + tr * self.tile + self.tile - 1) as i64 - self.radius() as i64
    }

    /// Image row `y` sorted over the core columns of tile column `tc`.
    pub fn row_run(&self, tc: usize, y: i64) -> &[P] {
        let yi = (y - self.y0 as i64 + self.radius() as i64) as usize;
        let len = self.run_len();
        &self.rows[(tc * self.padded_rows() + yi) * len..][..len]
    }

    /// Image column `x` sorted over the core rows of tile row `tr`.
    pub fn col_run(&self, tr: usize, x: i64) -> &[P] {
        let xi = (x + self.radius() as i64) as usize;
        let len = self.run_len();
        &self.cols[(tr * self.padded_cols() + xi) * len..][..len]
    }

    pub fn candidates(&self, tr: usize, tc: usize) -> &[P] {
        &self.candidates[tr * self.tile_columns() + tc]
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    pub fn checksums(&self) -> &[PassChecksum] {
        &self.checksums
    }

    fn record(&mut self, pass: &'static str, values: impl IntoIterator<Item = P>) {
        self.checksums.push(PassChecksum {
            pass,
            level: self.level,
            checksum: checksum(values),
        });
    }

    /// Sorts `len`-long runs into `buf`, one chunk of `per_chunk` runs per
    /// worker task; `load(chunk, run, wires)` fills the unsorted values.
    fn sorted_runs(
        chunks: usize,
        per_chunk: usize,
        len: usize,
        net: &ComparatorNetwork,
        load: impl Fn(usize, usize, &mut Vec<P>) + Sync + Send,
    ) -> (Vec<P>, u64) {
        let mut buf = vec![P::default(); chunks * per_chunk * len];
        let cmp = parallel::sum_chunks_mut(&mut buf, per_chunk * len, |c, chunk| {
            let mut wires = Vec::with_capacity(len);
            for (i, run) in chunk.chunks_mut(len).enumerate() {
                wires.clear();
                load(c, i, &mut wires);
                net.run(&mut wires);
                for (r, v) in run.iter_mut().enumerate() {
                    *v = wires[net.output_wire(r)];
                }
            }
            (per_chunk * net.size()) as u64
        });
        (buf, cmp)
    }
}

/// Row sort, column sort and core sort for the rows `y0..y0 + height` of
/// `image`, with root tiles of side `root`.
pub fn pass_init<'a, P: Pixel>(
    image: &'a Image<P>,
    transposed: &'a Image<P>,
    k: usize,
    root: usize,
    y0: usize,
    height: usize,
) -> Result<PassBuffers<'a, P>> {
    check_kernel(k)?;
    if !root.is_power_of_two() || root < 2 {
        return Err(Error::InvalidTile(root));
    }
    if root > k {
        return Err(Error::TileLargerThanKernel {
            tile_w: root,
            tile_h: root,
            kernel_w: k,
            kernel_h: k,
        });
    }
    if image.is_empty() || height == 0 || y0 + height > image.height() {
        return Err(Error::EmptyImage);
    }
    let len = k + 1 - root;
    let mut b = PassBuffers {
        image,
        transposed,
        k,
        y0,
        height,
        pad_w: image.width().div_ceil(root) * root,
        pad_h: height.div_ceil(root) * root,
        tile: root,
        level: 0,
        window: retention_window(k * k, len * len)?,
        rows: Vec::new(),
        cols: Vec::new(),
        candidates: Vec::new(),
        comparisons: 0,
        checksums: Vec::new(),
    };
    let net = sorting_network(len);
    let r = b.radius() as i64;

    let (rows, cmp) = PassBuffers::sorted_runs(b.tile_columns(), b.padded_rows(), len, &net, |tc, yi, w| {
        let (x0, y) = (b.core_x(tc), (y0 + yi) as i64 - r);
        w.extend((0..len as i64).map(|j| image.get_clamped(x0 + j, y)));
    });
    b.rows = rows;
    b.comparisons += cmp;
    let (cols, cmp) = PassBuffers::sorted_runs(b.tile_rows(), b.padded_cols(), len, &net, |tr, xi, w| {
        let (y0, x) = (b.core_y(tr), xi as i64 - r);
        w.extend((0..len as i64).map(|j| transposed.get_clamped(y0 + j, x)));
    });
    b.cols = cols;
    b.comparisons += cmp;

    let window = b.window;
    let tcs = b.tile_columns();
    let cores = parallel::map_range(b.tile_rows() * tcs, |t| {
        let (tr, tc) = (t / tcs, t % tcs);
        let y = b.core_y(tr);
        let runs: Vec<&[P]> = (0..len as i64).map(|j| b.row_run(tc, y + j)).collect();
        let mut cmp = 0;
        let mut merged = kway_counted(&runs, &mut cmp);
        merged.truncate(window.hi);
        merged.drain(..window.lo - 1);
        (merged, cmp)
    });
    b.comparisons += cores.iter().map(|c| c.1).sum::<u64>();
    b.candidates = cores.into_iter().map(|c| c.0).collect();

    b.record("init/rows", b.rows.clone());
    b.record("init/cols", b.cols.clone());
    b.record("init/core", b.candidates.concat());
    Ok(b)
}

/// One fused horizontal and vertical split: tiles of side `s` become tiles
/// of side `s / 2`.
pub fn pass_extend_level<P: Pixel>(b: PassBuffers<'_, P>) -> Result<PassBuffers<'_, P>> {
    let s = b.tile;
    if s < 4 {
        return Err(Error::DepthOutOfRange {
            depth: b.level + 1,
            leaf: b.level,
        });
    }
    let h = s / 2;
    let len = b.run_len();
    let len2 = len + h;
    let n = b.k * b.k;
    let corner_net = sorting_network(h);
    let (image, transposed) = (b.image, b.transposed);

    let r = b.radius() as i64;
    let merged_start = |core: i64, side: usize| if side == 0 { core - h as i64 } else { core + len as i64 };

    let ((rows, row_cmp), (cols, col_cmp)) = parallel::join(
        || {
            extend_runs(2 * b.tile_columns(), b.padded_rows(), len, &corner_net, |tc2, yi, w| {
                let (tc, y) = (tc2 / 2, (b.y0 + yi) as i64 - r);
                let x0 = merged_start(b.core_x(tc), tc2 % 2);
                w.extend((0..h as i64).map(|j| image.get_clamped(x0 + j, y)));
                b.row_run(tc, y)
            })
        },
        || {
            if h < 2 {
                return (Vec::new(), 0);
            }
            extend_runs(2 * b.tile_rows(), b.padded_cols(), len, &corner_net, |tr2, xi, w| {
                let (tr, x) = (tr2 / 2, xi as i64 - r);
                let y0 = merged_start(b.core_y(tr), tr2 % 2);
                w.extend((0..h as i64).map(|j| transposed.get_clamped(y0 + j, x)));
                b.col_run(tr, x)
            })
        },
    );

    let mut next = PassBuffers {
        image,
        transposed,
        k: b.k,
        y0: b.y0,
        height: b.height,
        pad_w: b.pad_w,
        pad_h: b.pad_h,
        tile: h,
        level: b.level + 1,
        window: retention_window(n, len2 * len2)?,
        rows,
        cols,
        candidates: Vec::new(),
        comparisons: b.comparisons + row_cmp + col_cmp,
        checksums: b.checksums.clone(),
    };

    let w0 = b.window;
    let w1 = retention_window(n, len * len + h * len)?;
    let w2 = next.window;
    let tcs = b.tile_columns();
    let tcs2 = next.tile_columns();
    let quads = parallel::map_range(b.tile_rows() * tcs, |t| {
        let (tr, tc) = (t / tcs, t % tcs);
        let mut cmp = 0;
        let mut out: [Vec<P>; 4] = Default::default();
        for sx in 0..2 {
            let x0 = merged_start(b.core_x(tc), sx);
            let runs: Vec<&[P]> = (0..h as i64).map(|j| b.col_run(tr, x0 + j)).collect();
            let extra = kway_counted(&runs, &mut cmp);
            let mut c1 = Vec::with_capacity(w1.candidates());
            merge_range(
                &b.candidates[t],
                &extra,
                w1.lo - w0.lo,
                w1.candidates(),
                &mut c1,
                &mut cmp,
            );
            for sy in 0..2 {
                let y0 = merged_start(b.core_y(tr), sy);
                let runs: Vec<&[P]> = (0..h as i64).map(|j| next.row_run(2 * tc + sx, y0 + j)).collect();
                let extra = kway_counted(&runs, &mut cmp);
                let mut c2 = Vec::with_capacity(w2.candidates());
                merge_range(&c1, &extra, w2.lo - w1.lo, w2.candidates(), &mut c2, &mut cmp);
                out[sy * 2 + sx] = c2;
            }
        }
        (out, cmp)
    });
    let mut candidates = vec![Vec::new(); next.tile_rows() * tcs2];
    for (t, (quad, cmp)) in quads.into_iter().enumerate() {
        let (tr, tc) = (t / tcs, t % tcs);
        next.comparisons += cmp;
        for (q, cand) in quad.into_iter().enumerate() {
            candidates[(2 * tr + q / 2) * tcs2 + 2 * tc + q % 2] = cand;
        }
    }
    next.candidates = candidates;

    next.record("extend/rows", next.rows.clone());
    next.record("extend/cols", next.cols.clone());
    next.record("extend/core", next.candidates.concat());
    Ok(next)
}

/// Builds `count * per` runs of length `len + h`: `line(chunk, i, wires)`
/// loads the `h` new values into `wires` and returns the old sorted run
/// they are merged into.
fn extend_runs<'b, P: Pixel>(
    count: usize,
    per: usize,
    len: usize,
    net: &ComparatorNetwork,
    line: impl Fn(usize, usize, &mut Vec<P>) -> &'b [P] + Sync + Send,
) -> (Vec<P>, u64) {
    let h = net.wires();
    let len2 = len + h;
    let mut buf = vec![P::default(); count * per * len2];
    let cmp = parallel::sum_chunks_mut(&mut buf, per * len2, |c, chunk| {
        let mut cmp = 0;
        let mut wires = Vec::with_capacity(h);
        let mut sorted = Vec::with_capacity(h);
        let mut merged = Vec::with_capacity(len2);
        for (i, run) in chunk.chunks_mut(len2).enumerate() {
            wires.clear();
            let old = line(c, i, &mut wires);
            net.run(&mut wires);
            sorted.clear();
            sorted.extend((0..h).map(|r| wires[net.output_wire(r)]));
            merged.clear();
            merge_range(old, &sorted, 0, len2, &mut merged, &mut cmp);
            run.copy_from_slice(&merged);
            cmp += net.size() as u64;
        }
        cmp
    });
    (buf, cmp)
}

/// Last two splits of 2x2 tiles, selecting each pixel's median directly.
/// Returns the slice's output rows and the final buffers' statistics.
pub fn pass_finalize<P: Pixel>(mut b: PassBuffers<'_, P>) -> Result<(Vec<P>, PassBuffers<'_, P>)> {
    if b.tile != 2 {
        return Err(Error::DepthOutOfRange {
            depth: b.level,
            leaf: b.level + b.tile.ilog2() as usize - 1,
        });
    }
    let len = b.run_len();
    let n = b.k * b.k;
    let w0 = b.window;
    let w1 = retention_window(n, len * len + len)?;
    let rank = n.div_ceil(2);
    let width = b.image.width();
    let tcs = b.tile_columns();
    let mut out = vec![P::default(); width * b.height];
    let view = &b;
    let cmp = parallel::sum_chunks_mut(&mut out, 2 * width, |tr, chunk| {
        let mut cmp = 0;
        let mut c1 = Vec::with_capacity(w1.candidates());
        for tc in 0..tcs {
            for sx in 0..2 {
                let x = 2 * tc + sx;
                if x >= width {
                    break;
                }
                let mx = if sx == 0 {
                    view.core_x(tc) - 1
                } else {
                    view.core_x(tc) + len as i64
                };
                c1.clear();
                merge_range(
                    view.candidates(tr, tc),
                    view.col_run(tr, mx),
                    w1.lo - w0.lo,
                    w1.candidates(),
                    &mut c1,
                    &mut cmp,
                );
                for sy in 0..2 {
                    if (sy + 1) * width > chunk.len() {
                        break;
                    }
                    let my = if sy == 0 {
                        view.core_y(tr) - 1
                    } else {
                        view.core_y(tr) + len as i64
                    };
                    let corner = [view.image.get_clamped(mx, my)];
                    let row = merge_counted(view.row_run(tc, my), &corner, &mut cmp);
                    chunk[sy * width + x] = select_merged(&c1, &row, rank - w1.lo, &mut cmp);
                }
            }
        }
        cmp
    });
    b.comparisons += cmp;
    b.record("finalize", out.iter().copied());
    Ok((out, b))
}

/// Totals from one filter run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AwareStats {
    pub comparisons: u64,
    pub slices: usize,
    pub slice_rows: usize,
    /// Comparisons per pass kind: `init`, `extend`, `finalize`.
    pub by_pass: [(&'static str, u64); 3],
    pub checksums: Vec<PassChecksum>,
}

impl AwareStats {
    /// `pass=<name> level=<i> checksum=<hex64>`, one line per pass and slice.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for c in &self.checksums {
            let _ = writeln!(s, "{c}");
        }
        s
    }
}

/// Peak buffer bytes for a slice of `rows` image rows.
pub fn buffer_bytes(width: usize, rows: usize, k: usize, root: usize, pixel_bytes: usize) -> usize {
    let r = k / 2;
    let pad_w = width.div_ceil(root) * root;
    let pad_h = rows.div_ceil(root) * root;
    let level = |s: usize| {
        let len = k + 1 - s;
        let rows = pad_w / s * (pad_h + 2 * r) * len;
        let cols = pad_h / s * (pad_w + 2 * r) * len;
        let seen = len * len;
        let cands = (pad_w / s) * (pad_h / s) * retention_window(k * k, seen).map_or(seen, |w| w.candidates());
        rows + cols + cands
    };
    let mut peak = 0;
    let mut s = root;
    while s >= 2 {
        let next = if s > 2 { level(s / 2) } else { pad_w * pad_h };
        peak = peak.max(level(s) + next);
        s /= 2;
    }
    peak * pixel_bytes
}

/// Largest slice height (a multiple of the root side) whose buffers fit
/// in `budget` bytes; never less than one tile row.
pub fn slice_rows(
    width: usize,
    height: usize,
    k: usize,
    root: usize,
    budget: Option<usize>,
    pixel_bytes: usize,
) -> usize {
    let Some(budget) = budget else {
        return height;
    };
    let mut rows = height.div_ceil(root) * root;
    while rows > root && buffer_bytes(width, rows, k, root, pixel_bytes) > budget {
        rows = (rows / 2).div_ceil(root) * root;
    }
    rows.min(height).max(1)
}

/// `k x k` median with replicated borders. When `slice_budget` is set the
/// image is processed in horizontal slices whose buffers fit the budget.
pub fn filter_image_aware<P: Pixel>(
    image: &Image<P>,
    k: usize,
    workers: usize,
    slice_budget: Option<usize>,
) -> Result<Image<P>> {
    filter_image_aware_stats(image, k, None, workers, slice_budget).map(|r| r.0)
}

/// As [`filter_image_aware`], with an optional root override, returning the
/// comparison count and pass checksums.
pub fn filter_image_aware_stats<P: Pixel>(
    image: &Image<P>,
    k: usize,
    root: Option<usize>,
    workers: usize,
    slice_budget: Option<usize>,
) -> Result<(Image<P>, AwareStats)> {
    check_kernel(k)?;
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    let root = match root {
        Some(r) => r,
        None => aware_root(k)?,
    };
    let (w, h) = (image.width(), image.height());
    let rows = slice_rows(w, h, k, root, slice_budget, std::mem::size_of::<P>());
    parallel::with_workers(workers, || {
        let transposed = transpose(image);
        let mut out = Vec::with_capacity(w * h);
        let mut stats = AwareStats {
            comparisons: 0,
            slices: 0,
            slice_rows: rows,
            by_pass: [("init", 0), ("extend", 0), ("finalize", 0)],
            checksums: Vec::new(),
        };
        for y0 in (0..h).step_by(rows) {
            let mut b = pass_init(image, &transposed, k, root, y0, rows.min(h - y0))?;
            stats.by_pass[0].1 += b.comparisons();
            let before = b.comparisons();
            while b.tile() > 2 {
                b = pass_extend_level(b)?;
            }
            stats.by_pass[1].1 += b.comparisons() - before;
            let before = b.comparisons();
            let (part, b) = pass_finalize(b)?;
            stats.by_pass[2].1 += b.comparisons() - before;
            out.extend(part);
            stats.comparisons += b.comparisons();
            stats.checksums.extend_from_slice(b.checksums());
            stats.slices += 1;
        }
        Ok((Image::new(w, h, out)?, stats))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{generate, oracle_median_filter, Pattern, TestImageSpec};
    use crate::rng::SplitMix64;

    fn random(w: usize, h: usize, seed: u64) -> Image<u16> {
        generate(&TestImageSpec {
            width: w,
            height: h,
            pattern: Pattern::UniformRandom,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn transpose_examples() {
        let img = Image::<u8>::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let t = transpose(&img);
        assert_eq!((t.width(), t.height()), (2, 3));
        assert_eq!(t.pixels(), &[1, 4, 2, 5, 3, 6]);
        assert_eq!(transpose(&t), img);
        let line = Image::<u8>::new(5, 1, vec![1; 5]).unwrap();
        assert_eq!((transpose(&line).width(), transpose(&line).height()), (1, 5));
    }

    #[test]
    fn init_k9_root8() {
        let img = random(32, 32, 1);
        let t = transpose(&img);
        let b = pass_init(&img, &t, 9, 8, 0, 32).unwrap();
        assert_eq!(b.run_len(), 2);
        let w = b.window();
        assert_eq!((w.seen, w.lo, w.hi), (4, 1, 4));
    }

    #[test]
    fn rejects_small_kernels_and_bad_roots() {
        let img = random(8, 8, 1);
        let t = transpose(&img);
        assert_eq!(
            pass_init(&img, &t, 7, 2, 0, 8).unwrap_err(),
            Error::KernelTooSmallForAware(7)
        );
        assert_eq!(pass_init(&img, &t, 9, 3, 0, 8).unwrap_err(), Error::InvalidTile(3));
        assert!(matches!(
            pass_init(&img, &t, 9, 16, 0, 8),
            Err(Error::TileLargerThanKernel { .. })
        ));
        assert_eq!(
            filter_image_aware(&img, 5, 0, None).unwrap_err(),
            Error::KernelTooSmallForAware(5)
        );
        let b = pass_init(&img, &t, 9, 2, 0, 8).unwrap();
        assert!(matches!(pass_extend_level(b), Err(Error::DepthOutOfRange { .. })));
    }

    #[test]
    fn buffers_match_naive_resort() {
        let img = random(32, 32, 2);
        let t = transpose(&img);
        let k = 11;
        let mut b = pass_init(&img, &t, k, 8, 0, 32).unwrap();
        loop {
            let len = b.run_len() as i64;
            for tc in 0..b.tile_columns() {
                for y in [-5i64, 0, 17, 36] {
                    let mut v: Vec<u16> = (0..len).map(|j| img.get_clamped(b.core_x(tc) + j, y)).collect();
                    v.sort_unstable();
                    assert_eq!(b.row_run(tc, y), &v[..], "tile {} row {y}", b.tile());
                }
            }
            if b.tile() > 2 || b.level() == 0 {
                for tr in 0..b.tile_rows() {
                    for x in [-5i64, 3, 31, 36] {
                        let mut v: Vec<u16> = (0..len).map(|j| img.get_clamped(x, b.core_y(tr) + j)).collect();
                        v.sort_unstable();
                        assert_eq!(b.col_run(tr, x), &v[..]);
                    }
                }
            }
            if b.tile() == 2 {
                break;
            }
            b = pass_extend_level(b).unwrap();
        }
    }

    /// The median of every pixel equals rank `r - d_lo` of the tile's
    /// candidates together with the kernel values outside the core.
    fn assert_median_preserved(b: &PassBuffers<'_, u16>, img: &Image<u16>, oracle: &Image<u16>) {
        let k = b.k as i64;
        let s = b.tile();
        let len = b.run_len() as i64;
        let rank = (b.k * b.k).div_ceil(2);
        let d_lo = b.window().lo - 1;
        for tr in 0..b.tile_rows() {
            for tc in 0..b.tile_columns() {
                let (cx, cy) = (b.core_x(tc), b.core_y(tr));
                for dy in 0..s {
                    for dx in 0..s {
                        let (x, y) = (tc * s + dx, tr * s + dy);
                        if x >= img.width() || y >= img.height() {
                            continue;
                        }
                        let mut pool = b.candidates(tr, tc).to_vec();
                        for ky in y as i64 - k / 2..=y as i64 + k / 2 {
                            for kx in x as i64 - k / 2..=x as i64 + k / 2 {
                                let in_core = (cx..cx + len).contains(&kx) && (cy..cy + len).contains(&ky);
                                if !in_core {
                                    pool.push(img.get_clamped(kx, ky));
                                }
                            }
                        }
                        pool.sort_unstable();
                        assert_eq!(pool[rank - d_lo - 1], oracle.get(x, y), "pixel ({x},{y}) tile {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn medians_survive_every_pass() {
        for seed in 0..10 {
            let img = random(48, 48, seed);
            let t = transpose(&img);
            for k in [9, 13] {
                let oracle = oracle_median_filter(&img, k, k);
                let mut b = pass_init(&img, &t, k, aware_root(k).unwrap(), 0, 48).unwrap();
                assert_median_preserved(&b, &img, &oracle);
                while b.tile() > 2 {
                    b = pass_extend_level(b).unwrap();
                    assert_median_preserved(&b, &img, &oracle);
                }
            }
        }
    }

    #[test]
    fn candidate_counts_follow_window() {
        let img = random(20, 20, 3);
        let t = transpose(&img);
        let mut b = pass_init(&img, &t, 17, 8, 0, 20).unwrap();
        loop {
            assert!(b.candidates.iter().all(|c| c.len() == b.window().candidates()));
            assert!(b.candidates.iter().all(|c| c.windows(2).all(|p| p[0] <= p[1])));
            if b.tile() == 2 {
                break;
            }
            b = pass_extend_level(b).unwrap();
        }
    }

    #[test]
    fn constant_image() {
        let img = Image::<u8>::filled(21, 13, 77);
        assert_eq!(filter_image_aware(&img, 9, 0, None).unwrap(), img);
    }

    #[test]
    fn matches_oracle() {
        let img = random(64, 64, 4);
        for k in [9, 11, 15, 17] {
            assert_eq!(
                filter_image_aware(&img, k, 0, None).unwrap(),
                oracle_median_filter(&img, k, k),
                "k={k}"
            );
        }
        let img = random(37, 23, 5);
        for k in [9, 25] {
            assert_eq!(
                filter_image_aware(&img, k, 0, None).unwrap(),
                oracle_median_filter(&img, k, k),
                "k={k}"
            );
        }
    }

    #[test]
    fn root_overrides_agree() {
        let img = random(30, 19, 6);
        let oracle = oracle_median_filter(&img, 9, 9);
        for root in [2, 4, 8] {
            let (out, _) = filter_image_aware_stats(&img, 9, Some(root), 0, None).unwrap();
            assert_eq!(out, oracle, "root {root}");
        }
    }

    #[test]
    fn slicing_is_invisible() {
        let img = random(40, 57, 7);
        let (whole, s1) = filter_image_aware_stats(&img, 11, None, 0, None).unwrap();
        let (sliced, s2) = filter_image_aware_stats(&img, 11, None, 0, Some(1)).unwrap();
        assert_eq!(whole, sliced);
        assert_eq!(s1.slices, 1);
        assert!(s2.slices > 1);
        assert_eq!(s2.slice_rows, 4);
    }

    #[test]
    fn slice_rows_respect_budget() {
        let full = buffer_bytes(100, 100, 15, 4, 2);
        assert_eq!(slice_rows(100, 100, 15, 4, Some(full), 2), 100);
        let rows = slice_rows(100, 100, 15, 4, Some(full / 3), 2);
        assert!(rows.is_multiple_of(4) && rows < 100);
        assert!(buffer_bytes(100, rows, 15, 4, 2) <= full / 3);
    }

    #[test]
    fn checksums_are_reproducible() {
        let img = random(24, 24, 8);
        let (_, a) = filter_image_aware_stats(&img, 9, None, 1, None).unwrap();
        let (_, b) = filter_image_aware_stats(&img, 9, None, 3, None).unwrap();
        assert_eq!(a, b);
        let dump = a.dump();
        assert!(dump.starts_with("pass=init/rows level=0 checksum="));
        assert!(dump.lines().last().unwrap().starts_with("pass=finalize level=1 "));
        assert_eq!(dump.lines().count(), 7);
    }

    #[test]
    fn comparisons_grow_roughly_linearly() {
        let mut rng = SplitMix64::new(9);
        let img = Image::<u32>::from_fn(64, 64, |_, _| rng.next_u64() as u32);
        let per_pixel = |k| filter_image_aware_stats(&img, k, None, 0, None).unwrap().1.comparisons as f64 / 4096.0;
        let (a, b) = (per_pixel(9), per_pixel(19));
        assert!(b / a < 3.0, "{a} -> {b}");
    }
}
