//! Data-oblivious engine.
//!
//! A kernel size and root tile compile into a [`SelectionProgram`]: a list
//! of comparator-network stages over a scratch array whose slot indices are
//! all fixed at compile time. Slots `[0, fw * fh)` hold the raw footprint in
//! row-major order; every stage gathers its input slots, runs its (pruned)
//! network and writes the retained ranks to fresh slots.

mod compile;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use compile::{compile_default, compile_plan, compile_plan_with, MAX_ROOT_AREA};

use crate::error::{Error, Result};
use crate::geometry::{self, KernelSpec, RetentionWindow, TileDims};
use crate::image::{Image, Pixel};
use crate::networks::{ComparatorNetwork, NetworkStats};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StageKind {
    ColumnSort,
    RowSort,
    CoreInit,
    ExtraMerge,
    CoreMerge,
    CornerSort,
    LineMerge,
}

impl StageKind {
    pub fn name(self) -> &'static str {
        match self {
            StageKind::ColumnSort => "col-sort",
            StageKind::RowSort => "row-sort",
            StageKind::CoreInit => "core-init",
            StageKind::ExtraMerge => "extra-merge",
            StageKind::CoreMerge => "core-merge",
            StageKind::CornerSort => "corner-sort",
            StageKind::LineMerge => "line-merge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub label: String,
    pub kind: StageKind,
    /// Scratch slots loaded onto wires `0..inputs.len()`.
    pub inputs: Vec<u32>,
    pub network: ComparatorNetwork,
    /// 1-based output ranks retained, inclusive.
    pub keep: (usize, usize),
    /// Slots receiving ranks `keep.0..=keep.1`.
    pub outputs: Vec<u32>,
    /// Retention window after this stage, for core stages.
    pub window: Option<RetentionWindow>,
}

/// Shape of every tile at one recursion depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSummary {
    pub depth: usize,
    pub dims: TileDims,
    pub core: (usize, usize),
    pub window: RetentionWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProgram {
    pub kernel: KernelSpec,
    pub root: TileDims,
    pub scratch_size: usize,
    /// Footprint width and height.
    pub footprint: (usize, usize),
    pub stages: Vec<Stage>,
    /// The first `column_stages` stages are the footprint column sorts.
    pub column_stages: usize,
    /// Slots holding each footprint column, sorted over the core rows.
    pub column_runs: Vec<Vec<u32>>,
    /// Median slot for each tile pixel, row-major.
    pub outputs: Vec<u32>,
    pub levels: Vec<LevelSummary>,
    /// Network used for the shared column sorts.
    pub column_sort: ComparatorNetwork,
}

impl SelectionProgram {
    pub fn footprint_len(&self) -> usize {
        self.footprint.0 * self.footprint.1
    }

    /// Rows of the footprint covered by the column sorts.
    fn core_rows(&self) -> std::ops::Range<usize> {
        let th = self.root.height;
        th - 1..self.footprint.1 + 1 - th
    }

    /// One line per stage: `stage <label>: in=<n> net_ops=<m> keep=[lo,hi]`.
    /// Core stages print their absolute retention window, the rest the
    /// retained output ranks.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for stage in &self.stages {
            let (lo, hi) = stage.window.map_or(stage.keep, |w| (w.lo, w.hi));
            let _ = writeln!(
                s,
                "stage {}: in={} net_ops={} keep=[{lo},{hi}]",
                stage.label,
                stage.inputs.len(),
                stage.network.size()
            );
        }
        s
    }
}

/// Runs the program on one footprint (row-major, `fw * fh` values) and
/// returns the tile's medians in row-major order.
pub fn run_tile<T: Ord + Copy + Default>(prog: &SelectionProgram, footprint: &[T]) -> Result<Vec<T>> {
    if footprint.len() != prog.footprint_len() {
        return Err(Error::LengthMismatch {
            expected: prog.footprint_len(),
            actual: footprint.len(),
        });
    }
    let mut scratch = vec![T::default(); prog.scratch_size];
    scratch[..footprint.len()].copy_from_slice(footprint);
    let mut wires = Vec::new();
    run_stages(&prog.stages, &mut scratch, &mut wires);
    Ok(prog.outputs.iter().map(|&s| scratch[s as usize]).collect())
}

fn run_stages<T: Ord + Copy>(stages: &[Stage], scratch: &mut [T], wires: &mut Vec<T>) {
    for stage in stages {
        wires.clear();
        wires.extend(stage.inputs.iter().map(|&s| scratch[s as usize]));
        stage.network.run(wires);
        for (i, &slot) in stage.outputs.iter().enumerate() {
            scratch[slot as usize] = wires[stage.network.output_wire(stage.keep.0 - 1 + i)];
        }
    }
}

/// `k x k` median of `image` with replicated borders, using the default
/// root tile. Column sorts are computed once per tile row and shared by
/// every tile of that row.
pub fn filter_image_oblivious<P: Pixel>(image: &Image<P>, k: usize, workers: usize) -> Result<Image<P>> {
    let prog = compile_default(k)?;
    filter_with_program(image, &prog, workers)
}

pub fn filter_with_program<P: Pixel>(image: &Image<P>, prog: &SelectionProgram, workers: usize) -> Result<Image<P>> {
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    let grid = geometry::tile_schedule(image.width(), image.height(), prog.root)?;
    let (w, h) = (image.width(), image.height());
    let (tw, th) = (prog.root.width, prog.root.height);
    let (fw, fh) = prog.footprint;
    let rx = prog.kernel.radius_x() as i64;
    let ry = prog.kernel.radius_y() as i64;
    let core_rows = prog.core_rows();
    let col_len = core_rows.len();
    let padded = grid.padded_width() + 2 * rx as usize;

    let mut out = vec![P::default(); w * h];
    parallel::with_workers(workers, || {
        parallel::sum_chunks_mut(&mut out, th * w, |row, chunk| {
            let ay = (row * th) as i64;
            let top = ay - ry;

            let mut columns = vec![P::default(); padded * col_len];
            let mut wires = Vec::with_capacity(col_len);
            for (i, col) in columns.chunks_mut(col_len).enumerate() {
                let x = i as i64 - rx;
                wires.clear();
                wires.extend(core_rows.clone().map(|fy| image.get_clamped(x, top + fy as i64)));
                prog.column_sort.run(&mut wires);
                for (r, v) in col.iter_mut().enumerate() {
                    *v = wires[prog.column_sort.output_wire(r)];
                }
            }

            let mut scratch = vec![P::default(); prog.scratch_size];
            for tile in 0..grid.columns {
                let ax = (tile * tw) as i64;
                let left = ax - rx;
                for fy in (0..fh).filter(|fy| !core_rows.contains(fy)) {
                    for fx in 0..fw {
                        scratch[fy * fw + fx] = image.get_clamped(left + fx as i64, top + fy as i64);
                    }
                }
                for (fx, run) in prog.column_runs.iter().enumerate() {
                    let col = &columns[(tile * tw + fx) * col_len..][..col_len];
                    for (&slot, &v) in run.iter().zip(col) {
                        scratch[slot as usize] = v;
                    }
                }
                run_stages(&prog.stages[prog.column_stages..], &mut scratch, &mut wires);
                for dy in 0..th {
                    let y = row * th + dy;
                    if y >= h {
                        break;
                    }
                    for dx in 0..tw.min(w.saturating_sub(tile * tw)) {
                        chunk[dy * w + tile * tw + dx] = scratch[prog.outputs[dy * tw + dx] as usize];
                    }
                }
            }
            0
        })
    });
    Image::new(w, h, out)
}

/// Static operation counts of a program.
#[derive(Debug, Clone, PartialEq)]
pub struct OpCount {
    /// `(label, ops)` for every stage.
    pub per_stage: Vec<(String, usize)>,
    pub total: usize,
    /// Ops spent in the footprint column sorts of one tile.
    pub column_sort: usize,
    /// Amortized ops per output pixel: column sorts count once per tile
    /// column they start in (`t_w` of them per tile), the rest per tile.
    pub per_pixel: f64,
    pub by_kind: BTreeMap<StageKind, usize>,
    pub stats: NetworkStats,
}

pub fn op_count(prog: &SelectionProgram) -> OpCount {
    let mut by_kind = BTreeMap::new();
    let mut stats = NetworkStats::default();
    let per_stage: Vec<(String, usize)> = prog
        .stages
        .iter()
        .map(|s| {
            let st = s.network.stats();
            stats.size += st.size;
            stats.compare_exchanges += st.compare_exchanges;
            stats.mins += st.mins;
            stats.maxes += st.maxes;
            stats.wires = stats.wires.max(st.wires);
            stats.depth += st.depth;
            *by_kind.entry(s.kind).or_insert(0) += st.size;
            (s.label.clone(), st.size)
        })
        .collect();
    let total: usize = per_stage.iter().map(|(_, n)| n).sum();
    let column_sort: usize = per_stage[..prog.column_stages].iter().map(|(_, n)| n).sum();
    let shared = prog.root.width * prog.column_sort.size();
    let per_pixel = (total - column_sort + shared) as f64 / prog.root.area() as f64;
    OpCount {
        per_stage,
        total,
        column_sort,
        per_pixel,
        by_kind,
        stats,
    }
}
