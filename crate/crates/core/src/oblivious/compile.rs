use std::collections::BTreeMap;

use super::{LevelSummary, SelectionProgram, Stage, StageKind};
use crate::error::{Error, Result};
use crate::geometry::{
    region_partition, retention_window, root_tile_size, split_map, KernelSpec, RetentionWindow, SplitAxis, TileDims,
    TileGeometry,
};
use crate::networks::{multiway_merge, oddeven_merge, prune, ComparatorNetwork, NetworkLibrary, OutputRequest};

/// Largest root tile (in pixels) the compiler accepts.
pub const MAX_ROOT_AREA: usize = 256;

/// Compiles a `k x k` median into a program for `root`-sized tiles using
/// the default sorting networks.
pub fn compile_plan(k: usize, root: TileDims) -> Result<SelectionProgram> {
    compile_plan_with(KernelSpec::square(k)?, root, &NetworkLibrary::new())
}

/// Program for the default root tile of a `k x k` kernel.
pub fn compile_default(k: usize) -> Result<SelectionProgram> {
    compile_plan(k, TileDims::square(root_tile_size(k)?)?)
}

pub fn compile_plan_with(kernel: KernelSpec, root: TileDims, library: &NetworkLibrary) -> Result<SelectionProgram> {
    if root.area() > MAX_ROOT_AREA {
        return Err(Error::RootTooLarge(root.width, root.height));
    }
    let root = TileDims { depth: 0, ..root };
    // Anchoring the root at the kernel radius puts the footprint at the origin.
    let anchor = (kernel.radius_x() as i64, kernel.radius_y() as i64);
    let geom = region_partition(anchor, root, kernel)?;
    let mut c = Compiler {
        kernel,
        fw: geom.footprint.width(),
        fh: geom.footprint.height(),
        next_slot: geom.footprint.area() as u32,
        stages: Vec::new(),
        library,
    };
    let n = kernel.area();

    let column_runs: Vec<Vec<u32>> = geom
        .footprint
        .x
        .iter()
        .map(|x| {
            let inputs: Vec<u32> = geom.core.y.iter().map(|y| c.raw(x, y)).collect();
            c.sort(format!("init/col-sort/x={x}"), StageKind::ColumnSort, inputs)
        })
        .collect();
    let column_stages = c.stages.len();

    let mut rows = BTreeMap::new();
    for span in geom.extra_rows {
        for y in span.iter() {
            let inputs: Vec<u32> = geom.core.x.iter().map(|x| c.raw(x, y)).collect();
            let run = c.sort(format!("init/row-sort/y={y}"), StageKind::RowSort, inputs);
            rows.insert(y, run);
        }
    }
    let mut columns = BTreeMap::new();
    for span in geom.extra_columns {
        for x in span.iter() {
            columns.insert(x, column_runs[x as usize].clone());
        }
    }

    let window = retention_window(n, geom.core.area())?;
    let runs: Vec<Vec<u32>> = geom.core.x.iter().map(|x| column_runs[x as usize].clone()).collect();
    let sizes: Vec<usize> = runs.iter().map(Vec::len).collect();
    let candidates = c.emit(
        "init/core".into(),
        StageKind::CoreInit,
        runs.concat(),
        multiway_merge(&sizes),
        (window.lo, window.hi),
        Some(window),
    );

    let mut levels = vec![summary(&geom, window)];
    let mut tiles = vec![TileState {
        id: 0,
        geom,
        window,
        candidates,
        columns,
        rows,
    }];
    while !tiles[0].geom.dims.is_leaf() {
        let mut next = Vec::with_capacity(tiles.len() * 2);
        for tile in &tiles {
            next.extend(c.split(tile)?);
        }
        tiles = next;
        levels.push(summary(&tiles[0].geom, tiles[0].window));
    }

    let mut outputs = vec![0u32; root.area()];
    for tile in &tiles {
        debug_assert_eq!(tile.candidates.len(), 1);
        let (px, py) = tile.geom.anchor;
        let (dx, dy) = ((px - anchor.0) as usize, (py - anchor.1) as usize);
        outputs[dy * root.width + dx] = tile.candidates[0];
    }

    Ok(SelectionProgram {
        kernel,
        root,
        scratch_size: c.next_slot as usize,
        footprint: (c.fw, c.fh),
        stages: c.stages,
        column_stages,
        column_runs,
        outputs,
        levels,
        column_sort: library.sorter(geom.core.height()),
    })
}

fn summary(geom: &TileGeometry, window: RetentionWindow) -> LevelSummary {
    LevelSummary {
        depth: geom.dims.depth,
        dims: geom.dims,
        core: (geom.core.width(), geom.core.height()),
        window,
    }
}

struct TileState {
    /// Path from the root, one bit per split (low child = 0).
    id: usize,
    geom: TileGeometry,
    window: RetentionWindow,
    /// Slots of the retained core values, ascending.
    candidates: Vec<u32>,
    /// Sorted extra columns over `geom.core.y`, keyed by footprint x.
    columns: BTreeMap<i64, Vec<u32>>,
    /// Sorted extra rows over `geom.core.x`, keyed by footprint y.
    rows: BTreeMap<i64, Vec<u32>>,
}

struct Compiler<'a> {
    kernel: KernelSpec,
    fw: usize,
    fh: usize,
    next_slot: u32,
    stages: Vec<Stage>,
    library: &'a NetworkLibrary,
}

impl Compiler<'_> {
    fn raw(&self, x: i64, y: i64) -> u32 {
        debug_assert!((0..self.fw as i64).contains(&x) && (0..self.fh as i64).contains(&y));
        (y as usize * self.fw + x as usize) as u32
    }

    fn sort(&mut self, label: String, kind: StageKind, inputs: Vec<u32>) -> Vec<u32> {
        let n = inputs.len();
        let net = self.library.sorter(n);
        self.emit(label, kind, inputs, net, (1, n), None)
    }

    /// Appends a stage keeping 1-based ranks `keep.0..=keep.1` of `net`'s
    /// output and returns their slots. Stages whose pruned network is empty
    /// become slot aliases.
    fn emit(
        &mut self,
        label: String,
        kind: StageKind,
        inputs: Vec<u32>,
        net: ComparatorNetwork,
        keep: (usize, usize),
        window: Option<RetentionWindow>,
    ) -> Vec<u32> {
        assert_eq!(inputs.len(), net.wires());
        assert!(keep.0 >= 1 && keep.0 <= keep.1 && keep.1 <= inputs.len());
        let req = OutputRequest::range(net.wires(), keep.0 - 1, keep.1 - 1).expect("ranks in range");
        let net = prune(&net, &req);
        if net.is_empty() {
            return (keep.0 - 1..keep.1).map(|r| inputs[net.output_wire(r)]).collect();
        }
        let outputs: Vec<u32> = (0..keep.1 + 1 - keep.0).map(|i| self.next_slot + i as u32).collect();
        self.next_slot += outputs.len() as u32;
        self.stages.push(Stage {
            label,
            kind,
            inputs,
            network: net,
            keep,
            outputs: outputs.clone(),
            window,
        });
        outputs
    }

    fn split(&mut self, tile: &TileState) -> Result<[TileState; 2]> {
        let map = split_map(&tile.geom)?;
        let depth = tile.geom.dims.depth + 1;
        let n = self.kernel.area();
        let mut children = Vec::with_capacity(2);
        for (i, child) in map.children.iter().enumerate() {
            let id = tile.id * 2 + i;
            let tag = format!("d{depth}/t{id}");
            let (merged_from, kept_from) = match map.axis {
                SplitAxis::Horizontal => (&tile.columns, &tile.rows),
                SplitAxis::Vertical => (&tile.rows, &tile.columns),
            };

            let runs: Vec<&Vec<u32>> = child.merged_lines.iter().map(|l| &merged_from[&l]).collect();
            let sizes: Vec<usize> = runs.iter().map(|r| r.len()).collect();
            let x = sizes.iter().sum::<usize>();
            let c = tile.candidates.len();
            let window = retention_window(n, tile.window.seen + x)?;
            // Window relative to the merged candidates and new lines.
            let lo = window.lo + 1 - tile.window.lo;
            let hi = window.hi + 1 - tile.window.lo;
            assert!(lo >= 1 && hi <= c + x, "retention window moved backward");

            let (x_lo, x_hi) = (lo.saturating_sub(c).max(1), hi.min(x));
            let merged_x = self.emit(
                format!("{tag}/xmerge"),
                StageKind::ExtraMerge,
                runs.iter().flat_map(|r| r.iter().copied()).collect(),
                multiway_merge(&sizes),
                (x_lo, x_hi),
                None,
            );
            let (c_lo, c_hi) = (lo.saturating_sub(x).max(1), hi.min(c));
            let kept_c = &tile.candidates[c_lo - 1..c_hi];
            let skipped = (x_lo - 1) + (c_lo - 1);
            let candidates = self.emit(
                format!("{tag}/core"),
                StageKind::CoreMerge,
                kept_c.iter().chain(&merged_x).copied().collect(),
                oddeven_merge(kept_c.len(), merged_x.len()),
                (lo - skipped, hi - skipped),
                Some(window),
            );

            let kept: BTreeMap<i64, Vec<u32>> = child
                .kept_lines
                .iter()
                .flat_map(|s| s.iter())
                .map(|l| (l, merged_from[&l].clone()))
                .collect();
            let axis_name = match map.axis {
                SplitAxis::Horizontal => "y",
                SplitAxis::Vertical => "x",
            };
            let mut extended = BTreeMap::new();
            for line in child.extended_lines.iter().flat_map(|s| s.iter()) {
                let corners: Vec<u32> = child
                    .appended_corners(map.axis, line)
                    .into_iter()
                    .map(|(cx, cy)| self.raw(cx, cy))
                    .collect();
                let sorted = self.sort(
                    format!("{tag}/ext-sort/{axis_name}={line}"),
                    StageKind::CornerSort,
                    corners,
                );
                let old = &kept_from[&line];
                let total = old.len() + sorted.len();
                let run = self.emit(
                    format!("{tag}/ext-merge/{axis_name}={line}"),
                    StageKind::LineMerge,
                    old.iter().chain(&sorted).copied().collect(),
                    oddeven_merge(old.len(), sorted.len()),
                    (1, total),
                    None,
                );
                extended.insert(line, run);
            }

            let (columns, rows) = match map.axis {
                SplitAxis::Horizontal => (kept, extended),
                SplitAxis::Vertical => (extended, kept),
            };
            children.push(TileState {
                id,
                geom: child.geometry,
                window,
                candidates,
                columns,
                rows,
            });
        }
        let [a, b]: [TileState; 2] = children.try_into().ok().expect("two children");
        Ok([a, b])
    }
}
