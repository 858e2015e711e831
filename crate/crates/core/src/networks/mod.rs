//! Comparator networks: construction, pruning, zero-one verification and
//! execution.
//!
//! A network is a straight-line list of operations over numbered wires.
//! Sorted output ranks are read through an output map (`rank -> wire`), so
//! merge networks built on unequal halves need not leave their outputs in
//! wire order.

mod build;
mod prune;
mod text;
mod verify;

pub use build::{batcher_sort, multiway_merge, oddeven_merge, pairwise_sort, sorting_network};
pub use prune::{prune, OutputRequest};
pub use text::{format_network, parse_network, NetworkLibrary};
pub use verify::{agree_on_ranks, verify_with, verify_zero_one, Claim, Verdict, VerifyOptions};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    /// Minimum to `min_wire`, maximum to `max_wire`.
    CompareExchange,
    /// Minimum to `min_wire`; `max_wire` is left untouched.
    Min,
    /// Maximum to `max_wire`; `min_wire` is left untouched.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Op {
    pub kind: OpKind,
    pub min_wire: usize,
    pub max_wire: usize,
}

impl Op {
    pub fn compare_exchange(min_wire: usize, max_wire: usize) -> Self {
        Self {
            kind: OpKind::CompareExchange,
            min_wire,
            max_wire,
        }
    }

    #[inline]
    fn run<T: Ord + Copy>(&self, w: &mut [T]) {
        let a = w[self.min_wire];
        let b = w[self.max_wire];
        match self.kind {
            OpKind::CompareExchange => {
                // Both wires are written unconditionally; only the selection
                // depends on the data.
                let (lo, hi) = if b < a { (b, a) } else { (a, b) };
                w[self.min_wire] = lo;
                w[self.max_wire] = hi;
            }
            OpKind::Min => w[self.min_wire] = a.min(b),
            OpKind::Max => w[self.max_wire] = a.max(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparatorNetwork {
    wires: usize,
    ops: Vec<Op>,
    /// `outputs[rank]` is the wire holding that output rank.
    outputs: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NetworkStats {
    pub wires: usize,
    pub size: usize,
    pub depth: usize,
    pub compare_exchanges: usize,
    pub mins: usize,
    pub maxes: usize,
}

impl ComparatorNetwork {
    /// Empty network; outputs are read in wire order.
    pub fn new(wires: usize) -> Self {
        Self {
            wires,
            ops: Vec::new(),
            outputs: (0..wires).collect(),
        }
    }

    pub fn from_ops(wires: usize, ops: Vec<Op>) -> Result<Self> {
        Self::with_outputs(wires, ops, (0..wires).collect())
    }

    pub fn with_outputs(wires: usize, ops: Vec<Op>, outputs: Vec<usize>) -> Result<Self> {
        for op in &ops {
            if op.min_wire >= wires || op.max_wire >= wires || op.min_wire == op.max_wire {
                return Err(Error::InvalidComparator(op.min_wire, op.max_wire, wires));
            }
        }
        let mut seen = vec![false; wires];
        if outputs.len() != wires {
            return Err(Error::LengthMismatch {
                expected: wires,
                actual: outputs.len(),
            });
        }
        for &w in &outputs {
            if w >= wires || std::mem::replace(&mut seen[w], true) {
                return Err(Error::InvalidComparator(w, w, wires));
            }
        }
        Ok(Self { wires, ops, outputs })
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn size(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn output_wire(&self, rank: usize) -> usize {
        self.outputs[rank]
    }

    /// Whether output ranks coincide with wire indices.
    pub fn has_identity_outputs(&self) -> bool {
        self.outputs.iter().enumerate().all(|(r, &w)| r == w)
    }

    /// Longest chain of operations sharing a wire.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.wires];
        let mut depth = 0;
        for op in &self.ops {
            let l = level[op.min_wire].max(level[op.max_wire]) + 1;
            level[op.min_wire] = l;
            level[op.max_wire] = l;
            depth = depth.max(l);
        }
        depth
    }

    pub fn stats(&self) -> NetworkStats {
        let mut stats = NetworkStats {
            wires: self.wires,
            size: self.ops.len(),
            depth: self.depth(),
            ..Default::default()
        };
        for op in &self.ops {
            match op.kind {
                OpKind::CompareExchange => stats.compare_exchanges += 1,
                OpKind::Min => stats.mins += 1,
                OpKind::Max => stats.maxes += 1,
            }
        }
        stats
    }

    /// Runs the network in place; `wires` is indexed by wire, not by rank.
    #[inline]
    pub fn run<T: Ord + Copy>(&self, wires: &mut [T]) {
        debug_assert_eq!(wires.len(), self.wires);
        for op in &self.ops {
            op.run(wires);
        }
    }

    /// Runs the network on a copy of `values` and returns outputs in rank order.
    pub fn apply<T: Ord + Copy>(&self, values: &[T]) -> Result<Vec<T>> {
        if values.len() != self.wires {
            return Err(Error::LengthMismatch {
                expected: self.wires,
                actual: values.len(),
            });
        }
        let mut w = values.to_vec();
        self.run(&mut w);
        Ok(self.outputs.iter().map(|&i| w[i]).collect())
    }

    /// Copy with operation `index` removed.
    pub fn without_op(&self, index: usize) -> Self {
        let mut net = self.clone();
        net.ops.remove(index);
        net
    }
}
