use std::collections::BTreeSet;

use super::{ComparatorNetwork, Op, OpKind};
use crate::error::{Error, Result};

/// Output ranks a consumer reads from a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputRequest {
    ranks: BTreeSet<usize>,
}

impl OutputRequest {
    pub fn new(wires: usize, ranks: impl IntoIterator<Item = usize>) -> Result<Self> {
        let ranks: BTreeSet<usize> = ranks.into_iter().collect();
        if let Some(&bad) = ranks.iter().find(|&&r| r >= wires) {
            return Err(Error::InvalidComparator(bad, bad, wires));
        }
        Ok(Self { ranks })
    }

    /// Contiguous 0-based rank range `lo..=hi`.
    pub fn range(wires: usize, lo: usize, hi: usize) -> Result<Self> {
        Self::new(wires, lo..=hi)
    }

    pub fn all(wires: usize) -> Self {
        Self {
            ranks: (0..wires).collect(),
        }
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranks.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Removes operations that cannot affect the requested outputs and turns
/// compare-exchanges with a single live output into `Min`/`Max`.
///
/// Liveness is propagated backward from the requested output wires: an op
/// with no live output is dead, otherwise both of its inputs become live.
pub fn prune(net: &ComparatorNetwork, req: &OutputRequest) -> ComparatorNetwork {
    let mut live = vec![false; net.wires];
    for rank in req.ranks() {
        live[net.outputs[rank]] = true;
    }
    let mut kept: Vec<Op> = Vec::with_capacity(net.ops.len());
    for op in net.ops.iter().rev() {
        let min_live = live[op.min_wire] && matches!(op.kind, OpKind::CompareExchange | OpKind::Min);
        let max_live = live[op.max_wire] && matches!(op.kind, OpKind::CompareExchange | OpKind::Max);
        let kind = match (min_live, max_live) {
            (false, false) => continue,
            (true, true) => OpKind::CompareExchange,
            (true, false) => OpKind::Min,
            (false, true) => OpKind::Max,
        };
        live[op.min_wire] = true;
        live[op.max_wire] = true;
        kept.push(Op { kind, ..*op });
    }
    kept.reverse();
    ComparatorNetwork {
        wires: net.wires,
        ops: kept,
        outputs: net.outputs.clone(),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::super::{agree_on_ranks, batcher_sort, oddeven_merge, verify_zero_one, Claim, Verdict};
    use super::*;

    #[test]
    fn median_of_five_is_smaller() {
        let full = batcher_sort(5);
        let req = OutputRequest::new(5, [2]).unwrap();
        let med = prune(&full, &req);
        assert!(med.size() < full.size());
        assert!(agree_on_ranks(&med, &full, &req).passed());
        assert!(verify_zero_one(&med, &Claim::Selects(vec![2])).passed());
    }

    #[test]
    fn all_outputs_is_identity() {
        for net in [batcher_sort(9), oddeven_merge(3, 6)] {
            assert_eq!(prune(&net, &OutputRequest::all(net.wires())), net);
        }
    }

    #[test]
    fn middle_ranks_of_merge() {
        let full = oddeven_merge(4, 4);
        let req = OutputRequest::range(8, 2, 5).unwrap();
        let pruned = prune(&full, &req);
        assert!(matches!(
            agree_on_ranks(&pruned, &full, &req),
            Verdict::Pass {
                exhaustive: true,
                checked: 256
            }
        ));
    }

    #[test]
    fn extreme_rank_becomes_min_chain() {
        let pruned = prune(&batcher_sort(8), &OutputRequest::new(8, [0]).unwrap());
        let s = pruned.stats();
        assert_eq!(s.compare_exchanges, 0);
        assert_eq!(s.maxes, 0);
        assert_eq!(s.mins, 7);
    }

    fn random_network(wires: usize, ops: &[(usize, usize, u8)]) -> ComparatorNetwork {
        let ops = ops
            .iter()
            .filter_map(|&(a, b, kind)| {
                let (a, b) = (a % wires, b % wires);
                (a != b).then_some(Op {
                    kind: match kind % 3 {
                        0 => OpKind::CompareExchange,
                        1 => OpKind::Min,
                        _ => OpKind::Max,
                    },
                    min_wire: a,
                    max_wire: b,
                })
            })
            .collect();
        ComparatorNetwork::from_ops(wires, ops).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pruned_agrees_on_requested_ranks(
            wires in 2usize..12,
            ops in proptest::collection::vec((0usize..64, 0usize..64, 0u8..3), 0..60),
            ranks in proptest::collection::btree_set(0usize..12, 1..5),
            inputs in proptest::collection::vec(proptest::collection::vec(0u16..50, 12), 1..40),
        ) {
            let net = random_network(wires, &ops);
            let req = OutputRequest::new(wires, ranks.into_iter().filter(|&r| r < wires)).unwrap();
            prop_assume!(!req.is_empty());
            let pruned = prune(&net, &req);
            prop_assert!(pruned.size() <= net.size());
            for input in &inputs {
                let full = net.apply(&input[..wires]).unwrap();
                let part = pruned.apply(&input[..wires]).unwrap();
                for r in req.ranks() {
                    prop_assert_eq!(full[r], part[r]);
                }
            }
        }
    }
}
