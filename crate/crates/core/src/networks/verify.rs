//! Zero-one principle harness.
//!
//! Exhaustive checks evaluate 64 binary inputs at once: every wire holds a
//! 64-bit lane mask, a comparator becomes `and`/`or`. Inputs beyond the
//! budget fall back to randomized integer trials.

use super::{ComparatorNetwork, OpKind, OutputRequest};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    /// Every input comes out sorted.
    Sorts,
    /// Inputs sorted within consecutive runs of these lengths come out sorted.
    Merges(Vec<usize>),
    /// The listed output ranks hold the matching order statistics.
    Selects(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass { checked: u64, exhaustive: bool },
    Fail { input: Vec<u64>, output: Vec<u64> },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Largest number of binary inputs enumerated exhaustively.
    pub exhaustive_budget: u64,
    pub random_trials: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            exhaustive_budget: 1 << 24,
            random_trials: 100_000,
            seed: 0x5eed_0f2e_700e,
        }
    }
}

pub fn verify_zero_one(net: &ComparatorNetwork, claim: &Claim) -> Verdict {
    verify_with(net, claim, &VerifyOptions::default())
}

pub fn verify_with(net: &ComparatorNetwork, claim: &Claim, opts: &VerifyOptions) -> Verdict {
    let space = InputSpace::for_claim(net.wires(), claim);
    match space.count() {
        Some(count) if count <= opts.exhaustive_budget => exhaustive(net, claim, &space, count),
        _ => randomized(net, claim, opts),
    }
}

/// Checks that `a` and `b` agree on the requested ranks.
pub fn agree_on_ranks(a: &ComparatorNetwork, b: &ComparatorNetwork, req: &OutputRequest) -> Verdict {
    let opts = VerifyOptions::default();
    let n = a.wires();
    assert_eq!(n, b.wires(), "networks must have the same width");
    let space = InputSpace::Binary(n);
    match space.count() {
        Some(count) if count <= opts.exhaustive_budget => {
            let ranks: Vec<usize> = req.ranks().collect();
            let mut wa = vec![0u64; n];
            let mut wb = vec![0u64; n];
            for batch in 0..count.div_ceil(64) {
                let valid = space.fill(batch * 64, count, &mut wa);
                wb.copy_from_slice(&wa);
                run_lanes(a, &mut wa);
                run_lanes(b, &mut wb);
                let bad = ranks
                    .iter()
                    .fold(0u64, |acc, &r| acc | (wa[a.output_wire(r)] ^ wb[b.output_wire(r)]))
                    & valid;
                if bad != 0 {
                    let input = space.lane_input(batch * 64 + bad.trailing_zeros() as u64);
                    return Verdict::Fail {
                        output: a.apply(&input).expect("width checked"),
                        input,
                    };
                }
            }
            Verdict::Pass {
                checked: count,
                exhaustive: true,
            }
        }
        _ => {
            let mut rng = SplitMix64::new(opts.seed);
            for _ in 0..opts.random_trials {
                let input: Vec<u64> = (0..n).map(|_| rng.below(n as u64)).collect();
                let oa = a.apply(&input).expect("width checked");
                let ob = b.apply(&input).expect("width checked");
                if req.ranks().any(|r| oa[r] != ob[r]) {
                    return Verdict::Fail { input, output: oa };
                }
            }
            Verdict::Pass {
                checked: opts.random_trials,
                exhaustive: false,
            }
        }
    }
}

enum InputSpace {
    Binary(usize),
    SortedRuns(Vec<usize>),
}

impl InputSpace {
    fn for_claim(wires: usize, claim: &Claim) -> Self {
        match claim {
            Claim::Merges(runs) => {
                assert_eq!(runs.iter().sum::<usize>(), wires, "run lengths must cover every wire");
                InputSpace::SortedRuns(runs.clone())
            }
            _ => InputSpace::Binary(wires),
        }
    }

    fn count(&self) -> Option<u64> {
        match self {
            InputSpace::Binary(n) => (*n < 63).then(|| 1u64 << n),
            InputSpace::SortedRuns(runs) => runs.iter().try_fold(1u64, |acc, &len| acc.checked_mul(len as u64 + 1)),
        }
    }

    fn lane_input(&self, index: u64) -> Vec<u64> {
        match self {
            InputSpace::Binary(n) => (0..*n).map(|w| (index >> w) & 1).collect(),
            InputSpace::SortedRuns(runs) => {
                let mut rest = index;
                let mut out = Vec::new();
                for &len in runs {
                    let zeros = (rest % (len as u64 + 1)) as usize;
                    rest /= len as u64 + 1;
                    out.extend((0..len).map(|i| u64::from(i >= zeros)));
                }
                out
            }
        }
    }

    /// Loads lanes `base..base + 64` into `wires`; returns the valid-lane mask.
    fn fill(&self, base: u64, count: u64, wires: &mut [u64]) -> u64 {
        let lanes = (count - base).min(64);
        let valid = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        match self {
            InputSpace::Binary(_) => {
                const PATTERNS: [u64; 6] = [
                    0xaaaa_aaaa_aaaa_aaaa,
                    0xcccc_cccc_cccc_cccc,
                    0xf0f0_f0f0_f0f0_f0f0,
                    0xff00_ff00_ff00_ff00,
                    0xffff_0000_ffff_0000,
                    0xffff_ffff_0000_0000,
                ];
                for (w, lane) in wires.iter_mut().enumerate() {
                    *lane = if w < 6 {
                        PATTERNS[w]
                    } else if (base >> w) & 1 == 1 {
                        u64::MAX
                    } else {
                        0
                    };
                }
            }
            InputSpace::SortedRuns(_) => {
                wires.fill(0);
                for lane in 0..lanes {
                    for (w, bit) in self.lane_input(base + lane).into_iter().enumerate() {
                        wires[w] |= bit << lane;
                    }
                }
            }
        }
        valid
    }

    /// Number of ones in the input of each lane.
    fn ones(&self, base: u64, lanes: u64) -> Vec<usize> {
        (0..lanes)
            .map(|l| match self {
                InputSpace::Binary(_) => (base + l).count_ones() as usize,
                _ => self.lane_input(base + l).iter().filter(|&&b| b == 1).count(),
            })
            .collect()
    }
}

fn run_lanes(net: &ComparatorNetwork, w: &mut [u64]) {
    for op in net.ops() {
        let a = w[op.min_wire];
        let b = w[op.max_wire];
        match op.kind {
            OpKind::CompareExchange => {
                w[op.min_wire] = a & b;
                w[op.max_wire] = a | b;
            }
            OpKind::Min => w[op.min_wire] = a & b,
            OpKind::Max => w[op.max_wire] = a | b,
        }
    }
}

fn exhaustive(net: &ComparatorNetwork, claim: &Claim, space: &InputSpace, count: u64) -> Verdict {
    let n = net.wires();
    let mut wires = vec![0u64; n];
    for batch in 0..count.div_ceil(64) {
        let base = batch * 64;
        let valid = space.fill(base, count, &mut wires);
        run_lanes(net, &mut wires);
        let out = |r: usize| wires[net.output_wire(r)];
        let bad = match claim {
            Claim::Sorts | Claim::Merges(_) => (1..n).fold(0u64, |acc, r| acc | (out(r - 1) & !out(r))) & valid,
            Claim::Selects(ranks) => {
                let ones = space.ones(base, (count - base).min(64));
                let mut bad = 0;
                for &r in ranks {
                    // Rank r of a 0/1 input is 1 exactly when fewer than r + 1 zeros exist.
                    let expected = ones
                        .iter()
                        .enumerate()
                        .fold(0u64, |m, (l, &o)| m | (u64::from(n - o <= r) << l));
                    bad |= out(r) ^ expected;
                }
                bad & valid
            }
        };
        if bad != 0 {
            let input = space.lane_input(base + bad.trailing_zeros() as u64);
            return Verdict::Fail {
                output: net.apply(&input).expect("width checked"),
                input,
            };
        }
    }
    Verdict::Pass {
        checked: count,
        exhaustive: true,
    }
}

fn randomized(net: &ComparatorNetwork, claim: &Claim, opts: &VerifyOptions) -> Verdict {
    let n = net.wires();
    let mut rng = SplitMix64::new(opts.seed);
    let mut input: Vec<u64> = (0..n as u64).collect();
    for _ in 0..opts.random_trials {
        match claim {
            Claim::Sorts => rng.shuffle(&mut input),
            Claim::Merges(runs) => {
                rng.shuffle(&mut input);
                let mut start = 0;
                for &len in runs {
                    input[start..start + len].sort_unstable();
                    start += len;
                }
            }
            Claim::Selects(_) => input.iter_mut().for_each(|v| *v = rng.below(n as u64)),
        }
        let output = net.apply(&input).expect("width checked");
        let ok = match claim {
            Claim::Sorts | Claim::Merges(_) => output.windows(2).all(|w| w[0] <= w[1]),
            Claim::Selects(ranks) => {
                let mut sorted = input.clone();
                sorted.sort_unstable();
                ranks.iter().all(|&r| output[r] == sorted[r])
            }
        };
        if !ok {
            return Verdict::Fail { input, output };
        }
    }
    Verdict::Pass {
        checked: opts.random_trials,
        exhaustive: false,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{batcher_sort, oddeven_merge, prune};
    use super::*;

    #[test]
    fn batcher_12_exhaustive() {
        assert_eq!(
            verify_zero_one(&batcher_sort(12), &Claim::Sorts),
            Verdict::Pass {
                checked: 4096,
                exhaustive: true
            }
        );
    }

    #[test]
    fn mutation_is_caught() {
        let net = batcher_sort(6);
        for i in 0..net.size() {
            let broken = net.without_op(i);
            match verify_zero_one(&broken, &Claim::Sorts) {
                Verdict::Fail { input, output } => {
                    assert_eq!(broken.apply(&input).unwrap(), output);
                    assert!(output.windows(2).any(|w| w[0] > w[1]));
                }
                v => panic!("removing op {i} went unnoticed: {v:?}"),
            }
        }
    }

    #[test]
    fn empty_network_one_wire() {
        assert!(verify_zero_one(&ComparatorNetwork::new(1), &Claim::Sorts).passed());
    }

    #[test]
    fn merge_claim_is_weaker_than_sort() {
        let net = oddeven_merge(3, 3);
        assert!(verify_zero_one(&net, &Claim::Merges(vec![3, 3])).passed());
        assert!(!verify_zero_one(&net, &Claim::Sorts).passed());
    }

    #[test]
    fn selects_checks_only_listed_ranks() {
        let med = prune(&batcher_sort(7), &OutputRequest::new(7, [3]).unwrap());
        assert!(verify_zero_one(&med, &Claim::Selects(vec![3])).passed());
        assert!(!verify_zero_one(&med, &Claim::Selects(vec![0])).passed());
    }

    #[test]
    fn randomized_mode_beyond_budget() {
        let opts = VerifyOptions {
            exhaustive_budget: 16,
            random_trials: 2000,
            ..Default::default()
        };
        let v = verify_with(&batcher_sort(10), &Claim::Sorts, &opts);
        assert_eq!(
            v,
            Verdict::Pass {
                checked: 2000,
                exhaustive: false
            }
        );
        let broken = batcher_sort(10).without_op(3);
        assert!(!verify_with(&broken, &Claim::Sorts, &opts).passed());
    }
}
