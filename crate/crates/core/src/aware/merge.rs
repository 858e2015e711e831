//! Merge primitives with comparison counting.

use crate::parallel;

/// Split of the first `diagonal` merged elements between two sorted runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergePathSplit {
    pub diagonal: usize,
    /// Elements taken from `A`.
    pub i: usize,
    /// Elements taken from `B`.
    pub j: usize,
}

/// Binary search along diagonal `d` of the merge of sorted `a` and `b`:
/// `a[..i]` and `b[..j]` are the `d` smallest elements, ties going to `a`.
///
/// # Panics
///
/// If `d > a.len() + b.len()`.
pub fn merge_path_partition<T: Ord>(a: &[T], b: &[T], d: usize) -> MergePathSplit {
    partition(a, b, d, &mut 0)
}

pub(crate) fn partition<T: Ord>(a: &[T], b: &[T], d: usize, cmp: &mut u64) -> MergePathSplit {
    assert!(d <= a.len() + b.len(), "diagonal {d} past the end of the merge");
    let mut lo = d.saturating_sub(b.len());
    let mut hi = d.min(a.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        *cmp += 1;
        if a[mid] <= b[d - mid - 1] {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    MergePathSplit {
        diagonal: d,
        i: lo,
        j: d - lo,
    }
}

/// Appends merged positions `from..from + count` of `a` and `b` to `out`.
pub(crate) fn merge_range<T: Ord + Copy>(a: &[T], b: &[T], from: usize, count: usize, out: &mut Vec<T>, cmp: &mut u64) {
    let MergePathSplit { mut i, mut j, .. } = partition(a, b, from, cmp);
    out.reserve(count);
    for _ in 0..count {
        if i < a.len() && j < b.len() {
            *cmp += 1;
            if a[i] <= b[j] {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        } else if i < a.len() {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
}

pub(crate) fn merge_counted<T: Ord + Copy>(a: &[T], b: &[T], cmp: &mut u64) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    merge_range(a, b, 0, a.len() + b.len(), &mut out, cmp);
    out
}

/// The element at 0-based position `p` of the merge of `a` and `b`.
pub(crate) fn select_merged<T: Ord + Copy>(a: &[T], b: &[T], p: usize, cmp: &mut u64) -> T {
    let s = partition(a, b, p, cmp);
    match (a.get(s.i), b.get(s.j)) {
        (Some(&x), Some(&y)) => {
            *cmp += 1;
            if x <= y {
                x
            } else {
                y
            }
        }
        (Some(&x), None) => x,
        (None, Some(&y)) => y,
        (None, None) => panic!("position {p} past the end of the merge"),
    }
}

/// Merges runs pairwise, halving their number each round. Equal elements
/// keep run order. Large pairwise merges are split along merge-path
/// diagonals across the worker pool.
pub fn kway_merge_binary<T: Ord + Copy + Send + Sync>(runs: &[Vec<T>]) -> Vec<T> {
    let mut level: Vec<Vec<T>> = runs.to_vec();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] if a.len() + b.len() >= PARALLEL_MERGE_MIN => {
                    parallel_merge(a, b, parallel::available_workers())
                }
                [a, b] => merge_counted(a, b, &mut 0),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

const PARALLEL_MERGE_MIN: usize = 1 << 15;

pub(crate) fn kway_counted<T: Ord + Copy>(runs: &[&[T]], cmp: &mut u64) -> Vec<T> {
    let mut level: Vec<Vec<T>> = runs.iter().map(|r| r.to_vec()).collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => merge_counted(a, b, cmp),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Two-way merge split into `segments` independent pieces along merge-path
/// diagonals; the pieces run on the worker pool.
pub fn parallel_merge<T: Ord + Copy + Send + Sync>(a: &[T], b: &[T], segments: usize) -> Vec<T> {
    let total = a.len() + b.len();
    let segments = segments.clamp(1, total.max(1));
    let bounds: Vec<usize> = (0..=segments).map(|s| s * total / segments).collect();
    let pieces = parallel::map_range(segments, |s| {
        let mut out = Vec::with_capacity(bounds[s + 1] - bounds[s]);
        merge_range(a, b, bounds[s], bounds[s + 1] - bounds[s], &mut out, &mut 0);
        out
    });
    pieces.concat()
}
