use super::{ComparatorNetwork, Op};

/// Batcher's odd-even merge sort for any `n`, in standard form (minimum on
/// the lower wire, outputs in wire order).
pub fn batcher_sort(n: usize) -> ComparatorNetwork {
    let mut net = ComparatorNetwork::new(n);
    let mut p = 1;
    while p < n {
        let mut k = p;
        while k >= 1 {
            let mut j = k % p;
            while j + k < n {
                for i in 0..k.min(n - j - k) {
                    if (i + j) / (2 * p) == (i + j + k) / (2 * p) {
                        net.ops.push(Op::compare_exchange(i + j, i + j + k));
                    }
                }
                j += 2 * k;
            }
            k /= 2;
        }
        p *= 2;
    }
    net
}

/// Parberry's pairwise sorting network. Built for the next power of two and
/// truncated: comparators touching padding wires (which would hold +inf)
/// are dropped.
pub fn pairwise_sort(n: usize) -> ComparatorNetwork {
    let full = n.next_power_of_two();
    let mut net = ComparatorNetwork::new(n);
    let mut push = |lo: usize, hi: usize| {
        if hi < n {
            net.ops.push(Op::compare_exchange(lo, hi));
        }
    };

    let mut a = 1;
    while a < full {
        let (mut b, mut c) = (a, 0);
        while b < full {
            push(b - a, b);
            b += 1;
            c += 1;
            if c >= a {
                c = 0;
                b += a;
            }
        }
        a *= 2;
    }

    let (mut a, mut e) = (full / 4, 1);
    while a > 0 {
        let mut d = e;
        while d > 0 {
            let (mut b, mut c) = ((d + 1) * a, 0);
            while b < full {
                push(b - d * a, b);
                b += 1;
                c += 1;
                if c >= a {
                    c = 0;
                    b += a;
                }
            }
            d /= 2;
        }
        a /= 2;
        e = 2 * e + 1;
    }
    net
}

/// Full sort: Batcher up to 64 wires, pairwise sort above.
pub fn sorting_network(n: usize) -> ComparatorNetwork {
    if n <= 64 {
        batcher_sort(n)
    } else {
        pairwise_sort(n)
    }
}

/// Odd-even merge of sorted runs on wires `[0, p)` and `[p, p + q)`.
pub fn oddeven_merge(p: usize, q: usize) -> ComparatorNetwork {
    let a: Vec<usize> = (0..p).collect();
    let b: Vec<usize> = (p..p + q).collect();
    let mut ops = Vec::new();
    let outputs = merge_into(&mut ops, &a, &b);
    ComparatorNetwork {
        wires: p + q,
        ops,
        outputs,
    }
}

/// Merges sorted runs laid out consecutively with the given lengths by a
/// balanced tree of odd-even merges (adjacent runs pair up at each level).
pub fn multiway_merge(sizes: &[usize]) -> ComparatorNetwork {
    let mut ops = Vec::new();
    let mut runs: Vec<Vec<usize>> = Vec::with_capacity(sizes.len());
    let mut next = 0;
    for &len in sizes {
        runs.push((next..next + len).collect());
        next += len;
    }
    while runs.len() > 1 {
        let mut merged = Vec::with_capacity(runs.len().div_ceil(2));
        let mut it = runs.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => merged.push(merge_into(&mut ops, &a, &b)),
                None => merged.push(a),
            }
        }
        runs = merged;
    }
    ComparatorNetwork {
        wires: next,
        ops,
        outputs: runs.pop().unwrap_or_default(),
    }
}

/// Appends an odd-even merge of the sorted wire lists `a` and `b` and
/// returns the merged list in ascending order.
///
/// The even- and odd-indexed subsequences are merged recursively into `v`
/// and `w`, interleaved as `v0 w0 v1 w1 ...`, and each `w[i]` is compared
/// with `v[i + 1]`. With `z(x)` zeros in a 0/1 input, `z(v) - z(w)` is 0, 1
/// or 2, so at most one adjacent pair is out of order afterwards.
fn merge_into(ops: &mut Vec<Op>, a: &[usize], b: &[usize]) -> Vec<usize> {
    if a.is_empty() {
        return b.to_vec();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    if a.len() == 1 && b.len() == 1 {
        ops.push(Op::compare_exchange(a[0], b[0]));
        return vec![a[0], b[0]];
    }
    let evens = |s: &[usize]| s.iter().step_by(2).copied().collect::<Vec<_>>();
    let odds = |s: &[usize]| s.iter().skip(1).step_by(2).copied().collect::<Vec<_>>();
    let v = merge_into(ops, &evens(a), &evens(b));
    let w = merge_into(ops, &odds(a), &odds(b));
    let mut out = Vec::with_capacity(v.len() + w.len());
    for (i, &vi) in v.iter().enumerate() {
        out.push(vi);
        if let Some(&wi) = w.get(i) {
            out.push(wi);
        }
    }
    for (&wi, &next_v) in w.iter().zip(v.iter().skip(1)) {
        ops.push(Op::compare_exchange(wi, next_v));
    }
    out
}
