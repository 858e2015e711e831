use std::path::PathBuf;

use anyhow::{Context, Result};
use tilemedian::networks::{
    agree_on_ranks, batcher_sort, multiway_merge, oddeven_merge, pairwise_sort, parse_network, prune, verify_with,
    Claim, ComparatorNetwork, OutputRequest, Verdict, VerifyOptions,
};

use crate::Usage;

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// Only networks with at most this many wires are checked; 0 skips the suite.
    #[arg(long, default_value_t = 16)]
    max_exhaustive_wires: usize,
    /// Also check a network description file.
    #[arg(long, value_name = "FILE")]
    network_file: Option<PathBuf>,
    /// What the file network must do: `sorts`, `merge:P,Q[,..]` or `select:R[,..]` (0-based ranks).
    #[arg(long, default_value = "sorts", requires = "network_file")]
    claim: String,
}

enum Check {
    Claim(Claim),
    /// Same outputs as the reference network on these ranks.
    Agrees(ComparatorNetwork, OutputRequest),
}

struct Entry {
    name: String,
    net: ComparatorNetwork,
    check: Check,
}

fn suite() -> Vec<Entry> {
    let mut out = Vec::new();
    for n in 2..=12 {
        for (family, net) in [("batcher-sort", batcher_sort(n)), ("pairwise-sort", pairwise_sort(n))] {
            out.push(Entry {
                name: format!("{family} n={n}"),
                net,
                check: Check::Claim(Claim::Sorts),
            });
        }
    }
    for p in 1..16 {
        for q in 1..=16 - p {
            out.push(Entry {
                name: format!("oddeven-merge p={p} q={q}"),
                net: oddeven_merge(p, q),
                check: Check::Claim(Claim::Merges(vec![p, q])),
            });
        }
    }
    for sizes in [vec![1, 1, 1], vec![2, 3, 4], vec![3; 5], vec![4; 4], vec![1, 5, 2, 6]] {
        out.push(Entry {
            name: format!("multiway-merge {sizes:?}"),
            net: multiway_merge(&sizes),
            check: Check::Claim(Claim::Merges(sizes)),
        });
    }
    for n in [5, 9, 13] {
        let full = batcher_sort(n);
        let req = OutputRequest::new(n, [n / 2]).expect("median rank in range");
        out.push(Entry {
            name: format!("pruned-median n={n}"),
            net: prune(&full, &req),
            check: Check::Agrees(full, req),
        });
    }
    out
}

fn parse_claim(text: &str) -> Result<Claim, Usage> {
    let list = |s: &str| -> Result<Vec<usize>, Usage> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| Usage(format!("--claim: bad number {v:?}")))
            })
            .collect()
    };
    match text.split_once(':') {
        None if text == "sorts" => Ok(Claim::Sorts),
        Some(("merge", runs)) => Ok(Claim::Merges(list(runs)?)),
        Some(("select", ranks)) => Ok(Claim::Selects(list(ranks)?)),
        _ => Err(Usage(format!(
            "--claim {text:?}: expected sorts, merge:P,Q or select:R"
        ))),
    }
}

fn report(name: &str, net: &ComparatorNetwork, verdict: &Verdict) -> bool {
    match verdict {
        Verdict::Pass { checked, exhaustive } => {
            let how = if *exhaustive { "exhaustive" } else { "randomized" };
            println!("ok   {name}: {} ops, {checked} inputs {how}", net.size());
            true
        }
        Verdict::Fail { input, output } => {
            println!("FAIL {name}: counterexample input={input:?} output={output:?}");
            false
        }
    }
}

pub fn run(args: &VerifyArgs) -> Result<bool> {
    let opts = VerifyOptions::default();
    let mut checked = 0;
    let mut failed = 0;

    if let Some(path) = &args.network_file {
        let claim = parse_claim(&args.claim)?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let net = parse_network(&text).with_context(|| format!("parsing {}", path.display()))?;
        let verdict = verify_with(&net, &claim, &opts);
        checked += 1;
        if !report(&path.display().to_string(), &net, &verdict) {
            failed += 1;
        }
    }

    for entry in suite()
        .into_iter()
        .filter(|e| e.net.wires() <= args.max_exhaustive_wires)
    {
        let verdict = match &entry.check {
            Check::Claim(c) => verify_with(&entry.net, c, &opts),
            Check::Agrees(full, req) => agree_on_ranks(&entry.net, full, req),
        };
        checked += 1;
        if !report(&entry.name, &entry.net, &verdict) {
            failed += 1;
        }
    }

    println!("{checked} networks checked, {failed} failed");
    Ok(failed == 0)
}
