//! Plain-text network descriptions:
//!
//! ```text
//! WIRES 4
//! CE 0 1
//! MIN 2 3
//! MAX 1 3
//! ```
//!
//! Blank lines and `#` comments are ignored. A trailing `OUTPUTS w0 w1 ...`
//! line gives the rank-to-wire map when it is not the identity.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{sorting_network, verify_zero_one, Claim, ComparatorNetwork, Op, OpKind, Verdict};
use crate::error::{Error, Result};

pub fn parse_network(text: &str) -> Result<ComparatorNetwork> {
    let mut wires = None;
    let mut ops = Vec::new();
    let mut outputs = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: &str| Error::NetworkParse {
            line: line_no,
            message: message.to_string(),
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let keyword = fields.next().unwrap_or_default();
        let numbers: Vec<usize> = fields
            .map(|f| f.parse().map_err(|_| err(&format!("bad number {f:?}"))))
            .collect::<Result<_>>()?;
        match keyword {
            "WIRES" => {
                if wires.is_some() {
                    return Err(err("duplicate WIRES line"));
                }
                match numbers.as_slice() {
                    [n] => wires = Some(*n),
                    _ => return Err(err("WIRES takes one count")),
                }
            }
            "CE" | "MIN" | "MAX" => {
                if wires.is_none() {
                    return Err(err("operation before WIRES"));
                }
                let kind = match keyword {
                    "CE" => OpKind::CompareExchange,
                    "MIN" => OpKind::Min,
                    _ => OpKind::Max,
                };
                match numbers.as_slice() {
                    [a, b] => ops.push(Op {
                        kind,
                        min_wire: *a,
                        max_wire: *b,
                    }),
                    _ => return Err(err("operations take two wires")),
                }
            }
            "OUTPUTS" => outputs = Some(numbers),
            other => return Err(err(&format!("unknown keyword {other:?}"))),
        }
    }
    let wires = wires.ok_or(Error::NetworkParse {
        line: 0,
        message: "missing WIRES line".into(),
    })?;
    match outputs {
        Some(out) => ComparatorNetwork::with_outputs(wires, ops, out),
        None => ComparatorNetwork::from_ops(wires, ops),
    }
}

pub fn format_network(net: &ComparatorNetwork) -> String {
    let mut s = format!("WIRES {}\n", net.wires());
    for op in net.ops() {
        let kw = match op.kind {
            OpKind::CompareExchange => "CE",
            OpKind::Min => "MIN",
            OpKind::Max => "MAX",
        };
        let _ = writeln!(s, "{kw} {} {}", op.min_wire, op.max_wire);
    }
    if !net.has_identity_outputs() {
        s.push_str("OUTPUTS");
        for w in net.outputs() {
            let _ = write!(s, " {w}");
        }
        s.push('\n');
    }
    s
}

/// Sorting networks by width, with optional replacements loaded from
/// description files (for instance size-optimal small networks).
#[derive(Debug, Clone, Default)]
pub struct NetworkLibrary {
    sorters: HashMap<usize, ComparatorNetwork>,
}

impl NetworkLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a replacement sorter after checking it with the zero-one
    /// harness. Returns the failing verdict if it does not sort.
    pub fn insert_sorter(&mut self, net: ComparatorNetwork) -> std::result::Result<(), Verdict> {
        match verify_zero_one(&net, &Claim::Sorts) {
            Verdict::Pass { .. } => {
                self.sorters.insert(net.wires(), net);
                Ok(())
            }
            fail => Err(fail),
        }
    }

    pub fn sorter(&self, n: usize) -> ComparatorNetwork {
        match self.sorters.get(&n) {
            Some(net) => net.clone(),
            None => sorting_network(n),
        }
    }

    pub fn len(&self) -> usize {
        self.sorters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorters.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::super::{batcher_sort, oddeven_merge, prune, OutputRequest};
    use super::*;

    #[test]
    fn parse_example() {
        let net = parse_network("# four wires\nWIRES 4\nCE 0 1\n\nMIN 2 3\nMAX 1 3 # trailing\n").unwrap();
        assert_eq!(net.wires(), 4);
        assert_eq!(net.size(), 3);
        assert_eq!(net.ops()[1].kind, OpKind::Min);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_network("CE 0 1"),
            Err(Error::NetworkParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_network("WIRES 2\nCE 0"),
            Err(Error::NetworkParse { line: 2, .. })
        ));
        assert!(matches!(
            parse_network("WIRES 2\nXOR 0 1"),
            Err(Error::NetworkParse { .. })
        ));
        assert!(parse_network("WIRES 2\nCE 0 2").is_err());
        assert!(parse_network("").is_err());
    }

    #[test]
    fn library_rejects_non_sorters() {
        let mut lib = NetworkLibrary::new();
        assert!(lib.insert_sorter(batcher_sort(5).without_op(0)).is_err());
        assert!(lib.is_empty());
        let optimal4 = parse_network("WIRES 4\nCE 0 1\nCE 2 3\nCE 0 2\nCE 1 3\nCE 1 2\n").unwrap();
        lib.insert_sorter(optimal4.clone()).unwrap();
        assert_eq!(lib.sorter(4), optimal4);
        assert_eq!(lib.sorter(6), batcher_sort(6));
    }

    proptest! {
        #[test]
        fn text_round_trip(p in 0usize..9, q in 0usize..9, lo in 0usize..18) {
            let merge = oddeven_merge(p, q);
            let nets = if p + q > 0 {
                let lo = lo % (p + q);
                vec![prune(&merge, &OutputRequest::range(p + q, lo, lo).unwrap()), merge]
            } else {
                vec![merge]
            };
            for net in nets {
                prop_assert_eq!(parse_network(&format_network(&net)).unwrap(), net);
            }
        }
    }
}
