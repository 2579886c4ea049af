//! `spinweb v1` edge-list format:
//!
//! ```text
//! # spinweb v1
//! nodes=<n> rule=<rule>
//! u v w
//! ```
//!
//! with one `u v w` line per edge, ascending by `u` then `v`. The rule is
//! `node-exclusive`, `pair-contained` or `none`.

use std::io::Write;
use std::path::Path;

use super::{LinkRule, QuantumNetwork};
use crate::error::Result;
use crate::textio::{self, Lines};

pub const EDGELIST_MAGIC: &str = "# spinweb v1";

pub fn write_edgelist(net: &QuantumNetwork, path: &Path) -> Result<()> {
    textio::write_file(path, |w| write_edgelist_to(net, w))
}

pub fn write_edgelist_to(net: &QuantumNetwork, w: &mut dyn Write) -> std::io::Result<()> {
    let rule = net.provenance.rule.map_or("none", |r| r.name());
    writeln!(w, "{EDGELIST_MAGIC}")?;
    writeln!(w, "nodes={} rule={rule}", net.node_count())?;
    for &(u, v, wt) in net.edges() {
        writeln!(w, "{u} {v} {wt}")?;
    }
    Ok(())
}

pub fn read_edgelist(path: &Path) -> Result<QuantumNetwork> {
    let text = textio::read_to_string(path)?;
    parse_edgelist(&path.display().to_string(), &text)
}

pub fn parse_edgelist(name: &str, text: &str) -> Result<QuantumNetwork> {
    let mut lines = Lines::new(name, text);
    let (ln, magic) = lines.expect_line("format line")?;
    if magic != EDGELIST_MAGIC {
        return Err(lines.error(ln, format!("expected {EDGELIST_MAGIC:?}")));
    }
    let (ln, header) = lines.expect_line("header")?;
    let [nodes, rule] = lines.tokens(ln, header)?;
    let nodes: usize = match nodes.strip_prefix("nodes=") {
        Some(n) => lines.parse(ln, n)?,
        None => return Err(lines.error(ln, "expected nodes=<n>")),
    };
    let rule = match rule.strip_prefix("rule=") {
        Some("none") => None,
        Some(r) => Some(r.parse::<LinkRule>().map_err(|e| lines.error(ln, e.to_string()))?),
        None => return Err(lines.error(ln, "expected rule=<rule>")),
    };
    let mut edges = Vec::new();
    let mut last = None;
    while let Some((ln, l)) = lines.next_line() {
        let [u, v, w] = lines.tokens(ln, l)?;
        let e: (u32, u32, u32) = (lines.parse(ln, u)?, lines.parse(ln, v)?, lines.parse(ln, w)?);
        if e.0 >= e.1 || last.is_some_and(|p| p >= (e.0, e.1)) {
            return Err(lines.error(ln, "edges must satisfy u < v and be strictly ascending"));
        }
        if e.1 as usize >= nodes || e.2 == 0 {
            return Err(lines.error(ln, "edge endpoint out of range or zero weight"));
        }
        last = Some((e.0, e.1));
        edges.push(e);
    }
    let mut net = QuantumNetwork::new(nodes, edges)?;
    net.provenance.rule = rule;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_bytes() {
        let mut net = QuantumNetwork::new(4, [(2, 0, 1), (1, 3, 5)]).unwrap();
        net.provenance.rule = Some(LinkRule::PairContained);
        let mut buf = Vec::new();
        write_edgelist_to(&net, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# spinweb v1\nnodes=4 rule=pair-contained\n0 2 1\n1 3 5\n"
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        let err = parse_edgelist("f", "# spinweb v1\nnodes=3 rule=none\n0 1 1\n1 2\n").unwrap_err();
        assert!(err.to_string().contains("f:4"), "{err}");
        assert!(parse_edgelist("f", "# spinweb v1\nnodes=3 rule=none\n1 0 1\n").is_err());
        assert!(parse_edgelist("f", "nodes=3 rule=none\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(n in 2usize..30, raw in proptest::collection::vec((0u32..30, 0u32..30, 1u32..5), 0..60)) {
            let edges: Vec<_> = raw.into_iter().filter(|e| e.0 != e.1 && (e.0 as usize) < n && (e.1 as usize) < n).collect();
            let net = QuantumNetwork::new(n, edges).unwrap();
            let mut a = Vec::new();
            write_edgelist_to(&net, &mut a).unwrap();
            let back = parse_edgelist("mem", std::str::from_utf8(&a).unwrap()).unwrap();
            prop_assert_eq!(back.edges(), net.edges());
            let mut b = Vec::new();
            write_edgelist_to(&back, &mut b).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
