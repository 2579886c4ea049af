use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::io::parse_edgelist;
use crate::network::{QuantumNetwork, EDGELIST_MAGIC};
use crate::textio;

/// An imported graph with the clean-up counters.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportedNetwork {
    pub network: QuantumNetwork,
    /// Repeated edges dropped, in either orientation.
    pub duplicates: usize,
    pub self_loops: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImportSummary {
    pub nodes: usize,
    pub edges: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

impl ImportedNetwork {
    pub fn summary(&self) -> ImportSummary {
        ImportSummary {
            nodes: self.network.node_count(),
            edges: self.network.edge_count(),
            duplicates: self.duplicates,
            self_loops: self.self_loops,
        }
    }
}

fn intern<'t>(ids: &mut HashMap<&'t str, u32>, labels: &mut Vec<String>, token: &'t str) -> Option<u32> {
    if let Some(&n) = ids.get(token) {
        return Some(n);
    }
    let n = u32::try_from(labels.len()).ok()?;
    ids.insert(token, n);
    labels.push(token.to_string());
    Some(n)
}

pub fn import_edgelist(path: &Path) -> Result<ImportedNetwork> {
    parse_external(&path.display().to_string(), &textio::read_to_string(path)?)
}

/// Parses an external edge list.
///
/// Files in the crate's own edge-list format are read as such, weights and
/// isolated nodes included. Anything else is read as whitespace-separated
/// `u v` lines (an optional third column is ignored), skipping blank lines
/// and `#` comments; nodes are numbered densely in order of first
/// appearance and keep their original identifiers as labels.
pub fn parse_external(name: &str, text: &str) -> Result<ImportedNetwork> {
    if text.lines().next().map(str::trim) == Some(EDGELIST_MAGIC) {
        return Ok(ImportedNetwork {
            network: parse_edgelist(name, text)?,
            duplicates: 0,
            self_loops: 0,
        });
    }
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    let (mut duplicates, mut self_loops) = (0, 0);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&tokens.len()) {
            return Err(Error::parse(name, i + 1, format!("expected `u v`, got {line:?}")));
        }
        let too_many = || Error::parse(name, i + 1, "too many nodes");
        let u = intern(&mut ids, &mut labels, tokens[0]).ok_or_else(too_many)?;
        let v = intern(&mut ids, &mut labels, tokens[1]).ok_or_else(too_many)?;
        if u == v {
            self_loops += 1;
        } else if !seen.insert((u.min(v), u.max(v))) {
            duplicates += 1;
        }
    }
    let network = QuantumNetwork::new(labels.len(), seen.into_iter().map(|(u, v)| (u, v, 1)))?.with_labels(labels)?;
    if duplicates + self_loops > 0 {
        log::warn!("{name}: dropped {duplicates} duplicate edges and {self_loops} self-loops");
    }
    Ok(ImportedNetwork {
        network,
        duplicates,
        self_loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::io::write_edgelist_to;

    #[test]
    fn path_graph() {
        let g = parse_external("f", "1 2\n2 3").unwrap();
        assert_eq!(g.network.edges(), &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(g.network.labels(), &["1", "2", "3"]);
        assert_eq!((g.duplicates, g.self_loops), (0, 0));
    }

    #[test]
    fn duplicates_and_loops_are_counted() {
        let g = parse_external("f", "# AS links\n\n10 20\n20 10\n7 7\n10\t20 1\n").unwrap();
        assert_eq!(g.network.edge_count(), 1);
        assert_eq!(g.network.node_count(), 3);
        assert_eq!((g.duplicates, g.self_loops), (2, 1));
        let g = parse_external("f", "1 2\n2 1\n").unwrap();
        assert_eq!(g.duplicates, 1);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let e = parse_external("as.txt", "1 2\n# c\n3\n").unwrap_err();
        assert!(e.to_string().starts_with("as.txt:3:"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn own_format_is_a_fixed_point() {
        let net = QuantumNetwork::new(5, [(0, 3, 2), (1, 3, 1), (3, 4, 5)]).unwrap();
        let mut first = Vec::new();
        write_edgelist_to(&net, &mut first).unwrap();
        let back = parse_external("x", std::str::from_utf8(&first).unwrap()).unwrap();
        let mut second = Vec::new();
        write_edgelist_to(&back.network, &mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(back.network.node_count(), 5);
    }
}
