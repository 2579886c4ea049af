//! Networks between node regions linked by shared spin clusters.
//!
//! A cluster becomes a link between nodes `A` and `B` when the set of node
//! regions it touches is exactly `{A, B}`. The strict rule additionally
//! requires the cluster to lie entirely inside `A` and `B`; that is the
//! condition under which the two regions carry non-zero entanglement
//! negativity. Link weights count how many clusters connect the same pair.

pub mod io;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomposition::ClusterDecomposition;
use crate::error::{Error, Result};
use crate::placement::{NodeLayout, NO_NODE};

/// Which clusters qualify as links.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkRule {
    /// Cluster touches exactly two nodes; sites outside all nodes are allowed.
    #[default]
    NodeExclusive,
    /// Cluster lies entirely inside exactly two nodes.
    PairContained,
}

impl LinkRule {
    pub fn name(&self) -> &'static str {
        match self {
            LinkRule::NodeExclusive => "node-exclusive",
            LinkRule::PairContained => "pair-contained",
        }
    }
}

impl fmt::Display for LinkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node-exclusive" | "relaxed" => Ok(LinkRule::NodeExclusive),
            "pair-contained" | "strict" => Ok(LinkRule::PairContained),
            _ => Err(Error::parameter(format!("unknown link rule {s:?}"))),
        }
    }
}

/// Where a network came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub instance_seed: Option<u64>,
    pub layout_seed: Option<u64>,
    pub rule: Option<LinkRule>,
}

/// Weighted undirected simple graph on dense node ids `0..node_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumNetwork {
    node_count: usize,
    /// `(u, v, weight)` with `u < v`, sorted, no duplicates.
    edges: Vec<(u32, u32, u32)>,
    /// Original identifier of every node (layout node id, imported label, ...).
    labels: Vec<String>,
    pub provenance: Provenance,
}

impl QuantumNetwork {
    /// Builds a network from weighted edges. Reverse duplicates are merged by
    /// adding weights; self-loops and zero weights are rejected.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (u32, u32, u32)>) -> Result<Self> {
        let mut map: HashMap<(u32, u32), u32> = HashMap::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::contract(format!("self-loop on node {u}")));
            }
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::contract(format!("edge ({u}, {v}) outside {node_count} nodes")));
            }
            if w == 0 {
                return Err(Error::contract(format!("edge ({u}, {v}) has zero weight")));
            }
            *map.entry((u.min(v), u.max(v))).or_insert(0) += w;
        }
        let mut edges: Vec<(u32, u32, u32)> = map.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        edges.sort_unstable();
        Ok(Self {
            node_count,
            edges,
            labels: (0..node_count).map(|i| i.to_string()).collect(),
            provenance: Provenance::default(),
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count {
            return Err(Error::contract("label count differs from node count"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn empty() -> Self {
        Self {
            node_count: 0,
            edges: Vec::new(),
            labels: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32, u32)] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2 as u64).sum()
    }

    /// Unweighted degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for &(u, v, _) in &self.edges {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(u, v, _) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Connected component id of every node, numbered by smallest member.
    pub fn components(&self) -> Vec<u32> {
        let adj = self.adjacency();
        let mut comp = vec![u32::MAX; self.node_count];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.node_count {
            if comp[start] != u32::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start as u32);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u as usize] {
                    if comp[v as usize] == u32::MAX {
                        comp[v as usize] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.node_count > 0 && self.components().iter().all(|&c| c == 0)
    }

    /// Subgraph induced by `keep` (ascending, duplicate-free), re-indexed densely.
    pub fn induced(&self, keep: &[u32]) -> Self {
        let mut index = vec![u32::MAX; self.node_count];
        for (i, &n) in keep.iter().enumerate() {
            index[n as usize] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(u, v, _)| index[*u as usize] != u32::MAX && index[*v as usize] != u32::MAX)
            .map(|&(u, v, w)| (index[u as usize], index[v as usize], w))
            .collect();
        Self {
            node_count: keep.len(),
            edges,
            labels: keep.iter().map(|&n| self.labels[n as usize].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Clone, Copy)]
struct Touch {
    first: u32,
    second: u32,
    many: bool,
    outside: bool,
}

/// Links nodes of `layout` through the clusters of `decomp`.
///
/// Every layout node is kept, including isolated ones.
pub fn build_network(decomp: &ClusterDecomposition, layout: &NodeLayout, rule: LinkRule) -> Result<QuantumNetwork> {
    if decomp.spec() != layout.spec {
        return Err(Error::contract(format!(
            "decomposition lattice L={} differs from layout lattice L={}",
            decomp.spec().size(),
            layout.spec.size()
        )));
    }
    let sizes = decomp.sizes();
    let mut touch = vec![
        Touch {
            first: NO_NODE,
            second: NO_NODE,
            many: false,
            outside: false,
        };
        sizes.len()
    ];
    for (site, &label) in decomp.labels().iter().enumerate() {
        // singletons touch at most one node
        if sizes[label as usize] < 2 {
            continue;
        }
        let t = &mut touch[label as usize];
        let node = layout.site_to_node[site];
        if node == NO_NODE {
            t.outside = true;
        } else if t.first == NO_NODE {
            t.first = node;
        } else if t.first != node {
            if t.second == NO_NODE {
                t.second = node;
            } else if t.second != node {
                t.many = true;
            }
        }
    }
    let links = touch
        .iter()
        .filter(|t| t.second != NO_NODE && !t.many && (rule == LinkRule::NodeExclusive || !t.outside));
    let mut net = QuantumNetwork::new(layout.node_count(), links.map(|t| (t.first, t.second, 1)))?;
    net.provenance = Provenance {
        instance_seed: Some(decomp.seed()),
        layout_seed: Some(layout.seed),
        rule: Some(rule),
    };
    Ok(net)
}

/// Largest connected component, re-indexed densely; ties go to the component
/// holding the smallest node id.
pub fn largest_connected_component(net: &QuantumNetwork) -> QuantumNetwork {
    if net.node_count() == 0 {
        return net.clone();
    }
    let comp = net.components();
    let count = *comp.iter().max().unwrap() as usize + 1;
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c as usize] += 1;
    }
    // components are numbered by smallest member, so the first maximum wins ties
    let best = (0..count).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b }) as u32;
    let keep: Vec<u32> = (0..net.node_count() as u32)
        .filter(|&n| comp[n as usize] == best)
        .collect();
    net.induced(&keep)
}

/// Entanglement entropy of a region in cluster form: the number of clusters
/// with sites both inside and outside the region.
pub fn entanglement_entropy(decomp: &ClusterDecomposition, region: &[u32]) -> usize {
    let mut inside: HashMap<u32, u32> = HashMap::new();
    let mut seen = vec![false; decomp.spec().sites()];
    for &s in region {
        if !std::mem::replace(&mut seen[s as usize], true) {
            *inside.entry(decomp.label(s)).or_insert(0) += 1;
        }
    }
    inside.iter().filter(|(&c, &k)| k < decomp.sizes()[c as usize]).count()
}

pub use io::{read_edgelist, write_edgelist, EDGELIST_MAGIC};
