use crate::network::QuantumNetwork;

/// Simple undirected graph in compressed sparse row form with sorted
/// neighbour lists. Weights are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    /// Builds from undirected edges; duplicates and self-loops are ignored.
    pub fn from_edges(nodes: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            assert!(
                (u as usize) < nodes && (v as usize) < nodes,
                "edge ({u}, {v}) out of range"
            );
            if u != v {
                pairs.push((u, v));
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; nodes + 1];
        for &(u, _) in &pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..nodes {
            offsets[i + 1] += offsets[i];
        }
        Self {
            offsets,
            targets: pairs.into_iter().map(|p| p.1).collect(),
        }
    }

    pub fn from_network(net: &QuantumNetwork) -> Self {
        Self::from_edges(net.node_count(), net.edges().iter().map(|&(u, v, _)| (u, v)))
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbours(&self, node: u32) -> &[u32] {
        &self.targets[self.offsets[node as usize]..self.offsets[node as usize + 1]]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.offsets[node as usize + 1] - self.offsets[node as usize]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count() as u32)
            .flat_map(move |u| self.neighbours(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// True for the empty graph and for graphs with one component.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbours(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == n
    }

    /// Periodic triangular lattice on an `side x side` torus (`side >= 3`):
    /// every node has six neighbours.
    pub fn triangular_lattice(side: usize) -> Self {
        assert!(side >= 3);
        let id = |x: usize, y: usize| ((y % side) * side + (x % side)) as u32;
        let mut edges = Vec::with_capacity(3 * side * side);
        for y in 0..side {
            for x in 0..side {
                edges.push((id(x, y), id(x + 1, y)));
                edges.push((id(x, y), id(x, y + 1)));
                edges.push((id(x, y), id(x + 1, y + 1)));
            }
        }
        Self::from_edges(side * side, edges)
    }
}
