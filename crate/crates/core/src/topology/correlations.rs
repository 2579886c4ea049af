use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::degree::{bin_by_degree, Bin};
use super::Graph;
use crate::stats::least_squares;

/// Fewest nodes a degree bin needs to enter the local clustering fit.
pub const MIN_BIN_NODES: usize = 5;

/// Number of triangles through every node, by sorted-list intersection.
pub fn triangles_per_node(graph: &Graph) -> Vec<u64> {
    let n = graph.node_count();
    let mut t = vec![0u64; n];
    for u in 0..n as u32 {
        let nu = graph.neighbours(u);
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = graph.neighbours(v);
            // common neighbours w > v close the triangle u < v < w exactly once
            let (mut i, mut j) = (nu.partition_point(|&w| w <= v), nv.partition_point(|&w| w <= v));
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = nu[i];
                        t[u as usize] += 1;
                        t[v as usize] += 1;
                        t[w as usize] += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    t
}

/// `C = sum_i 2 t_i / sum_i k_i (k_i - 1)`; `None` when no node has two neighbours.
pub fn global_clustering(graph: &Graph) -> Option<f64> {
    let closed: u64 = triangles_per_node(graph).iter().map(|t| 2 * t).sum();
    let triplets: u64 = graph.degrees().iter().map(|&k| (k * k.saturating_sub(1)) as u64).sum();
    (triplets > 0).then(|| closed as f64 / triplets as f64)
}

/// Local clustering of every node with at least two neighbours, as `(k, C_i)`.
pub fn local_clustering(graph: &Graph) -> Vec<(usize, f64)> {
    let t = triangles_per_node(graph);
    graph
        .degrees()
        .into_iter()
        .zip(t)
        .filter(|&(k, _)| k >= 2)
        .map(|(k, t)| (k, 2.0 * t as f64 / (k * (k - 1)) as f64))
        .collect()
}

/// `C_local` averaged per degree and per logarithmic bin, with the log-log slope.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalClusteringCurve {
    /// degree -> (mean C_local, nodes)
    pub per_degree: BTreeMap<usize, (f64, usize)>,
    pub binned: Vec<Bin>,
    /// See [`local_clustering_slope`].
    pub slope: Option<f64>,
}

impl LocalClusteringCurve {
    /// Builds the curve from per-node `(k, C_i)` values, possibly pooled over
    /// several networks.
    pub fn from_nodes(nodes: &[(usize, f64)], ratio: f64) -> Self {
        let mut per_degree: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for &(k, c) in nodes {
            let e = per_degree.entry(k).or_insert((0.0, 0));
            e.0 += c;
            e.1 += 1;
        }
        for v in per_degree.values_mut() {
            v.0 /= v.1 as f64;
        }
        let binned = bin_by_degree(nodes.iter().copied(), ratio);
        Self {
            per_degree,
            slope: local_clustering_slope(&binned),
            binned,
        }
    }
}

/// Log-log slope over bins with at least [`MIN_BIN_NODES`] nodes and a
/// positive mean; `None` with fewer than two such bins.
pub fn local_clustering_slope(bins: &[Bin]) -> Option<f64> {
    let fit: Vec<&Bin> = bins
        .iter()
        .filter(|b| b.count >= MIN_BIN_NODES && b.value > 0.0)
        .collect();
    let xs: Vec<f64> = fit.iter().map(|b| b.k.ln()).collect();
    let ys: Vec<f64> = fit.iter().map(|b| b.value.ln()).collect();
    least_squares(&xs, &ys).map(|l| l.slope)
}

pub fn local_clustering_curve(graph: &Graph, ratio: f64) -> LocalClusteringCurve {
    LocalClusteringCurve::from_nodes(&local_clustering(graph), ratio)
}

/// Pearson correlation of the degrees at the two ends of every edge, each
/// edge counted in both directions. `None` without edges or when all edge
/// ends have the same degree.
pub fn assortativity(graph: &Graph) -> Option<f64> {
    let deg = graph.degrees();
    let ends: Vec<(f64, f64)> = graph
        .edges()
        .flat_map(|(u, v)| {
            let (a, b) = (deg[u as usize] as f64, deg[v as usize] as f64);
            [(a, b), (b, a)]
        })
        .collect();
    if ends.is_empty() {
        return None;
    }
    let m = ends.iter().map(|e| e.0).sum::<f64>() / ends.len() as f64;
    let (mut cov, mut var) = (0.0, 0.0);
    for &(x, y) in &ends {
        cov += (x - m) * (y - m);
        var += (x - m) * (x - m);
    }
    (var > 0.0).then(|| (cov / var).clamp(-1.0, 1.0))
}

/// Mean neighbour degree of every node with at least one neighbour, as `(k, k_nn,i)`.
pub fn neighbour_degrees(graph: &Graph) -> Vec<(usize, f64)> {
    let deg = graph.degrees();
    (0..graph.node_count() as u32)
        .filter(|&u| deg[u as usize] > 0)
        .map(|u| {
            let nb = graph.neighbours(u);
            let s: usize = nb.iter().map(|&v| deg[v as usize]).sum();
            (deg[u as usize], s as f64 / nb.len() as f64)
        })
        .collect()
}

/// Average neighbour degree per degree: `k -> (k_nn, nodes)`.
pub fn knn_curve(graph: &Graph) -> BTreeMap<usize, (f64, usize)> {
    let mut out: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (k, knn) in neighbour_degrees(graph) {
        let e = out.entry(k).or_insert((0.0, 0));
        e.0 += knn;
        e.1 += 1;
    }
    for v in out.values_mut() {
        v.0 /= v.1 as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)])
    }

    fn star(leaves: u32) -> Graph {
        Graph::from_edges(leaves as usize + 1, (1..=leaves).map(|l| (0, l)))
    }

    #[test]
    fn fixtures() {
        assert_eq!(global_clustering(&triangle()), Some(1.0));
        assert!(local_clustering(&triangle()).iter().all(|&(_, c)| c == 1.0));
        assert_eq!(global_clustering(&star(5)), Some(0.0));
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]);
        assert_eq!(local_clustering(&path), vec![(2, 0.0)]);
        assert_eq!(global_clustering(&Graph::from_edges(2, [(0, 1)])), None);

        for leaves in 3..8 {
            assert!((assortativity(&star(leaves)).unwrap() + 1.0).abs() < 1e-12);
        }
        let k5 = Graph::from_edges(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))));
        assert_eq!(assortativity(&k5), None);

        assert_eq!(knn_curve(&triangle()), BTreeMap::from([(2, (2.0, 3))]));
        assert_eq!(knn_curve(&star(5)), BTreeMap::from([(1, (5.0, 5)), (5, (1.0, 1))]));
    }

    #[test]
    fn triangular_lattice_clustering() {
        let g = Graph::triangular_lattice(12);
        assert!((global_clustering(&g).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(assortativity(&g), None);
    }

    #[test]
    fn local_curve_slope_on_exact_power() {
        // C = 2/k exactly on bins 4..7, 8..15, 16..31 with enough nodes each
        let nodes: Vec<(usize, f64)> = [4usize, 8, 16, 32]
            .iter()
            .flat_map(|&k| std::iter::repeat((k, 2.0 / k as f64)).take(6))
            .collect();
        let curve = LocalClusteringCurve::from_nodes(&nodes, 2.0);
        assert!((curve.slope.unwrap() + 1.0).abs() < 0.1, "{:?}", curve.slope);
        assert_eq!(curve.per_degree[&8], (0.25, 6));
    }

    fn random_graph(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, edges.iter().map(|&(u, v)| (u % n as u32, v % n as u32)))
    }

    proptest! {
        #[test]
        fn triangles_match_trace_formula(n in 3usize..40, edges in proptest::collection::vec((0u32..40, 0u32..40), 0..200)) {
            let g = random_graph(n, &edges);
            let a = DMatrix::from_fn(n, n, |i, j| if g.neighbours(i as u32).binary_search(&(j as u32)).is_ok() { 1.0 } else { 0.0 });
            let a3 = &a * &a * &a;
            let t = triangles_per_node(&g);
            for i in 0..n {
                prop_assert_eq!(a3[(i, i)] as u64, 2 * t[i]);
            }
            prop_assert_eq!(a3.trace() as u64, 6 * t.iter().sum::<u64>() / 3);
            let deg = g.degrees();
            prop_assert_eq!(deg.iter().sum::<usize>(), 2 * g.edge_count());
            if let Some(c) = global_clustering(&g) {
                prop_assert!((0.0..=1.0).contains(&c));
            }
            for (_, c) in local_clustering(&g) {
                prop_assert!((0.0..=1.0).contains(&c));
            }
            if let Some(r) = assortativity(&g) {
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }
    }
}
