use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, tag};

/// Above this many nodes the automatic mode samples sources.
pub const AUTO_SAMPLE_ABOVE: usize = 20_000;
pub const AUTO_SOURCES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum PathMode {
    /// Breadth-first traversal from every node.
    Exact,
    /// Traversals from `sources` distinct nodes drawn uniformly with `seed`.
    Sampled { sources: usize, seed: u64 },
}

impl PathMode {
    /// Exact up to [`AUTO_SAMPLE_ABOVE`] nodes, [`AUTO_SOURCES`] sources beyond.
    pub fn auto(nodes: usize, seed: u64) -> Self {
        if nodes > AUTO_SAMPLE_ABOVE {
            PathMode::Sampled {
                sources: AUTO_SOURCES,
                seed,
            }
        } else {
            PathMode::Exact
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathLength {
    /// `None` when there is no pair of nodes.
    pub mean: Option<f64>,
    /// Zero in exact mode; across sources, finite-population corrected, when sampled.
    pub standard_error: Option<f64>,
    pub sources: usize,
    pub mode: PathMode,
}

/// Sum of hop distances from `source` to every other node.
fn distance_sum(graph: &Graph, source: u32, dist: &mut [u32], queue: &mut Vec<u32>) -> u64 {
    dist.fill(u32::MAX);
    queue.clear();
    dist[source as usize] = 0;
    queue.push(source);
    let mut head = 0;
    let mut total = 0u64;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let du = dist[u as usize];
        total += du as u64;
        for &v in graph.neighbours(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                queue.push(v);
            }
        }
    }
    total
}

/// Mean hop distance over node pairs of a connected graph.
pub fn average_shortest_path(graph: &Graph, mode: PathMode) -> Result<PathLength> {
    let n = graph.node_count();
    if !graph.is_connected() {
        return Err(Error::contract("average shortest path needs a connected network"));
    }
    let sources: Vec<u32> = match mode {
        PathMode::Exact => (0..n as u32).collect(),
        PathMode::Sampled { sources, seed } => {
            if sources == 0 {
                return Err(Error::parameter("sampled path length needs at least one source"));
            }
            let s = sources.min(n);
            let mut rng = stream(derive_seed(seed, &[tag::PATHS]));
            let mut picked: Vec<u32> = sample(&mut rng, n, s).into_iter().map(|i| i as u32).collect();
            picked.sort_unstable();
            picked
        }
    };
    if n < 2 {
        return Ok(PathLength {
            mean: None,
            standard_error: None,
            sources: sources.len(),
            mode,
        });
    }
    let sums: Vec<u64> = sources
        .par_iter()
        .map_init(
            || (vec![0u32; n], Vec::with_capacity(n)),
            |(dist, queue), &s| distance_sum(graph, s, dist, queue),
        )
        .collect();
    let s = sums.len();
    let pairs = (n - 1) as f64;
    let mean = sums.iter().sum::<u64>() as f64 / (s as f64 * pairs);
    let standard_error = match mode {
        PathMode::Exact => 0.0,
        PathMode::Sampled { .. } if s < 2 => f64::NAN,
        PathMode::Sampled { .. } => {
            let var = sums.iter().map(|&d| (d as f64 / pairs - mean).powi(2)).sum::<f64>() / (s - 1) as f64;
            let fpc = (n - s) as f64 / (n - 1) as f64;
            (var / s as f64 * fpc).sqrt()
        }
    };
    Ok(PathLength {
        mean: Some(mean),
        standard_error: (!standard_error.is_nan()).then_some(standard_error),
        sources: s,
        mode,
    })
}
