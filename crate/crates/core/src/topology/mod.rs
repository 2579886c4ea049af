//! Network statistics: degree distribution and power-law exponent, average
//! shortest path, degree correlations, global and local clustering.
//!
//! Everything operates on the simple unweighted view ([`Graph`]) of a network.
//! Statistics that are degenerate on a given graph come back as `None` and are
//! written as the string `"undefined"` in reports.

mod correlations;
mod degree;
mod graph;
mod paths;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use correlations::{
    assortativity, global_clustering, knn_curve, local_clustering, local_clustering_curve, local_clustering_slope,
    neighbour_degrees, triangles_per_node, LocalClusteringCurve, MIN_BIN_NODES,
};
pub use degree::{
    bin_by_degree, degree_distribution, fit_degree_exponent, hurwitz_zeta, log_bin_edges, Bin, DegreeDistribution,
    PowerLawFit, Unfittable, MIN_TAIL,
};
pub use graph::Graph;
pub use paths::{average_shortest_path, PathLength, PathMode, AUTO_SAMPLE_ABOVE, AUTO_SOURCES};

use crate::error::{Error, Result};
use crate::network::{Provenance, QuantumNetwork};
use crate::textio;

pub const REPORT_VERSION: u32 = 1;

/// Serde adapter writing `None` as `"undefined"`.
pub mod measure {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub const UNDEFINED: &str = "undefined";

    pub fn serialize<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) if v.is_finite() => v.serialize(s),
            _ => s.serialize_str(UNDEFINED),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Some(v)),
            Raw::Text(t) if t == UNDEFINED => Ok(None),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"undefined\", got {t:?}"
            ))),
        }
    }
}

/// Analysis knobs shared by single reports and ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Sources for the sampled path length; `None` picks automatically.
    pub sources: Option<usize>,
    pub seed: u64,
    pub bin_ratio: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            sources: None,
            seed: 0,
            bin_ratio: 2.0,
        }
    }
}

impl AnalysisOptions {
    pub fn path_mode(&self, nodes: usize) -> PathMode {
        match self.sources {
            Some(s) if s < nodes => PathMode::Sampled {
                sources: s,
                seed: self.seed,
            },
            Some(_) => PathMode::Exact,
            None => PathMode::auto(nodes, self.seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ExponentReport {
    Fitted {
        gamma: f64,
        error: f64,
        k_min: usize,
        tail: usize,
        ks_distance: f64,
        #[serde(with = "measure")]
        binned_gamma: Option<f64>,
    },
    Unfittable {
        reason: String,
    },
}

impl ExponentReport {
    pub fn from_fit(fit: std::result::Result<PowerLawFit, Unfittable>) -> Self {
        match fit {
            Ok(f) => ExponentReport::Fitted {
                gamma: f.gamma,
                error: f.error,
                k_min: f.k_min,
                tail: f.tail,
                ks_distance: f.ks_distance,
                binned_gamma: f.binned_gamma,
            },
            Err(u) => ExponentReport::Unfittable { reason: u.reason },
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            ExponentReport::Fitted { gamma, .. } => Some(*gamma),
            ExponentReport::Unfittable { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    #[serde(with = "measure")]
    pub mean: Option<f64>,
    #[serde(with = "measure")]
    pub standard_error: Option<f64>,
    pub mode: String,
    pub sources: usize,
    pub seed: Option<u64>,
}

impl From<PathLength> for PathReport {
    fn from(p: PathLength) -> Self {
        let (mode, seed) = match p.mode {
            PathMode::Exact => ("exact", None),
            PathMode::Sampled { seed, .. } => ("sampled", Some(seed)),
        };
        Self {
            mean: p.mean,
            standard_error: p.standard_error,
            mode: mode.into(),
            sources: p.sources,
            seed,
        }
    }
}

/// Every statistic of one connected network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub report_version: u32,
    pub nodes: usize,
    pub edges: usize,
    #[serde(with = "measure")]
    pub mean_degree: Option<f64>,
    pub degree_counts: BTreeMap<usize, usize>,
    pub degree_exponent: ExponentReport,
    pub path_length: PathReport,
    #[serde(with = "measure")]
    pub assortativity: Option<f64>,
    pub knn: Vec<Bin>,
    #[serde(with = "measure")]
    pub clustering: Option<f64>,
    pub local_clustering: Vec<Bin>,
    #[serde(with = "measure")]
    pub local_clustering_slope: Option<f64>,
    pub provenance: Provenance,
    pub options: AnalysisOptions,
}

impl TopologyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        textio::write_file(path, |w| writeln!(w, "{}", self.to_json()))
    }

    pub fn degree_distribution(&self) -> DegreeDistribution {
        DegreeDistribution {
            counts: self.degree_counts.clone(),
        }
    }
}

/// Computes the full report of a connected network.
pub fn topology_report(net: &QuantumNetwork, options: &AnalysisOptions) -> Result<TopologyReport> {
    let graph = Graph::from_network(net);
    if !graph.is_connected() {
        return Err(Error::contract(
            "topology report needs a connected network; extract the LCC first",
        ));
    }
    if !(options.bin_ratio > 1.0 && options.bin_ratio.is_finite()) {
        return Err(Error::parameter(format!(
            "bin ratio must exceed 1, got {}",
            options.bin_ratio
        )));
    }
    let dist = degree_distribution(&graph);
    let paths = average_shortest_path(&graph, options.path_mode(graph.node_count()))?;
    let local = local_clustering_curve(&graph, options.bin_ratio);
    Ok(TopologyReport {
        report_version: REPORT_VERSION,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        mean_degree: dist.mean_degree(),
        degree_exponent: ExponentReport::from_fit(fit_degree_exponent(&dist)),
        degree_counts: dist.counts,
        path_length: paths.into(),
        assortativity: assortativity(&graph),
        knn: bin_by_degree(neighbour_degrees(&graph), options.bin_ratio),
        clustering: global_clustering(&graph),
        local_clustering: local.binned,
        local_clustering_slope: local.slope,
        provenance: net.provenance.clone(),
        options: *options,
    })
}

/// Writes a curve as CSV with header `k,value,count`.
pub fn write_curve_csv(path: &Path, rows: impl IntoIterator<Item = (f64, f64, usize)>) -> Result<()> {
    let rows: Vec<_> = rows.into_iter().collect();
    textio::write_file(path, |w| {
        writeln!(w, "k,value,count")?;
        for (k, v, c) in &rows {
            writeln!(w, "{k},{v},{c}")?;
        }
        Ok(())
    })
}

pub fn bins_as_rows(bins: &[Bin]) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
    bins.iter().map(|b| (b.k, b.value, b.count))
}
