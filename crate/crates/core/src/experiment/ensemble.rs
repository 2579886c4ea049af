use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PackingKind, Variant};
use crate::decomposition::ClusterDecomposition;
use crate::error::{Error, Result};
use crate::lattice::{percolation_clusters, sample_disorder};
use crate::network::{build_network, largest_connected_component, QuantumNetwork};
use crate::placement::{
    hexagonal_pitch_for_nodes, pack_hexagonal, pack_hexagonal_patch, pack_spiral, patch_radius_for_nodes, NodeLayout,
};
use crate::rng::{derive_seed, tag};
use crate::sdrg::run_sdrg;
use crate::stats::{mean, sem};
use crate::topology::{
    fit_degree_exponent, local_clustering_slope, measure, topology_report, Bin, DegreeDistribution, ExponentReport,
    TopologyReport, REPORT_VERSION,
};

/// How far each sample is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    /// Stop after extracting the LCC.
    Lcc,
    /// Also compute the topology report of the LCC.
    Topology,
}

/// Seeds of one ensemble member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSeeds {
    pub sample: u64,
    pub disorder: u64,
    pub layout: u64,
}

impl SampleSeeds {
    pub fn derive(master: u64, grid_index: usize, sample_index: usize) -> Self {
        let sample = derive_seed(master, &[grid_index as u64, sample_index as u64]);
        Self {
            sample,
            disorder: derive_seed(sample, &[tag::DISORDER]),
            layout: derive_seed(sample, &[tag::LAYOUT]),
        }
    }
}

/// Scalar outcome of one sample plus its report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub grid_index: usize,
    pub sample_index: usize,
    pub value: f64,
    pub seeds: SampleSeeds,
    pub layout_nodes: usize,
    pub layout_coverage: f64,
    pub layout_incomplete: bool,
    pub network_edges: usize,
    pub lcc_nodes: usize,
    pub lcc_links: usize,
    pub report: Option<TopologyReport>,
}

/// Everything one sample produced.
pub struct SampleOutput {
    pub decomposition: ClusterDecomposition,
    pub layout: NodeLayout,
    pub network: QuantumNetwork,
    pub lcc: QuantumNetwork,
    pub record: SampleRecord,
}

fn in_sample(e: Error, what: &str) -> Error {
    match e {
        Error::Parameter(m) => Error::Parameter(format!("{what}: {m}")),
        Error::Variant(m) => Error::Variant(format!("{what}: {m}")),
        Error::Contract(m) => Error::Contract(format!("{what}: {m}")),
        other => other,
    }
}

/// Packs the node layout a config asks for. Benchmark layouts without an
/// explicit size are matched to the node count of the spiral packing drawn
/// with the same seed.
pub fn pack_layout(config: &ExperimentConfig, seed: u64) -> Result<NodeLayout> {
    let spec = config.spec()?;
    let spiral = || pack_spiral(spec, seed, config.gamma, config.r_min, config.r_max(), config.coverage);
    match config.packing {
        PackingKind::Spiral => spiral(),
        PackingKind::Hexagonal => {
            let pitch = match config.pitch {
                Some(p) => p,
                None => hexagonal_pitch_for_nodes(spec, spiral()?.node_count()),
            };
            pack_hexagonal(spec, config.coverage, pitch)
        }
        PackingKind::HexagonalPatch => {
            let radius = match config.radius {
                Some(r) => r,
                None => patch_radius_for_nodes(spec, config.coverage, spiral()?.node_count()),
            };
            pack_hexagonal_patch(spec, config.coverage, radius)
        }
    }
}

/// Runs disorder, decimation, packing, network construction and (for
/// [`Depth::Topology`]) analysis for one ensemble member.
pub fn run_sample(
    config: &ExperimentConfig,
    grid_index: usize,
    sample_index: usize,
    depth: Depth,
) -> Result<SampleOutput> {
    let value = *config
        .grid()
        .get(grid_index)
        .ok_or_else(|| Error::parameter(format!("grid index {grid_index} out of range")))?;
    let seeds = SampleSeeds::derive(config.seed, grid_index, sample_index);
    let what = format!(
        "sample {sample_index} at {}={value} (seed {})",
        config.variant.parameter(),
        seeds.sample
    );
    let run = || -> Result<SampleOutput> {
        let spec = config.spec()?;
        let instance = sample_disorder(spec, config.variant.model(value), seeds.disorder)?;
        let decomposition = match config.variant {
            Variant::Diluted => percolation_clusters(&instance)?,
            _ => run_sdrg(&instance)?,
        };
        drop(instance);
        let layout = pack_layout(config, seeds.layout)?;
        let network = build_network(&decomposition, &layout, config.rule)?;
        let lcc = largest_connected_component(&network);
        let report = match depth {
            Depth::Lcc => None,
            Depth::Topology => {
                let options = crate::topology::AnalysisOptions {
                    seed: seeds.sample,
                    ..config.analysis()
                };
                Some(topology_report(&lcc, &options)?)
            }
        };
        let record = SampleRecord {
            grid_index,
            sample_index,
            value,
            seeds,
            layout_nodes: layout.node_count(),
            layout_coverage: layout.coverage,
            layout_incomplete: layout.incomplete,
            network_edges: network.edge_count(),
            lcc_nodes: lcc.node_count(),
            lcc_links: lcc.edge_count(),
            report,
        };
        Ok(SampleOutput {
            decomposition,
            layout,
            network,
            lcc,
            record,
        })
    };
    let out = run().map_err(|e| in_sample(e, &what))?;
    log::info!(
        "{what}: LCC {} nodes, {} links",
        out.record.lcc_nodes,
        out.record.lcc_links
    );
    Ok(out)
}

/// Mean and standard error of a per-sample quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(with = "measure")]
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(samples)`; undefined below two samples.
    #[serde(with = "measure")]
    pub sem: Option<f64>,
    /// Samples on which the quantity was defined.
    pub samples: usize,
}

impl Estimate {
    /// Estimate over the defined values, skipping `None`.
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let xs: Vec<f64> = values.into_iter().flatten().collect();
        Self {
            mean: mean(&xs),
            sem: sem(&xs),
            samples: xs.len(),
        }
    }
}

/// Ensemble aggregate of one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub report_version: u32,
    pub config_hash: String,
    pub variant: Variant,
    pub parameter: String,
    pub value: f64,
    pub samples: usize,
    pub lcc_nodes: Estimate,
    pub lcc_links: Estimate,
    pub mean_degree: Option<Estimate>,
    pub path_length: Option<Estimate>,
    pub assortativity: Option<Estimate>,
    pub clustering: Option<Estimate>,
    pub local_clustering_slope: Option<Estimate>,
    /// Per-sample fitted exponents (unfittable samples skipped).
    pub degree_exponent: Option<Estimate>,
    /// `P(k)` averaged over samples.
    pub degree_probabilities: BTreeMap<usize, f64>,
    /// Degree counts summed over samples, and their power-law fit.
    pub pooled_degree_counts: BTreeMap<usize, usize>,
    pub pooled_degree_exponent: Option<ExponentReport>,
    /// Binned curves pooled over all nodes of all samples.
    pub knn: Vec<Bin>,
    pub local_clustering: Vec<Bin>,
    #[serde(with = "measure")]
    pub pooled_local_clustering_slope: Option<f64>,
}

/// Merges binned curves node-weighted; bins with equal `k` cover equal
/// degree ranges because bin edges do not depend on the data.
fn pool_bins<'a>(curves: impl Iterator<Item = &'a [Bin]>) -> Vec<Bin> {
    let curves: Vec<&[Bin]> = curves.collect();
    let mut totals: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for bins in &curves {
        for b in bins.iter() {
            totals.entry(b.k.to_bits()).or_insert((b.k, 0)).1 += b.count;
        }
    }
    let mut values: BTreeMap<u64, f64> = BTreeMap::new();
    for bins in &curves {
        for b in bins.iter() {
            let total = totals[&b.k.to_bits()].1;
            *values.entry(b.k.to_bits()).or_insert(0.0) += b.value * (b.count as f64 / total as f64);
        }
    }
    let mut out: Vec<Bin> = totals
        .iter()
        .map(|(bits, &(k, count))| Bin {
            k,
            value: values[bits],
            count,
        })
        .collect();
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    out
}

impl EnsembleSummary {
    /// Aggregates records of one parameter value, in sample order.
    pub fn from_records(config: &ExperimentConfig, records: &[SampleRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::parameter("no samples to aggregate"))?;
        let reports: Vec<&TopologyReport> = records.iter().filter_map(|r| r.report.as_ref()).collect();
        let analysed = !reports.is_empty();
        if analysed && reports.len() != records.len() {
            return Err(Error::contract("either all or no samples carry a topology report"));
        }
        let over =
            |f: &dyn Fn(&TopologyReport) -> Option<f64>| analysed.then(|| Estimate::of(reports.iter().map(|r| f(r))));

        let mut pooled = DegreeDistribution::default();
        let mut probabilities: BTreeMap<usize, f64> = BTreeMap::new();
        for r in &reports {
            let dist = r.degree_distribution();
            pooled.pool(&dist);
            for (k, p) in dist.probabilities() {
                *probabilities.entry(k).or_insert(0.0) += p;
            }
        }
        for p in probabilities.values_mut() {
            *p /= reports.len() as f64;
        }
        let local_clustering = pool_bins(reports.iter().map(|r| r.local_clustering.as_slice()));
        Ok(Self {
            report_version: REPORT_VERSION,
            config_hash: config.hash(),
            variant: config.variant,
            parameter: config.variant.parameter().into(),
            value: first.value,
            samples: records.len(),
            lcc_nodes: Estimate::of(records.iter().map(|r| Some(r.lcc_nodes as f64))),
            lcc_links: Estimate::of(records.iter().map(|r| Some(r.lcc_links as f64))),
            mean_degree: over(&|r| r.mean_degree),
            path_length: over(&|r| r.path_length.mean),
            assortativity: over(&|r| r.assortativity),
            clustering: over(&|r| r.clustering),
            local_clustering_slope: over(&|r| r.local_clustering_slope),
            degree_exponent: over(&|r| r.degree_exponent.gamma()),
            degree_probabilities: probabilities,
            pooled_degree_exponent: analysed.then(|| ExponentReport::from_fit(fit_degree_exponent(&pooled))),
            pooled_degree_counts: pooled.counts,
            knn: pool_bins(reports.iter().map(|r| r.knn.as_slice())),
            pooled_local_clustering_slope: local_clustering_slope(&local_clustering),
            local_clustering,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Per-sample records and the aggregate of one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub summary: EnsembleSummary,
    pub records: Vec<SampleRecord>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::parameter(format!("cannot start {workers} workers: {e}")))
}

/// Runs every `(grid index, sample index)` job on `workers` threads and
/// returns the records in job order. `sink` sees each full sample output
/// before its bulky parts are dropped.
pub fn run_jobs(
    config: &ExperimentConfig,
    grid: &[usize],
    depth: Depth,
    sink: &(dyn Fn(&SampleOutput) -> Result<()> + Sync),
) -> Result<Vec<SampleRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = grid
        .iter()
        .flat_map(|&g| (0..config.samples).map(move |s| (g, s)))
        .collect();
    pool(config.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(g, s)| {
                let out = run_sample(config, g, s, depth)?;
                sink(&out)?;
                Ok(out.record)
            })
            .collect()
    })
}

/// Ensemble of a scalar config with full topology analysis.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleResult> {
    run_ensemble_with(config, &|_| Ok(()))
}

pub fn run_ensemble_with(
    config: &ExperimentConfig,
    sink: &(dyn Fn(&SampleOutput) -> Result<()> + Sync),
) -> Result<EnsembleResult> {
    if config.is_sweep() {
        return Err(Error::parameter(format!(
            "ensemble needs a single {} value, got a grid of {}",
            config.variant.parameter(),
            config.grid().len()
        )));
    }
    let records = run_jobs(config, &[0], Depth::Topology, sink)?;
    Ok(EnsembleResult {
        summary: EnsembleSummary::from_records(config, &records)?,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub lcc_links: Estimate,
    pub lcc_nodes: Estimate,
    pub summary: Option<EnsembleSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub samples: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Grid value with the largest mean LCC link count; the first on ties.
    pub fn argmax(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|p| Some((p.value, p.lcc_links.mean?)))
            .fold(None, |best: Option<(f64, f64)>, (v, m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((v, m)),
            })
            .map(|(v, _)| v)
    }

    /// CSV with header `<parameter>,mean_links,sem`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},mean_links,sem\n", self.parameter);
        for p in &self.points {
            let show = |v: Option<f64>| v.map_or_else(|| measure::UNDEFINED.to_string(), |x| x.to_string());
            s.push_str(&format!(
                "{},{},{}\n",
                p.value,
                show(p.lcc_links.mean),
                show(p.lcc_links.sem)
            ));
        }
        s
    }
}

/// Sweeps the grid of `config`; with [`Depth::Topology`] every point also
/// carries its ensemble summary.
pub fn sweep_parameter(config: &ExperimentConfig, depth: Depth) -> Result<(SweepResult, Vec<SampleRecord>)> {
    sweep_parameter_with(config, depth, &|_| Ok(()))
}

pub fn sweep_parameter_with(
    config: &ExperimentConfig,
    depth: Depth,
    sink: &(dyn Fn(&SampleOutput) -> Result<()> + Sync),
) -> Result<(SweepResult, Vec<SampleRecord>)> {
    let grid: Vec<usize> = (0..config.grid().len()).collect();
    let records = run_jobs(config, &grid, depth, sink)?;
    let points = records
        .chunks(config.samples)
        .map(|chunk| {
            Ok(SweepPoint {
                value: chunk[0].value,
                lcc_links: Estimate::of(chunk.iter().map(|r| Some(r.lcc_links as f64))),
                lcc_nodes: Estimate::of(chunk.iter().map(|r| Some(r.lcc_nodes as f64))),
                summary: match depth {
                    Depth::Lcc => None,
                    Depth::Topology => Some(EnsembleSummary::from_records(config, chunk)?),
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok((
        SweepResult {
            parameter: config.variant.parameter().into(),
            samples: config.samples,
            points,
        },
        records,
    ))
}
