//! Run directories and their manifest.
//!
//! ```text
//! <out>/config.txt                      resolved configuration
//! <out>/samples.csv                     one row of scalars per sample
//! <out>/sweep.csv                       <parameter>,mean_links,sem
//! <out>/point-000/summary.json          ensemble aggregate
//! <out>/point-000/degree_distribution.csv, knn.csv, local_clustering.csv
//! <out>/point-000/sample-000/           decomposition.txt, layout.txt,
//!                                       network.txt, lcc.txt, report.json
//! <out>/manifest.json                   every file with its SHA-256
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use super::config::ExperimentConfig;
use super::ensemble::{sweep_parameter_with, Depth, EnsembleSummary, SampleOutput, SampleRecord, SweepResult};
use crate::error::{Error, Result};
use crate::network::write_edgelist;
use crate::textio;
use crate::topology::{bins_as_rows, measure, write_curve_csv};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the run directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub files: Vec<ManifestEntry>,
}

/// Lists every file under `dir` (except an existing manifest) with its hash
/// and writes `manifest.json`.
pub fn write_manifest(dir: &Path, config_hash: &str) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let top = dir.join(MANIFEST);
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || path == top {
            continue;
        }
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let rel = path.strip_prefix(dir).expect("walked below dir");
        files.push(ManifestEntry {
            path: rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/"),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        config_hash: config_hash.to_string(),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    textio::write_file(&dir.join(MANIFEST), |w| writeln!(w, "{json}"))?;
    Ok(manifest)
}

pub fn point_dir(out: &Path, grid_index: usize) -> PathBuf {
    out.join(format!("point-{grid_index:03}"))
}

pub fn sample_dir(out: &Path, grid_index: usize, sample_index: usize) -> PathBuf {
    point_dir(out, grid_index).join(format!("sample-{sample_index:03}"))
}

/// Writes the per-sample files of one sample output.
pub fn export_sample(out: &Path, sample: &SampleOutput) -> Result<()> {
    let r = &sample.record;
    let dir = sample_dir(out, r.grid_index, r.sample_index);
    sample.decomposition.write(&dir.join("decomposition.txt"))?;
    sample.layout.write(&dir.join("layout.txt"))?;
    write_edgelist(&sample.network, &dir.join("network.txt"))?;
    write_edgelist(&sample.lcc, &dir.join("lcc.txt"))?;
    if let Some(report) = &r.report {
        report.write_json(&dir.join("report.json"))?;
    }
    Ok(())
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| measure::UNDEFINED.to_string(), |x| x.to_string())
}

/// Per-sample scalars, one row per sample in (grid, sample) order.
pub fn samples_csv(parameter: &str, records: &[SampleRecord]) -> String {
    let mut s = format!(
        "grid_index,sample_index,{parameter},seed,layout_nodes,network_edges,lcc_nodes,lcc_links,\
         mean_degree,path_length,assortativity,clustering,local_clustering_slope,degree_exponent\n"
    );
    for r in records {
        let rep = r.report.as_ref();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.grid_index,
            r.sample_index,
            r.value,
            r.seeds.sample,
            r.layout_nodes,
            r.network_edges,
            r.lcc_nodes,
            r.lcc_links,
            show(rep.and_then(|p| p.mean_degree)),
            show(rep.and_then(|p| p.path_length.mean)),
            show(rep.and_then(|p| p.assortativity)),
            show(rep.and_then(|p| p.clustering)),
            show(rep.and_then(|p| p.local_clustering_slope)),
            show(rep.and_then(|p| p.degree_exponent.gamma())),
        ));
    }
    s
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    textio::write_file(path, |w| w.write_all(text.as_bytes()))
}

/// Writes the aggregate files of one ensemble.
pub fn export_summary(out: &Path, grid_index: usize, summary: &EnsembleSummary) -> Result<()> {
    let dir = point_dir(out, grid_index);
    write_text(&dir.join("summary.json"), &(summary.to_json() + "\n"))?;
    write_curve_csv(
        &dir.join("degree_distribution.csv"),
        summary
            .degree_probabilities
            .iter()
            .map(|(&k, &p)| (k as f64, p, summary.pooled_degree_counts.get(&k).copied().unwrap_or(0))),
    )?;
    write_curve_csv(&dir.join("knn.csv"), bins_as_rows(&summary.knn))?;
    write_curve_csv(
        &dir.join("local_clustering.csv"),
        bins_as_rows(&summary.local_clustering),
    )
}

/// Writes the run-level files and the manifest.
pub fn export_artifacts(
    out: &Path,
    config: &ExperimentConfig,
    sweep: &SweepResult,
    records: &[SampleRecord],
) -> Result<Manifest> {
    write_text(&out.join("config.txt"), &config.canonical())?;
    write_text(&out.join("samples.csv"), &samples_csv(&sweep.parameter, records))?;
    write_text(&out.join("sweep.csv"), &sweep.to_csv())?;
    for (g, point) in sweep.points.iter().enumerate() {
        if let Some(summary) = &point.summary {
            export_summary(out, g, summary)?;
        }
    }
    write_manifest(out, &config.hash())
}

/// All stages for every grid value, every artifact written under `out`.
pub fn pipeline(config: &ExperimentConfig, out: &Path) -> Result<(SweepResult, Manifest)> {
    if out.exists() && fs::read_dir(out).map_err(|e| Error::io(out, e))?.next().is_some() {
        return Err(Error::io(
            out,
            std::io::Error::new(std::io::ErrorKind::AlreadyExists, "output directory is not empty"),
        ));
    }
    let (sweep, records) = sweep_parameter_with(config, Depth::Topology, &|s| export_sample(out, s))?;
    let manifest = export_artifacts(out, config, &sweep, &records)?;
    Ok((sweep, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_of_empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_manifest(dir.path(), "abc").unwrap();
        assert!(m.files.is_empty());
        let again = write_manifest(dir.path(), "abc").unwrap();
        assert_eq!(m, again);
        assert!(dir.path().join(MANIFEST).exists());
    }

    #[test]
    fn manifest_lists_nested_files() {
        let dir = tempfile::tempdir().unwrap();
        write_text(&dir.path().join("b/x.txt"), "hello\n").unwrap();
        write_text(&dir.path().join("a.csv"), "").unwrap();
        let m = write_manifest(dir.path(), "h").unwrap();
        let paths: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["a.csv", "b/x.txt"]);
        assert_eq!(m.files[1].bytes, 6);
        assert_eq!(
            m.files[0].sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
