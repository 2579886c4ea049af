//! Ensembles, parameter sweeps, external graphs and run directories.
//!
//! Every sample draws its seed from `(master seed, grid index, sample
//! index)`, so results do not depend on the number of worker threads or the
//! order in which samples finish. Aggregation always walks samples in
//! `(grid index, sample index)` order.

pub mod artifacts;
pub mod config;
pub mod ensemble;
pub mod import;

pub use artifacts::{export_artifacts, export_sample, pipeline, write_manifest, Manifest, ManifestEntry, MANIFEST};
pub use config::{ExperimentConfig, PackingKind, Variant, KEYS};
pub use ensemble::{
    pack_layout, run_ensemble, run_ensemble_with, run_sample, sweep_parameter, sweep_parameter_with, Depth,
    EnsembleResult, EnsembleSummary, Estimate, SampleOutput, SampleRecord, SampleSeeds, SweepPoint, SweepResult,
};
pub use import::{import_edgelist, parse_external, ImportSummary, ImportedNetwork};
