//! Quantum communication networks from the ground-state clusters of the
//! random transverse-field Ising model.
//!
//! Pipeline: [`sample_disorder`] -> [`run_sdrg`] (or [`percolation_clusters`])
//! -> [`placement`] -> [`build_network`] -> [`topology`]. The
//! [`experiment`] module runs seeded ensembles and sweeps over all stages.
//! The guide in `book/` walks through each stage.

pub mod decomposition;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod rng;
pub mod sdrg;
pub mod stats;
mod textio;
pub mod topology;
pub mod unionfind;

pub use decomposition::{cluster_size_histogram, ClusterDecomposition};
pub use error::{Error, Result};
pub use lattice::{percolation_clusters, sample_disorder, DisorderInstance, DisorderModel, LatticeSpec, THETA_C};
pub use sdrg::{run_sdrg, RgState};
pub mod network;
pub mod placement;
pub use network::{build_network, entanglement_entropy, largest_connected_component, LinkRule, QuantumNetwork};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/disorder.md")]
    mod disorder {}
    #[doc = include_str!("../../../book/src/decimation.md")]
    mod decimation {}
    #[doc = include_str!("../../../book/src/nodes.md")]
    mod nodes {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/topology.md")]
    mod topology {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
