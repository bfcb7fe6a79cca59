//! Site percolation on d-dimensional Hamming tori.
//!
//! * [`torus`]: vertex indexing and line/neighborhood arithmetic.
//! * [`sampler`]: reproducible Bernoulli site configurations.
//! * [`components`]: component census and cluster-discovery processes.
//! * [`theory`]: critical value, Perron data, extinction probabilities,
//!   connectivity thresholds and subcritical tail constants.
//! * [`branching`]: multitype branching-process simulators.
//! * [`sweep`]: replicated parameter sweeps and theory comparison.

pub mod branching;
pub mod components;
pub mod dsu;
pub mod error;
pub mod json;
pub mod rng;
pub mod sampler;
pub mod sweep;
pub mod theory;
pub mod torus;

pub use components::{
    cluster_discovery, connected_components, modified_cluster_discovery, plane_occupancy_max,
    Clustering, ComponentStats, Discovery, DiscoveryTrace,
};
pub use error::{Error, Result};
pub use sampler::{c_log_to_p, lambda_to_p, sample, SiteConfig};
pub use torus::{hamming_distance, LineId, TorusSpec, VertexId};
