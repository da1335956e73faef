//! Thresholding-based subspace clustering (TSC).
//!
//! Points lying on a union of low-dimensional linear subspaces are clustered by
//! keeping, for every point, its `q` most correlated neighbors, building a
//! symmetric adjacency matrix from those correlations, estimating the number
//! of subspaces from the eigengap of the normalized Laplacian, and running
//! normalized spectral clustering. Points whose largest correlation with the
//! rest of the data falls below `sqrt(6 ln N) / sqrt(m)` can be removed as
//! outliers before clustering.
//!
//! The crate also ships synthetic data generators for the random subspace
//! models, the usual error measures (CE, EL, FDE), subspace affinities, and a
//! seeded Monte-Carlo harness driven by the `tsc` binary.

pub mod assignment;
pub mod cli;
pub mod data;
pub mod eig;
pub mod error;
pub mod experiment;
pub mod kmeans;
pub mod metrics;
pub mod outlier;
pub mod random;
pub mod spectral;
pub mod synth;
pub mod threshold;

pub use data::{DataSet, Label, OUTLIER};
pub use eig::{symmetric_eig, SymmetricSpectrum};
pub use error::{Result, TscError};
pub use outlier::{cluster_with_outliers, detect_outliers, outlier_threshold, OutlierReport};
pub use random::{Seed, SeedStream};
pub use spectral::{normalized_spectral_clustering, ClusterResult};
pub use threshold::{
    build_adjacency, select_neighbors, tsc_cluster, AdjacencyGraph, NeighborSelection, TscOptions,
};

pub use nalgebra;
