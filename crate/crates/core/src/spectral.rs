//! Normalized Laplacian, eigengap model-order estimate and normalized
//! spectral clustering.
//!
//! The Laplacian is the symmetric one, `L_sym = I − D^{-1/2} A D^{-1/2}`.
//! Isolated vertices get `D_ii^{-1/2} = 0`, so their Laplacian row is `e_i`
//! (eigenvalue 1) and their embedding row is zero.

use nalgebra::{DMatrix, DVector};

use crate::data::Label;
use crate::eig::{symmetric_eig, SymmetricSpectrum};
use crate::error::{Result, TscError};
use crate::kmeans::kmeans_with_restarts;
use crate::outlier::OutlierReport;
use crate::random::SeedStream;
use crate::threshold::{AdjacencyGraph, TscOptions};

#[derive(Debug, Clone)]
pub struct ClusterResult {
    /// One label per input point, in `0..l_hat`, or `-1` for removed outliers.
    pub labels: Vec<Label>,
    pub l_hat: usize,
    /// Spectrum of the normalized Laplacian of the (inlier) graph.
    pub spectrum: SymmetricSpectrum,
    /// Adjacency of the (inlier) graph.
    pub adjacency: AdjacencyGraph,
    /// Present when outlier removal ran before clustering.
    pub outliers: Option<OutlierReport>,
}

/// `I − D^{-1/2} A D^{-1/2}` with the zero-degree convention above.
pub fn normalized_laplacian(adjacency: &AdjacencyGraph) -> DMatrix<f64> {
    let n = adjacency.len();
    let inv_sqrt: DVector<f64> =
        adjacency
            .degrees()
            .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 });
    let a = adjacency.matrix();
    DMatrix::from_fn(n, n, |i, j| {
        let off = inv_sqrt[i] * a[(i, j)] * inv_sqrt[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    })
}

/// Default upper end of the eigengap search: ⌊N/2⌋, kept within `1..=N-1`.
pub fn default_max_clusters(n: usize) -> usize {
    (n / 2).clamp(1, n.saturating_sub(1).max(1))
}

/// Eigengap estimate: the 1-based `i ≤ max_clusters` maximizing
/// `λ_{i+1} − λ_i`, smallest `i` on ties.
pub fn estimate_l(spectrum: &SymmetricSpectrum, max_clusters: usize) -> usize {
    let ev = &spectrum.eigenvalues;
    if ev.len() < 2 {
        return 1;
    }
    let top = max_clusters.clamp(1, ev.len() - 1);
    let mut best = (1, f64::NEG_INFINITY);
    for i in 1..=top {
        let gap = ev[i] - ev[i - 1];
        if gap > best.1 {
            best = (i, gap);
        }
    }
    best.0
}

/// Rows of the `l_hat` smallest eigenvectors, each nonzero row scaled to
/// unit length.
pub fn embedding_from_spectrum(spectrum: &SymmetricSpectrum, l_hat: usize) -> DMatrix<f64> {
    let mut emb = spectrum.eigenvectors.columns(0, l_hat).into_owned();
    for mut row in emb.row_iter_mut() {
        let norm = row.norm();
        if norm > 1e-12 {
            row /= norm;
        } else {
            row.fill(0.0);
        }
    }
    emb
}

pub fn spectral_embedding(adjacency: &AdjacencyGraph, l_hat: usize) -> Result<DMatrix<f64>> {
    check_l_hat(l_hat, adjacency.len())?;
    let spectrum = symmetric_eig(&normalized_laplacian(adjacency))?;
    Ok(embedding_from_spectrum(&spectrum, l_hat))
}

fn check_l_hat(l_hat: usize, n: usize) -> Result<()> {
    if l_hat < 1 || l_hat > n {
        return Err(TscError::InvalidArgument(format!(
            "cluster count {l_hat} must lie in 1..={n}"
        )));
    }
    Ok(())
}

fn finish(
    adjacency: AdjacencyGraph,
    spectrum: SymmetricSpectrum,
    l_hat: usize,
    restarts: usize,
    stream: &mut SeedStream,
) -> ClusterResult {
    let emb = embedding_from_spectrum(&spectrum, l_hat);
    let run = kmeans_with_restarts(&emb, l_hat, restarts, stream);
    ClusterResult {
        labels: run.labels.iter().map(|&l| l as Label).collect(),
        l_hat,
        spectrum,
        adjacency,
        outliers: None,
    }
}

/// Normalized spectral clustering of `adjacency` into `l_hat` clusters.
pub fn normalized_spectral_clustering(
    adjacency: &AdjacencyGraph,
    l_hat: usize,
    stream: &mut SeedStream,
) -> Result<ClusterResult> {
    check_l_hat(l_hat, adjacency.len())?;
    let spectrum = symmetric_eig(&normalized_laplacian(adjacency))?;
    Ok(finish(
        adjacency.clone(),
        spectrum,
        l_hat,
        crate::kmeans::DEFAULT_RESTARTS,
        stream,
    ))
}

/// Steps 2 and 3 of the pipeline: estimate (or take) L̂, then cluster.
pub(crate) fn cluster_adjacency(
    adjacency: AdjacencyGraph,
    options: &TscOptions,
) -> Result<ClusterResult> {
    let n = adjacency.len();
    let spectrum = symmetric_eig(&normalized_laplacian(&adjacency))?;
    let l_hat = match options.l_hat {
        Some(l) => l,
        None => estimate_l(
            &spectrum,
            options
                .max_clusters
                .unwrap_or_else(|| default_max_clusters(n)),
        ),
    };
    check_l_hat(l_hat, n)?;
    let mut stream = options.seed.stream();
    Ok(finish(
        adjacency,
        spectrum,
        l_hat,
        options.restarts,
        &mut stream,
    ))
}
