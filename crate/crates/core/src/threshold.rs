//! Correlation thresholding and adjacency construction, and the end-to-end
//! clustering pipeline built on them.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::{normalize_rows, DataSet};
use crate::error::{Result, TscError};
use crate::random::Seed;
use crate::spectral::{self, ClusterResult};

/// For each point j, the q indices with the largest absolute correlation to
/// x_j (self excluded) together with those correlation magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSelection {
    q: usize,
    neighbors: Vec<Vec<usize>>,
    magnitudes: Vec<Vec<f64>>,
}

impl NeighborSelection {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// S_j, ordered by decreasing correlation (ties by index).
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    /// |⟨x_j, x_i⟩| for each i in S_j, aligned with [`Self::neighbors`].
    pub fn magnitudes(&self, j: usize) -> &[f64] {
        &self.magnitudes[j]
    }

    /// Dense z_j: |⟨x_j, x_i⟩| on S_j, zero elsewhere.
    pub fn z(&self, j: usize) -> DVector<f64> {
        let mut z = DVector::zeros(self.len());
        for (&i, &w) in self.neighbors[j].iter().zip(&self.magnitudes[j]) {
            z[i] = w;
        }
        z
    }
}

/// Symmetric nonnegative adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyGraph {
    matrix: DMatrix<f64>,
}

impl AdjacencyGraph {
    /// Wraps an existing matrix after checking exact symmetry,
    /// nonnegativity and a zero diagonal.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(TscError::InvalidArgument(
                "adjacency matrix must be square".into(),
            ));
        }
        for i in 0..n {
            if matrix[(i, i)] != 0.0 {
                return Err(TscError::InvalidArgument(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in 0..i {
                let v = matrix[(i, j)];
                if v != matrix[(j, i)] {
                    return Err(TscError::InvalidArgument(format!(
                        "asymmetric entry ({i}, {j})"
                    )));
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(TscError::InvalidArgument(format!(
                        "entry ({i}, {j}) = {v} is not a finite nonnegative weight"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.matrix.row_iter().map(|r| r.sum()))
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.matrix.row(i).iter().filter(|&&v| v != 0.0).count()
    }
}

fn check_q(q: usize, n: usize) -> Result<()> {
    if q < 1 || q + 1 > n {
        return Err(TscError::InvalidQ {
            q,
            n,
            max: n.saturating_sub(1),
        });
    }
    Ok(())
}

/// Larger magnitude first; equal magnitudes keep the smaller index first.
fn rank(a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Thresholding step on a precomputed Gram matrix.
pub fn select_neighbors_from_gram(gram: &DMatrix<f64>, q: usize) -> Result<NeighborSelection> {
    let n = gram.nrows();
    check_q(q, n)?;
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut cand: Vec<(usize, f64)> = (0..n)
                .filter(|&i| i != j)
                .map(|i| (i, gram[(j, i)].abs()))
                .collect();
            if q < cand.len() {
                cand.select_nth_unstable_by(q - 1, |&a, &b| rank(a, b));
                cand.truncate(q);
            }
            cand.sort_by(|&a, &b| rank(a, b));
            cand.into_iter().unzip()
        })
        .collect();
    let (neighbors, magnitudes) = rows.into_iter().unzip();
    Ok(NeighborSelection {
        q,
        neighbors,
        magnitudes,
    })
}

/// Keeps, for every point, the `q` points with largest absolute inner
/// product. Rows must already have unit norm.
pub fn select_neighbors(data: &DataSet, q: usize) -> Result<NeighborSelection> {
    check_q(q, data.len())?;
    data.require_unit_rows()?;
    select_neighbors_from_gram(&data.gram(), q)
}

/// `A_ij = [z_j]_i + [z_i]_j`.
pub fn build_adjacency(sel: &NeighborSelection) -> AdjacencyGraph {
    let n = sel.len();
    // b[(i, j)] = [z_j]_i
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        for (&i, &w) in sel.neighbors(j).iter().zip(sel.magnitudes(j)) {
            b[(i, j)] = w;
        }
    }
    let matrix = DMatrix::from_fn(
        n,
        n,
        |i, j| if i == j { 0.0 } else { b[(i, j)] + b[(j, i)] },
    );
    AdjacencyGraph { matrix }
}

#[derive(Debug, Clone)]
pub struct TscOptions {
    /// Use this cluster count instead of the eigengap estimate.
    pub l_hat: Option<usize>,
    /// Upper end of the eigengap search; `None` means ⌊N/2⌋.
    pub max_clusters: Option<usize>,
    /// Normalize rows before thresholding.
    pub normalize: bool,
    /// k-means restarts in the final step.
    pub restarts: usize,
    pub seed: Seed,
}

impl Default for TscOptions {
    fn default() -> Self {
        Self {
            l_hat: None,
            max_clusters: None,
            normalize: true,
            restarts: crate::kmeans::DEFAULT_RESTARTS,
            seed: Seed(0),
        }
    }
}

impl TscOptions {
    pub fn with_seed(mut self, seed: impl Into<Seed>) -> Self {
        self.seed = seed.into();
        self
    }

    pub fn with_l_hat(mut self, l: usize) -> Self {
        self.l_hat = Some(l);
        self
    }

    pub fn with_max_clusters(mut self, k: usize) -> Self {
        self.max_clusters = Some(k);
        self
    }
}

/// Runs the full pipeline: normalize, threshold, adjacency, eigengap,
/// normalized spectral clustering.
pub fn tsc_cluster(data: &DataSet, q: usize, options: &TscOptions) -> Result<ClusterResult> {
    check_q(q, data.len())?;
    let data = if options.normalize {
        normalize_rows(data)?
    } else {
        data.clone()
    };
    let sel = select_neighbors(&data, q)?;
    let adjacency = build_adjacency(&sel);
    spectral::cluster_adjacency(adjacency, options)
}
