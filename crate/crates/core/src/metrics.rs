//! Error measures, subspace affinities and recovery-condition checks.

use nalgebra::DMatrix;

use crate::assignment::max_weight_matching;
use crate::data::{Label, OUTLIER};
use crate::eig::symmetric_eig;
use crate::error::{Result, TscError};
use crate::spectral::ClusterResult;
use crate::threshold::AdjacencyGraph;

const ORTHO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub ce: f64,
    pub el: u8,
    pub fde: f64,
    pub detection_property_holds: bool,
    pub max_affp: f64,
    pub max_aff: f64,
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(TscError::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Fraction of misclassified points under the best one-to-one matching of
/// predicted to true cluster ids.
///
/// Outliers (`-1`) are their own class and are never permuted: a point is
/// correct as an outlier only if it is `-1` on both sides.
pub fn clustering_error(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    same_len(predicted.len(), truth.len())?;
    let n = truth.len();
    if n == 0 {
        return Ok(0.0);
    }
    let id_count = |ls: &[Label]| {
        ls.iter()
            .copied()
            .max()
            .map_or(0, |m| (m + 1).max(0) as usize)
    };
    let (rows, cols) = (id_count(truth), id_count(predicted));
    let mut table = vec![vec![0usize; cols]; rows];
    let mut outliers_right = 0;
    for (&p, &t) in predicted.iter().zip(truth) {
        match (t, p) {
            (OUTLIER, OUTLIER) => outliers_right += 1,
            (t, p) if t >= 0 && p >= 0 => table[t as usize][p as usize] += 1,
            _ => {}
        }
    }
    let correct = max_weight_matching(&table) + outliers_right;
    Ok((n - correct) as f64 / n as f64)
}

/// 0 if the estimated subspace count is right, 1 otherwise.
pub fn estimation_error(l_hat: usize, l: usize) -> u8 {
    u8::from(l_hat != l)
}

/// Mean over columns b_i of `1 − ‖b_i restricted to i's cluster‖ / ‖b_i‖`.
/// Empty columns count as 1.
pub fn feature_detection_error(adjacency: &AdjacencyGraph, truth: &[Label]) -> Result<f64> {
    same_len(adjacency.len(), truth.len())?;
    if truth.contains(&OUTLIER) {
        return Err(TscError::InvalidArgument(
            "FDE is defined on inliers only; remove outliers first".into(),
        ));
    }
    let n = truth.len();
    if n == 0 {
        return Ok(0.0);
    }
    let a = adjacency.matrix();
    let mut total = 0.0;
    for i in 0..n {
        // one pass for both parts, so a column with no cross mass scores exactly 0
        let (mut own, mut cross) = (0.0, 0.0);
        for (v, &t) in a.column(i).iter().zip(truth) {
            if t == truth[i] {
                own += v * v;
            } else {
                cross += v * v;
            }
        }
        if own + cross == 0.0 {
            total += 1.0;
            continue;
        }
        total += (1.0 - own.sqrt() / (own + cross).sqrt()).clamp(0.0, 1.0);
    }
    Ok(total / n as f64)
}

/// Every edge stays inside a true cluster, and every point has at least `q`
/// such edges.
pub fn check_subspace_detection_property(
    adjacency: &AdjacencyGraph,
    truth: &[Label],
    q: usize,
) -> bool {
    if adjacency.len() != truth.len() {
        return false;
    }
    let a = adjacency.matrix();
    (0..truth.len()).all(|i| {
        let mut within = 0;
        for j in 0..truth.len() {
            if a[(i, j)] != 0.0 {
                if truth[i] != truth[j] {
                    return false;
                }
                within += 1;
            }
        }
        within >= q
    })
}

fn check_orthonormal(u: &DMatrix<f64>) -> Result<()> {
    let dev = (u.transpose() * u - DMatrix::<f64>::identity(u.ncols(), u.ncols())).amax();
    if dev > ORTHO_TOL {
        return Err(TscError::NotOrthonormal(dev));
    }
    Ok(())
}

fn cross_gram(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if u.nrows() != v.nrows() {
        return Err(TscError::InvalidArgument(format!(
            "bases live in R^{} and R^{}",
            u.nrows(),
            v.nrows()
        )));
    }
    check_orthonormal(u)?;
    check_orthonormal(v)?;
    Ok(u.transpose() * v)
}

/// Orthonormal basis of the column span (thin QR).
pub fn orthonormalize(u: &DMatrix<f64>) -> DMatrix<f64> {
    u.clone().qr().q()
}

/// Spectral norm of UᵀV, i.e. the cosine of the smallest principal angle.
/// Computed from the top eigenvalue of (UᵀV)ᵀ(UᵀV).
pub fn affinity_affp(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    let m = cross_gram(u, v)?;
    let spec = symmetric_eig(&(m.transpose() * &m))?;
    let top = spec.eigenvalues.iter().copied().fold(0.0, f64::max);
    Ok(top.sqrt())
}

/// Frobenius norm of UᵀV divided by √d.
pub fn affinity_aff(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    if u.ncols() != v.ncols() {
        return Err(TscError::InvalidArgument(format!(
            "subspace dimensions differ ({} vs {})",
            u.ncols(),
            v.ncols()
        )));
    }
    let m = cross_gram(u, v)?;
    Ok(m.norm() / (u.ncols() as f64).sqrt())
}

/// Principal angles in ascending order, from the singular values of UᵀV.
pub fn principal_angles(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let m = cross_gram(u, v)?;
    let mut angles: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Largest `(affp, aff)` over all pairs of distinct bases.
pub fn max_pairwise_affinities(bases: &[DMatrix<f64>]) -> Result<(f64, f64)> {
    let mut best = (0.0f64, 0.0f64);
    for k in 0..bases.len() {
        for l in k + 1..bases.len() {
            best.0 = best.0.max(affinity_affp(&bases[k], &bases[l])?);
            best.1 = best.1.max(affinity_aff(&bases[k], &bases[l])?);
        }
    }
    Ok(best)
}

/// `max_{k≠l} aff(S_k, S_l) ≤ 1 / (13 ln N)`.
pub fn check_affinity_condition(bases: &[DMatrix<f64>], n: usize) -> Result<bool> {
    if bases.len() < 2 {
        return Err(TscError::InvalidArgument(
            "need at least two subspaces".into(),
        ));
    }
    let (_, max_aff) = max_pairwise_affinities(bases)?;
    Ok(max_aff <= 1.0 / (13.0 * (n as f64).ln()))
}

/// `d / m ≤ 1 / (6 ln N)`.
pub fn check_outlier_condition(d: usize, m: usize, n: usize) -> bool {
    d as f64 / m as f64 <= 1.0 / (6.0 * (n as f64).ln())
}

/// All measures for one clustering of outlier-free data with `l` true
/// subspaces spanned by `bases`.
pub fn evaluate(
    result: &ClusterResult,
    truth: &[Label],
    l: usize,
    q: usize,
    bases: &[DMatrix<f64>],
) -> Result<MetricsReport> {
    let ortho: Vec<DMatrix<f64>> = bases.iter().map(orthonormalize).collect();
    let (max_affp, max_aff) = max_pairwise_affinities(&ortho)?;
    Ok(MetricsReport {
        ce: clustering_error(&result.labels, truth)?,
        el: estimation_error(result.l_hat, l),
        fde: feature_detection_error(&result.adjacency, truth)?,
        detection_property_holds: check_subspace_detection_property(&result.adjacency, truth, q),
        max_affp,
        max_aff,
    })
}
