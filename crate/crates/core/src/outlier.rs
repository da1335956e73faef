//! Outlier detection by maximum absolute correlation.
//!
//! A point is declared an outlier when its largest absolute inner product
//! with any other point is strictly below `sqrt(6 ln N) / sqrt(m)`, where N
//! counts every point including the outliers themselves.

use rayon::prelude::*;

use crate::data::{normalize_rows, DataSet, Label, OUTLIER};
use crate::error::{Result, TscError};
use crate::spectral::ClusterResult;
use crate::threshold::{tsc_cluster, TscOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    /// `true` marks an outlier.
    pub flags: Vec<bool>,
    pub threshold: f64,
    /// `max_{p≠j} |⟨x_p, x_j⟩|` per point.
    pub max_correlations: Vec<f64>,
}

impl OutlierReport {
    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn inliers(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i)
            .collect()
    }
}

/// `sqrt(6 ln N) / sqrt(m)` (natural log).
pub fn outlier_threshold(n: usize, m: usize) -> f64 {
    outlier_threshold_real(n as f64, m)
}

pub(crate) fn outlier_threshold_real(n: f64, m: usize) -> f64 {
    (6.0 * n.ln()).sqrt() / (m as f64).sqrt()
}

/// Flags outliers among unit-norm points.
pub fn detect_outliers(data: &DataSet) -> Result<OutlierReport> {
    let n = data.len();
    if n < 2 {
        return Err(TscError::InvalidArgument(format!(
            "outlier detection needs N >= 2, got {n}"
        )));
    }
    data.require_unit_rows()?;
    let gram = data.gram();
    let max_correlations: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .filter(|&p| p != j)
                .map(|p| gram[(j, p)].abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let threshold = outlier_threshold(n, data.dim());
    let flags = max_correlations.iter().map(|&c| c < threshold).collect();
    Ok(OutlierReport {
        flags,
        threshold,
        max_correlations,
    })
}

/// Removes detected outliers, clusters the rest, and reports outliers with
/// label `-1` at their original positions.
pub fn cluster_with_outliers(
    data: &DataSet,
    q: usize,
    options: &TscOptions,
) -> Result<ClusterResult> {
    let normalized = normalize_rows(data)?;
    let report = detect_outliers(&normalized)?;
    let inliers = report.inliers();
    if inliers.is_empty() {
        return Err(TscError::EmptyAfterRemoval(data.len()));
    }
    let kept = normalized.select(&inliers)?;
    let mut result = tsc_cluster(&kept, q, options)?;
    let mut labels: Vec<Label> = vec![OUTLIER; data.len()];
    for (k, &i) in inliers.iter().enumerate() {
        labels[i] = result.labels[k];
    }
    result.labels = labels;
    result.outliers = Some(report);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn threshold_values() {
        assert!((outlier_threshold(100, 50) - 0.743_384_437_77).abs() < 1e-6);
        assert!((outlier_threshold_real(std::f64::consts::E, 6) - 1.0).abs() < 1e-15);
        assert!(outlier_threshold(100, 60) < outlier_threshold(100, 50));
        assert!(outlier_threshold(200, 50) > outlier_threshold(100, 50));
    }

    #[test]
    fn duplicates_are_inliers_orthogonal_is_outlier() {
        // m = 20 keeps the threshold below 1
        let e = |k: usize| {
            (0..20)
                .map(|i| if i == k { 1.0 } else { 0.0 })
                .collect::<Vec<f64>>()
        };
        let d = DataSet::from_rows(&[e(0), e(0), e(2)], None).unwrap();
        let r = detect_outliers(&d).unwrap();
        assert!(r.threshold <= 1.0);
        assert_eq!(r.flags, vec![false, false, true]);
        assert_eq!(r.max_correlations, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn mutually_orthogonal_points_empty_after_removal() {
        let d = DataSet::new(DMatrix::identity(4, 4), None).unwrap();
        let err = cluster_with_outliers(&d, 1, &TscOptions::default()).unwrap_err();
        assert!(matches!(err, TscError::EmptyAfterRemoval(4)));
    }

    #[test]
    fn flags_invariant_under_permutation() {
        let mut s = crate::random::Seed(8).stream();
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| {
                crate::random::sample_unit_sphere(6, &mut s)
                    .iter()
                    .copied()
                    .collect()
            })
            .collect();
        let d = DataSet::from_rows(&rows, None).unwrap();
        let perm: Vec<usize> = (0..12).rev().collect();
        let a = detect_outliers(&d).unwrap();
        let b = detect_outliers(&d.select(&perm).unwrap()).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(a.flags[i], b.flags[k]);
        }
    }
}
