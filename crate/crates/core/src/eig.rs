//! Dense symmetric eigendecomposition with verified residuals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, TscError};

/// Relative residual and orthonormality tolerance for [`symmetric_eig`].
pub const EIG_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymmetricSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.eigenvectors.nrows(), self.len(), |i, j| {
            self.eigenvectors[(i, j)] * self.eigenvalues[j]
        });
        scaled * self.eigenvectors.transpose()
    }
}

/// Full eigendecomposition of a symmetric matrix.
///
/// The result is checked before it is returned: every pair must satisfy
/// `‖Mv − λv‖₂ ≤ 1e-8·‖M‖_F` and the eigenvector columns must be orthonormal
/// to within `1e-8`. Anything else is reported as `ConvergenceFailure`.
pub fn symmetric_eig(matrix: &DMatrix<f64>) -> Result<SymmetricSpectrum> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(TscError::InvalidArgument(format!(
            "matrix is {}x{}, not square",
            n,
            matrix.ncols()
        )));
    }
    if n == 0 {
        return Ok(SymmetricSpectrum {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let scale = matrix.amax().max(1.0);
    let asym = (matrix - matrix.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(TscError::InvalidArgument(format!(
            "matrix is not symmetric (max |M - Mᵀ| = {asym:e})"
        )));
    }
    let sym = (matrix + matrix.transpose()) * 0.5;

    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, MAX_SWEEPS).ok_or_else(|| {
        TscError::ConvergenceFailure(format!("QR sweeps did not converge for {n}x{n} matrix"))
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = eig.eigenvectors.select_columns(order.iter());

    let spectrum = SymmetricSpectrum {
        eigenvalues,
        eigenvectors,
    };
    verify(&sym, &spectrum)?;
    Ok(spectrum)
}

fn verify(matrix: &DMatrix<f64>, s: &SymmetricSpectrum) -> Result<()> {
    let frob = matrix.norm();
    let mv = matrix * &s.eigenvectors;
    for j in 0..s.len() {
        let r = (mv.column(j) - s.eigenvectors.column(j) * s.eigenvalues[j]).norm();
        if r > EIG_TOL * frob.max(f64::MIN_POSITIVE) && r > 0.0 {
            return Err(TscError::ConvergenceFailure(format!(
                "residual {r:e} for eigenpair {j} exceeds {EIG_TOL:e}·‖M‖_F"
            )));
        }
    }
    let gram = s.eigenvectors.transpose() * &s.eigenvectors;
    let dev = (gram - DMatrix::<f64>::identity(s.len(), s.len())).amax();
    if dev > EIG_TOL {
        return Err(TscError::ConvergenceFailure(format!(
            "eigenvectors not orthonormal ({dev:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Seed;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = Seed(seed).stream();
        let a = DMatrix::from_fn(n, n, |_, _| s.standard_normal());
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn identity_spectrum() {
        let s = symmetric_eig(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0, 0.0]));
        let s = symmetric_eig(&m).unwrap();
        assert_eq!(s.eigenvalues.as_slice(), &[-1.0, 0.0, 2.0]);
        assert!((s.eigenvectors[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_8x8_residuals() {
        let m = random_symmetric(8, 1);
        let s = symmetric_eig(&m).unwrap();
        let f = m.norm();
        for j in 0..8 {
            let r = (&m * s.eigenvectors.column(j) - s.eigenvectors.column(j) * s.eigenvalues[j])
                .norm();
            assert!(r <= 1e-8 * f);
        }
        let g = s.eigenvectors.transpose() * &s.eigenvectors;
        assert!((g - DMatrix::identity(8, 8)).amax() <= 1e-8);
        assert!(s.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reconstruction_up_to_50() {
        for (i, n) in [1usize, 2, 5, 17, 50].into_iter().enumerate() {
            let m = random_symmetric(n, 100 + i as u64);
            let s = symmetric_eig(&m).unwrap();
            let err = (s.reconstruct() - &m).amax();
            assert!(err <= 1e-8 * m.norm(), "n={n} err={err:e}");
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(symmetric_eig(&m).is_err());
    }

    #[test]
    fn zero_matrix() {
        let s = symmetric_eig(&DMatrix::zeros(4, 4)).unwrap();
        assert!(s.eigenvalues.iter().all(|&v| v == 0.0));
    }
}
