//! Synthetic unions of subspaces.
//!
//! Inliers are generated subspace by subspace as `x = U a`, outliers are
//! appended uniformly on the unit sphere of R^m, erasures (if any) zero out
//! `s` uniformly chosen coordinates per point, and finally every row is
//! normalized. Each random ingredient draws from its own derived stream.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::data::{DataSet, Label, OUTLIER};
use crate::error::{Result, TscError};
use crate::random::{sample_gaussian_vector, sample_unit_sphere, Seed, SeedStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientModel {
    /// a ~ N(0, I/d)
    GaussianInvD,
    /// a uniform on the unit sphere of R^d
    SphereUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisModel {
    /// Uniformly random orthonormal m×d basis.
    HaarOrthonormal,
    /// i.i.d. N(0, 1/m) entries.
    GaussianInvM,
    /// Subspace l spanned by coordinates l·d .. (l+1)·d; requires L·d ≤ m.
    CoordinateBlocks,
}

impl CoefficientModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianInvD => "gaussian_inv_d",
            Self::SphereUniform => "sphere_uniform",
        }
    }
}

impl BasisModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::HaarOrthonormal => "haar_orthonormal",
            Self::GaussianInvM => "gaussian_inv_m",
            Self::CoordinateBlocks => "coordinate_blocks",
        }
    }
}

impl fmt::Display for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BasisModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoefficientModel {
    type Err = TscError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_inv_d" => Ok(Self::GaussianInvD),
            "sphere_uniform" => Ok(Self::SphereUniform),
            _ => Err(TscError::InvalidArgument(format!(
                "unknown coefficient model `{s}`"
            ))),
        }
    }
}

impl FromStr for BasisModel {
    type Err = TscError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar_orthonormal" => Ok(Self::HaarOrthonormal),
            "gaussian_inv_m" => Ok(Self::GaussianInvM),
            "coordinate_blocks" => Ok(Self::CoordinateBlocks),
            _ => Err(TscError::InvalidArgument(format!(
                "unknown basis model `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub m: usize,
    pub l: usize,
    pub d: usize,
    /// Points per subspace.
    pub n: usize,
    pub coefficients: CoefficientModel,
    pub basis: BasisModel,
    /// Erasures per point.
    pub s: usize,
    /// Number of outliers.
    pub n0: usize,
    pub seed: Seed,
    /// Randomly permute the points after generation.
    pub shuffle: bool,
}

impl SyntheticSpec {
    pub fn new(m: usize, l: usize, d: usize, n: usize) -> Self {
        Self {
            m,
            l,
            d,
            n,
            coefficients: CoefficientModel::SphereUniform,
            basis: BasisModel::HaarOrthonormal,
            s: 0,
            n0: 0,
            seed: Seed(0),
            shuffle: false,
        }
    }

    pub fn total_points(&self) -> usize {
        self.l * self.n + self.n0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TscError::InvalidArgument(msg));
        if self.m < 1 || self.d < 1 || self.n < 1 {
            return bad(format!(
                "m, d and n must be positive (m={}, d={}, n={})",
                self.m, self.d, self.n
            ));
        }
        if self.l < 1 && self.n0 < 1 {
            return bad("need at least one subspace or one outlier".into());
        }
        if self.d > self.m {
            return bad(format!("d = {} exceeds m = {}", self.d, self.m));
        }
        if self.s >= self.m {
            return bad(format!("s = {} must be below m = {}", self.s, self.m));
        }
        if self.basis == BasisModel::CoordinateBlocks && self.l * self.d > self.m {
            return bad(format!(
                "coordinate blocks need L·d = {} <= m = {}",
                self.l * self.d,
                self.m
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticGroundTruth {
    /// One m×d basis per subspace.
    pub bases: Vec<DMatrix<f64>>,
    /// Coefficient vector per point (`None` for outliers).
    pub coefficients: Vec<Option<DVector<f64>>>,
    pub labels: Vec<Label>,
    /// Sorted erased coordinates per point.
    pub erasure_masks: Vec<Vec<usize>>,
    pub outlier_indices: Vec<usize>,
    /// Points before erasure and normalization.
    pub raw_points: DMatrix<f64>,
}

// stream purposes
const BASIS: u64 = 1;
const COEFF: u64 = 2;
const OUTLIERS: u64 = 3;
const ERASE: u64 = 4;
const SHUFFLE: u64 = 5;

/// Orthonormalized Gaussian m×d matrix with R's diagonal made positive, which
/// makes the result Haar distributed.
pub fn random_orthonormal_basis(m: usize, d: usize, stream: &mut SeedStream) -> DMatrix<f64> {
    assert!(d >= 1 && d <= m, "need 1 <= d <= m");
    let g = DMatrix::from_fn(m, d, |_, _| stream.standard_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

pub fn random_gaussian_basis(m: usize, d: usize, stream: &mut SeedStream) -> DMatrix<f64> {
    assert!(d >= 1 && d <= m, "need 1 <= d <= m");
    let sd = (1.0 / m as f64).sqrt();
    DMatrix::from_fn(m, d, |_, _| sd * stream.standard_normal())
}

pub fn coordinate_block_basis(m: usize, d: usize, block: usize) -> DMatrix<f64> {
    assert!(
        (block + 1) * d <= m,
        "block {block} of width {d} does not fit in R^{m}"
    );
    DMatrix::from_fn(m, d, |i, j| if i == block * d + j { 1.0 } else { 0.0 })
}

/// Zeroes `s` uniformly chosen coordinates of every point.
pub fn apply_erasures(
    data: &DataSet,
    s: usize,
    stream: &mut SeedStream,
) -> Result<(DataSet, Vec<Vec<usize>>)> {
    let (mut points, labels) = data.clone().into_parts();
    let masks = erase_in_place(&mut points, s, stream)?;
    Ok((DataSet::new(points, labels)?, masks))
}

fn erase_in_place(
    points: &mut DMatrix<f64>,
    s: usize,
    stream: &mut SeedStream,
) -> Result<Vec<Vec<usize>>> {
    let m = points.ncols();
    if s >= m {
        return Err(TscError::InvalidArgument(format!(
            "s = {s} must be below m = {m}"
        )));
    }
    let mut masks = Vec::with_capacity(points.nrows());
    for i in 0..points.nrows() {
        if s == 0 {
            masks.push(Vec::new());
            continue;
        }
        let mut idx = rand::seq::index::sample(stream, m, s).into_vec();
        idx.sort_unstable();
        for &k in &idx {
            points[(i, k)] = 0.0;
        }
        masks.push(idx);
    }
    Ok(masks)
}

pub fn generate_dataset(spec: &SyntheticSpec) -> Result<(DataSet, SyntheticGroundTruth)> {
    spec.validate()?;
    let SyntheticSpec { m, l, d, n, .. } = *spec;
    let total = spec.total_points();

    let bases: Vec<DMatrix<f64>> = (0..l)
        .map(|k| {
            let mut st = spec.seed.derive(&[BASIS, k as u64]).stream();
            match spec.basis {
                BasisModel::HaarOrthonormal => random_orthonormal_basis(m, d, &mut st),
                BasisModel::GaussianInvM => random_gaussian_basis(m, d, &mut st),
                BasisModel::CoordinateBlocks => coordinate_block_basis(m, d, k),
            }
        })
        .collect();

    let mut raw = DMatrix::zeros(total, m);
    let mut coefficients = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (k, u) in bases.iter().enumerate() {
        let mut st = spec.seed.derive(&[COEFF, k as u64]).stream();
        for j in 0..n {
            let a = match spec.coefficients {
                CoefficientModel::GaussianInvD => {
                    sample_gaussian_vector(d, 1.0 / d as f64, &mut st)
                }
                CoefficientModel::SphereUniform => sample_unit_sphere(d, &mut st),
            };
            raw.row_mut(k * n + j).copy_from(&(u * &a).transpose());
            coefficients.push(Some(a));
            labels.push(k as Label);
        }
    }
    let mut st = spec.seed.derive(&[OUTLIERS]).stream();
    for i in l * n..total {
        raw.row_mut(i)
            .copy_from(&sample_unit_sphere(m, &mut st).transpose());
        coefficients.push(None);
        labels.push(OUTLIER);
    }

    let mut points = raw.clone();
    let mut erasure_masks = erase_in_place(
        &mut points,
        spec.s,
        &mut spec.seed.derive(&[ERASE]).stream(),
    )?;

    for (i, mut row) in points.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm < 1e-12 {
            return Err(TscError::DegenerateErasure(i));
        }
        row /= norm;
    }

    if spec.shuffle {
        let mut perm: Vec<usize> = (0..total).collect();
        perm.shuffle(&mut spec.seed.derive(&[SHUFFLE]).stream());
        points = points.select_rows(perm.iter());
        raw = raw.select_rows(perm.iter());
        coefficients = perm.iter().map(|&p| coefficients[p].clone()).collect();
        labels = perm.iter().map(|&p| labels[p]).collect();
        erasure_masks = perm.iter().map(|&p| erasure_masks[p].clone()).collect();
    }
    let outlier_indices = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == OUTLIER)
        .map(|(i, _)| i)
        .collect();

    let data = DataSet::new(points, Some(labels.clone()))?;
    Ok((
        data,
        SyntheticGroundTruth {
            bases,
            coefficients,
            labels,
            erasure_masks,
            outlier_indices,
            raw_points: raw,
        },
    ))
}
