//! Dataset container and the plain-text file formats.
//!
//! Points are stored one per row. On disk a dataset is a headerless CSV with
//! one point per line; labels live in a companion file with one integer per
//! line, `-1` marking an outlier.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Result, TscError};

pub type Label = i32;

/// Label value reserved for outliers.
pub const OUTLIER: Label = -1;

const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: DMatrix<f64>,
    labels: Option<Vec<Label>>,
}

impl DataSet {
    pub fn new(points: DMatrix<f64>, labels: Option<Vec<Label>>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(TscError::InvalidData(format!(
                "need N >= 1 and m >= 1, got {}x{}",
                points.nrows(),
                points.ncols()
            )));
        }
        if let Some((idx, _)) = points.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(TscError::InvalidData(format!(
                "non-finite entry in row {}",
                idx % points.nrows()
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != points.nrows() {
                return Err(TscError::LengthMismatch {
                    left: points.nrows(),
                    right: labels.len(),
                });
            }
            if let Some(bad) = labels.iter().find(|&&l| l < OUTLIER) {
                return Err(TscError::InvalidData(format!("label {bad} is not >= -1")));
            }
        }
        Ok(Self { points, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<Label>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != m) {
            return Err(TscError::InvalidData(format!(
                "row {r} has {} columns, expected {m}",
                rows[r].len()
            )));
        }
        Self::new(DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]), labels)
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Option<Vec<Label>>) {
        (self.points, self.labels)
    }

    /// Number of points N.
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// Ambient dimension m.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn with_labels(mut self, labels: Option<Vec<Label>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.len() {
                return Err(TscError::LengthMismatch {
                    left: self.len(),
                    right: l.len(),
                });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let points = self.points.select_rows(rows.iter());
        let labels = self
            .labels
            .as_ref()
            .map(|l| rows.iter().map(|&r| l[r]).collect());
        Self::new(points, labels)
    }

    /// Largest deviation of a row norm from 1.
    pub(crate) fn unit_norm_deviation(&self) -> f64 {
        self.points
            .row_iter()
            .map(|r| (r.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn require_unit_rows(&self) -> Result<()> {
        let dev = self.unit_norm_deviation();
        if dev > 1e-8 {
            return Err(TscError::InvalidData(format!(
                "rows must have unit norm (max deviation {dev:e}); normalize first"
            )));
        }
        Ok(())
    }

    /// The N×N Gram matrix of the points.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.points * self.points.transpose()
    }
}

/// Scales every row to unit Euclidean norm.
pub fn normalize_rows(data: &DataSet) -> Result<DataSet> {
    let mut points = data.points.clone();
    for (i, mut row) in points.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm < ZERO_NORM {
            return Err(TscError::ZeroPoint { row: i, norm });
        }
        row /= norm;
    }
    Ok(DataSet {
        points,
        labels: data.labels.clone(),
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> TscError {
    TscError::Parse {
        location: format!("{}:{}", path.display(), line),
        message: message.into(),
    }
}

/// Reads a headerless CSV of points. Blank lines are skipped.
pub fn read_points_csv(path: &Path) -> Result<DataSet> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(path, ln + 1, e.to_string()))?;
        if let Some(first) = rows.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    ln + 1,
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "no data points"));
    }
    DataSet::from_rows(&rows, None)
}

pub fn read_labels(path: &Path) -> Result<Vec<Label>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(ln, l)| {
            l.trim()
                .parse::<Label>()
                .map_err(|e| parse_err(path, ln + 1, e.to_string()))
        })
        .collect()
}

/// Loads a dataset and, if given, its companion labels file.
pub fn read_dataset(points: &Path, labels: Option<&Path>) -> Result<DataSet> {
    let data = read_points_csv(points)?;
    match labels {
        Some(p) => data.with_labels(Some(read_labels(p)?)),
        None => Ok(data),
    }
}

pub fn points_to_csv(points: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in points.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_points_csv(path: &Path, points: &DMatrix<f64>) -> Result<()> {
    fs::write(path, points_to_csv(points))?;
    Ok(())
}

pub fn write_labels(path: &Path, labels: &[Label]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for l in labels {
        writeln!(f, "{l}")?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{sample_gaussian_vector, Seed};

    #[test]
    fn scales_three_four() {
        let d = DataSet::from_rows(&[vec![3.0, 4.0]], None).unwrap();
        let n = normalize_rows(&d).unwrap();
        assert!((n.points()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((n.points()[(0, 1)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn unit_rows_are_unchanged_and_labels_pass_through() {
        let d = DataSet::from_rows(
            &[vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8]],
            Some(vec![0, -1]),
        )
        .unwrap();
        let n = normalize_rows(&d).unwrap();
        assert_eq!(n, d);
    }

    #[test]
    fn random_rows_become_unit_and_idempotent() {
        let mut s = Seed(9).stream();
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                sample_gaussian_vector(4, 2.0, &mut s)
                    .iter()
                    .copied()
                    .collect()
            })
            .collect();
        let n = normalize_rows(&DataSet::from_rows(&rows, None).unwrap()).unwrap();
        for r in n.points().row_iter() {
            assert!((r.norm() - 1.0).abs() < 1e-12);
        }
        let twice = normalize_rows(&n).unwrap();
        for (a, b) in twice.points().iter().zip(n.points().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_row_is_rejected() {
        let d = DataSet::from_rows(&[vec![1.0, 1.0], vec![0.0, 1e-13]], None).unwrap();
        assert!(matches!(
            normalize_rows(&d),
            Err(TscError::ZeroPoint { row: 1, .. })
        ));
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(DataSet::from_rows(&[vec![f64::NAN]], None).is_err());
        assert!(DataSet::new(DMatrix::zeros(0, 3), None).is_err());
        assert!(DataSet::from_rows(&[vec![1.0]], Some(vec![0, 1])).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let pts = DMatrix::from_row_slice(2, 3, &[0.1, -2.5e-7, 3.0, 1.0 / 3.0, 0.0, -1.0]);
        write_points_csv(&p, &pts).unwrap();
        let back = read_points_csv(&p).unwrap();
        assert_eq!(back.points(), &pts);

        let lp = dir.path().join("x.labels");
        write_labels(&lp, &[0, 1, -1]).unwrap();
        assert_eq!(read_labels(&lp).unwrap(), vec![0, 1, -1]);
    }

    #[test]
    fn ragged_csv_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_points_csv(&p), Err(TscError::Parse { .. })));
        fs::write(&p, "1,abc\n").unwrap();
        assert!(matches!(read_points_csv(&p), Err(TscError::Parse { .. })));
    }
}
