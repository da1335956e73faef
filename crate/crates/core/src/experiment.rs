//! Seeded Monte-Carlo harness.
//!
//! # Config format
//!
//! A flat text file of `key = value` lines. `#` starts a comment, blank lines
//! are ignored, lists are comma-separated, and every key may appear at most
//! once. Recognized keys (defaults depend on `experiment`):
//!
//! | key            | value                                                    |
//! |----------------|----------------------------------------------------------|
//! | `experiment`   | `vary_d_rho`, `erasures`, `outliers` or `single_run`     |
//! | `m`            | ambient dimension (a list for `outliers`)                |
//! | `L`            | number of subspaces, or `auto` (= 2m/d, `outliers` only) |
//! | `d`            | list of subspace dimensions                              |
//! | `rho`          | list of oversampling ratios; n = round(d·rho)            |
//! | `n`            | points per subspace for `outliers`, or `auto` (= 5d)     |
//! | `n0`           | outlier count for `outliers`, or `auto` (= L·n)          |
//! | `s`            | list of erasure counts                                   |
//! | `trials`       | trials per grid cell                                     |
//! | `coefficients` | `sphere_uniform` or `gaussian_inv_d`                     |
//! | `basis`        | `haar_orthonormal`, `gaussian_inv_m`, `coordinate_blocks`|
//! | `q`            | an integer, or `n_over_rho` for max(3, round(n/rho))     |
//! | `max_clusters` | eigengap search limit, or `auto` (= ⌊N/2⌋)               |
//! | `seed`         | master seed (u64)                                        |
//! | `shuffle`      | `true`/`false`: permute points within each trial         |
//!
//! # Outputs
//!
//! Grid experiments write `<prefix>.csv` with header
//! `axis1,axis2,trial,ce,fde,el,l_hat,sdp,max_aff` (axis1 = rho, axis2 = d)
//! and per-metric cell means `<prefix>_{ce,fde,el}.dat` as `x y value` lines.
//! The erasure experiment writes one such set per erasure count with prefix
//! `<prefix>_s<s>`. The outlier experiment writes `<prefix>.csv` with header
//! `m,trial,n_points,misclassified,rate,threshold` and `<prefix>_rate.dat`.
//! Numbers carry 6 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Result, TscError};
use crate::metrics;
use crate::outlier::detect_outliers;
use crate::random::Seed;
use crate::synth::{generate_dataset, BasisModel, CoefficientModel, SyntheticSpec};
use crate::threshold::{tsc_cluster, TscOptions};
use crate::OUTLIER;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    VaryDRho,
    Erasures,
    Outliers,
    SingleRun,
}

impl FromStr for ExperimentKind {
    type Err = TscError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vary_d_rho" => Ok(Self::VaryDRho),
            "erasures" => Ok(Self::Erasures),
            "outliers" => Ok(Self::Outliers),
            "single_run" => Ok(Self::SingleRun),
            _ => Err(TscError::InvalidArgument(format!(
                "unknown experiment `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRule {
    Explicit(usize),
    /// max(3, round(n / rho))
    NOverRho,
}

impl QRule {
    pub fn q(self, n: usize, rho: f64) -> usize {
        match self {
            QRule::Explicit(q) => q,
            QRule::NOverRho => ((n as f64 / rho).round() as usize).max(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub m: Vec<usize>,
    /// `None` means 2m/d.
    pub l: Option<usize>,
    pub d: Vec<usize>,
    pub rho: Vec<f64>,
    /// `None` means 5d.
    pub n: Option<usize>,
    /// `None` means L·n.
    pub n0: Option<usize>,
    pub s: Vec<usize>,
    pub trials: usize,
    pub coefficients: CoefficientModel,
    pub basis: BasisModel,
    pub q_rule: QRule,
    pub max_clusters: Option<usize>,
    pub seed: u64,
    pub shuffle: bool,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            m: vec![50],
            l: Some(15),
            d: vec![2, 4, 6, 8, 10],
            rho: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            n: None,
            n0: None,
            s: vec![0],
            trials: 10,
            coefficients: CoefficientModel::SphereUniform,
            basis: BasisModel::HaarOrthonormal,
            q_rule: QRule::NOverRho,
            max_clusters: None,
            seed: 1,
            shuffle: false,
        };
        match kind {
            ExperimentKind::VaryDRho => base,
            ExperimentKind::Erasures => Self {
                s: vec![0, 5, 10, 15],
                coefficients: CoefficientModel::GaussianInvD,
                ..base
            },
            ExperimentKind::Outliers => Self {
                m: vec![50, 100, 200],
                l: None,
                d: vec![5],
                ..base
            },
            ExperimentKind::SingleRun => Self {
                d: vec![5],
                rho: vec![5.0],
                trials: 1,
                ..base
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| perr(ln + 1, "expected `key = value`"))?;
            let key = k.trim().to_string();
            if entries
                .insert(key.clone(), (ln + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(perr(ln + 1, &format!("duplicate key `{key}`")));
            }
        }
        let kind = match entries.remove("experiment") {
            Some((ln, v)) => v.parse().map_err(|e: TscError| perr(ln, &e.to_string()))?,
            None => return Err(perr(0, "missing `experiment` key")),
        };
        let mut c = Self::defaults(kind);
        for (key, (ln, v)) in entries {
            let wrap = |e: String| perr(ln, &format!("{key}: {e}"));
            match key.as_str() {
                "m" => c.m = list(&v).map_err(wrap)?,
                "L" => c.l = auto_or(&v).map_err(wrap)?,
                "d" => c.d = list(&v).map_err(wrap)?,
                "rho" => c.rho = list(&v).map_err(wrap)?,
                "n" => c.n = auto_or(&v).map_err(wrap)?,
                "n0" => c.n0 = auto_or(&v).map_err(wrap)?,
                "s" => c.s = list(&v).map_err(wrap)?,
                "trials" => c.trials = scalar(&v).map_err(wrap)?,
                "coefficients" => {
                    c.coefficients = v.parse().map_err(|e: TscError| wrap(e.to_string()))?
                }
                "basis" => c.basis = v.parse().map_err(|e: TscError| wrap(e.to_string()))?,
                "q" => {
                    c.q_rule = if v == "n_over_rho" {
                        QRule::NOverRho
                    } else {
                        QRule::Explicit(scalar(&v).map_err(wrap)?)
                    }
                }
                "max_clusters" => c.max_clusters = auto_or(&v).map_err(wrap)?,
                "seed" => c.seed = scalar(&v).map_err(wrap)?,
                "shuffle" => c.shuffle = scalar(&v).map_err(wrap)?,
                _ => return Err(perr(ln, &format!("unknown key `{key}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TscError::InvalidArgument(format!("invalid config: {m}")));
        if self.m.is_empty() || self.d.is_empty() || self.rho.is_empty() || self.s.is_empty() {
            return bad("grids must be nonempty");
        }
        if self.trials < 1 {
            return bad("trials must be >= 1");
        }
        if self.rho.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
            return bad("rho values must be positive");
        }
        if self.kind != ExperimentKind::Outliers {
            if self.m.len() != 1 {
                return bad("`m` must be a single value for this experiment");
            }
            if self.l.is_none() {
                return bad("`L = auto` is only meaningful for the outlier experiment");
            }
        }
        if self.kind == ExperimentKind::SingleRun && (self.d.len() != 1 || self.rho.len() != 1) {
            return bad("single_run takes exactly one d and one rho");
        }
        if self.kind == ExperimentKind::Outliers && self.s != [0] {
            return bad("the outlier experiment does not support erasures");
        }
        if let QRule::Explicit(0) = self.q_rule {
            return bad("q must be positive");
        }
        for &m in &self.m {
            for &d in &self.d {
                if d < 1 || d > m {
                    return bad(&format!("d = {d} must lie in 1..={m}"));
                }
            }
            if self.s.iter().any(|&s| s >= m) {
                return bad("every s must be below m");
            }
        }
        Ok(())
    }
}

fn perr(line: usize, msg: &str) -> TscError {
    TscError::Parse {
        location: format!("config line {line}"),
        message: msg.to_string(),
    }
}

fn scalar<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.trim()
        .parse::<T>()
        .map_err(|_| format!("cannot parse `{v}`"))
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(scalar).collect()
}

fn auto_or<T: FromStr>(v: &str) -> std::result::Result<Option<T>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        scalar(v).map(Some)
    }
}

/// Formats like C's `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    /// rho
    pub axis1: f64,
    /// d
    pub axis2: f64,
    pub trial: usize,
    pub ce: f64,
    pub fde: f64,
    pub el: u8,
    pub l_hat: usize,
    pub sdp: bool,
    pub max_aff: f64,
}

/// One row per (cell, trial), sorted by cell then trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub s: usize,
    pub rows: Vec<GridRow>,
}

pub const GRID_HEADER: &str = "axis1,axis2,trial,ce,fde,el,l_hat,sdp,max_aff";

impl GridResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(GRID_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                fmt_g6(r.axis1),
                fmt_g6(r.axis2),
                r.trial,
                fmt_g6(r.ce),
                fmt_g6(r.fde),
                r.el,
                r.l_hat,
                u8::from(r.sdp),
                fmt_g6(r.max_aff)
            );
        }
        out
    }

    /// Per-cell means of one metric, in row order of first appearance.
    pub fn cell_means(&self, metric: impl Fn(&GridRow) -> f64) -> Vec<(f64, f64, f64)> {
        let mut cells: Vec<(f64, f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            match cells.iter_mut().find(|c| c.0 == r.axis1 && c.1 == r.axis2) {
                Some(c) => {
                    c.2 += metric(r);
                    c.3 += 1;
                }
                None => cells.push((r.axis1, r.axis2, metric(r), 1)),
            }
        }
        cells
            .into_iter()
            .map(|(x, y, s, k)| (x, y, s / k as f64))
            .collect()
    }
}

pub fn means_to_dat(means: &[(f64, f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y, v) in means {
        let _ = writeln!(out, "{} {} {}", fmt_g6(*x), fmt_g6(*y), fmt_g6(*v));
    }
    out
}

// purposes below the per-trial seed
const KMEANS: u64 = 0x6b6d;

fn trial_seed(master: u64, a1: usize, a2: usize, trial: usize) -> Seed {
    Seed(master).derive(&[a1 as u64, a2 as u64, trial as u64])
}

/// Points per subspace for a (d, rho) cell.
pub fn points_per_subspace(d: usize, rho: f64) -> usize {
    ((d as f64 * rho).round() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub metrics: metrics::MetricsReport,
    pub l_hat: usize,
    pub q: usize,
    pub n: usize,
}

/// Runs one clustering trial and scores it.
pub fn run_trial(
    config: &ExperimentConfig,
    d: usize,
    rho: f64,
    s: usize,
    seed: Seed,
) -> Result<TrialOutcome> {
    let l = config.l.unwrap_or(1);
    let n = points_per_subspace(d, rho);
    let spec = SyntheticSpec {
        m: config.m[0],
        l,
        d,
        n,
        coefficients: config.coefficients,
        basis: config.basis,
        s,
        n0: 0,
        seed,
        shuffle: config.shuffle,
    };
    let (data, gt) = generate_dataset(&spec)?;
    let q = config.q_rule.q(n, rho);
    let mut options = TscOptions::default().with_seed(seed.derive(&[KMEANS]));
    options.max_clusters = config.max_clusters;
    let result = tsc_cluster(&data, q, &options)?;
    let metrics = metrics::evaluate(&result, &gt.labels, l, q, &gt.bases)?;
    Ok(TrialOutcome {
        metrics,
        l_hat: result.l_hat,
        q,
        n,
    })
}

/// Runs every grid cell and trial; one result per erasure count.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<GridResult>> {
    config.validate()?;
    if config.kind == ExperimentKind::Outliers {
        return Err(TscError::InvalidArgument(
            "outlier experiment has no (rho, d) grid".into(),
        ));
    }
    let mut jobs = Vec::new();
    for (si, &s) in config.s.iter().enumerate() {
        for (ri, &rho) in config.rho.iter().enumerate() {
            for (di, &d) in config.d.iter().enumerate() {
                for t in 0..config.trials {
                    jobs.push((si, s, ri, rho, di, d, t));
                }
            }
        }
    }
    let rows: Vec<(usize, GridRow)> = jobs
        .par_iter()
        .map(|&(si, s, ri, rho, di, d, t)| {
            let out = run_trial(config, d, rho, s, trial_seed(config.seed, ri, di, t))?;
            let rep = out.metrics;
            Ok((
                si,
                GridRow {
                    axis1: rho,
                    axis2: d as f64,
                    trial: t,
                    ce: rep.ce,
                    fde: rep.fde,
                    el: rep.el,
                    l_hat: out.l_hat,
                    sdp: rep.detection_property_holds,
                    max_aff: rep.max_aff,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<GridResult> = config
        .s
        .iter()
        .map(|&s| GridResult {
            s,
            rows: Vec::new(),
        })
        .collect();
    for (si, row) in rows {
        out[si].rows.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRow {
    pub m: usize,
    pub d: usize,
    pub trial: usize,
    pub n_points: usize,
    pub misclassified: usize,
    pub threshold: f64,
}

impl OutlierRow {
    pub fn rate(&self) -> f64 {
        self.misclassified as f64 / self.n_points as f64
    }
}

pub const OUTLIER_HEADER: &str = "m,trial,n_points,misclassified,rate,threshold";

/// One outlier-detection trial at ambient dimension `m`.
pub fn run_outlier_trial(config: &ExperimentConfig, m: usize, seed: Seed) -> Result<OutlierRow> {
    let d = config.d[0];
    let l = config.l.unwrap_or(2 * m / d).max(1);
    let n = config.n.unwrap_or(5 * d);
    let n0 = config.n0.unwrap_or(l * n);
    let spec = SyntheticSpec {
        m,
        l,
        d,
        n,
        coefficients: config.coefficients,
        basis: config.basis,
        s: 0,
        n0,
        seed,
        shuffle: config.shuffle,
    };
    let (data, gt) = generate_dataset(&spec)?;
    let report = detect_outliers(&data)?;
    let misclassified = report
        .flags
        .iter()
        .zip(&gt.labels)
        .filter(|(&flag, &label)| flag != (label == OUTLIER))
        .count();
    Ok(OutlierRow {
        m,
        d,
        trial: 0,
        n_points: data.len(),
        misclassified,
        threshold: report.threshold,
    })
}

pub fn run_outlier_experiment(config: &ExperimentConfig) -> Result<Vec<OutlierRow>> {
    config.validate()?;
    let jobs: Vec<(usize, usize, usize)> = config
        .m
        .iter()
        .enumerate()
        .flat_map(|(mi, &m)| (0..config.trials).map(move |t| (mi, m, t)))
        .collect();
    jobs.par_iter()
        .map(|&(mi, m, t)| {
            let mut row = run_outlier_trial(config, m, trial_seed(config.seed, mi, 0, t))?;
            row.trial = t;
            Ok(row)
        })
        .collect()
}

pub fn outlier_rows_to_csv(rows: &[OutlierRow]) -> String {
    let mut out = String::from(OUTLIER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.m,
            r.trial,
            r.n_points,
            r.misclassified,
            fmt_g6(r.rate()),
            fmt_g6(r.threshold)
        );
    }
    out
}

/// Mean misclassification rate per ambient dimension, as `(m, d, rate)`.
pub fn outlier_means(rows: &[OutlierRow]) -> Vec<(f64, f64, f64)> {
    let mut cells: Vec<(usize, usize, f64, usize)> = Vec::new();
    for r in rows {
        match cells.iter_mut().find(|c| c.0 == r.m) {
            Some(c) => {
                c.2 += r.rate();
                c.3 += 1;
            }
            None => cells.push((r.m, r.d, r.rate(), 1)),
        }
    }
    cells
        .into_iter()
        .map(|(m, d, s, k)| (m as f64, d as f64, s / k as f64))
        .collect()
}

/// File name suffixes and contents produced by an experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    if config.kind == ExperimentKind::Outliers {
        let rows = run_outlier_experiment(config)?;
        files.push((".csv".to_string(), outlier_rows_to_csv(&rows)));
        files.push(("_rate.dat".to_string(), means_to_dat(&outlier_means(&rows))));
        return Ok(files);
    }
    let per_s = config.kind == ExperimentKind::Erasures;
    for grid in run_grid(config)? {
        let tag = if per_s {
            format!("_s{}", grid.s)
        } else {
            String::new()
        };
        files.push((format!("{tag}.csv"), grid.to_csv()));
        files.push((
            format!("{tag}_ce.dat"),
            means_to_dat(&grid.cell_means(|r| r.ce)),
        ));
        files.push((
            format!("{tag}_fde.dat"),
            means_to_dat(&grid.cell_means(|r| r.fde)),
        ));
        files.push((
            format!("{tag}_el.dat"),
            means_to_dat(&grid.cell_means(|r| f64::from(r.el))),
        ));
    }
    Ok(files)
}

/// Writes each output next to `prefix` and returns the paths.
pub fn write_outputs(prefix: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    if let Some(parent) = prefix.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut paths = Vec::new();
    for (suffix, content) in files {
        let mut name = prefix.as_os_str().to_owned();
        name.push(suffix);
        let path = PathBuf::from(name);
        fs::write(&path, content)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_formatting() {
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(1.0), "1");
        assert_eq!(fmt_g6(0.25), "0.25");
        assert_eq!(fmt_g6(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_g6(123456.0), "123456");
        assert_eq!(fmt_g6(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g6(0.00015), "0.00015");
        assert_eq!(fmt_g6(2.5e-5), "2.5e-05");
        assert_eq!(fmt_g6(-2.0 / 3.0), "-0.666667");
        assert_eq!(fmt_g6(9.9999996), "10");
    }

    #[test]
    fn parses_config() {
        let c = ExperimentConfig::parse(
            "# fig 1\nexperiment = vary_d_rho\nd = 2, 3\nrho = 4,6.5  # comment\ntrials = 2\nq = 7\nmax_clusters = auto\nshuffle = true\n",
        )
        .unwrap();
        assert_eq!(c.kind, ExperimentKind::VaryDRho);
        assert_eq!(c.d, vec![2, 3]);
        assert_eq!(c.rho, vec![4.0, 6.5]);
        assert_eq!(c.trials, 2);
        assert_eq!(c.q_rule, QRule::Explicit(7));
        assert_eq!(c.m, vec![50]);
        assert_eq!(c.l, Some(15));
        assert!(c.shuffle);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::parse("d = 1").is_err());
        assert!(ExperimentConfig::parse("experiment = nope").is_err());
        assert!(ExperimentConfig::parse("experiment = vary_d_rho\nfoo = 1").is_err());
        assert!(ExperimentConfig::parse("experiment = vary_d_rho\nd = 1\nd = 2").is_err());
        assert!(ExperimentConfig::parse("experiment = vary_d_rho\nd = 60").is_err());
        assert!(ExperimentConfig::parse("experiment = vary_d_rho\ntrials = 0").is_err());
        assert!(ExperimentConfig::parse("experiment = vary_d_rho\nrho =").is_err());
        assert!(ExperimentConfig::parse("experiment = outliers\ns = 3").is_err());
    }

    #[test]
    fn q_rule() {
        assert_eq!(QRule::NOverRho.q(20, 4.0), 5);
        assert_eq!(QRule::NOverRho.q(4, 4.0), 3);
        assert_eq!(QRule::Explicit(9).q(20, 4.0), 9);
    }

    #[test]
    fn tiny_grid_shape_and_means() {
        let mut c = ExperimentConfig::defaults(ExperimentKind::VaryDRho);
        c.l = Some(3);
        c.d = vec![2, 3];
        c.rho = vec![4.0];
        c.trials = 2;
        let grids = run_grid(&c).unwrap();
        assert_eq!(grids.len(), 1);
        let g = &grids[0];
        assert_eq!(g.rows.len(), 4);
        let means = g.cell_means(|r| r.ce);
        assert_eq!(means.len(), 2);
        for (x, y, v) in means {
            let rows: Vec<_> = g
                .rows
                .iter()
                .filter(|r| r.axis1 == x && r.axis2 == y)
                .collect();
            let want = rows.iter().map(|r| r.ce).sum::<f64>() / rows.len() as f64;
            assert_eq!(v, want);
        }
        assert_eq!(g.to_csv().lines().count(), 5);
    }
}
