//! Command-line front end for the `tsc` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::data::{read_dataset, write_labels, write_points_csv};
use crate::error::Result;
use crate::experiment::{fmt_g6, run_experiment, write_outputs, ExperimentConfig};
use crate::outlier::{cluster_with_outliers, detect_outliers};
use crate::random::Seed;
use crate::synth::{generate_dataset, BasisModel, CoefficientModel, SyntheticSpec};
use crate::threshold::{tsc_cluster, TscOptions};

#[derive(Debug, Parser)]
#[command(
    name = "tsc",
    version,
    about = "Thresholding-based subspace clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a CSV dataset and write one label per line.
    Cluster {
        dataset: PathBuf,
        /// Neighbors kept per point.
        #[arg(long)]
        q: usize,
        /// Fix the number of clusters instead of estimating it.
        #[arg(long)]
        l: Option<usize>,
        /// Largest cluster count the eigengap search considers (default ⌊N/2⌋).
        #[arg(long)]
        max_clusters: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Remove detected outliers first; they are labeled -1.
        #[arg(long)]
        remove_outliers: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flag outliers (1) and inliers (0), one per line.
    Outliers {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output prefix; files are written as <out>.csv, <out>_ce.dat, ...
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic union-of-subspaces dataset.
    Generate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        d: usize,
        /// Points per subspace.
        #[arg(long)]
        n: usize,
        /// Erasures per point.
        #[arg(long, default_value_t = 0)]
        s: usize,
        /// Number of outliers.
        #[arg(long, default_value_t = 0)]
        n0: usize,
        #[arg(long, default_value = "sphere_uniform")]
        coefficients: CoefficientModel,
        #[arg(long, default_value = "haar_orthonormal")]
        basis: BasisModel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        shuffle: bool,
        /// Output prefix for .csv, .labels, .masks and .manifest files.
        #[arg(long)]
        out: PathBuf,
    },
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(ext);
    PathBuf::from(name)
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Cluster {
            dataset,
            q,
            l,
            max_clusters,
            seed,
            remove_outliers,
            out,
        } => {
            let data = read_dataset(&dataset, None)?;
            let options = TscOptions {
                l_hat: l,
                max_clusters,
                seed: Seed(seed),
                ..TscOptions::default()
            };
            let result = if remove_outliers {
                cluster_with_outliers(&data, q, &options)?
            } else {
                tsc_cluster(&data, q, &options)?
            };
            write_labels(&out, &result.labels)?;
            writeln!(stdout, "L_hat = {}", result.l_hat)?;
            let smallest: Vec<String> = result
                .spectrum
                .eigenvalues
                .iter()
                .take(10)
                .map(|&v| fmt_g6(v))
                .collect();
            writeln!(stdout, "smallest eigenvalues: {}", smallest.join(" "))?;
            if let Some(rep) = &result.outliers {
                writeln!(
                    stdout,
                    "outliers = {} (threshold {})",
                    rep.count(),
                    fmt_g6(rep.threshold)
                )?;
            }
        }
        Command::Outliers { dataset, out } => {
            let data = crate::data::normalize_rows(&read_dataset(&dataset, None)?)?;
            let report = detect_outliers(&data)?;
            let body: String = report
                .flags
                .iter()
                .map(|&f| if f { "1\n" } else { "0\n" })
                .collect();
            fs::write(&out, body)?;
            writeln!(stdout, "threshold = {}", fmt_g6(report.threshold))?;
            writeln!(stdout, "outliers = {}", report.count())?;
        }
        Command::Experiment { config, out } => {
            let config = ExperimentConfig::parse(&fs::read_to_string(&config)?)?;
            let files = run_experiment(&config)?;
            for path in write_outputs(&out, &files)? {
                writeln!(stdout, "wrote {}", path.display())?;
            }
        }
        Command::Generate {
            m,
            l,
            d,
            n,
            s,
            n0,
            coefficients,
            basis,
            seed,
            shuffle,
            out,
        } => {
            let spec = SyntheticSpec {
                m,
                l,
                d,
                n,
                coefficients,
                basis,
                s,
                n0,
                seed: Seed(seed),
                shuffle,
            };
            let (data, gt) = generate_dataset(&spec)?;
            write_points_csv(&with_ext(&out, ".csv"), data.points())?;
            write_labels(&with_ext(&out, ".labels"), &gt.labels)?;
            let masks: String = gt
                .erasure_masks
                .iter()
                .map(|m| {
                    let idx: Vec<String> = m.iter().map(usize::to_string).collect();
                    idx.join(",") + "\n"
                })
                .collect();
            fs::write(with_ext(&out, ".masks"), masks)?;
            let manifest = format!(
                "m = {m}\nL = {l}\nd = {d}\nn = {n}\ns = {s}\nN0 = {n0}\ncoefficients = {coefficients}\nbasis = {basis}\nseed = {seed}\nshuffle = {shuffle}\n"
            );
            fs::write(with_ext(&out, ".manifest"), manifest)?;
            writeln!(
                stdout,
                "wrote {} points to {}",
                data.len(),
                with_ext(&out, ".csv").display()
            )?;
        }
    }
    Ok(())
}
