//! Command-line front end. `main.rs` only parses arguments and maps
//! [`Outcome`] to an exit code.

pub mod io;
pub mod report;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::barycentre::{solve, uniqueness_check, MeanKind, SolverConfig};
use crate::distances::{d2_unitary, distance, divergence, hellinger, DistanceKind};
use crate::linalg::SpdMatrix;
use crate::means::{arithmetic_mean, geometric_mean, geometric_mean_t, log_euclidean_multi, q_half, WeightVector};

use io::{read_probability, read_spd, read_weights, InputError, MatrixFile};
use report::RunReport;
use verify::{run_suite, Suite, VerifyOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "hellinger", version, about = "Matrix Hellinger distances, means and barycentres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance and squared divergence between two inputs.
    Dist {
        kind: DistArg,
        a: PathBuf,
        b: PathBuf,
        /// For d2, minimise over unitaries via an SVD instead of the fidelity.
        #[arg(long)]
        via_unitary: bool,
    },
    /// Matrix mean of the inputs.
    Mean {
        kind: MeanArg,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Barycentre by fixed-point iteration.
    Bary {
        kind: BaryArg,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
        /// Seed for the random starting points of `--restarts`.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also solve from this many random starts and report their spread.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
    },
    /// Run verification suites.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON array of positive weights (uniform when omitted).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    D1,
    D2,
    D3,
    D4,
    Hellinger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeanArg {
    Arith,
    Geo,
    GeoT,
    Logeuclid,
    Qhalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaryArg {
    Wasserstein,
    PowerT,
    LogeuclidType,
}

/// Report plus exit status.
pub struct Outcome {
    pub report: Option<RunReport>,
    pub code: u8,
    pub message: Option<String>,
}

impl Outcome {
    fn input_error(message: String) -> Self {
        Self {
            report: None,
            code: EXIT_INPUT,
            message: Some(message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Compute(#[from] crate::Error),
}

fn load_spd(paths: &[PathBuf]) -> Result<(Vec<SpdMatrix>, Vec<Vec<u8>>), InputError> {
    let mut mats = Vec::with_capacity(paths.len());
    let mut bytes = Vec::with_capacity(paths.len());
    for p in paths {
        let loaded = read_spd(p)?;
        mats.push(loaded.value);
        bytes.push(loaded.bytes);
    }
    Ok((mats, bytes))
}

fn load_weights(path: Option<&Path>, m: usize, bytes: &mut Vec<Vec<u8>>) -> Result<WeightVector, Failure> {
    match path {
        Some(p) => {
            let loaded = read_weights(p)?;
            bytes.push(loaded.bytes);
            Ok(loaded.value)
        }
        None => Ok(WeightVector::uniform(m)?),
    }
}

fn byte_refs(bytes: &[Vec<u8>]) -> Vec<&[u8]> {
    bytes.iter().map(Vec::as_slice).collect()
}

fn pair<'a>(mats: &'a [SpdMatrix], what: &str) -> Result<(&'a SpdMatrix, &'a SpdMatrix), Failure> {
    match mats {
        [a, b] => Ok((a, b)),
        _ => Err(Failure::Compute(crate::Error::InvalidParameter {
            name: "files",
            reason: format!("{what} takes exactly two matrices, got {}", mats.len()),
        })),
    }
}

fn cmd_dist(echo: Vec<String>, kind: DistArg, a: &Path, b: &Path, via_unitary: bool) -> Result<RunReport, Failure> {
    if kind == DistArg::Hellinger {
        let (p, q) = (read_probability(a)?, read_probability(b)?);
        let mut report = RunReport::new(echo, &[&p.bytes, &q.bytes]);
        let d = hellinger(&p.value, &q.value)?;
        report.scalar("distance", d);
        report.scalar("divergence", d * d);
        return Ok(report);
    }
    let (ma, mb) = (read_spd(a)?, read_spd(b)?);
    let mut report = RunReport::new(echo, &[&ma.bytes, &mb.bytes]);
    let dk = match kind {
        DistArg::D1 => DistanceKind::D1,
        DistArg::D2 => DistanceKind::D2,
        DistArg::D3 => DistanceKind::D3,
        DistArg::D4 => DistanceKind::D4,
        DistArg::Hellinger => unreachable!("handled above"),
    };
    if via_unitary {
        if dk != DistanceKind::D2 {
            return Err(Failure::Compute(crate::Error::InvalidParameter {
                name: "via-unitary",
                reason: "only applies to d2".into(),
            }));
        }
        let (d, u) = d2_unitary(&ma.value, &mb.value)?;
        report.scalar("distance", d);
        report.scalar("divergence", d * d);
        let n = u.nrows();
        report.value(
            "unitary",
            &serde_json::json!({
                "dim": n,
                "real": (0..n).map(|i| (0..n).map(|j| u[(i, j)].re).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "imag": (0..n).map(|i| (0..n).map(|j| u[(i, j)].im).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        );
    } else {
        report.scalar("distance", distance(dk, &ma.value, &mb.value)?);
        report.scalar("divergence", divergence(dk, &ma.value, &mb.value)?);
    }
    Ok(report)
}

fn cmd_mean(echo: Vec<String>, kind: MeanArg, files: &[PathBuf], common: &CommonArgs) -> Result<RunReport, Failure> {
    let (mats, mut bytes) = load_spd(files)?;
    let w = load_weights(common.weights.as_deref(), mats.len(), &mut bytes)?;
    let mean = match kind {
        MeanArg::Arith => arithmetic_mean(&mats, &w)?,
        MeanArg::Geo => {
            let (a, b) = pair(&mats, "geo")?;
            geometric_mean(a, b)?
        }
        MeanArg::GeoT => {
            let (a, b) = pair(&mats, "geo-t")?;
            geometric_mean_t(a, b, common.t)?
        }
        MeanArg::Logeuclid => log_euclidean_multi(&mats, &w)?,
        MeanArg::Qhalf => q_half(&mats, &w)?,
    };
    let mut report = RunReport::new(echo, &byte_refs(&bytes));
    report.value("mean", &MatrixFile::from_hermitian(mean.as_hermitian()));
    report.scalar("trace", mean.trace());
    Ok(report)
}

fn cmd_bary(
    echo: Vec<String>,
    kind: BaryArg,
    files: &[PathBuf],
    common: &CommonArgs,
    cfg: SolverConfig,
    seed: u64,
    restarts: usize,
) -> Result<RunReport, Failure> {
    let (mats, mut bytes) = load_spd(files)?;
    let w = load_weights(common.weights.as_deref(), mats.len(), &mut bytes)?;
    let mk = match kind {
        BaryArg::Wasserstein => MeanKind::Wasserstein,
        BaryArg::PowerT => MeanKind::power(common.t)?,
        BaryArg::LogeuclidType => MeanKind::LogEuclidType,
    };
    let (x, solver) = solve(mk, &mats, &w, &cfg)?;
    let mut report = RunReport::new(echo, &byte_refs(&bytes));
    report.value("barycentre", &MatrixFile::from_hermitian(x.as_hermitian()));
    report.scalar("trace", x.trace());
    if restarts > 0 {
        report.value("restarts", &uniqueness_check(mk, &mats, &w, &cfg, restarts, seed)?);
    }
    report.solver = Some(solver);
    Ok(report)
}

/// Execute a parsed command line. `echo` is recorded verbatim in the report.
pub fn run(cli: Cli, echo: Vec<String>) -> Outcome {
    let result = match &cli.command {
        Command::Dist { kind, a, b, via_unitary } => cmd_dist(echo, *kind, a, b, *via_unitary),
        Command::Mean { kind, files, common } => cmd_mean(echo, *kind, files, common),
        Command::Bary {
            kind,
            files,
            common,
            tol,
            max_iter,
            damping,
            seed,
            restarts,
        } => {
            let cfg = SolverConfig {
                tol: *tol,
                max_iter: *max_iter,
                damping: *damping,
            };
            cmd_bary(echo, *kind, files, common, cfg, *seed, *restarts)
        }
        Command::Verify { suite, seed, samples } => {
            let opts = VerifyOptions {
                seed: *seed,
                samples: *samples,
            };
            let mut report = RunReport::new(echo, &[]);
            match run_suite(*suite, &opts) {
                Ok(rows) => {
                    report.checks = rows;
                    report.value("suite", &suite.to_string());
                    report.value("passed", &report.all_passed());
                    Ok(report)
                }
                Err(e) => Err(Failure::Compute(e)),
            }
        }
    };
    match result {
        Ok(report) => {
            let code = if !report.all_passed() {
                EXIT_VERIFY_FAILED
            } else if report.solver.as_ref().is_some_and(|s| !s.converged) {
                EXIT_NOT_CONVERGED
            } else {
                EXIT_OK
            };
            Outcome {
                report: Some(report),
                code,
                message: None,
            }
        }
        Err(e) => Outcome::input_error(e.to_string()),
    }
}
