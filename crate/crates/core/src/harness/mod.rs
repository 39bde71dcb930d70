//! Seeded Monte Carlo runner: adversary x estimator x `(n, p, gamma)` grid.
//!
//! Every `(grid point, trial)` pair owns its random streams, derived from
//! the master seed and the coordinates `(n, p, gamma, trial)` with stage tags
//! `gen`, `adv` and `est:<name>`. Results therefore do not depend on the
//! worker count, and adding an estimator leaves the sampled graphs alone.

mod calibrate;
mod summary;
mod workflows;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate_constants, CalibrationArtifact, CalibrationConfig, PointEvidence};
pub use summary::{quantile_lower, summarize, theorem_band, Summary, SummaryRow, DEFAULT_BAND_C};
pub use workflows::{lb_demo, write_audit_csv, LbDemoConfig, LbDemoReport};

use crate::adversaries::Strategy;
use crate::error::{Error, Result};
use crate::estimate::{Estimator, EstimatorReport, EstimatorSettings, Trace};
use crate::graph::{directed_to_undirected, sample_directed_er, sample_er, AdjacencyMatrix, GraphParams};
use crate::rng::RandomStream;

/// Version line written before the CSV header.
pub const CSV_VERSION: &str = "# rer-csv v1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
}

impl GridPoint {
    fn coords(&self, trial: usize) -> [u64; 4] {
        [self.n as u64, self.p.to_bits(), self.gamma.to_bits(), trial as u64]
    }

    /// Stream for one stage of one trial.
    pub fn stream(&self, seed: u64, trial: usize, tag: &str) -> RandomStream {
        RandomStream::derive(seed, &self.coords(trial), tag)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: Vec<GridPoint>,
    pub adversary: Strategy,
    pub estimators: Vec<Estimator>,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker count; 0 uses all available cores.
    pub threads: usize,
    pub settings: EstimatorSettings,
    /// Keep full estimator reports on each row (memory heavy for large runs).
    pub keep_reports: bool,
}

impl ExperimentConfig {
    pub fn new(grid: Vec<GridPoint>, adversary: Strategy, estimators: Vec<Estimator>, trials: usize, seed: u64) -> Self {
        Self {
            grid,
            adversary,
            estimators,
            trials,
            master_seed: seed,
            threads: 0,
            settings: EstimatorSettings::default(),
            keep_reports: false,
        }
    }

    /// Cartesian product in `n`, then `p`, then `gamma` order.
    pub fn product(ns: &[usize], ps: &[f64], gammas: &[f64]) -> Vec<GridPoint> {
        let mut grid = Vec::with_capacity(ns.len() * ps.len() * gammas.len());
        for &n in ns {
            for &p in ps {
                for &gamma in gammas {
                    grid.push(GridPoint { n, p, gamma });
                }
            }
        }
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Parameter("empty parameter grid".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Parameter("no estimators selected".into()));
        }
        for pt in &self.grid {
            GraphParams::new(pt.n, pt.p).with_gamma(pt.gamma).validate()?;
        }
        if !(self.settings.eig_tol > 0.0 && self.settings.eig_tol <= 0.01) {
            return Err(Error::Parameter(format!(
                "eigenvector tolerance must lie in (0, 0.01], got {}",
                self.settings.eig_tol
            )));
        }
        Ok(())
    }
}

/// One estimator on one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub adversary: String,
    pub trial: usize,
    pub estimator: String,
    pub estimate: Option<f64>,
    pub abs_error: Option<f64>,
    /// `ok` or `error: <message>`.
    pub status: String,
    pub digest: String,
    #[serde(skip)]
    pub wall_seconds: f64,
    #[serde(skip)]
    pub report: Option<EstimatorReport>,
}

impl TrialResult {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Compact, deterministic summary of an estimator trace.
pub fn digest(report: &EstimatorReport) -> String {
    match &report.trace {
        None => "-".into(),
        Some(Trace::Prune {
            removed_high,
            removed_low,
            ..
        }) => format!("pruned={}+{}", removed_high.len(), removed_low.len()),
        Some(Trace::Trim(t)) => format!("s*={};sf={}", t.s_star.len(), t.s_final.len()),
        Some(Trace::Robust { spectral, trim }) => format!(
            "s*={};sf={};cand={};mv={}",
            trim.s_star.len(),
            trim.s_final.len(),
            spectral.candidates.len(),
            spectral.matvecs
        ),
        Some(Trace::Symmetric {
            primal,
            complement,
            used_complement,
        }) => {
            let chosen = match (used_complement, complement) {
                (true, Some(c)) => c,
                _ => primal,
            };
            let branch = if *used_complement { "complement" } else { "primal" };
            format!("branch={branch};{}", digest(chosen))
        }
        Some(Trace::Exhaustive(t)) => format!("best={};sets={}", t.best.len(), t.sets_checked),
    }
}

fn corrupted_graph(
    cfg: &ExperimentConfig,
    pt: &GridPoint,
    trial: usize,
) -> Result<(AdjacencyMatrix, usize)> {
    let params = GraphParams::new(pt.n, pt.p);
    let mut gen = pt.stream(cfg.master_seed, trial, "gen");
    let mut adv = pt.stream(cfg.master_seed, trial, "adv");
    if cfg.adversary.is_directed() {
        let dg = sample_directed_er(&params, &mut gen)?;
        let out = cfg.adversary.apply_directed(&dg, pt.p, pt.gamma, &mut adv)?;
        Ok((directed_to_undirected(&out.graph), out.record.corrupted.len()))
    } else {
        let g = sample_er(&params, &mut gen)?;
        let out = cfg.adversary.apply(&g, pt.p, pt.gamma, &mut adv)?;
        Ok((out.graph, out.record.corrupted.len()))
    }
}

fn run_trial(cfg: &ExperimentConfig, pt: &GridPoint, trial: usize) -> Vec<TrialResult> {
    let row = |estimator: &Estimator| TrialResult {
        n: pt.n,
        p: pt.p,
        gamma: pt.gamma,
        adversary: cfg.adversary.name().to_string(),
        trial,
        estimator: estimator.name().to_string(),
        estimate: None,
        abs_error: None,
        status: "ok".into(),
        digest: "-".into(),
        wall_seconds: 0.0,
        report: None,
    };
    let (graph, corrupted) = match corrupted_graph(cfg, pt, trial) {
        Ok(g) => g,
        Err(e) => {
            return cfg
                .estimators
                .iter()
                .map(|est| TrialResult {
                    status: format!("error: {e}"),
                    ..row(est)
                })
                .collect()
        }
    };
    cfg.estimators
        .iter()
        .map(|est| {
            let mut rng = pt.stream(cfg.master_seed, trial, &format!("est:{}", est.name()));
            let start = Instant::now();
            let outcome = est.run(&graph, pt.gamma, &cfg.settings, &mut rng);
            let wall_seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok(report) => TrialResult {
                    estimate: Some(report.estimate),
                    abs_error: Some(report.error(pt.p)),
                    digest: format!("b={corrupted};{}", digest(&report)),
                    wall_seconds,
                    report: cfg.keep_reports.then_some(report),
                    ..row(est)
                },
                Err(e) => TrialResult {
                    status: format!("error: {e}"),
                    wall_seconds,
                    ..row(est)
                },
            }
        })
        .collect()
}

/// Runs the whole grid. Rows come back ordered by grid point, trial and
/// estimator position; failures become `error` rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<Vec<TrialResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, t)| run_trial(cfg, &cfg.grid[g], t))
            .collect()
    });
    Ok(rows.into_iter().flatten().collect())
}

/// Writes the versioned CSV (without wall times).
pub fn write_results_csv<W: Write>(rows: &[TrialResult], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows as a JSON array (without wall times).
pub fn write_results_json<W: Write>(rows: &[TrialResult], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}

#[derive(Serialize)]
struct TimingRow<'a> {
    n: usize,
    p: f64,
    gamma: f64,
    trial: usize,
    estimator: &'a str,
    wall_seconds: f64,
}

/// Wall times live in their own file so the results file stays reproducible.
pub fn write_timing_csv<W: Write>(rows: &[TrialResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(TimingRow {
            n: r.n,
            p: r.p,
            gamma: r.gamma,
            trial: r.trial,
            estimator: &r.estimator,
            wall_seconds: r.wall_seconds,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Slope of `ln(median seconds)` against `ln n`.
pub fn scaling_exponent(rows: &[TrialResult], estimator: &str) -> Option<f64> {
    let mut ns: Vec<usize> = rows.iter().filter(|r| r.estimator == estimator).map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return None;
    }
    let points: Vec<(f64, f64)> = ns
        .iter()
        .filter_map(|&n| {
            let mut t: Vec<f64> = rows
                .iter()
                .filter(|r| r.estimator == estimator && r.n == n && r.is_ok())
                .map(|r| r.wall_seconds)
                .collect();
            let m = quantile_lower(&mut t, 0.5)?;
            (m > 0.0).then(|| ((n as f64).ln(), m.ln()))
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
