use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use robust_er::adversaries::Strategy;
use robust_er::estimate::{Estimator, EstimatorSettings};
use robust_er::graph::{
    read_graph_file, sample_directed_er, sample_er, to_text, GraphFile, GraphFormat, GraphParams,
};
use robust_er::harness::{
    calibrate_constants, lb_demo, run_experiment, summarize, write_audit_csv, write_results_csv,
    write_results_json, write_timing_csv, CalibrationConfig, ExperimentConfig, LbDemoConfig, DEFAULT_BAND_C,
};
use robust_er::regularity::concentration_audit;
use robust_er::rng::RandomStream;
use robust_er::Error;

#[derive(Parser)]
#[command(name = "rer", version, about = "Robust edge-density estimation for corrupted random graphs")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p) (or DG(n, p) with --directed) and write it as text.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        directed: bool,
    },
    /// Corrupt a graph file with a named adversary.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        adversary: Strategy,
        #[arg(long)]
        gamma: f64,
        /// True edge probability (used by degree-rewire).
        #[arg(long)]
        p: f64,
        /// Where to write the corruption record (JSON).
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Run estimators on a graph file.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "spectral-sym")]
        estimator: Vec<Estimator>,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Monte Carlo sweep over an (n, p, gamma) grid.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        gamma: Vec<f64>,
        #[arg(long, default_value = "none")]
        adversary: Strategy,
        #[arg(long, value_delimiter = ',', default_value = "mean,median,spectral-sym")]
        estimator: Vec<Estimator>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        tuning: Tuning,
        /// Wall-time CSV (defaults to `<out>.timing.csv` when --out is set).
        #[arg(long)]
        timing: Option<PathBuf>,
        /// Per-group summary CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Constant of the error band in the summary.
        #[arg(long, default_value_t = DEFAULT_BAND_C)]
        band_c: f64,
    },
    /// Block-sum concentration audit on uncorrupted G(n, p).
    RegularityAudit {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.25,0.5")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Degree coupling and two-sample chi-square indistinguishability demo.
    LbDemo {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Calibrate the rate constants on uncorrupted graphs.
    Calibrate {
        #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.5,0.95")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
    },
}

#[derive(Args)]
struct Tuning {
    /// Outer repeats of the spectral filter.
    #[arg(long)]
    repeats: Option<usize>,
    /// Eigenvector tolerance.
    #[arg(long, default_value_t = 0.01)]
    eig_tol: f64,
}

impl Tuning {
    fn settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            repeats: self.repeats,
            eig_tol: self.eig_tol,
        }
    }
}

enum Outcome {
    Done,
    Partial(usize),
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Error> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EstimateRow {
    estimator: String,
    estimate: f64,
    unclamped: f64,
    digest: String,
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen { n, p, directed } => {
            let params = GraphParams::new(n, p).with_seed(cli.seed);
            let mut rng = RandomStream::derive(cli.seed, &[], "gen");
            let g = if directed {
                GraphFile::Directed(sample_directed_er(&params, &mut rng)?)
            } else {
                GraphFile::Undirected(sample_er(&params, &mut rng)?)
            };
            write_graph_out(&g, out)?;
        }
        Command::Corrupt {
            input,
            adversary,
            gamma,
            p,
            record,
        } => {
            let mut rng = RandomStream::derive(cli.seed, &[], "adv");
            let (graph, rec) = match read_graph_file(&input)? {
                GraphFile::Undirected(a) => {
                    let o = adversary.apply(&a, p, gamma, &mut rng)?;
                    (GraphFile::Undirected(o.graph), o.record)
                }
                GraphFile::Directed(d) => {
                    let o = adversary.apply_directed(&d, p, gamma, &mut rng)?;
                    (GraphFile::Directed(o.graph), o.record)
                }
            };
            write_graph_out(&graph, out)?;
            if let Some(path) = record {
                write_json(&rec, Some(&path))?;
            }
        }
        Command::Estimate {
            input,
            estimator,
            gamma,
            tuning,
        } => {
            let a = match read_graph_file(&input)? {
                GraphFile::Undirected(a) => a,
                GraphFile::Directed(d) => robust_er::graph::directed_to_undirected(&d),
            };
            let settings = tuning.settings();
            let mut rows = Vec::new();
            for est in estimator {
                let mut rng = RandomStream::derive(cli.seed, &[], &format!("est:{}", est.name()));
                let r = est.run(&a, gamma, &settings, &mut rng)?;
                rows.push(EstimateRow {
                    estimator: est.name().into(),
                    estimate: r.estimate,
                    unclamped: r.unclamped,
                    digest: robust_er::harness::digest(&r),
                });
            }
            match cli.format {
                Format::Json => write_json(&rows, out)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(output(out)?);
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Bench {
            n,
            p,
            gamma,
            adversary,
            estimator,
            trials,
            tuning,
            timing,
            summary,
            band_c,
        } => {
            let mut cfg = ExperimentConfig::new(
                ExperimentConfig::product(&n, &p, &gamma),
                adversary,
                estimator,
                trials,
                cli.seed,
            );
            cfg.threads = cli.threads;
            cfg.settings = tuning.settings();
            let rows = run_experiment(&cfg)?;
            let mut w = output(out)?;
            match cli.format {
                Format::Csv => write_results_csv(&rows, &mut w)?,
                Format::Json => write_results_json(&rows, &mut w)?,
            }
            w.flush()?;
            let timing = timing.or_else(|| out.map(|o| o.with_extension("timing.csv")));
            if let Some(path) = timing {
                write_timing_csv(&rows, File::create(path)?)?;
            }
            let s = summarize(&rows, band_c);
            for warning in &s.warnings {
                eprintln!("warning: {warning}");
            }
            if let Some(path) = summary {
                let mut w = csv::Writer::from_path(path)?;
                for r in &s.rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                return Ok(Outcome::Partial(failed));
            }
        }
        Command::RegularityAudit { n, p, alpha, trials } => {
            let mut rows = Vec::new();
            for (i, &pi) in p.iter().enumerate() {
                let rng = RandomStream::derive(cli.seed, &[n as u64, i as u64], "regularity-audit");
                rows.extend(concentration_audit(n, pi, &alpha, trials, &rng)?);
            }
            match cli.format {
                Format::Csv => {
                    let mut w = output(out)?;
                    write_audit_csv(&rows, &mut w)?;
                    w.flush()?;
                }
                Format::Json => write_json(&rows, out)?,
            }
            let violations = rows.iter().filter(|r| !r.holds).count();
            eprintln!("{violations} of {} rows exceed the bound", rows.len());
        }
        Command::LbDemo {
            n,
            p,
            gamma,
            trials,
            samples,
        } => {
            let report = lb_demo(&LbDemoConfig {
                n,
                p,
                gamma,
                runs: trials,
                samples_per_side: samples,
                seed: cli.seed,
                ..LbDemoConfig::default()
            })?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    report.write_pmfs_csv(File::create(dir.join("coupling.csv"))?)?;
                    write_json(&report.tests, Some(&dir.join("chi_square.json")))?;
                }
                None => write_json(&report, None)?,
            }
            eprintln!(
                "non-rejection rate at {}: {}",
                report.config.significance, report.non_reject_rate
            );
        }
        Command::Calibrate { n, p, trials, starts } => {
            let cfg = CalibrationConfig {
                ns: n,
                ps: p,
                trials,
                seed: cli.seed,
                starts,
                threads: cli.threads,
                ..CalibrationConfig::default()
            };
            let art = calibrate_constants(&cfg)?;
            write_json(&art, out)?;
            eprintln!("c = {}, c1 = {}", art.constants.c_eta, art.constants.c_kappa);
        }
    }
    Ok(Outcome::Done)
}

fn write_graph_out(g: &GraphFile, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => robust_er::graph::write_graph_file(g, path, GraphFormat::from(path)),
        None => {
            let mut w = output(None)?;
            w.write_all(to_text(g).as_bytes())?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(failed)) => {
            eprintln!("{failed} rows failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
