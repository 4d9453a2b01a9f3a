//! `relchange`: tests for relevant deviations of a smoothly varying mean.
//!
//! Exit status: 0 when the null hypothesis is kept, 3 when it is rejected,
//! 1 on any error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use relchange::kernels::KernelSpec;
use relchange::pipeline::{load_config_file, run_pipeline, write_plot_csv, Report, RunConfig};
use relchange::simharness::{run_table, run_table_row, write_table_csv, Panel, Table, TABLE_SIZES};
use relchange::smoothing::{cv_bandwidth_with, CvOptions};

const EXIT_REJECT: u8 = 3;

#[derive(Parser)]
#[command(name = "relchange", version, about = "Tests for relevant deviations of a smoothly varying mean")]
struct Cli {
    /// key = value configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether the mean deviates from the benchmark by more than delta.
    Test(RunArgs),
    /// Simultaneous confidence band for the mean, written as CSV.
    Band(RunArgs),
    /// Estimate the first time the deviation becomes relevant.
    FirstChange(RunArgs),
    /// Cross-validated bandwidth and the full score trace.
    CvBandwidth(RunArgs),
    /// Monte Carlo rejection rates for one panel of the simulation tables.
    Simulate(SimulateArgs),
}

/// Flags mirroring the configuration keys. Values are parsed by the same
/// code that reads configuration files.
#[derive(Args, Default)]
struct RunArgs {
    /// CSV file with one observation per row (last column is used).
    input: Option<PathBuf>,
    /// Simulated input instead of a file: mu1:<a>, mu2, mu2-smooth or constant:<c>.
    #[arg(long)]
    scenario: Option<String>,
    /// Error process of the simulated input: iid, ma or ar.
    #[arg(long)]
    errors: Option<String>,
    /// Length of the simulated input.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    noise_scale: Option<String>,
    /// quartic or epanechnikov.
    #[arg(long)]
    kernel: Option<String>,
    /// initial, partial-mean:<x>, full-mean or constant:<c>.
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// auto (cross-validation) or a fixed value in (0, 1/2].
    #[arg(long)]
    bandwidth: Option<String>,
    /// band, simple, extremal or simulated.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    locally_stationary: bool,
    #[arg(long)]
    x0: Option<String>,
    #[arg(long)]
    x1: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    quantile_reps: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    /// random, contiguous, blocked or blocked:<len>.
    #[arg(long)]
    fold_scheme: Option<String>,
    #[arg(long)]
    block_length: Option<String>,
    #[arg(long)]
    margin_factor: Option<String>,
    #[arg(long)]
    grid_refine: Option<String>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write the band CSV (t, mu_tilde, lower, upper) here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Calendar label of t = 0 for reporting the first change.
    #[arg(long)]
    epoch_start: Option<String>,
    /// Calendar units per observation.
    #[arg(long)]
    epoch_cadence: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("scenario", &self.scenario);
        push("errors", &self.errors);
        push("n", &self.n);
        push("noise_scale", &self.noise_scale);
        push("kernel", &self.kernel);
        push("benchmark", &self.benchmark);
        push("delta", &self.delta);
        push("alpha", &self.alpha);
        push("bandwidth", &self.bandwidth);
        push("variant", &self.variant);
        push("x0", &self.x0);
        push("x1", &self.x1);
        push("seed", &self.seed);
        push("quantile_reps", &self.quantile_reps);
        push("rho", &self.rho);
        push("folds", &self.folds);
        push("fold_scheme", &self.fold_scheme);
        push("block_length", &self.block_length);
        push("margin_factor", &self.margin_factor);
        push("grid_refine", &self.grid_refine);
        push("epoch_start", &self.epoch_start);
        push("epoch_cadence", &self.epoch_cadence);
        if let Some(p) = &self.input {
            out.push(("input", p.display().to_string()));
        }
        if self.locally_stationary {
            out.push(("locally_stationary", "true".into()));
        }
        out
    }

    fn config(&self, file: Option<&PathBuf>) -> Result<RunConfig> {
        let mut cfg = match file {
            Some(path) => load_config_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => RunConfig::default(),
        };
        for (k, v) in self.pairs() {
            cfg.set(k, &v).with_context(|| format!("--{}", k.replace('_', "-")))?;
        }
        if let Some(p) = &self.output {
            cfg.output = Some(p.clone());
        }
        if let Some(p) = &self.plot {
            cfg.plot = Some(p.clone());
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// 1 (first mean model, varying a) or 2 (second model, varying delta).
    #[arg(long)]
    table: String,
    /// A (iid), B (MA) or C (AR errors).
    #[arg(long)]
    panel: String,
    /// Sample size; all of 200, 500 and 1000 when omitted.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// A single row parameter (a or delta) instead of the whole panel.
    #[arg(long)]
    param: Option<f64>,
    /// CSV destination; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn emit_report(report: &Report, cfg: &RunConfig) -> Result<()> {
    let t = &report.test;
    match &cfg.output {
        None => println!("{}", report.to_json()?),
        Some(p) => println!(
            "{}: {:?} statistic {:.6}, threshold {:.6}; report written to {}",
            if t.reject { "reject" } else { "accept" },
            t.variant,
            t.statistic,
            t.threshold,
            p.display()
        ),
    }
    Ok(())
}

fn decision(report: &Report) -> ExitCode {
    if report.test.reject {
        ExitCode::from(EXIT_REJECT)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = cli.config.as_ref();
    match cli.command {
        Command::Test(args) => {
            let cfg = args.config(file)?;
            let report = run_pipeline(&cfg)?;
            emit_report(&report, &cfg)?;
            Ok(decision(&report))
        }
        Command::Band(args) => {
            let mut cfg = args.config(file)?;
            if args.variant.is_none() {
                cfg.set("variant", "band")?;
            }
            let report = run_pipeline(&cfg)?;
            if cfg.plot.is_none() {
                write_plot_csv(&report.plot, io::stdout().lock())?;
            }
            if cfg.output.is_some() {
                emit_report(&report, &cfg)?;
            }
            Ok(decision(&report))
        }
        Command::FirstChange(args) => {
            let mut cfg = args.config(file)?;
            cfg.analysis.first_change = true;
            if cfg.analysis.test.delta <= 0.0 {
                bail!("first-change needs a positive --delta");
            }
            let report = run_pipeline(&cfg)?;
            emit_report(&report, &cfg)?;
            if cfg.output.is_some() {
                if let Some(fc) = &report.first_change {
                    match fc.epoch_label {
                        Some(label) => println!("first relevant change at t = {:.4} ({label})", fc.exceedance.t_star_hat),
                        None => println!("first relevant change at t = {}", fc.exceedance.t_star_hat),
                    }
                }
            }
            Ok(decision(&report))
        }
        Command::CvBandwidth(args) => {
            let cfg = args.config(file)?;
            let input = cfg.input.as_ref().context("no input: give a data file or --scenario")?;
            let series = input.load(cfg.analysis.test.seed)?;
            let k = KernelSpec::from_name(&cfg.kernel)?;
            let a = &cfg.analysis;
            let opts = CvOptions { folds: a.folds, seed: a.test.seed, scheme: a.fold_scheme, thin: a.thin_cv };
            let out = cv_bandwidth_with(&series, &k, &opts)?;
            let json = serde_json::to_string_pretty(&out)?;
            match &cfg.output {
                Some(p) => fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let table: Table = args.table.parse()?;
            let panel: Panel = args.panel.parse()?;
            let sizes: Vec<usize> = args.n.map_or(TABLE_SIZES.to_vec(), |n| vec![n]);
            let mut rows = Vec::new();
            for n in sizes {
                match args.param {
                    Some(p) => rows.push(run_table_row(table, panel, p, n, args.runs, args.seed)?),
                    None => rows.extend(run_table(table, panel, n, args.runs, args.seed)?),
                }
            }
            match &args.output {
                Some(p) => {
                    let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                    write_table_csv(&rows, io::BufWriter::new(f))?;
                }
                None => {
                    write_table_csv(&rows, io::stdout().lock())?;
                    io::stdout().flush()?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
