//! Run configuration, key=value config files, the JSON report and the plot CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{analyze, ingest_csv, AnalysisConfig, BandwidthChoice, SigmaSummary};
use crate::changetime::FirstExceedance;
use crate::deviation::{ArgmaxSign, ExtremalSet};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::simharness::{generate_series, ErrorProcess, MeanFn};
use crate::smoothing::{CvOutcome, FoldScheme, TimeSeries};
use crate::testing::{TestOutcome, TestVariant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSource {
    File { path: PathBuf },
    /// A synthetic series drawn with the run seed.
    Simulated { mean: MeanFn, errors: ErrorProcess, n: usize, noise_scale: f64 },
}

impl InputSource {
    pub fn load(&self, seed: u64) -> Result<TimeSeries> {
        match self {
            InputSource::File { path } => ingest_csv(path),
            InputSource::Simulated { mean, errors, n, noise_scale } => {
                generate_series(mean, *errors, *noise_scale, *n, seed)
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            InputSource::File { path } => path.display().to_string(),
            InputSource::Simulated { mean, errors, n, noise_scale } => {
                format!("simulated {mean:?} with {errors:?} errors x {noise_scale}, n = {n}")
            }
        }
    }
}

/// Maps `t` to a calendar label: `start + round(t·n)·cadence`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMapping {
    pub start: f64,
    pub cadence: f64,
}

impl EpochMapping {
    pub fn label(&self, t: f64, n: usize) -> Option<f64> {
        t.is_finite().then(|| self.start + (t * n as f64).round() * self.cadence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<InputSource>,
    pub kernel: String,
    pub analysis: AnalysisConfig,
    /// Destination of the JSON report.
    pub output: Option<PathBuf>,
    /// Destination of the band CSV.
    pub plot: Option<PathBuf>,
    pub epoch: Option<EpochMapping>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            kernel: "quartic".into(),
            analysis: AnalysisConfig::default(),
            output: None,
            plot: None,
            epoch: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse '{value}'")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::InvalidArgument(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.trim() {
        "" | "auto" | "none" => Ok(None),
        v => num(key, v).map(Some),
    }
}

impl RunConfig {
    fn simulated(&mut self) -> (&mut MeanFn, &mut ErrorProcess, &mut usize, &mut f64) {
        if !matches!(self.input, Some(InputSource::Simulated { .. })) {
            self.input = Some(InputSource::Simulated {
                mean: MeanFn::Mu2,
                errors: ErrorProcess::Iid,
                n: 1000,
                noise_scale: 1.0,
            });
        }
        match &mut self.input {
            Some(InputSource::Simulated { mean, errors, n, noise_scale }) => (mean, errors, n, noise_scale),
            _ => unreachable!(),
        }
    }

    /// Applies one `key = value` setting. Dashes and underscores in keys are
    /// interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim().replace('-', "_");
        let v = value.trim();
        let a = &mut self.analysis;
        match k.as_str() {
            "input" => self.input = Some(InputSource::File { path: PathBuf::from(v) }),
            "scenario" | "mean" => *self.simulated().0 = v.parse()?,
            "errors" => *self.simulated().1 = v.parse()?,
            "n" => *self.simulated().2 = num(&k, v)?,
            "noise_scale" => *self.simulated().3 = num(&k, v)?,
            "kernel" => {
                KernelSpec::from_name(v)?;
                self.kernel = v.to_string();
            }
            "benchmark" => a.benchmark = v.parse()?,
            "delta" => a.test.delta = num(&k, v)?,
            "alpha" => a.test.alpha = num(&k, v)?,
            "bandwidth" => a.bandwidth = v.parse()?,
            "test" | "variant" => a.test.variant = v.parse()?,
            "locally_stationary" => a.locally_stationary = flag(&k, v)?,
            "x0" => a.test.x0 = num(&k, v)?,
            "x1" => a.test.x1 = num(&k, v)?,
            "seed" => a.test.seed = num(&k, v)?,
            "quantile_reps" => a.test.quantile_reps = num(&k, v)?,
            "rho" => a.test.rho = optional(&k, v)?,
            "use_ell_prime" => a.test.use_ell_prime = flag(&k, v)?,
            "folds" => a.folds = num(&k, v)?,
            "fold_scheme" => {
                a.fold_scheme = match v.to_ascii_lowercase().as_str() {
                    "random" => FoldScheme::Random,
                    "contiguous" => FoldScheme::Contiguous,
                    "blocked" => FoldScheme::Blocked(None),
                    b if b.starts_with("blocked:") => FoldScheme::Blocked(Some(num(&k, &b[8..])?)),
                    _ => return Err(Error::InvalidArgument(format!("fold_scheme: unknown scheme '{v}'"))),
                }
            }
            "thin_cv" => a.thin_cv = flag(&k, v)?,
            "grid_refine" => a.grid_refine = num(&k, v)?,
            "block_length" => a.block_length = optional(&k, v)?,
            "ls_tau" => a.ls_tau = optional(&k, v)?,
            "ls_m" => a.ls_m = optional(&k, v)?,
            "first_change" => a.first_change = flag(&k, v)?,
            "margin_factor" => a.margin_factor = num(&k, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "plot" => self.plot = Some(PathBuf::from(v)),
            "epoch_start" => {
                let start = num(&k, v)?;
                let cadence = self.epoch.map_or(1.0, |e| e.cadence);
                self.epoch = Some(EpochMapping { start, cadence });
            }
            "epoch_cadence" => {
                let cadence = num(&k, v)?;
                let start = self.epoch.map_or(0.0, |e| e.start);
                self.epoch = Some(EpochMapping { start, cadence });
            }
            _ => return Err(Error::InvalidArgument(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_none() {
            return Err(Error::InvalidArgument("no input: give a data file or a simulated scenario".into()));
        }
        let a = &self.analysis;
        if a.locally_stationary && a.block_length.is_some() {
            return Err(Error::InvalidArgument(
                "block_length applies to the stationary variance estimate and cannot be combined with locally_stationary"
                    .into(),
            ));
        }
        if !a.locally_stationary && (a.ls_tau.is_some() || a.ls_m.is_some()) {
            return Err(Error::InvalidArgument("ls_tau and ls_m require locally_stationary".into()));
        }
        if let BandwidthChoice::Fixed(h) = a.bandwidth {
            if !(h > 0.0 && h <= 0.5) {
                return Err(Error::InvalidArgument(format!("bandwidth must lie in (0, 1/2], got {h}")));
            }
        }
        if let Some(e) = self.epoch {
            if !(e.cadence.is_finite() && e.start.is_finite()) {
                return Err(Error::InvalidArgument("epoch mapping must be finite".into()));
            }
        }
        a.test.validate()?;
        a.benchmark.validate()
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected 'key = value', got '{line}'") })?;
        if k.trim().is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "empty key".into() });
        }
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Reads a config file into a [`RunConfig`] built on the defaults.
pub fn load_config_file(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::default();
    cfg.apply(&parse_key_values(&text)?)?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstChange {
    #[serde(flatten)]
    pub exceedance: FirstExceedance,
    /// Calendar label of `t̂*` under the epoch mapping.
    pub epoch_label: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub t: f64,
    pub mu_tilde: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// UTC creation time; not part of the reproducible content.
    pub generated_at: String,
    pub version: String,
    pub input: String,
    pub n: usize,
    pub kernel: String,
    pub config: AnalysisConfig,
    pub bandwidth: f64,
    pub cv: Option<CvOutcome>,
    pub sigma: SigmaSummary,
    pub g_hat: f64,
    /// `d̂∞` and where it is attained.
    pub d_inf: f64,
    pub argmax_t: f64,
    pub argmax_sign: ArgmaxSign,
    pub extremal_set: ExtremalSet,
    pub test: TestOutcome,
    pub first_change: Option<FirstChange>,
    #[serde(skip)]
    pub plot: Vec<PlotRow>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// The JSON with the timestamp blanked, for reproducibility checks.
    pub fn reproducible_json(&self) -> Result<String> {
        Report { generated_at: String::new(), ..self.clone() }.to_json()
    }
}

fn utc_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Writes `t, mu_tilde, lower, upper` rows.
pub fn write_plot_csv<W: Write>(rows: &[PlotRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Loads the input, runs the configured test and writes the requested files.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let input = cfg.input.as_ref().expect("validated");
    let k = KernelSpec::from_name(&cfg.kernel)?;
    let series = input.load(cfg.analysis.test.seed)?;
    let variant: TestVariant = cfg.analysis.test.variant;
    let a = analyze(&series, &k, &cfg.analysis, &[variant])?;
    let n = series.n();

    let dev = &a.deviation;
    let argmax = dev.values.iter().enumerate().max_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).map_or(0, |(i, _)| i);
    let plot = a
        .curve
        .grid
        .iter()
        .zip(&a.curve.values)
        .zip(&a.band_halfwidth)
        .map(|((&t, &mu), &c)| PlotRow { t, mu_tilde: mu, lower: mu - c, upper: mu + c })
        .collect();
    let first_change = a.first_change.map(|fe| FirstChange {
        exceedance: fe,
        epoch_label: cfg.epoch.and_then(|e| e.label(fe.t_star_hat, n)),
    });

    let report = Report {
        generated_at: utc_timestamp(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: input.describe(),
        n,
        kernel: k.name().to_string(),
        config: cfg.analysis.clone(),
        bandwidth: a.bandwidth,
        cv: a.cv,
        sigma: a.sigma,
        g_hat: a.g_hat,
        d_inf: dev.sup,
        argmax_t: dev.grid.get(argmax).copied().unwrap_or(f64::NAN),
        argmax_sign: dev.argmax_sign,
        extremal_set: a.extremal,
        test: a.outcomes.into_iter().next().expect("one variant requested"),
        first_change,
        plot,
    };

    if let Some(path) = &cfg.output {
        fs::write(path, report.to_json()? + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &cfg.plot {
        let f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_plot_csv(&report.plot, std::io::BufWriter::new(f))?;
    }
    Ok(report)
}
