use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dgp::{ErrorProcess, MeanFn};
use super::mc::{run_mc_multi, true_benchmark, true_sup_deviation, Scenario};
use crate::benchmarks::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::testing::TestVariant;

/// Sample sizes of the published tables.
pub const TABLE_SIZES: [usize; 3] = [200, 500, 1000];

/// Boundary parameter of the first model, listed as 1.58.
const A_STAR: f64 = 128.0 / 81.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Table {
    /// `μ⁽¹⁾_a` against the mean over `[0, ¼]`, `Δ = 1`, varying `a`.
    One,
    /// `μ⁽²⁾` (continuous form) against the constant 10, varying `Δ`.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Panel {
    A,
    B,
    C,
}

impl Panel {
    pub fn errors(self) -> ErrorProcess {
        match self {
            Panel::A => ErrorProcess::Iid,
            Panel::B => ErrorProcess::Ma,
            Panel::C => ErrorProcess::Ar,
        }
    }
}

impl FromStr for Table {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Table::One),
            "2" => Ok(Table::Two),
            o => Err(Error::InvalidArgument(format!("table must be 1 or 2, got '{o}'"))),
        }
    }
}

impl FromStr for Panel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Panel::A),
            "B" => Ok(Panel::B),
            "C" => Ok(Panel::C),
            o => Err(Error::InvalidArgument(format!("panel must be A, B or C, got '{o}'"))),
        }
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Table::One => "1",
            Table::Two => "2",
        })
    }
}

impl fmt::Display for Panel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Row parameters: `a` for table 1, `Δ` for table 2.
pub fn table_params(table: Table) -> Vec<f64> {
    match table {
        Table::One => vec![1.0, 1.5, A_STAR, 2.0, 2.5, 3.0],
        Table::Two => vec![1.0, 1.5, 1.75, 2.0, 2.25],
    }
}

/// The scenario behind one table cell group.
pub fn table_scenario(table: Table, panel: Panel, param: f64, n: usize, seed: u64) -> Scenario {
    let (mean, delta, x0, bench) = match table {
        Table::One => (MeanFn::Mu1(param), 1.0, 0.25, BenchmarkSpec::PartialMean(0.25)),
        Table::Two => (MeanFn::Mu2Smooth, param, 0.0, BenchmarkSpec::Constant(10.0)),
    };
    let mut s = Scenario::new(mean, panel.errors(), n);
    s.seed = seed;
    s.analysis.benchmark = bench;
    s.analysis.test.delta = delta;
    s.analysis.test.x0 = x0;
    s.analysis.test.x1 = 1.0;
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: String,
    pub panel: String,
    pub n: usize,
    pub param: f64,
    pub d_inf_minus_delta: f64,
    /// Rejection rates in percent.
    pub band: f64,
    pub simple: f64,
    pub simulated: f64,
    pub runs: usize,
    pub failures: usize,
}

const ROW_VARIANTS: [TestVariant; 3] = [TestVariant::Band, TestVariant::GumbelSimple, TestVariant::SimulatedQuantile];

/// Runs one row at one sample size.
pub fn run_table_row(table: Table, panel: Panel, param: f64, n: usize, runs: usize, seed: u64) -> Result<TableRow> {
    let s = table_scenario(table, panel, param, n, seed);
    let t = &s.analysis.test;
    let g = true_benchmark(&s.mean, &s.analysis.benchmark)?;
    let gap = true_sup_deviation(&s.mean, g, t.x0, t.x1, 200_001) - t.delta;
    let res = run_mc_multi(&s, runs, &ROW_VARIANTS)?;
    Ok(TableRow {
        table: table.to_string(),
        panel: panel.to_string(),
        n,
        param,
        d_inf_minus_delta: gap,
        band: 100.0 * res[0].rejection_rate,
        simple: 100.0 * res[1].rejection_rate,
        simulated: 100.0 * res[2].rejection_rate,
        runs,
        failures: res[0].failures,
    })
}

/// All rows of a panel at sample size `n`.
pub fn run_table(table: Table, panel: Panel, n: usize, runs: usize, seed: u64) -> Result<Vec<TableRow>> {
    table_params(table).into_iter().map(|p| run_table_row(table, panel, p, n, runs, seed)).collect()
}

/// CSV with one line per row: parameter, `d∞ − Δ`, then the three rates.
pub fn write_table_csv<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["table", "panel", "n", "param", "d_inf_minus_delta", "band", "simple", "simulated", "runs", "failures"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.table.clone(),
            r.panel.clone(),
            r.n.to_string(),
            format!("{:.2}", r.param),
            format!("{:.2}", r.d_inf_minus_delta),
            format!("{:.1}", r.band),
            format!("{:.1}", r.simple),
            format!("{:.1}", r.simulated),
            r.runs.to_string(),
            r.failures.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
