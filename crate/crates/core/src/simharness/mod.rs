//! Simulation study: data-generating processes, Monte Carlo rejection
//! rates and the two result tables.

mod dgp;
mod mc;
mod tables;

pub use dgp::{generate_series, ErrorProcess, MeanFn, AR_BURN_IN};
pub use mc::{extremal_ratio, generate, run_mc, run_mc_multi, true_benchmark, true_sup_deviation, MCResult, Scenario};
pub use tables::{
    run_table, run_table_row, table_params, table_scenario, write_table_csv, Panel, Table, TableRow, TABLE_SIZES,
};
