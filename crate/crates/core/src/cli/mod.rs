//! Command-line front end.

mod commands;
mod config;

pub use commands::{
    cmd_model, cmd_oracle, cmd_sweep, cmd_tomo, fmt_f64, model_report, oracle_report, sweep_row, tomo_report,
    ComponentDelta, Format, ModelReport, OracleReport, Outcome, Pair, ParamsReport, TomoReport, ORACLE_TOL,
    SWEEP_COLUMNS,
};
pub use config::{RunConfig, SweepAxis, TomoConfig, TomoSource, KEYS, SWEEP_KEYS};
