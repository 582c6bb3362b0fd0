//! Experiment harness for the `pilotcon` simulator: named sweep presets, a
//! parallel runner and a fixed-schema CSV writer.

mod error;
pub mod experiment;
pub mod output;

pub use error::{CliError, Result};
pub use experiment::{run_experiment, BAxis, ExperimentName, ExperimentSpec, ReuseLayout};
pub use output::{read_results, write_results, ResultRow, CSV_HEADER};
