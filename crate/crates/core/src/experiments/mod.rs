//! Sweeps, run reports and the cross-validation suite.

pub mod report;
pub mod sweep;
pub mod validate;

pub use report::{Record, RunReport};
pub use sweep::{run_sweep, Grid, Parameter, Quantity, SweepSpec};
pub use validate::{run_validation, CheckResult, Level, ValidationReport};
