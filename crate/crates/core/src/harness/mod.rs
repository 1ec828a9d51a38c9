//! Configuration, studies, reporting and the command-line front end.

pub mod cli;
pub mod config;
pub mod io;
pub mod metrics;
pub mod study;

pub use config::{presets, CaseConfig, Mode, Output, Reference};
pub use io::{ConvergenceRow, TimingRow};
pub use metrics::{eps2, eps_inf, noc};
pub use study::{run_case, run_convergence, run_timing};
