//! Scenario files, the per-kind experiment runners, parameter sweeps and
//! report output.
//!
//! A scenario is a flat TOML table; every key except `id`, `kind` and `seed`
//! has a default. See `scenarios/` at the repository root for one file per
//! kind.

mod report;
mod run;
mod scenario;
mod sweep;

pub use report::{Fragment, RunOptions, SweepEntry, SweepRegression, SweepReport};
pub use run::run_scenario;
pub use scenario::{Scenario, ScenarioKind};
pub use sweep::{load_sweep, parse_sweep, run_sweep, set_axis, SweepSpec, SWEEP_AXES};
