//! Configuration, per-point optimisation, sweeps and result output.

pub mod config;
pub mod emit;
pub mod optimize;
pub mod run;

pub use config::{load_config, Axis, Range, RunConfig, SweepSpec, AXIS_NAMES};
pub use emit::{emit_results, load_json, write, write_csv, write_json, Format, CSV_COLUMNS};
pub use optimize::{
    closed_form_point, evaluate, numeric_fidelity, operating_point, optimize_point, refine, AxisValue, ClosedForm,
    Evaluation, SweepRow,
};
pub use run::{grid_points, run_sweep, SweepResult, SCHEMA_VERSION};
