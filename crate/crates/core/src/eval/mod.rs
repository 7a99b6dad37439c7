//! Metrics, procedural fixtures, the synthetic-scribble protocol and the
//! robustness sweeps.

pub mod fixtures;
pub mod metrics;
pub mod protocol;
pub mod sweeps;

pub use fixtures::{bounding_box, disk_fixture, fixtures, Fixture};
pub use metrics::{dsc, error_rate, jaccard};
pub use protocol::{
    error_zone, generate_synthetic_scribbles, ScribbleProtocol, SyntheticScribbles,
};
pub use sweeps::{
    run_looseness_sweep, run_scribble_error_sweep, run_scribble_suite, segment_best_sigma,
    tune_box_sigma, LevelSummary, MetricReport, MetricRow, LOOSENESS_LEVELS,
};
