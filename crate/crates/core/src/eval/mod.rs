//! Metrics, the feature-count sweep, paired t-tests and decision grids.

pub mod grid;
pub mod metrics;
pub mod sweep;
pub mod ttest;

pub use grid::{decision_grid, AxisRange, DecisionGrid, GridRequest, OverlayPoint};
pub use metrics::{metrics, EvalReport, Provenance};
pub use sweep::{sweep, Metric, SweepCell, SweepConfig, SweepResult, SweepRow};
pub use ttest::{paired_t_test, TTestResult};
