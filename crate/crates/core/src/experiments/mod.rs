//! Desk-scale experiments: share dimensioning, benchmark share mapping,
//! per-epoch scheme comparison and sweeps over scenario families.
//!
//! Guaranteed-service slices get Monte-Carlo dimensioned guarantees and no
//! excess; elastic slices get excess only. The reservation benchmark receives
//! the same guarantees plus water-filled elastic reservations; the share-based
//! benchmark receives the same overall shares.

pub mod benchmark;
pub mod dimension;
pub mod run;
pub mod setup;
pub mod sweep;

pub use benchmark::{map_benchmark_shares, water_fill, BenchmarkShares};
pub use dimension::{dimension_share, outage_probability_mc, McOptions};
pub use run::{greet_shares, run_experiment, run_prepared, RunOptions, RunReport, Scheme, SchemeMetrics};
pub use setup::{prepare, Family, Prepared, ServiceClass, SliceClassConfig};
pub use sweep::{mean_ci, run_sweep, spearman, PointSummary, Report, SweepConfig, SweepRow, Verdict, CSV_HEADER};
