//! Monte Carlo emulation of the pulsed acquisition.
//!
//! The experiment runs in trap cycles: each cycle rebuilds the atomic
//! sample, measures a burst of quadrature quadruples, and carries its own
//! unknown-but-fixed pair of quadrature angles because the interferometer
//! drifts on a timescale much longer than one cycle. Calibration cycles
//! with the amplifier off record the vacuum (standard quantum level)
//! reference the estimators normalize against.
//!
//! Everything here is a pure function of the configuration: per-cycle
//! randomness comes from counter-derived streams keyed by
//! `(seed, sweep_index, cycle_index)`, so datasets are bit-identical across
//! thread counts and run order.

mod config;
mod record;
mod runner;

pub use config::{ExperimentConfig, ModelSpec};
pub use record::{
    read_records_csv, read_records_ndjson, write_records_csv, write_records_ndjson, CycleRecord,
};
pub use runner::{
    cycle_rng, run_experiment, run_sweep_point, sample_cycle, sweep_point_model, SweepPointData,
    SweepPointModel,
};

pub(crate) use runner::splitmix64;
