//! Configuration, data partitioning, simulated arrivals and the training loop.

mod arrivals;
mod config;
mod engine;
mod partition;
mod probe;

pub use arrivals::{sample_arrivals, Arrival, WorkerSpec};
pub use config::{
    AttackName, DatasetSpec, ExperimentConfig, GarParams, DEFAULT_BATCH_SIZE, DEFAULT_DELAY_BYZANTINE,
    DEFAULT_DELAY_HONEST, DEFAULT_EVAL_EVERY, DEFAULT_SEPARATION, DEFAULT_TEST_FRAC, DEFAULT_VAL_FRAC,
};
pub use engine::{
    build_dataset, filter_phase, run_experiment, FilterOutcome, IterationRecord, Simulation,
    VALIDATION_RETRIES,
};
pub use partition::{partition_data, Partition};
pub use probe::{probe_assumptions, ProbeReport};
