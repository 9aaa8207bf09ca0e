//! Experiment runner, reference solutions and accuracy metrics.

pub mod experiment;
pub mod metrics;
pub mod reference;
pub mod trace;

pub use experiment::{
    run_experiment, run_seeds, run_single, summarize, DivergenceGuard, ExperimentConfig, Outcome, RunStats, SeedRun,
    TraceRecord,
};
pub use metrics::{eps_energy, eps_obj, eps_obj_from_gap, eps_tan, ReferenceVector};
pub use reference::{
    dense_top_eigenpairs, lanczos_top, reference_eigenpair, reference_lanczos, LanczosOptions, ReferenceSolution,
    ReferenceSource, DENSE_LIMIT,
};
pub use trace::{read_trace, trace_file_name, write_summary, write_trace, TRACE_HEADER};
