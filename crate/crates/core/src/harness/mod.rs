//! Instance generation, reference solutions and experiment orchestration.

pub mod builtin;
mod experiment;
mod generator;
mod reference;

pub use experiment::{
    log_grid, report_file, run_experiment, trace_file, verify_report, AlphaRule, ExperimentConfig,
    ExperimentOutput, FamilyCheck, MethodOutput, VerifyOutcome, COMPACT_U_TILDE,
};
pub use generator::{generate_instance, GeneratorConfig};
pub use reference::{
    compute_reference, ReferenceSolution, REFERENCE_GRADIENT_MAPPING, STRONG_DUALITY_TOLERANCE,
};
