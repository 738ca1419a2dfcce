//! Experiment specs, the runner behind the CLI, CSV and run manifests.

pub mod compare;
pub mod runner;
pub mod spec;

pub use compare::{
    compare_sequences, initial_state_check, single_crossing, Crossover, InitialStateReport, Ranking, SweepPoint,
};
pub use runner::{
    execute, run, spec_hash, sweep_specs, write_atomic, Outcome, RunManifest, ToleranceCheck, MANIFEST_FILE,
};
pub use spec::{ExperimentKind, ExperimentSpec, PeriodChoice, PropagatorChoice, SequenceChoice};
