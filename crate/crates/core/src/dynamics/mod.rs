//! State-vector evolution of qubits and bath under pulse schedules, reduced
//! densities and observables, and the dense suppression-order check.

pub mod observables;
pub mod propagate;
pub mod run;
pub mod schedule;
pub mod slope;
pub mod state;

pub use observables::{concurrence, loschmidt_echo, magnetization, trace_distance, ReducedDensity};
pub use propagate::{dense_propagator, krylov_evolve, trotter_evolve, Propagator};
pub use run::{
    evolve_sequence, n_op, n_op_for, prepare_state, run_periodic, trajectory_csv, Evolution, NOp, Observable,
    QubitInit, Sample, TRAJECTORY_HEADER,
};
pub use schedule::{rotation, Insertion, PulseMode, Schedule, Step};
pub use slope::{
    log_grid, log_log_slope, suppression_delta, suppression_operator, suppression_slope, suppression_slope_with,
    DeltaNorm, DeviationPart, SlopeOptions, SlopeReport,
};
pub use state::QuantumState;
