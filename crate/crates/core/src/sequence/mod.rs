//! Pulse-sequence design: sign histories in the toggling frame, moment
//! constraints, the interval solver, and published/reference sequences.

pub mod axis;
pub mod catalog;
pub mod constraints;
pub mod dd;
pub mod history;
pub mod record;
pub mod solver;
pub mod udd;

pub use axis::{parity_pulse, parse_axes, PulseAxis, PAULI_AXES};
pub use catalog::{alternating_xz, catalog_entry, catalog_names, catalog_sequence, CATALOG};
pub use constraints::{verify_order, verify_order_within, Constraint, ConstraintSystem};
pub use dd::DdSequence;
pub use history::{mixed_moment, moment, SignHistory};
pub use solver::{refine_intervals, solve_intervals, solve_intervals_report, SolveReport, SolverConfig};
pub use udd::{qdd_sequence, udd_sequence};

use crate::scalar::Real;

/// Sign history of a sequence.
pub fn sign_history<S: crate::scalar::Scalar>(seq: &DdSequence<S>) -> SignHistory<S> {
    seq.sign_history()
}

/// One census row: a pattern class and its positive roots.
#[derive(Clone, Debug)]
pub struct CensusEntry<S> {
    pub pattern: String,
    pub solutions: Vec<DdSequence<S>>,
}

/// Solves every pulse-direction pattern of the given length and keeps those
/// with at least one positive root. Patterns are canonicalized so the first
/// pulse is x and the first non-x pulse is z; the other classes follow by
/// relabeling axes.
pub fn census<S: Real>(order: u8, config: &SolverConfig<S>) -> crate::Result<Vec<CensusEntry<S>>> {
    let len = match order {
        1 => 3,
        2 => 6,
        _ => {
            return Err(crate::Error::invalid(
                "order",
                "a full pattern census is only feasible for orders 1 and 2",
            ))
        }
    };
    let mut out = Vec::new();
    for code in 0..3usize.pow(len as u32) {
        let axes: Vec<PulseAxis> = (0..len)
            .map(|i| PulseAxis::from_index((code / 3usize.pow(i as u32)) % 3))
            .collect();
        if !is_canonical(&axes) {
            continue;
        }
        let solutions = solve_intervals(order, &axes, config)?;
        if !solutions.is_empty() {
            out.push(CensusEntry {
                pattern: axis::format_axes(&axes),
                solutions,
            });
        }
    }
    Ok(out)
}

fn is_canonical(axes: &[PulseAxis]) -> bool {
    if axes.first() != Some(&PulseAxis::X) {
        return false;
    }
    match axes.iter().find(|&&a| a != PulseAxis::X) {
        None => true,
        Some(&a) => a == PulseAxis::Z,
    }
}
