//! Running schedules: within-cycle trajectories, stroboscopic series, N_op
//! and trajectory CSV.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::observables::{concurrence, loschmidt_echo, magnetization, trace_distance, ReducedDensity};
use super::propagate::{Propagator, NORM_DRIFT_LIMIT};
use super::schedule::{Schedule, Step};
use super::state::{qubit, QuantumState};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, ground_state, ModelConfig, Operator, Term};

/// Reduced density of all qubits at one time.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub rho: ReducedDensity,
    pub norm_drift: f64,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub samples: Vec<Sample>,
    pub state: QuantumState,
}

/// Initial qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitInit {
    Up,
    PlusX,
    /// `(|↑↑⟩ + |↓↓⟩)/√2`.
    Bell,
    /// `|↑↓⟩`.
    UpDown,
}

impl QubitInit {
    pub fn n_qubits(self) -> usize {
        match self {
            QubitInit::Up | QubitInit::PlusX => 1,
            QubitInit::Bell | QubitInit::UpDown => 2,
        }
    }

    pub fn amplitudes(self) -> Vec<C64> {
        match self {
            QubitInit::Up => qubit::up(),
            QubitInit::PlusX => qubit::plus_x(),
            QubitInit::Bell => qubit::bell_phi_plus(),
            QubitInit::UpDown => qubit::pair(&qubit::up(), &qubit::down()),
        }
    }
}

impl fmt::Display for QubitInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QubitInit::Up => "up",
            QubitInit::PlusX => "plus_x",
            QubitInit::Bell => "bell",
            QubitInit::UpDown => "up_down",
        })
    }
}

impl FromStr for QubitInit {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "up" => Ok(QubitInit::Up),
            "plus_x" => Ok(QubitInit::PlusX),
            "bell" => Ok(QubitInit::Bell),
            "up_down" => Ok(QubitInit::UpDown),
            other => Err(format!("unknown initial state '{other}'")),
        }
    }
}

/// `|q⟩ ⊗ |E_level⟩` with `level = 0` the bath ground state.
pub fn prepare_state(model: &ModelConfig, init: QubitInit, level: usize) -> Result<QuantumState> {
    if init.n_qubits() != model.n_qubits() {
        return Err(Error::invalid(
            "initial",
            format!(
                "'{init}' needs {} qubit(s), model has {}",
                init.n_qubits(),
                model.n_qubits()
            ),
        ));
    }
    let bath = ground_state(model, level + 1)?;
    QuantumState::product(&init.amplitudes(), &bath[level].state)
}

fn all_qubits(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn with_field(h0: &Operator, n_qubits: usize, field: &Option<nalgebra::Matrix2<C64>>) -> Operator {
    let mut h = h0.clone();
    if let Some(f) = field {
        for q in 0..n_qubits {
            h.push(Term::One { bit: q, m: *f });
        }
    }
    h
}

/// Evolves `initial` through `schedule.n_cycles` cycles. Samples are taken
/// at `t = 0`, after each full cycle (post kicks), and additionally every
/// `sample_every` if given.
pub fn evolve_sequence(
    initial: &QuantumState,
    schedule: &Schedule,
    model: &ModelConfig,
    propagator: &Propagator,
    sample_every: Option<f64>,
) -> Result<Evolution> {
    if initial.n_qubits != model.n_qubits() || initial.dim() != model.dim() {
        return Err(Error::invalid("initial", "state does not match the model register"));
    }
    if let Some(dt) = sample_every {
        if !(dt > 0.0) {
            return Err(Error::invalid("sample_every", "must be positive"));
        }
    }
    let steps = schedule.cycle_steps()?;
    let h0 = build_hamiltonian(model)?;
    let nq = model.n_qubits();
    let qubits = all_qubits(nq);
    let hamiltonians: Vec<Option<Operator>> = steps
        .iter()
        .map(|s| match s {
            Step::Evolve { field, .. } => Some(with_field(&h0, nq, field)),
            Step::Kick(_) => None,
        })
        .collect();

    let mut state = initial.clone();
    state.time = 0.0;
    let mut samples = Vec::new();
    let record = |state: &QuantumState, samples: &mut Vec<Sample>| -> Result<()> {
        let drift = (state.norm() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                drift,
                limit: NORM_DRIFT_LIMIT,
                time: state.time,
            });
        }
        let sample = Sample {
            t: state.time,
            rho: state.reduced_density(&qubits)?,
            norm_drift: drift,
        };
        match samples.last_mut() {
            Some(last) if (last.t - state.time).abs() < 1e-12 => *last = sample,
            _ => samples.push(sample),
        }
        Ok(())
    };
    record(&state, &mut samples)?;
    let mut next_grid = sample_every.unwrap_or(f64::INFINITY);
    let mut grid_index = 1usize;
    for _ in 0..schedule.n_cycles {
        for (step, h) in steps.iter().zip(&hamiltonians) {
            match step {
                Step::Evolve { duration, .. } => {
                    let h = h.as_ref().expect("evolve steps carry a Hamiltonian");
                    let end = state.time + duration;
                    while next_grid < end - 1e-12 {
                        propagator.evolve(h, &mut state.amplitudes, next_grid - state.time)?;
                        state.time = next_grid;
                        record(&state, &mut samples)?;
                        grid_index += 1;
                        next_grid = grid_index as f64 * sample_every.unwrap_or(f64::INFINITY);
                    }
                    propagator.evolve(h, &mut state.amplitudes, end - state.time)?;
                    state.time = end;
                }
                Step::Kick(u) => {
                    let u = DMatrix::from_iterator(2, 2, u.iter().copied());
                    for q in 0..nq {
                        Term::apply_local((q, None), &u, &mut state.amplitudes);
                    }
                }
            }
        }
        record(&state, &mut samples)?;
        while next_grid <= state.time + 1e-12 {
            grid_index += 1;
            next_grid = grid_index as f64 * sample_every.unwrap_or(f64::INFINITY);
        }
    }
    Ok(Evolution { samples, state })
}

/// Stroboscopic series at `t = nT`, `n = 0..=n_cycles`.
pub fn run_periodic(
    initial: &QuantumState,
    schedule: &Schedule,
    model: &ModelConfig,
    propagator: &Propagator,
) -> Result<Vec<Sample>> {
    Ok(evolve_sequence(initial, schedule, model, propagator, None)?.samples)
}

/// Observable tracked for N_op.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// Echo of qubit 0.
    Echo,
    Concurrence,
    /// `⟨σ_z⟩` of qubit 0.
    SigmaZ,
}

impl Observable {
    pub fn value(self, rho: &ReducedDensity) -> Result<f64> {
        let first = || {
            if rho.dim() == 4 {
                rho.marginal(0)
            } else {
                Ok(rho.clone())
            }
        };
        match self {
            Observable::Echo => loschmidt_echo(&first()?),
            Observable::SigmaZ => magnetization(&first()?),
            Observable::Concurrence => concurrence(rho),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::Echo => "echo",
            Observable::Concurrence => "concurrence",
            Observable::SigmaZ => "sigma_z",
        })
    }
}

impl FromStr for Observable {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "echo" => Ok(Observable::Echo),
            "concurrence" => Ok(Observable::Concurrence),
            "sigma_z" => Ok(Observable::SigmaZ),
            other => Err(format!("unknown observable '{other}'")),
        }
    }
}

/// Cycles until the observable first falls to half its initial value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NOp {
    /// `cycles` is the first `n` with `obs(nT) ≤ obs(0)/2`; `refined`
    /// interpolates linearly between `n − 1` and `n`.
    Reached {
        cycles: usize,
        refined: f64,
    },
    NotReached,
}

impl NOp {
    /// Refined count, or infinity when not reached.
    pub fn as_f64(self) -> f64 {
        match self {
            NOp::Reached { refined, .. } => refined,
            NOp::NotReached => f64::INFINITY,
        }
    }
}

/// N_op from a series sampled at `n = 0, 1, 2, …`. The first crossing wins.
pub fn n_op(series: &[f64]) -> NOp {
    let Some(&first) = series.first() else {
        return NOp::NotReached;
    };
    let half = 0.5 * first;
    for n in 1..series.len() {
        if series[n] <= half {
            let (a, b) = (series[n - 1], series[n]);
            let frac = if a > b { (a - half) / (a - b) } else { 1.0 };
            return NOp::Reached {
                cycles: n,
                refined: (n - 1) as f64 + frac,
            };
        }
    }
    NOp::NotReached
}

/// Runs the periodic scheme and extracts N_op for `observable`.
pub fn n_op_for(
    initial: &QuantumState,
    schedule: &Schedule,
    model: &ModelConfig,
    propagator: &Propagator,
    observable: Observable,
) -> Result<NOp> {
    let series = run_periodic(initial, schedule, model, propagator)?
        .iter()
        .map(|s| observable.value(&s.rho))
        .collect::<Result<Vec<f64>>>()?;
    Ok(n_op(&series))
}

pub const TRAJECTORY_HEADER: &str = "t,L,sigma_z,concurrence,trace_distance,norm_drift";

fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.12e}"),
        None => "nan".into(),
    }
}

/// One CSV row in the trajectory format.
pub fn trajectory_row(
    t: f64,
    echo: Option<f64>,
    sigma_z: Option<f64>,
    concurrence: Option<f64>,
    distance: Option<f64>,
    norm_drift: Option<f64>,
) -> String {
    [Some(t), echo, sigma_z, concurrence, distance, norm_drift]
        .into_iter()
        .map(cell)
        .collect::<Vec<_>>()
        .join(",")
}

/// Trajectory CSV. `L` and `sigma_z` refer to qubit 0; `concurrence` is
/// filled for two-qubit samples; `trace_distance` is against `reference`.
pub fn trajectory_csv(samples: &[Sample], reference: Option<&ReducedDensity>) -> Result<String> {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for s in samples {
        let first = if s.rho.dim() == 4 {
            s.rho.marginal(0)?
        } else {
            s.rho.clone()
        };
        let c = if s.rho.dim() == 4 {
            Some(concurrence(&s.rho)?)
        } else {
            None
        };
        let d = match reference {
            Some(r) => Some(trace_distance(&s.rho, r)?),
            None => None,
        };
        let row = trajectory_row(
            s.t,
            Some(loschmidt_echo(&first)?),
            Some(magnetization(&first)?),
            c,
            d,
            Some(s.norm_drift),
        );
        writeln!(out, "{row}").expect("writing to a String");
    }
    Ok(out)
}
