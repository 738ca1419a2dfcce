//! XXZ chain bath, qubit–chain coupling and control Hamiltonians on the joint
//! register, and the bath eigensolver.
//!
//! Qubits occupy the low bits of a basis index and chain site `n` sits at bit
//! `n_qubits + n`. Energies are in units of J, times in units of 1/J.

mod lanczos;
pub mod operator;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use lanczos::{lowest_eigenpairs, Eigenpair};
pub use operator::{pauli, total_sz, Operator, Term};

use crate::error::{Error, Result};
use crate::kv::KeyValues;
use crate::sequence::{PulseAxis, PAULI_AXES};

/// Largest chain accepted for exact evolution unless raised explicitly.
pub const DEFAULT_MAX_SITES: usize = 20;

/// Seed for the eigensolver start vector.
pub const EIGEN_SEED: u64 = 0x0b47_5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// `ε σ_z S^z_i`, pure dephasing.
    IsingZ,
    /// `ε s·S_i` with `s = σ/2`.
    Heisenberg,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::IsingZ => "ising",
            Coupling::Heisenberg => "heisenberg",
        })
    }
}

impl FromStr for Coupling {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ising" | "isingz" | "ising_z" => Ok(Coupling::IsingZ),
            "heisenberg" => Ok(Coupling::Heisenberg),
            other => Err(format!("unknown coupling '{other}' (ising | heisenberg)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub chain_length: usize,
    /// Exchange constant in meV, used only to convert fields to pulse widths.
    pub j_mev: f64,
    pub delta: f64,
    pub coupling: Coupling,
    /// Coupling strength in units of J.
    pub epsilon: f64,
    pub qubit_sites: Vec<usize>,
    pub max_sites: usize,
}

pub const MODEL_KEYS: [&str; 8] = [
    "l",
    "j_mev",
    "delta",
    "coupling",
    "epsilon",
    "qubit_sites",
    "boundary",
    "max_sites",
];

impl ModelConfig {
    /// One qubit at the central site, Δ = 0, J = 1 meV.
    pub fn new(chain_length: usize, coupling: Coupling, epsilon: f64) -> Self {
        ModelConfig {
            chain_length,
            j_mev: 1.0,
            delta: 0.0,
            coupling,
            epsilon,
            qubit_sites: vec![chain_length / 2],
            max_sites: DEFAULT_MAX_SITES,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_sites(mut self, sites: Vec<usize>) -> Self {
        self.qubit_sites = sites;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Nearest-neighbour pair `(L/2 − 1, L/2)`.
    pub fn adjacent_pair(chain_length: usize) -> Vec<usize> {
        vec![chain_length / 2 - 1, chain_length / 2]
    }

    /// Distant pair `(L/4, 3L/4)`.
    pub fn separated_pair(chain_length: usize) -> Vec<usize> {
        vec![chain_length / 4, 3 * chain_length / 4]
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit_sites.len()
    }

    pub fn n_bits(&self) -> usize {
        self.chain_length + self.n_qubits()
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_bits()
    }

    pub fn chain_bit(&self, site: usize) -> usize {
        self.n_qubits() + site
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.chain_length;
        if l < 2 {
            return Err(Error::invalid("l", format!("chain needs at least 2 sites, got {l}")));
        }
        if l > self.max_sites {
            return Err(Error::invalid(
                "l",
                format!("{l} sites exceeds the exact-evolution cap of {}", self.max_sites),
            ));
        }
        if !(self.delta.abs() < 1.0) {
            return Err(Error::invalid("delta", format!("|Δ| must be < 1, got {}", self.delta)));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "must be finite"));
        }
        if !(self.j_mev > 0.0 && self.j_mev.is_finite()) {
            return Err(Error::invalid("j_mev", format!("must be positive, got {}", self.j_mev)));
        }
        let sites = &self.qubit_sites;
        if sites.is_empty() || sites.len() > 2 {
            return Err(Error::invalid(
                "qubit_sites",
                format!("need 1 or 2 sites, got {}", sites.len()),
            ));
        }
        if let Some(&s) = sites.iter().find(|&&s| s >= l) {
            return Err(Error::invalid("qubit_sites", format!("site {s} outside 0..{}", l - 1)));
        }
        if sites.len() == 2 && sites[0] == sites[1] {
            return Err(Error::invalid("qubit_sites", "sites must be distinct"));
        }
        Ok(())
    }

    /// Parses and validates a standalone model config.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        kv.reject_unknown(&MODEL_KEYS)?;
        Self::from_kv(&kv)
    }

    /// Reads the model keys from `kv`; validation errors carry the line of
    /// the offending key.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        if let Some((line, b)) = kv.get("boundary") {
            if !b.eq_ignore_ascii_case("open") {
                return Err(Error::Parse {
                    line,
                    reason: format!("boundary: only 'open' is supported, got '{b}'"),
                });
            }
        }
        let chain_length: usize = kv.parse_required("l")?;
        let coupling: Coupling = kv.parse_required("coupling")?;
        let epsilon: f64 = kv.parse_required("epsilon")?;
        let mut config = ModelConfig::new(chain_length, coupling, epsilon);
        if let Some(d) = kv.parse_value("delta")? {
            config.delta = d;
        }
        if let Some(j) = kv.parse_value("j_mev")? {
            config.j_mev = j;
        }
        if let Some(m) = kv.parse_value("max_sites")? {
            config.max_sites = m;
        }
        if let Some((line, v)) = kv.get("qubit_sites") {
            config.qubit_sites = match v.to_ascii_lowercase().as_str() {
                "center" => vec![chain_length / 2],
                "adjacent" if chain_length >= 2 => Self::adjacent_pair(chain_length),
                "separated" => Self::separated_pair(chain_length),
                _ => kv.parse_list("qubit_sites")?.ok_or(Error::Parse {
                    line,
                    reason: "qubit_sites: empty".into(),
                })?,
            };
        }
        config.validate().map_err(|e| match e {
            Error::Invalid { field, reason } => Error::Parse {
                line: kv.get(&field).map_or(0, |(l, _)| l),
                reason: format!("{field}: {reason}"),
            },
            other => other,
        })?;
        Ok(config)
    }

    /// `key = value` lines that [`ModelConfig::from_kv`] reads back exactly.
    pub fn to_kv_lines(&self) -> String {
        let sites: Vec<String> = self.qubit_sites.iter().map(|s| s.to_string()).collect();
        format!(
            "l = {}\nj_mev = {:?}\ndelta = {:?}\ncoupling = {}\nepsilon = {:?}\nqubit_sites = {}\nboundary = open\nmax_sites = {}\n",
            self.chain_length,
            self.j_mev,
            self.delta,
            self.coupling,
            self.epsilon,
            sites.join(","),
            self.max_sites
        )
    }
}

/// `J Σ (SˣSˣ + SʸSʸ + Δ SᶻSᶻ)` on a bare chain of `l` sites (open ends).
pub fn chain_hamiltonian(l: usize, delta: f64) -> Operator {
    let mut op = Operator::zero(l);
    for n in 0..l.saturating_sub(1) {
        for (ax, c) in [(PulseAxis::X, 0.25), (PulseAxis::Y, 0.25), (PulseAxis::Z, 0.25 * delta)] {
            op.push(Term::pauli_pair(n, ax, n + 1, ax, c));
        }
    }
    op
}

/// Bath Hamiltonian on the joint register (identity on the qubits).
pub fn build_bath(config: &ModelConfig) -> Result<Operator> {
    config.validate()?;
    Ok(chain_hamiltonian(config.chain_length, config.delta).shifted(config.n_qubits(), config.n_bits()))
}

/// Qubit–chain coupling on the joint register.
pub fn build_interaction(config: &ModelConfig) -> Result<Operator> {
    config.validate()?;
    let mut op = Operator::zero(config.n_bits());
    for (q, &site) in config.qubit_sites.iter().enumerate() {
        let b = config.chain_bit(site);
        match config.coupling {
            // σ_z (±1) times S^z = σ^z/2.
            Coupling::IsingZ => op.push(Term::pauli_pair(q, PulseAxis::Z, b, PulseAxis::Z, 0.5 * config.epsilon)),
            Coupling::Heisenberg => {
                for ax in PAULI_AXES {
                    op.push(Term::pauli_pair(q, ax, b, ax, 0.25 * config.epsilon));
                }
            }
        }
    }
    Ok(op)
}

/// `H_bath + H_int`.
pub fn build_hamiltonian(config: &ModelConfig) -> Result<Operator> {
    Ok(build_bath(config)?.plus(&build_interaction(config)?))
}

/// `A s·n̂` on qubit `qubit`; a π rotation needs `A τ_p = π`.
pub fn build_control(config: &ModelConfig, axis: PulseAxis, qubit: usize, amplitude: f64) -> Result<Operator> {
    if !axis.is_pauli() {
        return Err(Error::invalid("axis", "control axis must be x, y or z"));
    }
    if qubit >= config.n_qubits() {
        return Err(Error::invalid(
            "qubit",
            format!("index {qubit} but model has {} qubit(s)", config.n_qubits()),
        ));
    }
    let mut op = Operator::zero(config.n_bits());
    op.push(Term::One {
        bit: qubit,
        m: pauli(axis) * C64::from(0.5 * amplitude),
    });
    Ok(op)
}

/// Lowest `n_states` eigenpairs of the bare chain.
pub fn ground_state(config: &ModelConfig, n_states: usize) -> Result<Vec<Eigenpair>> {
    config.validate()?;
    lowest_eigenpairs(
        &chain_hamiltonian(config.chain_length, config.delta),
        n_states,
        EIGEN_SEED,
    )
}

/// `Jτ_p = 10π J[meV] / B[T]`.
pub fn pulse_width_from_field(j_mev: f64, b_tesla: f64) -> Result<f64> {
    if !(b_tesla > 0.0) || !b_tesla.is_finite() {
        return Err(Error::invalid(
            "field_tesla",
            format!("must be positive, got {b_tesla}"),
        ));
    }
    if !(j_mev > 0.0) {
        return Err(Error::invalid("j_mev", format!("must be positive, got {j_mev}")));
    }
    Ok(10.0 * std::f64::consts::PI * j_mev / b_tesla)
}
