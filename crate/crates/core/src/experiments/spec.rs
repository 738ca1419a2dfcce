//! Experiment specs and their flat `key = value` form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DeltaNorm, DeviationPart, Insertion, Observable, Propagator, PulseMode, QubitInit, Schedule};
use crate::error::{Error, Result};
use crate::kv::KeyValues;
use crate::model::{pulse_width_from_field, Coupling, ModelConfig, MODEL_KEYS};
use crate::sequence::{catalog_sequence, parse_axes, qdd_sequence, udd_sequence, DdSequence, PulseAxis, SolverConfig};
use crate::Sequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    DeriveSequences,
    EchoCurve,
    ConcurrenceCurve,
    RelaxationCurve,
    InsertionComparison,
    EffectiveDynamics,
    NopSweep,
    OracleCrossCheck,
    SlopeCheck,
}

const KIND_NAMES: [(ExperimentKind, &str); 9] = [
    (ExperimentKind::DeriveSequences, "derive_sequences"),
    (ExperimentKind::EchoCurve, "echo_curve"),
    (ExperimentKind::ConcurrenceCurve, "concurrence_curve"),
    (ExperimentKind::RelaxationCurve, "relaxation_curve"),
    (ExperimentKind::InsertionComparison, "insertion_comparison"),
    (ExperimentKind::EffectiveDynamics, "effective_dynamics"),
    (ExperimentKind::NopSweep, "nop_sweep"),
    (ExperimentKind::OracleCrossCheck, "oracle_cross_check"),
    (ExperimentKind::SlopeCheck, "slope_check"),
];

impl ExperimentKind {
    pub fn all() -> impl Iterator<Item = ExperimentKind> {
        KIND_NAMES.iter().map(|(k, _)| *k)
    }

    /// CLI verb that runs this kind.
    pub fn verb(self) -> &'static str {
        match self {
            ExperimentKind::DeriveSequences => "derive",
            ExperimentKind::NopSweep => "sweep",
            ExperimentKind::OracleCrossCheck => "crosscheck",
            ExperimentKind::SlopeCheck => "slope",
            _ => "simulate",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = KIND_NAMES
            .iter()
            .find(|(k, _)| k == self)
            .map(|(_, n)| *n)
            .unwrap_or("?");
        f.write_str(name)
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.to_ascii_lowercase();
        KIND_NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(k, _)| *k)
            .ok_or_else(|| format!("unknown experiment kind '{s}'"))
    }
}

/// Where a sequence comes from: `free`, a catalog name, `udd<N>_<axis>` or
/// `qdd<N>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceChoice {
    Free,
    Catalog(String),
    Udd { n: usize, axis: PulseAxis },
    Qdd { n: usize },
}

impl SequenceChoice {
    /// The sequence on a unit period with ideal pulses.
    pub fn build(&self) -> Result<Sequence> {
        match self {
            SequenceChoice::Free => DdSequence::new(vec![], vec![1.0]),
            SequenceChoice::Catalog(name) => catalog_sequence(name),
            SequenceChoice::Udd { n, axis } => udd_sequence(*n, 1.0, *axis),
            SequenceChoice::Qdd { n } => qdd_sequence(*n, 1.0),
        }
    }
}

impl fmt::Display for SequenceChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceChoice::Free => f.write_str("free"),
            SequenceChoice::Catalog(name) => f.write_str(name),
            SequenceChoice::Udd { n, axis } => write!(f, "udd{n}_{axis}"),
            SequenceChoice::Qdd { n } => write!(f, "qdd{n}"),
        }
    }
}

impl FromStr for SequenceChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if s == "free" {
            return Ok(SequenceChoice::Free);
        }
        if let Some(rest) = s.strip_prefix("udd") {
            let (n, axis) = rest.split_once('_').unwrap_or((rest, "x"));
            let n = n.parse().map_err(|_| format!("bad UDD order in '{s}'"))?;
            let axis = axis.parse().map_err(|e: Error| e.to_string())?;
            return Ok(SequenceChoice::Udd { n, axis });
        }
        if let Some(rest) = s.strip_prefix("qdd") {
            let n = rest.parse().map_err(|_| format!("bad QDD order in '{s}'"))?;
            return Ok(SequenceChoice::Qdd { n });
        }
        crate::sequence::catalog_entry(&s).map_err(|e| e.to_string())?;
        Ok(SequenceChoice::Catalog(s))
    }
}

/// Cycle length: a number in units of 1/J, or `t_c`, the shortest period at
/// which the finite pulses fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PeriodChoice {
    Fixed(f64),
    Critical,
}

impl fmt::Display for PeriodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodChoice::Fixed(t) => write!(f, "{t:?}"),
            PeriodChoice::Critical => f.write_str("t_c"),
        }
    }
}

impl FromStr for PeriodChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("t_c") {
            return Ok(PeriodChoice::Critical);
        }
        s.parse::<f64>()
            .map(PeriodChoice::Fixed)
            .map_err(|_| format!("expected a number or 't_c', got '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropagatorChoice {
    Krylov,
    Trotter,
}

impl fmt::Display for PropagatorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropagatorChoice::Krylov => "krylov",
            PropagatorChoice::Trotter => "trotter",
        })
    }
}

impl FromStr for PropagatorChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "krylov" => Ok(PropagatorChoice::Krylov),
            "trotter" => Ok(PropagatorChoice::Trotter),
            other => Err(format!("unknown propagator '{other}'")),
        }
    }
}

fn norm_text(n: DeltaNorm) -> &'static str {
    match n {
        DeltaNorm::Spectral => "spectral",
        DeltaNorm::Frobenius => "frobenius",
    }
}

fn part_text(p: DeviationPart) -> &'static str {
    match p {
        DeviationPart::Full => "full",
        DeviationPart::Coupling => "coupling",
    }
}

/// One experiment. Keys not used by `kind` keep their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub model: ModelConfig,

    // schedule
    pub sequence: SequenceChoice,
    pub mode: PulseMode,
    pub period: PeriodChoice,
    /// Field that sets `τ_p`; required for finite pulses and for `t_c`.
    pub field_tesla: Option<f64>,
    pub insertion: Insertion,
    pub theta: f64,
    pub cycles: usize,
    pub initial: QubitInit,
    pub bath_level: usize,
    pub propagator: PropagatorChoice,
    pub dt: f64,
    /// Grid spacing for within-cycle samples.
    pub sample_every: Option<f64>,
    pub observable: Observable,

    // sweeps
    pub sequences: Vec<SequenceChoice>,
    pub fields: Vec<f64>,
    pub thetas: Vec<f64>,

    // derivation
    pub order: u8,
    pub pattern: Option<String>,
    pub starts: usize,
    pub seed: u64,

    // oracle and fits
    pub chain_lengths: Vec<usize>,
    pub t_max: f64,
    pub tolerance: f64,
    pub fit_window: f64,
    pub bath_check: bool,

    // slope
    pub t_min: f64,
    pub points: usize,
    pub norm: DeltaNorm,
    pub part: DeviationPart,
}

pub const SPEC_KEYS: [&str; 30] = [
    "kind",
    "sequence",
    "mode",
    "period",
    "field_tesla",
    "insertion",
    "theta",
    "cycles",
    "initial",
    "bath_level",
    "propagator",
    "dt",
    "sample_every",
    "observable",
    "sequences",
    "fields",
    "thetas",
    "order",
    "pattern",
    "starts",
    "seed",
    "chain_lengths",
    "t_max",
    "tolerance",
    "fit_window",
    "bath_check",
    "t_min",
    "points",
    "norm",
    "part",
];

impl ExperimentSpec {
    /// Defaults for `kind` on `model`.
    pub fn new(kind: ExperimentKind, model: ModelConfig) -> Self {
        let solver = SolverConfig::<f64>::default();
        ExperimentSpec {
            kind,
            model,
            sequence: SequenceChoice::Free,
            mode: PulseMode::Ideal,
            period: PeriodChoice::Fixed(1.0),
            field_tesla: None,
            insertion: Insertion::None,
            theta: 0.0,
            cycles: 1,
            initial: QubitInit::PlusX,
            bath_level: 0,
            propagator: PropagatorChoice::Krylov,
            dt: 0.005,
            sample_every: None,
            observable: Observable::Echo,
            sequences: Vec::new(),
            fields: Vec::new(),
            thetas: Vec::new(),
            order: 1,
            pattern: None,
            starts: solver.starts,
            seed: solver.seed,
            chain_lengths: Vec::new(),
            t_max: 2.0,
            tolerance: 1e-5,
            fit_window: 0.1,
            bath_check: false,
            t_min: 1e-3,
            points: 9,
            norm: DeltaNorm::Spectral,
            part: DeviationPart::Full,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let known: Vec<&str> = SPEC_KEYS.iter().chain(MODEL_KEYS.iter()).copied().collect();
        kv.reject_unknown(&known)?;
        let kind: ExperimentKind = kv.parse_required("kind")?;
        let model = ModelConfig::from_kv(&kv)?;
        let mut s = ExperimentSpec::new(kind, model);
        macro_rules! read {
            ($field:ident) => {
                if let Some(v) = kv.parse_value(stringify!($field))? {
                    s.$field = v;
                }
            };
        }
        macro_rules! list {
            ($field:ident) => {
                if let Some(v) = kv.parse_list(stringify!($field))? {
                    s.$field = v;
                }
            };
        }
        read!(sequence);
        read!(mode);
        read!(period);
        s.field_tesla = kv.parse_value("field_tesla")?;
        read!(insertion);
        read!(theta);
        read!(cycles);
        read!(initial);
        read!(bath_level);
        read!(propagator);
        read!(dt);
        s.sample_every = kv.parse_value("sample_every")?;
        read!(observable);
        list!(sequences);
        list!(fields);
        list!(thetas);
        read!(order);
        s.pattern = kv.get("pattern").map(|(_, v)| v.to_ascii_lowercase());
        read!(starts);
        read!(seed);
        list!(chain_lengths);
        read!(t_max);
        read!(tolerance);
        read!(fit_window);
        read!(bath_check);
        read!(t_min);
        read!(points);
        if let Some((line, v)) = kv.get("norm") {
            s.norm = match v.to_ascii_lowercase().as_str() {
                "spectral" => DeltaNorm::Spectral,
                "frobenius" => DeltaNorm::Frobenius,
                _ => {
                    return Err(Error::Parse {
                        line,
                        reason: format!("norm: unknown value '{v}'"),
                    })
                }
            };
        }
        if let Some((line, v)) = kv.get("part") {
            s.part = match v.to_ascii_lowercase().as_str() {
                "full" => DeviationPart::Full,
                "coupling" => DeviationPart::Coupling,
                _ => {
                    return Err(Error::Parse {
                        line,
                        reason: format!("part: unknown value '{v}'"),
                    })
                }
            };
        }
        s.validate().map_err(|e| match e {
            Error::Invalid { field, reason } => Error::Parse {
                line: kv.get(field.split('.').next().unwrap_or("")).map_or(0, |(l, _)| l),
                reason: format!("{field}: {reason}"),
            },
            other => other,
        })?;
        Ok(s)
    }

    /// Canonical text; [`ExperimentSpec::parse`] reads it back exactly.
    pub fn to_text(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        }
        fn join_f(v: &[f64]) -> String {
            v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
        }
        let mut out = format!("kind = {}\n", self.kind);
        out += &self.model.to_kv_lines();
        let mut line = |k: &str, v: String| {
            out += &format!("{k} = {v}\n");
        };
        line("sequence", self.sequence.to_string());
        line("mode", self.mode.to_string());
        line("period", self.period.to_string());
        if let Some(b) = self.field_tesla {
            line("field_tesla", format!("{b:?}"));
        }
        line("insertion", self.insertion.to_string());
        line("theta", format!("{:?}", self.theta));
        line("cycles", self.cycles.to_string());
        line("initial", self.initial.to_string());
        line("bath_level", self.bath_level.to_string());
        line("propagator", self.propagator.to_string());
        line("dt", format!("{:?}", self.dt));
        if let Some(dt) = self.sample_every {
            line("sample_every", format!("{dt:?}"));
        }
        line("observable", self.observable.to_string());
        if !self.sequences.is_empty() {
            line("sequences", join(&self.sequences));
        }
        if !self.fields.is_empty() {
            line("fields", join_f(&self.fields));
        }
        if !self.thetas.is_empty() {
            line("thetas", join_f(&self.thetas));
        }
        line("order", self.order.to_string());
        if let Some(p) = &self.pattern {
            line("pattern", p.clone());
        }
        line("starts", self.starts.to_string());
        line("seed", self.seed.to_string());
        if !self.chain_lengths.is_empty() {
            line("chain_lengths", join(&self.chain_lengths));
        }
        line("t_max", format!("{:?}", self.t_max));
        line("tolerance", format!("{:?}", self.tolerance));
        line("fit_window", format!("{:?}", self.fit_window));
        line("bath_check", self.bath_check.to_string());
        line("t_min", format!("{:?}", self.t_min));
        line("points", self.points.to_string());
        line("norm", norm_text(self.norm).into());
        line("part", part_text(self.part).into());
        out
    }

    /// Checks the keys `kind` relies on.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        self.model.validate().map_err(|e| e.in_field("model"))?;
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {x}")))
            }
        };
        if let Some(b) = self.field_tesla {
            positive("field_tesla", b)?;
        }
        for &b in &self.fields {
            positive("fields", b)?;
        }
        if let PeriodChoice::Fixed(t) = self.period {
            positive("period", t)?;
        }
        if let Some(dt) = self.sample_every {
            positive("sample_every", dt)?;
        }
        if self.propagator == PropagatorChoice::Trotter {
            Propagator::trotter(self.dt)?;
        }
        if self.cycles == 0 {
            return Err(Error::invalid("cycles", "need at least one cycle"));
        }
        if !self.theta.is_finite() || self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("theta", "must be finite"));
        }
        let needs_field = self.mode == PulseMode::FiniteWidth || self.period == PeriodChoice::Critical;
        if needs_field && self.field_tesla.is_none() && self.kind != NopSweep {
            return Err(Error::invalid(
                "field_tesla",
                "finite pulses and period = t_c need a field",
            ));
        }
        if self.initial.n_qubits() != self.model.n_qubits() && self.kind != DeriveSequences {
            return Err(Error::invalid(
                "initial",
                format!(
                    "'{}' needs {} qubit(s), qubit_sites has {}",
                    self.initial,
                    self.initial.n_qubits(),
                    self.model.n_qubits()
                ),
            ));
        }
        match self.kind {
            DeriveSequences => {
                if !(1..=3).contains(&self.order) {
                    return Err(Error::invalid("order", "supported orders are 1, 2 and 3"));
                }
                if let Some(p) = &self.pattern {
                    if p != "census" {
                        parse_axes(p)?;
                    }
                }
                if self.starts == 0 {
                    return Err(Error::invalid("starts", "need at least one start"));
                }
            }
            EchoCurve | RelaxationCurve => {
                if self.model.n_qubits() != 1 {
                    return Err(Error::invalid("qubit_sites", "single-qubit curve needs one site"));
                }
            }
            ConcurrenceCurve => {
                if self.model.n_qubits() != 2 {
                    return Err(Error::invalid("qubit_sites", "concurrence needs two sites"));
                }
            }
            InsertionComparison => {
                if self.model.n_qubits() != 1 {
                    return Err(Error::invalid("qubit_sites", "insertion comparison uses one qubit"));
                }
                if self.thetas.is_empty() {
                    return Err(Error::invalid("thetas", "list at least one angle"));
                }
            }
            EffectiveDynamics => {}
            NopSweep => {
                if self.sequences.is_empty() {
                    return Err(Error::invalid("sequences", "list at least one sequence"));
                }
                if needs_field && self.fields.is_empty() && self.field_tesla.is_none() {
                    return Err(Error::invalid("fields", "finite pulses need at least one field"));
                }
            }
            OracleCrossCheck => {
                if self.model.coupling != Coupling::IsingZ || self.model.delta != 0.0 {
                    return Err(Error::invalid(
                        "coupling",
                        "the determinant oracle needs Ising coupling and delta = 0",
                    ));
                }
                if self.model.n_qubits() != 1 {
                    return Err(Error::invalid("qubit_sites", "the oracle handles one qubit"));
                }
                if self
                    .chain_lengths
                    .iter()
                    .any(|&l| l < 2 || l % 2 == 1 || l > self.model.max_sites)
                {
                    return Err(Error::invalid(
                        "chain_lengths",
                        format!("need even lengths in 2..={}", self.model.max_sites),
                    ));
                }
                positive("t_max", self.t_max)?;
                positive("tolerance", self.tolerance)?;
            }
            SlopeCheck => {
                positive("t_min", self.t_min)?;
                if !(self.t_max > self.t_min) {
                    return Err(Error::invalid("t_max", "must exceed t_min"));
                }
                if self.points < 3 {
                    return Err(Error::invalid("points", "need at least 3"));
                }
            }
        }
        Ok(())
    }

    /// Pulse width set by `field_tesla`, or zero.
    pub fn pulse_width(&self, field: Option<f64>) -> Result<f64> {
        match field {
            Some(b) => pulse_width_from_field(self.model.j_mev, b),
            None => Ok(0.0),
        }
    }

    /// Schedule for `choice` at the given field, resolving `t_c`.
    pub fn schedule_for(&self, choice: &SequenceChoice, field: Option<f64>) -> Result<Schedule> {
        let tau = self.pulse_width(field).map_err(|e| e.in_field("field_tesla"))?;
        let seq = choice
            .build()
            .map_err(|e| e.in_field("sequence"))?
            .with_pulse_width(tau);
        let period = match self.period {
            PeriodChoice::Fixed(t) => t,
            PeriodChoice::Critical => {
                if tau == 0.0 {
                    return Err(Error::invalid("period", "t_c needs a field"));
                }
                seq.minimum_period()
            }
        };
        let sched = Schedule::new(seq.with_period(period), self.mode)
            .with_insertion(self.insertion, self.theta)
            .with_cycles(self.cycles);
        sched.validate().map_err(|e| e.in_field("schedule"))?;
        Ok(sched)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        self.schedule_for(&self.sequence, self.field_tesla)
    }

    pub fn propagator(&self) -> Result<Propagator> {
        Ok(match self.propagator {
            PropagatorChoice::Krylov => Propagator::krylov(),
            PropagatorChoice::Trotter => Propagator::trotter(self.dt)?,
        })
    }
}
