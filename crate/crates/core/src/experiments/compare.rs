//! Ranking sequences across a field sweep, and the bath initial-state check.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::ExperimentSpec;
use crate::dynamics::{
    evolve_sequence, n_op, prepare_state, run_periodic, trajectory_csv, NOp, Observable, Propagator, QuantumState,
    ReducedDensity, Schedule,
};
use crate::error::{Error, Result};
use crate::model::ModelConfig;

/// One sequence at one field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub field_tesla: Option<f64>,
    pub sequence: String,
    pub pulse_width: f64,
    pub period: f64,
    /// Observable after the first cycle, e.g. `L(T_c)`.
    pub first_cycle: f64,
    pub n_op: NOp,
    /// Trapezoidal area under the stroboscopic series, in cycles.
    pub area: f64,
    /// Rank within its field, 1 = best.
    pub rank: usize,
}

/// The leader under `measure` changes between two neighbouring fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub measure: String,
    pub field_low: f64,
    pub field_high: f64,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ranking {
    /// Sorted by field, then rank.
    pub points: Vec<SweepPoint>,
    pub crossovers: Vec<Crossover>,
}

fn area(series: &[f64]) -> f64 {
    series.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum()
}

fn n_op_key(n: NOp) -> usize {
    match n {
        NOp::Reached { cycles, .. } => cycles,
        NOp::NotReached => usize::MAX,
    }
}

/// Better first: larger N_op, then larger area, then name.
fn by_merit(a: &SweepPoint, b: &SweepPoint) -> Ordering {
    n_op_key(b.n_op)
        .cmp(&n_op_key(a.n_op))
        .then(b.area.total_cmp(&a.area))
        .then(a.sequence.cmp(&b.sequence))
}

fn same_field(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        (None, None) => true,
        _ => false,
    }
}

/// Runs each spec's stroboscopic series and ranks the sequences at every
/// field by N_op, breaking ties by the area under the series. All specs must
/// share the model, observable, initial state and cycle count.
pub fn compare_sequences(specs: &[ExperimentSpec]) -> Result<Ranking> {
    let Some(first) = specs.first() else {
        return Err(Error::invalid("sequences", "nothing to compare"));
    };
    for s in specs {
        if s.model != first.model {
            return Err(Error::invalid("model", "specs to compare must share the model"));
        }
        if s.observable != first.observable {
            return Err(Error::invalid(
                "observable",
                "specs to compare must share the observable",
            ));
        }
        if s.initial != first.initial || s.bath_level != first.bath_level || s.cycles != first.cycles {
            return Err(Error::invalid(
                "initial",
                "specs to compare must share the initial state and cycle count",
            ));
        }
    }
    let initial = prepare_state(&first.model, first.initial, first.bath_level).map_err(|e| e.in_field("initial"))?;
    let mut points = specs
        .par_iter()
        .map(|s| sweep_point(s, &initial))
        .collect::<Result<Vec<SweepPoint>>>()?;
    points.sort_by(|a, b| {
        let fa = a.field_tesla.unwrap_or(0.0);
        let fb = b.field_tesla.unwrap_or(0.0);
        fa.total_cmp(&fb).then(by_merit(a, b))
    });
    let mut start = 0;
    while start < points.len() {
        let mut end = start;
        while end < points.len() && same_field(points[end].field_tesla, points[start].field_tesla) {
            end += 1;
        }
        for (i, p) in points[start..end].iter_mut().enumerate() {
            p.rank = i + 1;
        }
        start = end;
    }
    let crossovers = [
        leader_changes(&points, "n_op", |p| p.rank == 1),
        leader_changes(&points, "first_cycle", |_| true),
    ]
    .concat();
    Ok(Ranking { points, crossovers })
}

/// Fields in ascending order with the leading sequence under `measure`.
fn leaders(points: &[SweepPoint], measure: &str, candidate: impl Fn(&SweepPoint) -> bool) -> Vec<(f64, String)> {
    let mut fields: Vec<f64> = points.iter().filter_map(|p| p.field_tesla).collect();
    fields.dedup();
    fields
        .into_iter()
        .filter_map(|f| {
            let at: Vec<&SweepPoint> = points
                .iter()
                .filter(|p| p.field_tesla == Some(f) && candidate(p))
                .collect();
            let best = if measure == "n_op" {
                at.first().copied()
            } else {
                at.iter().copied().max_by(|a, b| {
                    a.first_cycle
                        .total_cmp(&b.first_cycle)
                        .then(b.sequence.cmp(&a.sequence))
                })
            };
            best.map(|p| (f, p.sequence.clone()))
        })
        .collect()
}

fn leader_changes(points: &[SweepPoint], measure: &str, candidate: impl Fn(&SweepPoint) -> bool) -> Vec<Crossover> {
    leaders(points, measure, candidate)
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| Crossover {
            measure: measure.to_string(),
            field_low: w[0].0,
            field_high: w[1].0,
            from: w[0].1.clone(),
            to: w[1].1.clone(),
        })
        .collect()
}

/// Lowest field from which `winner` beats `loser` on the first-cycle value
/// at every field up to the end of the sweep, provided it does not win at
/// the lowest field. `None` if there is no such single crossing.
pub fn single_crossing(points: &[SweepPoint], winner: &str, loser: &str) -> Option<f64> {
    let mut fields: Vec<f64> = points.iter().filter_map(|p| p.field_tesla).collect();
    fields.dedup();
    let value = |f: f64, name: &str| {
        points
            .iter()
            .find(|p| p.field_tesla == Some(f) && p.sequence == name)
            .map(|p| p.first_cycle)
    };
    let wins: Vec<bool> = fields
        .iter()
        .map(|&f| Some(value(f, winner)? > value(f, loser)?))
        .collect::<Option<Vec<bool>>>()?;
    let first_win = wins.iter().position(|&w| w)?;
    if first_win == 0 || !wins[first_win..].iter().all(|&w| w) {
        return None;
    }
    Some(fields[first_win])
}

fn sweep_point(spec: &ExperimentSpec, initial: &QuantumState) -> Result<SweepPoint> {
    let schedule = spec.schedule()?;
    let propagator = spec.propagator()?;
    let samples = run_periodic(initial, &schedule, &spec.model, &propagator)?;
    let series = samples
        .iter()
        .map(|s| spec.observable.value(&s.rho))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepPoint {
        field_tesla: spec.field_tesla,
        sequence: spec.sequence.to_string(),
        pulse_width: schedule.seq.pulse_width(),
        period: schedule.cycle_length(),
        first_cycle: series.get(1).copied().unwrap_or(f64::NAN),
        n_op: n_op(&series),
        area: area(&series),
        rank: 0,
    })
}

/// Echo curves from the bath ground state and first excited state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitialStateReport {
    pub max_abs_delta: f64,
    /// Largest `1 − L` on the ground-state curve.
    pub max_decay: f64,
    /// `max_abs_delta / max_decay`; zero when nothing decays beyond roundoff.
    pub ratio: f64,
    /// File names for the ground and excited curves.
    pub csv_paths: [String; 2],
    #[serde(skip)]
    pub csv: [String; 2],
}

/// Runs the same echo schedule from `|+x⟩ ⊗ |E₀⟩` and `|+x⟩ ⊗ |E₁⟩`.
pub fn initial_state_check(
    model: &ModelConfig,
    schedule: &Schedule,
    propagator: &Propagator,
    sample_every: Option<f64>,
) -> Result<InitialStateReport> {
    let run = |level: usize| -> Result<(Vec<f64>, String)> {
        let init = prepare_state(model, crate::dynamics::QubitInit::PlusX, level)?;
        let ev = evolve_sequence(&init, schedule, model, propagator, sample_every)?;
        let echo = ev
            .samples
            .iter()
            .map(|s| Observable::Echo.value(&s.rho))
            .collect::<Result<Vec<f64>>>()?;
        let reference = ReducedDensity::pure(&crate::dynamics::QubitInit::PlusX.amplitudes());
        Ok((echo, trajectory_csv(&ev.samples, Some(&reference))?))
    };
    let (ground, ground_csv) = run(0)?;
    let (excited, excited_csv) = run(1)?;
    let max_abs_delta = ground
        .iter()
        .zip(&excited)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let max_decay = ground.iter().map(|l| 1.0 - l).fold(0.0, f64::max);
    Ok(InitialStateReport {
        max_abs_delta,
        max_decay,
        ratio: if max_decay > 1e-12 {
            max_abs_delta / max_decay
        } else {
            0.0
        },
        csv_paths: ["trajectory_ground.csv".into(), "trajectory_excited.csv".into()],
        csv: [ground_csv, excited_csv],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PulseMode;
    use crate::experiments::spec::{ExperimentKind, PeriodChoice};
    use crate::model::Coupling;
    use crate::sequence::catalog_sequence;

    fn point(field: f64, name: &str, first: f64) -> SweepPoint {
        SweepPoint {
            field_tesla: Some(field),
            sequence: name.into(),
            pulse_width: 0.0,
            period: 1.0,
            first_cycle: first,
            n_op: NOp::NotReached,
            area: 0.0,
            rank: 0,
        }
    }

    #[test]
    fn single_crossing_detection() {
        let pts = vec![
            point(10.0, "a", 0.5),
            point(10.0, "b", 0.4),
            point(20.0, "a", 0.5),
            point(20.0, "b", 0.6),
            point(30.0, "a", 0.5),
            point(30.0, "b", 0.7),
        ];
        assert_eq!(single_crossing(&pts, "b", "a"), Some(20.0));
        assert_eq!(single_crossing(&pts, "a", "b"), None);
        let mut back = pts.clone();
        back[5].first_cycle = 0.1;
        assert_eq!(single_crossing(&back, "b", "a"), None);
    }

    fn small_spec(seq: &str) -> ExperimentSpec {
        let mut s = ExperimentSpec::new(
            ExperimentKind::EffectiveDynamics,
            ModelConfig::new(4, Coupling::Heisenberg, -0.3),
        );
        s.sequence = seq.parse().unwrap();
        s.period = PeriodChoice::Fixed(0.5);
        s.cycles = 3;
        s
    }

    #[test]
    fn ranking_is_deterministic_and_prefers_decoupling() {
        let specs: Vec<ExperimentSpec> = ["free", "m1_xz", "m2_xzxzxz"].iter().map(|s| small_spec(s)).collect();
        let a = compare_sequences(&specs).unwrap();
        let b = compare_sequences(&specs).unwrap();
        let names = |r: &Ranking| {
            r.points
                .iter()
                .map(|p| (p.sequence.clone(), p.rank))
                .collect::<Vec<_>>()
        };
        assert_eq!(names(&a), names(&b));
        let free = a.points.iter().find(|p| p.sequence == "free").unwrap();
        assert_eq!(free.rank, 3);
    }

    #[test]
    fn incompatible_specs_rejected() {
        let mut other = small_spec("m1_xz");
        other.observable = Observable::SigmaZ;
        assert!(compare_sequences(&[small_spec("free"), other]).is_err());
        assert!(compare_sequences(&[]).is_err());
    }

    #[test]
    fn zero_coupling_gives_identical_bath_curves() {
        let model = ModelConfig::new(6, Coupling::Heisenberg, 0.0);
        let seq = catalog_sequence::<f64>("m1_xz").unwrap().with_period(1.0);
        let sched = Schedule::new(seq, PulseMode::Ideal);
        let r = initial_state_check(&model, &sched, &Propagator::krylov(), Some(0.1)).unwrap();
        assert!(r.max_abs_delta < 1e-12);
        assert_eq!(r.ratio, 0.0);
    }
}
