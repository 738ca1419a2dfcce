//! Dispatching an [`ExperimentSpec`] and writing its outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::compare::{compare_sequences, initial_state_check, Ranking};
use super::spec::{ExperimentKind, ExperimentSpec, SequenceChoice};
use crate::dynamics::{
    evolve_sequence, log_grid, n_op, prepare_state, rotation, run_periodic, suppression_slope_with, trace_distance,
    trajectory_csv, Insertion, NOp, PulseMode, ReducedDensity, SlopeOptions,
};
use crate::error::{Error, Result};
use crate::free_fermion::{fit_alpha, loschmidt_curve, short_time_alpha, Reference};
use crate::model::{Coupling, ModelConfig};
use crate::sequence::record::to_record;
use crate::sequence::{census, parse_axes, solve_intervals, verify_order, PulseAxis, SolverConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One pass/fail line of the tolerance report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceCheck {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl ToleranceCheck {
    pub fn within(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = value.is_finite() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        ToleranceCheck {
            name: name.into(),
            value,
            lower,
            upper,
            passed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    /// SHA-256 of the canonical spec text.
    pub spec_hash: String,
    pub version: String,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    /// Output files relative to the output directory, in write order.
    pub outputs: Vec<String>,
    pub tolerance_report: Vec<ToleranceCheck>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn all_passed(&self) -> bool {
        self.tolerance_report.iter().all(|c| c.passed)
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub checks: Vec<ToleranceCheck>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

pub fn spec_hash(spec: &ExperimentSpec) -> String {
    Sha256::digest(spec.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid("out", format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs `spec`, writes its CSV files into `out_dir`, then the manifest.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunManifest> {
    spec.validate()?;
    let start = Instant::now();
    let outcome = execute(spec)?;
    let compute = start.elapsed().as_secs_f64();
    fs::create_dir_all(out_dir)?;
    let write_start = Instant::now();
    for (name, contents) in &outcome.files {
        write_atomic(&out_dir.join(name), contents)?;
    }
    write_atomic(&out_dir.join("spec.txt"), &spec.to_text())?;
    let mut outputs: Vec<String> = outcome.files.iter().map(|(n, _)| n.clone()).collect();
    outputs.push("spec.txt".into());
    let mut timings = BTreeMap::new();
    timings.insert("compute_s".to_string(), compute);
    timings.insert("write_s".to_string(), write_start.elapsed().as_secs_f64());
    let manifest = RunManifest {
        kind: spec.kind.to_string(),
        spec_hash: spec_hash(spec),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timings,
        outputs,
        tolerance_report: outcome.checks,
        metrics: outcome.metrics,
        notes: outcome.notes,
    };
    write_atomic(&out_dir.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Computes all outputs of `spec` in memory.
pub fn execute(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::DeriveSequences => derive(spec),
        ExperimentKind::EchoCurve | ExperimentKind::RelaxationCurve | ExperimentKind::ConcurrenceCurve => curve(spec),
        ExperimentKind::InsertionComparison => insertion(spec),
        ExperimentKind::EffectiveDynamics => effective(spec),
        ExperimentKind::NopSweep => nop_sweep(spec),
        ExperimentKind::OracleCrossCheck => crosscheck(spec),
        ExperimentKind::SlopeCheck => slope(spec),
    }
}

fn e(x: f64) -> String {
    format!("{x:.12e}")
}

fn default_pattern(order: u8) -> String {
    match order {
        1 => "xzx".into(),
        2 => "xzxzxz".into(),
        _ => "xz".repeat(6),
    }
}

fn derive(spec: &ExperimentSpec) -> Result<Outcome> {
    let config = SolverConfig::<f64> {
        starts: spec.starts,
        seed: spec.seed,
        ..SolverConfig::default()
    };
    let pattern = spec.pattern.clone().unwrap_or_else(|| default_pattern(spec.order));
    let solutions = if pattern == "census" {
        census(spec.order, &config)
            .map_err(|e| e.in_field("order"))?
            .into_iter()
            .flat_map(|c| c.solutions)
            .collect()
    } else {
        let axes = parse_axes(&pattern).map_err(|e| e.in_field("pattern"))?;
        solve_intervals(spec.order, &axes, &config)?
    };
    let mut out = Outcome::default();
    let mut csv = String::from("solution,pattern,parity,interval,alpha\n");
    let mut summary = String::from("solution,pattern,parity,verified_order\n");
    for (i, seq) in solutions.iter().enumerate() {
        for (k, a) in seq.alphas().iter().enumerate() {
            writeln!(csv, "{i},{},{},{},{a:.15}", seq.pattern(), seq.parity(), k + 1).unwrap();
        }
        let order = verify_order(seq);
        writeln!(summary, "{i},{},{},{order}", seq.pattern(), seq.parity()).unwrap();
        out.checks.push(ToleranceCheck::within(
            format!("solution_{i}_order"),
            order as f64,
            Some(spec.order as f64),
            None,
        ));
        out.files
            .push((format!("solution_{i}.seq"), to_record(seq, spec.order)));
    }
    out.files.insert(0, ("summary.csv".into(), summary));
    out.files.insert(0, ("solutions.csv".into(), csv));
    out.metrics.insert("solutions".into(), solutions.len() as f64);
    if solutions.is_empty() {
        out.notes.push(format!(
            "no positive root for pattern '{pattern}' at order {}",
            spec.order
        ));
    }
    Ok(out)
}

fn curve(spec: &ExperimentSpec) -> Result<Outcome> {
    let schedule = spec.schedule()?;
    let propagator = spec.propagator()?;
    let initial = prepare_state(&spec.model, spec.initial, spec.bath_level).map_err(|e| e.in_field("initial"))?;
    let every = spec.sample_every.unwrap_or(schedule.cycle_length() / 100.0);
    let ev = evolve_sequence(&initial, &schedule, &spec.model, &propagator, Some(every))?;
    let reference = ReducedDensity::pure(&spec.initial.amplitudes());
    let mut out = Outcome::default();
    out.files
        .push(("trajectory.csv".into(), trajectory_csv(&ev.samples, Some(&reference))?));
    if spec.kind == ExperimentKind::EchoCurve {
        let (times, echo): (Vec<f64>, Vec<f64>) = ev
            .samples
            .iter()
            .filter(|s| s.t <= spec.fit_window + 1e-12)
            .map(|s| Ok((s.t, crate::dynamics::Observable::Echo.value(&s.rho)?)))
            .collect::<Result<Vec<(f64, f64)>>>()?
            .into_iter()
            .unzip();
        if times.iter().filter(|&&t| t > 0.0).count() >= 2 {
            let alpha = fit_alpha(&times, &echo);
            out.metrics.insert("alpha_fit".into(), alpha);
            if spec.model.coupling == Coupling::IsingZ && spec.sequence == SequenceChoice::Free {
                let expected = short_time_alpha(spec.model.epsilon);
                out.metrics.insert("alpha_short_time".into(), expected);
                out.checks.push(ToleranceCheck::within(
                    "alpha_fit_relative_to_short_time",
                    (alpha - expected).abs() / expected,
                    None,
                    Some(0.05),
                ));
            }
        }
        if spec.bath_check {
            let report = initial_state_check(&spec.model, &schedule, &propagator, Some(every))?;
            out.metrics.insert("bath_max_abs_delta".into(), report.max_abs_delta);
            out.metrics.insert("bath_delta_ratio".into(), report.ratio);
            out.notes.push(format!(
                "ground vs first excited bath state: max |ΔL| = {:.3e}, ratio to max(1 − L) = {:.3e}",
                report.max_abs_delta, report.ratio
            ));
            for (name, csv) in report.csv_paths.iter().zip(report.csv) {
                out.files.push((name.clone(), csv));
            }
        }
    }
    let last = ev.samples.last().expect("at least the initial sample");
    out.metrics.insert("final_t".into(), last.t);
    Ok(out)
}

fn insertion(spec: &ExperimentSpec) -> Result<Outcome> {
    let initial = prepare_state(&spec.model, spec.initial, spec.bath_level).map_err(|e| e.in_field("initial"))?;
    let propagator = spec.propagator()?;
    let schemes = [Insertion::ConstantField, Insertion::MidCycle, Insertion::AfterCycle];
    let jobs: Vec<(f64, Insertion)> = spec
        .thetas
        .iter()
        .flat_map(|&t| schemes.iter().map(move |&s| (t, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(theta, scheme)| -> Result<f64> {
            let mut s = spec.clone();
            s.insertion = scheme;
            s.theta = theta;
            let schedule = s.schedule()?;
            let ev = evolve_sequence(&initial, &schedule, &s.model, &propagator, None)?;
            let r = rotation(PulseAxis::X, theta * spec.cycles as f64);
            let psi0 = nalgebra::Vector2::from_column_slice(&spec.initial.amplitudes());
            let target = ReducedDensity::pure((r * psi0).as_slice());
            trace_distance(&ev.samples.last().expect("final sample").rho, &target)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut out = Outcome::default();
    let mut csv = String::from("theta,scheme,trace_distance\n");
    for ((theta, scheme), d) in jobs.iter().zip(&results) {
        writeln!(csv, "{},{scheme},{}", e(*theta), e(*d)).unwrap();
    }
    for (i, &theta) in spec.thetas.iter().enumerate() {
        let d = &results[3 * i..3 * i + 3];
        let best = schemes[(0..3).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap()];
        out.notes
            .push(format!("theta = {theta:.4}: smallest distance with {best}"));
    }
    out.files.push(("insertion.csv".into(), csv));
    Ok(out)
}

fn effective(spec: &ExperimentSpec) -> Result<Outcome> {
    let schedule = spec.schedule()?;
    let propagator = spec.propagator()?;
    let initial = prepare_state(&spec.model, spec.initial, spec.bath_level).map_err(|e| e.in_field("initial"))?;
    let samples = run_periodic(&initial, &schedule, &spec.model, &propagator)?;
    let series = samples
        .iter()
        .map(|s| spec.observable.value(&s.rho))
        .collect::<Result<Vec<f64>>>()?;
    let reference = ReducedDensity::pure(&spec.initial.amplitudes());
    let mut out = Outcome::default();
    out.files
        .push(("effective.csv".into(), trajectory_csv(&samples, Some(&reference))?));
    match n_op(&series) {
        NOp::Reached { cycles, refined } => {
            out.metrics.insert("n_op".into(), cycles as f64);
            out.metrics.insert("n_op_refined".into(), refined);
        }
        NOp::NotReached => out.notes.push(format!(
            "{} never fell to half within {} cycles",
            spec.observable, spec.cycles
        )),
    }
    out.metrics.insert("period".into(), schedule.cycle_length());
    Ok(out)
}

fn n_op_cells(n: NOp) -> (String, String) {
    match n {
        NOp::Reached { cycles, refined } => (cycles.to_string(), e(refined)),
        NOp::NotReached => ("not_reached".into(), "inf".into()),
    }
}

/// Per-point specs for a sweep.
pub fn sweep_specs(spec: &ExperimentSpec) -> Vec<ExperimentSpec> {
    let fields: Vec<Option<f64>> = if spec.fields.is_empty() {
        vec![spec.field_tesla]
    } else {
        spec.fields.iter().map(|&b| Some(b)).collect()
    };
    let mut specs = Vec::new();
    for &field in &fields {
        for seq in &spec.sequences {
            let mut s = spec.clone();
            s.kind = ExperimentKind::EffectiveDynamics;
            s.sequence = seq.clone();
            s.field_tesla = field;
            s.sequences.clear();
            s.fields.clear();
            specs.push(s);
        }
    }
    specs
}

fn nop_sweep(spec: &ExperimentSpec) -> Result<Outcome> {
    let ranking: Ranking = compare_sequences(&sweep_specs(spec))?;
    let mut out = Outcome::default();
    let mut csv = String::from("field_tesla,sequence,pulse_width,period,first_cycle,n_op,n_op_refined,area,rank\n");
    for p in &ranking.points {
        let (n, refined) = n_op_cells(p.n_op);
        writeln!(
            csv,
            "{},{},{},{},{},{n},{refined},{},{}",
            p.field_tesla.map_or("nan".into(), e),
            p.sequence,
            e(p.pulse_width),
            e(p.period),
            e(p.first_cycle),
            e(p.area),
            p.rank
        )
        .unwrap();
    }
    let mut cross = String::from("measure,field_low,field_high,from,to\n");
    for c in &ranking.crossovers {
        writeln!(
            cross,
            "{},{},{},{},{}",
            c.measure,
            e(c.field_low),
            e(c.field_high),
            c.from,
            c.to
        )
        .unwrap();
        out.notes.push(format!(
            "{} leader changes from {} to {} between B = {} T and {} T",
            c.measure, c.from, c.to, c.field_low, c.field_high
        ));
    }
    out.files.push(("nop.csv".into(), csv));
    out.files.push(("crossovers.csv".into(), cross));
    out.metrics.insert("points".into(), ranking.points.len() as f64);
    Ok(out)
}

fn crosscheck(spec: &ExperimentSpec) -> Result<Outcome> {
    let lengths = if spec.chain_lengths.is_empty() {
        vec![spec.model.chain_length]
    } else {
        spec.chain_lengths.clone()
    };
    let every = spec.sample_every.unwrap_or(0.05);
    let propagator = spec.propagator()?;
    let results = lengths
        .par_iter()
        .map(|&l| -> Result<(usize, String, f64)> {
            let model = if l == spec.model.chain_length {
                spec.model.clone()
            } else {
                ModelConfig {
                    chain_length: l,
                    qubit_sites: vec![l / 2],
                    ..spec.model.clone()
                }
            };
            model.validate().map_err(|e| e.in_field("chain_lengths"))?;
            let mut s = spec.clone();
            s.model = model.clone();
            s.sequence = SequenceChoice::Free;
            s.mode = PulseMode::Ideal;
            s.period = super::spec::PeriodChoice::Fixed(spec.t_max);
            s.insertion = Insertion::None;
            s.cycles = 1;
            let schedule = s.schedule()?;
            let initial = prepare_state(&model, spec.initial, 0)?;
            let ev = evolve_sequence(&initial, &schedule, &model, &propagator, Some(every))?;
            let times: Vec<f64> = ev.samples.iter().map(|x| x.t).collect();
            let det = loschmidt_curve(l, model.epsilon, model.qubit_sites[0], Reference::Bare, &times)?;
            let mut csv = String::from("t,L_determinant,L_many_body,abs_diff\n");
            let mut worst = 0.0f64;
            for (sample, d) in ev.samples.iter().zip(&det) {
                let m = crate::dynamics::Observable::Echo.value(&sample.rho)?;
                worst = worst.max((m - d).abs());
                writeln!(csv, "{},{},{},{}", e(sample.t), e(*d), e(m), e((m - d).abs())).unwrap();
            }
            Ok((l, csv, worst))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    for (l, csv, worst) in results {
        out.files.push((format!("crosscheck_L{l}.csv"), csv));
        out.metrics.insert(format!("max_abs_diff_L{l}"), worst);
        out.checks.push(ToleranceCheck::within(
            format!("determinant_vs_many_body_L{l}"),
            worst,
            None,
            Some(spec.tolerance),
        ));
    }
    Ok(out)
}

fn slope(spec: &ExperimentSpec) -> Result<Outcome> {
    if spec.mode != PulseMode::Ideal {
        return Err(Error::invalid("mode", "the slope check uses ideal pulses"));
    }
    let sequences = if spec.sequences.is_empty() {
        vec![spec.sequence.clone()]
    } else {
        spec.sequences.clone()
    };
    let grid = log_grid(spec.t_min, spec.t_max, spec.points);
    let opts = SlopeOptions {
        norm: spec.norm,
        part: spec.part,
    };
    let mut out = Outcome::default();
    let mut deltas = String::from("sequence,period,delta\n");
    let mut slopes = String::from("sequence,order,slope\n");
    for choice in &sequences {
        let seq = choice.build().map_err(|e| e.in_field("sequences"))?;
        let report = suppression_slope_with(&seq, &spec.model, &grid, opts)?;
        let order = verify_order(&seq);
        for (t, d) in report.periods.iter().zip(&report.deltas) {
            writeln!(deltas, "{choice},{},{}", e(*t), e(*d)).unwrap();
        }
        writeln!(slopes, "{choice},{order},{}", e(report.slope)).unwrap();
        out.metrics.insert(format!("slope_{choice}"), report.slope);
        let expected = order as f64 + 1.0;
        out.checks.push(ToleranceCheck::within(
            format!("slope_{choice}"),
            report.slope,
            Some(expected - 0.3),
            Some(expected + 0.3),
        ));
    }
    out.files.push(("slope.csv".into(), deltas));
    out.files.push(("slopes.csv".into(), slopes));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::spec::PeriodChoice;
    use crate::model::Coupling;

    #[test]
    fn derive_writes_closed_form_solution() {
        let mut s = ExperimentSpec::new(
            ExperimentKind::DeriveSequences,
            ModelConfig::new(8, Coupling::Heisenberg, -0.3),
        );
        s.order = 2;
        s.starts = 40;
        let out = execute(&s).unwrap();
        let csv = &out.files[0].1;
        let a1 = (7.0 - 33f64.sqrt()) / 16.0;
        let first: f64 = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert!((first - a1).abs() < 1e-12, "{csv}");
        assert!(out.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn run_writes_manifest_last_and_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ExperimentSpec::new(
            ExperimentKind::RelaxationCurve,
            ModelConfig::new(4, Coupling::Heisenberg, -0.3),
        );
        s.initial = crate::dynamics::QubitInit::Up;
        s.sequence = "m1_xz".parse().unwrap();
        s.period = PeriodChoice::Fixed(0.5);
        s.sample_every = Some(0.05);
        let m = run(&s, dir.path()).unwrap();
        assert_eq!(m.outputs, vec!["trajectory.csv".to_string(), "spec.txt".to_string()]);
        assert_eq!(m.spec_hash.len(), 64);
        let text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back.spec_hash, m.spec_hash);
        let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert_eq!(traj.lines().count(), 12);
        let spec_back = ExperimentSpec::parse(&fs::read_to_string(dir.path().join("spec.txt")).unwrap()).unwrap();
        assert_eq!(spec_back, s);
        assert!(fs::read_dir(dir.path())
            .unwrap()
            .all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let mut s = ExperimentSpec::new(
            ExperimentKind::NopSweep,
            ModelConfig::new(4, Coupling::Heisenberg, -0.3),
        );
        s.sequences = vec!["m1_xz".parse().unwrap(), "free".parse().unwrap()];
        s.fields = vec![20.0, 30.0];
        s.mode = PulseMode::FiniteWidth;
        s.period = PeriodChoice::Critical;
        s.cycles = 4;
        let a = execute(&s).unwrap();
        let b = execute(&s).unwrap();
        assert_eq!(a.files, b.files);
    }

    #[test]
    fn crosscheck_small_chain() {
        let mut s = ExperimentSpec::new(
            ExperimentKind::OracleCrossCheck,
            ModelConfig::new(6, Coupling::IsingZ, -0.3),
        );
        s.chain_lengths = vec![4, 6];
        s.t_max = 1.0;
        s.sample_every = Some(0.1);
        let out = execute(&s).unwrap();
        assert_eq!(out.files.len(), 2);
        assert!(out.checks.iter().all(|c| c.passed), "{:?}", out.checks);
    }

    #[test]
    fn module_errors_name_the_field() {
        let mut s = ExperimentSpec::new(
            ExperimentKind::EchoCurve,
            ModelConfig::new(4, Coupling::Heisenberg, -0.3),
        );
        s.sequence = "m1_xz".parse().unwrap();
        s.mode = PulseMode::FiniteWidth;
        s.field_tesla = Some(10.0);
        s.period = PeriodChoice::Fixed(0.5);
        match execute(&s) {
            Err(Error::Overlap { .. }) => {}
            other => panic!("{other:?}"),
        }
        s.sequence = SequenceChoice::Udd {
            n: 3,
            axis: PulseAxis::Identity,
        };
        match execute(&s) {
            Err(Error::Invalid { field, .. }) => assert!(field.starts_with("sequence"), "{field}"),
            other => panic!("{other:?}"),
        }
    }
}
