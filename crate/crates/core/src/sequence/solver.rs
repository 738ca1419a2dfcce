//! Multi-start damped Newton solver for the interval fractions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::axis::PulseAxis;
use super::constraints::ConstraintSystem;
use super::dd::DdSequence;

#[derive(Clone, Debug)]
pub struct SolverConfig<S> {
    /// Number of random starting points.
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Max-norm residual a root must reach.
    pub tolerance: S,
    /// L∞ distance under which two roots count as the same solution.
    pub dedup_tolerance: S,
}

impl<S: Real> Default for SolverConfig<S> {
    fn default() -> Self {
        SolverConfig {
            starts: 200,
            seed: 0x5eed_d00d,
            max_iterations: 200,
            tolerance: S::solver_tolerance(),
            dedup_tolerance: lit(1e-6),
        }
    }
}

/// Outcome of a multi-start solve.
#[derive(Clone, Debug)]
pub struct SolveReport<S> {
    pub solutions: Vec<DdSequence<S>>,
    /// Starts whose Newton iteration reached the tolerance (any sign).
    pub converged_starts: usize,
    pub total_starts: usize,
}

/// Solves the order-`m` constraint system for the given pattern from many
/// random starts and returns every distinct positive root, sorted
/// lexicographically by interval vector. A pattern without a positive root
/// yields an empty list.
pub fn solve_intervals<S: Real>(order: u8, axes: &[PulseAxis], config: &SolverConfig<S>) -> Result<Vec<DdSequence<S>>> {
    Ok(solve_intervals_report(order, axes, config)?.solutions)
}

/// [`solve_intervals`] plus convergence statistics.
pub fn solve_intervals_report<S: Real>(
    order: u8,
    axes: &[PulseAxis],
    config: &SolverConfig<S>,
) -> Result<SolveReport<S>> {
    let system = ConstraintSystem::new(order, axes.to_vec())?;
    let n = system.unknown_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<Vec<S>> = (0..config.starts)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| lit(x / sum)).collect()
        })
        .collect();

    let outcomes: Vec<Option<Vec<S>>> = starts
        .par_iter()
        .map(|x0| newton(&system, x0.clone(), config))
        .collect();
    let converged_starts = outcomes.iter().filter(|o| o.is_some()).count();
    let mut roots: Vec<Vec<S>> = Vec::new();
    for x in outcomes.into_iter().flatten() {
        if x.iter().all(|&a| a > S::zero()) && !roots.iter().any(|r| linf(r, &x) <= config.dedup_tolerance) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let solutions = roots
        .into_iter()
        .map(|x| DdSequence::normalized(axes.to_vec(), &x))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveReport {
        solutions,
        converged_starts,
        total_starts: config.starts,
    })
}

/// Newton-polishes an approximate interval vector (for example published
/// decimals) onto an exact root of the order-`m` system.
pub fn refine_intervals<S: Real>(
    order: u8,
    axes: &[PulseAxis],
    guess: &[S],
    config: &SolverConfig<S>,
) -> Result<DdSequence<S>> {
    let system = ConstraintSystem::new(order, axes.to_vec())?;
    let x = newton(&system, guess.to_vec(), config).ok_or_else(|| Error::NotConverged {
        method: "interval refinement",
        detail: format!("no root near the guess for '{}'", super::axis::format_axes(axes)),
    })?;
    DdSequence::normalized(axes.to_vec(), &x)
}

fn linf<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(S::zero(), S::max)
}

fn max_abs<S: Real>(v: &[S]) -> S {
    v.iter().map(|x| x.abs()).fold(S::zero(), S::max)
}

fn norm2<S: Real>(v: &[S]) -> S {
    v.iter().map(|&x| x * x).sum::<S>()
}

/// Damped Newton (Gauss–Newton for overdetermined systems) that keeps every
/// interval positive. Returns the root, or `None` on failure.
fn newton<S: Real>(system: &ConstraintSystem, mut x: Vec<S>, config: &SolverConfig<S>) -> Option<Vec<S>> {
    let half = lit::<S>(0.5);
    let min_step = lit::<S>(1e-10);
    let mut f = system.residuals(&x);
    let mut polish = 0;
    for _ in 0..config.max_iterations {
        if max_abs(&f) <= config.tolerance {
            // a couple of extra full steps push the residual to rounding level
            polish += 1;
            if polish > 2 {
                return Some(x);
            }
        }
        let jac = system.jacobian(&x);
        let step = newton_step(&jac, &f)?;
        let f0 = norm2(&f);
        let mut lambda = S::one();
        loop {
            let trial: Vec<S> = x.iter().zip(&step).map(|(&a, &d)| a + lambda * d).collect();
            if trial.iter().all(|&a| a > S::zero()) {
                let ft = system.residuals(&trial);
                let fn_ = norm2(&ft);
                if fn_.is_finite() && (fn_ < f0 || (polish > 0 && fn_ <= f0)) {
                    x = trial;
                    f = ft;
                    break;
                }
            }
            lambda = lambda * half;
            if lambda < min_step {
                return (max_abs(&f) <= config.tolerance).then_some(x);
            }
        }
    }
    (max_abs(&f) <= config.tolerance).then_some(x)
}

/// Solves `J δ = −F` (least squares when `J` is tall).
fn newton_step<S: Real>(jac: &[Vec<S>], f: &[S]) -> Option<Vec<S>> {
    let n = jac[0].len();
    if jac.len() == n {
        let a: Vec<Vec<S>> = jac.to_vec();
        let b: Vec<S> = f.iter().map(|&v| -v).collect();
        solve_linear(a, b)
    } else {
        let mut a = vec![vec![S::zero(); n]; n];
        let mut b = vec![S::zero(); n];
        for (row, &fr) in jac.iter().zip(f) {
            for i in 0..n {
                b[i] = b[i] - row[i] * fr;
                for j in 0..n {
                    a[i][j] = a[i][j] + row[i] * row[j];
                }
            }
        }
        solve_linear(a, b)
    }
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve_linear<S: Real>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= S::min_positive_value() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == S::zero() {
                continue;
            }
            for k in col..n {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let tail: S = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
