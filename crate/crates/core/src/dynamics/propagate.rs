//! Time stepping: second-order Trotter over local terms, Lanczos (Krylov)
//! exponentials, and a dense oracle for small registers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::state::QuantumState;
use crate::error::{Error, Result};
use crate::model::operator::{Operator, Term, ZERO};
use crate::vecops::{axpy, dot, norm, orthogonalize};

/// Norm drift over a run beyond which evolution aborts.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

const KRYLOV_DIM: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Propagator {
    /// Symmetric Trotter splitting with step `dt` (in 1/J).
    Trotter { dt: f64 },
    /// Krylov exponential with per-substep error bound `tol`.
    Krylov { tol: f64 },
}

impl Propagator {
    pub fn trotter(dt: f64) -> Result<Self> {
        if !(0.001..=0.05).contains(&dt) {
            return Err(Error::invalid(
                "dt",
                format!("Trotter step must lie in [0.001, 0.05], got {dt}"),
            ));
        }
        Ok(Propagator::Trotter { dt })
    }

    pub fn krylov() -> Self {
        Propagator::Krylov { tol: 1e-12 }
    }

    /// Advances `psi` by `duration` under `h`.
    pub fn evolve(&self, h: &Operator, psi: &mut [C64], duration: f64) -> Result<()> {
        if duration <= 0.0 {
            return Ok(());
        }
        match *self {
            Propagator::Trotter { dt } => {
                let steps = (duration / dt - 1e-9).ceil().max(1.0) as usize;
                TrotterGates::new(h, duration / steps as f64).run(psi, steps);
                Ok(())
            }
            Propagator::Krylov { tol } => krylov_evolve(h, psi, duration, tol),
        }
    }
}

/// `exp(−i h τ)` for a small Hermitian matrix.
pub fn hermitian_exp(h: &DMatrix<C64>, tau: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::new(0.0, -e * tau).exp()));
    v * d * v.adjoint()
}

/// Terms merged by support, in order of first appearance.
fn grouped_terms(h: &Operator) -> Vec<((usize, Option<usize>), DMatrix<C64>)> {
    let mut groups: Vec<((usize, Option<usize>), DMatrix<C64>)> = Vec::new();
    for t in h.terms() {
        let bits = t.bits();
        let m = t.local_matrix();
        match groups.iter_mut().find(|(b, _)| *b == bits) {
            Some((_, acc)) => *acc += m,
            None => groups.push((bits, m)),
        }
    }
    groups
}

struct TrotterGates {
    bits: Vec<(usize, Option<usize>)>,
    half: Vec<DMatrix<C64>>,
    full: Vec<DMatrix<C64>>,
}

impl TrotterGates {
    fn new(h: &Operator, tau: f64) -> Self {
        let groups = grouped_terms(h);
        TrotterGates {
            bits: groups.iter().map(|(b, _)| *b).collect(),
            half: groups.iter().map(|(_, m)| hermitian_exp(m, 0.5 * tau)).collect(),
            full: groups.iter().map(|(_, m)| hermitian_exp(m, tau)).collect(),
        }
    }

    /// `steps` Strang steps `g₁(τ/2)…g_k(τ/2) g_k(τ/2)…g₁(τ/2)`, with the
    /// adjacent equal half-gates fused.
    fn run(&self, psi: &mut [C64], steps: usize) {
        let k = self.bits.len();
        let apply = |i: usize, u: &DMatrix<C64>, psi: &mut [C64]| Term::apply_local(self.bits[i], u, psi);
        if k == 0 {
            return;
        }
        if k == 1 {
            for _ in 0..steps {
                apply(0, &self.full[0], psi);
            }
            return;
        }
        apply(0, &self.half[0], psi);
        for s in 0..steps {
            for i in 1..k - 1 {
                apply(i, &self.half[i], psi);
            }
            apply(k - 1, &self.full[k - 1], psi);
            for i in (1..k - 1).rev() {
                apply(i, &self.half[i], psi);
            }
            let last = if s + 1 == steps { &self.half[0] } else { &self.full[0] };
            apply(0, last, psi);
        }
    }
}

/// `steps` Trotter steps of size `dt` on `state`, with the norm checked at
/// the end.
pub fn trotter_evolve(state: &mut QuantumState, h: &Operator, dt: f64, steps: usize) -> Result<()> {
    let p = Propagator::trotter(dt)?;
    let n0 = state.norm();
    if let Propagator::Trotter { dt } = p {
        TrotterGates::new(h, dt).run(&mut state.amplitudes, steps);
    }
    state.time += dt * steps as f64;
    let drift = (state.norm() - n0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift,
            limit: NORM_DRIFT_LIMIT,
            time: state.time,
        });
    }
    Ok(())
}

/// `psi ← exp(−i h t) psi` by restarted Lanczos, halving the substep until
/// the a-posteriori error estimate is below `tol`.
pub fn krylov_evolve(h: &Operator, psi: &mut [C64], t: f64, tol: f64) -> Result<()> {
    let dim = psi.len();
    let mut remaining = t;
    let mut guard = 0;
    while remaining > 0.0 {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::NotConverged {
                method: "krylov",
                detail: format!("too many substeps, {remaining:.3e} left"),
            });
        }
        let n0 = norm(psi);
        let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|x| x / n0).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut tail = 0.0;
        let mut w = vec![ZERO; dim];
        let m = KRYLOV_DIM.min(dim);
        for j in 0..m {
            h.apply(&basis[j], &mut w);
            alpha.push(dot(&basis[j], &w).re);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            if b < 1e-13 {
                tail = 0.0;
                break;
            }
            tail = b;
            if j + 1 == m {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let tri = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        let coeffs = |tau: f64| -> Vec<C64> {
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|l| {
                            let q = eig.eigenvectors[(i, l)] * eig.eigenvectors[(0, l)];
                            C64::new(0.0, -eig.eigenvalues[l] * tau).exp() * q
                        })
                        .sum()
                })
                .collect()
        };
        let mut tau = remaining;
        let mut c = coeffs(tau);
        let mut halvings = 0;
        while tail * c[k - 1].norm() > tol {
            tau *= 0.5;
            c = coeffs(tau);
            halvings += 1;
            if halvings > 60 {
                return Err(Error::NotConverged {
                    method: "krylov",
                    detail: "substep underflow".into(),
                });
            }
        }
        psi.iter_mut().for_each(|x| *x = ZERO);
        for (v, ci) in basis.iter().zip(&c) {
            axpy(ci * n0, v, psi);
        }
        remaining -= tau;
        if remaining < 1e-14 * t {
            remaining = 0.0;
        }
    }
    Ok(())
}

/// Dense `exp(−i H t)`; the oracle for small systems.
pub fn dense_propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    hermitian_exp(h, t)
}
