//! Suppression order measured on the dense evolution operator.
//!
//! With ideal pulses the cycle operator in the toggling frame is
//! `U₀(T) = Π_k exp(−i H_k τ_k)`, where `H_k` is `H₀` conjugated by the
//! pulses applied so far. We need `Δ(T) = ‖e^{iH_b T} U₀(T) − 1‖` down to
//! about `1e-13`, far below what subtracting 1 from a unitary can resolve, so
//! each factor is written as `e^{−iH_b τ_k}(1 + E_k)` with `E_k` taken from
//! the top-right block of a block exponential, and the product `Π(1 + D_k)`
//! is accumulated as its deviation from 1.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_bath, build_hamiltonian, pauli, ModelConfig, Operator, Term};
use crate::sequence::PulseAxis;
use crate::Sequence;

/// Chains above this size make the dense operators too large.
pub const MAX_SLOPE_SITES: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaNorm {
    /// Largest singular value.
    #[default]
    Spectral,
    Frobenius,
}

/// Which part of `e^{iH_b T} U₀(T) − 1` is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviationPart {
    #[default]
    Full,
    /// Only the components that act nontrivially on the qubits; the
    /// `1_q ⊗ B` block is projected out.
    Coupling,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeOptions {
    pub norm: DeltaNorm,
    pub part: DeviationPart,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeReport {
    pub periods: Vec<f64>,
    pub deltas: Vec<f64>,
    pub slope: f64,
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

struct Dense {
    bath_vectors: DMatrix<C64>,
    bath_energies: Vec<f64>,
    /// `H_k` for every interval.
    toggled: Vec<DMatrix<C64>>,
    bath: DMatrix<C64>,
    n_qubits: usize,
}

/// `X − 1_q ⊗ Tr_q(X)/2^{n_q}`; qubits are the low bits of the index.
fn remove_bath_only(x: &DMatrix<C64>, n_qubits: usize) -> DMatrix<C64> {
    let dq = 1usize << n_qubits;
    let db = x.nrows() / dq;
    let mut partial = DMatrix::<C64>::zeros(db, db);
    for b in 0..db {
        for c in 0..db {
            partial[(b, c)] = (0..dq).map(|q| x[(b * dq + q, c * dq + q)]).sum::<C64>() / dq as f64;
        }
    }
    let mut out = x.clone();
    for b in 0..db {
        for c in 0..db {
            for q in 0..dq {
                out[(b * dq + q, c * dq + q)] -= partial[(b, c)];
            }
        }
    }
    out
}

impl Dense {
    fn new(seq: &Sequence, model: &ModelConfig) -> Result<Self> {
        let bath = build_bath(model)?.to_dense();
        let h = build_hamiltonian(model)?.to_dense();
        let nq = model.n_qubits();
        let pulse = |axis: PulseAxis| -> DMatrix<C64> {
            let mut m = DMatrix::identity(model.dim(), model.dim());
            for q in 0..nq {
                let mut single = Operator::zero(model.n_bits());
                single.push(Term::One { bit: q, m: pauli(axis) });
                m = single.to_dense() * m;
            }
            m
        };
        let mut q = DMatrix::<C64>::identity(model.dim(), model.dim());
        let mut toggled = Vec::with_capacity(seq.alphas().len());
        for k in 0..seq.alphas().len() {
            toggled.push(q.adjoint() * &h * &q);
            if let Some(&axis) = seq.axes().get(k) {
                q = pulse(axis) * q;
            }
        }
        let eig = SymmetricEigen::new(bath.clone());
        Ok(Dense {
            bath_vectors: eig.eigenvectors,
            bath_energies: eig.eigenvalues.iter().copied().collect(),
            toggled,
            bath,
            n_qubits: nq,
        })
    }

    /// `exp(+i H_b s)`.
    fn bath_phase(&self, s: f64) -> DMatrix<C64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.bath_energies.len(),
            self.bath_energies.iter().map(|e| C64::new(0.0, e * s).exp()),
        ));
        &self.bath_vectors * d * self.bath_vectors.adjoint()
    }

    fn delta(&self, seq: &Sequence, period: f64, opts: SlopeOptions) -> f64 {
        let mut x = self.deviation(seq, period);
        if opts.part == DeviationPart::Coupling {
            x = remove_bath_only(&x, self.n_qubits);
        }
        match opts.norm {
            DeltaNorm::Spectral => x.singular_values().max(),
            DeltaNorm::Frobenius => x.norm(),
        }
    }

    fn deviation(&self, seq: &Sequence, period: f64) -> DMatrix<C64> {
        let dim = self.bath.nrows();
        let mi = C64::new(0.0, -1.0);
        let mut x = DMatrix::<C64>::zeros(dim, dim);
        let mut s_prev = 0.0;
        for (k, &alpha) in seq.alphas().iter().enumerate() {
            let tau = alpha * period;
            let hk = &self.toggled[k];
            let v = hk - &self.bath;
            // exp([[−iH_b, −iV], [0, −iH_k]] τ) has top-right block
            // e^{−iH_k τ} − e^{−iH_b τ}.
            let mut block = DMatrix::<C64>::zeros(2 * dim, 2 * dim);
            block.view_mut((0, 0), (dim, dim)).copy_from(&(&self.bath * (mi * tau)));
            block.view_mut((0, dim), (dim, dim)).copy_from(&(&v * (mi * tau)));
            block.view_mut((dim, dim), (dim, dim)).copy_from(&(hk * (mi * tau)));
            let f = block.exp().view((0, dim), (dim, dim)).into_owned();
            let s = s_prev + tau;
            let d = self.bath_phase(s) * f * self.bath_phase(-s_prev);
            x = &d + &x + &d * &x;
            s_prev = s;
        }
        x
    }
}

/// `e^{iH_b T} U₀(T) − 1` as a dense matrix.
pub fn suppression_operator(seq: &Sequence, model: &ModelConfig, period: f64) -> Result<DMatrix<C64>> {
    check_model(model)?;
    Ok(Dense::new(seq, model)?.deviation(seq, period))
}

/// `Δ(T)` for one period, spectral norm of the full deviation.
pub fn suppression_delta(seq: &Sequence, model: &ModelConfig, period: f64) -> Result<f64> {
    check_model(model)?;
    Ok(Dense::new(seq, model)?.delta(seq, period, SlopeOptions::default()))
}

fn check_model(model: &ModelConfig) -> Result<()> {
    model.validate()?;
    if model.chain_length > MAX_SLOPE_SITES {
        return Err(Error::invalid(
            "l",
            format!("dense slope check supports at most {MAX_SLOPE_SITES} sites"),
        ));
    }
    Ok(())
}

/// Log-log slope of the spectral-norm `Δ(T)` over `periods`.
pub fn suppression_slope(seq: &Sequence, model: &ModelConfig, periods: &[f64]) -> Result<SlopeReport> {
    suppression_slope_with(seq, model, periods, SlopeOptions::default())
}

pub fn suppression_slope_with(
    seq: &Sequence,
    model: &ModelConfig,
    periods: &[f64],
    opts: SlopeOptions,
) -> Result<SlopeReport> {
    check_model(model)?;
    if periods.len() < 3 || periods.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("periods", "need at least 3 positive periods"));
    }
    let (lo, hi) = periods
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if hi / lo < 10f64.sqrt() {
        return Err(Error::invalid(
            "periods",
            format!(
                "grid spans {:.2} decades; need at least half a decade",
                (hi / lo).log10()
            ),
        ));
    }
    let dense = Dense::new(seq, model)?;
    let deltas: Vec<f64> = periods.par_iter().map(|&t| dense.delta(seq, t, opts)).collect();
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Unphysical(format!("Δ(T) = {d}; cannot take a logarithm")));
    }
    Ok(SlopeReport {
        slope: log_log_slope(periods, &deltas),
        periods: periods.to_vec(),
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagate::dense_propagator;
    use crate::model::Coupling;
    use crate::sequence::catalog_sequence;

    #[test]
    fn delta_matches_direct_product_at_large_period() {
        // Where Δ is not tiny, the naive product is accurate enough to compare.
        let model = ModelConfig::new(4, Coupling::Heisenberg, -0.3);
        let seq = catalog_sequence::<f64>("m1_xz").unwrap();
        let t = 0.8;
        let h = build_hamiltonian(&model).unwrap().to_dense();
        let hb = build_bath(&model).unwrap().to_dense();
        let mut u = DMatrix::<C64>::identity(h.nrows(), h.nrows());
        let mut q = DMatrix::<C64>::identity(h.nrows(), h.nrows());
        let mut sx = Operator::zero(model.n_bits());
        sx.push(Term::One {
            bit: 0,
            m: pauli(PulseAxis::X),
        });
        let mut sz = Operator::zero(model.n_bits());
        sz.push(Term::One {
            bit: 0,
            m: pauli(PulseAxis::Z),
        });
        for (k, &a) in seq.alphas().iter().enumerate() {
            u = dense_propagator(&h, a * t) * u;
            let p = match seq.axes().get(k) {
                Some(PulseAxis::X) => sx.to_dense(),
                Some(PulseAxis::Z) => sz.to_dense(),
                // Parity: undo the accumulated product exactly.
                _ => q.adjoint(),
            };
            q = &p * q;
            u = p * u;
        }
        let direct = (dense_propagator(&hb, -t) * u - DMatrix::identity(h.nrows(), h.nrows()))
            .singular_values()
            .max();
        let accurate = suppression_delta(&seq, &model, t).unwrap();
        assert!(
            (direct - accurate).abs() < 1e-10 * direct.max(1.0),
            "{direct} vs {accurate}"
        );
    }

    #[test]
    fn free_evolution_is_first_order() {
        let model = ModelConfig::new(4, Coupling::Heisenberg, -0.3);
        let free = crate::sequence::DdSequence::new(vec![], vec![1.0]).unwrap();
        let r = suppression_slope(&free, &model, &log_grid(1e-3, 1e-1, 5)).unwrap();
        assert!((r.slope - 1.0).abs() < 0.05, "{}", r.slope);
    }

    #[test]
    fn grid_checks() {
        let model = ModelConfig::new(4, Coupling::Heisenberg, -0.3);
        let seq = catalog_sequence::<f64>("m1_xz").unwrap();
        assert!(suppression_slope(&seq, &model, &[0.01, 0.02, 0.03]).is_err());
        assert!(suppression_slope(&seq, &model, &[0.01, 0.1]).is_err());
        let big = ModelConfig::new(10, Coupling::Heisenberg, -0.3);
        assert!(suppression_slope(&seq, &big, &log_grid(1e-3, 1e-1, 4)).is_err());
    }

    #[test]
    fn coupling_part_drops_bath_only_terms() {
        // 1_q ⊗ B is removed entirely, σ_z ⊗ B is kept.
        let b = DMatrix::from_fn(4, 4, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let sz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from(1.0), C64::from(-1.0)]));
        let eye = DMatrix::<C64>::identity(2, 2);
        assert!(remove_bath_only(&b.kronecker(&eye), 1).norm() < 1e-12);
        let kept = b.kronecker(&sz);
        assert!((remove_bath_only(&kept, 1) - &kept).norm() < 1e-12);
    }

    #[test]
    fn frobenius_gives_same_order() {
        let model = ModelConfig::new(4, Coupling::Heisenberg, -0.3);
        let seq = catalog_sequence::<f64>("m1_xz").unwrap();
        let opts = SlopeOptions {
            norm: DeltaNorm::Frobenius,
            part: DeviationPart::Full,
        };
        let r = suppression_slope_with(&seq, &model, &log_grid(1e-3, 1e-1, 5), opts).unwrap();
        assert!((r.slope - 2.0).abs() < 0.1, "{}", r.slope);
    }

    #[test]
    fn slope_helper() {
        let x = log_grid(1.0, 100.0, 7);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powi(3)).collect();
        assert!((log_log_slope(&x, &y) - 3.0).abs() < 1e-12);
    }
}
