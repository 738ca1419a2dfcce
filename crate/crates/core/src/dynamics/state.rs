//! Joint qubit ⊗ chain state vectors and reduced densities.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::observables::ReducedDensity;
use crate::error::{Error, Result};
use crate::model::operator::{ONE, ZERO};
use crate::vecops;

/// Amplitudes over the joint register; qubits are the low bits.
#[derive(Clone, Debug)]
pub struct QuantumState {
    pub amplitudes: Vec<C64>,
    pub n_qubits: usize,
    pub time: f64,
}

impl QuantumState {
    /// `|q⟩ ⊗ |bath⟩` with `q` over the `2^n_qubits` qubit states.
    pub fn product(qubits: &[C64], bath: &[C64]) -> Result<Self> {
        let nq = qubits.len().trailing_zeros() as usize;
        if !qubits.len().is_power_of_two() || !bath.len().is_power_of_two() {
            return Err(Error::invalid("state", "factor lengths must be powers of two"));
        }
        let mut amplitudes = Vec::with_capacity(qubits.len() * bath.len());
        for b in bath {
            amplitudes.extend(qubits.iter().map(|q| q * b));
        }
        let mut s = QuantumState {
            amplitudes,
            n_qubits: nq,
            time: 0.0,
        };
        if (s.norm() - 1.0).abs() > 1e-9 {
            vecops::normalize(&mut s.amplitudes);
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        vecops::norm(&self.amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Reduced density of the listed qubits, in the order given.
    pub fn reduced_density(&self, qubits: &[usize]) -> Result<ReducedDensity> {
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(Error::invalid("qubits", "trace down to one or two qubits"));
        }
        if qubits.iter().any(|&q| q >= self.n_qubits) || (qubits.len() == 2 && qubits[0] == qubits[1]) {
            return Err(Error::invalid(
                "qubits",
                format!("{qubits:?} with {} qubit(s) in the state", self.n_qubits),
            ));
        }
        let d = 1usize << qubits.len();
        // Local index a maps to the bit pattern with bit k set for qubit qubits[k].
        let pattern = |a: usize| -> usize {
            qubits
                .iter()
                .enumerate()
                .filter(|(k, _)| a >> k & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        };
        let mask = pattern(d - 1);
        let offsets: Vec<usize> = (0..d).map(pattern).collect();
        let psi = &self.amplitudes;
        let mut rho = DMatrix::<C64>::zeros(d, d);
        for rest in (0..psi.len()).filter(|i| i & mask == 0) {
            for a in 0..d {
                let pa = psi[rest | offsets[a]];
                if pa == ZERO {
                    continue;
                }
                for b in 0..d {
                    rho[(a, b)] += pa * psi[rest | offsets[b]].conj();
                }
            }
        }
        Ok(ReducedDensity::new_unchecked(rho))
    }
}

/// Single-qubit states in the `(↑, ↓)` basis.
pub mod qubit {
    use super::*;

    pub fn up() -> Vec<C64> {
        vec![ONE, ZERO]
    }

    pub fn down() -> Vec<C64> {
        vec![ZERO, ONE]
    }

    pub fn plus_x() -> Vec<C64> {
        let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        vec![r, r]
    }

    /// `|a⟩ ⊗ |b⟩` with qubit 0 as the low bit.
    pub fn pair(a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = Vec::with_capacity(4);
        for y in b {
            out.extend(a.iter().map(|x| x * y));
        }
        out
    }

    /// `(|↑↑⟩ + |↓↓⟩)/√2`.
    pub fn bell_phi_plus() -> Vec<C64> {
        let r = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        vec![r, ZERO, ZERO, r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_bath(n: usize, seed: u64) -> Vec<C64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        vecops::normalize(&mut v);
        v
    }

    #[test]
    fn product_state_reduces_to_qubit() {
        let s = QuantumState::product(&qubit::up(), &random_bath(16, 1)).unwrap();
        let rho = s.reduced_density(&[0]).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_pair_halves_are_mixed() {
        let s = QuantumState::product(&qubit::bell_phi_plus(), &random_bath(8, 2)).unwrap();
        for q in 0..2 {
            let rho = s.reduced_density(&[q]).unwrap();
            assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(rho.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-12);
        }
        let rho = s.reduced_density(&[0, 1]).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 3)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn qubit_order_is_respected() {
        let s = QuantumState::product(&qubit::pair(&qubit::up(), &qubit::down()), &random_bath(4, 3)).unwrap();
        let r01 = s.reduced_density(&[0, 1]).unwrap();
        let r10 = s.reduced_density(&[1, 0]).unwrap();
        // |↑↓⟩ has local index 2 in (0,1) order and 1 in (1,0) order.
        assert_abs_diff_eq!(r01.matrix()[(2, 2)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r10.matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert!(s.reduced_density(&[2]).is_err());
    }
}
