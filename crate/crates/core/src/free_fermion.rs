//! Free-fermion oracle for Ising coupling on the XX chain (Δ = 0).
//!
//! After Jordan–Wigner the chain is quadratic, and for a qubit in state
//! `σ_z = ±1` the bath evolves under `H± = hopping ± ε n_i`. The echo is
//! `L(t) = |det[1 + r (e^{itH⁻} e^{-itH⁺} − 1)]|²` with `r_ij = ⟨c†_i c_j⟩`.
//!
//! Conventions follow [`crate::model`]: the bath term `J(SˣSˣ + SʸSʸ)` is
//! `(J/2)(c†_n c_{n+1} + h.c.)`, and `ε σ_z S^z_i` puts `±ε` on site `i`
//! (up to a constant), so `H⁺ − H⁻ = 2ε` at that one entry.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Single-particle energies closer to zero than this count as zero modes.
const ZERO_MODE: f64 = 1e-10;

/// Which Hamiltonian's Fermi sea is the initial bath state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Reference {
    /// Ground state of the bare chain (the qubit starts decoupled).
    #[default]
    Bare,
    /// Ground state of `H⁻`.
    Minus,
}

/// Open-chain hopping matrix with amplitude `j/2`.
pub fn hopping_matrix(l: usize, j: f64) -> DMatrix<f64> {
    DMatrix::from_fn(l, l, |a, b| if a.abs_diff(b) == 1 { 0.5 * j } else { 0.0 })
}

/// `(H⁺, H⁻)` for a qubit at `site`.
pub fn single_particle_matrices(l: usize, j: f64, epsilon: f64, site: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if site >= l {
        return Err(Error::invalid("site", format!("{site} outside 0..{l}")));
    }
    let h = hopping_matrix(l, j);
    let mut plus = h.clone();
    let mut minus = h;
    plus[(site, site)] = epsilon;
    minus[(site, site)] = -epsilon;
    Ok((plus, minus))
}

/// Projector onto the negative-energy orbitals of `h_ref`.
///
/// A zero mode makes the filled sea ambiguous and is rejected; use an even
/// chain.
pub fn correlation_matrix(h_ref: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(h_ref.clone());
    if let Some(e) = eig.eigenvalues.iter().find(|e| e.abs() < ZERO_MODE) {
        return Err(Error::invalid(
            "reference",
            format!("zero mode at energy {e:.1e}; the half-filled sea is ambiguous (use even L)"),
        ));
    }
    let n = h_ref.nrows();
    let mut r = DMatrix::zeros(n, n);
    for (k, &e) in eig.eigenvalues.iter().enumerate() {
        if e < 0.0 {
            let v = eig.eigenvectors.column(k);
            r += v * v.transpose();
        }
    }
    Ok(r)
}

/// Ground-state energy of the quadratic Hamiltonian: the sum of its negative
/// single-particle energies.
pub fn filled_sea_energy(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .filter(|&&e| e < 0.0)
        .sum()
}

fn expi(h: &DMatrix<f64>, t: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(C64::from);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::new(0.0, e * t).exp()));
    &v * d * v.transpose()
}

/// Echo from the determinant formula.
pub fn loschmidt_det(r: &DMatrix<f64>, plus: &DMatrix<f64>, minus: &DMatrix<f64>, t: f64) -> f64 {
    let n = r.nrows();
    let u = expi(minus, t) * expi(plus, -t) - DMatrix::identity(n, n);
    let m = DMatrix::identity(n, n) + r.map(C64::from) * u;
    m.determinant().norm_sqr()
}

/// Echo curve on `times` for a chain of `l` sites (J = 1).
pub fn loschmidt_curve(l: usize, epsilon: f64, site: usize, reference: Reference, times: &[f64]) -> Result<Vec<f64>> {
    let (plus, minus) = single_particle_matrices(l, 1.0, epsilon, site)?;
    let r = match reference {
        Reference::Bare => correlation_matrix(&hopping_matrix(l, 1.0))?,
        Reference::Minus => correlation_matrix(&minus)?,
    };
    Ok(times.iter().map(|&t| loschmidt_det(&r, &plus, &minus, t)).collect())
}

/// Short-time coefficient of `L(t) ≈ e^{-αt²}`: `α = ε²`.
pub fn short_time_alpha(epsilon: f64) -> f64 {
    epsilon * epsilon
}

/// Least-squares `α` in `−ln L = α t²` over samples with `t > 0`.
pub fn fit_alpha(times: &[f64], echo: &[f64]) -> f64 {
    let (num, den) = times
        .iter()
        .zip(echo)
        .filter(|(&t, _)| t > 0.0)
        .fold((0.0, 0.0), |(n, d), (&t, &l)| (n - l.ln() * t * t, d + t.powi(4)));
    num / den
}
