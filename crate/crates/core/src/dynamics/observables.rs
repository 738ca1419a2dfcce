//! Reduced densities and the observables read off them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigenvalues of a density matrix below this are treated as a broken state.
const NEGATIVE_EIGEN_LIMIT: f64 = -1e-8;

/// One- or two-qubit density matrix (`2×2` or `4×4`).
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity {
    matrix: DMatrix<C64>,
}

impl ReducedDensity {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-9).
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let rho = ReducedDensity { matrix };
        rho.check(1e-9)?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<C64>) -> Self {
        ReducedDensity { matrix }
    }

    /// Pure-state projector `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &[C64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi);
        ReducedDensity {
            matrix: &v * v.adjoint(),
        }
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let d = self.dim();
        if d != 2 && d != 4 || self.matrix.ncols() != d {
            return Err(Error::invalid(
                "rho",
                format!("expected 2×2 or 4×4, got {d}×{}", self.matrix.ncols()),
            ));
        }
        let herm = (&self.matrix - self.matrix.adjoint()).norm();
        if herm > tol {
            return Err(Error::invalid("rho", format!("not Hermitian (deviation {herm:.2e})")));
        }
        if (self.trace() - 1.0).abs() > tol {
            return Err(Error::invalid("rho", format!("trace {} ≠ 1", self.trace())));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::invalid("rho", format!("negative eigenvalue {min:.2e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Marginal of qubit `k` (0 or 1) of a two-qubit density.
    pub fn marginal(&self, k: usize) -> Result<ReducedDensity> {
        if self.dim() != 4 || k > 1 {
            return Err(Error::invalid(
                "rho",
                "marginal needs a two-qubit density and k ∈ {0, 1}",
            ));
        }
        let mut m = DMatrix::<C64>::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                for o in 0..2 {
                    let (i, j) = if k == 0 {
                        (a + 2 * o, b + 2 * o)
                    } else {
                        (o + 2 * a, o + 2 * b)
                    };
                    m[(a, b)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(ReducedDensity { matrix: m })
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn single(rho: &ReducedDensity, what: &str) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::invalid("rho", format!("{what} needs a single-qubit density")));
    }
    Ok(())
}

/// `|ρ_{↑↓}|² / |ρ_{↑↓}(0)|²` for an initial `|+x⟩`, i.e. `4|ρ_{↑↓}|²`.
pub fn loschmidt_echo(rho: &ReducedDensity) -> Result<f64> {
    single(rho, "echo")?;
    Ok(4.0 * rho.matrix[(0, 1)].norm_sqr())
}

/// `Tr(ρ σ_z)`.
pub fn magnetization(rho: &ReducedDensity) -> Result<f64> {
    single(rho, "magnetization")?;
    Ok((rho.matrix[(0, 0)] - rho.matrix[(1, 1)]).re)
}

/// Wootters concurrence. The `λ_i` come from the Hermitian form
/// `√ρ ρ̃ √ρ`, which has the same spectrum as `ρ ρ̃`.
pub fn concurrence(rho: &ReducedDensity) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::invalid("rho", "concurrence needs a two-qubit density"));
    }
    let h = (&rho.matrix + rho.matrix.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(h);
    if let Some(&e) = eig.eigenvalues.iter().find(|&&e| e < NEGATIVE_EIGEN_LIMIT) {
        return Err(Error::Unphysical(format!(
            "density has eigenvalue {e:.2e}; concurrence undefined"
        )));
    }
    let v = &eig.eigenvectors;
    let sqrt_d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from(e.max(0.0).sqrt())));
    let sqrt_rho = v * sqrt_d * v.adjoint();
    // σʸ⊗σʸ reverses the basis order with signs (+, −, −, +) up to i² = −1.
    let yy = DMatrix::from_fn(4, 4, |i, j| {
        if i + j == 3 {
            C64::from(if i == 0 || i == 3 { -1.0 } else { 1.0 })
        } else {
            C64::from(0.0)
        }
    });
    let tilde = &yy * rho.matrix.map(|z| z.conj()) * &yy;
    let m = &sqrt_rho * tilde * &sqrt_rho;
    let mut lambda: Vec<f64> = hermitian_eigenvalues(&m)
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// Trace norm `Tr|ρ_a − ρ_b|`.
pub fn trace_distance(a: &ReducedDensity, b: &ReducedDensity) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("rho", "trace distance of densities of different size"));
    }
    Ok(hermitian_eigenvalues(&(&a.matrix - &b.matrix))
        .iter()
        .map(|e| e.abs())
        .sum())
}
