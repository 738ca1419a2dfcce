//! Lowest eigenpairs of a Hermitian [`Operator`]: dense diagonalization for
//! small registers, restarted Lanczos with deflation otherwise.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operator::{Operator, ZERO};
use crate::error::{Error, Result};
use crate::vecops::{axpy, dot, norm, normalize, orthogonalize};

const DENSE_LIMIT: usize = 256;
const KRYLOV_DIM: usize = 60;
const MAX_RESTARTS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalue and normalized eigenvector.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub energy: f64,
    pub state: Vec<C64>,
}

impl Eigenpair {
    /// `‖H v − E v‖`.
    pub fn residual(&self, op: &Operator) -> f64 {
        let mut r = op.apply_new(&self.state);
        axpy(C64::from(-self.energy), &self.state, &mut r);
        norm(&r)
    }
}

/// The `n` lowest eigenpairs in ascending order of energy.
pub fn lowest_eigenpairs(op: &Operator, n: usize, seed: u64) -> Result<Vec<Eigenpair>> {
    let dim = op.dim();
    if n == 0 || n > dim {
        return Err(Error::invalid("n_states", format!("must be in 1..={dim}, got {n}")));
    }
    if dim <= DENSE_LIMIT {
        return Ok(dense_lowest(&op.to_dense(), n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, 0.0)).collect();
        orthogonalize(&mut x, &locked);
        normalize(&mut x);
        let mut last = f64::INFINITY;
        let mut pair = None;
        for _ in 0..MAX_RESTARTS {
            let (theta, y) = lanczos_pass(op, &x, &locked)?;
            x = y;
            let candidate = Eigenpair {
                energy: theta,
                state: x.clone(),
            };
            last = candidate.residual(op);
            if last < RESIDUAL_TOL * theta.abs().max(1.0) {
                pair = Some(candidate);
                break;
            }
        }
        let pair = pair.ok_or_else(|| Error::NotConverged {
            method: "lanczos",
            detail: format!("eigenpair {k}: residual {last:.2e} after {MAX_RESTARTS} restarts"),
        })?;
        locked.push(pair.state.clone());
        out.push(pair);
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// One Lanczos pass from `start`, kept orthogonal to `locked`. Returns the
/// lowest Ritz pair.
fn lanczos_pass(op: &Operator, start: &[C64], locked: &[Vec<C64>]) -> Result<(f64, Vec<C64>)> {
    let dim = op.dim();
    let m = KRYLOV_DIM.min(dim - locked.len());
    let mut basis: Vec<Vec<C64>> = vec![start.to_vec()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![ZERO; dim];
    for j in 0..m {
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        if j + 1 == m || b < 1e-12 {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
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
    let eig = SymmetricEigen::new(t);
    let imin = eig.eigenvalues.argmin().0;
    let theta = eig.eigenvalues[imin];
    let mut x = vec![ZERO; dim];
    for (i, v) in basis.iter().take(k).enumerate() {
        axpy(C64::from(eig.eigenvectors[(i, imin)]), v, &mut x);
    }
    orthogonalize(&mut x, locked);
    if normalize(&mut x) == 0.0 {
        return Err(Error::NotConverged {
            method: "lanczos",
            detail: "Ritz vector vanished".into(),
        });
    }
    Ok((theta, x))
}

fn dense_lowest(h: &DMatrix<C64>, n: usize) -> Vec<Eigenpair> {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(n)
        .map(|i| Eigenpair {
            energy: eig.eigenvalues[i],
            state: eig.eigenvectors.column(i).iter().copied().collect(),
        })
        .collect()
}
