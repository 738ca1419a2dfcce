//! Small helpers on complex amplitude slices.

use num_complex::Complex64 as C64;

/// `⟨a|b⟩`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += c x`.
pub fn axpy(c: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += c * xi);
}

pub fn scale(c: C64, x: &mut [C64]) {
    x.iter_mut().for_each(|xi| *xi *= c);
}

/// Normalizes in place and returns the old norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(C64::from(1.0 / n), x);
    }
    n
}

/// Removes the components of `x` along each (orthonormal) vector in `basis`,
/// twice for stability.
pub fn orthogonalize(x: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, x);
            axpy(-c, b, x);
        }
    }
}
