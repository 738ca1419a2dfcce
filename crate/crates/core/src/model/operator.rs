//! Hamiltonians as sums of one- and two-site terms on a register of spin-½
//! bits, applied without ever forming the full matrix.
//!
//! Bit `b` of a basis index is 0 for spin up and 1 for spin down, so
//! `σ_z = diag(1, -1)` in the usual order.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use crate::sequence::PulseAxis;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Pauli matrix along `axis`; the identity for `PulseAxis::Identity`.
pub fn pauli(axis: PulseAxis) -> Matrix2<C64> {
    match axis {
        PulseAxis::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
        PulseAxis::Y => Matrix2::new(ZERO, -I, I, ZERO),
        PulseAxis::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        PulseAxis::Identity => Matrix2::identity(),
    }
}

/// A local term. For two-site terms the local index is `bit(a) + 2 bit(b)`.
#[derive(Clone, Debug)]
pub enum Term {
    One { bit: usize, m: Matrix2<C64> },
    Two { a: usize, b: usize, m: Matrix4<C64> },
}

impl Term {
    /// `c · P_a ⊗ P_b` for Pauli products.
    pub fn pauli_pair(a: usize, pa: PulseAxis, b: usize, pb: PulseAxis, c: f64) -> Term {
        Term::Two {
            a,
            b,
            m: pauli(pb).kronecker(&pauli(pa)) * C64::from(c),
        }
    }

    pub fn bits(&self) -> (usize, Option<usize>) {
        match self {
            Term::One { bit, .. } => (*bit, None),
            Term::Two { a, b, .. } => (*a, Some(*b)),
        }
    }

    fn hermiticity_error(&self) -> f64 {
        match self {
            Term::One { m, .. } => (m - m.adjoint()).norm(),
            Term::Two { m, .. } => (m - m.adjoint()).norm(),
        }
    }

    /// `out += term · v`.
    fn apply_add(&self, v: &[C64], out: &mut [C64]) {
        match self {
            Term::One { bit, m } => {
                let mask = 1usize << bit;
                for i in (0..v.len()).filter(|i| i & mask == 0) {
                    let j = i | mask;
                    let (x0, x1) = (v[i], v[j]);
                    out[i] += m[(0, 0)] * x0 + m[(0, 1)] * x1;
                    out[j] += m[(1, 0)] * x0 + m[(1, 1)] * x1;
                }
            }
            Term::Two { a, b, m } => {
                let (ma, mb) = (1usize << a, 1usize << b);
                for i in (0..v.len()).filter(|i| i & (ma | mb) == 0) {
                    let idx = [i, i | ma, i | mb, i | ma | mb];
                    let x = [v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]];
                    for (r, &ir) in idx.iter().enumerate() {
                        out[ir] += m[(r, 0)] * x[0] + m[(r, 1)] * x[1] + m[(r, 2)] * x[2] + m[(r, 3)] * x[3];
                    }
                }
            }
        }
    }

    /// Replaces `v` by `u · v` where `u` is a matrix of the same shape as the term.
    pub(crate) fn apply_local(bits: (usize, Option<usize>), u: &DMatrix<C64>, v: &mut [C64]) {
        match bits {
            (bit, None) => {
                let mask = 1usize << bit;
                for i in (0..v.len()).filter(|i| i & mask == 0) {
                    let j = i | mask;
                    let (x0, x1) = (v[i], v[j]);
                    v[i] = u[(0, 0)] * x0 + u[(0, 1)] * x1;
                    v[j] = u[(1, 0)] * x0 + u[(1, 1)] * x1;
                }
            }
            (a, Some(b)) => {
                let (ma, mb) = (1usize << a, 1usize << b);
                for i in (0..v.len()).filter(|i| i & (ma | mb) == 0) {
                    let idx = [i, i | ma, i | mb, i | ma | mb];
                    let x = [v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]];
                    for (r, &ir) in idx.iter().enumerate() {
                        v[ir] = u[(r, 0)] * x[0] + u[(r, 1)] * x[1] + u[(r, 2)] * x[2] + u[(r, 3)] * x[3];
                    }
                }
            }
        }
    }

    /// The term as a small dense matrix (2×2 or 4×4).
    pub fn local_matrix(&self) -> DMatrix<C64> {
        match self {
            Term::One { m, .. } => DMatrix::from_iterator(2, 2, m.iter().copied()),
            Term::Two { m, .. } => DMatrix::from_iterator(4, 4, m.iter().copied()),
        }
    }
}

/// Hermitian operator on `n_bits` spins, stored as a list of local terms.
#[derive(Clone, Debug)]
pub struct Operator {
    n_bits: usize,
    terms: Vec<Term>,
}

impl Operator {
    pub fn zero(n_bits: usize) -> Self {
        Operator {
            n_bits,
            terms: Vec::new(),
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_bits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, term: Term) {
        let (a, b) = term.bits();
        assert!(a < self.n_bits && b.is_none_or(|b| b < self.n_bits && b != a));
        self.terms.push(term);
    }

    /// Sum of two operators on the same register.
    pub fn plus(mut self, other: &Operator) -> Operator {
        assert_eq!(self.n_bits, other.n_bits);
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    /// Same terms with every bit index moved up by `offset`, on a register
    /// of `n_bits` spins.
    pub fn shifted(&self, offset: usize, n_bits: usize) -> Operator {
        let mut out = Operator::zero(n_bits);
        for t in &self.terms {
            out.push(match t {
                Term::One { bit, m } => Term::One {
                    bit: bit + offset,
                    m: *m,
                },
                Term::Two { a, b, m } => Term::Two {
                    a: a + offset,
                    b: b + offset,
                    m: *m,
                },
            });
        }
        out
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        assert_eq!(v.len(), self.dim());
        out.iter_mut().for_each(|x| *x = ZERO);
        for t in &self.terms {
            t.apply_add(v, out);
        }
    }

    pub fn apply_new(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        self.apply(v, &mut out);
        out
    }

    /// `⟨v|H|v⟩` (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let hv = self.apply_new(v);
        v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest Frobenius deviation of any local term from its adjoint.
    pub fn hermiticity_error(&self) -> f64 {
        self.terms.iter().map(Term::hermiticity_error).fold(0.0, f64::max)
    }

    /// Dense matrix; only sensible for a dozen bits or fewer.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![ZERO; d];
        let mut col = vec![ZERO; d];
        for j in 0..d {
            e[j] = ONE;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = ZERO;
        }
        m
    }

    /// Cheap upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::One { m, .. } => m.norm(),
                Term::Two { m, .. } => m.norm(),
            })
            .sum()
    }
}

/// `Σ_b σ_z^{(b)}/2` over the listed bits, as a diagonal operator.
pub fn total_sz(n_bits: usize, bits: impl IntoIterator<Item = usize>) -> Operator {
    let mut op = Operator::zero(n_bits);
    for b in bits {
        op.push(Term::One {
            bit: b,
            m: pauli(PulseAxis::Z) * C64::from(0.5),
        });
    }
    op
}
