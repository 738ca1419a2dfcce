use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::axis::PulseAxis;

/// Per-axis ±1 sign of the toggled coupling on each interval.
///
/// Interval `j` spans `[boundaries[j], boundaries[j + 1]]`. Signs start at
/// `(+, +, +)` and every pulse along μ negates the two other axes.
#[derive(Clone, Debug, PartialEq)]
pub struct SignHistory<S> {
    boundaries: Vec<S>,
    signs: Vec<[i8; 3]>,
}

/// Flip rule: a π pulse along `axis` negates the signs of the other two axes.
pub fn flip(signs: [i8; 3], axis: PulseAxis) -> [i8; 3] {
    match axis.index() {
        None => signs,
        Some(mu) => {
            let mut out = signs;
            for (nu, s) in out.iter_mut().enumerate() {
                if nu != mu {
                    *s = -*s;
                }
            }
            out
        }
    }
}

/// Sign vectors on each interval for the given interior pulses.
pub fn interval_signs(axes: &[PulseAxis]) -> Vec<[i8; 3]> {
    let mut signs = Vec::with_capacity(axes.len() + 1);
    let mut current = [1i8; 3];
    signs.push(current);
    for &a in axes {
        current = flip(current, a);
        signs.push(current);
    }
    signs
}

impl<S: Scalar> SignHistory<S> {
    /// Builds the history from interior axes and interval lengths
    /// (already scaled by the period).
    pub fn from_intervals(axes: &[PulseAxis], intervals: &[S]) -> Self {
        assert_eq!(
            intervals.len(),
            axes.len() + 1,
            "need one more interval than interior pulses"
        );
        let mut boundaries = Vec::with_capacity(intervals.len() + 1);
        let mut s = S::zero();
        boundaries.push(s);
        for &dt in intervals {
            s = s + dt;
            boundaries.push(s);
        }
        SignHistory {
            boundaries,
            signs: interval_signs(axes),
        }
    }

    /// History with no pulses: every sign is +1 on `[0, period]`.
    pub fn constant(period: S) -> Self {
        SignHistory {
            boundaries: vec![S::zero(), period],
            signs: vec![[1; 3]],
        }
    }

    pub fn boundaries(&self) -> &[S] {
        &self.boundaries
    }

    pub fn interval_count(&self) -> usize {
        self.signs.len()
    }

    pub fn period(&self) -> S {
        *self.boundaries.last().unwrap()
    }

    /// Sign of axis `mu` on interval `j`.
    pub fn sign(&self, mu: usize, j: usize) -> i8 {
        self.signs[j][mu]
    }

    /// Sign vectors per interval.
    pub fn signs(&self) -> &[[i8; 3]] {
        &self.signs
    }

    /// f_μ(t); right-continuous, with the last interval closed at `T`.
    pub fn value(&self, mu: usize, t: S) -> i8 {
        let k = self.signs.len();
        let j = self.boundaries[1..k].iter().take_while(|&&b| b <= t).count();
        self.signs[j.min(k - 1)][mu]
    }

    fn signed(&self, mu: usize, j: usize, x: S) -> S {
        if self.signs[j][mu] > 0 {
            x
        } else {
            -x
        }
    }

    /// ∫₀ᵀ tᵏ f_μ(t) dt, summed exactly over the constant pieces.
    pub fn moment(&self, mu: usize, k: u32) -> S {
        let kp1 = S::from_int(k as i64 + 1);
        self.boundaries
            .windows(2)
            .enumerate()
            .map(|(j, w)| self.signed(mu, j, (pow(w[1], k + 1) - pow(w[0], k + 1)) / kp1))
            .fold(S::zero(), |a, b| a + b)
    }

    /// ∫₀ᵀ dt₁ ∫₀^{t₁} dt₂ (t₁ − t₂) [f_μ(t₁) f_ν(t₂) + f_μ(t₂) f_ν(t₁)].
    ///
    /// Defined for every pair, including μ = ν; see [`mixed_moment`] for the
    /// spin-½ restriction.
    pub fn pair_moment(&self, mu: usize, nu: usize) -> S {
        self.half_pair(mu, nu) + self.half_pair(nu, mu)
    }

    /// ∫ f_a(t₁) ∫₀^{t₁} (t₁ − t₂) f_b(t₂) dt₂ dt₁.
    fn half_pair(&self, a: usize, b: usize) -> S {
        let two = S::from_int(2);
        let six = S::from_int(6);
        // running ∫₀^{s_j} f_b and ∫₀^{s_j} t f_b
        let mut f0 = S::zero();
        let mut f1 = S::zero();
        let mut total = S::zero();
        for (j, w) in self.boundaries.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            let d = hi - lo;
            let sq = (hi * hi - lo * lo) / two;
            let inner = f0 * sq - f1 * d + self.signed(b, j, d * d * d / six);
            total = total + self.signed(a, j, inner);
            f0 = f0 + self.signed(b, j, d);
            f1 = f1 + self.signed(b, j, sq);
        }
        total
    }

    /// g_ν(x) = ∫₀ᵀ |x − t| f_ν(t) dt.
    pub(crate) fn abs_kernel(&self, nu: usize, x: S) -> S {
        let two = S::from_int(2);
        self.boundaries
            .windows(2)
            .enumerate()
            .map(|(j, w)| {
                let (a, b) = (w[0], w[1]);
                let piece = if x <= a {
                    (b * b - a * a) / two - x * (b - a)
                } else if x >= b {
                    x * (b - a) - (b * b - a * a) / two
                } else {
                    ((x - a) * (x - a) + (b - x) * (b - x)) / two
                };
                self.signed(nu, j, piece)
            })
            .fold(S::zero(), |a, b| a + b)
    }

    /// Time reversal: intervals and sign vectors in reverse order.
    pub fn reversed(&self) -> Self {
        let total = self.period();
        let boundaries = self.boundaries.iter().rev().map(|&b| total - b).collect();
        let signs = self.signs.iter().rev().copied().collect();
        SignHistory { boundaries, signs }
    }
}

fn pow<S: Scalar>(x: S, n: u32) -> S {
    (0..n).fold(S::one(), |acc, _| acc * x)
}

/// ∫₀ᵀ tᵏ f_μ(t) dt.
pub fn moment<S: Scalar>(h: &SignHistory<S>, axis: PulseAxis, k: u32) -> Result<S> {
    let mu = axis
        .index()
        .ok_or_else(|| Error::invalid("axis", "moments are defined for x, y, z only"))?;
    Ok(h.moment(mu, k))
}

/// Cross-axis mixed moment. Rejects μ = ν: for spin-½ qubits σ_μ² = 1, so
/// those terms never reach the qubit dynamics. Use
/// [`SignHistory::pair_moment`] to evaluate them anyway.
pub fn mixed_moment<S: Scalar>(h: &SignHistory<S>, mu: PulseAxis, nu: PulseAxis) -> Result<S> {
    match (mu.index(), nu.index()) {
        (Some(a), Some(b)) if a != b => Ok(h.pair_moment(a, b)),
        (Some(_), Some(_)) => Err(Error::invalid(
            "mixed_moment",
            "axes must differ (same-axis terms do not act on spin-1/2 qubits)",
        )),
        _ => Err(Error::invalid("mixed_moment", "axes must be x, y or z")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::sequence::axis::parse_axes;

    #[test]
    fn xzx_signs() {
        let h = SignHistory::from_intervals(&parse_axes("xzx").unwrap(), &[0.25; 4]);
        let col = |mu: usize| (0..4).map(|j| h.sign(mu, j)).collect::<Vec<_>>();
        assert_eq!(col(0), vec![1, 1, -1, -1]);
        assert_eq!(col(1), vec![1, -1, 1, -1]);
        assert_eq!(col(2), vec![1, -1, -1, 1]);
        for mu in 0..3 {
            assert_eq!(h.moment(mu, 0), 0.0);
        }
    }

    #[test]
    fn empty_and_single_pulse() {
        let h = SignHistory::<f64>::from_intervals(&[], &[1.0]);
        assert_eq!(h.signs(), &[[1, 1, 1]]);
        assert_eq!(h.moment(2, 0), 1.0);

        let h = SignHistory::from_intervals(&[PulseAxis::X], &[0.5, 0.5]);
        assert_eq!(h.signs(), &[[1, 1, 1], [1, -1, -1]]);
    }

    #[test]
    fn flip_is_an_involution() {
        for a in super::super::axis::PAULI_AXES {
            for s in [[1, 1, 1], [1, -1, -1], [-1, 1, -1]] {
                assert_eq!(flip(flip(s, a), a), s);
            }
        }
    }

    #[test]
    fn constant_history_mixed_moment() {
        let h = SignHistory::constant(Rational::from_int(1));
        assert_eq!(h.pair_moment(0, 2), Rational::new(1, 3));
        let h = SignHistory::constant(2.0f64);
        assert!((h.pair_moment(0, 2) - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn value_lookup() {
        let h = SignHistory::from_intervals(&parse_axes("xzx").unwrap(), &[0.25; 4]);
        assert_eq!(h.value(0, 0.0), 1);
        assert_eq!(h.value(0, 0.6), -1);
        assert_eq!(h.value(2, 1.0), 1);
    }

    #[test]
    fn same_axis_rejected() {
        let h = SignHistory::constant(1.0);
        assert!(mixed_moment(&h, PulseAxis::X, PulseAxis::X).is_err());
        assert!(mixed_moment(&h, PulseAxis::X, PulseAxis::Z).is_ok());
        assert!(moment(&h, PulseAxis::Identity, 0).is_err());
    }

    #[test]
    fn abs_kernel_matches_definition_on_constant() {
        // ∫₀¹ |x − t| dt = x²/2 + (1 − x)²/2
        let h = SignHistory::constant(1.0f64);
        for x in [0.0f64, 0.3, 1.0, 1.5] {
            let expect = if x <= 1.0 {
                x * x / 2.0 + (1.0 - x) * (1.0 - x) / 2.0
            } else {
                x - 0.5
            };
            assert!((h.abs_kernel(0, x) - expect).abs() < 1e-15);
        }
    }
}
