use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::axis::PulseAxis;
use super::dd::DdSequence;
use super::history::SignHistory;

/// One equation of a moment-constraint system, posed on a unit period.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// Σ α_i − 1
    Normalization,
    /// ∫ tᵏ f_μ dt
    Moment { axis: usize, k: u32 },
    /// Double-integral mixed moment of axes μ, ν.
    Mixed { mu: usize, nu: usize },
}

impl Constraint {
    /// Power of `T` the residual scales with.
    pub fn degree(self) -> i32 {
        match self {
            Constraint::Normalization => 0,
            Constraint::Moment { k, .. } => k as i32 + 1,
            Constraint::Mixed { .. } => 3,
        }
    }

    /// Lowest suppression order at which this constraint is required.
    pub fn order(self) -> u8 {
        match self {
            Constraint::Normalization => 0,
            Constraint::Moment { k, .. } => k as u8 + 1,
            Constraint::Mixed { .. } => 3,
        }
    }

    pub fn label(self) -> String {
        const N: [char; 3] = ['x', 'y', 'z'];
        match self {
            Constraint::Normalization => "sum".to_string(),
            Constraint::Moment { axis, k } => format!("m{k}_{}", N[axis]),
            Constraint::Mixed { mu, nu } => format!("mix_{}{}", N[mu], N[nu]),
        }
    }

    /// Residual on a history (the normalization residual is not defined here).
    pub fn eval<S: Scalar>(self, h: &SignHistory<S>) -> S {
        match self {
            Constraint::Normalization => h.period() - S::one(),
            Constraint::Moment { axis, k } => h.moment(axis, k),
            Constraint::Mixed { mu, nu } => h.pair_moment(mu, nu),
        }
    }
}

/// The moment equations that cancel the coupling to `O(T^{m+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    order: u8,
    axes: Vec<PulseAxis>,
    equations: Vec<Constraint>,
}

/// Constraints a sequence of nominal order `m` has to satisfy, excluding
/// normalization. `same_axis` adds the μ = ν mixed moments, which only
/// matter for qubits with σ_μ² ≠ 1.
pub fn constraints_for_order(order: u8, same_axis: bool) -> Vec<Constraint> {
    let mut eqs = Vec::new();
    for k in 0..order.min(3) as u32 {
        for axis in 0..3 {
            eqs.push(Constraint::Moment { axis, k });
        }
    }
    if order >= 3 {
        for (mu, nu) in [(0, 1), (0, 2), (1, 2)] {
            eqs.push(Constraint::Mixed { mu, nu });
        }
        if same_axis {
            for mu in 0..3 {
                eqs.push(Constraint::Mixed { mu, nu: mu });
            }
        }
    }
    eqs
}

impl ConstraintSystem {
    pub fn new(order: u8, axes: Vec<PulseAxis>) -> Result<Self> {
        Self::with_same_axis(order, axes, false)
    }

    pub fn with_same_axis(order: u8, axes: Vec<PulseAxis>, same_axis: bool) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::invalid("order", format!("{order} is not in 1..=3")));
        }
        if axes.iter().any(|a| !a.is_pauli()) {
            return Err(Error::invalid("axes", "pattern must contain x, y, z only"));
        }
        let mut equations = vec![Constraint::Normalization];
        equations.extend(constraints_for_order(order, same_axis));
        let sys = ConstraintSystem { order, axes, equations };
        let fits = if same_axis {
            sys.unknown_count() <= sys.equations.len()
        } else {
            sys.unknown_count() == sys.equations.len()
        };
        if !fits {
            return Err(Error::invalid(
                "axes",
                format!(
                    "order {order} has {} equations but pattern '{}' has {} intervals",
                    sys.equations.len(),
                    super::axis::format_axes(&sys.axes),
                    sys.unknown_count()
                ),
            ));
        }
        Ok(sys)
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn axes(&self) -> &[PulseAxis] {
        &self.axes
    }

    pub fn equations(&self) -> &[Constraint] {
        &self.equations
    }

    pub fn unknown_count(&self) -> usize {
        self.axes.len() + 1
    }

    /// True when there are exactly as many equations as intervals.
    pub fn is_square(&self) -> bool {
        self.equations.len() == self.unknown_count()
    }

    pub fn residuals<S: Scalar>(&self, alphas: &[S]) -> Vec<S> {
        let h = SignHistory::from_intervals(&self.axes, alphas);
        self.equations.iter().map(|c| c.eval(&h)).collect()
    }

    /// Analytic Jacobian, one row per equation, one column per interval.
    pub fn jacobian<S: Scalar>(&self, alphas: &[S]) -> Vec<Vec<S>> {
        let h = SignHistory::from_intervals(&self.axes, alphas);
        let n = alphas.len();
        let s = h.boundaries();
        // jump of f_μ at boundary j (1..=n); the sign after the last boundary is 0
        let jump = |mu: usize, j: usize| -> S {
            let before = S::from_int(h.sign(mu, j - 1) as i64);
            let after = if j < n {
                S::from_int(h.sign(mu, j) as i64)
            } else {
                S::zero()
            };
            before - after
        };
        self.equations
            .iter()
            .map(|&c| {
                // derivative with respect to each boundary s_1..s_n
                let dboundary: Vec<S> = (1..=n)
                    .map(|j| match c {
                        Constraint::Normalization => S::zero(),
                        Constraint::Moment { axis, k } => jump(axis, j) * ipow(s[j], k),
                        Constraint::Mixed { mu, nu } => {
                            jump(mu, j) * h.abs_kernel(nu, s[j]) + jump(nu, j) * h.abs_kernel(mu, s[j])
                        }
                    })
                    .collect();
                if c == Constraint::Normalization {
                    return vec![S::one(); n];
                }
                // s_j = Σ_{i<j} α_i, so ∂/∂α_i = Σ_{j>i} ∂/∂s_j
                let mut row = vec![S::zero(); n];
                let mut acc = S::zero();
                for i in (0..n).rev() {
                    acc = acc + dboundary[i];
                    row[i] = acc;
                }
                row
            })
            .collect()
    }
}

fn ipow<S: Scalar>(x: S, k: u32) -> S {
    (0..k).fold(S::one(), |a, _| a * x)
}

/// Largest `m ≤ 3` such that every constraint of order ≤ m holds within
/// `tol · T^{degree}`.
pub fn verify_order_within<S: Scalar>(seq: &DdSequence<S>, tol: S) -> u8 {
    let h = seq.sign_history();
    let t = seq.period();
    let mut order = 0;
    for m in 1..=3u8 {
        let ok = constraints_for_order(m, false)
            .into_iter()
            .filter(|c| c.order() == m)
            .all(|c| c.eval(&h).abs() <= tol * ipow(t, c.degree() as u32));
        if !ok {
            break;
        }
        order = m;
    }
    order
}

/// [`verify_order_within`] at the default tolerance `1e-8`.
pub fn verify_order<S: Scalar>(seq: &DdSequence<S>) -> u8 {
    let tol = S::from_f64(1e-8).unwrap_or_else(S::zero);
    verify_order_within(seq, tol)
}

/// Largest residual (scaled by `T^{degree}`) among the order-≤m constraints.
pub fn max_scaled_residual<S: Scalar>(seq: &DdSequence<S>, order: u8) -> S {
    let h = seq.sign_history();
    let t = seq.period();
    constraints_for_order(order, false)
        .into_iter()
        .map(|c| c.eval(&h).abs() / ipow(t, c.degree() as u32))
        .fold(S::zero(), S::max_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::sequence::axis::parse_axes;

    #[test]
    fn equation_counts() {
        let n = |m, p: &str| {
            ConstraintSystem::new(m, parse_axes(p).unwrap())
                .unwrap()
                .equations()
                .len()
        };
        assert_eq!(n(1, "xzx"), 4);
        assert_eq!(n(2, "xzxzxz"), 7);
        assert_eq!(n(3, &"xz".repeat(6)), 13);
        assert!(ConstraintSystem::new(1, parse_axes("xzxz").unwrap()).is_err());
        assert!(ConstraintSystem::new(4, parse_axes("xzx").unwrap()).is_err());
        let s = ConstraintSystem::with_same_axis(3, parse_axes(&"xz".repeat(6)).unwrap(), true).unwrap();
        assert_eq!(s.equations().len(), 16);
        assert!(!s.is_square());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let axes = parse_axes("xzyxzzyxzxyz").unwrap();
        let sys = ConstraintSystem::new(3, axes).unwrap();
        let alphas: Vec<f64> = (0..13).map(|i| 0.05 + 0.01 * ((i * 7) % 5) as f64).collect();
        let jac = sys.jacobian(&alphas);
        let h = 1e-6;
        for i in 0..alphas.len() {
            let mut up = alphas.clone();
            let mut dn = alphas.clone();
            up[i] += h;
            dn[i] -= h;
            let (ru, rd) = (sys.residuals(&up), sys.residuals(&dn));
            for (r, row) in jac.iter().enumerate() {
                let fd = (ru[r] - rd[r]) / (2.0 * h);
                assert!((fd - row[i]).abs() < 1e-8, "eq {r} col {i}: {fd} vs {}", row[i]);
            }
        }
    }

    #[test]
    fn exact_order_of_rational_sequences() {
        let q = |n, d| Rational::new(n, d);
        let m1 = DdSequence::new(parse_axes("xzx").unwrap(), vec![q(1, 4); 4]).unwrap();
        assert_eq!(verify_order_within(&m1, Rational::from_int(0)), 1);
        let app1 = DdSequence::new(
            parse_axes("xzxxzx").unwrap(),
            vec![q(1, 8), q(1, 8), q(1, 8), q(1, 4), q(1, 8), q(1, 8), q(1, 8)],
        )
        .unwrap();
        assert_eq!(verify_order_within(&app1, Rational::from_int(0)), 2);
    }

    #[test]
    fn no_pulses_is_order_zero() {
        let s = DdSequence::new(vec![], vec![1.0]).unwrap();
        assert_eq!(verify_order(&s), 0);
    }
}
