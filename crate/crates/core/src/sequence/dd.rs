use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::axis::{format_axes, parity_pulse, PulseAxis};
use super::history::SignHistory;

/// A decoupling cycle: interior π pulses, the spacings between pulse centers
/// as fractions of the period, and a closing parity pulse at `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdSequence<S> {
    axes: Vec<PulseAxis>,
    alphas: Vec<S>,
    parity: PulseAxis,
    period: S,
    pulse_width: S,
}

impl<S: Scalar> DdSequence<S> {
    /// Unit-period ideal-pulse sequence. `alphas` must be positive, one longer
    /// than `axes`, and sum to one.
    pub fn new(axes: Vec<PulseAxis>, alphas: Vec<S>) -> Result<Self> {
        if axes.iter().any(|a| !a.is_pauli()) {
            return Err(Error::invalid("axes", "interior pulses must be x, y or z"));
        }
        if alphas.len() != axes.len() + 1 {
            return Err(Error::invalid(
                "alphas",
                format!(
                    "{} pulses need {} intervals, got {}",
                    axes.len(),
                    axes.len() + 1,
                    alphas.len()
                ),
            ));
        }
        if let Some(a) = alphas.iter().find(|&&a| a <= S::zero()) {
            return Err(Error::invalid("alphas", format!("interval {a} is not positive")));
        }
        let sum = S::sum_of(&alphas);
        if (sum - S::one()).abs() > S::invariant_tolerance() {
            return Err(Error::invalid("alphas", format!("intervals sum to {sum}, not 1")));
        }
        let parity = parity_pulse(&axes);
        Ok(DdSequence {
            axes,
            alphas,
            parity,
            period: S::one(),
            pulse_width: S::zero(),
        })
    }

    /// Same as [`new`](Self::new) after rescaling the intervals to sum to one.
    pub fn normalized(axes: Vec<PulseAxis>, alphas: &[S]) -> Result<Self> {
        let sum = S::sum_of(alphas);
        if sum <= S::zero() {
            return Err(Error::invalid("alphas", "intervals must have a positive sum"));
        }
        DdSequence::new(axes, alphas.iter().map(|&a| a / sum).collect())
    }

    pub fn with_period(mut self, period: S) -> Self {
        self.period = period;
        self
    }

    pub fn with_pulse_width(mut self, width: S) -> Self {
        self.pulse_width = width;
        self
    }

    pub fn axes(&self) -> &[PulseAxis] {
        &self.axes
    }

    pub fn alphas(&self) -> &[S] {
        &self.alphas
    }

    pub fn parity(&self) -> PulseAxis {
        self.parity
    }

    pub fn period(&self) -> S {
        self.period
    }

    pub fn pulse_width(&self) -> S {
        self.pulse_width
    }

    /// Interior pulses plus the parity pulse when it is not the identity.
    pub fn pulse_count(&self) -> usize {
        self.axes.len() + usize::from(self.parity.is_pauli())
    }

    pub fn pattern(&self) -> String {
        format_axes(&self.axes)
    }

    /// Pulse centers `t_k = T Σ_{i≤k} α_i` of the interior pulses.
    pub fn pulse_centers(&self) -> Vec<S> {
        let mut t = S::zero();
        self.alphas[..self.axes.len()]
            .iter()
            .map(|&a| {
                t = t + a * self.period;
                t
            })
            .collect()
    }

    /// Sign history over `[0, T]`.
    pub fn sign_history(&self) -> SignHistory<S> {
        let scaled: Vec<S> = self.alphas.iter().map(|&a| a * self.period).collect();
        SignHistory::from_intervals(&self.axes, &scaled)
    }

    pub fn min_alpha(&self) -> S {
        self.alphas.iter().copied().fold(self.alphas[0], S::min_of)
    }

    /// Smallest period for which square pulses of the current width do not
    /// overlap: `τ_p / min α`.
    pub fn minimum_period(&self) -> S {
        self.pulse_width / self.min_alpha()
    }

    /// Non-overlap check for finite-width pulses. Touching pulses (T equal to
    /// the minimum period) are accepted.
    pub fn check_non_overlap(&self) -> Result<()> {
        if self.pulse_width <= S::zero() {
            return Ok(());
        }
        let required = self.minimum_period();
        let slack = required * S::invariant_tolerance();
        if self.period + slack < required {
            return Err(Error::Overlap {
                period: self.period.to_f64().unwrap_or(f64::NAN),
                required: required.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Relabels axes x → y → z → x, keeping the timing.
    pub fn cycled(&self) -> Self {
        let axes: Vec<PulseAxis> = self.axes.iter().map(|a| a.cycled()).collect();
        DdSequence {
            parity: parity_pulse(&axes),
            axes,
            ..self.clone()
        }
    }

    /// Time-reversed sequence (intervals and pulses in reverse order).
    pub fn reversed(&self) -> Self {
        let axes: Vec<PulseAxis> = self.axes.iter().rev().copied().collect();
        DdSequence {
            parity: parity_pulse(&axes),
            axes,
            alphas: self.alphas.iter().rev().copied().collect(),
            ..self.clone()
        }
    }

    /// Converts the scalar type, e.g. `f64` to `f32`.
    pub fn cast<T: Scalar>(&self) -> Option<DdSequence<T>> {
        let conv = |x: S| x.to_f64().and_then(T::from_f64);
        Some(DdSequence {
            axes: self.axes.clone(),
            alphas: self.alphas.iter().map(|&a| conv(a)).collect::<Option<_>>()?,
            parity: self.parity,
            period: conv(self.period)?,
            pulse_width: conv(self.pulse_width)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::sequence::axis::parse_axes;

    #[test]
    fn validates_intervals() {
        let axes = parse_axes("xzx").unwrap();
        assert!(DdSequence::new(axes.clone(), vec![0.25; 4]).is_ok());
        assert!(DdSequence::new(axes.clone(), vec![0.25; 3]).is_err());
        assert!(DdSequence::new(axes.clone(), vec![0.5, 0.5, 0.0, 0.0]).is_err());
        assert!(DdSequence::new(axes.clone(), vec![0.3; 4]).is_err());
        let s = DdSequence::normalized(axes, &[1.0; 4]).unwrap();
        assert_eq!(s.alphas(), &[0.25; 4]);
        assert_eq!(s.parity(), PulseAxis::Z);
        assert_eq!(s.pulse_count(), 4);
    }

    #[test]
    fn centers_and_overlap() {
        let s = DdSequence::new(parse_axes("xzx").unwrap(), vec![0.25; 4])
            .unwrap()
            .with_period(2.0)
            .with_pulse_width(0.5);
        assert_eq!(s.pulse_centers(), vec![0.5, 1.0, 1.5]);
        assert_eq!(s.minimum_period(), 2.0);
        assert!(s.check_non_overlap().is_ok());
        let s = s.with_period(1.9);
        assert!(matches!(s.check_non_overlap(), Err(Error::Overlap { .. })));
    }

    #[test]
    fn exact_rationals() {
        let q = Rational::new(1, 4);
        let s = DdSequence::new(parse_axes("xzx").unwrap(), vec![q; 4]).unwrap();
        let h = s.sign_history();
        for mu in 0..3 {
            assert_eq!(h.moment(mu, 0), Rational::from_int(0));
        }
    }

    #[test]
    fn cycling_and_reversal_recompute_parity() {
        let s = DdSequence::new(parse_axes("xzx").unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = s.cycled();
        assert_eq!(c.pattern(), "yxy");
        assert_eq!(c.parity(), PulseAxis::X);
        let r = s.reversed();
        assert_eq!(r.alphas(), &[0.4, 0.3, 0.2, 0.1]);
    }
}
