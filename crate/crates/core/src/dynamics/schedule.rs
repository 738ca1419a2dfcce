//! Turning a sequence into a timeline of evolution segments and kicks.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::pauli;
use crate::sequence::PulseAxis;
use crate::Sequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseMode {
    /// Instantaneous π rotations at the pulse times.
    Ideal,
    /// Square pulses of width `τ_p` and amplitude `π/τ_p`.
    FiniteWidth,
}

/// Where the computing rotation `R_x(θ)` goes within each cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Insertion {
    None,
    /// A constant transverse field `B = θ/T` along x for the whole cycle.
    ConstantField,
    /// A pulse of width `τ_o = τ_p` in the middle of interval `⌊K/2⌋`.
    MidCycle,
    /// A pulse of width `τ_o = τ_p` right after the parity pulse.
    AfterCycle,
}

macro_rules! text_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $($s => Ok($v),)+
                    other => Err(format!("unknown value '{other}'")),
                }
            }
        }
    };
}

text_enum!(PulseMode, PulseMode::Ideal => "ideal", PulseMode::FiniteWidth => "finite");
text_enum!(
    Insertion,
    Insertion::None => "none",
    Insertion::ConstantField => "constant_field",
    Insertion::MidCycle => "mid_cycle",
    Insertion::AfterCycle => "after_cycle"
);

/// One piece of a cycle, applied identically to every qubit.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// Evolve under `H₀ + Σ_q field_q` for `duration`.
    Evolve { duration: f64, field: Option<Matrix2<C64>> },
    /// Instantaneous single-qubit unitary.
    Kick(Matrix2<C64>),
}

/// `exp(−i φ σ_axis / 2)`.
pub fn rotation(axis: PulseAxis, phi: f64) -> Matrix2<C64> {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    Matrix2::identity() * C64::from(c) - pauli(axis) * C64::new(0.0, s)
}

/// Control term `A σ_axis / 2`.
fn drive(axis: PulseAxis, amplitude: f64) -> Matrix2<C64> {
    pauli(axis) * C64::from(0.5 * amplitude)
}

fn add(a: Option<Matrix2<C64>>, b: Matrix2<C64>) -> Option<Matrix2<C64>> {
    Some(a.map_or(b, |a| a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Period and pulse width are taken from the sequence.
    pub seq: Sequence,
    pub mode: PulseMode,
    pub insertion: Insertion,
    pub theta: f64,
    pub n_cycles: usize,
}

impl Schedule {
    pub fn new(seq: Sequence, mode: PulseMode) -> Self {
        Schedule {
            seq,
            mode,
            insertion: Insertion::None,
            theta: 0.0,
            n_cycles: 1,
        }
    }

    pub fn with_insertion(mut self, insertion: Insertion, theta: f64) -> Self {
        self.insertion = insertion;
        self.theta = theta;
        self
    }

    pub fn with_cycles(mut self, n: usize) -> Self {
        self.n_cycles = n;
        self
    }

    /// Index of the interval that receives a mid-cycle computing pulse.
    pub fn mid_interval(&self) -> usize {
        self.seq.alphas().len() / 2
    }

    fn pulse_width(&self) -> f64 {
        match self.mode {
            PulseMode::Ideal => 0.0,
            PulseMode::FiniteWidth => self.seq.pulse_width(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cycles == 0 {
            return Err(Error::invalid("cycles", "need at least one cycle"));
        }
        if !(self.seq.period() > 0.0) {
            return Err(Error::invalid("period", "must be positive"));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if self.mode == PulseMode::FiniteWidth {
            if !(self.seq.pulse_width() > 0.0) {
                return Err(Error::invalid("pulse_width", "finite-width mode needs τ_p > 0"));
            }
            self.seq.check_non_overlap()?;
            if self.insertion == Insertion::MidCycle {
                let tau = self.seq.pulse_width();
                let a = self.seq.alphas()[self.mid_interval()];
                let required = 2.0 * tau / a;
                if self.seq.period() * (1.0 + 1e-12) < required {
                    return Err(Error::Overlap {
                        period: self.seq.period(),
                        required,
                    });
                }
            }
        }
        Ok(())
    }

    /// Duration of one cycle.
    pub fn cycle_length(&self) -> f64 {
        let extra = match (self.mode, self.insertion) {
            (PulseMode::FiniteWidth, Insertion::AfterCycle) => self.seq.pulse_width(),
            _ => 0.0,
        };
        self.seq.period() + extra
    }

    /// Timeline of one cycle. Each pulse ends at its cumulative time
    /// `T Σ_{i≤k} α_i`, so the parity pulse ends exactly at `T`.
    pub fn cycle_steps(&self) -> Result<Vec<Step>> {
        self.validate()?;
        let seq = &self.seq;
        let t = seq.period();
        let tau = self.pulse_width();
        let theta = self.theta;
        let background = match self.insertion {
            Insertion::ConstantField => Some(drive(PulseAxis::X, theta / t)),
            _ => None,
        };
        let mid = self.mid_interval();
        let mut steps = Vec::new();
        let evolve = |steps: &mut Vec<Step>, duration: f64, field: Option<Matrix2<C64>>| {
            if duration > 0.0 {
                steps.push(Step::Evolve { duration, field });
            }
        };
        for (k, &alpha) in seq.alphas().iter().enumerate() {
            let axis = seq.axes().get(k).copied().unwrap_or(seq.parity());
            let width = if axis.is_pauli() { tau } else { 0.0 };
            let free = (alpha * t - width).max(0.0);
            if k == mid && self.insertion == Insertion::MidCycle {
                match self.mode {
                    PulseMode::Ideal => {
                        evolve(&mut steps, free / 2.0, background);
                        steps.push(Step::Kick(rotation(PulseAxis::X, theta)));
                        evolve(&mut steps, free / 2.0, background);
                    }
                    PulseMode::FiniteWidth => {
                        let pad = ((free - tau) / 2.0).max(0.0);
                        evolve(&mut steps, pad, background);
                        evolve(&mut steps, tau, add(background, drive(PulseAxis::X, theta / tau)));
                        evolve(&mut steps, pad, background);
                    }
                }
            } else {
                evolve(&mut steps, free, background);
            }
            if axis.is_pauli() {
                match self.mode {
                    PulseMode::Ideal => steps.push(Step::Kick(rotation(axis, std::f64::consts::PI))),
                    PulseMode::FiniteWidth => evolve(
                        &mut steps,
                        tau,
                        add(background, drive(axis, std::f64::consts::PI / tau)),
                    ),
                }
            }
        }
        if self.insertion == Insertion::AfterCycle {
            match self.mode {
                PulseMode::Ideal => steps.push(Step::Kick(rotation(PulseAxis::X, theta))),
                PulseMode::FiniteWidth => evolve(&mut steps, tau, Some(drive(PulseAxis::X, theta / tau))),
            }
        }
        Ok(steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::catalog_sequence;

    fn duration(steps: &[Step]) -> f64 {
        steps
            .iter()
            .map(|s| match s {
                Step::Evolve { duration, .. } => *duration,
                Step::Kick(_) => 0.0,
            })
            .sum()
    }

    #[test]
    fn ideal_cycle_has_one_kick_per_pulse() {
        let seq = catalog_sequence::<f64>("m1_xz").unwrap().with_period(2.0);
        let steps = Schedule::new(seq, PulseMode::Ideal).cycle_steps().unwrap();
        assert_eq!(steps.iter().filter(|s| matches!(s, Step::Kick(_))).count(), 4);
        assert!((duration(&steps) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn finite_cycle_tiles_period() {
        let seq = catalog_sequence::<f64>("m2_xzxzxz").unwrap().with_pulse_width(0.1);
        let t = seq.minimum_period();
        let sched = Schedule::new(seq.with_period(t), PulseMode::FiniteWidth);
        let steps = sched.cycle_steps().unwrap();
        assert!((duration(&steps) - t).abs() < 1e-12);
        let with_after = sched.clone().with_insertion(Insertion::AfterCycle, 1.0);
        assert!((duration(&with_after.cycle_steps().unwrap()) - t - 0.1).abs() < 1e-12);
        assert!((with_after.cycle_length() - t - 0.1).abs() < 1e-12);
        // With equal intervals the touching period leaves no room for a
        // mid-cycle pulse.
        let m1 = catalog_sequence::<f64>("m1_xz")
            .unwrap()
            .with_pulse_width(0.1)
            .with_period(0.4);
        assert!(matches!(
            Schedule::new(m1, PulseMode::FiniteWidth)
                .with_insertion(Insertion::MidCycle, 1.0)
                .cycle_steps(),
            Err(Error::Overlap { .. })
        ));
    }

    #[test]
    fn overlap_rejected() {
        let seq = catalog_sequence::<f64>("m1_xz")
            .unwrap()
            .with_pulse_width(0.5)
            .with_period(1.0);
        assert!(matches!(
            Schedule::new(seq, PulseMode::FiniteWidth).validate(),
            Err(Error::Overlap { .. })
        ));
    }

    #[test]
    fn rotation_by_pi_is_pauli() {
        let r = rotation(PulseAxis::Y, std::f64::consts::PI);
        assert!((r - pauli(PulseAxis::Y) * C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn text_forms() {
        assert_eq!("after_cycle".parse::<Insertion>().unwrap(), Insertion::AfterCycle);
        assert_eq!(Insertion::MidCycle.to_string(), "mid_cycle");
        assert_eq!("finite".parse::<PulseMode>().unwrap(), PulseMode::FiniteWidth);
    }
}
