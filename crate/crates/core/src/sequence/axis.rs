use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Control axis of a π pulse.
///
/// `Identity` only ever appears as a parity pulse, when the interior pulses
/// already multiply to a multiple of the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PulseAxis {
    X,
    Y,
    Z,
    Identity,
}

/// The three Pauli directions, in index order.
pub const PAULI_AXES: [PulseAxis; 3] = [PulseAxis::X, PulseAxis::Y, PulseAxis::Z];

impl PulseAxis {
    /// Index 0, 1, 2 for x, y, z.
    pub fn index(self) -> Option<usize> {
        match self {
            PulseAxis::X => Some(0),
            PulseAxis::Y => Some(1),
            PulseAxis::Z => Some(2),
            PulseAxis::Identity => None,
        }
    }

    pub fn from_index(i: usize) -> PulseAxis {
        PAULI_AXES[i]
    }

    pub fn is_pauli(self) -> bool {
        self != PulseAxis::Identity
    }

    /// Cyclic relabeling x → y → z → x.
    pub fn cycled(self) -> PulseAxis {
        match self {
            PulseAxis::X => PulseAxis::Y,
            PulseAxis::Y => PulseAxis::Z,
            PulseAxis::Z => PulseAxis::X,
            PulseAxis::Identity => PulseAxis::Identity,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PulseAxis::X => 'x',
            PulseAxis::Y => 'y',
            PulseAxis::Z => 'z',
            PulseAxis::Identity => 'i',
        }
    }

    pub fn from_symbol(c: char) -> Option<PulseAxis> {
        match c.to_ascii_lowercase() {
            'x' => Some(PulseAxis::X),
            'y' => Some(PulseAxis::Y),
            'z' => Some(PulseAxis::Z),
            'i' => Some(PulseAxis::Identity),
            _ => None,
        }
    }
}

impl fmt::Display for PulseAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for PulseAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                PulseAxis::from_symbol(c).ok_or_else(|| Error::invalid("axis", format!("unknown axis '{s}'")))
            }
            _ => Err(Error::invalid("axis", format!("expected one of x, y, z, i; got '{s}'"))),
        }
    }
}

/// Parses a pattern such as `"xzxzxz"` into Pauli axes.
pub fn parse_axes(pattern: &str) -> Result<Vec<PulseAxis>, Error> {
    pattern
        .trim()
        .chars()
        .map(|c| match PulseAxis::from_symbol(c) {
            Some(a) if a.is_pauli() => Ok(a),
            _ => Err(Error::invalid(
                "axes",
                format!("'{c}' in pattern '{pattern}' is not one of x, y, z"),
            )),
        })
        .collect()
}

pub fn format_axes(axes: &[PulseAxis]) -> String {
    axes.iter().map(|a| a.symbol()).collect()
}

/// A Pauli operator with a phase `i^phase`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhasedPauli {
    pub axis: PulseAxis,
    /// Power of `i`, modulo 4.
    pub phase: u8,
}

impl PhasedPauli {
    pub const IDENTITY: PhasedPauli = PhasedPauli {
        axis: PulseAxis::Identity,
        phase: 0,
    };

    pub fn from_axis(axis: PulseAxis) -> PhasedPauli {
        PhasedPauli { axis, phase: 0 }
    }

    /// `self · rhs`, using σ_a σ_b = δ_ab + i ε_abc σ_c.
    pub fn mul(self, rhs: PhasedPauli) -> PhasedPauli {
        let phase = self.phase + rhs.phase;
        let (axis, extra) = match (self.axis.index(), rhs.axis.index()) {
            (None, _) => (rhs.axis, 0),
            (_, None) => (self.axis, 0),
            (Some(a), Some(b)) if a == b => (PulseAxis::Identity, 0),
            (Some(a), Some(b)) => {
                let c = 3 - a - b;
                // (a, b, c) cyclic gives +i, anticyclic gives -i = i^3.
                let cyclic = (a + 1) % 3 == b;
                (PulseAxis::from_index(c), if cyclic { 1 } else { 3 })
            }
        };
        PhasedPauli {
            axis,
            phase: (phase + extra) % 4,
        }
    }
}

/// Net product σ_{a_N} ⋯ σ_{a_1} of the pulses applied in time order.
pub fn pulse_product(axes: &[PulseAxis]) -> PhasedPauli {
    axes.iter()
        .fold(PhasedPauli::IDENTITY, |acc, &a| PhasedPauli::from_axis(a).mul(acc))
}

/// Axis of the pulse that undoes the net interior rotation, or `Identity`
/// when the interior product is already proportional to the identity.
pub fn parity_pulse(interior_axes: &[PulseAxis]) -> PulseAxis {
    pulse_product(interior_axes).axis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_examples() {
        assert_eq!(parity_pulse(&parse_axes("xzx").unwrap()), PulseAxis::Z);
        assert_eq!(parity_pulse(&parse_axes("xzxzxz").unwrap()), PulseAxis::Y);
        assert_eq!(parity_pulse(&parse_axes(&"xz".repeat(6)).unwrap()), PulseAxis::Identity);
        assert_eq!(parity_pulse(&[]), PulseAxis::Identity);
    }

    #[test]
    fn pauli_algebra() {
        let x = PhasedPauli::from_axis(PulseAxis::X);
        let y = PhasedPauli::from_axis(PulseAxis::Y);
        let z = PhasedPauli::from_axis(PulseAxis::Z);
        assert_eq!(
            x.mul(y),
            PhasedPauli {
                axis: PulseAxis::Z,
                phase: 1
            }
        );
        assert_eq!(
            y.mul(x),
            PhasedPauli {
                axis: PulseAxis::Z,
                phase: 3
            }
        );
        assert_eq!(
            z.mul(x),
            PhasedPauli {
                axis: PulseAxis::Y,
                phase: 1
            }
        );
        assert_eq!(x.mul(x), PhasedPauli::IDENTITY);
        // (σx σz)^2 = -1
        let xz = z.mul(x);
        assert_eq!(
            xz.mul(xz),
            PhasedPauli {
                axis: PulseAxis::Identity,
                phase: 2
            }
        );
    }

    #[test]
    fn rejects_bad_pattern() {
        assert!(parse_axes("xqz").is_err());
        assert!(parse_axes("xiz").is_err());
        assert_eq!("Y".parse::<PulseAxis>().unwrap(), PulseAxis::Y);
    }

    #[test]
    fn cycling_three_times_is_identity() {
        for a in PAULI_AXES {
            assert_eq!(a.cycled().cycled().cycled(), a);
        }
    }
}
