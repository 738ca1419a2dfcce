use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::axis::PulseAxis;
use super::dd::DdSequence;

/// UDD pulse times `T sin²(kπ / (2N + 2))`, k = 1..N, on a unit period.
fn udd_times<S: Real>(n: usize) -> Vec<S> {
    let denom = lit::<S>(2.0 * n as f64 + 2.0);
    (1..=n)
        .map(|k| {
            let s = (S::from_usize(k).unwrap() * S::PI() / denom).sin();
            s * s
        })
        .collect()
}

fn from_times<S: Real>(axes: Vec<PulseAxis>, times: &[S], period: S) -> Result<DdSequence<S>> {
    let mut alphas = Vec::with_capacity(times.len() + 1);
    let mut prev = S::zero();
    for &t in times {
        alphas.push(t - prev);
        prev = t;
    }
    alphas.push(S::one() - prev);
    Ok(DdSequence::normalized(axes, &alphas)?.with_period(period))
}

/// Uhrig sequence of `n` pulses along one axis.
pub fn udd_sequence<S: Real>(n: usize, period: S, axis: PulseAxis) -> Result<DdSequence<S>> {
    if n == 0 {
        return Err(Error::invalid("udd", "needs at least one pulse"));
    }
    if !axis.is_pauli() {
        return Err(Error::invalid("udd", "axis must be x, y or z"));
    }
    from_times(vec![axis; n], &udd_times(n), period)
}

/// Quadratic DD: an outer UDD-n of z pulses with an inner UDD-n of x pulses
/// scaled into each of the n + 1 outer intervals, `(n + 1)²` intervals total.
pub fn qdd_sequence<S: Real>(n: usize, period: S) -> Result<DdSequence<S>> {
    if n == 0 {
        return Err(Error::invalid("qdd", "needs at least one pulse"));
    }
    let outer = udd_times::<S>(n);
    let inner = udd_times::<S>(n);
    let mut edges = vec![S::zero()];
    edges.extend(outer.iter().copied());
    edges.push(S::one());

    let mut times = Vec::new();
    let mut axes = Vec::new();
    for (j, w) in edges.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        for &u in &inner {
            times.push(lo + (hi - lo) * u);
            axes.push(PulseAxis::X);
        }
        if j < outer.len() {
            times.push(hi);
            axes.push(PulseAxis::Z);
        }
    }
    from_times(axes, &times, period)
}
