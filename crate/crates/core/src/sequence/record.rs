//! Flat text exchange format, one sequence per file:
//!
//! ```text
//! order = 2
//! axes = xzxzxz
//! alphas = 0.0784726318490, 0.125000000000, ...
//! parity = y
//! ```

use crate::error::{Error, Result};
use crate::kv::KeyValues;

use super::axis::{parse_axes, PulseAxis};
use super::dd::DdSequence;

/// Formats `x` with `sig` significant digits in plain decimal notation.
pub fn format_significant(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn to_record(seq: &DdSequence<f64>, order: u8) -> String {
    let alphas: Vec<String> = seq.alphas().iter().map(|&a| format_significant(a, 12)).collect();
    format!(
        "order = {order}\naxes = {}\nalphas = {}\nparity = {}\n",
        seq.pattern(),
        alphas.join(", "),
        seq.parity()
    )
}

/// Parses a record. The stored parity must agree with the pulse pattern.
/// Intervals printed to 12 digits are renormalized to sum to one.
pub fn from_record(text: &str) -> Result<(DdSequence<f64>, u8)> {
    let kv = KeyValues::parse(text)?;
    kv.reject_unknown(&["order", "axes", "alphas", "parity"])?;
    let order: u8 = kv.parse_required("order")?;
    let (axes_line, axes_text) = kv.required("axes")?;
    let axes = parse_axes(axes_text).map_err(|e| Error::Parse {
        line: axes_line,
        reason: e.to_string(),
    })?;
    let alphas: Vec<f64> = kv.parse_list_required("alphas")?;
    let (parity_line, parity_text) = kv.required("parity")?;
    let parity: PulseAxis = parity_text.parse().map_err(|e: Error| Error::Parse {
        line: parity_line,
        reason: e.to_string(),
    })?;
    let sum: f64 = alphas.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        let (line, _) = kv.required("alphas")?;
        return Err(Error::Parse {
            line,
            reason: format!("intervals sum to {sum}, expected 1"),
        });
    }
    let seq = DdSequence::normalized(axes, &alphas).map_err(|e| Error::Parse {
        line: kv.required("alphas").map(|(l, _)| l).unwrap_or(0),
        reason: e.to_string(),
    })?;
    if seq.parity() != parity {
        return Err(Error::Parse {
            line: parity_line,
            reason: format!("parity '{parity}' does not match pattern (expected '{}')", seq.parity()),
        });
    }
    Ok((seq, order))
}
