//! Published minimum-pulse sequences.
//!
//! Entries with a closed form are built from it. Entries only known to four
//! to six decimals are Newton-polished onto the exact root nearest the
//! printed values, so every catalog sequence satisfies its constraints to
//! rounding level and sums to one.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::axis::parse_axes;
use super::dd::DdSequence;
use super::solver::{refine_intervals, SolverConfig};

/// Printed interval values for a catalog entry.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub order: u8,
    pub pattern: &'static str,
    /// Intervals as printed.
    pub printed: &'static [f64],
    /// `(index, printed, corrected)` for a known misprint.
    pub erratum: Option<(usize, f64, f64)>,
}

const M3_PATTERN: &str = "xzxzxzxzxzxz";

pub const CATALOG: [CatalogEntry; 7] = [
    CatalogEntry {
        name: "m1_xz",
        order: 1,
        pattern: "xzx",
        printed: &[0.25, 0.25, 0.25, 0.25],
        erratum: None,
    },
    CatalogEntry {
        name: "m2_xzxzxz",
        order: 2,
        pattern: "xzxzxz",
        printed: &[0.0785, 0.125, 0.1715, 0.25, 0.1715, 0.125, 0.0785],
        erratum: None,
    },
    CatalogEntry {
        name: "m2_app1_xzxxzx",
        order: 2,
        pattern: "xzxxzx",
        printed: &[0.125, 0.125, 0.125, 0.25, 0.125, 0.125, 0.125],
        erratum: None,
    },
    CatalogEntry {
        name: "m2_app2_xzxxyx",
        order: 2,
        pattern: "xzxxyx",
        printed: &[0.104715, 0.145282, 0.125, 0.25, 0.125, 0.145282, 0.104715],
        erratum: None,
    },
    CatalogEntry {
        name: "m2_app3_xzxzyz",
        order: 2,
        pattern: "xzxzyz",
        printed: &[0.0785, 0.1396, 0.1596, 0.25, 0.1715, 0.0931, 0.1104],
        // third interval printed with transposed digits; the root is 0.15693
        erratum: Some((2, 0.1596, 0.1569)),
    },
    CatalogEntry {
        name: "m2_app4_xzxyzy",
        order: 2,
        pattern: "xzxyzy",
        printed: &[0.125, 0.095491, 0.1545, 0.25, 0.1545, 0.095491, 0.125],
        erratum: None,
    },
    CatalogEntry {
        name: "m3_xz",
        order: 3,
        pattern: M3_PATTERN,
        printed: &[
            0.0171, 0.0468, 0.0658, 0.1013, 0.1184, 0.1006, 0.1195, 0.1049, 0.0823, 0.1025, 0.0647, 0.0439, 0.0318,
        ],
        erratum: None,
    },
];

pub fn catalog_entry(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| {
        let known: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
        Error::invalid(
            "sequence",
            format!("unknown catalog name '{name}' (known: {})", known.join(", ")),
        )
    })
}

impl CatalogEntry {
    /// Printed decimals with any erratum applied.
    pub fn published(&self) -> Vec<f64> {
        let mut v = self.printed.to_vec();
        if let Some((i, _, fixed)) = self.erratum {
            v[i] = fixed;
        }
        v
    }

    fn closed_form<S: Real>(&self) -> Option<Vec<S>> {
        let q = |n: f64, d: f64| lit::<S>(n) / lit::<S>(d);
        match self.name {
            "m1_xz" => Some(vec![q(1.0, 4.0); 4]),
            "m2_app1_xzxxzx" => {
                let e = q(1.0, 8.0);
                Some(vec![e, e, e, q(1.0, 4.0), e, e, e])
            }
            "m2_xzxzxz" => {
                let r33 = lit::<S>(33.0).sqrt();
                let a1 = (lit::<S>(7.0) - r33) / lit(16.0);
                let a3 = (r33 - lit::<S>(3.0)) / lit(16.0);
                let a2 = q(1.0, 8.0);
                Some(vec![a1, a2, a3, q(1.0, 4.0), a3, a2, a1])
            }
            _ => None,
        }
    }
}

/// Catalog sequence by name (unit period, ideal pulses).
pub fn catalog_sequence<S: Real>(name: &str) -> Result<DdSequence<S>> {
    let entry = catalog_entry(name)?;
    let axes = parse_axes(entry.pattern)?;
    match entry.closed_form::<S>() {
        Some(alphas) => DdSequence::normalized(axes, &alphas),
        None => {
            let guess: Vec<S> = entry.published().into_iter().map(lit).collect();
            refine_intervals(entry.order, &axes, &guess, &SolverConfig::default())
        }
    }
}

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|e| e.name)
}

/// The catalog sequence of each order 1, 2, 3 along alternating x-z.
pub fn alternating_xz<S: Real>(order: u8) -> Result<DdSequence<S>> {
    match order {
        1 => catalog_sequence("m1_xz"),
        2 => catalog_sequence("m2_xzxzxz"),
        3 => catalog_sequence("m3_xz"),
        _ => Err(Error::invalid("order", format!("{order} is not in 1..=3"))),
    }
}
