//! Shared numerical machinery: adaptive quadrature and small statistics.

pub mod quad;
pub mod stats;

/// Format a float with 17 significant digits, enough for exact f64 round
/// trips. All CSV output goes through this so reruns are byte-comparable.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}
