//! Convergence-radius bounds for the Magnus and Baker–Campbell–Hausdorff
//! expansions in Banach algebras of Kleinian permutation type.

pub mod bch;
pub mod convexity;
pub mod error;
pub mod freealg;
pub mod kernels;
pub mod magnus;
pub mod par;
pub mod rational;
pub mod specrad;
pub mod umqnorm;
pub mod verify;

pub use error::{Error, Result};

/// Rounds to 12 significant digits, the precision used at output boundaries.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Formats with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    round_sig(x).to_string()
}

/// Decimal expansion cut (not rounded) after `digits` places.
pub fn truncate_decimals(x: f64, digits: usize) -> String {
    let s = format!("{x:.*}", digits + 6);
    let dot = s.find('.').map_or(s.len(), |d| d + 1 + digits);
    s[..dot.min(s.len())].to_string()
}
