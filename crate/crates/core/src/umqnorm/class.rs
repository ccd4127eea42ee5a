use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, from_f64, int, rat, rpow, to_f64, Rational};

/// Convexity class: the exponent q and the cross-term cost κ = 2^{−1/q}.
///
/// κ is kept as a pair of rational bounds; they coincide when κ is
/// rational (q = 1, the plain class q = ∞, or an explicit override).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexityClass {
    q: Option<Rational>,
    kappa_lo: Rational,
    kappa_hi: Rational,
}

impl ConvexityClass {
    /// Class with exponent q ≥ 1.
    pub fn new(q: Rational) -> Result<Self> {
        if q < int(1) {
            return Err(Error::OutOfRange(format!("q = {} < 1", fmt_rational(&q))));
        }
        let (lo, hi) = kappa_bounds(&q)?;
        Ok(ConvexityClass {
            q: Some(q),
            kappa_lo: lo,
            kappa_hi: hi,
        })
    }

    pub fn q_int(q: i64) -> Result<Self> {
        Self::new(int(q))
    }

    /// General Banach algebras: κ = 1, cross terms cost as much as their ℓ¹ norm.
    pub fn plain() -> Self {
        ConvexityClass {
            q: None,
            kappa_lo: int(1),
            kappa_hi: int(1),
        }
    }

    /// Explicit rational cost κ ∈ [1/2, 1].
    pub fn with_kappa(kappa: Rational) -> Result<Self> {
        if kappa < rat(1, 2) || kappa > int(1) {
            return Err(Error::OutOfRange(format!(
                "kappa = {} outside [1/2, 1]",
                fmt_rational(&kappa)
            )));
        }
        Ok(ConvexityClass {
            q: None,
            kappa_lo: kappa.clone(),
            kappa_hi: kappa,
        })
    }

    pub fn q(&self) -> Option<&Rational> {
        self.q.as_ref()
    }

    pub fn q_f64(&self) -> f64 {
        self.q.as_ref().map_or(f64::INFINITY, to_f64)
    }

    pub fn kappa_lo(&self) -> &Rational {
        &self.kappa_lo
    }

    pub fn kappa_hi(&self) -> &Rational {
        &self.kappa_hi
    }

    pub fn kappa_exact(&self) -> Option<&Rational> {
        (self.kappa_lo == self.kappa_hi).then_some(&self.kappa_lo)
    }

    pub fn kappa_f64(&self) -> f64 {
        match &self.q {
            Some(q) if self.kappa_exact().is_none() => 2f64.powf(-1.0 / to_f64(q)),
            _ => to_f64(&self.kappa_lo),
        }
    }

    pub fn is_plain(&self) -> bool {
        self.kappa_lo.is_one()
    }

    pub fn label(&self) -> String {
        match (&self.q, self.kappa_exact()) {
            (Some(q), _) => format!("q={}", fmt_rational(q)),
            (None, Some(k)) if k.is_one() => "plain".to_string(),
            (None, _) => format!("kappa={}", fmt_rational(&self.kappa_lo)),
        }
    }

    pub fn describe(&self) -> ClassInfo {
        ClassInfo {
            label: self.label(),
            q: self.q.as_ref().map(fmt_rational),
            kappa: self.kappa_f64(),
            kappa_lo: fmt_rational(&self.kappa_lo),
            kappa_hi: fmt_rational(&self.kappa_hi),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassInfo {
    pub label: String,
    pub q: Option<String>,
    pub kappa: f64,
    pub kappa_lo: String,
    pub kappa_hi: String,
}

/// Rational bounds lo ≤ 2^{−1/q} ≤ hi, checked exactly through
/// κ^m = 2^{−n} for q = m/n.
fn kappa_bounds(q: &Rational) -> Result<(Rational, Rational)> {
    let m = q.numer().to_usize();
    let n = q.denom().to_usize();
    let (Some(m), Some(n)) = (m, n) else {
        return Err(Error::OutOfRange("q too large".into()));
    };
    if m % n == 0 && m / n == 1 {
        return Ok((rat(1, 2), rat(1, 2)));
    }
    if m > 64 {
        return Err(Error::OutOfRange(format!(
            "q = {} has a numerator above 64",
            fmt_rational(q)
        )));
    }
    let target = Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), n));
    let k = 2f64.powf(-(n as f64) / (m as f64));
    let mut rel = 4.0 * f64::EPSILON;
    for _ in 0..20 {
        let lo = from_f64(k * (1.0 - rel))?;
        let hi = from_f64(k * (1.0 + rel))?;
        if rpow(&lo, m) <= target && rpow(&hi, m) >= target {
            return Ok((lo, hi));
        }
        rel *= 4.0;
    }
    Err(Error::Internal("could not bracket 2^(-1/q)".into()))
}
