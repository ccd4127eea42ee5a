use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::class::ConvexityClass;
use super::quasi::{columns_for, Column, QuasiMonomial};
use super::simplex::{L1Lp, L1Solution};
use crate::error::{Error, Result};
use crate::freealg::{eval_lambda, mu_ab, mu_lambda, RatPoly, Word};
use crate::rational::{factorial, fmt_rational, rpow, to_f64, Rational};

/// Exact value (lo = hi) or certified enclosure [lo, hi].
#[derive(Clone, PartialEq, Eq)]
pub struct NormValue {
    pub lo: Rational,
    pub hi: Rational,
}

impl NormValue {
    pub fn exact(v: Rational) -> Self {
        NormValue { lo: v.clone(), hi: v }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (to_f64(&self.lo) + to_f64(&self.hi))
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi)
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo)
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let (a, b) = (&self.lo * r, &self.hi * r);
        if a <= b {
            NormValue { lo: a, hi: b }
        } else {
            NormValue { lo: b, hi: a }
        }
    }

    pub fn add(&self, other: &NormValue) -> Self {
        NormValue {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_exact() {
            Some(v) => write!(f, "{}", fmt_rational(v)),
            None => write!(f, "[{:.15}, {:.15}]", self.lo_f64(), self.hi_f64()),
        }
    }
}

impl fmt::Debug for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for NormValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            exact: Option<String>,
            lo: String,
            hi: String,
            approx: f64,
        }
        Repr {
            exact: self.as_exact().map(fmt_rational),
            lo: fmt_rational(&self.lo),
            hi: fmt_rational(&self.hi),
            approx: self.mid_f64(),
        }
        .serialize(s)
    }
}

/// Optimal primal/dual pair for one homogeneous component at one κ.
#[derive(Clone, Debug, Serialize)]
pub struct LpCertificate {
    pub component: Vec<u8>,
    pub kappa: String,
    pub objective: String,
    pub basis: Vec<String>,
    pub primal: Vec<(String, String)>,
    pub dual: Vec<(String, String)>,
    pub pivots: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FaNorm {
    pub value: NormValue,
    pub certificates: Vec<LpCertificate>,
}

struct ComponentLp {
    lp: L1Lp,
    words: Vec<Word>,
    columns: std::sync::Arc<Vec<Column>>,
}

fn build_component(content: &[u8], x: &RatPoly, kappa: &Rational) -> Result<ComponentLp> {
    let columns = columns_for(content)?;
    let mut row_of: BTreeMap<Word, usize> = BTreeMap::new();
    for col in columns.iter() {
        for (w, _) in col.poly.terms() {
            let next = row_of.len();
            row_of.entry(w.clone()).or_insert(next);
        }
    }
    // Re-number rows in word order so certificates read naturally.
    let words: Vec<Word> = row_of.keys().cloned().collect();
    for (i, w) in words.iter().enumerate() {
        row_of.insert(w.clone(), i);
    }
    let mut rhs = vec![Rational::zero(); words.len()];
    for (w, c) in x.terms() {
        let r = row_of
            .get(w)
            .ok_or_else(|| Error::Internal(format!("target word {w} missing from rows")))?;
        rhs[*r] = c.clone();
    }
    let lp = L1Lp {
        rows: words.len(),
        columns: columns
            .iter()
            .map(|c| c.poly.terms().map(|(w, v)| (row_of[w], v.clone())).collect())
            .collect(),
        costs: columns.iter().map(|c| rpow(kappa, c.xi)).collect(),
        rhs,
    };
    Ok(ComponentLp { lp, words, columns })
}

fn certificate(content: &[u8], kappa: &Rational, c: &ComponentLp, sol: &L1Solution) -> LpCertificate {
    LpCertificate {
        component: content.to_vec(),
        kappa: fmt_rational(kappa),
        objective: fmt_rational(&sol.objective),
        basis: sol
            .basis
            .iter()
            .map(|&(j, s)| format!("{}{}", if s < 0 { "-" } else { "+" }, c.columns[j].tree))
            .collect(),
        primal: sol
            .x
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (c.columns[j].tree.to_string(), fmt_rational(v)))
            .collect(),
        dual: c
            .words
            .iter()
            .zip(&sol.y)
            .map(|(w, y)| (w.to_string(), fmt_rational(y)))
            .collect(),
        pivots: sol.pivots,
    }
}

fn solve_component(content: &[u8], x: &RatPoly, kappa: &Rational) -> Result<(Rational, LpCertificate)> {
    let c = build_component(content, x, kappa)?;
    let sol = c.lp.solve()?;
    c.lp.verify(&sol)?;
    Ok((sol.objective.clone(), certificate(content, kappa, &c, &sol)))
}

/// |x|_{F𝒜}: the minimum of Σ|c_M|κ^{#Ξ(M)} over quasi-monomial
/// decompositions x = Σ c_M M, solved exactly per homogeneous component.
///
/// The optimum is nondecreasing in κ, so solving at the two rational
/// bounds of an irrational κ encloses the true value.
pub fn fa_norm_exact(x: &RatPoly, class: &ConvexityClass) -> Result<FaNorm> {
    // With κ = 1 every column costs at least its ℓ¹ norm, so ℓ¹ is optimal.
    if class.is_plain() {
        return Ok(FaNorm {
            value: NormValue::exact(x.l1()),
            certificates: Vec::new(),
        });
    }
    let mut lo = Rational::zero();
    let mut hi = Rational::zero();
    let mut certificates = Vec::new();
    for (content, comp) in x.components() {
        if content.len() < 4 {
            let v = comp.l1();
            lo += &v;
            hi += &v;
            continue;
        }
        let (v_lo, cert) = solve_component(&content, &comp, class.kappa_lo())?;
        certificates.push(cert);
        let v_hi = if class.kappa_exact().is_some() {
            v_lo.clone()
        } else {
            let (v, cert) = solve_component(&content, &comp, class.kappa_hi())?;
            certificates.push(cert);
            v
        };
        lo += v_lo;
        hi += v_hi;
    }
    Ok(FaNorm {
        value: NormValue { lo, hi },
        certificates,
    })
}

/// A feasible decomposition using the given cross terms greedily.
#[derive(Clone, Debug)]
pub struct UpperDecomposition {
    pub value: NormValue,
    /// (cross term, signed weight) actually used.
    pub used: Vec<(QuasiMonomial, Rational)>,
    pub residual: RatPoly,
}

/// Upper bound on |x|_{F𝒜}: each cross term T is used with the largest
/// weight w for which x − w·T does not overshoot any of T's words, i.e.
/// w = min |x_w / T_w| over its support when all signs align.
pub fn fa_norm_upper(x: &RatPoly, class: &ConvexityClass, cross_terms: &[QuasiMonomial]) -> UpperDecomposition {
    let mut residual = x.clone();
    let mut kappa_poly: Vec<Rational> = Vec::new();
    let mut used = Vec::new();
    for term in cross_terms {
        let e = term.eval();
        if e.is_zero() {
            continue;
        }
        for sign in [1i64, -1] {
            let s = Rational::from_integer(sign.into());
            let mut weight: Option<Rational> = None;
            let mut aligned = true;
            for (w, ec) in e.terms() {
                match residual.coeff(w.letters()) {
                    Some(r) if (r * ec * &s).is_positive() => {
                        let ratio = (r / ec).abs();
                        weight = Some(match weight {
                            Some(cur) if cur <= ratio => cur,
                            _ => ratio,
                        });
                    }
                    _ => {
                        aligned = false;
                        break;
                    }
                }
            }
            if let (true, Some(wt)) = (aligned, weight) {
                let signed = &wt * &s;
                residual = &residual - &e.scale(&signed);
                let xi = term.xi_count();
                if kappa_poly.len() <= xi {
                    kappa_poly.resize(xi + 1, Rational::zero());
                }
                kappa_poly[xi] += &wt;
                used.push((term.clone(), signed));
                break;
            }
        }
    }
    let eval_at = |k: &Rational| {
        kappa_poly
            .iter()
            .enumerate()
            .map(|(i, c)| c * rpow(k, i))
            .fold(Rational::zero(), |a, b| a + b)
            + residual.l1()
    };
    UpperDecomposition {
        value: NormValue {
            lo: eval_at(class.kappa_lo()),
            hi: eval_at(class.kappa_hi()),
        },
        used,
        residual,
    }
}

/// Θ_{a,b}^{(λ),𝒜} = |μ_{a,b}^{(λ)}|_{F𝒜} / (a+b)!.
pub fn theta_ab(a: usize, b: usize, lambda: &Rational, class: &ConvexityClass) -> Result<NormValue> {
    check_lambda(lambda)?;
    let x = eval_lambda(&mu_ab(a, b)?, lambda);
    let n = fa_norm_exact(&x, class)?;
    Ok(n.value.scale(&Rational::new(1.into(), factorial(a + b))))
}

fn check_lambda(lambda: &Rational) -> Result<()> {
    if lambda < &Rational::from_integer(0.into()) || lambda > &Rational::from_integer(1.into()) {
        return Err(Error::OutOfRange("lambda outside [0,1]".into()));
    }
    Ok(())
}

/// Θ_k^{(λ),𝒜} = |μ_k^{(λ)}|_{F𝒜} / k!.
pub fn theta_k(k: usize, lambda: &Rational, class: &ConvexityClass) -> Result<NormValue> {
    check_lambda(lambda)?;
    let x = eval_lambda(&mu_lambda(k)?, lambda);
    let n = fa_norm_exact(&x, class)?;
    Ok(n.value.scale(&Rational::new(1.into(), factorial(k))))
}
