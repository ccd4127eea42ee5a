//! Baker–Campbell–Hausdorff radius machinery built on the block series
//! Υ^{(λ)}(x₁Y₁, x₂Y₂) = λ(1−λ)·R^{(λ)}(e^{x₁Y₁})·R^{(λ)}(e^{x₂Y₂}).

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freealg::{LamPoly, LambdaPoly, Word};
use crate::kernels::golden_max;
use crate::magnus::c_eps;
use crate::par::Exec;
use crate::rational::{factorial, Rational};
use crate::umqnorm::ConvexityClass;

/// Cumulative BCH radius in general Banach algebras, used as a reference.
pub const C2: f64 = 2.89847930;
pub const DEFAULT_ORDER: usize = 24;

/// Coefficients c₁..c_N of R^{(λ)}(e^x) = u/(1+(1−λ)u), u = e^x − 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventSeries {
    coeffs: Vec<LambdaPoly>,
}

impl ResolventSeries {
    /// c_n, 1-based.
    pub fn c(&self, n: usize) -> &LambdaPoly {
        &self.coeffs[n - 1]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// c_n = u_n − (1−λ)Σ_{k<n} c_k u_{n−k} with u_n = 1/n!.
pub fn resolvent_series(n: usize) -> Result<ResolventSeries> {
    if n == 0 || n > 40 {
        return Err(Error::OutOfRange(format!("order {n} outside 1..=40")));
    }
    let u: Vec<Rational> = (0..=n)
        .map(|k| Rational::new(1.into(), factorial(k)))
        .collect();
    let mu = LambdaPoly::one_minus_lambda();
    let mut c: Vec<LambdaPoly> = Vec::with_capacity(n);
    for m in 1..=n {
        let mut s = LambdaPoly::zero();
        for k in 1..m {
            s = s + c[k - 1].scale(&u[m - k]);
        }
        c.push(LambdaPoly::constant(u[m].clone()) - &mu * &s);
    }
    Ok(ResolventSeries { coeffs: c })
}

/// The same recursion in f64 at a fixed λ; entry n−1 is c_n.
pub fn resolvent_coeffs_f64(lambda: f64, n: usize) -> Vec<f64> {
    let mut u = vec![1.0; n + 1];
    for k in 1..=n {
        u[k] = u[k - 1] / k as f64;
    }
    let mut c: Vec<f64> = Vec::with_capacity(n);
    for m in 1..=n {
        let s: f64 = (1..m).map(|k| c[k - 1] * u[m - k]).sum();
        c.push(u[m] - (1.0 - lambda) * s);
    }
    c
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeriesBound {
    /// Truncated sum plus tail majorant.
    pub value: f64,
    pub tail: f64,
    pub inconclusive: bool,
}

/// Σ|c_n|xⁿ with a geometric tail. R^{(λ)}(e^x) has its nearest poles at
/// distance ρ = √(π² + log²(λ/(1−λ))), so |c_n|ρⁿ stays bounded; the
/// largest of its last six values times (x/ρ)^{N+1}/(1 − x/ρ) bounds the tail.
fn abs_series(c: &[f64], lambda: f64, x: f64) -> SeriesBound {
    let n = c.len();
    let rho = c_eps(lambda).min(10.0);
    let r = x / rho;
    let head: f64 = c.iter().enumerate().map(|(k, ck)| ck.abs() * x.powi(k as i32 + 1)).sum();
    if r >= 1.0 {
        return SeriesBound {
            value: head,
            tail: f64::INFINITY,
            inconclusive: true,
        };
    }
    let a = (n.saturating_sub(6)..n)
        .map(|k| c[k].abs() * rho.powi(k as i32 + 1))
        .fold(0.0, f64::max);
    let tail = a * r.powi(n as i32 + 1) / (1.0 - r);
    SeriesBound {
        value: head + tail,
        tail,
        inconclusive: false,
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UpsilonL1 {
    pub value: f64,
    pub tail: f64,
    pub inconclusive: bool,
}

/// |Υ^{(λ)}(x₁Y₁, x₂Y₂)|_{ℓ¹} = λ(1−λ)(Σ|c_n|x₁ⁿ)(Σ|c_n|x₂ⁿ).
pub fn upsilon_l1(lambda: f64, x1: f64, x2: f64, order: usize) -> Result<UpsilonL1> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("lambda {lambda} outside [0,1]")));
    }
    if x1 < 0.0 || x2 < 0.0 || x1 >= std::f64::consts::PI || x2 >= std::f64::consts::PI {
        return Err(Error::OutOfRange("x1, x2 must lie in [0, pi)".into()));
    }
    let c = resolvent_coeffs_f64(lambda, order);
    let s1 = abs_series(&c, lambda, x1);
    let s2 = abs_series(&c, lambda, x2);
    let pre = lambda * (1.0 - lambda);
    let head = pre * (s1.value - s1.tail) * (s2.value - s2.tail);
    let value = pre * s1.value * s2.value;
    Ok(UpsilonL1 {
        value,
        tail: value - head,
        inconclusive: s1.inconclusive || s2.inconclusive,
    })
}

fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if parts == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if total < parts {
        return;
    }
    for first in 1..=total - (parts - 1) {
        cur.push(first);
        compositions(total - first, parts - 1, out, cur);
        cur.pop();
    }
}

/// The bidegree-(d₁,d₂) part of Υⁿ with the common factor
/// λⁿ(1−λ)ⁿx₁^{d₁}x₂^{d₂} removed: each block pattern (i₁,j₁,…,iₙ,jₙ)
/// contributes Πc_{i_k}c_{j_k} on Y₁^{i₁}Y₂^{j₁}⋯Y₁^{iₙ}Y₂^{jₙ}.
pub fn upsilon_power_component(n: usize, deg: (usize, usize)) -> Result<LamPoly> {
    let (d1, d2) = deg;
    if n == 0 {
        return Err(Error::InvalidInput("power must be at least 1".into()));
    }
    if d1 < n || d2 < n {
        return Ok(LamPoly::zero());
    }
    let series = resolvent_series(d1.max(d2) - n + 1)?;
    let (mut is, mut js) = (Vec::new(), Vec::new());
    compositions(d1, n, &mut is, &mut Vec::new());
    compositions(d2, n, &mut js, &mut Vec::new());
    let mut out = LamPoly::zero();
    for i in &is {
        for j in &js {
            let mut word = Vec::with_capacity(d1 + d2);
            let mut coeff = LambdaPoly::constant(Rational::from_integer(1.into()));
            for k in 0..n {
                word.extend(std::iter::repeat_n(1u8, i[k]));
                word.extend(std::iter::repeat_n(2u8, j[k]));
                coeff = &coeff * &(series.c(i[k]) * series.c(j[k]));
            }
            out.add_term(Word(word), coeff);
        }
    }
    Ok(out)
}

/// Words whose coefficients the cross term Y₁Y₂Ξ(Y₂,Y₁,Y₂Y₁,Y₂)Y₂ can
/// absorb, with the signs that term carries.
pub const ALIGNED_WORDS: [(&str, i8); 4] = [
    ("12212212", 1),
    ("12122122", 1),
    ("12212122", 1),
    ("12122212", -1),
];

#[cfg(test)]
fn word_of(s: &str) -> Vec<u8> {
    s.bytes().map(|b| b - b'0').collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GainReport {
    /// |Υ³|_{ℓ¹} = |Υ|_{ℓ¹}³.
    pub l1: f64,
    pub gain: f64,
    pub bound: f64,
    pub aligned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub inconclusive: bool,
}

/// Coefficients (c₂², c₂², c₂², c₃) of the aligned words at λ.
fn aligned_coeffs(lambda: f64) -> [f64; 4] {
    let c2 = lambda - 0.5;
    let c3 = lambda * lambda - lambda + 1.0 / 6.0;
    [c2 * c2, c2 * c2, c2 * c2, c3]
}

/// Upper bound on |Υ³| in the universal norm: the ℓ¹ value minus the gain
/// from trading the aligned part of the (3,5) and (5,3) components for one
/// cross term of cost κ.
pub fn bch_gain_upper(lambda: f64, class: &ConvexityClass, x1: f64, x2: f64, order: usize) -> Result<GainReport> {
    let u = upsilon_l1(lambda, x1, x2, order)?;
    let l1 = u.value.powi(3);
    let coeffs = aligned_coeffs(lambda);
    let aligned = coeffs
        .iter()
        .zip(ALIGNED_WORDS)
        .all(|(c, (_, s))| *c == 0.0 || c.signum() as i8 == s);
    let kappa = class.kappa_hi().to_f64().unwrap_or(1.0);
    let (gain, diagnostic) = if aligned {
        let m = coeffs.iter().map(|c| c.abs()).fold(f64::INFINITY, f64::min);
        let pre = (lambda * (1.0 - lambda)).powi(3);
        let g = 4.0 * m * (1.0 - kappa) * pre * (x1.powi(3) * x2.powi(5) + x1.powi(5) * x2.powi(3));
        (g.max(0.0), None)
    } else {
        (0.0, Some(format!("sign pattern of aligned words fails at lambda = {lambda}")))
    };
    Ok(GainReport {
        l1,
        gain,
        bound: l1 - gain,
        aligned,
        diagnostic,
        inconclusive: u.inconclusive,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Critical {
    pub lambda: f64,
    pub value: f64,
}

fn sup_over_lambda(f: impl Fn(f64) -> f64 + Sync, grid: usize) -> Critical {
    let lambdas: Vec<f64> = (0..=grid).map(|i| 0.5 * i as f64 / grid as f64).collect();
    let vals = Exec::default().map(&lambdas, |&l| f(l));
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let lo = lambdas[imax.saturating_sub(1)];
    let hi = lambdas[(imax + 1).min(grid)];
    let (l, v) = golden_max(&f, lo, hi, 1e-11);
    if v >= vals[imax] {
        Critical { lambda: l, value: v }
    } else {
        Critical {
            lambda: lambdas[imax],
            value: vals[imax],
        }
    }
}

/// argmax over λ ∈ [0, 1/2] of |Υ^{(λ)}(x₁Y₁, x₂Y₂)|_{ℓ¹}.
pub fn critical_lambda(x1: f64, x2: f64, order: usize) -> Result<Critical> {
    upsilon_l1(0.5, x1, x2, order)?;
    Ok(sup_over_lambda(
        |l| upsilon_l1(l, x1, x2, order).map_or(f64::NAN, |u| u.value),
        2000,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct ImprovedRadius {
    pub class: String,
    pub value: f64,
    /// value − C₂.
    pub margin: f64,
    pub critical_lambda: f64,
    pub lambda_grid: usize,
}

/// Largest s with sup_λ (|Υ³| bound at x₁ = x₂ = s/2)^{1/3} < 1, by
/// bisection on s to 1e−9.
pub fn c2_improved(class: &ConvexityClass, lambda_grid: usize, order: usize) -> Result<ImprovedRadius> {
    let sup = |s: f64| {
        sup_over_lambda(
            |l| {
                bch_gain_upper(l, class, s / 2.0, s / 2.0, order).map_or(f64::NAN, |g| g.bound.max(0.0).cbrt())
            },
            lambda_grid,
        )
    };
    let (mut lo, mut hi) = (2.5, 3.2);
    if sup(lo).value >= 1.0 || sup(hi).value < 1.0 {
        return Err(Error::Internal("threshold not bracketed by [2.5, 3.2]".into()));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if sup(mid).value < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ImprovedRadius {
        class: class.label(),
        value: lo,
        margin: lo - C2,
        critical_lambda: sup(lo).lambda,
        lambda_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::regression::*;
    use crate::rational::{int, rat};
    use num_traits::Signed;

    #[test]
    fn first_coefficients() {
        let s = resolvent_series(6).unwrap();
        assert_eq!(*s.c(1), LambdaPoly::constant(int(1)));
        assert_eq!(*s.c(2), LambdaPoly::new(vec![rat(-1, 2), int(1)]));
        assert_eq!(*s.c(3), LambdaPoly::new(vec![rat(1, 6), int(-1), int(1)]));
        assert_eq!(s.c(2) * s.c(2), LambdaPoly::new(vec![rat(1, 4), int(-1), int(1)]));
    }

    #[test]
    fn series_matches_rational_division() {
        // Oracle: (1 + (1−λ)u)·R = u, checked on the exact coefficients.
        let s = resolvent_series(12).unwrap();
        for l in [rat(1, 5), rat(2, 3)] {
            let c: Vec<Rational> = (1..=12).map(|n| s.c(n).eval(&l)).collect();
            for m in 1..=12usize {
                let u = |k: usize| Rational::new(1.into(), factorial(k));
                let conv = (1..m).fold(Rational::zero(), |a, k| a + &c[k - 1] * u(m - k));
                assert_eq!(&c[m - 1] + (int(1) - &l) * conv, u(m));
            }
            let f = resolvent_coeffs_f64(l.to_f64().unwrap(), 12);
            for (a, b) in c.iter().zip(&f) {
                assert!((a.to_f64().unwrap() - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn upsilon_zero_and_symmetry() {
        assert_eq!(upsilon_l1(0.3, 0.0, 0.0, 24).unwrap().value, 0.0);
        for l in [0.125, 0.375] {
            let a = upsilon_l1(l, 1.1, 0.7, 24).unwrap().value;
            let b = upsilon_l1(1.0 - l, 0.7, 1.1, 24).unwrap().value;
            assert!((a - b).abs() < 1e-12 * a, "{a} {b}");
        }
        assert!(upsilon_l1(0.3, 3.2, 1.0, 24).is_err());
    }

    #[test]
    fn upsilon_against_long_exact_series() {
        let s = resolvent_series(40).unwrap();
        let half = rat(1, 2);
        let exact: Rational = (1..=40).fold(Rational::zero(), |a, n| a + s.c(n).eval(&half).abs());
        let exact = 0.25 * exact.to_f64().unwrap().powi(2);
        let u = upsilon_l1(0.5, 1.0, 1.0, 24).unwrap();
        assert!(u.value >= exact - 1e-15);
        assert!(u.value - exact < 1e-10, "{} {exact}", u.value);
    }

    #[test]
    fn threshold_at_c2() {
        let x = 1.44923965;
        let c = critical_lambda(x, x, 24).unwrap();
        assert!((c.value - 1.0).abs() < 1e-4, "{c:?}");
        assert!((0.35865..=0.35866).contains(&c.lambda), "{c:?}");
    }

    #[test]
    fn power_component_small_cases() {
        let p = upsilon_power_component(1, (1, 1)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&[1, 2]), Some(&LambdaPoly::constant(int(1))));
        let p = upsilon_power_component(2, (2, 2)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&[1, 2, 1, 2]), Some(&LambdaPoly::constant(int(1))));
        assert!(upsilon_power_component(3, (2, 5)).unwrap().is_zero());
    }

    #[test]
    fn degree_3_5_coefficients() {
        let p = upsilon_power_component(3, (3, 5)).unwrap();
        let quarter = LambdaPoly::new(vec![rat(1, 4), int(-1), int(1)]);
        let sixth = LambdaPoly::new(vec![rat(1, 6), int(-1), int(1)]);
        for (w, _) in &ALIGNED_WORDS[..3] {
            assert_eq!(p.coeff(&word_of(w)), Some(&quarter));
        }
        assert_eq!(p.coeff(&word_of(ALIGNED_WORDS[3].0)), Some(&sixth));
        assert_eq!(p.len(), 6);
        for l in [0.35865, 0.358655, 0.35866] {
            let c = aligned_coeffs(l);
            let signs: Vec<i8> = c.iter().map(|v| v.signum() as i8).collect();
            assert_eq!(signs, vec![1, 1, 1, -1]);
            for ((w, _), v) in ALIGNED_WORDS.iter().zip(c) {
                assert!((p.coeff(&word_of(w)).unwrap().eval_f64(l) - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn block_expansion_matches_l1_product() {
        let s = resolvent_series(8).unwrap();
        let l = rat(3, 8);
        let a: Vec<Rational> = (1..=8).map(|n| s.c(n).eval(&l).abs()).collect();
        // coefficient of x1^d1 x2^d2 in (Σ a_i x1^i · Σ a_j x2^j)^n
        let power = |d: usize, n: usize| {
            let mut cur = vec![Rational::zero(); d + 1];
            cur[0] = int(1);
            for _ in 0..n {
                let mut next = vec![Rational::zero(); d + 1];
                for (i, ci) in cur.iter().enumerate() {
                    for k in 1..=8 {
                        if i + k <= d {
                            next[i + k] += ci * &a[k - 1];
                        }
                    }
                }
                cur = next;
            }
            cur[d].clone()
        };
        for (n, d1, d2) in [(3, 3, 5), (2, 4, 3), (3, 5, 5)] {
            let p = upsilon_power_component(n, (d1, d2)).unwrap();
            let sum = p.terms().fold(Rational::zero(), |acc, (_, c)| acc + c.eval(&l).abs());
            assert_eq!(sum, power(d1, n) * power(d2, n), "{n} {d1} {d2}");
        }
    }

    #[test]
    fn gain_properties() {
        let q2 = ConvexityClass::q_int(2).unwrap();
        let x = C2 / 2.0;
        let l = 0.3587;
        let g = bch_gain_upper(l, &q2, x, x, 24).unwrap();
        let want = 4.0 * (l - 0.5f64).powi(2) * (1.0 - 0.5f64.sqrt()) * (l * (1.0 - l)).powi(3) * 2.0 * x.powi(8);
        assert!((g.gain - want).abs() < 1e-12 * want);
        assert!(g.bound < g.l1);
        assert_eq!(bch_gain_upper(0.5, &q2, x, x, 24).unwrap().gain, 0.0);
        assert_eq!(bch_gain_upper(l, &ConvexityClass::plain(), x, x, 24).unwrap().gain, 0.0);
        let mis = bch_gain_upper(0.1, &q2, x, x, 24).unwrap();
        assert!(!mis.aligned && mis.gain == 0.0 && mis.diagnostic.is_some());
    }

    #[test]
    fn strict_on_critical_window() {
        let x = C2 / 2.0;
        for q in [1, 2] {
            let c = ConvexityClass::q_int(q).unwrap();
            for l in [0.35865, 0.358655, 0.35866, 1.0 - 0.35865] {
                let g = bch_gain_upper(l, &c, x, x, 24).unwrap();
                assert!(g.bound < g.l1 && g.gain > 0.0);
            }
        }
    }

    #[test]
    fn improved_radius() {
        let plain = c2_improved(&ConvexityClass::plain(), 1000, 24).unwrap();
        assert!((plain.value - C2).abs() < 1e-3, "{plain:?}");
        let q1 = c2_improved(&ConvexityClass::q_int(1).unwrap(), 1000, 24).unwrap();
        let q2 = c2_improved(&ConvexityClass::q_int(2).unwrap(), 1000, 24).unwrap();
        assert!(q1.value > plain.value && q2.value > plain.value);
        assert!(q1.value > q2.value);
        assert!(q1.margin > 0.0 && q2.margin > 0.0);
        assert!((q1.value - C2_IMPROVED_Q1).abs() < 1e-8, "{q1:?}");
        assert!((q2.value - C2_IMPROVED_Q2).abs() < 1e-8, "{q2:?}");
    }
}

