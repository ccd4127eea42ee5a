//! Convergence-radius bounds for the λ-resolvent of the Magnus expansion:
//! closed forms, the corrected Euler recursion and its ODE, p-th-root
//! spectral bounds and the cruder ratio estimates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{b_correction, golden_max, reduced_kernel, ReducedKernel};
use crate::par::Exec;
use crate::rational::{dyadic, fmt_rational, int, rat, Rational};
use crate::specrad::{convolution_radius, radius_refined, Diagonal, OperatorGrid};
use crate::umqnorm::ConvexityClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    PthRootKernel,
    Ode,
    CrudeRatio,
    TrivialUpper,
    LogScan,
    Sicompar,
    Ricompar,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_range: Option<[f64; 2]>,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub provenance: BTreeMap<String, String>,
}

impl BoundReport {
    fn new(method: Method, class: &ConvexityClass) -> Self {
        BoundReport {
            method,
            lambda: None,
            lambda_range: None,
            class: class.label(),
            p: None,
            lower: None,
            upper: None,
            provenance: BTreeMap::new(),
        }
    }

    fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }

    /// The lower bound if present, else the upper one.
    pub fn value(&self) -> f64 {
        self.lower.or(self.upper).unwrap_or(f64::NAN)
    }

    pub fn is_consistent(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("lambda {lambda} outside [0,1]")));
    }
    Ok(())
}

/// 2 artanh(1−2λ)/(1−2λ), the radius in general Banach algebras.
pub fn c_plain(lambda: f64) -> f64 {
    if lambda <= 0.0 || lambda >= 1.0 {
        return f64::INFINITY;
    }
    let d = (1.0 - 2.0 * lambda).abs();
    if d.abs() < 1e-6 {
        // artanh(d)/d = 1 + d²/3 + d⁴/5 + …
        return 2.0 * (1.0 + d * d / 3.0 + d.powi(4) / 5.0);
    }
    2.0 * d.atanh() / d
}

/// √(π² + log²(λ/(1−λ))), the radius over Hilbert spaces.
pub fn c_eps(lambda: f64) -> f64 {
    if lambda <= 0.0 || lambda >= 1.0 {
        return f64::INFINITY;
    }
    let m = lambda.min(1.0 - lambda);
    let l = ((1.0 - m) / m).ln();
    (PI * PI + l * l).sqrt()
}

/// Coefficients Θ₁..Θ_N of (k+1)Θ_{k+1} = Θ_k + λ(1−λ)Σ Θ_jΘ_{k−j}, where
/// each `(k, gap)` lowers the freshly computed Θ_k by `gap`.
pub fn euler_coeffs(lambda: &Rational, n: usize, corrections: &[(usize, Rational)]) -> Result<Vec<Rational>> {
    if corrections.iter().any(|(k, g)| *k == 0 || g < &Rational::zero()) {
        return Err(Error::InvalidInput("corrections need degree >= 1 and gap >= 0".into()));
    }
    let ll = lambda * (int(1) - lambda);
    let gap = |k: usize| {
        corrections
            .iter()
            .filter(|(d, _)| *d == k)
            .fold(Rational::zero(), |a, (_, g)| a + g)
    };
    let mut th: Vec<Rational> = Vec::with_capacity(n);
    for k in 1..=n {
        let v = if k == 1 {
            int(1)
        } else {
            let m = k - 1;
            let mut s = Rational::zero();
            for j in 1..m {
                s += &th[j - 1] * &th[m - j - 1];
            }
            (&th[m - 1] + &ll * s) / int(k as i64)
        };
        th.push(v - gap(k));
    }
    Ok(th)
}

const ODE_THRESHOLD: f64 = 1e6;

/// ∫_T^∞ dy / ((1+ay)(1+by)).
fn blowup_tail(a: f64, b: f64, t: f64) -> f64 {
    if (a - b).abs() < 1e-12 {
        return 1.0 / (a * (1.0 + a * t));
    }
    ((a / b).ln() - ((1.0 + a * t) / (1.0 + b * t)).ln()) / (a - b)
}

struct Dopri {
    rtol: f64,
    atol: f64,
}

impl Dopri {
    /// One Dormand–Prince step; returns (y5, error estimate).
    fn step(f: &impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> (f64, f64) {
        let k1 = f(x, y);
        let k2 = f(x + h / 5.0, y + h * k1 / 5.0);
        let k3 = f(x + 3.0 * h / 10.0, y + h * (3.0 * k1 + 9.0 * k2) / 40.0);
        let k4 = f(x + 4.0 * h / 5.0, y + h * (44.0 * k1 / 45.0 - 56.0 * k2 / 15.0 + 32.0 * k3 / 9.0));
        let k5 = f(
            x + 8.0 * h / 9.0,
            y + h * (19372.0 * k1 / 6561.0 - 25360.0 * k2 / 2187.0 + 64448.0 * k3 / 6561.0 - 212.0 * k4 / 729.0),
        );
        let k6 = f(
            x + h,
            y + h
                * (9017.0 * k1 / 3168.0 - 355.0 * k2 / 33.0 + 46732.0 * k3 / 5247.0 + 49.0 * k4 / 176.0
                    - 5103.0 * k5 / 18656.0),
        );
        let y5 = y + h * (35.0 * k1 / 384.0 + 500.0 * k3 / 1113.0 + 125.0 * k4 / 192.0 - 2187.0 * k5 / 6784.0
            + 11.0 * k6 / 84.0);
        let k7 = f(x + h, y5);
        let y4 = y + h
            * (5179.0 * k1 / 57600.0 + 7571.0 * k3 / 16695.0 + 393.0 * k4 / 640.0 - 92097.0 * k5 / 339200.0
                + 187.0 * k6 / 2100.0
                + k7 / 40.0);
        (y5, (y5 - y4).abs())
    }

    /// Integrates from (0, 0) until y ≥ `stop` or x ≥ `x_max`.
    fn run(&self, f: impl Fn(f64, f64) -> f64, stop: f64, x_max: f64) -> Option<(f64, f64)> {
        let (mut x, mut y) = (0.0, 0.0);
        let mut h: f64 = 1e-3;
        for _ in 0..10_000_000 {
            if y >= stop {
                return Some((x, y));
            }
            if x >= x_max {
                return None;
            }
            h = h.min(x_max - x);
            let (y5, err) = Self::step(&f, x, y, h);
            let scale = self.atol + self.rtol * y.abs().max(y5.abs());
            let ratio = if y5.is_finite() { err / scale } else { f64::INFINITY };
            if ratio <= 1.0 {
                x += h;
                y = y5;
            }
            let fac = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
            if h < 1e-300 {
                return None;
            }
        }
        None
    }
}

/// Blow-up abscissa of y' = (1+λy)(1+(1−λ)y) − Σ k·gap_k·x^{k−1}, y(0)=0.
///
/// Integrates to y = 10⁶ and adds the tail ∫dy/((1+λy)(1+(1−λ)y)) of the
/// uncorrected field, which can only shorten the remaining time.
pub fn ode_blowup(lambda: f64, corrections: &[(usize, f64)]) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 0.0 || lambda == 1.0 {
        return Ok(f64::INFINITY);
    }
    let (a, b) = (lambda, 1.0 - lambda);
    let corr = corrections.to_vec();
    let field = move |x: f64, y: f64| {
        let e: f64 = corr.iter().map(|&(k, g)| g * k as f64 * x.powi(k as i32 - 1)).sum();
        (1.0 + a * y) * (1.0 + b * y) - e
    };
    let solver = Dopri { rtol: 1e-13, atol: 1e-14 };
    let x_max = 4.0 * c_plain(lambda) + 10.0;
    match solver.run(field, ODE_THRESHOLD, x_max) {
        Some((x, y)) => Ok(x + blowup_tail(a, b, y)),
        None => Ok(f64::INFINITY),
    }
}

/// Θ₄^{(1/2)} minus its universal value, the degree-4 gap at λ = 1/2.
pub fn degree4_gap(class: &ConvexityClass) -> Result<Rational> {
    let th = crate::umqnorm::theta_k(4, &rat(1, 2), class)?;
    Ok(rat(1, 8) - th.hi)
}

fn kernel_for(lambda: f64, p: usize, class: &ConvexityClass) -> Result<ReducedKernel> {
    check_lambda(lambda)?;
    if p == 0 || p > 6 {
        return Err(Error::OutOfRange(format!("p = {p} outside 1..=6")));
    }
    reduced_kernel(p - 1, &dyadic(lambda, 48), class)
}

/// Spectral radius w of the two-sided kernel K_{p−1}^{(λ),𝒜}; exact
/// (upper end of the enclosure) for the convolution case.
pub fn kernel_radius(kernel: &ReducedKernel) -> Result<f64> {
    if kernel.is_convolution_type() {
        return Ok(convolution_radius(kernel)?.hi_f64());
    }
    let r = radius_refined(
        |n| OperatorGrid::from_reduced(kernel, n, Diagonal::Average),
        128,
        4096,
        1e-11,
    )?;
    Ok(r.radius)
}

/// C ≥ (1/w_{p−1})^{1/p}.
pub fn c_bound_pth_root(lambda: f64, p: usize, class: &ConvexityClass) -> Result<BoundReport> {
    let k = kernel_for(lambda, p, class)?;
    let w = kernel_radius(&k)?;
    let c = if w == 0.0 { f64::INFINITY } else { w.powf(-1.0 / p as f64) };
    let mut r = BoundReport::new(Method::PthRootKernel, class)
        .note("kernel_radius", crate::fmt_sig(w))
        .note("convolution", k.is_convolution_type());
    r.lambda = Some(fmt_rational(k.lambda()));
    r.p = Some(p);
    r.lower = Some(c);
    Ok(r)
}

/// One λ of a log scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub w: f64,
    pub c: f64,
}

pub fn scan_lambda(p: usize, class: &ConvexityClass, lambdas: &[f64], exec: Exec) -> Result<Vec<ScanRow>> {
    exec.map(lambdas, |&l| {
        let w = if l == 0.0 || l == 1.0 {
            0.0
        } else {
            kernel_radius(&kernel_for(l, p, class)?)?
        };
        let c = if w == 0.0 { f64::INFINITY } else { w.powf(-1.0 / p as f64) };
        Ok(ScanRow { lambda: l, w, c })
    })
    .into_iter()
    .collect()
}

/// Largest violation of |C(λ₁) − C(λ₂)| ≤ |logit λ₁ − logit λ₂| between
/// neighbouring finite rows; zero when the scan respects it.
pub fn lipschitz_violation(rows: &[ScanRow]) -> f64 {
    let logit = |l: f64| (l / (1.0 - l)).ln();
    rows.windows(2)
        .filter(|w| w[0].c.is_finite() && w[1].c.is_finite())
        .map(|w| (w[0].c - w[1].c).abs() - (logit(w[0].lambda) - logit(w[1].lambda)).abs())
        .fold(0.0, f64::max)
}

/// min over λ of the p-th-root bound, via max over λ ∈ (0, 1/2] of w.
/// The grid is refined by golden section around its argmax to 1e−6 in λ.
pub fn c_log_bound(p: usize, class: &ConvexityClass, grid_points: usize) -> Result<BoundReport> {
    if grid_points < 3 {
        return Err(Error::InvalidInput("grid needs at least 3 points".into()));
    }
    let lambdas: Vec<f64> = (1..grid_points)
        .map(|i| 0.5 * i as f64 / (grid_points - 1) as f64)
        .collect();
    let rows = scan_lambda(p, class, &lambdas, Exec::default())?;
    let (imax, _) = rows
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r.w > acc.1 { (i, r.w) } else { acc });
    let lo = if imax == 0 { 0.0 } else { rows[imax - 1].lambda };
    let hi = rows.get(imax + 1).map_or(0.5, |r| r.lambda);
    let err = std::cell::RefCell::new(None);
    let f = |l: f64| match kernel_for(l, p, class).and_then(|k| kernel_radius(&k)) {
        Ok(w) => w,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    let (lstar, wref) = golden_max(f, lo, hi, 1e-6);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let wmax = wref.max(rows[imax].w);
    let argmax = if wref >= rows[imax].w { lstar } else { rows[imax].lambda };
    let mut r = BoundReport::new(Method::LogScan, class)
        .note("argmax_lambda", crate::fmt_sig(argmax))
        .note("max_w", crate::fmt_sig(wmax))
        .note("grid_points", grid_points)
        .note("lipschitz_violation", crate::fmt_sig(lipschitz_violation(&rows)));
    r.lambda_range = Some([lo, hi]);
    r.p = Some(p);
    r.lower = Some(wmax.powf(-1.0 / p as f64));
    Ok(r)
}

/// Largest value of t ↦ f(t) on [a, b]: dense sampling plus golden refinement.
fn sup_on(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    let h = (b - a) / samples as f64;
    let (mut bt, mut bv) = (a, f64::NEG_INFINITY);
    for i in 0..=samples {
        let t = a + i as f64 * h;
        let v = f(t);
        if v > bv {
            bv = v;
            bt = t;
        }
    }
    let (_, v) = golden_max(&f, (bt - h).max(a), (bt + h).min(b), 1e-12);
    bv.max(v)
}

/// c_plain(λ) / S^{1/p} with S = sup_t K̃^{(λ),𝒜}(t)/K̃^{(λ)}(t).
pub fn crude_ratio_bound(lambda: f64, p: usize, class: &ConvexityClass) -> Result<BoundReport> {
    let k = kernel_for(lambda, p, class)?;
    let plain = kernel_for(lambda, p, &ConvexityClass::plain())?;
    let s = sup_on(|t| k.eval_f64(t) / plain.eval_lo_f64(t), 0.0, 1.0, 2000);
    let mut r = BoundReport::new(Method::CrudeRatio, class).note("ratio_sup", crate::fmt_sig(s));
    r.lambda = Some(fmt_rational(k.lambda()));
    r.p = Some(p);
    r.lower = Some(c_plain(lambda) / s.powf(1.0 / p as f64));
    Ok(r)
}

/// Radius via max(λ,1−λ)·∫K̃ ≥ w.
pub fn sicompar_bound(lambda: f64, p: usize, class: &ConvexityClass) -> Result<BoundReport> {
    let k = kernel_for(lambda, p, class)?;
    let w = lambda.max(1.0 - lambda) * k.integral().hi_f64();
    let mut r = BoundReport::new(Method::Sicompar, class).note("radius_upper", crate::fmt_sig(w));
    r.lambda = Some(fmt_rational(k.lambda()));
    r.p = Some(p);
    r.lower = Some(w.powf(-1.0 / p as f64));
    Ok(r)
}

/// Radius via w^{(λ)}·max K̃ ≥ w.
pub fn ricompar_bound(lambda: f64, p: usize, class: &ConvexityClass) -> Result<BoundReport> {
    let k = kernel_for(lambda, p, class)?;
    let w = k.max_f64() / c_plain(lambda);
    let mut r = BoundReport::new(Method::Ricompar, class).note("radius_upper", crate::fmt_sig(w));
    r.lambda = Some(fmt_rational(k.lambda()));
    r.p = Some(p);
    r.lower = Some(w.powf(-1.0 / p as f64));
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Cayley,
    Magnus,
}

/// Relaxing every monomial cost by κ^{1/3}: 2·κ^{−1/3} for the Cayley
/// transform at λ = 1/2, c_plain(λ)·κ^{−1/3} per λ.
pub fn upper_trivial(class: &ConvexityClass, variant: Variant, lambda: Option<f64>) -> Result<BoundReport> {
    let relax = class.kappa_f64().powf(-1.0 / 3.0);
    let mut r = BoundReport::new(Method::TrivialUpper, class);
    let base = match variant {
        Variant::Cayley => 2.0,
        Variant::Magnus => {
            let l = lambda.ok_or_else(|| Error::InvalidInput("magnus variant needs lambda".into()))?;
            check_lambda(l)?;
            r.lambda = Some(crate::fmt_sig(l));
            c_plain(l)
        }
    };
    r.upper = Some(base * relax);
    Ok(r.note("variant", format!("{variant:?}").to_lowercase()))
}

/// Closed forms c_plain ≤ C ≤ c_eps.
pub fn closed_form(lambda: f64) -> Result<BoundReport> {
    check_lambda(lambda)?;
    let mut r = BoundReport::new(Method::ClosedForm, &ConvexityClass::plain());
    r.lambda = Some(crate::fmt_sig(lambda));
    r.lower = Some(c_plain(lambda));
    r.upper = Some(c_eps(lambda));
    Ok(r)
}

pub fn ode_report(lambda: f64, class: &ConvexityClass) -> Result<BoundReport> {
    let gap = if class.is_plain() || lambda != 0.5 {
        Rational::zero()
    } else {
        degree4_gap(class)?
    };
    let g = gap.to_f64().unwrap_or(0.0);
    let v = ode_blowup(lambda, &[(4, g)])?;
    let mut r = BoundReport::new(Method::Ode, class).note("degree4_gap", fmt_rational(&gap));
    r.lambda = Some(crate::fmt_sig(lambda));
    r.lower = Some(v);
    Ok(r)
}

/// Floor 2/(3/4 + κ/4)^{1/5} on the logarithm radius for p = 5.
pub fn maglower_floor(class: &ConvexityClass) -> f64 {
    2.0 / (0.75 + 0.25 * class.kappa_f64()).powf(0.2)
}

#[derive(Clone, Debug, Serialize)]
pub struct MaglowerReport {
    pub step: f64,
    /// min of B/K₄ over λ ∈ [2/5, 3/5], t ∈ [−1,1].
    pub inner_min: f64,
    /// min of B/K₄ over λ ∈ [1/3, 2/3] ∖ [2/5, 3/5].
    pub outer_min: f64,
    /// Lower bound on the logarithm radius assembled from the two floors.
    pub assembled: f64,
}

/// Ratio B(λ,t)/K₄^{(λ)}(t) of the correction against the plain two-sided
/// kernel on a grid of spacing `step` in both λ and t.
pub fn maglower_ratios(class: &ConvexityClass, step: f64) -> Result<MaglowerReport> {
    let nl = ((1.0 / 3.0) / step).round() as usize;
    let lambdas: Vec<f64> = (0..=nl).map(|i| 1.0 / 3.0 + i as f64 * step).filter(|l| *l <= 2.0 / 3.0 + 1e-15).collect();
    let nt = (2.0 / step).round() as usize;
    let ts: Vec<f64> = (0..=nt).map(|i| -1.0 + i as f64 * 2.0 / nt as f64).collect();
    let mins = Exec::default().map(&lambdas, |&l| {
        let k = kernel_for(l, 5, &ConvexityClass::plain())?;
        let m = ts
            .iter()
            .map(|&t| b_correction(l, t) / k.two_sided(t))
            .fold(f64::INFINITY, f64::min);
        Ok((l, m))
    });
    let mut inner = f64::INFINITY;
    let mut outer = f64::INFINITY;
    for r in mins {
        let (l, m) = r?;
        if (0.4 - 1e-12..=0.6 + 1e-12).contains(&l) {
            inner = inner.min(m);
        } else {
            outer = outer.min(m);
        }
    }
    let kap = class.kappa_f64();
    let assembled = (2.0 / (1.0 - (1.0 - kap) * inner).powf(0.2))
        .min(c_plain(0.4) / (1.0 - (1.0 - kap) * outer).powf(0.2))
        .min(c_plain(1.0 / 3.0));
    Ok(MaglowerReport {
        step,
        inner_min: inner,
        outer_min: outer,
        assembled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::regression::*;
    use proptest::prelude::*;

    fn truncate3(x: f64) -> String {
        crate::truncate_decimals(x, 3)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(c_plain(0.5), 2.0);
        assert_eq!(c_plain(0.0), f64::INFINITY);
        assert!((c_plain(1.0 / 3.0) - 3.0 * 2f64.ln()).abs() < 1e-14);
        assert!((c_eps(0.5) - PI).abs() < 1e-15);
        assert!((c_eps(0.25) - (PI * PI + 3f64.ln().powi(2)).sqrt()).abs() < 1e-14);
        assert!((c_plain(0.5 + 1e-7) - 2.0).abs() < 1e-12);
        assert_eq!(c_eps(1.0), f64::INFINITY);
    }

    #[test]
    fn euler_plain_half() {
        let th = euler_coeffs(&rat(1, 2), 20, &[]).unwrap();
        for (k, t) in th.iter().enumerate() {
            assert_eq!(*t, crate::rational::rpow(&rat(1, 2), k));
        }
        let th = euler_coeffs(&int(0), 8, &[]).unwrap();
        for (k, t) in th.iter().enumerate() {
            assert_eq!(*t, Rational::new(1.into(), crate::rational::factorial(k + 1)));
        }
    }

    #[test]
    fn euler_matches_g_series() {
        for l in [rat(1, 7), rat(2, 5)] {
            assert_eq!(euler_coeffs(&l, 15, &[]).unwrap(), crate::kernels::g_series(&l, 15).unwrap());
        }
    }

    #[test]
    fn euler_with_degree4_gap() {
        let gap = rat(1, 8) - rat(5, 48);
        let plain = euler_coeffs(&rat(1, 2), 12, &[]).unwrap();
        let corr = euler_coeffs(&rat(1, 2), 12, &[(4, gap)]).unwrap();
        assert_eq!(corr[3], rat(5, 48));
        assert!(corr.iter().zip(&plain).all(|(c, p)| c <= p));
        assert!(corr[11] < plain[11]);
    }

    #[test]
    fn ode_plain_blowup() {
        assert!((ode_blowup(0.5, &[]).unwrap() - 2.0).abs() < 1e-6);
        for l in [0.1, 0.3, 0.45] {
            assert!((ode_blowup(l, &[]).unwrap() - c_plain(l)).abs() < 1e-6);
        }
        assert_eq!(ode_blowup(0.0, &[]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ode_gap_regression() {
        let gap = (rat(1, 8) - rat(5, 48)).to_f64().unwrap();
        let v = ode_blowup(0.5, &[(4, gap)]).unwrap();
        assert!(v > 2.0);
        assert!((v - ODE_GAP_Q1).abs() < 1e-6, "{v}");
    }

    #[test]
    fn ode_gap_agrees_with_coefficient_ratio() {
        let gap = (rat(1, 8) - rat(5, 48)).to_f64().unwrap();
        let mut th = vec![1.0f64];
        for k in 2..=400usize {
            let m = k - 1;
            let s: f64 = (1..m).map(|j| th[j - 1] * th[m - j - 1]).sum();
            let mut v = (th[m - 1] + 0.25 * s) / k as f64;
            if k == 4 {
                v -= gap;
            }
            th.push(v);
        }
        let ratio = th[398] / th[399];
        assert!((ratio - ode_blowup(0.5, &[(4, gap)]).unwrap()).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn degree4_gap_at_q1() {
        assert_eq!(degree4_gap(&ConvexityClass::q_int(1).unwrap()).unwrap(), rat(1, 48));
    }

    #[test]
    fn pth_root_at_half() {
        let q2 = c_bound_pth_root(0.5, 5, &ConvexityClass::q_int(2).unwrap()).unwrap();
        let want = 2.0 / (2.0 / 3.0 + 0.5f64.sqrt() / 3.0).powf(0.2);
        assert!((q2.value() - want).abs() < 1e-12);
        assert_eq!(truncate3(q2.value()), "2.041");
        let q1 = c_bound_pth_root(0.5, 5, &ConvexityClass::q_int(1).unwrap()).unwrap();
        assert_eq!(truncate3(q1.value()), "2.074");
    }

    #[test]
    fn pth_root_plain_equals_closed_form() {
        let plain = ConvexityClass::plain();
        for p in 1..=5 {
            let r = c_bound_pth_root(1.0 / 3.0, p, &plain).unwrap();
            assert!((r.value() - c_plain(1.0 / 3.0)).abs() < 1e-5, "{p}: {}", r.value());
        }
    }

    #[test]
    fn ordering_chain() {
        for q in [1, 2] {
            let c = ConvexityClass::q_int(q).unwrap();
            for l in [0.2, 0.35, 0.5, 0.7] {
                let v = c_bound_pth_root(l, 5, &c).unwrap().value();
                assert!(c_plain(l) <= v + 1e-9 && v <= c_eps(l), "{q} {l} {v}");
            }
        }
    }

    #[test]
    fn reflection_invariance() {
        let c = ConvexityClass::q_int(1).unwrap();
        let a = c_bound_pth_root(0.375, 5, &c).unwrap().value();
        let b = c_bound_pth_root(0.625, 5, &c).unwrap().value();
        assert!((a - b).abs() < 1e-9);
        assert_eq!(c_plain(0.25), c_plain(0.75));
        assert_eq!(c_eps(0.375), c_eps(0.625));
    }

    #[test]
    fn trivial_upper() {
        let u2 = upper_trivial(&ConvexityClass::q_int(2).unwrap(), Variant::Cayley, None).unwrap();
        assert_eq!(truncate3(u2.value()), "2.244");
        assert!((u2.value() - 2.0 * 2f64.powf(1.0 / 6.0)).abs() < 1e-12);
        let u1 = upper_trivial(&ConvexityClass::q_int(1).unwrap(), Variant::Cayley, None).unwrap();
        assert!((u1.value() - 2.0 * 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let up = upper_trivial(&ConvexityClass::plain(), Variant::Cayley, None).unwrap();
        assert_eq!(up.value(), 2.0);
    }

    #[test]
    fn comparison_bounds() {
        let c = ConvexityClass::q_int(1).unwrap();
        let exact = c_bound_pth_root(0.5, 5, &c).unwrap().value();
        assert!((sicompar_bound(0.5, 5, &c).unwrap().value() - exact).abs() < 1e-12);
        assert!((ricompar_bound(0.5, 5, &c).unwrap().value() - exact).abs() < 1e-9);
        let plain = ConvexityClass::plain();
        let exact = c_bound_pth_root(1.0 / 3.0, 5, &plain).unwrap().value();
        for r in [
            sicompar_bound(1.0 / 3.0, 5, &plain).unwrap(),
            ricompar_bound(1.0 / 3.0, 5, &plain).unwrap(),
            crude_ratio_bound(1.0 / 3.0, 5, &plain).unwrap(),
        ] {
            assert!(r.value() <= exact + 1e-9, "{r:?}");
        }
        let si = sicompar_bound(0.4, 5, &c).unwrap().value();
        let ri = ricompar_bound(0.4, 5, &c).unwrap().value();
        assert!((si - SICOMPAR_Q1_04).abs() < 1e-9, "{si}");
        assert!((ri - RICOMPAR_Q1_04).abs() < 1e-9, "{ri}");
        let exact = c_bound_pth_root(0.4, 5, &c).unwrap().value();
        assert!(si <= exact && ri <= exact);
    }

    #[test]
    fn crude_ratio_at_half() {
        let c = ConvexityClass::q_int(2).unwrap();
        let r = crude_ratio_bound(0.5, 5, &c).unwrap().value();
        let exact = c_bound_pth_root(0.5, 5, &c).unwrap().value();
        assert!((r - exact).abs() < 1e-9);
    }

    #[test]
    fn report_json_is_deterministic() {
        let c = ConvexityClass::q_int(1).unwrap();
        let a = serde_json::to_string(&c_bound_pth_root(0.5, 5, &c).unwrap()).unwrap();
        let b = serde_json::to_string(&c_bound_pth_root(0.5, 5, &c).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"method\":\"pth-root-kernel\""));
    }

    #[test]
    fn log_bound_constants() {
        for (q, want) in [(2, 2.040800), (1, 2.071801)] {
            let c = ConvexityClass::q_int(q).unwrap();
            let r = c_log_bound(5, &c, 101).unwrap();
            assert!((r.value() - want).abs() < 1e-4, "{q}: {r:?}");
            assert!(maglower_floor(&c) < r.value());
            assert!(r.value() <= c_bound_pth_root(0.5, 5, &c).unwrap().value() + 1e-12);
        }
        let r = c_log_bound(5, &ConvexityClass::plain(), 21).unwrap();
        assert!((r.value() - 2.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn maglower_ratio_floors() {
        for q in [1, 2] {
            let c = ConvexityClass::q_int(q).unwrap();
            let m = maglower_ratios(&c, 1e-2).unwrap();
            assert!(m.inner_min > 0.25 && m.outer_min > 0.2, "{m:?}");
            assert!(m.assembled > maglower_floor(&c));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn plain_below_eps(l in 0.001f64..0.999) {
            prop_assert!(c_plain(l) <= c_eps(l));
            prop_assert!((c_plain(l) - c_plain(1.0 - l)).abs() < 1e-9 * c_plain(l));
        }

        #[test]
        fn gaps_only_lower_coefficients(g in 0u32..100) {
            let gap = rat(g as i64, 1000);
            let plain = euler_coeffs(&rat(1, 3), 10, &[]).unwrap();
            let corr = euler_coeffs(&rat(1, 3), 10, &[(3, gap)]).unwrap();
            prop_assert!(corr.iter().zip(&plain).all(|(c, p)| c <= p));
        }
    }
}

