//! Resolvent estimating kernels: the reduced one-variable kernels K̃, their
//! two-sided Toeplitz assembly, and the plain-case generating functions.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freealg::mu_ab_l1;
use crate::rational::{binomial, factorial, fmt_rational, int, rat, rpow, to_f64, Rational};
use crate::umqnorm::{theta_ab, ConvexityClass, NormValue};

/// ((a+b)!/(a!b!))(1−t)^a t^b.
pub fn p_ab(a: usize, b: usize, t: &Rational) -> Rational {
    Rational::from_integer(binomial(a + b, a)) * rpow(&(int(1) - t), a) * rpow(t, b)
}

pub fn p_ab_f64(a: usize, b: usize, t: f64) -> f64 {
    to_f64(&Rational::from_integer(binomial(a + b, a))) * (1.0 - t).powi(a as i32) * t.powi(b as i32)
}

/// K̃_{p−1}^{(λ),𝒜}(t) = Σ_{a+b=p−1} p_{a,b}(t) Θ_{a,b}^{(λ),𝒜} on [0,1],
/// assembled two-sidedly as λK̃(t) on [0,1] and (1−λ)K̃(t+1) on [−1,0].
#[derive(Clone, Debug)]
pub struct ReducedKernel {
    p_minus_1: usize,
    lambda: Rational,
    lambda_f64: f64,
    /// Θ_{a, p−1−a} indexed by a.
    theta: Vec<NormValue>,
    /// Binomial weight times upper Θ, as floats, indexed by a.
    weights_hi: Vec<f64>,
    weights_lo: Vec<f64>,
}

impl ReducedKernel {
    pub fn from_thetas(p_minus_1: usize, lambda: Rational, theta: Vec<NormValue>) -> Result<Self> {
        if theta.len() != p_minus_1 + 1 {
            return Err(Error::InvalidInput(format!(
                "need {} theta values, got {}",
                p_minus_1 + 1,
                theta.len()
            )));
        }
        if lambda < Rational::zero() || lambda > int(1) {
            return Err(Error::OutOfRange("lambda outside [0,1]".into()));
        }
        let binom: Vec<f64> = (0..=p_minus_1)
            .map(|a| to_f64(&Rational::from_integer(binomial(p_minus_1, a))))
            .collect();
        let weights_hi = theta.iter().zip(&binom).map(|(t, b)| t.hi_f64() * b).collect();
        let weights_lo = theta.iter().zip(&binom).map(|(t, b)| t.lo_f64() * b).collect();
        Ok(ReducedKernel {
            p_minus_1,
            lambda_f64: to_f64(&lambda),
            lambda,
            theta,
            weights_hi,
            weights_lo,
        })
    }

    pub fn p_minus_1(&self) -> usize {
        self.p_minus_1
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda_f64
    }

    pub fn thetas(&self) -> &[NormValue] {
        &self.theta
    }

    pub fn is_exact(&self) -> bool {
        self.theta.iter().all(|t| t.as_exact().is_some())
    }

    /// Enclosure of K̃(t); p_{a,b} ≥ 0 on [0,1] keeps the endpoints ordered.
    pub fn eval(&self, t: &Rational) -> NormValue {
        let n = self.p_minus_1;
        self.theta
            .iter()
            .enumerate()
            .fold(NormValue::zero(), |acc, (a, th)| acc.add(&th.scale(&p_ab(a, n - a, t))))
    }

    fn bernstein(&self, w: &[f64], t: f64) -> f64 {
        let n = self.p_minus_1 as i32;
        let s = 1.0 - t;
        w.iter()
            .enumerate()
            .map(|(a, c)| c * s.powi(a as i32) * t.powi(n - a as i32))
            .sum()
    }

    /// Upper end of the K̃(t) enclosure, for t ∈ [0,1].
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.bernstein(&self.weights_hi, t)
    }

    pub fn eval_lo_f64(&self, t: f64) -> f64 {
        self.bernstein(&self.weights_lo, t)
    }

    /// Two-sided kernel K(s), s = t_p − t₀ ∈ [−1,1]; s = 0 goes to the λ side.
    pub fn two_sided(&self, s: f64) -> f64 {
        if s >= 0.0 {
            self.lambda_f64 * self.eval_f64(s)
        } else {
            (1.0 - self.lambda_f64) * self.eval_f64(s + 1.0)
        }
    }

    /// Average of the two one-sided limits at s = 0.
    pub fn diagonal_average(&self) -> f64 {
        0.5 * (self.lambda_f64 * self.eval_f64(0.0) + (1.0 - self.lambda_f64) * self.eval_f64(1.0))
    }

    /// Exact coefficients of K̃ in powers of t, lowest first.
    pub fn coeffs_exact(&self) -> Option<Vec<Rational>> {
        let n = self.p_minus_1;
        let mut out = vec![Rational::zero(); n + 1];
        for (a, th) in self.theta.iter().enumerate() {
            let th = th.as_exact()?;
            let c = Rational::from_integer(binomial(n, a)) * th;
            // (1−t)^a t^{n−a} = Σ_i C(a,i)(−1)^i t^{n−a+i}
            for i in 0..=a {
                let sign = if i % 2 == 0 { int(1) } else { int(-1) };
                out[n - a + i] += &c * Rational::from_integer(binomial(a, i)) * sign;
            }
        }
        Some(out)
    }

    /// Monomial coefficients built from the upper Θ values.
    pub fn coeffs_hi_f64(&self) -> Vec<f64> {
        let n = self.p_minus_1;
        let mut out = vec![0.0; n + 1];
        for (a, w) in self.weights_hi.iter().enumerate() {
            for i in 0..=a {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                out[n - a + i] += w * to_f64(&Rational::from_integer(binomial(a, i))) * sign;
            }
        }
        out
    }

    /// ∫₀¹ K̃; each p_{a,b} integrates to 1/(a+b+1).
    pub fn integral(&self) -> NormValue {
        let inv = Rational::new(1.into(), (self.p_minus_1 as i64 + 1).into());
        self.theta
            .iter()
            .fold(NormValue::zero(), |acc, th| acc.add(th))
            .scale(&inv)
    }

    /// max of the upper kernel on [0,1] by dense sampling plus local refinement.
    pub fn max_f64(&self) -> f64 {
        let n = 2000;
        let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let v = self.eval_f64(t);
            if v > best {
                best = v;
                best_t = t;
            }
        }
        let h = 1.0 / n as f64;
        let (_, v) = golden_max(|t| self.eval_f64(t), (best_t - h).max(0.0), (best_t + h).min(1.0), 1e-12);
        best.max(v)
    }

    /// Convolution type means K(t) = K(t − 1), which for this assembly is λ = 1/2.
    pub fn is_convolution_type(&self) -> bool {
        self.lambda == rat(1, 2) || self.theta.iter().all(|t| t.hi.is_zero())
    }

    pub fn export(&self) -> KernelExport {
        KernelExport {
            p_minus_1: self.p_minus_1,
            lambda: fmt_rational(&self.lambda),
            exact: self.is_exact(),
            theta: self.theta.clone(),
            coeffs: self.coeffs_exact().map(|v| v.iter().map(fmt_rational).collect()),
            coeffs_f64: self.coeffs_hi_f64(),
        }
    }

    /// `t,K̃(t)` rows at `samples + 1` equispaced points.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut s = String::from("t,kernel\n");
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            s.push_str(&format!("{},{}\n", crate::fmt_sig(t), crate::fmt_sig(self.eval_f64(t))));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelExport {
    pub p_minus_1: usize,
    pub lambda: String,
    pub exact: bool,
    pub theta: Vec<NormValue>,
    pub coeffs: Option<Vec<String>>,
    pub coeffs_f64: Vec<f64>,
}

/// Builds K̃_{p−1}^{(λ),𝒜}. The plain class uses the ℓ¹ polynomials
/// directly; other classes go through the exact LP.
pub fn reduced_kernel(p_minus_1: usize, lambda: &Rational, class: &ConvexityClass) -> Result<ReducedKernel> {
    if lambda < &Rational::zero() || lambda > &int(1) {
        return Err(Error::OutOfRange("lambda outside [0,1]".into()));
    }
    if p_minus_1 == 0 {
        return ReducedKernel::from_thetas(0, lambda.clone(), vec![NormValue::exact(int(1))]);
    }
    let fact = Rational::new(1.into(), factorial(p_minus_1));
    let theta = (0..=p_minus_1)
        .map(|a| {
            if class.is_plain() {
                Ok(NormValue::exact(mu_ab_l1(a, p_minus_1 - a).eval(lambda) * &fact))
            } else {
                theta_ab(a, p_minus_1 - a, lambda, class)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ReducedKernel::from_thetas(p_minus_1, lambda.clone(), theta)
}

fn h_sum(lambda: &Rational, k: usize) -> Rational {
    let mu = int(1) - lambda;
    (0..=k)
        .map(|i| rpow(lambda, i) * rpow(&mu, k - i))
        .fold(Rational::zero(), |a, b| a + b)
}

/// (ue^v − ve^u)/(u − v) at u = λx, v = (1−λ)x, to order n.
fn resolvent_denominator(lambda: &Rational, n: usize) -> Vec<Rational> {
    let ll = lambda * (int(1) - lambda);
    (0..=n)
        .map(|m| match m {
            0 => int(1),
            1 => Rational::zero(),
            _ => -(&ll * h_sum(lambda, m - 2)) / Rational::from_integer(factorial(m)),
        })
        .collect()
}

/// a / b for power series with b₀ = 1.
fn series_div(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let mut c = a[k].clone();
        for j in 1..=k.min(b.len() - 1) {
            c -= &b[j] * &out[k - j];
        }
        out.push(c);
    }
    out
}

/// Plain Θ₁^{(λ)}, …, Θ_n^{(λ)} from G(u,v) = (e^u − e^v)/(ue^v − ve^u) at
/// u = λx, v = (1−λ)x. The numerator and denominator share the factor
/// u − v, which is cancelled symbolically so λ = 1/2 is regular. The
/// coefficients match the Euler recursion under Θ(x) = x·G(λx, (1−λ)x),
/// so entry k−1 is Θ_k.
pub fn g_series(lambda: &Rational, n: usize) -> Result<Vec<Rational>> {
    if n > 30 {
        return Err(Error::OutOfRange(format!("series order {n} > 30")));
    }
    let num: Vec<Rational> = (0..n)
        .map(|k| h_sum(lambda, k) / Rational::from_integer(factorial(k + 1)))
        .collect();
    let den = resolvent_denominator(lambda, n);
    Ok(series_div(&num, &den))
}

/// Coefficients of G̃(λx, (1−λ)x | t) = e^{(tλ+(1−t)(1−λ))x}·(u−v)/(ue^v − ve^u)
/// up to x^n; the x^{p−1} coefficient is the plain K̃_{p−1}^{(λ)}(t).
pub fn g_tilde_series(lambda: &Rational, t: &Rational, n: usize) -> Result<Vec<Rational>> {
    if n > 30 {
        return Err(Error::OutOfRange(format!("series order {n} > 30")));
    }
    if t < &Rational::zero() || t > &int(1) {
        return Err(Error::OutOfRange("t outside [0,1]".into()));
    }
    let s = t * lambda + (int(1) - t) * (int(1) - lambda);
    let num: Vec<Rational> = (0..=n)
        .map(|k| rpow(&s, k) / Rational::from_integer(factorial(k)))
        .collect();
    Ok(series_div(&num, &resolvent_denominator(lambda, n)))
}

/// Coefficients in t (lowest first) of the correction B(λ,t) on one side:
/// `positive` selects t ∈ [0,1], otherwise t ∈ [−1,0].
pub fn b_correction_poly(lambda: &Rational, positive: bool) -> Vec<Rational> {
    let one = int(1);
    let l = lambda.clone();
    let m = if l <= rat(1, 2) { l.clone() } else { &one - &l };
    if positive {
        let pre = rat(1, 3) * &l * &l * (&one - &l) * &m;
        vec![
            &pre * (&one - &l),
            Rational::zero(),
            &pre * (int(-3) + int(6) * &l),
            &pre * (int(2) - int(4) * &l),
        ]
    } else {
        let pre = rat(1, 3) * &l * (&l - &one) * (&l - &one) * &m;
        vec![
            &pre * &l,
            Rational::zero(),
            &pre * (int(3) - int(6) * &l),
            &pre * (int(2) - int(4) * &l),
        ]
    }
}

pub fn b_correction_exact(lambda: &Rational, t: &Rational) -> Rational {
    let c = b_correction_poly(lambda, t >= &Rational::zero());
    c.iter()
        .rev()
        .fold(Rational::zero(), |acc, k| acc * t + k)
}

/// B(λ,t) for t ∈ [−1,1].
pub fn b_correction(lambda: f64, t: f64) -> f64 {
    let m = lambda.min(1.0 - lambda);
    if t >= 0.0 {
        lambda * lambda * (1.0 - lambda) * m / 3.0
            * (1.0 - lambda - 3.0 * t * t + 2.0 * t.powi(3) + 6.0 * lambda * t * t - 4.0 * lambda * t.powi(3))
    } else {
        lambda * (lambda - 1.0).powi(2) * m / 3.0
            * (lambda + 3.0 * t * t + 2.0 * t.powi(3) - 6.0 * lambda * t * t - 4.0 * lambda * t.powi(3))
    }
}

/// Exact t-polynomial (lowest power first) of the two-sided kernel on one
/// side: λK̃(t) for t ≥ 0 or (1−λ)K̃(t+1) for t ≤ 0.
pub fn two_sided_poly(k: &ReducedKernel, positive: bool) -> Option<Vec<Rational>> {
    let c = k.coeffs_exact()?;
    let l = k.lambda().clone();
    if positive {
        return Some(c.iter().map(|x| x * &l).collect());
    }
    let mu = int(1) - &l;
    let mut out = vec![Rational::zero(); c.len()];
    for (j, cj) in c.iter().enumerate() {
        // (t+1)^j
        for i in 0..=j {
            out[i] += cj * Rational::from_integer(binomial(j, i)) * &mu;
        }
    }
    Some(out)
}

/// Golden-section maximization of a unimodal function on [a, b].
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |acc, p| if p.1 > acc.1 { p } else { acc })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::umqnorm::theta_k;

    fn euler(lambda: &Rational, n: usize) -> Vec<Rational> {
        let ll = lambda * (int(1) - lambda);
        let mut th = vec![Rational::zero(), int(1)];
        for k in 1..n {
            let mut s = th[k].clone();
            for j in 1..k {
                s += &ll * &th[j] * &th[k - j];
            }
            th.push(s / int(k as i64 + 1));
        }
        th[1..=n].to_vec()
    }

    #[test]
    fn p_ab_examples() {
        assert_eq!(p_ab(0, 0, &rat(1, 3)), int(1));
        assert_eq!(p_ab(2, 2, &rat(1, 2)), rat(3, 8));
        let t = rat(2, 7);
        let total = (0..=4).fold(Rational::zero(), |acc, a| acc + p_ab(a, 4 - a, &t));
        assert_eq!(total, int(1));
        assert!((p_ab_f64(2, 2, 0.5) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn half_kernel_is_constant() {
        let k = reduced_kernel(4, &rat(1, 2), &ConvexityClass::q_int(1).unwrap()).unwrap();
        let c = k.coeffs_exact().unwrap();
        assert_eq!(c[0], (rat(2, 3) + rat(1, 6)) / int(16));
        assert!(c[1..].iter().all(Zero::is_zero));
        let q2 = ConvexityClass::q_int(2).unwrap();
        let k2 = reduced_kernel(4, &rat(1, 2), &q2).unwrap();
        let expect = (2.0 / 3.0 + q2.kappa_f64() / 3.0) / 16.0;
        for t in [0.0, 0.3, 1.0] {
            assert!((k2.eval_f64(t) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_product_kernel() {
        let k = reduced_kernel(0, &rat(1, 3), &ConvexityClass::q_int(1).unwrap()).unwrap();
        assert_eq!(k.coeffs_exact().unwrap(), vec![int(1)]);
        assert_eq!(k.two_sided(0.2), 1.0 / 3.0);
        assert!((k.two_sided(-0.2) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn g_series_matches_euler_recursion() {
        for lam in [rat(1, 2), rat(1, 3), rat(1, 7), int(0), int(1)] {
            assert_eq!(g_series(&lam, 30).unwrap(), euler(&lam, 30), "λ={lam}");
        }
        let half = g_series(&rat(1, 2), 20).unwrap();
        for (i, v) in half.iter().enumerate() {
            assert_eq!(*v, Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), i)));
        }
        assert!(g_series(&rat(1, 2), 31).is_err());
    }

    #[test]
    fn g_tilde_at_half() {
        for t in [int(0), rat(1, 3), int(1)] {
            let s = g_tilde_series(&rat(1, 2), &t, 10).unwrap();
            for (k, v) in s.iter().enumerate() {
                assert_eq!(*v, Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), k)));
            }
        }
    }

    #[test]
    fn plain_kernel_matches_g_tilde() {
        let plain = ConvexityClass::plain();
        for lam in [rat(1, 5), rat(1, 3), rat(1, 2), rat(1, 4)] {
            for pm1 in 0..=6 {
                let k = reduced_kernel(pm1, &lam, &plain).unwrap();
                for t in [int(0), rat(1, 4), rat(1, 2), int(1)] {
                    let g = g_tilde_series(&lam, &t, 6).unwrap();
                    assert_eq!(k.eval(&t).as_exact(), Some(&g[pm1]), "p-1={pm1} λ={lam} t={t}");
                }
            }
        }
    }

    #[test]
    fn endpoint_identities() {
        for class in [ConvexityClass::q_int(1).unwrap(), ConvexityClass::plain()] {
            for lam in [rat(1, 3), rat(3, 4)] {
                let k = reduced_kernel(4, &lam, &class).unwrap();
                let th = theta_k(4, &lam, &class).unwrap();
                let th = th.as_exact().unwrap();
                assert_eq!(k.eval(&int(0)).as_exact().unwrap(), &((int(1) - &lam) * th));
                assert_eq!(k.eval(&int(1)).as_exact().unwrap(), &(&lam * th));
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        let class = ConvexityClass::q_int(1).unwrap();
        let lam = rat(2, 7);
        let k1 = reduced_kernel(4, &lam, &class).unwrap();
        let k2 = reduced_kernel(4, &(int(1) - &lam), &class).unwrap();
        for t in [int(0), rat(1, 5), rat(2, 3), int(1)] {
            assert_eq!(k1.eval(&t), k2.eval(&(int(1) - &t)));
        }
    }

    #[test]
    fn magnitude_bounds() {
        let class = ConvexityClass::q_int(2).unwrap();
        for lam in [0.05, 0.3, 0.5, 0.8] {
            let k = reduced_kernel(4, &crate::rational::dyadic(lam, 20), &class).unwrap();
            for i in -50..=50 {
                let v = k.two_sided(i as f64 / 50.0);
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn correction_identity_is_exact() {
        for kappa in [rat(1, 2), rat(3, 4)] {
            let class = ConvexityClass::with_kappa(kappa.clone()).unwrap();
            let lams = [
                rat(1, 10), rat(1, 5), rat(1, 4), rat(1, 3), rat(2, 5), rat(9, 20), rat(1, 2),
                rat(11, 20), rat(3, 5), rat(2, 3), rat(3, 4), rat(4, 5), rat(9, 10), rat(19, 20),
            ];
            for lam in lams {
                let ka = reduced_kernel(4, &lam, &class).unwrap();
                let kp = reduced_kernel(4, &lam, &ConvexityClass::plain()).unwrap();
                for side in [true, false] {
                    let a = two_sided_poly(&ka, side).unwrap();
                    let p = two_sided_poly(&kp, side).unwrap();
                    let b = b_correction_poly(&lam, side);
                    for i in 0..5 {
                        let bi = b.get(i).cloned().unwrap_or_else(Rational::zero);
                        assert_eq!(a[i], &p[i] - (int(1) - &kappa) * bi, "λ={lam} side={side} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn correction_sign_and_endpoints() {
        for i in 0..=20 {
            let lam = i as f64 / 20.0;
            for j in -20..=20 {
                let t = j as f64 / 20.0;
                assert!(b_correction(lam, t) >= -1e-15);
            }
        }
        assert_eq!(b_correction(0.0, 0.4), 0.0);
        assert_eq!(b_correction(1.0, -0.4), 0.0);
        let exact = b_correction_exact(&rat(1, 3), &rat(-1, 4));
        assert!((to_f64(&exact) - b_correction(1.0 / 3.0, -0.25)).abs() < 1e-16);
    }

    #[test]
    fn integral_and_convolution_flag() {
        let k = reduced_kernel(4, &rat(1, 2), &ConvexityClass::plain()).unwrap();
        assert!(k.is_convolution_type());
        assert_eq!(k.integral().as_exact(), Some(&rat(1, 16)));
        let k = reduced_kernel(2, &rat(1, 3), &ConvexityClass::plain()).unwrap();
        assert!(!k.is_convolution_type());
        assert!((k.max_f64() - (0..=1000).map(|i| k.eval_f64(i as f64 / 1000.0)).fold(0.0, f64::max)).abs() < 1e-6);
    }
}
