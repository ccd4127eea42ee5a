//! Golden-constant suite: one function per acceptance criterion, each
//! returning a pass/fail line with the observed numbers.

use std::time::Instant;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bch::{self, C2};
use crate::convexity::{check_umd_sampled, check_umq_sampled, LpSpace};
use crate::error::Result;
use crate::freealg::LambdaPoly;
use crate::kernels::{b_correction_poly, g_tilde_series, reduced_kernel, two_sided_poly};
use crate::magnus::{self, maglower_floor, Variant};
use crate::rational::{int, rat, Rational};
use crate::specrad::{moment_root, power_iteration_hopf, Diagonal, OperatorGrid};
use crate::truncate_decimals;
use crate::umqnorm::{theta_ab, theta_k, ConvexityClass};

/// Values computed once by this crate and frozen as regression anchors.
pub mod regression {
    /// ODE blow-up at λ = 1/2 with the q = 1 degree-4 gap 1/8 − 5/48.
    pub const ODE_GAP_Q1: f64 = 2.023246155504904;
    /// sicompar route, q = 1, λ = 0.4, p = 5.
    pub const SICOMPAR_Q1_04: f64 = 2.000538033948378;
    /// ricompar route, q = 1, λ = 0.4, p = 5.
    pub const RICOMPAR_Q1_04: f64 = 1.999709209723975;
    /// Improved BCH radius, 1000-point λ grid, order 24.
    pub const C2_IMPROVED_Q1: f64 = 2.9041923858225345;
    pub const C2_IMPROVED_Q2: f64 = 2.9018369772471484;
}

/// Closed forms of Θ_{a,4−a}^{(λ),𝒜} for a ∈ {0,1,2} with cross-term cost κ.
pub fn kernel4_closed_form(a: usize, lam: &Rational, kappa: &Rational) -> Rational {
    let l = lam.clone();
    let one = int(1);
    let m = if l <= rat(1, 2) { l.clone() } else { &one - &l };
    let l2 = &l * &l;
    let l3 = &l2 * &l;
    let l4 = &l3 * &l;
    let gain = &one - kappa;
    let v = match a {
        0 => -int(8) * &l3 + int(8) * &l2 + &l - gain * int(8) * &l2 * (&one - &l) * &m,
        1 => int(4) * &l4 - int(14) * &l3 + int(8) * &l2 + int(2) * &l - gain * int(8) * &l2 * (&one - &l) * &m,
        2 => int(8) * &l4 - int(16) * &l3 + int(4) * &l2 + int(4) * &l - gain * int(4) * &l * (&one - &l) * &m,
        _ => panic!("closed forms exist for a <= 2 only"),
    };
    v / int(24)
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: usize, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

pub fn theta4_identity() -> CriterionResult {
    timed(1, "theta4 identity", || {
        let q1 = theta_k(4, &rat(1, 2), &ConvexityClass::q_int(1)?)?;
        let c2 = ConvexityClass::q_int(2)?;
        let q2 = theta_k(4, &rat(1, 2), &c2)?;
        let target = (2.0 / 3.0 + 0.5f64.sqrt() / 3.0) / 8.0;
        let f = |k: &Rational| (rat(2, 3) + k / int(3)) / int(8);
        let exact = q1.as_exact() == Some(&rat(5, 48));
        let width = q2.width().to_f64().unwrap_or(f64::INFINITY);
        let encloses = q2.lo <= f(c2.kappa_lo())
            && f(c2.kappa_hi()) <= q2.hi
            && q2.lo_f64() <= target
            && target <= q2.hi_f64();
        Ok((
            exact && encloses && width < 1e-12,
            format!("q=1: {q1}; q=2: [{:.15}, {:.15}] width {width:.2e}", q2.lo_f64(), q2.hi_f64()),
        ))
    })
}

pub const KERNEL4_LAMBDAS: [(i64, i64); 7] = [(1, 10), (1, 5), (1, 3), (2, 5), (1, 2), (3, 5), (9, 10)];

pub fn kernel4_formulas() -> CriterionResult {
    timed(2, "degree-4 kernel closed forms", || {
        let class = ConvexityClass::q_int(1)?;
        let kappa = rat(1, 2);
        let mut bad = Vec::new();
        for (n, d) in KERNEL4_LAMBDAS {
            let l = rat(n, d);
            for a in 0..=2 {
                let v = theta_ab(a, 4 - a, &l, &class)?;
                if v.as_exact() != Some(&kernel4_closed_form(a, &l, &kappa)) {
                    bad.push(format!("a={a} λ={n}/{d}"));
                }
            }
        }
        Ok((bad.is_empty(), format!("21 exact comparisons, mismatches: {bad:?}")))
    })
}

pub fn cayley_constants() -> CriterionResult {
    timed(3, "Cayley constants", || {
        let q1 = ConvexityClass::q_int(1)?;
        let q2 = ConvexityClass::q_int(2)?;
        let l2 = magnus::c_bound_pth_root(0.5, 5, &q2)?.value();
        let l1 = magnus::c_bound_pth_root(0.5, 5, &q1)?.value();
        let u2 = magnus::upper_trivial(&q2, Variant::Cayley, None)?.value();
        let u1 = magnus::upper_trivial(&q1, Variant::Cayley, None)?.value();
        let got = [l2, l1, u2, u1].map(|x| truncate_decimals(x, 3));
        let want = ["2.041", "2.074", "2.244", "2.519"];
        let closed = (l2 - 2.0 / (2.0 / 3.0 + 0.5f64.sqrt() / 3.0).powf(0.2)).abs() < 1e-12
            && (l1 - 2.0 / (2.0 / 3.0 + 0.5 / 3.0f64).powf(0.2)).abs() < 1e-12;
        Ok((got == want && closed, format!("lower q=2 {l2:.6}, q=1 {l1:.6}; upper q=2 {u2:.6}, q=1 {u1:.6}")))
    })
}

pub fn log_constants() -> CriterionResult {
    timed(4, "logarithm-radius constants", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (q, want) in [(2, 2.040800), (1, 2.071801)] {
            let c = ConvexityClass::q_int(q)?;
            let r = magnus::c_log_bound(5, &c, 101)?;
            let v = r.value();
            let floor = maglower_floor(&c);
            ok &= (v - want).abs() <= 1e-4 && floor < v;
            parts.push(format!("q={q}: {v:.6} (floor {floor:.6})"));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn plain_closed_form() -> CriterionResult {
    timed(5, "plain kernel radius and eigenvector", || {
        let plain = ConvexityClass::plain();
        let (mut rad_err, mut vec_err): (f64, f64) = (0.0, 0.0);
        for i in 1..=9 {
            let l = i as f64 / 10.0;
            let k = reduced_kernel(0, &rat(i, 10), &plain)?;
            let g = OperatorGrid::from_reduced(&k, 1024, Diagonal::Average)?;
            let r = power_iteration_hopf(&g, 1e-13, 100_000);
            rad_err = rad_err.max((r.radius - 1.0 / magnus::c_plain(l)).abs());
            let base = (1.0 - l) / l;
            let exact: Vec<f64> = g.nodes().iter().map(|t| base.powf(*t)).collect();
            let em = exact.iter().cloned().fold(0.0, f64::max);
            let vm = r.eigvec.iter().cloned().fold(0.0, f64::max);
            for (a, b) in r.eigvec.iter().zip(&exact) {
                vec_err = vec_err.max((a / vm - b / em).abs());
            }
        }
        Ok((
            rad_err <= 1e-6 && vec_err <= 1e-4,
            format!("max radius error {rad_err:.2e}, max eigenvector error {vec_err:.2e}"),
        ))
    })
}

pub fn euler_ode() -> CriterionResult {
    timed(6, "Euler recursion and ODE blow-up", || {
        let th = magnus::euler_coeffs(&rat(1, 2), 20, &[])?;
        let exact = th
            .iter()
            .enumerate()
            .all(|(k, t)| *t == Rational::new(1.into(), num_bigint::BigInt::from(2).pow(k as u32)));
        let plain = magnus::ode_blowup(0.5, &[])?;
        let gap = magnus::degree4_gap(&ConvexityClass::q_int(1)?)?;
        let corrected = magnus::ode_blowup(0.5, &[(4, gap.to_f64().unwrap_or(0.0))])?;
        Ok((
            exact
                && (plain - 2.0).abs() <= 1e-6
                && corrected > 2.0
                && (corrected - regression::ODE_GAP_Q1).abs() <= 1e-6,
            format!("2^(1-k) exact for k<=20: {exact}; blow-up {plain:.9}, with gap {gap}: {corrected:.9}"),
        ))
    })
}

pub fn plain_kernel_oracle() -> CriterionResult {
    timed(7, "plain kernel against generating function", || {
        let plain = ConvexityClass::plain();
        let mut count = 0;
        let mut bad = Vec::new();
        for l in [rat(1, 5), rat(1, 3), rat(1, 2)] {
            for pm1 in 0..=6usize {
                let k = reduced_kernel(pm1, &l, &plain)?;
                for t in [int(0), rat(1, 4), rat(1, 2), int(1)] {
                    let series = g_tilde_series(&l, &t, pm1)?;
                    count += 1;
                    if k.eval(&t).as_exact() != Some(&series[pm1]) {
                        bad.push(format!("p-1={pm1} λ={l} t={t}"));
                    }
                }
            }
        }
        Ok((bad.is_empty(), format!("{count} exact comparisons, mismatches: {bad:?}")))
    })
}

fn poly_sub_scaled(a: &[Rational], b: &[Rational], s: &Rational) -> Vec<Rational> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Rational::zero);
            let y = b.get(i).cloned().unwrap_or_else(Rational::zero);
            x - s * y
        })
        .collect()
}

fn trimmed(v: Vec<Rational>) -> LambdaPoly {
    LambdaPoly::new(v)
}

pub fn maglower_identity() -> CriterionResult {
    timed(8, "degree-4 correction identity and ratio floors", || {
        let mut bad = Vec::new();
        let lambdas = [rat(1, 10), rat(1, 5), rat(1, 3), rat(2, 5), rat(3, 5), rat(2, 3), rat(9, 10)];
        for kappa in [rat(1, 2), rat(3, 4)] {
            let class = ConvexityClass::with_kappa(kappa.clone())?;
            let gain = int(1) - &kappa;
            for l in &lambdas {
                let ka = reduced_kernel(4, l, &class)?;
                let kp = reduced_kernel(4, l, &ConvexityClass::plain())?;
                for positive in [true, false] {
                    let lhs = two_sided_poly(&ka, positive).map(trimmed);
                    let rhs = two_sided_poly(&kp, positive)
                        .map(|p| trimmed(poly_sub_scaled(&p, &b_correction_poly(l, positive), &gain)));
                    if lhs.is_none() || lhs != rhs {
                        bad.push(format!("κ={kappa} λ={l} side={}", if positive { '+' } else { '-' }));
                    }
                }
            }
        }
        let m = magnus::maglower_ratios(&ConvexityClass::q_int(1)?, 1e-3)?;
        let floors = m.inner_min > 0.25 && m.outer_min > 0.2;
        Ok((
            bad.is_empty() && floors,
            format!(
                "identity mismatches: {bad:?}; min B/K on [2/5,3/5] {:.6}, elsewhere in [1/3,2/3] {:.6}",
                m.inner_min, m.outer_min
            ),
        ))
    })
}

pub fn bch_threshold() -> CriterionResult {
    timed(9, "BCH l1 threshold", || {
        let x = 1.44923965;
        let c = bch::critical_lambda(x, x, bch::DEFAULT_ORDER)?;
        let plain = bch::c2_improved(&ConvexityClass::plain(), 1000, bch::DEFAULT_ORDER)?;
        let lam = c.lambda.min(1.0 - c.lambda);
        Ok((
            (c.value - 1.0).abs() <= 1e-4 && (0.35865..=0.35866).contains(&lam) && (plain.value - C2).abs() <= 1e-3,
            format!("max {:.8} at λ={lam:.7}; plain threshold {:.8}", c.value, plain.value),
        ))
    })
}

pub fn bch_component() -> CriterionResult {
    timed(10, "BCH degree-(3,5) component and improvement", || {
        let p = bch::upsilon_power_component(3, (3, 5))?;
        let quarter = LambdaPoly::new(vec![rat(1, 4), int(-1), int(1)]);
        let sixth = LambdaPoly::new(vec![rat(1, 6), int(-1), int(1)]);
        let word = |s: &str| s.bytes().map(|b| b - b'0').collect::<Vec<u8>>();
        let coeffs_ok = bch::ALIGNED_WORDS[..3]
            .iter()
            .all(|(w, _)| p.coeff(&word(w)) == Some(&quarter))
            && p.coeff(&word(bch::ALIGNED_WORDS[3].0)) == Some(&sixth);
        let signs_ok = [0.35865, 0.358655, 0.35866].iter().all(|&l| {
            bch::ALIGNED_WORDS.iter().all(|(w, s)| {
                let v = p.coeff(&word(w)).map_or(0.0, |c| c.eval_f64(l));
                v != 0.0 && v.signum() as i8 == *s
            })
        });
        let q1 = bch::c2_improved(&ConvexityClass::q_int(1)?, 1000, bch::DEFAULT_ORDER)?;
        let q2 = bch::c2_improved(&ConvexityClass::q_int(2)?, 1000, bch::DEFAULT_ORDER)?;
        let improved = q1.margin > 0.0
            && q2.margin > 0.0
            && (q1.value - regression::C2_IMPROVED_Q1).abs() <= 1e-8
            && (q2.value - regression::C2_IMPROVED_Q2).abs() <= 1e-8;
        Ok((
            coeffs_ok && signs_ok && improved,
            format!(
                "quartic factors {coeffs_ok}, signs {signs_ok}; q=1 {:.8} (+{:.2e}), q=2 {:.8} (+{:.2e})",
                q1.value, q1.margin, q2.value, q2.margin
            ),
        ))
    })
}

/// Random nonnegative bivariate polynomial kernel of degree ≤ 3 per variable.
fn random_poly_kernel(rng: &mut ChaCha8Rng) -> impl Fn(f64, f64) -> f64 + Sync {
    let offset: f64 = if rng.gen_bool(0.8) { rng.gen_range(0.05..1.0) } else { 0.0 };
    let c: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..1.0)).collect();
    move |s: f64, t: f64| {
        let mut v = offset;
        for i in 0..4 {
            for j in 0..4 {
                v += c[i * 4 + j] * s.powi(i as i32) * t.powi(j as i32);
            }
        }
        v
    }
}

pub fn hopf_machinery() -> CriterionResult {
    timed(11, "Hopf brackets and moment roots", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut defect: f64 = 0.0;
        let mut nested = true;
        let mut rate_ok = true;
        for _ in 0..100 {
            let g = OperatorGrid::from_fn(64, random_poly_kernel(&mut rng))?;
            let r = power_iteration_hopf(&g, 1e-13, 10_000);
            defect = defect.max(r.nesting_defect / r.radius);
            nested &= r.history.windows(2).all(|w| w[1][0] >= w[0][0] && w[1][1] <= w[0][1]);
            if let Some(h) = r.hopf {
                rate_ok &= r
                    .history
                    .iter()
                    .enumerate()
                    .all(|(k, b)| b[1] - b[0] <= h.width_bound(k) + 1e-12 * b[1]);
            }
        }
        let mut moment_err: f64 = 0.0;
        for _ in 0..20 {
            let n = 32;
            let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let oracle = nalgebra::DMatrix::from_row_slice(n, n, &a)
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re.hypot(z.im))
                .fold(0.0, f64::max);
            let g = OperatorGrid::from_matrix(n, a)?;
            moment_err = moment_err.max((moment_root(&g, 100_000) - oracle).abs());
        }
        Ok((
            nested && defect <= 1e-12 && rate_ok && moment_err <= 1e-4,
            format!(
                "nested {nested}, max relative nesting defect {defect:.1e}, rate bound {rate_ok}, max moment-root error {moment_err:.2e}"
            ),
        ))
    })
}

pub const CONVEXITY_CONFIGS: [(f64, usize); 3] = [(2.0, 8), (3.0, 6), (1.5, 6)];

pub fn convexity_sampling() -> CriterionResult {
    timed(12, "convexity sampling", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (p, n) in CONVEXITY_CONFIGS {
            let s = LpSpace::new(n, p)?;
            let a = check_umd_sampled(&s, 10_000, 7)?;
            let b = check_umq_sampled(&s, 10_000, 7)?;
            ok &= a.passed() && b.passed();
            parts.push(format!(
                "p={p} n={n}: umd max {:.4} ({} violations), umq max {:.4} ({} violations)",
                a.max_ratio,
                a.violations.len(),
                b.max_ratio,
                b.violations.len()
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn criteria() -> Vec<(usize, fn() -> CriterionResult)> {
    vec![
        (1, theta4_identity as fn() -> CriterionResult),
        (2, kernel4_formulas),
        (3, cayley_constants),
        (4, log_constants),
        (5, plain_closed_form),
        (6, euler_ode),
        (7, plain_kernel_oracle),
        (8, maglower_identity),
        (9, bch_threshold),
        (10, bch_component),
        (11, hopf_machinery),
        (12, convexity_sampling),
    ]
}

pub fn run_all() -> Vec<CriterionResult> {
    criteria().into_iter().map(|(_, f)| f()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_reduce_to_l1_at_unit_cost() {
        for l in [rat(1, 7), rat(1, 2), rat(4, 5)] {
            for a in 0..=2 {
                let l1 = crate::freealg::mu_ab_l1(a, 4 - a).eval(&l) / int(24);
                assert_eq!(kernel4_closed_form(a, &l, &int(1)), l1, "a={a} λ={l}");
            }
        }
    }

    #[test]
    fn display_line() {
        let r = CriterionResult {
            id: 3,
            name: "x",
            passed: true,
            detail: "d".into(),
            seconds: 0.5,
        };
        assert_eq!(r.to_string(), "[PASS]  3 x (0.50s): d");
    }
}
