//! Randomized finite-dimensional checks of Clarkson-type mean convexity for
//! operators on ℓ_p^n.
//!
//! Operator norms on the right-hand side are replaced by the Riesz–Thorin
//! bound ‖A‖_p ≤ ‖A‖₁^{1/p}‖A‖_∞^{1−1/p}, and the left-hand side is a norm
//! |Mv|_p at sampled unit vectors, so a reported ratio above 1 would be a
//! genuine counterexample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::Exec;

/// 1 − (1 − (ε/2)^q)^{1/q}.
pub fn clarkson_delta(eps: f64, q: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::OutOfRange(format!("epsilon {eps} outside (0,2]")));
    }
    Ok(1.0 - (1.0 - (eps / 2.0).powf(q)).powf(1.0 / q))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LpSpace {
    pub n: usize,
    pub p: f64,
}

impl LpSpace {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n == 0 || !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("need n >= 1 and 1 < p < inf, got n={n}, p={p}")));
        }
        Ok(LpSpace { n, p })
    }

    /// max(p, p/(p−1)).
    pub fn q(&self) -> f64 {
        self.p.max(self.p / (self.p - 1.0))
    }

    /// min(p, p/(p−1)).
    pub fn q_prime(&self) -> f64 {
        self.p.min(self.p / (self.p - 1.0))
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        v.iter().map(|x| x.abs().powf(self.p)).sum::<f64>().powf(1.0 / self.p)
    }

    /// Riesz–Thorin upper bound on the operator norm of a row-major matrix.
    pub fn op_norm_upper(&self, a: &Matrix) -> f64 {
        let n = self.n;
        let col = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let row = (0..n)
            .map(|i| a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        col.powf(1.0 / self.p) * row.powf(1.0 - 1.0 / self.p)
    }

    fn power_mean(&self, a: f64, b: f64) -> f64 {
        let r = self.q_prime();
        ((a.powf(r) + b.powf(r)) / 2.0).powf(1.0 / r)
    }
}

pub type Matrix = Vec<f64>;

fn matmul(n: usize, a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn lincomb(terms: &[(f64, &Matrix)]) -> Matrix {
    let mut out = vec![0.0; terms[0].1.len()];
    for (s, m) in terms {
        for (o, x) in out.iter_mut().zip(m.iter()) {
            *o += s * x;
        }
    }
    out
}

fn apply(n: usize, a: &Matrix, v: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum()).collect()
}

/// Generator for trial `trial`: stream `trial` of the ChaCha8 key `seed`,
/// so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn random_matrix(rng: &mut impl Rng, n: usize) -> Matrix {
    (0..n * n).map(|_| rng.sample(StandardNormal)).collect()
}

/// max over a few random unit vectors of |Mv|_p, a lower bound on ‖M‖_p.
fn sampled_norm(space: &LpSpace, m: &Matrix, rng: &mut impl Rng, samples: usize) -> f64 {
    (0..samples)
        .map(|_| {
            let v: Vec<f64> = (0..space.n).map(|_| rng.sample(StandardNormal)).collect();
            let nv = space.norm(&v);
            space.norm(&apply(space.n, m, &v)) / nv
        })
        .fold(0.0, f64::max)
}

pub const VECTORS_PER_TRIAL: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub trial: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub check: &'static str,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub trials: u64,
    pub seed: u64,
    pub max_ratio: f64,
    pub worst_trial: u64,
    pub violations: Vec<Violation>,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn run(
    check: &'static str,
    space: &LpSpace,
    trials: u64,
    seed: u64,
    exec: Exec,
    ratio: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<ConvexityReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let ids: Vec<u64> = (0..trials).collect();
    let ratios = exec.map(&ids, |&t| ratio(&mut trial_rng(seed, t)));
    let (worst, max_ratio) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if *r > acc.1 { (i, *r) } else { acc });
    let violations = ratios
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 1.0)
        .map(|(i, r)| Violation { trial: i as u64, ratio: *r })
        .collect();
    Ok(ConvexityReport {
        check,
        n: space.n,
        p: space.p,
        q: space.q(),
        trials,
        seed,
        max_ratio,
        worst_trial: worst as u64,
        violations,
    })
}

/// |((XZ+YZ+XW−YW)/4)v|_p against 2^{−1/q}·M_{q′}(‖X‖,‖Y‖)·M_{q′}(‖Z‖,‖W‖).
pub fn umd_ratio(space: &LpSpace, x: &Matrix, y: &Matrix, z: &Matrix, w: &Matrix, rng: &mut impl Rng) -> f64 {
    let n = space.n;
    let (xz, yz, xw, yw) = (matmul(n, x, z), matmul(n, y, z), matmul(n, x, w), matmul(n, y, w));
    let m = lincomb(&[(0.25, &xz), (0.25, &yz), (0.25, &xw), (-0.25, &yw)]);
    let lhs = sampled_norm(space, &m, rng, VECTORS_PER_TRIAL);
    let rhs = 2f64.powf(-1.0 / space.q())
        * space.power_mean(space.op_norm_upper(x), space.op_norm_upper(y))
        * space.power_mean(space.op_norm_upper(z), space.op_norm_upper(w));
    lhs / rhs
}

/// |((S₁S₂S₃S₄+S₂S₁S₃S₄+S₁S₂S₄S₃−S₂S₁S₄S₃)/4)v|_p against 2^{−1/q}·Π‖S_i‖.
pub fn umq_ratio(space: &LpSpace, s: [&Matrix; 4], rng: &mut impl Rng) -> f64 {
    let n = space.n;
    let s12 = matmul(n, s[0], s[1]);
    let s21 = matmul(n, s[1], s[0]);
    let s34 = matmul(n, s[2], s[3]);
    let s43 = matmul(n, s[3], s[2]);
    let m = lincomb(&[
        (0.25, &matmul(n, &s12, &s34)),
        (0.25, &matmul(n, &s21, &s34)),
        (0.25, &matmul(n, &s12, &s43)),
        (-0.25, &matmul(n, &s21, &s43)),
    ]);
    let lhs = sampled_norm(space, &m, rng, VECTORS_PER_TRIAL);
    let rhs = 2f64.powf(-1.0 / space.q()) * s.iter().map(|a| space.op_norm_upper(a)).product::<f64>();
    lhs / rhs
}

pub fn check_umd_sampled(space: &LpSpace, trials: u64, seed: u64) -> Result<ConvexityReport> {
    check_umd_sampled_with(space, trials, seed, Exec::default())
}

pub fn check_umd_sampled_with(space: &LpSpace, trials: u64, seed: u64, exec: Exec) -> Result<ConvexityReport> {
    run("umd", space, trials, seed, exec, |rng| {
        let n = space.n;
        let (x, y, z, w) = (
            random_matrix(rng, n),
            random_matrix(rng, n),
            random_matrix(rng, n),
            random_matrix(rng, n),
        );
        umd_ratio(space, &x, &y, &z, &w, rng)
    })
}

pub fn check_umq_sampled(space: &LpSpace, trials: u64, seed: u64) -> Result<ConvexityReport> {
    check_umq_sampled_with(space, trials, seed, Exec::default())
}

pub fn check_umq_sampled_with(space: &LpSpace, trials: u64, seed: u64, exec: Exec) -> Result<ConvexityReport> {
    run("umq", space, trials, seed, exec, |rng| {
        let n = space.n;
        let s: Vec<Matrix> = (0..4).map(|_| random_matrix(rng, n)).collect();
        umq_ratio(space, [&s[0], &s[1], &s[2], &s[3]], rng)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn delta_values() {
        assert_eq!(clarkson_delta(2.0, 3.0).unwrap(), 1.0);
        assert!((clarkson_delta(1.0, 2.0).unwrap() - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!(clarkson_delta(1e-6, 2.0).unwrap() < 1e-12);
        assert!(clarkson_delta(0.0, 2.0).is_err());
        assert!(clarkson_delta(2.5, 2.0).is_err());
    }

    #[test]
    fn exponents() {
        let s = LpSpace::new(4, 1.5).unwrap();
        assert_eq!(s.q(), 3.0);
        assert_eq!(s.q_prime(), 1.5);
        assert_eq!(LpSpace::new(4, 3.0).unwrap().q(), 3.0);
        assert!(LpSpace::new(4, 1.0).is_err());
    }

    #[test]
    fn riesz_thorin_dominates_samples() {
        let s = LpSpace::new(6, 3.0).unwrap();
        let mut rng = trial_rng(5, 0);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 6);
            let ub = s.op_norm_upper(&a);
            assert!(sampled_norm(&s, &a, &mut rng, 20) <= ub * (1.0 + 1e-12));
        }
    }

    #[test]
    fn collapsed_umd_pattern() {
        // X = Y, Z = W leaves XZ/2.
        let s = LpSpace::new(5, 2.0).unwrap();
        let mut rng = trial_rng(1, 0);
        let x = random_matrix(&mut rng, 5);
        let z = random_matrix(&mut rng, 5);
        let r = umd_ratio(&s, &x, &x, &z, &z, &mut rng);
        let bound = 0.5 / 2f64.powf(-0.5);
        assert!(r <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn commuting_diagonals() {
        let s = LpSpace::new(6, 3.0).unwrap();
        let mut rng = trial_rng(2, 0);
        let diag = |rng: &mut ChaCha8Rng| {
            let mut m = vec![0.0; 36];
            for i in 0..6 {
                m[i * 7] = rng.sample::<f64, _>(StandardNormal);
            }
            m
        };
        let d: Vec<Matrix> = (0..4).map(|_| diag(&mut rng)).collect();
        // Commuting case: the pattern is S₁S₂S₃S₄/2, so ratio ≤ (1/2)/2^{−1/q}.
        let r = umq_ratio(&s, [&d[0], &d[1], &d[2], &d[3]], &mut rng);
        assert!(r <= 0.5 / 2f64.powf(-1.0 / 3.0) * (1.0 + 1e-12));
        let same = umq_ratio(&s, [&d[0], &d[0], &d[2], &d[3]], &mut rng);
        assert!(same <= 0.5 / 2f64.powf(-1.0 / 3.0) * (1.0 + 1e-12));
    }

    #[test]
    fn sampled_checks_hold() {
        for (p, n) in [(2.0, 8), (3.0, 6), (1.5, 6)] {
            let s = LpSpace::new(n, p).unwrap();
            let a = check_umd_sampled(&s, 500, 11).unwrap();
            let b = check_umq_sampled(&s, 500, 11).unwrap();
            assert!(a.passed() && b.passed(), "{a:?} {b:?}");
            assert!(a.max_ratio > 0.0 && a.max_ratio < 1.0);
        }
    }

    #[test]
    fn deterministic_across_execution() {
        let s = LpSpace::new(4, 3.0).unwrap();
        let a = check_umd_sampled_with(&s, 64, 9, Exec::Sequential).unwrap();
        let b = check_umd_sampled_with(&s, 64, 9, Exec::Parallel).unwrap();
        assert_eq!(a.max_ratio.to_bits(), b.max_ratio.to_bits());
        assert_eq!(a.worst_trial, b.worst_trial);
    }

    proptest! {
        #[test]
        fn delta_increasing_in_eps(a in 0.01f64..2.0, b in 0.01f64..2.0, q in 2.0f64..6.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(clarkson_delta(lo, q).unwrap() <= clarkson_delta(hi, q).unwrap());
        }
    }
}
