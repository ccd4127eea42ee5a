//! Exact noncommutative polynomials and the ascent/descent weighted
//! permutation sums μ.

mod json;
mod lambda_poly;
mod mu;
mod ncpoly;

pub use lambda_poly::LambdaPoly;
pub use mu::{
    ascent_descent, eval_lambda, integrate_lambda, l1_lambda, l1_norm, mu_ab, mu_ab_l1, mu_abc,
    mu_lambda, next_permutation, permutations, reflect_lambda, weight, DEFAULT_MAX_DEGREE,
};
pub use ncpoly::{gen, leading_sign, Coeff, LamPoly, NCPoly, RatPoly, Word};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat, Rational};
    use num_traits::{One, Zero};

    fn w(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    /// Independent oracle: recompute each coefficient from its word by
    /// listing the transitions with f64-free integer comparisons.
    fn oracle(n: usize, start: Option<(i64, i64)>, end: Option<(i64, i64)>, lam: &Rational) -> RatPoly {
        let mut out = RatPoly::zero();
        for perm in permutations(n) {
            let mut seq: Vec<Rational> = Vec::new();
            if let Some((a, b)) = start {
                seq.push(rat(a, b));
            }
            seq.extend(perm.iter().map(|&l| int(l as i64)));
            if let Some((a, b)) = end {
                seq.push(rat(a, b));
            }
            let (asc, des) = ascent_descent(&seq).unwrap();
            let mut c = Rational::one();
            for _ in 0..asc {
                c *= lam;
            }
            for _ in 0..des {
                c *= lam - int(1);
            }
            out.add_term(Word(perm), c);
        }
        out
    }

    #[test]
    fn ascent_descent_examples() {
        let s = |v: &[(i64, i64)]| v.iter().map(|&(a, b)| rat(a, b)).collect::<Vec<_>>();
        assert_eq!(ascent_descent(&s(&[(1, 2), (1, 1), (2, 1), (3, 1), (4, 1)])).unwrap(), (4, 0));
        assert_eq!(ascent_descent(&s(&[(1, 2), (4, 1), (3, 1), (2, 1), (1, 1)])).unwrap(), (1, 3));
        assert_eq!(ascent_descent(&s(&[(3, 2), (1, 1), (2, 1)])).unwrap(), (1, 1));
        assert!(ascent_descent(&s(&[(1, 1), (2, 1), (1, 1)])).is_err());
    }

    #[test]
    fn mu4_at_half_sign_table() {
        let p = eval_lambda(&mu_lambda(4).unwrap(), &rat(1, 2));
        assert_eq!(p.len(), 24);
        let plus = [
            "1234", "2143", "3142", "1432", "4132", "3214", "3241", "2431", "4213", "4231",
            "3421", "4312",
        ];
        let minus = [
            "1243", "2134", "1324", "1342", "3124", "1423", "4123", "2314", "2341", "2413",
            "3412", "4321",
        ];
        for s in plus {
            assert_eq!(p.coeff(&w(s)), Some(&rat(1, 8)), "{s}");
        }
        for s in minus {
            assert_eq!(p.coeff(&w(s)), Some(&rat(-1, 8)), "{s}");
        }
        assert_eq!(l1_norm(&p), int(3));
    }

    #[test]
    fn mu_lambda_matches_oracle() {
        for k in 1..=5 {
            for lam in [rat(1, 2), rat(1, 3), rat(-2, 7)] {
                assert_eq!(eval_lambda(&mu_lambda(k).unwrap(), &lam), oracle(k, None, None, &lam));
            }
        }
        let m3 = eval_lambda(&mu_lambda(3).unwrap(), &rat(1, 2));
        assert!(m3.terms().all(|(_, c)| *c == rat(1, 4) || *c == rat(-1, 4)));
    }

    #[test]
    fn mu_lambda_basic_shape() {
        let m1 = mu_lambda(1).unwrap();
        assert_eq!(m1.len(), 1);
        assert_eq!(m1.coeff(&[1]), Some(&LambdaPoly::one()));
        let m5 = mu_lambda(5).unwrap();
        assert_eq!(m5.len(), 120);
        assert_eq!(m5.coeff(&w("12345")), Some(&LambdaPoly::lambda().pow(4)));
        let at1 = eval_lambda(&m5, &int(1));
        assert_eq!(at1.len(), 1);
        assert!(mu_lambda(0).is_err());
        assert!(mu_lambda(9).is_err());
    }

    #[test]
    fn mu_ab_examples() {
        let p = mu_ab(0, 4).unwrap();
        let l = LambdaPoly::lambda();
        let ml = LambdaPoly::one_minus_lambda();
        assert_eq!(p.coeff(&w("1234")), Some(&l.pow(4)));
        assert_eq!(p.coeff(&w("4321")), Some(&-(&l * &ml.pow(3))));
        assert_eq!(p.coeff(&w("3142")), Some(&(l.pow(2) * ml.pow(2))));
        assert_eq!(p.coeff(&w("1324")), Some(&-(l.pow(3) * ml.clone())));
        assert_eq!(mu_ab(0, 1).unwrap().coeff(&[1]), Some(&l));
        for lam in [rat(1, 3), rat(3, 5)] {
            assert_eq!(
                eval_lambda(&mu_ab(2, 2).unwrap(), &lam),
                oracle(4, Some((5, 2)), None, &lam)
            );
        }
    }

    #[test]
    fn mu_abc_examples() {
        assert_eq!(
            mu_abc(1, 2, 0).unwrap(),
            mu_ab(1, 2).unwrap().mul_coeff(&LambdaPoly::lambda())
        );
        let lam = rat(2, 7);
        assert_eq!(
            eval_lambda(&mu_abc(0, 2, 1).unwrap(), &lam),
            oracle(3, Some((1, 2)), Some((5, 2)), &lam)
        );
    }

    #[test]
    fn rotation_identity() {
        for n in 1..=6usize {
            for a in 0..n {
                for b in 0..n - a {
                    let c = n - 1 - a - b;
                    let lhs = mu_abc(a + 1, b, c).unwrap();
                    // Argument i of the right side is X_{i+1}, and the last is X₁.
                    let rhs = mu_abc(a, b, c + 1)
                        .unwrap()
                        .relabel(|l| if l as usize == n { 1 } else { l + 1 });
                    assert_eq!(lhs, rhs, "a={a} b={b} c={c}");
                }
            }
        }
    }

    #[test]
    fn reversal_symmetry() {
        for n in 1..=5usize {
            for a in 0..=n {
                let b = n - a;
                let lhs = mu_ab(a, b).unwrap();
                let sign = if n % 2 == 0 { int(1) } else { int(-1) };
                let rhs = reflect_lambda(&mu_ab(b, a).unwrap())
                    .relabel(|l| (n + 1) as u8 - l)
                    .scale(&sign);
                assert_eq!(lhs, rhs, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn integrate_mu2() {
        let p = integrate_lambda(&mu_lambda(2).unwrap());
        assert_eq!(p.coeff(&w("12")), Some(&rat(1, 2)));
        assert_eq!(p.coeff(&w("21")), Some(&rat(-1, 2)));
    }

    #[test]
    fn l1_lambda_matches_pointwise() {
        for (a, b) in [(0, 4), (1, 3), (2, 2), (3, 2)] {
            let poly = mu_ab_l1(a, b);
            for lam in [rat(1, 10), rat(1, 3), rat(7, 9)] {
                assert_eq!(poly.eval(&lam), l1_norm(&eval_lambda(&mu_ab(a, b).unwrap(), &lam)));
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let p = mu_ab(1, 2).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: LamPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let q = eval_lambda(&p, &rat(1, 3));
        let s = serde_json::to_string(&q).unwrap();
        assert!(s.starts_with("{\"degree\":3,\"terms\":[{\"word\":[1,2,3]"));
        let back: RatPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        let bad = r#"{"degree":2,"terms":[{"word":[1,2,3],"coeff":["1"]}]}"#;
        assert!(serde_json::from_str::<RatPoly>(bad).is_err());
    }

    #[test]
    fn zero_poly() {
        assert!(l1_norm(&RatPoly::zero()).is_zero());
        let p: RatPoly = gen(1) - gen(1);
        assert!(p.is_zero());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn asc_plus_des(k in 1usize..=6) {
                let p = mu_lambda(k).unwrap();
                for (_, c) in p.terms() {
                    prop_assert!(c.degree() < k);
                }
                for perm in permutations(k) {
                    let (a, d) = ascent_descent(&perm).unwrap();
                    prop_assert_eq!(a + d, k - 1);
                }
            }

            #[test]
            fn integrate_then_eval_matches_midpoint(cs in proptest::collection::vec(-50i64..50, 1..7)) {
                let poly = LambdaPoly::new(cs.iter().map(|&c| rat(c, 7)).collect());
                let exact = crate::rational::to_f64(&poly.integrate_unit());
                let n = 20000;
                let numeric: f64 = (0..n).map(|i| poly.eval_f64((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
                // midpoint error is h²/24·max|p''| ≤ 1e-12 here
                prop_assert!((exact - numeric).abs() < 1e-7 * (1.0 + exact.abs()));
            }
        }
    }
}
