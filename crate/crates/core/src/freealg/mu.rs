use num_traits::Zero;

use super::{LamPoly, LambdaPoly, NCPoly, RatPoly, Word};
use crate::error::{Error, Result};
use crate::rational::Rational;

pub const DEFAULT_MAX_DEGREE: usize = 8;

/// Ascents and descents of a sequence of pairwise distinct values.
pub fn ascent_descent<T: PartialOrd + std::fmt::Debug>(seq: &[T]) -> Result<(usize, usize)> {
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] == seq[j] {
                return Err(Error::InvalidInput(format!(
                    "repeated entry {:?} at positions {i} and {j}",
                    seq[i]
                )));
            }
        }
    }
    let asc = seq.windows(2).filter(|w| w[0] < w[1]).count();
    Ok((asc, seq.len().saturating_sub(1) - asc))
}

/// Steps `perm` to the next permutation in lexicographic order.
pub fn next_permutation(perm: &mut [u8]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All permutations of 1..=n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut p: Vec<u8> = (1..=n as u8).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

/// λ^asc (λ−1)^des, expanded.
pub fn weight(asc: usize, des: usize) -> LambdaPoly {
    LambdaPoly::lambda().pow(asc) * (-LambdaPoly::one_minus_lambda()).pow(des)
}

fn check_degree(n: usize, cap: usize) -> Result<()> {
    if n == 0 || n > cap {
        return Err(Error::OutOfRange(format!("degree {n} not in 1..={cap}")));
    }
    Ok(())
}

/// Σ over permutations σ of 1..=n of λ^asc(λ−1)^des Y_σ, where the pattern is
/// taken on `start ++ 2σ ++ end` (markers are doubled positions, so odd
/// markers sit halfway between letters).
fn marked_sum(n: usize, start: Option<u32>, end: Option<u32>) -> LamPoly {
    let mut table = vec![vec![None; n + 2]; n + 2];
    let mut out = NCPoly::zero();
    let mut seq: Vec<u32> = Vec::with_capacity(n + 2);
    for perm in permutations(n) {
        seq.clear();
        seq.extend(start);
        seq.extend(perm.iter().map(|&l| 2 * l as u32));
        seq.extend(end);
        let asc = seq.windows(2).filter(|w| w[0] < w[1]).count();
        let des = seq.len() - 1 - asc;
        let w = table[asc][des]
            .get_or_insert_with(|| weight(asc, des))
            .clone();
        out.add_term(Word(perm), w);
    }
    out
}

/// μ_k^{(λ)}(Y₁,…,Y_k).
pub fn mu_lambda(k: usize) -> Result<LamPoly> {
    check_degree(k, DEFAULT_MAX_DEGREE)?;
    Ok(marked_sum(k, None, None))
}

/// μ_{a,b}^{(λ)}(Y₁,…,Y_{a+b}): the pattern starts at the marker a+½.
pub fn mu_ab(a: usize, b: usize) -> Result<LamPoly> {
    check_degree(a + b, DEFAULT_MAX_DEGREE)?;
    Ok(marked_sum(a + b, Some(2 * a as u32 + 1), None))
}

/// μ_{a,b,c}^{(λ)}: markers a+½ in front and a+b+½ at the end.
pub fn mu_abc(a: usize, b: usize, c: usize) -> Result<LamPoly> {
    check_degree(a + b + c, DEFAULT_MAX_DEGREE)?;
    Ok(marked_sum(
        a + b + c,
        Some(2 * a as u32 + 1),
        Some(2 * (a + b) as u32 + 1),
    ))
}

/// Replaces every coefficient by its integral over λ ∈ [0,1].
pub fn integrate_lambda(p: &LamPoly) -> RatPoly {
    p.map_coeffs(LambdaPoly::integrate_unit)
}

/// Substitutes a rational λ.
pub fn eval_lambda(p: &LamPoly, lambda: &Rational) -> RatPoly {
    p.map_coeffs(|c| c.eval(lambda))
}

/// Applies λ ↦ 1 − λ to every coefficient.
pub fn reflect_lambda(p: &LamPoly) -> LamPoly {
    p.map_coeffs(LambdaPoly::reflect)
}

pub fn l1_norm(p: &RatPoly) -> Rational {
    p.l1()
}

/// ℓ¹ norm as a polynomial in λ, valid for λ ∈ [0,1] where every
/// weight λ^asc(λ−1)^des has sign (−1)^des.
pub fn l1_lambda(n: usize, start: Option<u32>, end: Option<u32>) -> LambdaPoly {
    let mut total = LambdaPoly::zero();
    for perm in permutations(n) {
        let mut seq: Vec<u32> = Vec::new();
        seq.extend(start);
        seq.extend(perm.iter().map(|&l| 2 * l as u32));
        seq.extend(end);
        let asc = seq.windows(2).filter(|w| w[0] < w[1]).count();
        let des = seq.len() - 1 - asc;
        total = total + LambdaPoly::lambda().pow(asc) * LambdaPoly::one_minus_lambda().pow(des);
    }
    total
}

/// |μ_{a,b}^{(λ)}|_{ℓ¹} as a polynomial in λ on [0,1].
pub fn mu_ab_l1(a: usize, b: usize) -> LambdaPoly {
    l1_lambda(a + b, Some(2 * a as u32 + 1), None)
}
