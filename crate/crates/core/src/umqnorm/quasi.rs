use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::One;

use crate::error::{Error, Result};
use crate::freealg::{leading_sign, Coeff, NCPoly, RatPoly, Word};
use crate::rational::{rat, Rational};

pub const EXHAUSTIVE_CAP: usize = 5;

/// Expression tree over generators, products and the cross operation Ξ.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum QuasiMonomial {
    Leaf(u8),
    Product(Vec<QuasiMonomial>),
    Xi(Box<[QuasiMonomial; 4]>),
}

impl QuasiMonomial {
    pub fn xi(a: QuasiMonomial, b: QuasiMonomial, c: QuasiMonomial, d: QuasiMonomial) -> Self {
        QuasiMonomial::Xi(Box::new([a, b, c, d]))
    }

    /// Product of leaves spelling `word`.
    pub fn word(letters: &[u8]) -> Self {
        match letters {
            [l] => QuasiMonomial::Leaf(*l),
            _ => QuasiMonomial::Product(letters.iter().map(|&l| QuasiMonomial::Leaf(l)).collect()),
        }
    }

    pub fn xi_count(&self) -> usize {
        match self {
            QuasiMonomial::Leaf(_) => 0,
            QuasiMonomial::Product(v) => v.iter().map(Self::xi_count).sum(),
            QuasiMonomial::Xi(args) => 1 + args.iter().map(Self::xi_count).sum::<usize>(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            QuasiMonomial::Leaf(_) => 1,
            QuasiMonomial::Product(v) => v.iter().map(Self::degree).sum(),
            QuasiMonomial::Xi(args) => args.iter().map(Self::degree).sum(),
        }
    }

    pub fn eval(&self) -> RatPoly {
        match self {
            QuasiMonomial::Leaf(l) => NCPoly::monomial(Word(vec![*l]), Rational::one()),
            QuasiMonomial::Product(v) => v
                .iter()
                .fold(NCPoly::monomial(Word(vec![]), Rational::one()), |acc, t| &acc * &t.eval()),
            QuasiMonomial::Xi(a) => xi_eval(&a[0].eval(), &a[1].eval(), &a[2].eval(), &a[3].eval()),
        }
    }
}

impl fmt::Display for QuasiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuasiMonomial::Leaf(l) => write!(f, "Y{l}"),
            QuasiMonomial::Product(v) => {
                for t in v {
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            QuasiMonomial::Xi(a) => write!(f, "Ξ({},{},{},{})", a[0], a[1], a[2], a[3]),
        }
    }
}

impl fmt::Debug for QuasiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// (S₁S₂S₃S₄ + S₂S₁S₃S₄ + S₁S₂S₄S₃ − S₂S₁S₄S₃)/4.
pub fn xi_eval<C: Coeff>(s1: &NCPoly<C>, s2: &NCPoly<C>, s3: &NCPoly<C>, s4: &NCPoly<C>) -> NCPoly<C> {
    let s12 = s1 * s2;
    let s21 = s2 * s1;
    let s34 = s3 * s4;
    let s43 = s4 * s3;
    let sum = &(&(&s12 * &s34) + &(&s21 * &s34)) + &(&(&s12 * &s43) - &(&s21 * &s43));
    sum.scale(&rat(1, 4))
}

/// A deduplicated LP column: the cheapest tree found for an evaluated
/// polynomial (normalized to a positive leading coefficient).
#[derive(Clone, Debug)]
pub struct Column {
    pub tree: QuasiMonomial,
    pub poly: RatPoly,
    pub xi: usize,
}

type Counts = Vec<u8>;

struct Enumerator {
    letters: Vec<u8>,
    memo: HashMap<Counts, Vec<Column>>,
}

impl Enumerator {
    fn sub_multisets(counts: &Counts) -> Vec<Counts> {
        let mut out = vec![vec![0u8; counts.len()]];
        for (i, &c) in counts.iter().enumerate() {
            let mut next = Vec::new();
            for base in &out {
                for k in 0..=c {
                    let mut v = base.clone();
                    v[i] = k;
                    next.push(v);
                }
            }
            out = next;
        }
        out.retain(|v| v.iter().any(|&k| k > 0));
        out
    }

    fn size(c: &Counts) -> usize {
        c.iter().map(|&k| k as usize).sum()
    }

    fn minus(a: &Counts, b: &Counts) -> Counts {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    /// Ordered splits of `counts` into four nonempty parts.
    fn four_splits(counts: &Counts) -> Vec<[Counts; 4]> {
        let mut out = Vec::new();
        for a in Self::sub_multisets(counts) {
            let r1 = Self::minus(counts, &a);
            for b in Self::sub_multisets(&r1) {
                let r2 = Self::minus(&r1, &b);
                for c in Self::sub_multisets(&r2) {
                    let d = Self::minus(&r2, &c);
                    if Self::size(&d) > 0 {
                        out.push([a.clone(), b.clone(), c, d]);
                    }
                }
            }
        }
        out
    }

    /// Single-factor trees: a leaf, or a Ξ node.
    fn atoms(&mut self, counts: &Counts) -> Vec<QuasiMonomial> {
        let n = Self::size(counts);
        if n == 1 {
            let i = counts.iter().position(|&k| k == 1).unwrap();
            return vec![QuasiMonomial::Leaf(self.letters[i])];
        }
        let mut out = Vec::new();
        if n < 4 {
            return out;
        }
        for split in Self::four_splits(counts) {
            let parts: Vec<Vec<QuasiMonomial>> = split
                .iter()
                .map(|c| self.all(c).iter().map(|col| col.tree.clone()).collect())
                .collect();
            for t0 in &parts[0] {
                for t1 in &parts[1] {
                    for t2 in &parts[2] {
                        for t3 in &parts[3] {
                            out.push(QuasiMonomial::xi(t0.clone(), t1.clone(), t2.clone(), t3.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    fn all(&mut self, counts: &Counts) -> Vec<Column> {
        if let Some(v) = self.memo.get(counts) {
            return v.clone();
        }
        let mut trees: Vec<QuasiMonomial> = self.atoms(counts);
        for first in Self::sub_multisets(counts) {
            if first == *counts {
                continue;
            }
            let rest = Self::minus(counts, &first);
            let heads = self.atoms(&first);
            let tails = self.all(&rest);
            for h in &heads {
                for t in &tails {
                    let mut factors = vec![h.clone()];
                    match &t.tree {
                        QuasiMonomial::Product(v) => factors.extend(v.iter().cloned()),
                        other => factors.push(other.clone()),
                    }
                    trees.push(QuasiMonomial::Product(factors));
                }
            }
        }
        let cols = dedup(trees);
        self.memo.insert(counts.clone(), cols.clone());
        cols
    }
}

fn dedup(trees: Vec<QuasiMonomial>) -> Vec<Column> {
    let mut index: HashMap<RatPoly, usize> = HashMap::new();
    let mut cols: Vec<Column> = Vec::new();
    for tree in trees {
        let mut poly = tree.eval();
        if poly.is_zero() {
            continue;
        }
        if leading_sign(&poly) < 0 {
            poly = -poly;
        }
        let xi = tree.xi_count();
        match index.get(&poly) {
            Some(&i) => {
                if xi < cols[i].xi {
                    cols[i] = Column { tree, poly, xi };
                }
            }
            None => {
                index.insert(poly.clone(), cols.len());
                cols.push(Column { tree, poly, xi });
            }
        }
    }
    cols
}

/// All quasi-monomials whose leaves form the multiset `generators`, up to
/// equality of evaluated polynomials (and sign). Monomials come first, in
/// lexicographic order.
pub fn enumerate_quasimonomials(generators: &[u8]) -> Result<Vec<Column>> {
    if generators.len() > EXHAUSTIVE_CAP {
        return Err(Error::ExhaustiveUnavailable {
            degree: generators.len(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    if generators.is_empty() || generators.contains(&0) {
        return Err(Error::InvalidInput("generators must be nonempty and 1-based".into()));
    }
    let mut letters = generators.to_vec();
    letters.sort_unstable();
    letters.dedup();
    let counts: Counts = letters
        .iter()
        .map(|l| generators.iter().filter(|g| *g == l).count() as u8)
        .collect();
    let mut e = Enumerator {
        letters,
        memo: HashMap::new(),
    };
    let mut cols = e.all(&counts);
    cols.sort_by(|a, b| {
        a.xi.cmp(&b.xi)
            .then_with(|| a.poly.terms().next().map(|t| t.0).cmp(&b.poly.terms().next().map(|t| t.0)))
    });
    Ok(cols)
}

/// Cached column set for a letter multiset.
pub fn columns_for(generators: &[u8]) -> Result<Arc<Vec<Column>>> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<u8>, Arc<Vec<Column>>>>> = OnceLock::new();
    let mut key = generators.to_vec();
    key.sort_unstable();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let cols = Arc::new(enumerate_quasimonomials(&key)?);
    cache.lock().unwrap().insert(key, cols.clone());
    Ok(cols)
}

