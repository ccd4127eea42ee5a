use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use super::LambdaPoly;
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, Rational};

/// Word in the generators Y₁, Y₂, …; letters are 1-based.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn new(letters: impl Into<Vec<u8>>) -> Self {
        Word(letters.into())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Sorted letter multiset.
    pub fn content(&self) -> Vec<u8> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }
}

impl Borrow<[u8]> for Word {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Y")?;
        let sep = self.0.iter().any(|&l| l > 9);
        for (i, l) in self.0.iter().enumerate() {
            if sep && i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Coefficient ring for [`NCPoly`].
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    fn scale(&self, r: &Rational) -> Self;
    fn to_strings(&self) -> Vec<String>;
    fn from_strings(parts: &[String]) -> Result<Self>;
}

impl Coeff for Rational {
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn to_strings(&self) -> Vec<String> {
        vec![fmt_rational(self)]
    }
    fn from_strings(parts: &[String]) -> Result<Self> {
        match parts {
            [one] => parse_rational(one),
            _ => Err(Error::InvalidInput(format!(
                "rational coefficient needs exactly one entry, got {}",
                parts.len()
            ))),
        }
    }
}

impl Coeff for LambdaPoly {
    fn scale(&self, r: &Rational) -> Self {
        LambdaPoly::scale(self, r)
    }
    fn to_strings(&self) -> Vec<String> {
        self.coeffs().iter().map(fmt_rational).collect()
    }
    fn from_strings(parts: &[String]) -> Result<Self> {
        Ok(LambdaPoly::new(
            parts.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
        ))
    }
}

/// Noncommutative polynomial: words mapped to nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NCPoly<C> {
    terms: BTreeMap<Word, C>,
}

pub type RatPoly = NCPoly<Rational>;
pub type LamPoly = NCPoly<LambdaPoly>;

impl<C: Coeff> Default for NCPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> NCPoly<C> {
    pub fn zero() -> Self {
        NCPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(word: Word, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(word, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, C)>) -> Self {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    /// Adds `c` to the coefficient of `word`, dropping it if the sum vanishes.
    pub fn add_term(&mut self, word: Word, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(old) => {
                let sum = std::mem::replace(old, C::zero()) + c;
                if sum.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *old = sum;
                }
            }
            None => {
                self.terms.insert(word, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &[u8]) -> Option<&C> {
        self.terms.get(word)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common word length, if homogeneous and nonzero.
    pub fn degree(&self) -> Option<usize> {
        let mut lens = self.terms.keys().map(Word::len);
        let first = lens.next()?;
        lens.all(|l| l == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), c.scale(r))))
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(w, c)| (w.clone(), c.clone() * k.clone())),
        )
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> NCPoly<D> {
        NCPoly::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), f(c))))
    }

    /// Substitutes generator `l` by generator `f(l)`.
    pub fn relabel(&self, f: impl Fn(u8) -> u8) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| {
            (Word(w.0.iter().map(|&l| f(l)).collect()), c.clone())
        }))
    }

    /// Reverses every word (the transpose anti-automorphism).
    pub fn reverse_words(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| {
            let mut v = w.0.clone();
            v.reverse();
            (Word(v), c.clone())
        }))
    }

    /// Splits by letter multiset (the multi-homogeneous components).
    pub fn components(&self) -> BTreeMap<Vec<u8>, Self> {
        let mut out: BTreeMap<Vec<u8>, Self> = BTreeMap::new();
        for (w, c) in &self.terms {
            out.entry(w.content())
                .or_insert_with(Self::zero)
                .add_term(w.clone(), c.clone());
        }
        out
    }
}

impl RatPoly {
    /// Sum of absolute coefficient values.
    pub fn l1(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .fold(Rational::zero(), |a, b| a + b)
    }
}

impl<C: Coeff> fmt::Debug for NCPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{}]·{}", c.to_strings().join(","), w)?;
        }
        Ok(())
    }
}

impl<'a, C: Coeff> Add<&'a NCPoly<C>> for &'a NCPoly<C> {
    type Output = NCPoly<C>;
    fn add(self, rhs: &NCPoly<C>) -> NCPoly<C> {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Add for NCPoly<C> {
    type Output = NCPoly<C>;
    fn add(self, rhs: NCPoly<C>) -> NCPoly<C> {
        &self + &rhs
    }
}

impl<'a, C: Coeff> Sub<&'a NCPoly<C>> for &'a NCPoly<C> {
    type Output = NCPoly<C>;
    fn sub(self, rhs: &NCPoly<C>) -> NCPoly<C> {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for NCPoly<C> {
    type Output = NCPoly<C>;
    fn sub(self, rhs: NCPoly<C>) -> NCPoly<C> {
        &self - &rhs
    }
}

impl<'a, C: Coeff> Mul<&'a NCPoly<C>> for &'a NCPoly<C> {
    type Output = NCPoly<C>;
    fn mul(self, rhs: &NCPoly<C>) -> NCPoly<C> {
        let mut out = NCPoly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &rhs.terms {
                out.add_term(w1.concat(w2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Mul for NCPoly<C> {
    type Output = NCPoly<C>;
    fn mul(self, rhs: NCPoly<C>) -> NCPoly<C> {
        &self * &rhs
    }
}

impl<C: Coeff> Neg for NCPoly<C> {
    type Output = NCPoly<C>;
    fn neg(self) -> NCPoly<C> {
        NCPoly {
            terms: self.terms.into_iter().map(|(w, c)| (w, -c)).collect(),
        }
    }
}

/// Generator Yᵢ as a polynomial.
pub fn gen<C: Coeff + num_traits::One>(i: u8) -> NCPoly<C> {
    NCPoly::monomial(Word(vec![i]), C::one())
}

/// Leading coefficient sign: the first (lexicographically smallest) term.
pub fn leading_sign(p: &RatPoly) -> i8 {
    match p.terms().next() {
        Some((_, c)) if c.is_negative() => -1,
        Some(_) => 1,
        None => 0,
    }
}
