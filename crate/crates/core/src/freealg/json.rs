use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Coeff, NCPoly, Word};

#[derive(Serialize, Deserialize)]
struct TermRepr {
    word: Vec<u8>,
    coeff: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    degree: Option<usize>,
    terms: Vec<TermRepr>,
}

impl<C: Coeff> Serialize for NCPoly<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRepr {
            degree: self.degree(),
            terms: self
                .terms()
                .map(|(w, c)| TermRepr {
                    word: w.0.clone(),
                    coeff: c.to_strings(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, C: Coeff> Deserialize<'de> for NCPoly<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        let mut p = NCPoly::zero();
        for t in repr.terms {
            if t.word.contains(&0) {
                return Err(D::Error::custom("letters are 1-based"));
            }
            let c = C::from_strings(&t.coeff).map_err(D::Error::custom)?;
            p.add_term(Word(t.word), c);
        }
        if let (Some(k), Some(actual)) = (repr.degree, p.degree()) {
            if k != actual {
                return Err(D::Error::custom(format!(
                    "declared degree {k} but terms have degree {actual}"
                )));
            }
        }
        Ok(p)
    }
}
