//! JSON encoding: a bare integer for finite ordinals, otherwise
//! `{"cnf": [[exp, coeff], ...]}` with `exp` encoded recursively.
//! Coefficients that do not fit in a `u64` are written as decimal strings.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Ordinal, Term};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coeff {
    Small(u64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Finite(Coeff),
    Cnf { cnf: Vec<(Repr, Coeff)> },
}

fn coeff_repr(c: &BigUint) -> Coeff {
    match c.to_u64() {
        Some(v) => Coeff::Small(v),
        None => Coeff::Big(c.to_string()),
    }
}

fn coeff_value(c: Coeff) -> Result<BigUint, String> {
    match c {
        Coeff::Small(v) => Ok(BigUint::from(v)),
        Coeff::Big(s) => s.parse().map_err(|_| format!("bad coefficient `{s}`")),
    }
}

fn to_repr(o: &Ordinal) -> Repr {
    if o.is_finite() {
        let n = o.terms().first().map(|t| t.coeff.clone()).unwrap_or_default();
        return Repr::Finite(coeff_repr(&n));
    }
    Repr::Cnf { cnf: o.terms().iter().map(|t| (to_repr(&t.exp), coeff_repr(&t.coeff))).collect() }
}

fn from_repr(r: Repr) -> Result<Ordinal, String> {
    match r {
        Repr::Finite(c) => Ok(Ordinal::finite(coeff_value(c)?)),
        Repr::Cnf { cnf } => {
            let terms = cnf
                .into_iter()
                .map(|(e, c)| Ok(Term { exp: from_repr(e)?, coeff: coeff_value(c)? }))
                .collect::<Result<Vec<_>, String>>()?;
            Ordinal::from_terms(terms).map_err(|e| e.to_string())
        }
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_repr(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        from_repr(Repr::deserialize(d)?).map_err(D::Error::custom)
    }
}
