//! Ordinals below epsilon-zero in hereditary Cantor normal form.
//!
//! An [`Ordinal`] is a list of `(exponent, coefficient)` terms with strictly
//! decreasing exponents and positive coefficients; the empty list is zero.
//! Because the representation is unique, structural equality is ordinal
//! equality and the derived `Hash` is sound.

mod serde_impl;
mod text;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use text::parse_ordinal;

/// A single CNF term `w^exp * coeff`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub exp: Ordinal,
    pub coeff: BigUint,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

/// Zero / successor / limit trichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrdinalClass {
    Zero,
    Successor,
    Limit,
}

/// Split `alpha = beta + eta` with `eta < w^(zeta+1)` and `beta` minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub beta: Ordinal,
    pub eta: Ordinal,
    pub zeta: Ordinal,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from_u64(1)
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    pub fn from_u64(n: u64) -> Self {
        Ordinal::finite(BigUint::from(n))
    }

    pub fn finite(n: BigUint) -> Self {
        if n.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal { terms: vec![Term { exp: Ordinal::zero(), coeff: n }] }
        }
    }

    /// `w^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal { terms: vec![Term { exp: e, coeff: BigUint::one() }] }
    }

    /// `w^e * c`; zero when `c == 0`.
    pub fn monomial(e: Ordinal, c: impl Into<BigUint>) -> Self {
        let coeff = c.into();
        if coeff.is_zero() {
            return Ordinal::zero();
        }
        Ordinal { terms: vec![Term { exp: e, coeff }] }
    }

    /// Builds an ordinal from explicit terms, checking the CNF invariants.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.coeff.is_zero() {
                return Err(Error::Parse("CNF coefficient must be positive".into()));
            }
        }
        for w in terms.windows(2) {
            if w[0].exp <= w[1].exp {
                return Err(Error::Parse("CNF exponents must strictly decrease".into()));
            }
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exp.is_zero())
    }

    /// The value as a `u64` when finite and small enough.
    pub fn as_u64(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exp.is_zero() => t.coeff.to_u64(),
            _ => None,
        }
    }

    pub fn class(&self) -> OrdinalClass {
        match self.terms.last() {
            None => OrdinalClass::Zero,
            Some(t) if t.exp.is_zero() => OrdinalClass::Successor,
            Some(_) => OrdinalClass::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.class() == OrdinalClass::Limit
    }

    pub fn is_successor(&self) -> bool {
        self.class() == OrdinalClass::Successor
    }

    pub fn successor(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    pub fn predecessor(&self) -> Result<Ordinal> {
        if !self.is_successor() {
            return Err(Error::NoPredecessor(self.to_string()));
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor has a finite tail");
        last.coeff -= 1u32;
        if last.coeff.is_zero() {
            terms.pop();
        }
        Ok(Ordinal { terms })
    }

    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.terms.first().map(|t| &t.exp)
    }

    /// Exponent of the last CNF term; zero for zero and for successors.
    pub fn last_exponent(&self) -> Ordinal {
        self.terms.last().map(|t| t.exp.clone()).unwrap_or_default()
    }

    /// Coefficient of `w^e` in the CNF (zero if absent).
    pub fn coefficient_of(&self, e: &Ordinal) -> BigUint {
        self.terms
            .iter()
            .find(|t| &t.exp == e)
            .map(|t| t.coeff.clone())
            .unwrap_or_default()
    }

    /// Sum of the terms with exponent `>= d`: the largest multiple of `w^d`
    /// that is `<= self`.
    pub fn floor_to(&self, d: &Ordinal) -> Ordinal {
        Ordinal { terms: self.terms.iter().filter(|t| &t.exp >= d).cloned().collect() }
    }

    /// Removes one copy of the last term: `delta + w^e*c` becomes
    /// `delta + w^e*(c-1)`.
    pub fn drop_last_unit(&self) -> Ordinal {
        let mut terms = self.terms.clone();
        if let Some(last) = terms.last_mut() {
            last.coeff -= 1u32;
            if last.coeff.is_zero() {
                terms.pop();
            }
        }
        Ordinal { terms }
    }

    /// Ordinal sum `self + rhs`.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let mut merged = None;
        for t in &self.terms {
            match t.exp.cmp(&lead.exp) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => merged = Some(t.coeff.clone()),
                Ordering::Less => break,
            }
        }
        let mut rest = rhs.terms.iter();
        let first = rest.next().expect("nonempty");
        let coeff = match merged {
            Some(c) => c + &first.coeff,
            None => first.coeff.clone(),
        };
        terms.push(Term { exp: first.exp.clone(), coeff });
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    /// `self * n` for a natural number `n`.
    pub fn mul_nat(&self, n: &BigUint) -> Ordinal {
        if n.is_zero() || self.is_zero() {
            return Ordinal::zero();
        }
        let mut terms = self.terms.clone();
        terms[0].coeff = &terms[0].coeff * n;
        Ordinal { terms }
    }

    /// Ordinal product `self * rhs`, distributing on the left over the
    /// terms of `rhs`.
    pub fn mul(&self, rhs: &Ordinal) -> Ordinal {
        if self.is_zero() || rhs.is_zero() {
            return Ordinal::zero();
        }
        let lead = &self.terms[0].exp;
        let mut acc = Ordinal::zero();
        for t in &rhs.terms {
            let piece = if t.exp.is_zero() {
                self.mul_nat(&t.coeff)
            } else {
                Ordinal::monomial(lead.add(&t.exp), t.coeff.clone())
            };
            acc = acc.add(&piece);
        }
        acc
    }

    /// The unique `gamma` with `lesser + gamma == self`, if `lesser <= self`.
    pub fn left_sub(&self, lesser: &Ordinal) -> Option<Ordinal> {
        if lesser > self {
            return None;
        }
        for (i, lt) in lesser.terms.iter().enumerate() {
            let at = &self.terms[i];
            if at == lt {
                continue;
            }
            let mut terms = Vec::with_capacity(self.terms.len() - i);
            if at.exp == lt.exp {
                terms.push(Term { exp: at.exp.clone(), coeff: &at.coeff - &lt.coeff });
            } else {
                terms.push(at.clone());
            }
            terms.extend(self.terms[i + 1..].iter().cloned());
            return Some(Ordinal { terms });
        }
        Some(Ordinal { terms: self.terms[lesser.terms.len()..].to_vec() })
    }

    /// The `n`-th element (`n >= 1`) of the canonical fundamental sequence.
    ///
    /// With last term `w^e*c`: if `e = e'+1` the term becomes
    /// `w^e*(c-1) + w^e'*n`; if `e` is a limit it becomes
    /// `w^e*(c-1) + w^(e[n])`.
    pub fn fundamental(&self, n: u64) -> Result<Ordinal> {
        if !self.is_limit() {
            return Err(Error::NotLimit(self.to_string()));
        }
        if n == 0 {
            return Err(Error::Precondition("fundamental sequence index starts at 1".into()));
        }
        let e = self.last_exponent();
        let base = self.drop_last_unit();
        let tail = match e.class() {
            OrdinalClass::Successor => Ordinal::monomial(e.predecessor()?, n),
            OrdinalClass::Limit => Ordinal::omega_pow(e.fundamental(n)?),
            OrdinalClass::Zero => unreachable!("limit ordinals have a positive last exponent"),
        };
        Ok(base.add(&tail))
    }

    /// Same as [`fundamental`](Self::fundamental) but with index 0 mapped to 0.
    pub fn fundamental_or_zero(&self, n: u64) -> Result<Ordinal> {
        if n == 0 {
            Ok(Ordinal::zero())
        } else {
            self.fundamental(n)
        }
    }

    /// Minimal split `self = beta + eta` with `eta < w^(zeta+1)`.
    pub fn decompose(&self, zeta: &Ordinal) -> Decomposition {
        let split = self.terms.iter().take_while(|t| &t.exp > zeta).count();
        Decomposition {
            beta: Ordinal { terms: self.terms[..split].to_vec() },
            eta: Ordinal { terms: self.terms[split..].to_vec() },
            zeta: zeta.clone(),
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a.exp.cmp(&b.exp).then_with(|| a.coeff.cmp(&b.coeff));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::from_u64(n)
    }
}

impl std::str::FromStr for Ordinal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_ordinal(s)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.exp.is_zero() {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            match t.exp.as_u64() {
                Some(1) => write!(f, "w")?,
                Some(n) => write!(f, "w^{n}")?,
                None if t.exp == Ordinal::omega() => write!(f, "w^w")?,
                None => write!(f, "w^({})", t.exp)?,
            }
            if !t.coeff.is_one() {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl std::ops::Mul for &Ordinal {
    type Output = Ordinal;
    fn mul(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::mul(self, rhs)
    }
}
