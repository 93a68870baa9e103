//! Brute-force reference model for ordinals below w^8: a coefficient vector
//! indexed by exponent. Sums are built one unit monomial at a time and
//! products by repeated addition, so nothing is shared with the CNF code
//! beyond the final conversion.

#![allow(dead_code)]

use std::cmp::Ordering;

use super::Ordinal;

pub const SMALL_WIDTH: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Small(pub [u64; SMALL_WIDTH]);

impl Small {
    pub fn triple(p: u64, q: u64, r: u64) -> Small {
        let mut c = [0; SMALL_WIDTH];
        c[2] = p;
        c[1] = q;
        c[0] = r;
        Small(c)
    }

    /// Every `w^2*p + w*q + r` with coefficients in `0..=max_coeff`.
    pub fn all_below_w3(max_coeff: u64) -> Vec<Small> {
        let mut out = Vec::new();
        for p in 0..=max_coeff {
            for q in 0..=max_coeff {
                for r in 0..=max_coeff {
                    out.push(Small::triple(p, q, r));
                }
            }
        }
        out
    }

    fn degree(&self) -> Option<usize> {
        (0..SMALL_WIDTH).rev().find(|&k| self.0[k] > 0)
    }

    pub fn cmp_small(&self, other: &Small) -> Ordering {
        for k in (0..SMALL_WIDTH).rev() {
            match self.0[k].cmp(&other.0[k]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// `self + w^k`: the next ordinal past `self` that is a multiple of `w^k`
    /// added once.
    fn add_unit(&mut self, k: usize) {
        for j in 0..k {
            self.0[j] = 0;
        }
        self.0[k] += 1;
    }

    pub fn add_small(&self, other: &Small) -> Small {
        let mut acc = self.clone();
        for k in (0..SMALL_WIDTH).rev() {
            for _ in 0..other.0[k] {
                acc.add_unit(k);
            }
        }
        acc
    }

    pub fn mul_small(&self, other: &Small) -> Small {
        let Some(d) = self.degree() else {
            return Small([0; SMALL_WIDTH]);
        };
        let mut acc = Small([0; SMALL_WIDTH]);
        for k in (0..SMALL_WIDTH).rev() {
            for _ in 0..other.0[k] {
                let piece = if k == 0 {
                    self.clone()
                } else {
                    let mut m = [0; SMALL_WIDTH];
                    m[d + k] = 1;
                    Small(m)
                };
                acc = acc.add_small(&piece);
            }
        }
        acc
    }

    pub fn to_ordinal(&self) -> Ordinal {
        let mut o = Ordinal::zero();
        for k in (0..SMALL_WIDTH).rev() {
            if self.0[k] > 0 {
                o = o.add(&Ordinal::monomial(Ordinal::from_u64(k as u64), self.0[k]));
            }
        }
        o
    }
}
