//! The gluing operation on (space, family) pairs and the transfinite builder
//! for `(K_alpha, L_alpha)`.
//!
//! Families are symbolic: a [`MeasureIndex`] names one measure, and
//! [`materialize`](FamilyDescriptor::materialize) turns it into atoms.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, HFamily, HMember};
use crate::ordinal::Ordinal;
use crate::rational::{half, Rational};
use crate::space::{BranchGenerator, Point, SpaceDescriptor};

/// Longest chain of successor steps `build_pair` will unfold.
pub const MAX_SUCCESSOR_STEPS: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub space: SpaceDescriptor,
    pub family: FamilyDescriptor,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyDescriptor {
    /// `{δ_1}` on `[1, 1]`.
    PointMassOnly,
    /// `{½(δ_β + δ_top) : β <= top}` on `[1, top]`.
    Ladder { top: Ordinal },
    Tensor { base: Arc<FamilyDescriptor>, branches: BranchGenerator },
}

/// Name of one member of a family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureIndex {
    Dirac,
    LadderAt(Ordinal),
    Lift(Box<MeasureIndex>),
    Node { base: Box<MeasureIndex>, n: u64, inner: Box<MeasureIndex> },
}

impl MeasureIndex {
    pub fn lift(l: MeasureIndex) -> MeasureIndex {
        MeasureIndex::Lift(Box::new(l))
    }

    pub fn node(base: MeasureIndex, n: u64, inner: MeasureIndex) -> MeasureIndex {
        MeasureIndex::Node { base: Box::new(base), n, inner: Box::new(inner) }
    }

    /// Nesting depth; materialized weights have denominators dividing `2^depth`.
    pub fn depth(&self) -> u32 {
        match self {
            MeasureIndex::Dirac => 0,
            MeasureIndex::LadderAt(_) => 1,
            MeasureIndex::Lift(b) => b.depth(),
            MeasureIndex::Node { base, inner, .. } => base.depth() + inner.depth(),
        }
    }
}

impl fmt::Display for MeasureIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureIndex::Dirac => write!(f, "D"),
            MeasureIndex::LadderAt(b) => write!(f, "L[{b}]"),
            MeasureIndex::Lift(b) => write!(f, "F[{b}]"),
            MeasureIndex::Node { base, n, inner } => write!(f, "N[{base};{n};{inner}]"),
        }
    }
}

/// Bounds for finite enumeration of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub max_branch: u64,
    pub depth: u32,
    pub probes: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { max_branch: 3, depth: 3, probes: 2 }
    }
}

impl Pair {
    /// `(S_0, T_0)`: the one-point space with its point mass.
    pub fn point() -> Pair {
        Pair { space: SpaceDescriptor::interval(1), family: FamilyDescriptor::PointMassOnly }
    }

    pub fn check_covering(&self) -> Result<()> {
        if covers(&self.space, &self.family) {
            Ok(())
        } else {
            Err(Error::Covering("family does not match its space".into()))
        }
    }
}

/// Structural check that `family` lives on `space` and covers it.
pub fn covers(space: &SpaceDescriptor, family: &FamilyDescriptor) -> bool {
    match (space, family) {
        (SpaceDescriptor::Interval { top }, FamilyDescriptor::PointMassOnly) => top.as_u64() == Some(1),
        (SpaceDescriptor::Interval { top }, FamilyDescriptor::Ladder { top: t }) => top == t && !top.is_zero(),
        (
            SpaceDescriptor::Extension { base, base_family, branches },
            FamilyDescriptor::Tensor { base: fb, branches: fbr },
        ) => base_family == fb && branches == fbr && covers(base, base_family),
        _ => false,
    }
}

/// `(K, L) ⊗ {(K_n, L_n)}`.
pub fn tensor(pair: &Pair, branches: BranchGenerator) -> Result<Pair> {
    pair.check_covering()?;
    for n in 1..=3 {
        let b = branches.branch(n)?;
        b.check_covering()?;
        let dirac = b.family.materialize(&MeasureIndex::Dirac)?;
        if dirac != AtomicMeasure::dirac(b.space.distinguished_point()) {
            return Err(Error::Precondition(format!("branch {n} lacks the point mass at its distinguished point")));
        }
    }
    let base_family = Arc::new(pair.family.clone());
    Ok(Pair {
        space: SpaceDescriptor::Extension {
            base: Arc::new(pair.space.clone()),
            base_family: base_family.clone(),
            branches: branches.clone(),
        },
        family: FamilyDescriptor::Tensor { base: base_family, branches },
    })
}

fn glue(pair: Pair, branches: BranchGenerator) -> Pair {
    let base_family = Arc::new(pair.family);
    Pair {
        space: SpaceDescriptor::Extension {
            base: Arc::new(pair.space),
            base_family: base_family.clone(),
            branches: branches.clone(),
        },
        family: FamilyDescriptor::Tensor { base: base_family, branches },
    }
}

/// `(K_alpha, L_alpha)` for the fixed `zeta`.
pub fn build_pair(zeta: &Ordinal, alpha: &Ordinal) -> Result<Pair> {
    if zeta.is_zero() {
        return Err(Error::Precondition("zeta must be at least 1".into()));
    }
    if alpha.is_zero() {
        return Err(Error::Precondition("alpha must be at least 1".into()));
    }
    let k1 = glue(Pair::point(), BranchGenerator::ZetaLadder { zeta: zeta.clone() });
    // alpha = lim + finite, built as `finite` successor steps over the limit part.
    let finite_tail = alpha.terms().last().filter(|t| t.exp.is_zero()).map(|t| t.coeff.clone()).unwrap_or_default();
    let steps: u64 = num_traits::ToPrimitive::to_u64(&finite_tail)
        .filter(|s| *s <= MAX_SUCCESSOR_STEPS)
        .ok_or_else(|| Error::ResourceBound(format!("{alpha} needs too many successor steps")))?;
    let limit_part = alpha.floor_to(&Ordinal::one());
    let (mut pair, done) = if limit_part.is_zero() {
        (k1.clone(), 1)
    } else {
        (glue(Pair::point(), BranchGenerator::LimitLadder { zeta: zeta.clone(), alpha: limit_part }), 0)
    };
    for _ in done..steps {
        pair = glue(k1.clone(), BranchGenerator::SuccessorPad { pair: Arc::new(pair) });
    }
    Ok(pair)
}

impl FamilyDescriptor {
    /// Canonical index of the distinguished point mass.
    pub fn dirac(&self) -> MeasureIndex {
        match self {
            FamilyDescriptor::Tensor { base, .. } => MeasureIndex::lift(base.dirac()),
            _ => MeasureIndex::Dirac,
        }
    }

    /// Validates `idx` and rewrites it to canonical form.
    pub fn canonical_index(&self, idx: &MeasureIndex) -> Result<MeasureIndex> {
        let bad = || Error::InvalidIndex(format!("{idx} is not a member of this family"));
        match (self, idx) {
            (FamilyDescriptor::PointMassOnly, MeasureIndex::Dirac) => Ok(MeasureIndex::Dirac),
            (FamilyDescriptor::Ladder { .. }, MeasureIndex::Dirac) => Ok(MeasureIndex::Dirac),
            (FamilyDescriptor::Ladder { top }, MeasureIndex::LadderAt(b)) => {
                if b.is_zero() || b > top {
                    Err(bad())
                } else if b == top {
                    Ok(MeasureIndex::Dirac)
                } else {
                    Ok(idx.clone())
                }
            }
            (FamilyDescriptor::Tensor { .. }, MeasureIndex::Dirac) => Ok(self.dirac()),
            (FamilyDescriptor::Tensor { base, .. }, MeasureIndex::Lift(b)) => {
                Ok(MeasureIndex::lift(base.canonical_index(b)?))
            }
            (FamilyDescriptor::Tensor { base, branches }, MeasureIndex::Node { base: b, n, inner }) => {
                let b = base.canonical_index(b)?;
                let branch = branches.branch(*n)?;
                let inner = branch.family.canonical_index(inner)?;
                if inner == branch.family.dirac() {
                    Ok(MeasureIndex::lift(b))
                } else {
                    Ok(MeasureIndex::node(b, *n, inner))
                }
            }
            _ => Err(bad()),
        }
    }

    /// The atomic measure named by `idx`.
    pub fn materialize(&self, idx: &MeasureIndex) -> Result<AtomicMeasure> {
        let idx = self.canonical_index(idx)?;
        self.materialize_canonical(&idx)
    }

    fn materialize_canonical(&self, idx: &MeasureIndex) -> Result<AtomicMeasure> {
        match (self, idx) {
            (FamilyDescriptor::PointMassOnly, _) => Ok(AtomicMeasure::dirac(Point::ord(1))),
            (FamilyDescriptor::Ladder { top }, MeasureIndex::Dirac) => Ok(AtomicMeasure::dirac(Point::Ord(top.clone()))),
            (FamilyDescriptor::Ladder { top }, MeasureIndex::LadderAt(b)) => Ok(AtomicMeasure::from_atoms([
                (Point::Ord(b.clone()), half()),
                (Point::Ord(top.clone()), half()),
            ])),
            (FamilyDescriptor::Tensor { base, .. }, MeasureIndex::Lift(b)) => {
                let m = base.materialize_canonical(b)?;
                Ok(AtomicMeasure::from_atoms(m.atoms.into_iter().map(|(k, w)| (Point::base(k), w))))
            }
            (FamilyDescriptor::Tensor { base, branches }, MeasureIndex::Node { base: b, n, inner }) => {
                let outer = base.materialize_canonical(b)?;
                let branch = branches.branch(*n)?;
                let inner_m = branch.family.materialize_canonical(inner)?;
                let dist = branch.space.distinguished_point();
                let mut atoms: Vec<(Point, Rational)> = Vec::new();
                for (k, wk) in &outer.atoms {
                    for (j, wj) in &inner_m.atoms {
                        let p = if *j == dist {
                            Point::base(k.clone())
                        } else {
                            Point::ext(k.clone(), (**b).clone(), *n, j.clone())
                        };
                        atoms.push((p, wk * wj));
                    }
                }
                Ok(AtomicMeasure::from_atoms(atoms))
            }
            _ => Err(Error::InvalidIndex(idx.to_string())),
        }
    }

    /// The block `H_l` assigned to a member.
    pub fn h_set(&self, idx: &MeasureIndex) -> Result<BTreeSet<Point>> {
        let idx = self.canonical_index(idx)?;
        self.h_set_canonical(&idx)
    }

    fn h_set_canonical(&self, idx: &MeasureIndex) -> Result<BTreeSet<Point>> {
        match (self, idx) {
            (FamilyDescriptor::PointMassOnly, _) => Ok(BTreeSet::from([Point::ord(1)])),
            (FamilyDescriptor::Ladder { top }, MeasureIndex::Dirac) => Ok(BTreeSet::from([Point::Ord(top.clone())])),
            (FamilyDescriptor::Ladder { .. }, MeasureIndex::LadderAt(b)) => Ok(BTreeSet::from([Point::Ord(b.clone())])),
            (FamilyDescriptor::Tensor { base, .. }, MeasureIndex::Lift(b)) => {
                Ok(base.h_set_canonical(b)?.into_iter().map(Point::base).collect())
            }
            (FamilyDescriptor::Tensor { base, branches }, MeasureIndex::Node { base: b, n, inner }) => {
                let support = base.materialize_canonical(b)?;
                let branch = branches.branch(*n)?;
                let inner_h = branch.family.h_set_canonical(inner)?;
                let dist = branch.space.distinguished_point();
                let mut out = BTreeSet::new();
                for k in support.atoms.keys() {
                    for j in &inner_h {
                        out.insert(if *j == dist {
                            Point::base(k.clone())
                        } else {
                            Point::ext(k.clone(), (**b).clone(), *n, j.clone())
                        });
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidIndex(idx.to_string())),
        }
    }

    /// w*-Cantor-Bendixson rank of a member inside the family.
    pub fn measure_rank(&self, idx: &MeasureIndex) -> Result<Ordinal> {
        let idx = self.canonical_index(idx)?;
        self.rank_canonical(&idx)
    }

    fn rank_canonical(&self, idx: &MeasureIndex) -> Result<Ordinal> {
        match (self, idx) {
            (FamilyDescriptor::PointMassOnly, _) => Ok(Ordinal::zero()),
            (FamilyDescriptor::Ladder { top }, MeasureIndex::Dirac) => Ok(top.last_exponent()),
            (FamilyDescriptor::Ladder { .. }, MeasureIndex::LadderAt(b)) => Ok(b.last_exponent()),
            (FamilyDescriptor::Tensor { base, branches }, MeasureIndex::Lift(b)) => {
                Ok(branches.family_rank_sup()?.add(&base.rank_canonical(b)?))
            }
            (FamilyDescriptor::Tensor { branches, .. }, MeasureIndex::Node { n, inner, .. }) => {
                branches.branch(*n)?.family.rank_canonical(inner)
            }
            _ => Err(Error::InvalidIndex(idx.to_string())),
        }
    }

    /// Rank of the distinguished measure.
    pub fn family_rank(&self) -> Result<Ordinal> {
        self.measure_rank(&self.dirac())
    }

    /// Members of a finite truncation, closed under successor links, in a
    /// fixed order: the distinguished measure first.
    pub fn enumerate(&self, t: &Truncation) -> Result<Vec<MeasureIndex>> {
        self.enumerate_at(t, t.depth)
    }

    fn enumerate_at(&self, t: &Truncation, depth: u32) -> Result<Vec<MeasureIndex>> {
        match self {
            FamilyDescriptor::PointMassOnly => Ok(vec![MeasureIndex::Dirac]),
            FamilyDescriptor::Ladder { top } => {
                let mut out = vec![MeasureIndex::Dirac];
                out.extend(ladder_probes(top, t.probes).into_iter().map(MeasureIndex::LadderAt));
                Ok(out)
            }
            FamilyDescriptor::Tensor { base, branches } => {
                if depth == 0 {
                    return Ok(vec![self.dirac()]);
                }
                let base_members = base.enumerate_at(t, depth)?;
                let mut out: Vec<MeasureIndex> = base_members.iter().cloned().map(MeasureIndex::lift).collect();
                let mut per_branch = Vec::new();
                for n in 1..=t.max_branch {
                    let branch = branches.branch(n)?;
                    let dirac = branch.family.dirac();
                    let inner: Vec<MeasureIndex> =
                        branch.family.enumerate_at(t, depth - 1)?.into_iter().filter(|m| *m != dirac).collect();
                    per_branch.push((n, inner));
                }
                for b in &base_members {
                    for (n, inner) in &per_branch {
                        for i in inner {
                            out.push(MeasureIndex::node(b.clone(), *n, i.clone()));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Enumerated truncation with H-sets attached and `epsilon = ½`.
    pub fn enumerate_family(&self, t: &Truncation) -> Result<(Vec<MeasureIndex>, HFamily)> {
        let indices = self.enumerate(t)?;
        let mut members = Vec::with_capacity(indices.len());
        for idx in &indices {
            members.push(HMember {
                label: idx.to_string(),
                measure: self.materialize_canonical(idx)?,
                h: self.h_set_canonical(idx)?,
                declared_successor: None,
            });
        }
        Ok((indices, HFamily { members, epsilon: half() }))
    }
}

/// The first `count` probe points strictly below `top`: `1`, then `w^k`
/// for `k = 1, 2, 3`, then `2, 3, ...`.
pub fn ladder_probes(top: &Ordinal, count: usize) -> Vec<Ordinal> {
    let mut out = Vec::new();
    let push = |o: Ordinal, out: &mut Vec<Ordinal>| {
        if out.len() < count && &o < top && !out.contains(&o) {
            out.push(o);
        }
    };
    push(Ordinal::one(), &mut out);
    for k in 1..=3 {
        push(Ordinal::omega_pow(Ordinal::from_u64(k)), &mut out);
    }
    let mut n = 2;
    while out.len() < count && Ordinal::from_u64(n) < *top {
        push(Ordinal::from_u64(n), &mut out);
        n += 1;
    }
    out
}

#[cfg(test)]
mod tests;
