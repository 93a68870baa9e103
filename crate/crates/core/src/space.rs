//! Compact countable spaces: ordinal intervals `[1, top]` and glued
//! extensions `(K, L) ⊗ {(K_n, L_n)}`, their points, Cantor-Bendixson ranks,
//! clopen sets and convergence of finitely described sequences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::construction::{build_pair, covers, FamilyDescriptor, MeasureIndex, Pair};
use crate::error::{Error, Result};
use crate::ordinal::Ordinal;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceDescriptor {
    Interval { top: Ordinal },
    Extension {
        base: Arc<SpaceDescriptor>,
        base_family: Arc<FamilyDescriptor>,
        branches: BranchGenerator,
    },
}

/// How the `n`-th branch pair of an extension is produced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchGenerator {
    /// `n -> ([1, w^(z_n)], ladder)` with `z_n` the canonical sequence of `w^zeta`.
    ZetaLadder { zeta: Ordinal },
    /// Branch 1 is `pair`; every later branch is the one-point pair.
    SuccessorPad { pair: Arc<Pair> },
    /// `n -> build_pair(zeta, alpha[n])`.
    LimitLadder { zeta: Ordinal, alpha: Ordinal },
}

impl BranchGenerator {
    pub fn branch(&self, n: u64) -> Result<Arc<Pair>> {
        if n == 0 {
            return Err(Error::InvalidPoint("branch indices start at 1".into()));
        }
        match self {
            BranchGenerator::ZetaLadder { zeta } => {
                let zn = Ordinal::omega_pow(zeta.clone()).fundamental(n)?;
                let top = Ordinal::omega_pow(zn);
                Ok(Arc::new(Pair {
                    space: SpaceDescriptor::Interval { top: top.clone() },
                    family: FamilyDescriptor::Ladder { top },
                }))
            }
            BranchGenerator::SuccessorPad { pair } => {
                if n == 1 {
                    Ok(pair.clone())
                } else {
                    Ok(Arc::new(Pair::point()))
                }
            }
            BranchGenerator::LimitLadder { zeta, alpha } => {
                Ok(Arc::new(build_pair(zeta, &alpha.fundamental(n)?)?))
            }
        }
    }

    /// Supremum over branches of the rank of the distinguished point.
    pub fn rank_sup(&self) -> Result<Ordinal> {
        match self {
            BranchGenerator::ZetaLadder { zeta } => Ok(Ordinal::omega_pow(zeta.clone())),
            BranchGenerator::SuccessorPad { pair } => pair.space.space_rank(),
            BranchGenerator::LimitLadder { zeta, alpha } => Ok(Ordinal::omega_pow(zeta.clone()).mul(alpha)),
        }
    }

    /// Same supremum for the distinguished measures of the branch families.
    pub fn family_rank_sup(&self) -> Result<Ordinal> {
        match self {
            BranchGenerator::ZetaLadder { zeta } => Ok(Ordinal::omega_pow(zeta.clone())),
            BranchGenerator::SuccessorPad { pair } => pair.family.family_rank(),
            BranchGenerator::LimitLadder { zeta, alpha } => Ok(Ordinal::omega_pow(zeta.clone()).mul(alpha)),
        }
    }
}

/// A point of a space. Points of an extension are `Base(k)` (the class of
/// `(k, ∅)`) or `Ext { k, l, n, j }` with `j` not the branch's distinguished
/// point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Ord(Ordinal),
    Base(Box<Point>),
    Ext {
        k: Box<Point>,
        l: MeasureIndex,
        n: u64,
        j: Box<Point>,
    },
}

impl Point {
    pub fn ord(o: impl Into<Ordinal>) -> Point {
        Point::Ord(o.into())
    }

    pub fn base(k: Point) -> Point {
        Point::Base(Box::new(k))
    }

    pub fn ext(k: Point, l: MeasureIndex, n: u64, j: Point) -> Point {
        Point::Ext { k: Box::new(k), l, n, j: Box::new(j) }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Ord(o) => write!(f, "{o}"),
            Point::Base(k) => write!(f, "<{k}>"),
            Point::Ext { k, l, n, j } => write!(f, "({k},{l},{n},{j})"),
        }
    }
}

impl SpaceDescriptor {
    pub fn interval(top: impl Into<Ordinal>) -> SpaceDescriptor {
        SpaceDescriptor::Interval { top: top.into() }
    }

    pub fn distinguished_point(&self) -> Point {
        match self {
            SpaceDescriptor::Interval { top } => Point::Ord(top.clone()),
            SpaceDescriptor::Extension { base, .. } => Point::base(base.distinguished_point()),
        }
    }

    /// Validates `p` and rewrites it to canonical form.
    pub fn canonical_point(&self, p: &Point) -> Result<Point> {
        match (self, p) {
            (SpaceDescriptor::Interval { top }, Point::Ord(o)) => {
                if o.is_zero() || o > top {
                    return Err(Error::InvalidPoint(format!("{o} outside [1, {top}]")));
                }
                Ok(p.clone())
            }
            (SpaceDescriptor::Extension { base, .. }, Point::Base(k)) => Ok(Point::base(base.canonical_point(k)?)),
            (SpaceDescriptor::Extension { base, base_family, branches }, Point::Ext { k, l, n, j }) => {
                let k = base.canonical_point(k)?;
                let l = base_family.canonical_index(l)?;
                let weight = base_family.materialize(&l)?.weight(&k);
                if weight == num_traits::Zero::zero() {
                    return Err(Error::InvalidPoint(format!("{k} is not in the support of {l}")));
                }
                let branch = branches.branch(*n)?;
                let j = branch.space.canonical_point(j)?;
                if j == branch.space.distinguished_point() {
                    Ok(Point::base(k))
                } else {
                    Ok(Point::ext(k, l, *n, j))
                }
            }
            _ => Err(Error::InvalidPoint(format!("{p} does not belong to this kind of space"))),
        }
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.canonical_point(p).is_ok()
    }

    /// Cantor-Bendixson rank of a point (the last derived set containing it).
    pub fn cb_rank(&self, p: &Point) -> Result<Ordinal> {
        self.check_covering()?;
        let p = self.canonical_point(p)?;
        self.rank_unchecked(&p)
    }

    fn rank_unchecked(&self, p: &Point) -> Result<Ordinal> {
        match (self, p) {
            (SpaceDescriptor::Interval { .. }, Point::Ord(o)) => Ok(o.last_exponent()),
            (SpaceDescriptor::Extension { base, branches, .. }, Point::Base(k)) => {
                Ok(branches.rank_sup()?.add(&base.rank_unchecked(k)?))
            }
            (SpaceDescriptor::Extension { branches, .. }, Point::Ext { n, j, .. }) => {
                branches.branch(*n)?.space.rank_unchecked(j)
            }
            _ => Err(Error::InvalidPoint(p.to_string())),
        }
    }

    /// Rank of the distinguished point.
    pub fn space_rank(&self) -> Result<Ordinal> {
        self.cb_rank(&self.distinguished_point())
    }

    /// Shallow structural check that every base point is in the support of
    /// some base measure.
    pub fn check_covering(&self) -> Result<()> {
        match self {
            SpaceDescriptor::Interval { top } if top.is_zero() => Err(Error::Covering("empty interval".into())),
            SpaceDescriptor::Interval { .. } => Ok(()),
            SpaceDescriptor::Extension { base, base_family, .. } => {
                if covers(base, base_family) {
                    Ok(())
                } else {
                    Err(Error::Covering("base family does not cover the base space".into()))
                }
            }
        }
    }

    pub fn top(&self) -> Result<&Ordinal> {
        match self {
            SpaceDescriptor::Interval { top } => Ok(top),
            _ => Err(Error::SpaceMismatch("expected an interval space".into())),
        }
    }
}

/// `{k} x {l} x {n} x inner`, with `inner` clopen in branch `n` and missing
/// the branch's distinguished point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cylinder {
    pub k: Point,
    pub l: MeasureIndex,
    pub n: u64,
    pub inner: ClopenSet,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    /// `{x : lo < x <= hi, last exponent of x >= min_rank}` in an interval
    /// space. With `min_rank = 0` this is the half-open interval `(lo, hi]`.
    Interval { lo: Ordinal, hi: Ordinal, min_rank: Ordinal },
    Cylinder(Cylinder),
    /// Every `Base(k)` and `Ext(k, ..)` with `k` in `base`, minus the listed
    /// cylinders.
    Saturated { base: ClopenSet, minus: Vec<Cylinder> },
}

/// Finite union of basic clopen pieces.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClopenSet {
    pub pieces: Vec<Piece>,
}

impl Cylinder {
    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Ext { k, l, n, j } => **k == self.k && *l == self.l && *n == self.n && self.inner.contains(j),
            _ => false,
        }
    }
}

impl Piece {
    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (Piece::Interval { lo, hi, min_rank }, Point::Ord(o)) => {
                o > lo && o <= hi && &o.last_exponent() >= min_rank
            }
            (Piece::Cylinder(c), _) => c.contains(p),
            (Piece::Saturated { base, minus }, Point::Base(k)) => base.contains(k) && !minus.iter().any(|c| c.contains(p)),
            (Piece::Saturated { base, minus }, Point::Ext { k, .. }) => {
                base.contains(k) && !minus.iter().any(|c| c.contains(p))
            }
            _ => false,
        }
    }
}

impl ClopenSet {
    pub fn empty() -> ClopenSet {
        ClopenSet::default()
    }

    /// `(lo, hi]`.
    pub fn interval(lo: impl Into<Ordinal>, hi: impl Into<Ordinal>) -> ClopenSet {
        ClopenSet::from_pieces(vec![Piece::Interval { lo: lo.into(), hi: hi.into(), min_rank: Ordinal::zero() }])
    }

    pub fn from_pieces(pieces: Vec<Piece>) -> ClopenSet {
        let mut s = ClopenSet { pieces };
        s.normalize();
        s
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.pieces.iter().any(|piece| piece.contains(p))
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Drops empty interval pieces, trims each `hi` to the largest point
    /// of the required rank, and merges overlapping or adjacent pieces of
    /// equal rank.
    pub fn normalize(&mut self) {
        let mut intervals: Vec<(Ordinal, Ordinal, Ordinal)> = Vec::new();
        let mut rest = Vec::new();
        for piece in self.pieces.drain(..) {
            match piece {
                Piece::Interval { lo, hi, min_rank } => {
                    let hi = hi.floor_to(&min_rank);
                    if hi > lo {
                        intervals.push((min_rank, lo, hi));
                    }
                }
                Piece::Saturated { base, .. } if base.is_empty() => {}
                Piece::Cylinder(c) if c.inner.is_empty() => {}
                other => rest.push(other),
            }
        }
        intervals.sort();
        let mut merged: Vec<(Ordinal, Ordinal, Ordinal)> = Vec::new();
        for (rank, lo, hi) in intervals {
            if let Some(last) = merged.last_mut() {
                if last.0 == rank && lo <= last.2 {
                    if hi > last.2 {
                        last.2 = hi;
                    }
                    continue;
                }
            }
            merged.push((rank, lo, hi));
        }
        merged.sort_by(|a, b| (&a.1, &a.0).cmp(&(&b.1, &b.0)));
        rest.sort();
        rest.dedup();
        self.pieces = merged
            .into_iter()
            .map(|(min_rank, lo, hi)| Piece::Interval { lo, hi, min_rank })
            .chain(rest)
            .collect();
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet::from_pieces(self.pieces.iter().chain(&other.pieces).cloned().collect())
    }

    /// Interval pieces as `(lo, hi, min_rank)`; errors on cylinder pieces.
    pub fn interval_pieces(&self) -> Result<Vec<(&Ordinal, &Ordinal, &Ordinal)>> {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Interval { lo, hi, min_rank } => Ok((lo, hi, min_rank)),
                _ => Err(Error::SpaceMismatch("expected interval pieces".into())),
            })
            .collect()
    }

    /// True when `(lo, hi]` lies inside a single rank-0 piece.
    pub fn covers_interval(&self, lo: &Ordinal, hi: &Ordinal) -> bool {
        self.pieces.iter().any(|p| match p {
            Piece::Interval { lo: a, hi: b, min_rank } => min_rank.is_zero() && a <= lo && hi <= b,
            _ => false,
        })
    }
}

/// One Cantor-Bendixson derivative of a clopen set of an interval space.
pub fn interval_derivative(space: &SpaceDescriptor, set: &ClopenSet) -> Result<ClopenSet> {
    let top = space.top()?;
    let mut pieces = Vec::new();
    for (lo, hi, rank) in set.interval_pieces()? {
        if hi > top {
            return Err(Error::InvalidPoint(format!("{hi} outside [1, {top}]")));
        }
        pieces.push(Piece::Interval { lo: lo.clone(), hi: hi.clone(), min_rank: rank.successor() });
    }
    Ok(ClopenSet::from_pieces(pieces))
}

/// A clopen set containing every target and no avoided point.
pub fn neighborhood(space: &SpaceDescriptor, targets: &BTreeSet<Point>, avoid: &BTreeSet<Point>) -> Result<ClopenSet> {
    if let Some(p) = targets.intersection(avoid).next() {
        return Err(Error::Precondition(format!("{p} is both a target and avoided")));
    }
    match space {
        SpaceDescriptor::Interval { .. } => {
            let avoid: Vec<&Ordinal> = avoid
                .iter()
                .map(|p| match p {
                    Point::Ord(o) => Ok(o),
                    _ => Err(Error::InvalidPoint(p.to_string())),
                })
                .collect::<Result<_>>()?;
            let mut pieces = Vec::new();
            for t in targets {
                let Point::Ord(x) = space.canonical_point(t)? else { unreachable!() };
                let lo = avoid.iter().filter(|a| **a < &x).max().map(|a| (*a).clone()).unwrap_or_default();
                pieces.push(Piece::Interval { lo, hi: x, min_rank: Ordinal::zero() });
            }
            Ok(ClopenSet::from_pieces(pieces))
        }
        SpaceDescriptor::Extension { base, branches, .. } => {
            type Key = (Point, MeasureIndex, u64);
            let mut base_targets = BTreeSet::new();
            let mut base_avoid = BTreeSet::new();
            let mut ext_targets: BTreeMap<Key, BTreeSet<Point>> = BTreeMap::new();
            let mut ext_avoid: BTreeMap<Key, BTreeSet<Point>> = BTreeMap::new();
            for (src, is_target) in [(targets, true), (avoid, false)] {
                for p in src {
                    match space.canonical_point(p)? {
                        Point::Base(k) if is_target => {
                            base_targets.insert(*k);
                        }
                        Point::Base(k) => {
                            base_avoid.insert(*k);
                        }
                        Point::Ext { k, l, n, j } => {
                            let map = if is_target { &mut ext_targets } else { &mut ext_avoid };
                            map.entry((*k, l, n)).or_default().insert(*j);
                        }
                        Point::Ord(_) => unreachable!(),
                    }
                }
            }
            let no_points = BTreeSet::new();
            let mut pieces = Vec::new();
            if !base_targets.is_empty() {
                let u = neighborhood(base, &base_targets, &base_avoid)?;
                let mut minus = Vec::new();
                for ((k, l, n), js) in &ext_avoid {
                    if !u.contains(k) {
                        continue;
                    }
                    let branch = branches.branch(*n)?;
                    let mut keep = ext_targets.get(&(k.clone(), l.clone(), *n)).unwrap_or(&no_points).clone();
                    keep.insert(branch.space.distinguished_point());
                    let inner = neighborhood(&branch.space, js, &keep)?;
                    minus.push(Cylinder { k: k.clone(), l: l.clone(), n: *n, inner });
                }
                pieces.push(Piece::Saturated { base: u, minus });
            }
            for ((k, l, n), js) in &ext_targets {
                let branch = branches.branch(*n)?;
                let mut skip = ext_avoid.get(&(k.clone(), l.clone(), *n)).unwrap_or(&no_points).clone();
                skip.insert(branch.space.distinguished_point());
                let inner = neighborhood(&branch.space, js, &skip)?;
                pieces.push(Piece::Cylinder(Cylinder { k: k.clone(), l: l.clone(), n: *n, inner }));
            }
            Ok(ClopenSet::from_pieces(pieces))
        }
    }
}

/// Eventual behaviour of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSchema {
    Constant(Point),
    /// `offset + target[m]`.
    Fundamental { offset: Ordinal, target: Ordinal },
    /// `offset + w^exp * m`.
    Affine { offset: Ordinal, exp: Ordinal },
    /// `Ext(k, l, n, j_m)` with `j_m` following `inner` in branch `n`.
    InBranch { k: Point, l: MeasureIndex, n: u64, inner: Box<TailSchema> },
    /// `Base(k_m)` with `k_m` following `inner` in the base space.
    Lifted(Box<TailSchema>),
    /// `Ext(k, l, m, j)`: the branch index itself runs off to infinity.
    BranchSweep { k: Point, l: MeasureIndex, j: Point },
    /// Finitely many schemas taken in turn.
    Interleave(Vec<TailSchema>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSequence {
    pub prefix: Vec<Point>,
    pub tail: TailSchema,
}

impl TailSchema {
    /// The `m`-th term (`m >= 1`) of the tail.
    pub fn term(&self, space: &SpaceDescriptor, m: u64) -> Result<Point> {
        let p = match self {
            TailSchema::Constant(p) => p.clone(),
            TailSchema::Fundamental { offset, target } => Point::Ord(offset.add(&target.fundamental(m)?)),
            TailSchema::Affine { offset, exp } => Point::Ord(offset.add(&Ordinal::monomial(exp.clone(), m))),
            TailSchema::InBranch { k, l, n, inner } => {
                let SpaceDescriptor::Extension { branches, .. } = space else {
                    return Err(Error::UnsupportedSchema("in-branch tail needs an extension space".into()));
                };
                Point::ext(k.clone(), l.clone(), *n, inner.term(&branches.branch(*n)?.space, m)?)
            }
            TailSchema::Lifted(inner) => {
                let SpaceDescriptor::Extension { base, .. } = space else {
                    return Err(Error::UnsupportedSchema("lifted tail needs an extension space".into()));
                };
                Point::base(inner.term(base, m)?)
            }
            TailSchema::BranchSweep { k, l, j } => Point::ext(k.clone(), l.clone(), m, j.clone()),
            TailSchema::Interleave(parts) => {
                if parts.is_empty() {
                    return Err(Error::UnsupportedSchema("empty interleaving".into()));
                }
                let len = parts.len() as u64;
                parts[((m - 1) % len) as usize].term(space, (m - 1) / len + 1)?
            }
        };
        space.canonical_point(&p)
    }

    /// The limit of the tail, or `None` when it does not converge.
    pub fn limit(&self, space: &SpaceDescriptor) -> Result<Option<Point>> {
        for m in 1..=3 {
            self.term(space, m)?;
        }
        let lim = match self {
            TailSchema::Constant(p) => Some(space.canonical_point(p)?),
            TailSchema::Fundamental { offset, target } => {
                Some(space.canonical_point(&Point::Ord(offset.add(target)))?)
            }
            TailSchema::Affine { offset, exp } => {
                Some(space.canonical_point(&Point::Ord(offset.add(&Ordinal::omega_pow(exp.successor()))))?)
            }
            TailSchema::InBranch { k, l, n, inner } => {
                let SpaceDescriptor::Extension { branches, .. } = space else { unreachable!() };
                match inner.limit(&branches.branch(*n)?.space)? {
                    None => None,
                    Some(j) => Some(space.canonical_point(&Point::ext(k.clone(), l.clone(), *n, j))?),
                }
            }
            TailSchema::Lifted(inner) => {
                let SpaceDescriptor::Extension { base, .. } = space else { unreachable!() };
                inner.limit(base)?.map(Point::base)
            }
            TailSchema::BranchSweep { k, .. } => Some(space.canonical_point(&Point::base(k.clone()))?),
            TailSchema::Interleave(parts) => {
                let mut lim: Option<Option<Point>> = None;
                for part in parts {
                    let l = part.limit(space)?;
                    match &lim {
                        None => lim = Some(l),
                        Some(prev) if *prev == l => {}
                        Some(_) => return Ok(None),
                    }
                }
                lim.flatten()
            }
        };
        Ok(lim)
    }
}

pub fn converges(seq: &PointSequence, p: &Point, space: &SpaceDescriptor) -> Result<bool> {
    for q in &seq.prefix {
        space.canonical_point(q)?;
    }
    let target = space.canonical_point(p)?;
    Ok(seq.tail.limit(space)? == Some(target))
}
