//! Wolfe-index machinery: certificates for `P_γ(ε, L)` over ladder families,
//! the exact value of `ρ(ε, 1)`, the closed-form upper bound for `ρ(ε, α)`,
//! and the replay of the inductive step and of the separation criterion.

use std::collections::BTreeSet;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::construction::{FamilyDescriptor, MeasureIndex, Pair, Truncation};
use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::rational::{half, int, Rational};
use crate::space::{ClopenSet, Point, SpaceDescriptor, TailSchema};

/// `l` with `2^-(l+1) < ε <= 2^-l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicLevel(pub u32);

impl DyadicLevel {
    pub fn of(eps: &Rational) -> Result<DyadicLevel> {
        if !eps.is_positive() || *eps > Rational::one() {
            return Err(Error::Precondition(format!("epsilon {eps} outside (0, 1]")));
        }
        let mut l = 0;
        let mut upper = Rational::one();
        loop {
            let lower = &upper / int(2);
            if *eps > lower {
                return Ok(DyadicLevel(l));
            }
            upper = lower;
            l += 1;
        }
    }

    pub fn contains(&self, eps: &Rational) -> bool {
        DyadicLevel::of(eps).is_ok_and(|l| l == *self)
    }
}

/// Ordinal-valued bound with where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoBound {
    pub value: Ordinal,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Witness,
    RecurrenceStep,
}

/// `ρ(ε, 1)`: `w^ζ` for `ε <= ½`, otherwise 0.
pub fn rho_one(eps: &Rational, zeta: &Ordinal) -> Result<Ordinal> {
    if !eps.is_positive() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    Ok(if *eps <= half() { Ordinal::omega_pow(zeta.clone()) } else { Ordinal::zero() })
}

/// `β + w^ζ·l + η` where `α = β + η` is the split at `ζ`.
pub fn rho_closed_form(level: DyadicLevel, alpha: &Ordinal, zeta: &Ordinal) -> Ordinal {
    let d = alpha.decompose(zeta);
    let middle = Ordinal::omega_pow(zeta.clone()).mul_nat(&level.0.into());
    d.beta.add(&middle).add(&d.eta)
}

pub fn rho_bound(level: DyadicLevel, alpha: &Ordinal, zeta: &Ordinal) -> RhoBound {
    RhoBound { value: rho_closed_form(level, alpha, zeta), provenance: Provenance::ClosedForm }
}

/// One failed inequality of the inductive replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFailure {
    pub level: u32,
    pub detail: String,
}

/// Replays the successor/limit recurrence against the closed form for every
/// level up to `max_level`.
pub fn check_inductive_step(alpha: &Ordinal, zeta: &Ordinal, max_level: u32, limit_probe: u64) -> Result<Vec<StepFailure>> {
    if *alpha < Ordinal::from_u64(2) {
        return Err(Error::Precondition("alpha must be at least 2".into()));
    }
    let mut failures = Vec::new();
    let w_zeta = Ordinal::omega_pow(zeta.clone());
    for l in 0..=max_level {
        let here = rho_closed_form(DyadicLevel(l), alpha, zeta);
        if alpha.is_successor() {
            let prev = alpha.predecessor()?;
            let doubled = if l == 0 {
                // 2ε > 1 and ε > ½: both terms vanish.
                Ordinal::zero()
            } else {
                rho_closed_form(DyadicLevel(l - 1), &prev, zeta).add(&w_zeta)
            };
            let plus_one = rho_closed_form(DyadicLevel(l), &prev, zeta).successor();
            let need = doubled.max(plus_one);
            if here < need {
                failures.push(StepFailure { level: l, detail: format!("bound {here} < required {need}") });
            }
        } else {
            for n in 1..=limit_probe {
                let lower = rho_closed_form(DyadicLevel(l), &alpha.fundamental(n)?, zeta);
                if here < lower {
                    failures.push(StepFailure { level: l, detail: format!("bound {here} < bound at term {n}: {lower}") });
                }
            }
        }
    }
    Ok(failures)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainCheck {
    pub condition: bool,
    pub separation: bool,
}

/// `condition`: `ζ < α < ζ·w`. `separation`: `w^α` exceeds the closed-form
/// bound at `w^γ` (with `α = ζ + γ`) at every level up to `max_level`.
pub fn theorem_main_check(zeta: &Ordinal, alpha: &Ordinal, max_level: u32) -> Result<MainCheck> {
    if zeta.is_zero() {
        return Err(Error::Precondition("zeta must be at least 1".into()));
    }
    let gamma = alpha
        .left_sub(zeta)
        .ok_or_else(|| Error::Precondition(format!("no gamma with {zeta} + gamma = {alpha}")))?;
    let condition = zeta < alpha && *alpha < zeta.mul(&Ordinal::omega());
    let target = Ordinal::omega_pow(alpha.clone());
    let w_gamma = Ordinal::omega_pow(gamma);
    let separation = (0..=max_level).all(|l| target > rho_closed_form(DyadicLevel(l), &w_gamma, zeta));
    Ok(MainCheck { condition, separation })
}

/// `offset + w^exp·(m+shift)` or `offset + (w^limit)[m+shift]` (index 0
/// meaning `offset`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointParam {
    Affine { offset: Ordinal, exp: Ordinal, shift: u64 },
    Fundamental { offset: Ordinal, limit: Ordinal, shift: u64 },
}

impl PointParam {
    pub fn at(&self, m: u64) -> Result<Ordinal> {
        match self {
            PointParam::Affine { offset, exp, shift } => Ok(offset.add(&Ordinal::monomial(exp.clone(), m + shift))),
            PointParam::Fundamental { offset, limit, shift } => {
                if limit.is_zero() {
                    return Err(Error::Precondition("fundamental parameter needs a positive exponent".into()));
                }
                Ok(offset.add(&Ordinal::omega_pow(limit.clone()).fundamental_or_zero(m + shift)?))
            }
        }
    }

    pub fn limit(&self) -> Ordinal {
        match self {
            PointParam::Affine { offset, exp, .. } => offset.add(&Ordinal::omega_pow(exp.successor())),
            PointParam::Fundamental { offset, limit, .. } => offset.add(&Ordinal::omega_pow(limit.clone())),
        }
    }

    fn shift(&self) -> u64 {
        match self {
            PointParam::Affine { shift, .. } | PointParam::Fundamental { shift, .. } => *shift,
        }
    }

    fn same_curve(&self, other: &PointParam) -> bool {
        match (self, other) {
            (PointParam::Affine { offset: a, exp: e, .. }, PointParam::Affine { offset: b, exp: f, .. }) => a == b && e == f,
            (
                PointParam::Fundamental { offset: a, limit: e, .. },
                PointParam::Fundamental { offset: b, limit: f, .. },
            ) => a == b && e == f,
            _ => false,
        }
    }

    fn tail(&self) -> TailSchema {
        match self {
            PointParam::Affine { offset, exp, shift } => TailSchema::Affine {
                offset: offset.add(&Ordinal::monomial(exp.clone(), *shift)),
                exp: exp.clone(),
            },
            PointParam::Fundamental { offset, limit, shift: _ } => TailSchema::Fundamental {
                offset: offset.clone(),
                target: Ordinal::omega_pow(limit.clone()),
            },
        }
    }
}

/// Child opens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalParam {
    /// `G_m = (q(m-1), q(m)]`.
    Blocks { of: PointParam },
    /// `G_m = (lo, q(m)]`, nested rather than disjoint.
    Around { of: PointParam, lo: Ordinal },
}

impl IntervalParam {
    fn curve(&self) -> &PointParam {
        match self {
            IntervalParam::Blocks { of } | IntervalParam::Around { of, .. } => of,
        }
    }

    fn at(&self, m: u64) -> Result<ClopenSet> {
        match self {
            IntervalParam::Blocks { of } => Ok(ClopenSet::interval(of.at(m - 1)?, of.at(m)?)),
            IntervalParam::Around { of, lo } => Ok(ClopenSet::interval(lo.clone(), of.at(m)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankParam {
    Constant(Ordinal),
    /// `limit[m+shift]`.
    Fundamental { limit: Ordinal, shift: u64 },
}

impl RankParam {
    fn at(&self, m: u64) -> Result<Ordinal> {
        match self {
            RankParam::Constant(r) => Ok(r.clone()),
            RankParam::Fundamental { limit, shift } => limit.fundamental(m + shift),
        }
    }
}

/// How each child's own certificate is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descent {
    /// Children are bare `P_0` pairs.
    Leaf,
    /// Child `m` carries the canonical ladder certificate below its point.
    Canonical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildFamily {
    pub points: PointParam,
    pub opens: IntervalParam,
    pub ranks: RankParam,
    pub descent: Descent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Children {
    None,
    /// Accepted only when empty: a finite list never witnesses a successor step.
    Finite(Vec<WitnessSchema>),
    Family(Box<ChildFamily>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSchema {
    pub measure: MeasureIndex,
    pub open: ClopenSet,
    pub declared_rank: Ordinal,
    pub children: Children,
}

/// How many child instances get a full recursive check (the rest of the
/// family clauses are checked symbolically for every `m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub shallow_probe: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { shallow_probe: 2 }
    }
}

/// `([1, w^(w^ζ)], ladder)`: the interval presentation of `L_1`.
pub fn l1_interval_model(zeta: &Ordinal) -> Pair {
    let top = Ordinal::omega_pow(Ordinal::omega_pow(zeta.clone()));
    Pair { space: SpaceDescriptor::Interval { top: top.clone() }, family: FamilyDescriptor::Ladder { top } }
}

fn ladder_top(fam: &FamilyDescriptor) -> Result<&Ordinal> {
    match fam {
        FamilyDescriptor::Ladder { top } => Ok(top),
        _ => Err(Error::Precondition("witnesses are checked over ladder families only".into())),
    }
}

fn point_of(idx: &MeasureIndex, top: &Ordinal) -> Ordinal {
    match idx {
        MeasureIndex::LadderAt(b) => b.clone(),
        _ => top.clone(),
    }
}

/// Checks every clause and returns the certified rank.
pub fn verify_witness(w: &WitnessSchema, fam: &FamilyDescriptor, eps: &Rational) -> Result<Ordinal> {
    verify_with(w, fam, eps, VerifyOptions::default())
}

pub fn verify_with(w: &WitnessSchema, fam: &FamilyDescriptor, eps: &Rational, opts: VerifyOptions) -> Result<Ordinal> {
    let top = ladder_top(fam)?.clone();
    let space = SpaceDescriptor::Interval { top: top.clone() };
    verify_node(w, fam, &space, &top, eps, opts, "root")
}

fn reject(path: &str, reason: impl Into<String>) -> Error {
    Error::Witness { path: path.to_string(), reason: reason.into() }
}

fn verify_node(
    w: &WitnessSchema,
    fam: &FamilyDescriptor,
    space: &SpaceDescriptor,
    top: &Ordinal,
    eps: &Rational,
    opts: VerifyOptions,
    path: &str,
) -> Result<Ordinal> {
    let idx = fam.canonical_index(&w.measure).map_err(|e| reject(path, e.to_string()))?;
    let mu = fam.materialize(&idx)?;
    for (lo, hi, _) in w.open.interval_pieces().map_err(|e| reject(path, e.to_string()))? {
        if hi > top || lo >= hi {
            return Err(reject(path, format!("open piece ({lo}, {hi}] is not inside [1, {top}]")));
        }
    }
    if mu.mass_in(&w.open).abs() < *eps {
        return Err(reject(path, "node mass on its open set is below epsilon"));
    }
    let certified = match &w.children {
        Children::None => Ordinal::zero(),
        Children::Finite(list) if list.is_empty() => Ordinal::zero(),
        Children::Finite(_) => return Err(reject(path, "a finite list of children cannot certify a successor step")),
        Children::Family(cf) => verify_family(cf, &idx, &w.open, fam, space, top, eps, opts, path)?,
    };
    if w.declared_rank > certified {
        return Err(reject(path, format!("declared rank {} exceeds certified rank {certified}", w.declared_rank)));
    }
    Ok(certified)
}

#[allow(clippy::too_many_arguments)]
fn verify_family(
    cf: &ChildFamily,
    node: &MeasureIndex,
    open: &ClopenSet,
    fam: &FamilyDescriptor,
    space: &SpaceDescriptor,
    top: &Ordinal,
    eps: &Rational,
    opts: VerifyOptions,
    path: &str,
) -> Result<Ordinal> {
    let q = cf.opens.curve();
    if let IntervalParam::Around { lo, .. } = &cf.opens {
        if q.at(1)? > *lo {
            return Err(reject(path, format!("child open sets overlap: all contain ({lo}, {}]", q.at(1)?)));
        }
        return Err(reject(path, "child open sets are empty"));
    }
    // Point m lies in (q(m-1), q(m)] for every m exactly when both follow the
    // same strictly increasing curve with the same shift.
    if !cf.points.same_curve(q) || cf.points.shift() != q.shift() {
        return Err(reject(path, "child points are not certified to lie in their open sets"));
    }
    // Blocks of a strictly increasing curve are pairwise disjoint; their
    // union is (q(0), lim q) with closure (q(0), lim q].
    let q0 = q.at(0)?;
    let lim = q.limit();
    if !open.covers_interval(&q0, &lim) {
        return Err(reject(path, format!("closure ({q0}, {lim}] of the child opens is not inside the node open set")));
    }
    // Child measures ½(δ_p(m) + δ_top) converge to ½(δ_lim + δ_top).
    if lim > *top {
        return Err(reject(path, "child points leave the space"));
    }
    let node_point = point_of(node, top);
    let tail = cf.points.tail();
    if !crate::space::converges(
        &crate::space::PointSequence { prefix: vec![], tail },
        &Point::Ord(node_point.clone()),
        space,
    )
    .map_err(|e| reject(path, e.to_string()))?
    {
        return Err(reject(path, format!("child measures do not converge to the node measure at {node_point}")));
    }
    // Each child captures ½ on its own block, and the top atom lies above every block.
    if half() < *eps {
        return Err(reject(path, "children capture only ½ of their mass"));
    }
    let certified = match &cf.ranks {
        RankParam::Constant(r) => r.successor(),
        RankParam::Fundamental { limit, .. } => {
            if !limit.is_limit() {
                return Err(reject(path, format!("rank sequence target {limit} is not a limit")));
            }
            limit.clone()
        }
    };
    if cf.descent == Descent::Leaf && cf.ranks != RankParam::Constant(Ordinal::zero()) {
        return Err(reject(path, "leaf children only certify rank 0"));
    }
    for m in 1..=opts.shallow_probe.max(1) {
        let child_path = format!("{path}/{m}");
        let child = child_schema(cf, m).map_err(|e| reject(&child_path, e.to_string()))?;
        if child.measure != MeasureIndex::LadderAt(cf.points.at(m)?) {
            return Err(reject(&child_path, "child measure does not sit at the family point"));
        }
        let block = cf.opens.at(m)?;
        for (lo, hi, _) in child.open.interval_pieces()? {
            if !block.covers_interval(lo, hi) {
                return Err(reject(&child_path, "child open set leaves its block"));
            }
        }
        let want = cf.ranks.at(m)?;
        if m == 1 {
            let got = verify_node(&child, fam, space, top, eps, opts, &child_path)?;
            if got < want {
                return Err(reject(&child_path, format!("certified {got} below required {want}")));
            }
        } else {
            let shallow = WitnessSchema { children: Children::None, declared_rank: Ordinal::zero(), ..child };
            verify_node(&shallow, fam, space, top, eps, opts, &child_path)?;
        }
    }
    Ok(certified)
}

/// The `m`-th child of a family.
pub fn child_schema(cf: &ChildFamily, m: u64) -> Result<WitnessSchema> {
    if m == 0 {
        return Err(Error::InvalidIndex("children are numbered from 1".into()));
    }
    let p = cf.points.at(m)?;
    let open = cf.opens.at(m)?;
    let (lo, hi) = match open.interval_pieces()?.first() {
        Some((lo, hi, _)) => ((*lo).clone(), (*hi).clone()),
        None => return Err(Error::Precondition(format!("child {m} has an empty open set"))),
    };
    let rank = cf.ranks.at(m)?;
    match cf.descent {
        Descent::Leaf => Ok(WitnessSchema {
            measure: MeasureIndex::LadderAt(p),
            open,
            declared_rank: Ordinal::zero(),
            children: Children::None,
        }),
        Descent::Canonical => {
            if p != hi {
                return Err(Error::Precondition("canonical descent needs each child point at the top of its block".into()));
            }
            canonical_node(&lo, &rank)
        }
    }
}

/// Certificate of rank `γ` for `½(δ_x + δ_top)` with open set `(lo, x]`,
/// where `x = lo + w^γ`.
pub fn canonical_node(lo: &Ordinal, gamma: &Ordinal) -> Result<WitnessSchema> {
    let x = lo.add(&Ordinal::omega_pow(gamma.clone()));
    let children = if gamma.is_zero() {
        Children::None
    } else if gamma.is_successor() {
        let g = gamma.predecessor()?;
        let curve = PointParam::Affine { offset: lo.clone(), exp: g.clone(), shift: 0 };
        Children::Family(Box::new(ChildFamily {
            points: curve.clone(),
            opens: IntervalParam::Blocks { of: curve },
            descent: if g.is_zero() { Descent::Leaf } else { Descent::Canonical },
            ranks: RankParam::Constant(g),
        }))
    } else {
        let curve = PointParam::Fundamental { offset: lo.clone(), limit: gamma.clone(), shift: 0 };
        Children::Family(Box::new(ChildFamily {
            points: curve.clone(),
            opens: IntervalParam::Blocks { of: curve },
            descent: Descent::Canonical,
            ranks: RankParam::Fundamental { limit: gamma.clone(), shift: 0 },
        }))
    };
    Ok(WitnessSchema {
        measure: MeasureIndex::LadderAt(x.clone()),
        open: ClopenSet::interval(lo.clone(), x),
        declared_rank: gamma.clone(),
        children,
    })
}

/// A certificate of rank `γ` over the interval model of `L_1`.
pub fn gen_l1_witness(zeta: &Ordinal, gamma: &Ordinal, eps: &Rational) -> Result<WitnessSchema> {
    if !eps.is_positive() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    if *eps > half() {
        return Err(Error::Precondition(format!("no witness exists for epsilon {eps} > 1/2")));
    }
    if *gamma >= Ordinal::omega_pow(zeta.clone()) {
        return Err(Error::Precondition(format!("gamma {gamma} is not below w^{zeta}")));
    }
    canonical_node(&Ordinal::zero(), gamma)
}

/// Exhaustive search for two members of a truncation with disjoint atom sets
/// each carrying at least `eps`; `P_1` needs infinitely many such members, so
/// finding none means `P_1` is empty on the truncation.
pub fn p1_empty_check(fam: &FamilyDescriptor, t: &Truncation, eps: &Rational) -> Result<bool> {
    if *eps <= half() {
        return Err(Error::Precondition("the emptiness check applies to epsilon > 1/2".into()));
    }
    let (_, hf) = fam.enumerate_family(t)?;
    Ok(!has_disjoint_heavy_pair(&hf.members.iter().map(|m| &m.measure).collect::<Vec<_>>(), eps))
}

/// True when two distinct measures have disjoint atom subsets of mass `>= eps`.
pub fn has_disjoint_heavy_pair(measures: &[&crate::measure::AtomicMeasure], eps: &Rational) -> bool {
    let heavy: Vec<Vec<BTreeSet<&Point>>> = measures
        .iter()
        .map(|m| {
            let atoms: Vec<(&Point, &Rational)> = m.atoms.iter().collect();
            assert!(atoms.len() < 20, "exhaustive subset search is limited to small supports");
            (1u32..(1 << atoms.len()))
                .filter_map(|mask| {
                    let set: BTreeSet<&Point> =
                        atoms.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| a.0).collect();
                    let mass: Rational =
                        atoms.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| a.1.abs()).sum();
                    (mass >= *eps).then_some(set)
                })
                .collect()
        })
        .collect();
    for a in 0..heavy.len() {
        for b in a + 1..heavy.len() {
            if heavy[a].iter().any(|s| heavy[b].iter().any(|u| s.is_disjoint(u))) {
                return true;
            }
        }
    }
    false
}
