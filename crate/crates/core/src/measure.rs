//! Exact atomic measures, the dilation order on (measure, block) pairs, and
//! the norm inequality for families that satisfy its three hypotheses.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ordinal::Ordinal;
use crate::rational::{abs_sum, int, rat, Rational};
use crate::rng::{stream, subkey, Stream};
use crate::space::{ClopenSet, Point};

/// Finitely supported signed measure; zero atoms are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AtomicMeasure {
    pub atoms: BTreeMap<Point, Rational>,
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    point: Point,
    #[serde(with = "crate::rational::serde_str")]
    w: Rational,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<AtomRepr>,
}

impl Serialize for AtomicMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRepr {
            atoms: self.atoms.iter().map(|(p, w)| AtomRepr { point: p.clone(), w: w.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRepr::deserialize(d)?;
        Ok(AtomicMeasure::from_atoms(r.atoms.into_iter().map(|a| (a.point, a.w))))
    }
}

impl AtomicMeasure {
    pub fn zero() -> AtomicMeasure {
        AtomicMeasure::default()
    }

    pub fn dirac(p: Point) -> AtomicMeasure {
        AtomicMeasure { atoms: BTreeMap::from([(p, Rational::one())]) }
    }

    /// Sums repeated points and drops zero weights.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (Point, Rational)>) -> AtomicMeasure {
        let mut m = AtomicMeasure::zero();
        for (p, w) in atoms {
            m.add_atom(p, w);
        }
        m
    }

    pub fn add_atom(&mut self, p: Point, w: Rational) {
        let slot = self.atoms.entry(p).or_insert_with(Rational::zero);
        *slot += w;
        if slot.is_zero() {
            self.atoms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn weight(&self, p: &Point) -> Rational {
        self.atoms.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.values().cloned().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.atoms.values().all(|w| w.is_positive()) && self.total_mass().is_one()
    }

    pub fn mass_on(&self, set: &BTreeSet<Point>) -> Rational {
        set.iter().map(|p| self.weight(p)).sum()
    }

    /// `|m|(set)`.
    pub fn abs_mass_on(&self, set: &BTreeSet<Point>) -> Rational {
        set.iter().map(|p| self.weight(p).abs()).sum()
    }

    pub fn mass_in(&self, set: &ClopenSet) -> Rational {
        self.atoms.iter().filter(|(p, _)| set.contains(p)).map(|(_, w)| w.clone()).sum()
    }

    pub fn restrict(&self, set: &BTreeSet<Point>) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self.atoms.iter().filter(|(p, _)| set.contains(p)).map(|(p, w)| (p.clone(), w.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> AtomicMeasure {
        AtomicMeasure::from_atoms(self.atoms.iter().map(|(p, w)| (p.clone(), w * c)))
    }

    pub fn plus(&self, other: &AtomicMeasure) -> AtomicMeasure {
        AtomicMeasure::from_atoms(self.atoms.iter().chain(&other.atoms).map(|(p, w)| (p.clone(), w.clone())))
    }

    pub fn tv_norm(&self) -> Rational {
        abs_sum(self.atoms.values())
    }

    pub fn support(&self) -> BTreeSet<Point> {
        self.atoms.keys().cloned().collect()
    }
}

/// `Σ c_i m_i`.
pub fn combination<'a>(terms: impl IntoIterator<Item = (&'a Rational, &'a AtomicMeasure)>) -> AtomicMeasure {
    let mut acc: BTreeMap<Point, Rational> = BTreeMap::new();
    for (c, m) in terms {
        if c.is_zero() {
            continue;
        }
        for (p, w) in &m.atoms {
            *acc.entry(p.clone()).or_insert_with(Rational::zero) += c * w;
        }
    }
    acc.retain(|_, w| !w.is_zero());
    AtomicMeasure { atoms: acc }
}

pub fn tv_norm(terms: &[(Rational, AtomicMeasure)]) -> Rational {
    combination(terms.iter().map(|(c, m)| (c, m))).tv_norm()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HMember {
    pub label: String,
    pub measure: AtomicMeasure,
    pub h: BTreeSet<Point>,
    /// Successor claimed by whoever built the family, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_successor: Option<usize>,
}

/// Measures with pairwise disjoint blocks and a mass threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HFamily {
    pub members: Vec<HMember>,
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon: Rational,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccMode {
    /// Scalar bound `μ(H_μ) / (2 μ'(H_μ'))`, exactly as printed.
    Strict,
    /// Scalar bound `μ(H_μ) / μ'(H_μ')`.
    #[default]
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccCheck {
    pub holds: bool,
    #[serde(with = "opt_rat")]
    pub a: Option<Rational>,
    #[serde(with = "opt_rat")]
    pub bound: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

mod opt_rat {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| crate::rational::parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

impl HFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Blocks pairwise disjoint and every member has `μ(H) >= ε`.
    pub fn validate(&self) -> Result<()> {
        let mut owner: HashMap<&Point, usize> = HashMap::new();
        for (i, m) in self.members.iter().enumerate() {
            for p in &m.h {
                if let Some(j) = owner.insert(p, i) {
                    return Err(Error::Overlap(format!("{p} lies in the blocks of members {j} and {i}")));
                }
            }
            if m.measure.mass_on(&m.h) < self.epsilon {
                return Err(Error::Precondition(format!("member {i} has block mass below epsilon")));
            }
        }
        Ok(())
    }

    /// Point to the member whose block contains it.
    pub fn owners(&self) -> HashMap<Point, usize> {
        let mut out = HashMap::new();
        for (i, m) in self.members.iter().enumerate() {
            for p in &m.h {
                out.insert(p.clone(), i);
            }
        }
        out
    }

    pub fn succ_prime(&self, i: usize, j: usize, mode: SuccMode) -> SuccCheck {
        self.succ_prime_with(&self.owners(), i, j, mode)
    }

    fn succ_prime_with(&self, owners: &HashMap<Point, usize>, i: usize, j: usize, mode: SuccMode) -> SuccCheck {
        let fail = |a, bound, reason: &str| SuccCheck { holds: false, a, bound, reason: Some(reason.into()) };
        if i == j {
            return fail(None, None, "a member is never its own successor");
        }
        let (mu, nu) = (&self.members[i], &self.members[j]);
        let nu_h = nu.measure.mass_on(&nu.h);
        if nu_h.is_zero() {
            return fail(None, None, "successor has no mass on its block");
        }
        let mut bound = (mu.measure.mass_on(&mu.h) / &nu_h).abs();
        if mode == SuccMode::Strict {
            bound /= int(2);
        }
        if !nu.measure.abs_mass_on(&mu.h).is_zero() {
            return fail(None, Some(bound), "successor charges the block of the member");
        }
        let outside = |p: &Point| owners.get(p).is_some_and(|o| *o != i);
        let mut a: Option<Rational> = None;
        let points: BTreeSet<&Point> =
            mu.measure.atoms.keys().chain(nu.measure.atoms.keys()).filter(|p| outside(p)).collect();
        for p in points {
            let (x, y) = (mu.measure.weight(p), nu.measure.weight(p));
            match (&a, y.is_zero()) {
                (_, true) if !x.is_zero() => return fail(None, Some(bound), "restrictions are not proportional"),
                (_, true) => {}
                (None, false) => a = Some(x / y),
                (Some(r), false) => {
                    if x != r * &y {
                        return fail(None, Some(bound), "restrictions are not proportional");
                    }
                }
            }
        }
        match a {
            None => fail(None, Some(bound), "restrictions vanish"),
            Some(a) if !a.is_positive() => fail(Some(a), Some(bound), "scalar is not positive"),
            Some(a) if a > bound => fail(Some(a), Some(bound), "scalar exceeds the bound"),
            Some(a) => SuccCheck { holds: true, a: Some(a), bound: Some(bound), reason: None },
        }
    }

    /// The `≻'` successor of every member, if any.
    pub fn successors(&self, mode: SuccMode) -> Result<Vec<Option<(usize, Rational)>>> {
        let owners = self.owners();
        let mut charged: HashMap<&Point, Vec<usize>> = HashMap::new();
        for (j, m) in self.members.iter().enumerate() {
            for p in m.measure.atoms.keys() {
                charged.entry(p).or_default().push(j);
            }
        }
        let mut out = Vec::with_capacity(self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            // Any successor must charge the first atom of `μ_i` that lies in another block.
            let probe = m.measure.atoms.keys().find(|p| owners.get(*p).is_some_and(|o| *o != i));
            let Some(probe) = probe else {
                out.push(None);
                continue;
            };
            let mut found = Vec::new();
            for &j in charged.get(probe).map(Vec::as_slice).unwrap_or(&[]) {
                if j == i {
                    continue;
                }
                let c = self.succ_prime_with(&owners, i, j, mode);
                if c.holds {
                    found.push((j, c.a.expect("holding check carries a scalar")));
                }
            }
            match found.len() {
                0 => out.push(None),
                1 => out.push(found.pop()),
                _ => {
                    return Err(Error::NonUniqueSuccessor {
                        member: i,
                        candidates: found.into_iter().map(|(j, _)| j).collect(),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Checks the three hypotheses of the norm inequality in the given mode.
    pub fn check_hypotheses(&self, mode: SuccMode) -> Result<HypothesisReport> {
        self.validate()?;
        let succ = self.successors(mode)?;
        let forest = Forest::new(&succ)?;
        let mut failures = Vec::new();
        for (n, m) in self.members.iter().enumerate() {
            if succ[n].is_none() {
                for (k, other) in self.members.iter().enumerate() {
                    if k != n && !m.measure.mass_on(&other.h).is_zero() {
                        failures.push(format!("member {n} has no successor but charges block {k}"));
                        break;
                    }
                }
            }
            for (k, other) in self.members.iter().enumerate() {
                if k != n && !m.measure.mass_on(&other.h).is_zero() && !forest.strictly_above(n, k) {
                    failures.push(format!("member {n} charges block {k} without dominating it"));
                }
            }
            if let (Some(d), Some((s, _))) = (m.declared_successor, &succ[n]) {
                if d != *s {
                    failures.push(format!("member {n} declares successor {d} but {s} was found"));
                }
            }
            if m.declared_successor.is_some() && succ[n].is_none() {
                failures.push(format!("member {n} declares a successor but none holds"));
            }
        }
        Ok(HypothesisReport { holds: failures.is_empty(), edges: forest.edges(), failures })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub holds: bool,
    pub edges: Vec<(usize, usize)>,
    pub failures: Vec<String>,
}

/// Successor links with precomputed depths.
#[derive(Clone, Debug)]
struct Forest {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl Forest {
    fn new(succ: &[Option<(usize, Rational)>]) -> Result<Forest> {
        let parent: Vec<Option<usize>> = succ.iter().map(|s| s.as_ref().map(|(j, _)| *j)).collect();
        let n = parent.len();
        let mut depth: Vec<Option<usize>> = vec![None; n];
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = start;
            let base = loop {
                if let Some(d) = depth[cur] {
                    break d;
                }
                if path.contains(&cur) {
                    return Err(Error::Cycle(cur));
                }
                path.push(cur);
                match parent[cur] {
                    Some(p) => cur = p,
                    None => {
                        depth[cur] = Some(0);
                        path.pop();
                        break 0;
                    }
                }
            };
            for (off, node) in path.iter().rev().enumerate() {
                depth[*node] = Some(base + off + 1);
            }
        }
        Ok(Forest { parent, depth: depth.into_iter().map(|d| d.expect("every node resolved")).collect() })
    }

    /// `a ≻ b`: `b` is reached from `a` by one or more successor links.
    fn strictly_above(&self, a: usize, b: usize) -> bool {
        let mut cur = a;
        while let Some(p) = self.parent[cur] {
            if p == b {
                return true;
            }
            cur = p;
        }
        false
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.parent.iter().enumerate().filter_map(|(i, p)| p.map(|p| (i, p))).collect()
    }
}

/// The successor forest restricted to the members that matter for a given
/// coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainForest {
    pub successor: Vec<Option<usize>>,
    /// Members dominated by (or equal to) some member with nonzero coefficient.
    pub support: Vec<usize>,
    /// `levels[j]` is `F_j`; roots sit in the last level.
    pub levels: Vec<Vec<usize>>,
    /// `(n, n', a_{n,n'})` for every successor edge.
    pub scalars: Vec<(usize, usize, String)>,
}

pub fn chain_partition(fam: &HFamily, coeffs: &[Rational], mode: SuccMode) -> Result<ChainForest> {
    if coeffs.len() != fam.len() {
        return Err(Error::Precondition(format!("{} coefficients for {} members", coeffs.len(), fam.len())));
    }
    let succ = fam.successors(mode)?;
    let forest = Forest::new(&succ)?;
    let mut in_f = vec![false; fam.len()];
    for (n, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut cur = Some(n);
        while let Some(x) = cur {
            if in_f[x] {
                break;
            }
            in_f[x] = true;
            cur = forest.parent[x];
        }
    }
    let support: Vec<usize> = (0..fam.len()).filter(|n| in_f[*n]).collect();
    let j_max = support.iter().map(|n| forest.depth[*n]).max();
    let mut levels = Vec::new();
    if let Some(j_max) = j_max {
        levels = vec![Vec::new(); j_max + 1];
        for &n in &support {
            levels[j_max - forest.depth[n]].push(n);
        }
    }
    let scalars = succ
        .iter()
        .enumerate()
        .filter_map(|(n, s)| s.as_ref().map(|(m, a)| (n, *m, a.to_string())))
        .collect();
    Ok(ChainForest { successor: forest.parent.clone(), support, levels, scalars })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaBReport {
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: Rational,
    pub pass: bool,
}

/// `‖Σ c_n μ_n‖` against `(2ε/3) Σ |c_n|`.
pub fn lemma_b_verify(fam: &HFamily, coeffs: &[Rational]) -> Result<LemmaBReport> {
    if coeffs.len() != fam.len() {
        return Err(Error::Precondition(format!("{} coefficients for {} members", coeffs.len(), fam.len())));
    }
    let lhs = combination(coeffs.iter().zip(fam.members.iter().map(|m| &m.measure))).tv_norm();
    let rhs = int(2) * &fam.epsilon / int(3) * abs_sum(coeffs);
    Ok(LemmaBReport { pass: lhs >= rhs, lhs, rhs })
}

/// Dense form of a family for repeated norm evaluations.
///
/// Each atom column is stored as integer numerators over the column's common
/// denominator, so integer coefficient vectors are handled without any gcd
/// work; columns sharing a denominator are summed before the single division.
#[derive(Clone, Debug)]
pub struct IndexedFamily {
    pub atoms: usize,
    pub members: Vec<Vec<(usize, Rational)>>,
    groups: Vec<DenomGroup>,
    /// Least common multiple of the group denominators.
    common: BigInt,
}

type Column = (Option<Vec<(usize, i64)>>, Vec<(usize, BigInt)>);

#[derive(Clone, Debug)]
struct DenomGroup {
    denom: BigInt,
    /// `common / denom`.
    lift: BigInt,
    /// Per column: `(member, numerator)`, or `None` if some numerator is not an `i64`.
    columns: Vec<Column>,
}

impl IndexedFamily {
    pub fn new<'a>(measures: impl IntoIterator<Item = &'a AtomicMeasure>) -> IndexedFamily {
        let mut ids: HashMap<&'a Point, usize> = HashMap::new();
        let mut members: Vec<Vec<(usize, Rational)>> = Vec::new();
        for m in measures {
            let row = m
                .atoms
                .iter()
                .map(|(p, w)| {
                    let next = ids.len();
                    (*ids.entry(p).or_insert(next), w.clone())
                })
                .collect();
            members.push(row);
        }
        let atoms = ids.len();
        let mut cols: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); atoms];
        for (i, row) in members.iter().enumerate() {
            for (a, w) in row {
                cols[*a].push((i, w));
            }
        }
        let mut by_denom: BTreeMap<BigInt, DenomGroup> = BTreeMap::new();
        for col in cols {
            let denom = col.iter().fold(BigInt::one(), |d, (_, w)| d.lcm(w.denom()));
            let big: Vec<(usize, BigInt)> =
                col.iter().map(|(i, w)| (*i, w.numer() * (&denom / w.denom()))).collect();
            let small = big.iter().map(|(i, n)| n.to_i64().map(|n| (*i, n))).collect();
            by_denom
                .entry(denom.clone())
                .or_insert_with(|| DenomGroup { denom, lift: BigInt::one(), columns: Vec::new() })
                .columns
                .push((small, big));
        }
        let mut groups: Vec<DenomGroup> = by_denom.into_values().collect();
        let common = groups.iter().fold(BigInt::one(), |l, g| l.lcm(&g.denom));
        for g in &mut groups {
            g.lift = &common / &g.denom;
        }
        IndexedFamily { atoms, members, groups, common }
    }

    /// `‖Σ c_i μ_i‖`.
    pub fn norm(&self, coeffs: &[Rational]) -> Rational {
        let ints: Option<Vec<i64>> =
            coeffs.iter().map(|c| if c.is_integer() { c.numer().to_i64() } else { None }).collect();
        let Some(ints) = ints else {
            return self.norm_rational(coeffs);
        };
        let mut total = BigInt::zero();
        for g in &self.groups {
            let mut small_sum: i128 = 0;
            let mut big_sum = BigInt::zero();
            for (small, big) in &g.columns {
                let fast = small.as_ref().and_then(|col| {
                    col.iter().try_fold(0i128, |acc, (i, n)| {
                        let c = *ints.get(*i)? as i128;
                        acc.checked_add(c.checked_mul(*n as i128)?)
                    })
                });
                match fast.and_then(|v| small_sum.checked_add(v.checked_abs()?)) {
                    Some(next) => small_sum = next,
                    None => {
                        let v: BigInt = big.iter().filter_map(|(i, n)| ints.get(*i).map(|c| n * c)).sum();
                        big_sum += v.abs();
                    }
                }
            }
            let sum = big_sum + BigInt::from(small_sum);
            if !sum.is_zero() {
                total += sum * &g.lift;
            }
        }
        Rational::new(total, self.common.clone())
    }

    fn norm_rational(&self, coeffs: &[Rational]) -> Rational {
        let mut acc = vec![Rational::zero(); self.atoms];
        for (c, row) in coeffs.iter().zip(&self.members) {
            if c.is_zero() {
                continue;
            }
            for (i, w) in row {
                acc[*i] += c * w;
            }
        }
        abs_sum(&acc)
    }
}

/// A family satisfying the strict hypotheses by construction.
///
/// Member `i` owns a fresh atom `ν_i = Ord(i+1)` and `H_i = {ν_i}`. A root
/// is `δ_{ν_i}`; a child of `p` is `w δ_{ν_i} + (1-w) μ_p` with
/// `max(ε, 2w_p/(1+2w_p)) <= w < 1`, which is exactly what the strict
/// scalar bound `1 - w <= w / (2 w_p)` needs.
pub fn random_chain_family(seed: u64, size: usize, depth: usize, epsilon: &Rational) -> Result<HFamily> {
    if size == 0 {
        return Err(Error::Infeasible("size must be positive".into()));
    }
    if !epsilon.is_positive() || *epsilon > Rational::one() {
        return Err(Error::Infeasible(format!("epsilon {epsilon} outside (0, 1]")));
    }
    if epsilon.is_one() && depth > 0 {
        return Err(Error::Infeasible("children need epsilon < 1".into()));
    }
    let mut rng = stream(seed, 0x6c65_6d6d_6162);
    let mut members: Vec<HMember> = Vec::with_capacity(size);
    let mut weights: Vec<Rational> = Vec::with_capacity(size);
    let mut depths: Vec<usize> = Vec::with_capacity(size);
    for i in 0..size {
        let atom = Point::ord(i as u64 + 1);
        let eligible: Vec<usize> = (0..i).filter(|p| depths[*p] < depth).collect();
        let parent = if eligible.is_empty() || rng.random_bool(0.25) {
            None
        } else {
            Some(eligible[rng.random_range(0..eligible.len())])
        };
        let (measure, w, d) = match parent {
            None => (AtomicMeasure::dirac(atom.clone()), Rational::one(), 0),
            Some(p) => {
                let wp = &weights[p];
                let floor = (int(2) * wp) / (Rational::one() + int(2) * wp);
                let lower = if floor > *epsilon { floor } else { epsilon.clone() };
                let w = pick_weight(&mut rng, &lower);
                let m = AtomicMeasure::dirac(atom.clone())
                    .scale(&w)
                    .plus(&members[p].measure.scale(&(Rational::one() - &w)));
                (m, w, depths[p] + 1)
            }
        };
        members.push(HMember {
            label: format!("m{i}"),
            measure,
            h: BTreeSet::from([atom]),
            declared_successor: parent,
        });
        weights.push(w);
        depths.push(d);
    }
    Ok(HFamily { members, epsilon: epsilon.clone() })
}

/// A weight in `[lower, 1)`, sometimes exactly `lower`.
fn pick_weight(rng: &mut Stream, lower: &Rational) -> Rational {
    if rng.random_bool(0.25) {
        return lower.clone();
    }
    let q = rng.random_range(2..=9i64);
    let k = rng.random_range(0..q);
    lower + (Rational::one() - lower) * rat(k, q)
}

/// Integer coefficients in `[-9, 9]` on a random subset, never all zero.
pub fn random_coeffs(rng: &mut Stream, len: usize) -> Vec<Rational> {
    let density = rng.random_range(1..=4);
    let mut c: Vec<Rational> = (0..len)
        .map(|_| if rng.random_range(0..4) < density { int(rng.random_range(-9..=9)) } else { Rational::zero() })
        .collect();
    if c.iter().all(Zero::is_zero) {
        let i = rng.random_range(0..len);
        c[i] = int(if rng.random_bool(0.5) { 1 } else { -1 });
    }
    c
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaBSuiteReport {
    pub families: u64,
    pub vectors: u64,
    pub hypothesis_failures: u64,
    pub violations: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub min_ratio: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub bound: Rational,
}

#[derive(Clone, Debug)]
pub struct LemmaBSuite {
    pub seed: u64,
    pub families: u64,
    pub vectors: u64,
    pub max_size: usize,
    pub max_depth: usize,
    pub epsilon: Rational,
}

/// Runs the randomized suite; each family draws from its own stream so the
/// outcome does not depend on the execution mode.
pub fn lemma_b_suite(cfg: &LemmaBSuite, exec: Execution) -> Result<LemmaBSuiteReport> {
    let bound = int(2) * &cfg.epsilon / int(3);
    let results = exec.map_range(cfg.families, |f| -> Result<(bool, u64, Rational)> {
        let mut rng = stream(cfg.seed, subkey(1, f));
        let size = rng.random_range(1..=cfg.max_size);
        let depth = rng.random_range(0..=cfg.max_depth);
        let fam = random_chain_family(subkey(cfg.seed, f), size, depth, &cfg.epsilon)?;
        let ok = fam.check_hypotheses(SuccMode::Strict)?.holds;
        let dense = IndexedFamily::new(fam.members.iter().map(|m| &m.measure));
        let mut violations = 0;
        let mut min_ratio: Option<Rational> = None;
        for _ in 0..cfg.vectors {
            let c = random_coeffs(&mut rng, size);
            let ratio = dense.norm(&c) / abs_sum(&c);
            if ratio < bound {
                violations += 1;
            }
            if min_ratio.as_ref().is_none_or(|m| ratio < *m) {
                min_ratio = Some(ratio);
            }
        }
        Ok((ok, violations, min_ratio.unwrap_or_else(Rational::one)))
    });
    let mut report = LemmaBSuiteReport {
        families: cfg.families,
        vectors: cfg.families * cfg.vectors,
        hypothesis_failures: 0,
        violations: 0,
        min_ratio: Rational::one(),
        bound,
    };
    for r in results {
        let (ok, v, m) = r?;
        report.hypothesis_failures += u64::from(!ok);
        report.violations += v;
        if m < report.min_ratio {
            report.min_ratio = m;
        }
    }
    Ok(report)
}

/// The three-member truncation of the first branch family used to show the
/// constant is attained: `δ_t`, `½(δ_1 + δ_t)`, `½(δ_2 + δ_t)` on `[1, w]`.
pub fn adversarial_family() -> (HFamily, Vec<Rational>) {
    let t = Point::Ord(Ordinal::omega());
    let ladder = |b: u64| {
        AtomicMeasure::from_atoms([(Point::ord(b), rat(1, 2)), (t.clone(), rat(1, 2))])
    };
    let fam = HFamily {
        members: vec![
            HMember { label: "root".into(), measure: AtomicMeasure::dirac(t.clone()), h: BTreeSet::from([t.clone()]), declared_successor: None },
            HMember { label: "b1".into(), measure: ladder(1), h: BTreeSet::from([Point::ord(1)]), declared_successor: Some(0) },
            HMember { label: "b2".into(), measure: ladder(2), h: BTreeSet::from([Point::ord(2)]), declared_successor: Some(0) },
        ],
        epsilon: rat(1, 2),
    };
    (fam, vec![rat(-1, 2), rat(1, 2), rat(1, 2)])
}

#[cfg(test)]
mod tests;
