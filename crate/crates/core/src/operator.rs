//! The evaluation operator `T(f)(l) = l(f)` on indicator combinations, its
//! adjoint on finite dual combinations, and the finite checks built on them.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::construction::{FamilyDescriptor, MeasureIndex, Truncation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measure::{AtomicMeasure, IndexedFamily};
use crate::rational::{abs_sum, rat, Rational};
use crate::space::{neighborhood, ClopenSet, Piece, Point, SpaceDescriptor};

/// `Σ coeff · 1_set`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestFunction {
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub set: ClopenSet,
    #[serde(with = "crate::rational::serde_str")]
    pub coeff: Rational,
}

impl TestFunction {
    pub fn zero() -> TestFunction {
        TestFunction::default()
    }

    pub fn indicator(set: ClopenSet) -> TestFunction {
        TestFunction { terms: vec![Term { set, coeff: Rational::one() }] }
    }

    pub fn plus(&self, other: &TestFunction) -> TestFunction {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TestFunction { terms }
    }

    pub fn scale(&self, c: &Rational) -> TestFunction {
        TestFunction { terms: self.terms.iter().map(|t| Term { set: t.set.clone(), coeff: &t.coeff * c }).collect() }
    }

    /// `∫ f dμ` for an arbitrary signed atomic measure.
    pub fn integrate(&self, mu: &AtomicMeasure) -> Rational {
        self.terms.iter().map(|t| &t.coeff * mu.mass_in(&t.set)).sum()
    }
}

/// `Σ c_l δ_l`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualCombination(
    #[serde(with = "dual_serde")] pub BTreeMap<MeasureIndex, Rational>,
);

mod dual_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        index: MeasureIndex,
        #[serde(with = "crate::rational::serde_str")]
        coeff: Rational,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<MeasureIndex, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Entry> = m.iter().map(|(k, c)| Entry { index: k.clone(), coeff: c.clone() }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<MeasureIndex, Rational>, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        let mut out = BTreeMap::new();
        for e in v {
            *out.entry(e.index).or_insert_with(Rational::zero) += e.coeff;
        }
        out.retain(|_, c: &mut Rational| !c.is_zero());
        Ok(out)
    }
}

impl DualCombination {
    pub fn new(entries: impl IntoIterator<Item = (MeasureIndex, Rational)>) -> DualCombination {
        let mut out = BTreeMap::new();
        for (k, c) in entries {
            *out.entry(k).or_insert_with(Rational::zero) += c;
        }
        out.retain(|_, c: &mut Rational| !c.is_zero());
        DualCombination(out)
    }

    pub fn abs_sum(&self) -> Rational {
        self.0.values().map(Signed::abs).sum()
    }
}

fn check_space(set: &ClopenSet, fam: &FamilyDescriptor) -> Result<()> {
    let interval = !matches!(fam, FamilyDescriptor::Tensor { .. });
    for p in &set.pieces {
        if matches!(p, Piece::Interval { .. }) != interval {
            return Err(Error::SpaceMismatch(format!(
                "{} piece used over a {} space",
                if interval { "cylinder" } else { "interval" },
                if interval { "interval" } else { "glued" }
            )));
        }
    }
    Ok(())
}

/// `T(f)(l) = l(f)`.
pub fn evaluate(f: &TestFunction, idx: &MeasureIndex, fam: &FamilyDescriptor) -> Result<Rational> {
    for t in &f.terms {
        check_space(&t.set, fam)?;
    }
    Ok(f.integrate(&fam.materialize(idx)?))
}

/// `T*(Σ c_l δ_l) = Σ c_l l`.
pub fn t_star(c: &DualCombination, fam: &FamilyDescriptor) -> Result<AtomicMeasure> {
    let mut out = AtomicMeasure::zero();
    for (idx, coeff) in &c.0 {
        out = out.plus(&fam.materialize(idx)?.scale(coeff));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Check {
    #[serde(with = "crate::rational::serde_str")]
    pub ratio: Rational,
    pub pass: bool,
}

/// Constant of the lower norm bound at `ε = ½`.
pub fn l1_constant() -> Rational {
    rat(1, 3)
}

pub fn l1_lower_bound_check(c: &DualCombination, fam: &FamilyDescriptor) -> Result<L1Check> {
    let total = c.abs_sum();
    if total.is_zero() {
        return Err(Error::Precondition("all coefficients are zero".into()));
    }
    let ratio = t_star(c, fam)?.tv_norm() / total;
    Ok(L1Check { pass: ratio >= l1_constant(), ratio })
}

/// Many coefficient vectors against one enumerated truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1BatchReport {
    pub members: usize,
    pub vectors: u64,
    pub failures: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub min_ratio: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub max_ratio: Rational,
    pub isometry: bool,
}

/// Draws `vectors` seeded coefficient vectors over the truncation, checks
/// `1/3 <= ratio <= 1` for each, and checks the restricted basis is isometric.
pub fn l1_batch(fam: &FamilyDescriptor, t: &Truncation, seed: u64, vectors: u64, exec: Execution) -> Result<L1BatchReport> {
    let (_, hf) = fam.enumerate_family(t)?;
    let dense = IndexedFamily::new(hf.members.iter().map(|m| &m.measure));
    let n = hf.len();
    let ratios = exec.map_range(vectors, |v| {
        let mut rng = crate::rng::stream(seed, crate::rng::subkey(2, v));
        let c = crate::measure::random_coeffs(&mut rng, n);
        dense.norm(&c) / abs_sum(&c)
    });
    let lower = l1_constant();
    let failures = ratios.iter().filter(|r| **r < lower || **r > Rational::one()).count() as u64;
    let min_ratio = ratios.iter().min().cloned().unwrap_or_else(Rational::one);
    let max_ratio = ratios.iter().max().cloned().unwrap_or_else(Rational::one);
    let basis = disjoint_basis(fam, t)?;
    let restricted = IndexedFamily::new(basis.iter().map(|r| &r.measure));
    let isometry = (0..vectors.min(1000)).all(|v| {
        let mut rng = crate::rng::stream(seed, crate::rng::subkey(3, v));
        let c = crate::measure::random_coeffs(&mut rng, n);
        restricted.norm(&c) == abs_sum(&c)
    });
    Ok(L1BatchReport { members: n, vectors, failures, min_ratio, max_ratio, isometry })
}

/// `l|H_l / l(H_l)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub index: MeasureIndex,
    pub measure: AtomicMeasure,
}

/// Normalized restrictions of the truncation's members to their blocks,
/// after checking their supports are pairwise disjoint.
pub fn disjoint_basis(fam: &FamilyDescriptor, t: &Truncation) -> Result<Vec<Restriction>> {
    let (indices, hf) = fam.enumerate_family(t)?;
    let mut seen: BTreeMap<Point, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(indices.len());
    for (i, (idx, m)) in indices.into_iter().zip(&hf.members).enumerate() {
        let r = m.measure.restrict(&m.h);
        let mass = r.total_mass();
        if mass.is_zero() {
            return Err(Error::Precondition(format!("member {idx} has no mass on its block")));
        }
        for p in r.atoms.keys() {
            if let Some(j) = seen.insert(p.clone(), i) {
                return Err(Error::Overlap(format!("{p} supports restrictions {j} and {i}")));
            }
        }
        out.push(Restriction { index: idx, measure: r.scale(&(Rational::one() / mass)) });
    }
    Ok(out)
}

/// Exact isometry check `‖Σ c_l r_l‖ = Σ|c_l|`.
pub fn isometry_holds(basis: &[Restriction], coeffs: &[Rational]) -> bool {
    let dense = IndexedFamily::new(basis.iter().map(|r| &r.measure));
    dense.norm(coeffs) == abs_sum(coeffs)
}

/// A test function `f` with `l(f) = g(l)` for every member of the truncation
/// named in `g`. The members named in `g` must be closed under taking
/// members whose blocks they charge.
pub fn solve_preimage(
    g: &BTreeMap<MeasureIndex, Rational>,
    fam: &FamilyDescriptor,
    space: &SpaceDescriptor,
) -> Result<TestFunction> {
    let mut keys: Vec<MeasureIndex> = Vec::with_capacity(g.len());
    let mut values = Vec::with_capacity(g.len());
    let mut seen = BTreeSet::new();
    for (k, v) in g {
        let k = fam.canonical_index(k)?;
        if !seen.insert(k.clone()) {
            return Err(Error::Precondition(format!("{k} is named twice")));
        }
        keys.push(k);
        values.push(v.clone());
    }
    let measures: Vec<AtomicMeasure> = keys.iter().map(|k| fam.materialize(k)).collect::<Result<_>>()?;
    let blocks: Vec<BTreeSet<Point>> = keys.iter().map(|k| fam.h_set(k)).collect::<Result<_>>()?;
    let all_atoms: BTreeSet<Point> = measures.iter().flat_map(|m| m.atoms.keys().cloned()).collect();
    let owned: BTreeSet<&Point> = blocks.iter().flatten().collect();
    if let Some(p) = all_atoms.iter().find(|p| !owned.contains(p)) {
        return Err(Error::Precondition(format!("atom {p} lies in no named block; the subfamily is not closed")));
    }
    let n = keys.len();
    // U_m: clopen, contains H_m, misses every other atom in play.
    let mut opens = Vec::with_capacity(n);
    for h in &blocks {
        let avoid: BTreeSet<Point> = all_atoms.difference(h).cloned().collect();
        let targets: BTreeSet<Point> = h.intersection(&all_atoms).cloned().collect();
        opens.push(neighborhood(space, &targets, &avoid)?);
    }
    // a[l][m] = l(H_m); solved in dependency order.
    let a: Vec<Vec<Rational>> =
        measures.iter().map(|mu| blocks.iter().map(|h| mu.mass_on(h)).collect()).collect();
    let mut coeff: Vec<Option<Rational>> = vec![None; n];
    let mut remaining = n;
    while remaining > 0 {
        let mut progressed = false;
        for l in 0..n {
            if coeff[l].is_some() {
                continue;
            }
            let ready = (0..n).all(|m| m == l || a[l][m].is_zero() || coeff[m].is_some());
            if !ready {
                continue;
            }
            if a[l][l].is_zero() {
                return Err(Error::Singular(format!("{} has no mass on its own block", keys[l])));
            }
            let known: Rational =
                (0..n).filter(|m| *m != l && !a[l][*m].is_zero()).map(|m| &a[l][m] * coeff[m].as_ref().unwrap()).sum();
            coeff[l] = Some((&values[l] - known) / &a[l][l]);
            remaining -= 1;
            progressed = true;
        }
        if !progressed {
            return Err(Error::Singular("block dependencies form a cycle".into()));
        }
    }
    let f = TestFunction {
        terms: opens
            .into_iter()
            .zip(coeff)
            .map(|(set, c)| Term { set, coeff: c.unwrap() })
            .filter(|t| !t.coeff.is_zero())
            .collect(),
    };
    for ((k, mu), want) in keys.iter().zip(&measures).zip(&values) {
        if f.integrate(mu) != *want {
            return Err(Error::Singular(format!("re-verification failed at {k}")));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests;
