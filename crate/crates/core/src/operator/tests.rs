use super::*;
use crate::construction::build_pair;
use crate::ordinal::Ordinal;
use crate::rational::{half, int};
use proptest::prelude::*;

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn l1() -> crate::construction::Pair {
    build_pair(&Ordinal::one(), &Ordinal::one()).unwrap()
}

fn leaf(n: u64, b: u64) -> MeasureIndex {
    MeasureIndex::node(MeasureIndex::Dirac, n, MeasureIndex::LadderAt(Ordinal::from_u64(b)))
}

#[test]
fn evaluate_examples() {
    let fam = FamilyDescriptor::Ladder { top: o("w^2") };
    let f = TestFunction::indicator(ClopenSet::interval(0, o("w*3")));
    assert_eq!(evaluate(&f, &MeasureIndex::LadderAt(o("w*3")), &fam).unwrap(), half());
    assert_eq!(evaluate(&f, &MeasureIndex::Dirac, &fam).unwrap(), int(0));
    let whole = TestFunction::indicator(ClopenSet::interval(0, o("w^2")));
    for idx in fam.enumerate(&Truncation::default()).unwrap() {
        assert_eq!(evaluate(&whole, &idx, &fam).unwrap(), int(1));
    }
    let pair = l1();
    assert!(matches!(evaluate(&f, &pair.family.dirac(), &pair.family), Err(Error::SpaceMismatch(_))));
}

#[test]
fn evaluate_on_blocks() {
    let pair = l1();
    let (idx, hf) = pair.family.enumerate_family(&Truncation::default()).unwrap();
    let atoms: BTreeSet<Point> = hf.members.iter().flat_map(|m| m.measure.atoms.keys().cloned()).collect();
    for (i, m) in idx.iter().zip(&hf.members) {
        let avoid: BTreeSet<Point> = atoms.difference(&m.h).cloned().collect();
        let f = TestFunction::indicator(neighborhood(&pair.space, &m.h, &avoid).unwrap());
        let want = if *i == pair.family.dirac() { int(1) } else { half() };
        assert_eq!(evaluate(&f, i, &pair.family).unwrap(), want, "{i}");
    }
}

#[test]
fn t_star_examples() {
    let pair = l1();
    let fam = &pair.family;
    let d = t_star(&DualCombination::new([(MeasureIndex::lift(MeasureIndex::Dirac), int(1))]), fam).unwrap();
    assert_eq!(d, AtomicMeasure::dirac(pair.space.distinguished_point()));
    let diff = DualCombination::new([(leaf(1, 1), int(1)), (leaf(2, 1), int(-1))]);
    assert_eq!(t_star(&diff, fam).unwrap().tv_norm(), int(1));
    assert_eq!(t_star(&DualCombination::default(), fam).unwrap(), AtomicMeasure::zero());
    let outside = MeasureIndex::node(MeasureIndex::Dirac, 1, MeasureIndex::LadderAt(o("w^2")));
    assert!(t_star(&DualCombination::new([(outside, int(1))]), fam).is_err());
}

#[test]
fn l1_examples() {
    let pair = l1();
    let fam = &pair.family;
    let single = DualCombination::new([(leaf(3, 2), int(-4))]);
    assert_eq!(l1_lower_bound_check(&single, fam).unwrap(), L1Check { ratio: int(1), pass: true });
    let adv = DualCombination::new([
        (fam.dirac(), rat(-1, 2)),
        (leaf(1, 1), rat(1, 2)),
        (leaf(1, 2), rat(1, 2)),
    ]);
    let r = l1_lower_bound_check(&adv, fam).unwrap();
    assert_eq!(r.ratio, rat(1, 3));
    assert!(r.pass);
    assert!(l1_lower_bound_check(&DualCombination::default(), fam).is_err());
    let report = l1_batch(fam, &Truncation { max_branch: 7, depth: 3, probes: 7 }, 1, 300, Execution::Parallel).unwrap();
    assert_eq!(report.members, 50);
    assert_eq!(report.failures, 0);
    assert!(report.isometry);
    assert_eq!(report, l1_batch(fam, &Truncation { max_branch: 7, depth: 3, probes: 7 }, 1, 300, Execution::Sequential).unwrap());
}

#[test]
fn disjoint_basis_examples() {
    let pair = l1();
    let basis = disjoint_basis(&pair.family, &Truncation::default()).unwrap();
    assert_eq!(basis.len(), 7);
    for r in &basis {
        assert_eq!(r.measure.atoms.len(), 1);
        assert_eq!(r.measure.total_mass(), int(1));
    }
    assert!(isometry_holds(&basis[..2], &[int(1), int(-1)]));
    let c: Vec<Rational> = (0..7).map(|i| rat(i - 3, i + 1)).collect();
    assert!(isometry_holds(&basis, &c));
    let deeper = build_pair(&Ordinal::one(), &o("w")).unwrap();
    let basis = disjoint_basis(&deeper.family, &Truncation::default()).unwrap();
    let c: Vec<Rational> = (0..basis.len() as i64).map(|i| rat(i % 5 - 2, 3)).collect();
    assert!(isometry_holds(&basis, &c));
}

#[test]
fn preimage_examples() {
    let pair = l1();
    let t = Truncation::default();
    let members = pair.family.enumerate(&t).unwrap();
    let zero: BTreeMap<_, _> = members.iter().map(|m| (m.clone(), int(0))).collect();
    assert_eq!(solve_preimage(&zero, &pair.family, &pair.space).unwrap(), TestFunction::zero());
    let root_only = BTreeMap::from([(pair.family.dirac(), int(1))]);
    let f = solve_preimage(&root_only, &pair.family, &pair.space).unwrap();
    assert_eq!(f.terms.len(), 1);
    assert_eq!(f.terms[0].coeff, int(1));
    assert!(f.terms[0].set.contains(&pair.space.distinguished_point()));
    // A leaf without its root is not closed.
    let open_family = BTreeMap::from([(leaf(1, 1), int(1))]);
    assert!(solve_preimage(&open_family, &pair.family, &pair.space).is_err());
}

#[test]
fn preimage_round_trip_deep() {
    let pair = build_pair(&Ordinal::one(), &o("2")).unwrap();
    let members = pair.family.enumerate(&Truncation::default()).unwrap();
    let g: BTreeMap<_, _> = members.iter().enumerate().map(|(i, m)| (m.clone(), rat(i as i64 % 7 - 3, 2))).collect();
    let f = solve_preimage(&g, &pair.family, &pair.space).unwrap();
    for (m, want) in &g {
        assert_eq!(evaluate(&f, m, &pair.family).unwrap(), *want);
    }
}

#[test]
fn json_shapes() {
    let f = TestFunction { terms: vec![Term { set: ClopenSet::interval(0, 3), coeff: rat(1, 2) }] };
    let text = serde_json::to_string(&f).unwrap();
    assert!(text.starts_with(r#"[{"set":"#), "{text}");
    assert!(text.contains(r#""coeff":"1/2""#));
    assert_eq!(serde_json::from_str::<TestFunction>(&text).unwrap(), f);
    let c = DualCombination::new([(MeasureIndex::Dirac, int(2)), (MeasureIndex::LadderAt(o("w")), rat(-1, 3))]);
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<DualCombination>(&text).unwrap(), c);
}

fn arb_coeff() -> impl Strategy<Value = Rational> {
    (-6i64..7, 1i64..4).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #[test]
    fn evaluate_is_linear(a in arb_coeff(), b in arb_coeff(), lo1 in 0u64..6, hi1 in 1u64..9, lo2 in 0u64..6, hi2 in 1u64..9, x in 1u64..9) {
        let fam = FamilyDescriptor::Ladder { top: o("w") };
        let f = TestFunction::indicator(ClopenSet::interval(lo1, hi1));
        let g = TestFunction::indicator(ClopenSet::interval(lo2, hi2));
        let idx = MeasureIndex::LadderAt(Ordinal::from_u64(x));
        let lhs = evaluate(&f.scale(&a).plus(&g.scale(&b)), &idx, &fam).unwrap();
        let rhs = &a * evaluate(&f, &idx, &fam).unwrap() + &b * evaluate(&g, &idx, &fam).unwrap();
        prop_assert_eq!(lhs, rhs);
        let mu = fam.materialize(&idx).unwrap();
        let nu = fam.materialize(&MeasureIndex::Dirac).unwrap();
        prop_assert_eq!(
            f.integrate(&mu.scale(&a).plus(&nu.scale(&b))),
            &a * f.integrate(&mu) + &b * f.integrate(&nu)
        );
    }

    #[test]
    fn norm_sandwich(seed in 0u64..1000) {
        let pair = build_pair(&Ordinal::one(), &o("2")).unwrap();
        let members = pair.family.enumerate(&Truncation { max_branch: 2, depth: 2, probes: 2 }).unwrap();
        let mut rng = crate::rng::stream(seed, 0);
        let c = crate::measure::random_coeffs(&mut rng, members.len());
        let dual = DualCombination::new(members.into_iter().zip(c));
        prop_assume!(!dual.0.is_empty());
        let r = l1_lower_bound_check(&dual, &pair.family).unwrap();
        prop_assert!(r.pass);
        prop_assert!(r.ratio <= Rational::one());
    }
}
