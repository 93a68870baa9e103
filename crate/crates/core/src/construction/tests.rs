use super::*;
use crate::rational::rat;
use num_traits::Signed;

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn one() -> Ordinal {
    Ordinal::one()
}

#[test]
fn enumeration_sizes() {
    let t = Truncation::default();
    let size = |a: &str, t: &Truncation| build_pair(&one(), &o(a)).unwrap().family.enumerate(t).unwrap().len();
    // Branch n of K_1 is [1, w^n]; with two probes every branch contributes 2
    // non-distinguished ladder members: 1 + 3*2 = 7.
    assert_eq!(size("1", &t), 7);
    assert_eq!(size("2", &t), 49);
    assert_eq!(size("3", &t), 343);
    assert_eq!(size("w", &t), 103);
    assert_eq!(size("1", &Truncation { max_branch: 7, depth: 3, probes: 7 }), 50);
}

#[test]
fn ladder_probe_order() {
    assert_eq!(ladder_probes(&o("w^5"), 6), vec![o("1"), o("w"), o("w^2"), o("w^3"), o("2"), o("3")]);
    assert_eq!(ladder_probes(&o("w"), 3), vec![o("1"), o("2"), o("3")]);
    assert_eq!(ladder_probes(&o("3"), 5), vec![o("1"), o("2")]);
}

#[test]
fn members_are_probabilities_with_disjoint_blocks() {
    for a in ["1", "2", "w", "w+1"] {
        let pair = build_pair(&one(), &o(a)).unwrap();
        let (idx, fam) = pair.family.enumerate_family(&Truncation::default()).unwrap();
        fam.validate().unwrap();
        for (i, m) in idx.iter().zip(&fam.members) {
            assert!(m.measure.is_probability(), "{i}");
            let denom = num_bigint::BigInt::from(2u32).pow(i.depth());
            for w in m.measure.atoms.values() {
                assert!(w.is_positive());
                assert_eq!(&denom % w.denom(), num_bigint::BigInt::ZERO, "{i}: weight {w}");
            }
            for p in m.measure.atoms.keys() {
                assert!(pair.space.contains_point(p), "{p} not in K_{a}");
            }
        }
    }
}

#[test]
fn measure_rank_is_top_rank_of_block() {
    for a in ["1", "2", "w"] {
        let pair = build_pair(&o("2"), &o(a)).unwrap();
        for idx in pair.family.enumerate(&Truncation::default()).unwrap() {
            let h = pair.family.h_set(&idx).unwrap();
            let top = h.iter().map(|p| pair.space.cb_rank(p).unwrap()).max().unwrap();
            assert_eq!(pair.family.measure_rank(&idx).unwrap(), top, "{idx}");
        }
    }
}

#[test]
fn dirac_is_point_mass_at_distinguished_point() {
    for a in ["1", "3", "w*2"] {
        let pair = build_pair(&one(), &o(a)).unwrap();
        let d = pair.family.materialize(&pair.family.dirac()).unwrap();
        assert_eq!(d, AtomicMeasure::dirac(pair.space.distinguished_point()));
        assert_eq!(pair.family.canonical_index(&MeasureIndex::Dirac).unwrap(), pair.family.dirac());
    }
}

#[test]
fn canonical_rewrites() {
    let pair = build_pair(&one(), &one()).unwrap();
    let fam = &pair.family;
    let top_of_branch = MeasureIndex::node(MeasureIndex::Dirac, 2, MeasureIndex::LadderAt(o("w^2")));
    assert_eq!(fam.canonical_index(&top_of_branch).unwrap(), MeasureIndex::lift(MeasureIndex::Dirac));
    let node = MeasureIndex::node(MeasureIndex::Dirac, 2, MeasureIndex::LadderAt(o("w")));
    assert_eq!(fam.canonical_index(&node).unwrap(), node);
    assert!(fam.canonical_index(&MeasureIndex::node(MeasureIndex::Dirac, 1, MeasureIndex::LadderAt(o("w^2")))).is_err());
    assert!(fam.canonical_index(&MeasureIndex::LadderAt(one())).is_err());
    let m = fam.materialize(&node).unwrap();
    let leaf = Point::ext(Point::ord(1), MeasureIndex::Dirac, 2, Point::Ord(o("w")));
    assert_eq!(m.weight(&leaf), rat(1, 2));
    assert_eq!(m.weight(&Point::base(Point::ord(1))), rat(1, 2));
    assert_eq!(node.to_string(), "N[D;2;L[w]]");
}

#[test]
fn build_pair_rejects_bad_input() {
    assert!(build_pair(&Ordinal::zero(), &one()).is_err());
    assert!(build_pair(&one(), &Ordinal::zero()).is_err());
    assert!(matches!(build_pair(&one(), &Ordinal::from_u64(MAX_SUCCESSOR_STEPS + 1)), Err(Error::ResourceBound(_))));
}

#[test]
fn tensor_checks_branches() {
    let ok = tensor(&Pair::point(), BranchGenerator::ZetaLadder { zeta: one() }).unwrap();
    assert_eq!(ok, build_pair(&one(), &one()).unwrap());
    let bad = Pair { space: SpaceDescriptor::interval(2), family: FamilyDescriptor::PointMassOnly };
    assert!(tensor(&bad, BranchGenerator::ZetaLadder { zeta: one() }).is_err());
    assert!(tensor(&Pair::point(), BranchGenerator::SuccessorPad { pair: Arc::new(bad) }).is_err());
}

#[test]
fn successor_step_adds_one_block() {
    let z = one();
    for a in ["1", "2", "w", "w+1", "w^2"] {
        let alpha = o(a);
        let here = build_pair(&z, &alpha).unwrap();
        let next = build_pair(&z, &alpha.successor()).unwrap();
        let w = Ordinal::omega_pow(z.clone());
        assert_eq!(next.space.space_rank().unwrap(), here.space.space_rank().unwrap().add(&w));
    }
}
