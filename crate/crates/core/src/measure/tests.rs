use super::*;
use proptest::prelude::*;

fn p(n: u64) -> Point {
    Point::ord(n)
}

/// `sup Σ f dμ` over `f: atoms -> {-1, 1}`.
fn tv_oracle(m: &AtomicMeasure) -> Rational {
    let atoms: Vec<&Rational> = m.atoms.values().collect();
    assert!(atoms.len() < 16);
    (0u32..1 << atoms.len())
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .map(|(i, w)| if mask & (1 << i) != 0 { (*w).clone() } else { -(*w).clone() })
                .sum::<Rational>()
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

#[test]
fn tv_norm_examples() {
    let d = AtomicMeasure::dirac(p(1)).plus(&AtomicMeasure::dirac(p(2)).scale(&int(-1)));
    assert_eq!(d.tv_norm(), int(2));
    let t = p(9);
    let half_pair = AtomicMeasure::from_atoms([(p(1), rat(1, 2)), (t.clone(), rat(1, 2))]);
    assert_eq!(half_pair.plus(&AtomicMeasure::dirac(t).scale(&int(-1))).tv_norm(), int(1));
    let (fam, c) = adversarial_family();
    let terms: Vec<(Rational, AtomicMeasure)> = c.iter().cloned().zip(fam.members.iter().map(|m| m.measure.clone())).collect();
    assert_eq!(tv_norm(&terms), rat(1, 2));
}

#[test]
fn zero_atoms_are_dropped() {
    let mut m = AtomicMeasure::dirac(p(1));
    m.add_atom(p(1), int(-1));
    assert!(m.atoms.is_empty());
    assert_eq!(m, AtomicMeasure::zero());
    let json = serde_json::to_string(&AtomicMeasure::from_atoms([(p(2), rat(1, 3))])).unwrap();
    assert_eq!(serde_json::from_str::<AtomicMeasure>(&json).unwrap().weight(&p(2)), rat(1, 3));
}

fn pair_family(mu: AtomicMeasure, mu_h: &[u64], nu: AtomicMeasure, nu_h: &[u64]) -> HFamily {
    let member = |m, h: &[u64]| HMember { label: String::new(), measure: m, h: h.iter().map(|x| p(*x)).collect(), declared_successor: None };
    HFamily { members: vec![member(mu, mu_h), member(nu, nu_h)], epsilon: rat(1, 2) }
}

#[test]
fn succ_prime_root_case() {
    let mu = AtomicMeasure::from_atoms([(p(1), rat(1, 2)), (p(9), rat(1, 2))]);
    let fam = pair_family(mu, &[1], AtomicMeasure::dirac(p(9)), &[9]);
    let strict = fam.succ_prime(0, 1, SuccMode::Strict);
    assert!(!strict.holds);
    assert_eq!((strict.a, strict.bound), (Some(rat(1, 2)), Some(rat(1, 4))));
    let relaxed = fam.succ_prime(0, 1, SuccMode::Relaxed);
    assert!(relaxed.holds);
    assert_eq!((relaxed.a, relaxed.bound), (Some(rat(1, 2)), Some(rat(1, 2))));
    assert!(!fam.succ_prime(1, 0, SuccMode::Relaxed).holds);
    assert!(!fam.succ_prime(0, 0, SuccMode::Relaxed).holds);
}

#[test]
fn succ_prime_rejections() {
    // Successor charges the member's block.
    let mu = AtomicMeasure::from_atoms([(p(1), rat(1, 2)), (p(2), rat(1, 2))]);
    let nu = AtomicMeasure::from_atoms([(p(2), rat(3, 4)), (p(1), rat(1, 4))]);
    let fam = pair_family(mu, &[1], nu, &[2]);
    let c = fam.succ_prime(0, 1, SuccMode::Relaxed);
    assert!(!c.holds);
    assert_eq!(c.reason.as_deref(), Some("successor charges the block of the member"));
    // Disjoint supports: a would be 0.
    let fam = pair_family(AtomicMeasure::dirac(p(1)), &[1], AtomicMeasure::dirac(p(2)), &[2]);
    assert!(!fam.succ_prime(0, 1, SuccMode::Relaxed).holds);
    assert!(!fam.succ_prime(0, 1, SuccMode::Strict).holds);
}

#[test]
fn chain_partition_examples() {
    let fam = pair_family(AtomicMeasure::dirac(p(1)), &[1], AtomicMeasure::dirac(p(2)), &[2]);
    let f = chain_partition(&fam, &[int(1), int(1)], SuccMode::Relaxed).unwrap();
    assert_eq!(f.levels, vec![vec![0, 1]]);
    assert!(f.scalars.is_empty());
    let f = chain_partition(&fam, &[int(0), int(0)], SuccMode::Relaxed).unwrap();
    assert!(f.support.is_empty());
    let (fam, c) = adversarial_family();
    let f = chain_partition(&fam, &c, SuccMode::Relaxed).unwrap();
    assert_eq!(f.successor, vec![None, Some(0), Some(0)]);
    assert_eq!(f.levels, vec![vec![1, 2], vec![0]]);
    let only_leaf = chain_partition(&fam, &[int(0), int(1), int(0)], SuccMode::Relaxed).unwrap();
    assert_eq!(only_leaf.support, vec![0, 1]);
    assert!(chain_partition(&fam, &c, SuccMode::Strict).unwrap().scalars.is_empty());
}

#[test]
fn lemma_b_examples() {
    let fam = pair_family(AtomicMeasure::dirac(p(1)), &[1], AtomicMeasure::dirac(p(2)), &[2]);
    let r = lemma_b_verify(&fam, &[int(1), int(0)]).unwrap();
    assert_eq!((r.lhs, r.rhs, r.pass), (int(1), rat(1, 3), true));
    let r = lemma_b_verify(&fam, &[int(3), int(-2)]).unwrap();
    assert_eq!(r.lhs, int(5));
    let (fam, c) = adversarial_family();
    let r = lemma_b_verify(&fam, &c).unwrap();
    assert_eq!((r.lhs, r.rhs, r.pass), (rat(1, 2), rat(1, 2), true));
    assert!(lemma_b_verify(&fam, &c[..2]).is_err());
}

#[test]
fn adversarial_family_is_l1_truncation() {
    let (fam, _) = adversarial_family();
    let rel = fam.check_hypotheses(SuccMode::Relaxed).unwrap();
    assert!(rel.holds, "{:?}", rel.failures);
    assert_eq!(rel.edges, vec![(1, 0), (2, 0)]);
    assert!(!fam.check_hypotheses(SuccMode::Strict).unwrap().holds);
}

#[test]
fn generator_examples() {
    let one = random_chain_family(1, 1, 3, &rat(1, 2)).unwrap();
    assert_eq!(one.len(), 1);
    assert!(one.check_hypotheses(SuccMode::Strict).unwrap().holds);
    let fam = random_chain_family(7, 50, 4, &rat(1, 2)).unwrap();
    let report = fam.check_hypotheses(SuccMode::Strict).unwrap();
    assert!(report.holds, "{:?}", report.failures);
    for (n, m) in fam.members.iter().enumerate() {
        if let Some(d) = m.declared_successor {
            assert!(fam.succ_prime(n, d, SuccMode::Strict).holds);
        }
    }
    let flat = random_chain_family(3, 20, 0, &rat(1, 2)).unwrap();
    for (i, a) in flat.members.iter().enumerate() {
        for (j, b) in flat.members.iter().enumerate() {
            if i != j {
                assert!(a.measure.mass_on(&b.h).is_zero());
            }
        }
    }
    assert_eq!(random_chain_family(7, 50, 4, &rat(1, 2)).unwrap(), fam);
    assert!(random_chain_family(1, 0, 1, &rat(1, 2)).is_err());
    assert!(random_chain_family(1, 5, 2, &int(1)).is_err());
}

#[test]
fn indexed_norm_matches_direct() {
    let fam = random_chain_family(11, 30, 4, &rat(1, 2)).unwrap();
    let dense = IndexedFamily::new(fam.members.iter().map(|m| &m.measure));
    let mut rng = stream(5, 5);
    for k in 0..50 {
        let mut c = random_coeffs(&mut rng, fam.len());
        if k % 2 == 1 {
            c[0] = rat(k, 7);
        }
        let direct = combination(c.iter().zip(fam.members.iter().map(|m| &m.measure))).tv_norm();
        assert_eq!(dense.norm(&c), direct);
    }
}

#[test]
fn suite_modes_agree() {
    let cfg = LemmaBSuite { seed: 3, families: 12, vectors: 10, max_size: 12, max_depth: 3, epsilon: rat(1, 2) };
    let a = lemma_b_suite(&cfg, Execution::Sequential).unwrap();
    let b = lemma_b_suite(&cfg, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.violations, 0);
    assert_eq!(a.hypothesis_failures, 0);
}

fn arb_measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((1u64..8, -6i64..7, 1i64..5), 0..6)
        .prop_map(|v| AtomicMeasure::from_atoms(v.into_iter().map(|(x, n, d)| (p(x), rat(n, d)))))
}

proptest! {
    #[test]
    fn tv_norm_matches_oracle(m in arb_measure()) {
        prop_assert_eq!(m.tv_norm(), tv_oracle(&m));
    }

    #[test]
    fn tv_norm_is_a_norm(a in arb_measure(), b in arb_measure(), n in -5i64..6, d in 1i64..4) {
        let c = rat(n, d);
        prop_assert!(a.plus(&b).tv_norm() <= a.tv_norm() + b.tv_norm());
        prop_assert_eq!(a.scale(&c).tv_norm(), a.tv_norm() * c.abs());
        prop_assert_eq!(a.tv_norm().is_zero(), a.atoms.is_empty());
    }

    #[test]
    fn generated_families_satisfy_the_inequality(seed in 0u64..500, size in 1usize..25, depth in 0usize..5) {
        let fam = random_chain_family(seed, size, depth, &rat(1, 2)).unwrap();
        let report = fam.check_hypotheses(SuccMode::Strict).unwrap();
        prop_assert!(report.holds, "{:?}", report.failures);
        let mut rng = stream(seed, 9);
        let c = random_coeffs(&mut rng, size);
        prop_assert!(lemma_b_verify(&fam, &c).unwrap().pass);
        let forest = chain_partition(&fam, &c, SuccMode::Strict).unwrap();
        for (n, m, a) in &forest.scalars {
            let a = crate::rational::parse_rational(a).unwrap();
            let lhs = int(2) * a * fam.members[*m].measure.mass_on(&fam.members[*m].h);
            prop_assert!(lhs <= fam.members[*n].measure.mass_on(&fam.members[*n].h));
        }
        // Irreflexive and transitive: the successor links form a forest.
        for (n, s) in forest.successor.iter().enumerate() {
            let mut cur = *s;
            let mut steps = 0;
            while let Some(x) = cur {
                prop_assert_ne!(x, n);
                cur = forest.successor[x];
                steps += 1;
                prop_assert!(steps <= size);
            }
        }
    }
}
