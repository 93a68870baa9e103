//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the pass/fail lines always reach stdout.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::o;
use common::small::Small;
use ordwb::construction::{build_pair, Truncation};
use ordwb::measure::{adversarial_family, lemma_b_suite, lemma_b_verify, LemmaBSuite};
use ordwb::operator::{evaluate, l1_batch, solve_preimage};
use ordwb::rational::{half, parse_rational, rat};
use ordwb::rng::{stream, subkey};
use ordwb::wolfe::{check_inductive_step, gen_l1_witness, l1_interval_model, p1_empty_check, rho_one, theorem_main_check, verify_witness};
use ordwb::{Execution, Ordinal, Rational};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rho_exact() -> Outcome {
    let mut certified = 0;
    for z in 1..=2u64 {
        let zeta = Ordinal::from_u64(z);
        let pair = l1_interval_model(&zeta);
        let grid: Vec<Ordinal> = if z == 1 {
            (0..=10).map(Ordinal::from_u64).collect()
        } else {
            (0..=5u64)
                .flat_map(|k| (0..=5u64).map(move |j| Ordinal::omega().mul_nat(&k.into()).add(&Ordinal::from_u64(j))))
                .collect()
        };
        for gamma in &grid {
            let w = gen_l1_witness(&zeta, gamma, &half()).map_err(|e| e.to_string())?;
            let got = verify_witness(&w, &pair.family, &half()).map_err(|e| format!("gamma {gamma}: {e}"))?;
            ensure(got >= *gamma, || format!("zeta {zeta}: certified {got} < {gamma}"))?;
            certified += 1;
        }
        ensure(rho_one(&half(), &zeta).unwrap() == Ordinal::omega_pow(zeta.clone()), || "rho(1/2, 1)".into())?;
        for eps in ["0.51", "0.75", "1"] {
            let eps = parse_rational(eps).unwrap();
            let empty = p1_empty_check(&pair.family, &Truncation::default(), &eps).map_err(|e| e.to_string())?;
            ensure(empty, || format!("P_1 not empty at epsilon {eps}"))?;
            ensure(rho_one(&eps, &zeta).unwrap().is_zero(), || "rho above 1/2".into())?;
        }
    }
    Ok(format!("{certified} witnesses certified; P_1 empty above 1/2"))
}

fn lemma_b() -> Outcome {
    let cfg = LemmaBSuite { seed: 20240601, families: 1000, vectors: 100, max_size: 50, max_depth: 4, epsilon: half() };
    let r = lemma_b_suite(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(r.hypothesis_failures == 0, || format!("{} families failed the hypotheses", r.hypothesis_failures))?;
    ensure(r.violations == 0, || format!("{} violations", r.violations))?;
    let (fam, c) = adversarial_family();
    let rep = lemma_b_verify(&fam, &c).map_err(|e| e.to_string())?;
    let sum: Rational = c.iter().map(num_traits::Signed::abs).sum();
    ensure(rep.pass && &rep.lhs / sum == rat(1, 3), || format!("adversarial ratio {}", rep.lhs))?;
    Ok(format!("{} vectors, min ratio {}, adversarial ratio 1/3", r.vectors, r.min_ratio))
}

fn rank_transport() -> Outcome {
    let alphas = ["1", "2", "3", "4", "5", "6", "w", "w+2", "w*2", "w^2"];
    let mut n = 0;
    for z in 1..=3u64 {
        let zeta = Ordinal::from_u64(z);
        for a in alphas {
            let alpha = o(a);
            let pair = build_pair(&zeta, &alpha).map_err(|e| e.to_string())?;
            let want = Ordinal::omega_pow(zeta.clone()).mul(&alpha);
            let s = pair.space.space_rank().map_err(|e| e.to_string())?;
            let f = pair.family.family_rank().map_err(|e| e.to_string())?;
            ensure(s == want && f == want, || format!("zeta {zeta} alpha {alpha}: space {s}, family {f}, want {want}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} pairs"))
}

fn l1_certification() -> Outcome {
    let t = Truncation { max_branch: 3, depth: 3, probes: 2 };
    let mut parts = Vec::new();
    for a in ["1", "2", "3", "w"] {
        let pair = build_pair(&Ordinal::one(), &o(a)).map_err(|e| e.to_string())?;
        let r = l1_batch(&pair.family, &t, 7, 10_000, Execution::Parallel).map_err(|e| e.to_string())?;
        ensure(r.failures == 0, || format!("alpha {a}: {} failures", r.failures))?;
        ensure(r.isometry, || format!("alpha {a}: restricted basis not isometric"))?;
        parts.push(format!("L_{a}: {} members, min {}", r.members, r.min_ratio));
    }
    Ok(parts.join("; "))
}

fn induction_replay() -> Outcome {
    let grid = ["2", "3", "4", "5", "6", "7", "8", "9", "10", "w", "w+1", "w*2", "w^2", "w^2+w", "w^3"];
    let mut n = 0;
    for z in 1..=2u64 {
        for a in grid {
            let f = check_inductive_step(&o(a), &Ordinal::from_u64(z), 6, 50).map_err(|e| e.to_string())?;
            ensure(f.is_empty(), || format!("zeta {z} alpha {a}: {:?}", f[0]))?;
            n += 1;
        }
    }
    Ok(format!("{n} grid points"))
}

fn main_boundary() -> Outcome {
    let mut alphas: Vec<Ordinal> = (1..=12).map(Ordinal::from_u64).collect();
    for a in ["w", "w+1", "w+3", "w*2", "w*2+1", "w*3", "w*4+2", "w*5"] {
        alphas.push(o(a));
    }
    let mut true_points = 0;
    for z in 1..=5u64 {
        let zeta = Ordinal::from_u64(z);
        let upper = zeta.mul(&Ordinal::omega());
        for alpha in &alphas {
            let expected = zeta < *alpha && *alpha < upper;
            let got = match theorem_main_check(&zeta, alpha, 6) {
                Ok(r) => r.condition && r.separation,
                Err(_) if *alpha < zeta => false,
                Err(e) => return Err(e.to_string()),
            };
            ensure(got == expected, || format!("zeta {zeta} alpha {alpha}: got {got}"))?;
            true_points += usize::from(got);
        }
    }
    for alpha in [o("w"), o("w^2")] {
        let zetas = ["1", "2", "3", "4", "5", "w", "w+1", "w*2", "w*3+2"];
        for z in zetas.iter().map(|z| o(z)).filter(|z| *z < alpha) {
            let r = theorem_main_check(&z, &alpha, 6).map_err(|e| e.to_string())?;
            ensure(!r.condition, || format!("condition holds at zeta {z} alpha {alpha}"))?;
        }
    }
    Ok(format!("{true_points} admissible grid points, w and w^2 rejected"))
}

fn preimage_round_trip() -> Outcome {
    let pair = build_pair(&Ordinal::one(), &Ordinal::one()).map_err(|e| e.to_string())?;
    let t = Truncation { max_branch: 7, depth: 3, probes: 7 };
    let members = pair.family.enumerate(&t).map_err(|e| e.to_string())?;
    ensure(members.len() == 50, || format!("truncation has {} members", members.len()))?;
    for k in 0..100 {
        let mut rng = stream(99, subkey(4, k));
        let g: BTreeMap<_, Rational> =
            members.iter().map(|m| (m.clone(), rat(rng.random_range(-20..=20), rng.random_range(1..=6)))).collect();
        let f = solve_preimage(&g, &pair.family, &pair.space).map_err(|e| e.to_string())?;
        for (m, want) in &g {
            let got = evaluate(&f, m, &pair.family).map_err(|e| e.to_string())?;
            ensure(got == *want, || format!("target {k}: {m} evaluates to {got}, want {want}"))?;
        }
    }
    Ok("100 targets on 50 members".into())
}

fn ordinal_oracle() -> Outcome {
    let all = Small::all_below_w3(5);
    let cnf: Vec<Ordinal> = all.iter().map(Small::to_ordinal).collect();
    for (a, ca) in all.iter().zip(&cnf) {
        for (b, cb) in all.iter().zip(&cnf) {
            ensure(ca.cmp(cb) == a.cmp_small(b), || format!("cmp {ca} {cb}"))?;
            ensure(ca.add(cb) == a.add_small(b).to_ordinal(), || format!("add {ca} {cb}"))?;
            ensure(ca.mul(cb) == a.mul_small(b).to_ordinal(), || format!("mul {ca} {cb}"))?;
        }
    }
    Ok(format!("{} pairs", all.len() * all.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("rho(eps,1) exact values", Duration::from_secs(60), rho_exact),
        ("norm inequality randomized suite", Duration::from_secs(300), lemma_b),
        ("rank transport", Duration::from_secs(60), rank_transport),
        ("l1 certification", Duration::from_secs(300), l1_certification),
        ("induction replay", Duration::from_secs(60), induction_replay),
        ("separation boundary", Duration::from_secs(60), main_boundary),
        ("preimage round trip", Duration::from_secs(60), preimage_round_trip),
        ("ordinal oracle equivalence", Duration::from_secs(60), ordinal_oracle),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(s) if took > *budget => Err(format!("{s}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(s) => println!("criterion {} {name}: PASS ({s}) [{took:.1?}]", i + 1),
            Err(s) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({s}) [{took:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
