//! Closed-form moment series against direct summation on the truncated basis.

use holeburn::fock::moment_oracle;
use holeburn::moments::{analytic_moment, keys_up_to_order, MomentTable};
use holeburn::states::{build_state_with, BuildOptions};
use holeburn::{Engineering, StateSpec};
use proptest::prelude::*;

fn grid() -> Vec<StateSpec> {
    let mut out = Vec::new();
    for eng in Engineering::ALL {
        for &(a, th) in &[(0.3, 0.0), (1.0, 0.0), (1.7, 0.9), (2.4, 2.0), (3.0, -0.4)] {
            out.push(StateSpec::ecs(a).with_theta(th).with_engineering(eng));
        }
        for &(p, m) in &[(0.05, 10), (0.3, 10), (0.5, 4), (0.8, 15), (0.97, 7)] {
            out.push(StateSpec::bs(p, m).with_engineering(eng));
        }
        for &(a, th, chi) in &[
            (0.4, 0.0, 0.02),
            (1.0, 0.3, 0.0),
            (1.6, 1.1, 0.07),
            (2.2, 0.0, 0.5),
            (3.0, 2.5, 0.02),
        ] {
            out.push(StateSpec::ks(a, chi).with_theta(th).with_engineering(eng));
        }
    }
    out
}

#[test]
fn analytic_moments_agree_with_oracle() {
    let mut worst = 0.0f64;
    for spec in grid() {
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        for (j, k) in keys_up_to_order(8) {
            let oracle = moment_oracle(&v, j, k).unwrap();
            let analytic = analytic_moment(&spec, j, k).unwrap();
            let err = (analytic - oracle).norm() / oracle.norm().max(1.0);
            worst = worst.max(err);
            assert!(
                err <= 1e-9,
                "{spec} ({j},{k}): analytic {analytic} oracle {oracle} err {err:e}"
            );
        }
    }
    println!("worst relative deviation {worst:e}");
}

#[test]
fn both_branches_are_conjugate() {
    for spec in grid() {
        let t = MomentTable::analytic(
            &spec,
            keys_up_to_order(16).into_iter().filter(|&(j, k)| j <= 8 && k <= 8),
        )
        .unwrap();
        for ((j, k), v) in t.iter() {
            let w = t.get(k, j).unwrap();
            // Cauchy-Schwarz bound on |<a^+j a^k>|, the size of the summed terms
            let scale = (t.get(j, j).unwrap().re * t.get(k, k).unwrap().re).sqrt().max(1.0);
            let defect = (v - w.conj()).norm();
            assert!(defect <= 1e-12 * scale, "{spec} ({j},{k}) {v} vs {w}: {defect:e}");
        }
    }
}

#[test]
fn oracle_hermiticity_and_parity() {
    for spec in grid() {
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        let t = MomentTable::oracle(&v, keys_up_to_order(12)).unwrap();
        assert!(
            t.hermiticity_defect() < 1e-12 * t.get(6, 6).unwrap().norm().max(1.0),
            "{spec}"
        );
        assert!((t.get(0, 0).unwrap().re - 1.0).abs() < 1e-12);
        let single_parity = spec.family == holeburn::Family::Ecs;
        if single_parity {
            for ((j, k), m) in t.iter() {
                if (j + k) % 2 == 1 {
                    assert!(m.norm() < 1e-12, "{spec} ({j},{k}) = {m}");
                }
            }
        }
    }
}

#[test]
fn doubling_cutoff_changes_nothing() {
    for spec in grid().into_iter().filter(|s| s.family != holeburn::Family::Bs) {
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        let doubled = build_state_with(
            &spec,
            &BuildOptions {
                headroom: v.cutoff() + 1 + 12,
                ..BuildOptions::oracle()
            },
        )
        .unwrap();
        assert!(doubled.cutoff() >= 2 * v.cutoff());
        for (j, k) in keys_up_to_order(6) {
            let a = moment_oracle(&v, j, k).unwrap();
            let b = moment_oracle(&doubled, j, k).unwrap();
            assert!(
                (a - b).norm() <= 1e-10 * b.norm().max(1e-300),
                "{spec} ({j},{k}) {a} {b}"
            );
        }
    }
}

#[test]
fn kerr_diagonal_is_chi_independent() {
    for &a in &[0.5, 1.3, 2.8] {
        for eng in Engineering::ALL {
            for q in 0..=6 {
                let base = analytic_moment(&StateSpec::ks(a, 0.0).with_engineering(eng), q, q).unwrap();
                for &chi in &[0.01, 0.2, 1.7] {
                    let m = analytic_moment(&StateSpec::ks(a, chi).with_engineering(eng), q, q).unwrap();
                    assert!(
                        (m - base).norm() < 1e-12 * base.norm().max(1.0),
                        "a={a} {eng:?} q={q} chi={chi}"
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_kerr_states_cross_validate(a in 0.05f64..3.0, th in -3.1f64..3.1, chi in 0.0f64..0.3, e in 0usize..3, j in 0usize..5, k in 0usize..5) {
        let spec = StateSpec::ks(a, chi).with_theta(th).with_engineering(Engineering::ALL[e]);
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        let oracle = moment_oracle(&v, j, k).unwrap();
        let analytic = analytic_moment(&spec, j, k).unwrap();
        prop_assert!((analytic - oracle).norm() <= 1e-9 * oracle.norm().max(1.0));
    }

    #[test]
    fn random_even_coherent_states_cross_validate(a in 0.05f64..3.0, th in -3.1f64..3.1, e in 0usize..3, j in 0usize..5, k in 0usize..5) {
        let spec = StateSpec::ecs(a).with_theta(th).with_engineering(Engineering::ALL[e]);
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        let oracle = moment_oracle(&v, j, k).unwrap();
        let analytic = analytic_moment(&spec, j, k).unwrap();
        prop_assert!((analytic - oracle).norm() <= 1e-9 * oracle.norm().max(1.0));
    }

    #[test]
    fn random_binomial_states_cross_validate(p in 0.01f64..0.99, m in 1usize..25, e in 0usize..3, j in 0usize..5, k in 0usize..5) {
        let spec = StateSpec::bs(p, m).with_engineering(Engineering::ALL[e]);
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        let oracle = moment_oracle(&v, j, k).unwrap();
        let analytic = analytic_moment(&spec, j, k).unwrap();
        prop_assert!((analytic - oracle).norm() <= 1e-9 * oracle.norm().max(1.0));
    }
}
