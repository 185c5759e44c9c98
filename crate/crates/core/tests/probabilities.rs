mod common;

use common::{spin, BruteForce};
use spinmr::measurement::{collapse_group, measure_levels, MeasurementSetting};
use spinmr::quantities::{single_time_prob, two_time_joint};
use spinmr::{
    GroupingScheme, Outcome, Pair, ProtocolEvaluator, ProtocolSpec, Quantity, SpinContext, Time,
};

const LAMBDAS: [f64; 5] = [0.0, 0.1, 0.5, 0.9, 1.0];

#[test]
fn povm_is_complete() {
    for twice_j in [0, 1, 2, 7, 20] {
        let d = spin(twice_j).dim();
        for lambda in LAMBDAS {
            let s = MeasurementSetting::new(d, lambda).unwrap();
            let mut sum = vec![0.0; d];
            for k in 0..d {
                let f = s.effect_diagonal(k);
                let r = s.sqrt_effect_diagonal(k);
                for a in 0..d {
                    sum[a] += f[a];
                    assert!(r[a] >= 0.0);
                    assert!((r[a] * r[a] - f[a]).abs() < 1e-12);
                }
            }
            assert!(sum.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
    }
}

#[test]
fn level_outcomes_are_normalized_states() {
    for twice_j in [1, 2, 6] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let rho = ctx
            .evolve(&ProtocolSpec::new(0.7).unwrap().initial_state(&ctx), spinmr::Step::HalfPi)
            .unwrap();
        for lambda in LAMBDAS {
            let s = MeasurementSetting::new(j.dim(), lambda).unwrap();
            let dist = measure_levels(&s, j, &rho).unwrap();
            assert!((dist.total_probability() - 1.0).abs() < 1e-10);
            for e in &dist.entries {
                assert!(e.probability >= 0.0);
                if let Some(post) = &e.post_state {
                    assert!((post.trace() - 1.0).abs() < 1e-10);
                    assert!(post.min_eigenvalue() > -1e-10);
                }
            }
        }
    }
}

#[test]
fn group_branches_sum_to_one() {
    let j = spin(8);
    let ctx = SpinContext::new(j).unwrap();
    let rho = ctx
        .evolve(&ProtocolSpec::pure().initial_state(&ctx), spinmr::Step::HalfPi)
        .unwrap();
    for x in 0..=4 {
        let scheme = GroupingScheme::new(j, x).unwrap();
        for lambda in LAMBDAS {
            let s = MeasurementSetting::new(j.dim(), lambda).unwrap();
            let total: f64 = Outcome::BOTH
                .iter()
                .map(|&q| collapse_group(&s, &scheme, rho.matrix(), q).unwrap().probability)
                .sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn joints_normalize_and_marginalize() {
    for (twice_j, x) in [(1, 0), (2, 1), (5, 2), (10, 0), (10, 4)] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let scheme = GroupingScheme::new(j, x).unwrap();
        for v in [0.3, 1.0] {
            let protocol = ProtocolSpec::new(v).unwrap();
            for lambda in LAMBDAS {
                let s = MeasurementSetting::new(j.dim(), lambda).unwrap();
                for pair in Pair::ALL {
                    let mut total = 0.0;
                    for qa in Outcome::BOTH {
                        let marginal: f64 = Outcome::BOTH
                            .iter()
                            .map(|&qb| two_time_joint(&ctx, &s, &scheme, &protocol, pair, qa, qb).unwrap())
                            .sum();
                        let single = single_time_prob(&ctx, &s, &scheme, &protocol, pair.first(), qa).unwrap();
                        assert!((marginal - single).abs() < 1e-10, "{pair:?} {qa:?}");
                        total += marginal;
                    }
                    assert!((total - 1.0).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn cached_evaluator_matches_forward_simulation() {
    for (twice_j, x) in [(1, 0), (4, 1), (9, 3)] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let scheme = GroupingScheme::new(j, x).unwrap();
        let protocol = ProtocolSpec::new(0.6).unwrap();
        let eval = ProtocolEvaluator::new(&ctx, &scheme, &protocol).unwrap();
        for lambda in [0.2, 1.0] {
            let s = eval.setting(lambda).unwrap();
            for time in [Time::T1, Time::T2, Time::T3] {
                for q in Outcome::BOTH {
                    let a = eval.single(&s, time, q);
                    let b = single_time_prob(&ctx, &s, &scheme, &protocol, time, q).unwrap();
                    assert!((a - b).abs() < 1e-12);
                }
            }
            for pair in Pair::ALL {
                for qa in Outcome::BOTH {
                    for qb in Outcome::BOTH {
                        let a = eval.joint(&s, pair, qa, qb);
                        let b = two_time_joint(&ctx, &s, &scheme, &protocol, pair, qa, qb).unwrap();
                        assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn matches_brute_force_branch_sum() {
    for (twice_j, x) in [(1, 0), (2, 0), (2, 1), (3, 1), (6, 2), (10, 0), (10, 5)] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let scheme = GroupingScheme::new(j, x).unwrap();
        for v in [0.25, 1.0] {
            let eval = ProtocolEvaluator::new(&ctx, &scheme, &ProtocolSpec::new(v).unwrap()).unwrap();
            for lambda in [0.0, 0.35, 0.8, 1.0] {
                let oracle = BruteForce::new(j, lambda, v, x);
                let s = eval.setting(lambda).unwrap();
                for q in Quantity::ALL {
                    let got = eval.value(&s, q);
                    let want = oracle.value(q);
                    assert!((got - want).abs() < 1e-10, "2j={twice_j} x={x} v={v} λ={lambda} {q}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn spin_one_unsharp_joint_value() {
    // After the π flip the state is |+1⟩: P(Q₁=+) = 5/6, and the collapsed
    // state rotated by π/2 gives P(Q₂=−) = 7/24.
    let j = spin(2);
    let ctx = SpinContext::new(j).unwrap();
    let scheme = GroupingScheme::lowest_level(j);
    let s = MeasurementSetting::new(3, 0.5).unwrap();
    let p = two_time_joint(&ctx, &s, &scheme, &ProtocolSpec::pure(), Pair::T1T2, Outcome::Plus, Outcome::Minus).unwrap();
    assert!((p - 35.0 / 144.0).abs() < 1e-12, "{p}");
}

#[test]
fn per_level_collapse_removes_intra_group_coherence() {
    let j = spin(2);
    let scheme = GroupingScheme::lowest_level(j);
    let s = MeasurementSetting::new(3, 1.0).unwrap();
    // Equal superposition of m = 0 and m = +1, both in the Q = +1 group.
    let h = 0.5;
    let m = spinmr::linalg::ComplexMatrix::from_fn(3, |r, c| {
        num_complex::Complex64::new(if r >= 1 && c >= 1 { h } else { 0.0 }, 0.0)
    });
    let branch = collapse_group(&s, &scheme, &m, Outcome::Plus).unwrap();
    assert!((branch.probability - 1.0).abs() < 1e-15);
    assert_eq!(branch.state.get(1, 2).norm(), 0.0);
    assert!((branch.state.get(1, 1).re - h).abs() < 1e-15);
}
