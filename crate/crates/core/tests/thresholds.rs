mod common;

use common::spin;
use spinmr::sweep::{bisect_visibility, find_threshold, reproduce_table, CellKind, Threshold, ThresholdQuery, Variable};
use spinmr::{Engine, GroupingScheme, ProtocolEvaluator, ProtocolSpec, Quantity, SpinContext};

const TOL: f64 = 1e-6;

#[test]
fn lambda_thresholds_bracket_the_violation() {
    for (twice_j, x) in [(2, 0), (20, 0), (20, 5), (40, 9), (7, 1)] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let eval = ProtocolEvaluator::new(&ctx, &GroupingScheme::new(j, x).unwrap(), &ProtocolSpec::pure()).unwrap();
        for q in [Quantity::Lgi, Quantity::Wlgi] {
            let query = ThresholdQuery::new(q, j, x, Variable::Lambda, Engine::Simulation).unwrap();
            let res = find_threshold(&query, TOL).unwrap();
            assert!(!res.anomaly, "2j={twice_j} x={x} {q}");
            let Threshold::Value(t) = res.threshold else {
                panic!("2j={twice_j} x={x} {q}: no violation");
            };
            if t > 10.0 * TOL && t < 1.0 - 10.0 * TOL {
                assert!(eval.violation_at(t + 10.0 * TOL, q).unwrap() > 0.0);
                assert!(eval.violation_at(t - 10.0 * TOL, q).unwrap() <= 0.0);
            }
        }
    }
}

#[test]
fn engines_give_the_same_lambda_threshold() {
    for twice_j in [2, 9, 20, 60] {
        let j = spin(twice_j);
        for q in [Quantity::Lgi, Quantity::Wlgi] {
            let sim = find_threshold(&ThresholdQuery::new(q, j, 0, Variable::Lambda, Engine::Simulation).unwrap(), TOL).unwrap();
            let cf = find_threshold(&ThresholdQuery::new(q, j, 0, Variable::Lambda, Engine::ClosedForm).unwrap(), TOL).unwrap();
            let (a, b) = (sim.threshold.value().unwrap(), cf.threshold.value().unwrap());
            assert!((a - b).abs() < 2.0 * TOL, "{a} vs {b}");
        }
    }
}

#[test]
fn visibility_solve_agrees_with_bisection() {
    for j in [1, 10, 100] {
        for q in [Quantity::Lgi, Quantity::Wlgi] {
            for engine in [Engine::Simulation, Engine::ClosedForm] {
                let query = ThresholdQuery::new(q, spin(2 * j), 0, Variable::Visibility, engine).unwrap();
                let affine = find_threshold(&query, TOL).unwrap().threshold.value().unwrap();
                let bisected = bisect_visibility(&query, TOL).unwrap().value().unwrap();
                assert!((affine - bisected).abs() <= TOL, "{q} j={j}: {affine} vs {bisected}");
            }
        }
    }
}

#[test]
fn nsit_violated_down_to_small_sharpness() {
    // The grid floor is 1e-3; nothing is asserted below it.
    for (twice_j, x) in [(2, 0), (3, 1), (20, 0), (20, 7), (80, 20)] {
        let j = spin(twice_j);
        let ctx = SpinContext::new(j).unwrap();
        let eval = ProtocolEvaluator::new(&ctx, &GroupingScheme::new(j, x).unwrap(), &ProtocolSpec::pure()).unwrap();
        for lambda in [1e-3, 5e-3, 0.01, 0.05, 0.2, 0.6, 1.0] {
            let v = eval.violation_at(lambda, Quantity::Nsit).unwrap();
            assert!(v > 0.0, "2j={twice_j} x={x} λ={lambda}: {v}");
        }
        let res = find_threshold(&ThresholdQuery::new(Quantity::Nsit, j, x, Variable::Lambda, Engine::Simulation).unwrap(), TOL).unwrap();
        assert_eq!(res.threshold, Threshold::Value(0.0));
    }
}

#[test]
fn coarse_grid_trends() {
    let t = reproduce_table(9).unwrap();
    let get = |q: Quantity, j: u32, x: usize| {
        t.rows
            .iter()
            .find(|r| r.quantity == q && r.j == Some(spin(2 * j)) && r.x == x)
            .and_then(|r| r.result)
            .unwrap()
    };
    for q in Quantity::ALL {
        for x in [10, 20] {
            for w in [40, 60, 80, 100].windows(2) {
                assert!(get(q, w[1], x) > get(q, w[0], x), "{q} x={x}");
            }
        }
        for j in [40, 60, 80, 100] {
            assert!(get(q, j, 10) > get(q, j, 20), "{q} j={j}");
        }
    }
    assert!(t.rows.iter().all(|r| r.kind == CellKind::Violation && r.closed_form.is_none()));
}

#[test]
fn invalid_queries() {
    assert!(ThresholdQuery::new(Quantity::Lgi, spin(2), 2, Variable::Lambda, Engine::Simulation).is_err());
    assert!(ThresholdQuery::new(Quantity::Lgi, spin(20), 3, Variable::Lambda, Engine::ClosedForm).is_err());
    let q = ThresholdQuery::new(Quantity::Lgi, spin(2), 0, Variable::Lambda, Engine::Simulation).unwrap();
    assert!(find_threshold(&q, 1e-8).is_err());
}
