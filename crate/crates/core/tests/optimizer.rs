use noma_meta::optimizer::simplex::{
    irreducible_infeasible_subset, maximize, maximize_lexmin, Constraint, LpOutcome, Relation,
};
use noma_meta::optimizer::*;
use noma_meta::{db_to_linear, Params, Targets};

fn two() -> Params {
    Params::new(1.0, 4.0, 2).unwrap()
}

#[test]
fn p1_meets_its_target_with_equality() {
    let theta = db_to_linear(-5.0);
    let r = solve_p1(theta, 0.5, &two()).unwrap();
    assert!(r.feasible);
    assert!((r.achieved[0] - 0.5).abs() < 1e-6);
}

#[test]
fn p2_never_beats_p1_and_they_agree_at_point_seven() {
    for i in 0..=20 {
        let theta = db_to_linear(-10.0 + 0.5 * i as f64);
        let a = solve_p1(theta, 0.7, &two()).unwrap();
        let b = solve_p2(theta, 0.7, &two()).unwrap();
        // the delay caps can only remove allocations
        assert!(a.feasible || !b.feasible, "θ index {i}");
        if b.feasible {
            assert!((a.achieved[1] - b.achieved[1]).abs() < 1e-9);
        }
        let a = solve_p1(theta, 0.5, &two()).unwrap();
        let b = solve_p2(theta, 0.5, &two()).unwrap();
        if b.feasible {
            assert!(b.achieved[1] <= a.achieved[1] + 1e-12);
        }
    }
}

#[test]
fn general_problem_agrees_with_two_user_form() {
    let theta = db_to_linear(-5.0);
    let t = Targets {
        success_targets: vec![Some(0.5)],
        delay_constrained: false,
        rank_to_maximize: 2,
    };
    let lp = solve_p3(theta, &t, &two()).unwrap();
    let cf = solve_p1(theta, 0.5, &two()).unwrap();
    assert!((lp.achieved[1] - cf.achieved[1]).abs() < 1e-9);
}

#[test]
fn three_users_delay_constraint_only_shrinks_the_optimum() {
    let p = Params::new(1.0, 4.0, 3).unwrap();
    for db in [-10.0, -7.5, -5.0] {
        let theta = db_to_linear(db);
        let mk = |d| Targets {
            success_targets: vec![Some(0.6), Some(0.5)],
            delay_constrained: d,
            rank_to_maximize: 3,
        };
        let free = solve_p3(theta, &mk(false), &p).unwrap();
        let tied = solve_p3(theta, &mk(true), &p).unwrap();
        if tied.feasible {
            assert!(free.feasible);
            assert!(tied.achieved[2] <= free.achieved[2] + 1e-12);
        }
    }
}

#[test]
fn infeasible_targets_report_a_conflict() {
    let r = solve_p1(db_to_linear(10.0), 0.9, &two()).unwrap();
    assert!(!r.feasible && r.betas.is_none() && !r.binding.is_empty());
    assert_eq!(r.betas_or_zeros(2), vec![0.0, 0.0]);
}

#[test]
fn simplex_basics() {
    // max x + y s.t. x + 2y ≤ 4, 3x + y ≤ 6, x,y ≥ 0 → (1.6, 1.2)
    let cons = vec![
        Constraint::new("a", vec![1.0, 2.0], Relation::Le, 4.0),
        Constraint::new("b", vec![3.0, 1.0], Relation::Le, 6.0),
        Constraint::new("x≥0", vec![1.0, 0.0], Relation::Ge, 0.0),
        Constraint::new("y≥0", vec![0.0, 1.0], Relation::Ge, 0.0),
    ];
    match maximize(&[1.0f64, 1.0], &cons).unwrap() {
        LpOutcome::Optimal { x, value } => {
            assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
            assert!((value - 2.8).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    // a face of optima: lexmin picks the smallest first coordinate
    let face = vec![
        Constraint::new("sum", vec![1.0, 1.0], Relation::Le, 1.0),
        Constraint::new("x≥0", vec![1.0, 0.0], Relation::Ge, 0.0),
        Constraint::new("y≥0", vec![0.0, 1.0], Relation::Ge, 0.0),
    ];
    match maximize_lexmin(&[1.0f64, 1.0], &face, 1e-12).unwrap() {
        LpOutcome::Optimal { x, .. } => assert!(x[0].abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
    let mut bad = face.clone();
    bad.push(Constraint::new("big", vec![1.0, 1.0], Relation::Ge, 2.0));
    assert!(matches!(
        maximize(&[1.0, 0.0], &bad).unwrap(),
        LpOutcome::Infeasible
    ));
    let iis = irreducible_infeasible_subset(2, &bad).unwrap();
    assert!(iis.contains(&"sum".to_string()) && iis.contains(&"big".to_string()));
}
