use iivcg_core::lp::{solve, LinearProgram, LpResult, Relation, Sense};
use iivcg_core::rational::{int, ratio, Rational};
use num_traits::Signed;
use proptest::prelude::*;

fn small() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=3).prop_map(|(p, q)| ratio(p, q))
}

/// Two-variable programs over `[0, 4]²` with up to four `<=` rows.
fn program() -> impl Strategy<Value = LinearProgram> {
    (
        any::<bool>(),
        prop::collection::vec(small(), 2),
        prop::collection::vec((prop::collection::vec(small(), 2), small()), 0..4),
    )
        .prop_map(|(max, c, rows)| {
            let sense = if max { Sense::Maximize } else { Sense::Minimize };
            let mut lp = LinearProgram::new(sense, c);
            lp.set_bounds(0, Some(int(0)), Some(int(4)));
            lp.set_bounds(1, Some(int(0)), Some(int(4)));
            for (a, b) in rows {
                lp.add_constraint(a, Relation::Le, b);
            }
            lp
        })
}

/// Best objective over the lattice `{0, 1/d, …, 4}²` of feasible points.
fn lattice_best(lp: &LinearProgram, d: i64) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for i in 0..=4 * d {
        for j in 0..=4 * d {
            let x = vec![ratio(i, d), ratio(j, d)];
            if lp.is_feasible_point(&x) {
                let v = lp.objective_at(&x);
                let better = match (&best, lp.sense) {
                    (None, _) => true,
                    (Some(b), Sense::Minimize) => v < *b,
                    (Some(b), Sense::Maximize) => v > *b,
                };
                if better {
                    best = Some(v);
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn optimum_dominates_every_feasible_lattice_point(lp in program()) {
        match solve(&lp).unwrap() {
            LpResult::Optimal(s) => {
                prop_assert!(lp.is_feasible_point(&s.point));
                prop_assert_eq!(lp.objective_at(&s.point), s.value.clone());
                if let Some(best) = lattice_best(&lp, 6) {
                    match lp.sense {
                        Sense::Minimize => prop_assert!(s.value <= best),
                        Sense::Maximize => prop_assert!(s.value >= best),
                    }
                }
            }
            LpResult::Infeasible => prop_assert!(lattice_best(&lp, 6).is_none()),
            LpResult::Unbounded => prop_assert!(false, "bounded program reported unbounded"),
        }
    }

    #[test]
    fn duals_certify_optimality_over_the_orthant(
        c in prop::collection::vec((0i64..=6, 1i64..=2).prop_map(|(p, q)| ratio(p, q)), 3),
        rows in prop::collection::vec(
            (prop::collection::vec((0i64..=4).prop_map(int), 3), (1i64..=6).prop_map(int)),
            1..4,
        ),
    ) {
        // minimize c·x s.t. a·x >= b, x >= 0: feasible when every row has a
        // positive coefficient, bounded since c >= 0
        prop_assume!(rows.iter().all(|(a, _)| a.iter().any(|x| x.is_positive())));
        let mut lp = LinearProgram::new(Sense::Minimize, c.clone());
        for (a, b) in &rows {
            lp.add_constraint(a.clone(), Relation::Ge, b.clone());
        }
        let s = solve(&lp).unwrap().optimal().expect("feasible and bounded");
        let b_dot_y: Rational = rows.iter().zip(&s.duals).map(|((_, b), y)| b * y).sum();
        prop_assert_eq!(b_dot_y, s.value.clone());
        for (k, ck) in c.iter().enumerate() {
            prop_assert!(s.duals.iter().all(|y| !y.is_negative()));
            let col: Rational = rows.iter().zip(&s.duals).map(|((a, _), y)| &a[k] * y).sum();
            prop_assert!(col <= *ck);
        }
    }
}

#[test]
fn unbounded_and_free_variables() {
    let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1), int(1)]);
    lp.add_constraint(vec![int(1), int(-1)], Relation::Le, int(1));
    assert!(matches!(solve(&lp).unwrap(), LpResult::Unbounded));

    // minimize h subject to h >= 3 - x, h >= x - 1, x in [0, 10], h free
    let mut lp = LinearProgram::new(Sense::Minimize, vec![int(0), int(1)]);
    lp.set_bounds(0, Some(int(0)), Some(int(10)));
    lp.set_free(1);
    lp.add_constraint(vec![int(1), int(1)], Relation::Ge, int(3));
    lp.add_constraint(vec![int(-1), int(1)], Relation::Ge, int(-1));
    let s = solve(&lp).unwrap().optimal().unwrap();
    assert_eq!(s.value, int(1));
    assert_eq!(s.point, vec![int(2), int(1)]);
}

#[test]
fn equalities_and_redundant_rows() {
    let mut lp = LinearProgram::new(Sense::Minimize, vec![int(1), int(2)]);
    lp.add_constraint(vec![int(1), int(1)], Relation::Eq, int(3));
    lp.add_constraint(vec![int(2), int(2)], Relation::Eq, int(6));
    let s = solve(&lp).unwrap().optimal().unwrap();
    assert_eq!(s.value, int(3));
    let mut lp = LinearProgram::new(Sense::Minimize, vec![int(1)]);
    lp.add_constraint(vec![int(1)], Relation::Eq, int(-1));
    assert!(matches!(solve(&lp).unwrap(), LpResult::Infeasible));
}
