use iivcg_core::audit::{audit, audit_ir, AuditConfig, AuditGrid, Status};
use iivcg_core::fixtures::{
    random_setting, weighted_example, weighted_graph, weighted_truthful, RandomSpec,
};
use iivcg_core::instantiations::{
    build_uniform_graph, g_correlation_falsify, shifted_valuation, sufficient_condition_check,
    weighted_valuation, AuctionInspired, CorrelationGraph, GraphError, GraphKind, Weighted,
};
use iivcg_core::model::{Action, BidProfile, PaymentRule, Principal, Setting, ValuationDomain};
use iivcg_core::rational::{int, ratio};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two principals whose domains differ a hundredfold: not correlated under
/// the uniform graph.
fn uncorrelated() -> Setting {
    Setting::new(
        vec![Action::new("a1", int(0)), Action::new("a2", int(1))],
        vec!["o1".into(), "o2".into()],
        vec![vec![int(1), int(0)], vec![int(0), int(1)]],
        vec![
            Principal::new("p1", ValuationDomain::cube(2, int(0), int(1))),
            Principal::new("p2", ValuationDomain::cube(2, int(0), int(100))),
        ],
    )
    .unwrap()
}

#[test]
fn weighted_worked_numbers() {
    let s = weighted_example();
    let v = weighted_truthful();
    let proxy = weighted_valuation(&weighted_graph(), &v, 0);
    assert_eq!(proxy.0, vec![int(0), ratio(21, 10)]);
    assert_eq!(s.welfare(0, &v), int(33));
    assert_eq!(s.welfare(1, &v), ratio(143, 4));
    assert_eq!(s.welfare_with(0, &v, 0, &proxy), int(22));
    assert_eq!(s.welfare_with(1, &v, 0, &proxy), ratio(993, 40));
    let rule = Weighted::new(s, weighted_graph()).unwrap();
    let table = rule.payment_table(&v).unwrap();
    assert_eq!(table.0[0], vec![int(0), ratio(21, 10)]);
}

#[test]
fn graphs_are_validated() {
    assert_eq!(
        CorrelationGraph::new(vec![vec![int(1), int(0)], vec![int(1), int(0)]]).unwrap_err(),
        GraphError::SelfLoop(0)
    );
    assert_eq!(
        CorrelationGraph::new(vec![vec![int(0), int(2)], vec![int(1), int(0)]]).unwrap_err(),
        GraphError::OutOfRange { from: 0, to: 1 }
    );
    assert!(build_uniform_graph(1, GraphKind::Cycle).is_err());
    let cycle = build_uniform_graph(3, GraphKind::Cycle).unwrap();
    assert_eq!(cycle.d(0, 1), &int(1));
    assert_eq!(cycle.d(2, 0), &int(1));
    assert_eq!(cycle.d(0, 2), &int(0));
    let complete = build_uniform_graph(3, GraphKind::Complete).unwrap();
    assert_eq!(complete.d(1, 2), &ratio(1, 2));
    assert!(Weighted::new(weighted_example(), complete.clone()).is_ok());
    assert!(matches!(
        Weighted::new(uncorrelated(), complete),
        Err(GraphError::SizeMismatch { graph: 3, setting: 2 })
    ));
}

#[test]
fn shifting_subtracts_the_minimum() {
    assert_eq!(shifted_valuation(&[int(3), int(5), int(4)]).0, vec![int(0), int(2), int(1)]);
}

#[test]
fn uncorrelated_setting_breaks_individual_rationality() {
    let s = uncorrelated();
    let g = build_uniform_graph(2, GraphKind::Complete).unwrap();
    let v = BidProfile::from_rows(vec![vec![int(0), int(0)], vec![int(0), int(100)]]);
    let found = g_correlation_falsify(&s, &g, std::slice::from_ref(&v)).expect("violation");
    assert_eq!(found.principal, 0);
    assert_eq!(found.proxy_welfare, int(199));
    assert_eq!(found.true_welfare, int(99));

    let rule = Weighted::new(s.clone(), g).unwrap();
    let grid = AuditGrid::build(&s, AuditConfig::default()).with_profiles([v]);
    assert!(matches!(audit_ir(&s, &rule, &grid), Status::Fail(_)));
    assert!(!sufficient_condition_check(&s).narrow_box);
}

#[test]
fn narrow_boxes_are_correlated() {
    let s = weighted_example();
    let check = sufficient_condition_check(&s);
    assert!(check.narrow_box);
    assert!(!check.same_expected_value);
    let g = check.witness.expect("a witness graph");
    let grid = AuditGrid::build(&s, AuditConfig::default());
    assert!(g_correlation_falsify(&s, &g, &grid.profiles).is_none());
    let report = audit(&s, &Weighted::new(s.clone(), g).unwrap(), &grid);
    assert!(report.ir.passed() && report.ll.passed() && report.efficiency.passed());
}

#[test]
fn identical_singletons_are_correlated() {
    let v = [int(2), int(6)];
    let s = Setting::new(
        vec![Action::new("a1", int(0)), Action::new("a2", int(1))],
        vec!["o1".into(), "o2".into()],
        vec![vec![int(1), int(0)], vec![ratio(1, 2), ratio(1, 2)]],
        (1..=3)
            .map(|l| Principal::new(format!("p{l}"), ValuationDomain::singleton(&v)))
            .collect(),
    )
    .unwrap();
    let check = sufficient_condition_check(&s);
    assert!(check.same_expected_value);
    assert!(check.witness.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn auction_contract_is_ir_and_efficient(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_setting(&mut rng, RandomSpec::default());
        let config = AuditConfig { resolution: 3, random_points: 2, seed, bound: None, max_profiles: 32 };
        let grid = AuditGrid::build(&s, config);
        let report = audit(&s, &AuctionInspired::new(s.clone()), &grid);
        prop_assert!(report.ir.passed(), "{:?}", report.ir);
        prop_assert!(report.efficiency.passed(), "{:?}", report.efficiency);
        prop_assert!(report.identity.passed(), "{:?}", report.identity);
    }

    #[test]
    fn weighted_contract_is_ll_and_efficient(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_setting(&mut rng, RandomSpec::default());
        prop_assume!(s.num_principals() >= 2);
        let g = build_uniform_graph(s.num_principals(), GraphKind::Cycle).unwrap();
        let config = AuditConfig { resolution: 3, random_points: 2, seed, bound: None, max_profiles: 32 };
        let grid = AuditGrid::build(&s, config);
        let report = audit(&s, &Weighted::new(s.clone(), g).unwrap(), &grid);
        prop_assert!(report.ll.passed(), "{:?}", report.ll);
        prop_assert!(report.efficiency.passed(), "{:?}", report.efficiency);
    }
}
