use iivcg_core::fixtures::{random_setting, RandomSpec};
use iivcg_core::grid::random_points;
use iivcg_core::model::{
    Action, BidProfile, ModelError, PaymentTable, Principal, Setting, ValuationDomain,
};
use iivcg_core::rational::{int, ratio, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample(seed: u64) -> (Setting, BidProfile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_setting(&mut rng, RandomSpec::default());
    let bids = s
        .principals()
        .iter()
        .map(|p| random_points(&p.domain, 1, &int(10), &mut rng).remove(0))
        .collect();
    (s, BidProfile::new(bids))
}

fn two_actions(row2: Vec<Rational>, cost2: Rational) -> Result<Setting, ModelError> {
    Setting::new(
        vec![Action::new("a1", int(0)), Action::new("a2", cost2)],
        vec!["o1".into(), "o2".into()],
        vec![vec![int(1), int(0)], row2],
        vec![Principal::new("p", ValuationDomain::orthant(2))],
    )
}

#[test]
fn invalid_settings_are_rejected() {
    assert!(matches!(
        two_actions(vec![ratio(1, 2), ratio(1, 3)], int(1)),
        Err(ModelError::RowSum { row: 1, .. })
    ));
    assert!(matches!(
        two_actions(vec![int(0), int(1)], int(0)),
        Err(ModelError::DuplicateCost { .. })
    ));
    assert!(matches!(
        two_actions(vec![int(0), int(1)], int(-1)),
        Err(ModelError::NegativeCost { action: 1 })
    ));
    assert!(matches!(
        two_actions(vec![int(2), int(-1)], int(1)),
        Err(ModelError::EntryRange { row: 1, .. })
    ));
    let no_zero = Setting::new(
        vec![Action::new("a1", int(1))],
        vec!["o1".into()],
        vec![vec![int(1)]],
        vec![Principal::new("p", ValuationDomain::orthant(1))],
    );
    assert_eq!(no_zero.unwrap_err(), ModelError::NoZeroCost);
}

#[test]
fn profiles_outside_the_domain_are_rejected() {
    let s = Setting::new(
        vec![Action::new("a1", int(0))],
        vec!["o1".into(), "o2".into()],
        vec![vec![ratio(1, 2), ratio(1, 2)]],
        vec![Principal::new("p", ValuationDomain::cube(2, int(0), int(1)))],
    )
    .unwrap();
    let b = BidProfile::from_rows(vec![vec![int(2), int(0)]]);
    assert_eq!(
        s.validate_profile(&b),
        Err(ModelError::BidOutsideDomain { principal: 0 })
    );
    let b = BidProfile::from_rows(vec![vec![int(1)]]);
    assert!(matches!(s.validate_profile(&b), Err(ModelError::BidLength { .. })));
}

#[test]
fn ties_go_to_the_costlier_action() {
    // welfare of a2 is 2·1 − 2 = 0, equal to a1's
    let s = two_actions(vec![int(0), int(1)], int(2)).unwrap();
    let b = BidProfile::from_rows(vec![vec![int(0), int(2)]]);
    assert_eq!(s.efficient_action(&b), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn efficient_action_maximizes_welfare(seed in any::<u64>()) {
        let (s, b) = sample(seed);
        let star = s.efficient_action(&b);
        let best = s.welfare(star, &b);
        for a in 0..s.num_actions() {
            let w = s.welfare(a, &b);
            prop_assert!(w <= best);
            if w == best {
                prop_assert!(s.cost(a) <= s.cost(star));
            }
        }
        prop_assert_eq!(s.max_welfare(&b), best);
    }

    #[test]
    fn welfare_is_additive_in_bids(seed in any::<u64>()) {
        let (s, b) = sample(seed);
        for a in 0..s.num_actions() {
            let summed: Rational = (0..b.n()).map(|l| s.expected(a, b.bid(l))).sum();
            prop_assert_eq!(s.welfare(a, &b), summed - s.cost(a));
            for l in 0..b.n() {
                prop_assert_eq!(s.welfare_with(a, &b, l, b.bid(l)), s.welfare(a, &b));
            }
        }
    }

    #[test]
    fn paying_the_bids_makes_the_agent_efficient(seed in any::<u64>()) {
        // with t = b the agent's utility is the declared welfare itself
        let (s, b) = sample(seed);
        let table = PaymentTable(b.0.iter().map(|v| v.0.clone()).collect());
        prop_assert_eq!(s.best_response_to_table(&b, &table), s.efficient_action(&b));
        prop_assert!(s.in_incentive_set(&b.total(), s.efficient_action(&b)));
    }
}
