use iivcg_core::engine::{compute_shares, default_strict_eps, Alg1Contract, Engine};
use iivcg_core::fixtures::{
    poa_example, pos_example, pos_truthful, random_setting, tradeoff_example, RandomSpec,
};
use iivcg_core::grid::{lattice, random_points, truncation_bound};
use iivcg_core::model::{BidProfile, PaymentRule, RuleError, Setting};
use iivcg_core::rational::{int, ratio, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pos() -> Setting {
    pos_example(3, &ratio(1, 4), &ratio(1, 12)).unwrap()
}

fn random_profile(s: &Setting, rng: &mut ChaCha8Rng) -> BidProfile {
    let bound = truncation_bound(s);
    BidProfile::new(
        s.principals()
            .iter()
            .map(|p| random_points(&p.domain, 1, &bound, rng).remove(0))
            .collect(),
    )
}

#[test]
fn minimum_incentive_payments_of_the_stability_example() {
    let engine = Engine::new(pos()).unwrap();
    let ks: Vec<Rational> = (0..3).map(|a| engine.k(a).unwrap().0.clone()).collect();
    assert_eq!(ks, vec![int(0), ratio(28, 9), ratio(136, 9)]);
    // each base vector implements its action at exactly k
    for a in 0..3 {
        let (k, w) = engine.k(a).unwrap();
        assert!(engine.setting().in_incentive_set(w, a));
        assert_eq!(&engine.setting().expected(a, w), k);
    }
}

#[test]
fn no_cheaper_incentive_vector_on_a_lattice() {
    let engine = Engine::new(pos()).unwrap();
    let s = engine.setting();
    let box_ = iivcg_core::ValuationDomain::cube(2, int(0), int(20));
    for w in lattice(&box_, 41, &int(20)) {
        for a in 0..3 {
            if s.in_incentive_set(&w, a) {
                assert!(s.expected(a, &w) >= engine.k(a).unwrap().0, "{w} for a{a}");
            }
        }
    }
}

#[test]
fn payments_at_the_stability_truthful_profile() {
    let engine = Engine::new(pos()).unwrap();
    let b = pos_truthful(3, &ratio(1, 4));
    let params = engine.contract_params(&b).unwrap();
    assert_eq!(params.star, 2);
    assert_eq!(params.m_bounds, vec![int(3) + ratio(41, 3)]);
    assert_eq!(params.shares, vec![int(1)]);
    let table = engine.alg1_payment_table(&b).unwrap();
    assert_eq!(table.0[0], vec![ratio(14, 9), ratio(14, 9) + ratio(136, 9)]);
}

#[test]
fn verdicts_on_reference_settings() {
    for n in [4, 5, 10] {
        let engine = Engine::new(poa_example(n, &ratio(1, 2), &ratio(1, 4)).unwrap()).unwrap();
        let v = engine.alg2_exists(None).unwrap();
        assert!(v.is_possible(), "n = {n}");
        assert_eq!(v.checks().len(), 3);
    }
    let engine = Engine::new(tradeoff_example(&ratio(1, 10)).unwrap()).unwrap();
    let v = engine.alg2_exists(Some(&default_strict_eps())).unwrap();
    let w = v.witness().expect("tradeoff setting is impossible");
    assert_eq!(w.action, 1);
    assert_eq!(w.k, ratio(1, 5));
    assert!(w.sum_m < w.k);
    match engine.alg1_payment_table(&w.profile) {
        Err(RuleError::Impossible { action, k, sum_m }) => {
            assert_eq!((action, &k, &sum_m), (1, &w.k, &w.sum_m));
        }
        other => panic!("expected impossibility, got {other:?}"),
    }
}

#[test]
fn shares_fill_in_index_order() {
    assert_eq!(
        compute_shares(&int(3), &[int(2), int(5)]),
        vec![ratio(2, 3), ratio(1, 3)]
    );
    assert_eq!(compute_shares(&int(0), &[int(2), int(5)]), vec![int(1), int(0)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// On feasible random settings the contract is LL, implements a*(b), and
    /// pins every expected payment to h − Wel^{a*}(b^{-l}, 0).
    #[test]
    fn contract_invariants_on_random_settings(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_setting(&mut rng, RandomSpec::default());
        let engine = Engine::new(s.clone()).unwrap();
        prop_assume!(engine.alg2_exists(None).unwrap().is_possible());
        let rule = Alg1Contract::new(engine);
        for _ in 0..4 {
            let b = random_profile(&s, &mut rng);
            let table = rule.payment_table(&b).unwrap();
            let star = s.efficient_action(&b);
            prop_assert!(table.0.iter().flatten().all(|t| !t.is_negative()));
            prop_assert_eq!(s.best_response_to_table(&b, &table), star);
            let params = rule.engine().contract_params(&b).unwrap();
            let zeros = vec![Rational::zero(); s.num_outcomes()];
            for l in 0..b.n() {
                let expected = table.expected(l, s.row(star));
                prop_assert_eq!(
                    expected.clone(),
                    &params.h[l] - s.welfare_with(star, &b, l, &zeros)
                );
                // the IR cap on expected payment holds
                prop_assert!(&params.shares[l] * &params.k <= params.m_bounds[l]);
            }
            let total_shares: Rational = params.shares.iter().sum();
            prop_assert_eq!(total_shares, int(1));
        }
    }

    /// `h^l(b^{-l})` is the minimum over the domain of the best welfare with
    /// principal l replaced, so it never exceeds that welfare at any point.
    #[test]
    fn h_is_below_every_sampled_replacement(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_setting(&mut rng, RandomSpec::default());
        let engine = Engine::new(s.clone()).unwrap();
        let b = random_profile(&s, &mut rng);
        let bound = truncation_bound(&s);
        for l in 0..b.n() {
            let h = engine.h(l, &b.others_total(l)).unwrap();
            let points = lattice(s.domain(l), 5, &bound);
            let best = points.iter().map(|x| s.max_welfare_with(&b, l, x)).min().unwrap();
            prop_assert!(h <= best);
            // every lower corner value is attained by a linear, monotone objective
            if let iivcg_core::ValuationDomain::Box { lower, .. } = s.domain(l) {
                prop_assert_eq!(h, s.max_welfare_with(&b, l, lower));
            }
        }
    }
}
