use iivcg_core::first_price::{
    fp_equilibrium_check, fp_rule, fp_utility, poa_report, pos_bid_grid, pos_utility_bound_check,
    DeviationGrid, EquilibriumCheck, FirstPriceError, DEFAULT_RESOLUTION,
};
use iivcg_core::fixtures::{
    poa_equilibrium, poa_example, poa_truthful, pos_example, pos_truthful,
};
use iivcg_core::model::{BidProfile, PaymentRule, Valuation};
use iivcg_core::rational::{int, ratio};

#[test]
fn anarchy_equilibrium_and_ratio() {
    let (g, e) = (ratio(1, 2), ratio(1, 4));
    for n in [4usize, 6] {
        let s = poa_example(n, &g, &e).unwrap();
        let grid = DeviationGrid::new(&s, DEFAULT_RESOLUTION, None);
        let truthful = poa_truthful(n, &g, &e);
        let eq = poa_equilibrium(n, &g, &e);
        assert_eq!(fp_equilibrium_check(&s, &truthful, &eq, &grid), EquilibriumCheck::Equilibrium);
        let report = poa_report(&s, &truthful, &eq, &grid).unwrap();
        assert_eq!(report.ratio, Some(ratio(1, n as i64 - 2)));
        assert_ne!(report.eq_action, report.opt_action);
    }
}

#[test]
fn truthful_bidding_is_not_an_equilibrium() {
    let (g, e) = (ratio(1, 2), ratio(1, 4));
    let s = poa_example(4, &g, &e).unwrap();
    let grid = DeviationGrid::new(&s, DEFAULT_RESOLUTION, None);
    let truthful = poa_truthful(4, &g, &e);
    assert!(matches!(
        poa_report(&s, &truthful, &truthful, &grid),
        Err(FirstPriceError::NotEquilibrium { .. })
    ));
}

#[test]
fn stability_utility_bound() {
    let (g, e) = (ratio(1, 4), ratio(1, 12));
    let s = pos_example(3, &g, &e).unwrap();
    let values = pos_truthful(3, &g);
    let bids = pos_bid_grid(&s, 20, None);
    let report = pos_utility_bound_check(&s, values.bid(0), &bids, 1);
    assert!(report.considered > 0);
    assert!(report.max_utility.unwrap() <= ratio(8, 9));
    let flat = BidProfile::from_rows(vec![vec![int(3), int(3)]]);
    assert_eq!(fp_utility(&s, values.bid(0), &flat, 0), int(1));
}

#[test]
fn first_price_pays_the_bid() {
    let b = BidProfile::new(vec![Valuation(vec![int(1), int(2)]), Valuation(vec![int(3), int(0)])]);
    let table = fp_rule().payment_table(&b).unwrap();
    assert_eq!(table.payment(1, 0), &int(3));
    assert_eq!(fp_rule().payments(&b, 1).unwrap(), vec![int(2), int(0)]);
}
