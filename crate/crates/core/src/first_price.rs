//! First-price contracts: each principal pays her bid for the realized
//! outcome. The agent then maximizes declared welfare, but the bidding game
//! can have badly inefficient equilibria.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::grid::{lattice, truncation_bound, vertices};
use crate::model::{BidProfile, PaymentRule, PaymentTable, RuleError, Setting, Valuation};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, Default)]
pub struct FirstPrice;

/// `t^l(b, o) = b^l(o)`.
pub fn fp_rule() -> FirstPrice {
    FirstPrice
}

impl PaymentRule for FirstPrice {
    fn name(&self) -> &str {
        "fp"
    }

    fn payment_table(&self, profile: &BidProfile) -> Result<PaymentTable, RuleError> {
        Ok(PaymentTable(profile.0.iter().map(|b| b.0.clone()).collect()))
    }
}

/// Candidate deviations per principal.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationGrid {
    pub candidates: Vec<Vec<Valuation>>,
    pub resolution: usize,
    pub bound: Rational,
}

impl DeviationGrid {
    /// Lattice with `resolution` points per dimension plus domain vertices,
    /// unbounded coordinates cut at `bound` (default: the truncation bound).
    pub fn new(setting: &Setting, resolution: usize, bound: Option<Rational>) -> Self {
        let bound = bound.unwrap_or_else(|| truncation_bound(setting));
        let candidates = setting
            .principals()
            .iter()
            .map(|p| {
                let mut c = lattice(&p.domain, resolution, &bound);
                for v in vertices(&p.domain, &bound) {
                    if !c.contains(&v) {
                        c.push(v);
                    }
                }
                c
            })
            .collect();
        Self {
            candidates,
            resolution,
            bound,
        }
    }
}

pub const DEFAULT_RESOLUTION: usize = 9;

/// Expected utility of principal `l` with values `v` at bid profile `b`.
pub fn fp_utility(setting: &Setting, v: &[Rational], profile: &BidProfile, l: usize) -> Rational {
    let table = FirstPrice
        .payment_table(profile)
        .expect("first price never fails");
    let a = setting.best_response_to_table(profile, &table);
    setting.principal_utility(l, v, a, &table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result")]
pub enum EquilibriumCheck {
    Equilibrium,
    Deviation {
        principal: usize,
        bid: Valuation,
        #[serde(with = "crate::rational::serde_exact")]
        gain: Rational,
    },
}

/// First strictly profitable unilateral deviation on the grid, scanning
/// principals and candidates in order. Evidence relative to the grid only.
pub fn fp_equilibrium_check(
    setting: &Setting,
    values: &BidProfile,
    profile: &BidProfile,
    grid: &DeviationGrid,
) -> EquilibriumCheck {
    for l in 0..profile.n() {
        let current = fp_utility(setting, values.bid(l), profile, l);
        for bid in &grid.candidates[l] {
            let deviated = profile.with_bid(l, bid.clone());
            let gain = fp_utility(setting, values.bid(l), &deviated, l) - &current;
            if gain.is_positive() {
                return EquilibriumCheck::Deviation {
                    principal: l,
                    bid: bid.clone(),
                    gain,
                };
            }
        }
    }
    EquilibriumCheck::Equilibrium
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoaReport {
    pub eq_action: usize,
    pub opt_action: usize,
    #[serde(with = "crate::rational::serde_exact")]
    pub eq_welfare: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub opt_welfare: Rational,
    /// `eq_welfare / opt_welfare`; 1 when both are zero, absent when only
    /// the optimum is zero.
    #[serde(serialize_with = "serialize_opt")]
    pub ratio: Option<Rational>,
}

fn serialize_opt<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FirstPriceError {
    #[error("profile is not an equilibrium: principal {principal} gains {gain} by bidding {bid}")]
    NotEquilibrium {
        principal: usize,
        bid: Valuation,
        gain: Rational,
    },
}

/// Welfare of the equilibrium's action against the optimum, both under the
/// true valuations. Refuses profiles that fail the grid equilibrium check.
pub fn poa_report(
    setting: &Setting,
    truthful: &BidProfile,
    equilibrium: &BidProfile,
    grid: &DeviationGrid,
) -> Result<PoaReport, FirstPriceError> {
    if let EquilibriumCheck::Deviation {
        principal,
        bid,
        gain,
    } = fp_equilibrium_check(setting, truthful, equilibrium, grid)
    {
        return Err(FirstPriceError::NotEquilibrium {
            principal,
            bid,
            gain,
        });
    }
    let table = FirstPrice
        .payment_table(equilibrium)
        .expect("first price never fails");
    let eq_action = setting.best_response_to_table(equilibrium, &table);
    let opt_action = setting.efficient_action(truthful);
    let eq_welfare = setting.welfare(eq_action, truthful);
    let opt_welfare = setting.welfare(opt_action, truthful);
    let ratio = if opt_welfare.is_zero() {
        eq_welfare.is_zero().then(|| Rational::from_integer(1.into()))
    } else {
        Some(&eq_welfare / &opt_welfare)
    };
    Ok(PoaReport {
        eq_action,
        opt_action,
        eq_welfare,
        opt_welfare,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosReport {
    /// Bids on the grid whose induced action has index `>= min_action`.
    pub considered: usize,
    #[serde(serialize_with = "serialize_opt")]
    pub max_utility: Option<Rational>,
    pub argmax: Option<Valuation>,
}

/// Single-principal scan: the best utility (under `values`) among grid bids
/// that induce an action with index at least `min_action`.
pub fn pos_utility_bound_check(
    setting: &Setting,
    values: &[Rational],
    bids: &[Valuation],
    min_action: usize,
) -> PosReport {
    let mut report = PosReport {
        considered: 0,
        max_utility: None,
        argmax: None,
    };
    for bid in bids {
        let profile = BidProfile::new(vec![bid.clone()]);
        let table = FirstPrice
            .payment_table(&profile)
            .expect("first price never fails");
        let a = setting.best_response_to_table(&profile, &table);
        if a < min_action {
            continue;
        }
        report.considered += 1;
        let u = setting.principal_utility(0, values, a, &table);
        if report.max_utility.as_ref().is_none_or(|best| u > *best) {
            report.max_utility = Some(u);
            report.argmax = Some(bid.clone());
        }
    }
    report
}

/// `points × points` lattice over the single principal's (truncated) domain.
pub fn pos_bid_grid(setting: &Setting, points: usize, bound: Option<Rational>) -> Vec<Valuation> {
    let bound = bound.unwrap_or_else(|| truncation_bound(setting));
    lattice(setting.domain(0), points, &bound)
}
