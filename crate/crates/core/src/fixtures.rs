//! Parameterized reference settings and a seeded random setting generator.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::instantiations::CorrelationGraph;
use crate::model::{Action, BidProfile, Principal, Setting, ValuationDomain};
use crate::rational::{int, pow, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parameter out of range: {0}")]
pub struct FixtureError(pub String);

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// Three actions, each yielding its own outcome deterministically, costs
/// `0, eps, gamma`, and `n > 3` single-minded principals: principal 1 values
/// only `o3`, principal 2 only `o2`, the rest only `o1`.
pub fn poa_example(n: usize, gamma: &Rational, eps: &Rational) -> Result<Setting, FixtureError> {
    if n <= 3 {
        return Err(FixtureError(format!("need n > 3 principals, got {n}")));
    }
    if !(eps.is_positive() && eps < gamma && *gamma < int(1)) {
        return Err(FixtureError(format!(
            "need 0 < eps < gamma < 1, got eps = {eps}, gamma = {gamma}"
        )));
    }
    let ray = |k: usize| ValuationDomain::Box {
        lower: vec![Rational::zero(); 3],
        upper: (0..3)
            .map(|o| (o != k).then(Rational::zero))
            .collect(),
    };
    let principals = (1..=n)
        .map(|l| {
            let outcome = match l {
                1 => 2,
                2 => 1,
                _ => 0,
            };
            Principal::new(format!("p{l}"), ray(outcome))
        })
        .collect();
    let identity = (0..3)
        .map(|i| (0..3).map(|o| if i == o { int(1) } else { int(0) }).collect())
        .collect();
    Setting::new(
        vec![
            Action::new("a1", int(0)),
            Action::new("a2", eps.clone()),
            Action::new("a3", gamma.clone()),
        ],
        names("o", 3),
        identity,
        principals,
    )
    .map_err(|e| FixtureError(e.to_string()))
}

/// True valuations of [`poa_example`].
pub fn poa_truthful(n: usize, gamma: &Rational, eps: &Rational) -> BidProfile {
    let mut rows = vec![vec![Rational::zero(); 3]; n];
    rows[0][2] = int(1) + gamma;
    rows[1][1] = int(1) + eps;
    for row in rows.iter_mut().skip(2) {
        row[0] = int(1);
    }
    BidProfile::from_rows(rows)
}

/// The inefficient first-price equilibrium of [`poa_example`]: the two
/// single-minded principals bid truthfully, everyone else bids zero.
pub fn poa_equilibrium(n: usize, gamma: &Rational, eps: &Rational) -> BidProfile {
    let mut rows = vec![vec![Rational::zero(); 3]; n];
    rows[0][2] = int(1) + gamma;
    rows[1][1] = int(1) + eps;
    BidProfile::from_rows(rows)
}

/// `q` actions over two outcomes; action `a_i` yields `o2` with probability
/// `gamma^{q-i}` and costs `gamma^{1-i} − i + (i−1)(gamma + eps)`. One
/// principal whose domain is `[q, ∞)^2`.
pub fn pos_example(q: usize, gamma: &Rational, eps: &Rational) -> Result<Setting, FixtureError> {
    if q < 2 {
        return Err(FixtureError(format!("need q >= 2 actions, got {q}")));
    }
    let inv_q = ratio(1, q as i64);
    if !(gamma.is_positive() && *gamma < inv_q) {
        return Err(FixtureError(format!("need 0 < gamma < 1/q, got {gamma}")));
    }
    if !(eps.is_positive() && *eps <= &inv_q - gamma) {
        return Err(FixtureError(format!("need 0 < eps <= 1/q - gamma, got {eps}")));
    }
    let qi = q as i32;
    let actions = (1..=qi)
        .map(|i| {
            let cost = pow(gamma, 1 - i) - int(i.into()) + int((i - 1).into()) * (gamma + eps);
            Action::new(format!("a{i}"), cost)
        })
        .collect();
    let distribution = (1..=qi)
        .map(|i| {
            let p = pow(gamma, qi - i);
            vec![Rational::one() - &p, p]
        })
        .collect();
    let qr = int(q as i64);
    Setting::new(
        actions,
        names("o", 2),
        distribution,
        vec![Principal::new(
            "p1",
            ValuationDomain::Box {
                lower: vec![qr.clone(), qr],
                upper: vec![None, None],
            },
        )],
    )
    .map_err(|e| FixtureError(e.to_string()))
}

/// `(q, q + gamma^{1-q})`, the true valuation in [`pos_example`].
pub fn pos_truthful(q: usize, gamma: &Rational) -> BidProfile {
    let qr = int(q as i64);
    BidProfile::from_rows(vec![vec![qr.clone(), qr + pow(gamma, 1 - q as i32)]])
}

/// Three principals with domain `[10, 15]^2`; `a1` (cost 0) yields `o1`,
/// `a2` (cost 1) yields `o1` with probability 1/4.
pub fn weighted_example() -> Setting {
    Setting::new(
        vec![Action::new("a1", int(0)), Action::new("a2", int(1))],
        names("o", 2),
        vec![vec![int(1), int(0)], vec![ratio(1, 4), ratio(3, 4)]],
        names("p", 3)
            .into_iter()
            .map(|name| Principal::new(name, ValuationDomain::cube(2, int(10), int(15))))
            .collect(),
    )
    .expect("weighted example is valid")
}

pub fn weighted_truthful() -> BidProfile {
    BidProfile::from_rows(vec![
        vec![int(11), int(13)],
        vec![int(12), int(14)],
        vec![int(10), int(11)],
    ])
}

/// Correlation graph for [`weighted_example`]: `d(1,2) = 4/5`, `d(1,3) = 1/2`,
/// completed with `d(3,2) = 1/5`, `d(2,3) = 1/2`, `d(2,1) = d(3,1) = 1/2`.
pub fn weighted_graph() -> CorrelationGraph {
    CorrelationGraph::new(vec![
        vec![int(0), ratio(4, 5), ratio(1, 2)],
        vec![ratio(1, 2), int(0), ratio(1, 2)],
        vec![ratio(1, 2), ratio(1, 5), int(0)],
    ])
    .expect("completed graph is valid")
}

/// Two actions over two outcomes: `a1` (cost 0) is a coin flip, `a2` (cost
/// `eps`) yields `o2` for sure. One principal with domain `[0, ∞)^2`.
pub fn tradeoff_example(eps: &Rational) -> Result<Setting, FixtureError> {
    if !eps.is_positive() {
        return Err(FixtureError(format!("need eps > 0, got {eps}")));
    }
    Setting::new(
        vec![Action::new("a1", int(0)), Action::new("a2", eps.clone())],
        names("o", 2),
        vec![vec![ratio(1, 2), ratio(1, 2)], vec![int(0), int(1)]],
        vec![Principal::new("p1", ValuationDomain::orthant(2))],
    )
    .map_err(|e| FixtureError(e.to_string()))
}

/// Size limits for [`random_setting`].
#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub max_principals: usize,
    pub max_actions: usize,
    pub max_outcomes: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            max_principals: 3,
            max_actions: 4,
            max_outcomes: 3,
        }
    }
}

/// A random valid setting with bounded box domains and small-denominator data.
pub fn random_setting<R: Rng>(rng: &mut R, spec: RandomSpec) -> Setting {
    let n = rng.gen_range(1..=spec.max_principals);
    let q = rng.gen_range(2..=spec.max_actions.max(2));
    let m = rng.gen_range(2..=spec.max_outcomes.max(2));

    let mut cost = Rational::zero();
    let actions = (0..q)
        .map(|j| {
            if j > 0 {
                cost += ratio(rng.gen_range(1..=8), 4);
            }
            Action::new(format!("a{}", j + 1), cost.clone())
        })
        .collect();
    let distribution = (0..q)
        .map(|_| {
            let mut weights: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=4)).collect();
            if weights.iter().all(|w| *w == 0) {
                let o = rng.gen_range(0..m);
                weights[o] = 1;
            }
            let total: i64 = weights.iter().sum();
            weights.iter().map(|w| ratio(*w, total)).collect()
        })
        .collect();
    let principals = (0..n)
        .map(|l| {
            let lower: Vec<Rational> = (0..m).map(|_| int(rng.gen_range(0..=3))).collect();
            let upper = lower
                .iter()
                .map(|lo| Some(lo + int(rng.gen_range(0..=4))))
                .collect();
            Principal::new(format!("p{}", l + 1), ValuationDomain::Box { lower, upper })
        })
        .collect();
    Setting::new(actions, names("o", m), distribution, principals)
        .expect("generated settings are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pos_costs_and_probabilities() {
        let s = pos_example(3, &ratio(1, 4), &ratio(1, 12)).unwrap();
        let costs: Vec<_> = s.actions().iter().map(|a| a.cost.clone()).collect();
        assert_eq!(costs, vec![int(0), ratio(7, 3), ratio(41, 3)]);
        let p_o2: Vec<_> = s.distribution().iter().map(|r| r[1].clone()).collect();
        assert_eq!(p_o2, vec![ratio(1, 16), ratio(1, 4), int(1)]);
        assert_eq!(pos_truthful(3, &ratio(1, 4)).bid(0).0, vec![int(3), int(19)]);
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        assert!(poa_example(3, &ratio(1, 2), &ratio(1, 4)).is_err());
        assert!(poa_example(4, &ratio(1, 4), &ratio(1, 2)).is_err());
        assert!(pos_example(3, &ratio(1, 3), &ratio(1, 12)).is_err());
        assert!(pos_example(3, &ratio(1, 4), &ratio(1, 6)).is_err());
        assert!(tradeoff_example(&int(0)).is_err());
    }

    #[test]
    fn poa_profiles_are_in_domain() {
        let (g, e) = (ratio(1, 2), ratio(1, 4));
        let s = poa_example(5, &g, &e).unwrap();
        assert!(s.validate_profile(&poa_truthful(5, &g, &e)).is_ok());
        assert!(s.validate_profile(&poa_equilibrium(5, &g, &e)).is_ok());
    }
}
