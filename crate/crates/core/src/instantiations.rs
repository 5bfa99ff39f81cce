//! Closed-form VCG-style contracts: the auction-inspired contract, which
//! charges each principal her externality, and the graph-weighted contract,
//! which replaces each principal's report by a weighted average of the
//! others' (shifted) reports to keep every payment nonnegative.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{BidProfile, PaymentRule, PaymentTable, RuleError, Setting, Valuation, ValuationDomain};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("a correlation graph needs at least two principals, got {0}")]
    TooFewPrincipals(usize),
    #[error("weight matrix row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("self-loop weight d({0},{0}) must be 0")]
    SelfLoop(usize),
    #[error("weight d({from},{to}) is outside [0, 1]")]
    OutOfRange { from: usize, to: usize },
    #[error("weights into principal {to} sum to {sum}, not 1")]
    ColumnSum { to: usize, sum: Rational },
    #[error("graph has {graph} principals but the setting has {setting}")]
    SizeMismatch { graph: usize, setting: usize },
}

/// Weighted directed graph over principals: `d(k, l)` is the weight of edge
/// `k → l`. Every principal has unit in-weight and no self-loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrelationGraph {
    #[serde(serialize_with = "serialize_matrix")]
    weights: Vec<Vec<Rational>>,
}

fn serialize_matrix<S: serde::Serializer>(w: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Valuation> = w.iter().cloned().map(Valuation).collect();
    rows.serialize(s)
}

impl CorrelationGraph {
    pub fn new(weights: Vec<Vec<Rational>>) -> Result<Self, GraphError> {
        let n = weights.len();
        if n < 2 {
            return Err(GraphError::TooFewPrincipals(n));
        }
        for (k, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::NotSquare {
                    row: k,
                    expected: n,
                    found: row.len(),
                });
            }
            if !row[k].is_zero() {
                return Err(GraphError::SelfLoop(k));
            }
            for (l, d) in row.iter().enumerate() {
                if d.is_negative() || *d > int(1) {
                    return Err(GraphError::OutOfRange { from: k, to: l });
                }
            }
        }
        for l in 0..n {
            let sum: Rational = weights.iter().map(|row| &row[l]).sum();
            if sum != int(1) {
                return Err(GraphError::ColumnSum { to: l, sum });
            }
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// `d(k, l)`.
    pub fn d(&self, k: usize, l: usize) -> &Rational {
        &self.weights[k][l]
    }

    pub fn weights(&self) -> &[Vec<Rational>] {
        &self.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// `d(l, l+1) = 1`, indices mod n.
    Cycle,
    /// `d(l, k) = 1/(n-1)` for every `k != l`.
    Complete,
}

pub fn build_uniform_graph(n: usize, kind: GraphKind) -> Result<CorrelationGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewPrincipals(n));
    }
    let weight = Rational::new(1.into(), ((n - 1) as i64).into());
    let weights = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| match kind {
                    GraphKind::Cycle if l == (k + 1) % n => int(1),
                    GraphKind::Complete if l != k => weight.clone(),
                    _ => Rational::zero(),
                })
                .collect()
        })
        .collect();
    CorrelationGraph::new(weights)
}

/// `v − min_o v(o)`.
pub fn shifted_valuation(v: &[Rational]) -> Valuation {
    let min = v.iter().min().cloned().unwrap_or_else(Rational::zero);
    Valuation(v.iter().map(|x| x - &min).collect())
}

/// `Σ_k d(l, k)·shift(b^k)`: principal `l`'s proxy built from the others.
pub fn weighted_valuation(g: &CorrelationGraph, profile: &BidProfile, l: usize) -> Valuation {
    let m = profile.bid(0).len();
    let mut acc = vec![Rational::zero(); m];
    for k in 0..profile.n() {
        let d = g.d(l, k);
        if d.is_zero() {
            continue;
        }
        for (a, x) in acc.iter_mut().zip(shifted_valuation(profile.bid(k)).0) {
            *a += d * x;
        }
    }
    Valuation(acc)
}

/// Payments `max_a Wel^a(b^{-l}, r) − Wel^{a*(b)}(b^{-l}, r) + r(o)` for a
/// per-principal reference vector `r`.
fn reference_table(
    setting: &Setting,
    profile: &BidProfile,
    star: usize,
    reference: impl Fn(usize) -> Vec<Rational>,
) -> PaymentTable {
    PaymentTable(
        (0..profile.n())
            .map(|l| {
                let r = reference(l);
                let base = setting.max_welfare_with(profile, l, &r)
                    - setting.welfare_with(star, profile, l, &r);
                r.iter().map(|x| &base + x).collect()
            })
            .collect(),
    )
}

/// Each principal pays the welfare the others lose because of her, plus
/// her own bid for the realized outcome.
#[derive(Debug, Clone)]
pub struct AuctionInspired {
    setting: Setting,
}

impl AuctionInspired {
    pub fn new(setting: Setting) -> Self {
        Self { setting }
    }
}

impl PaymentRule for AuctionInspired {
    fn name(&self) -> &str {
        "auction"
    }

    fn payment_table(&self, profile: &BidProfile) -> Result<PaymentTable, RuleError> {
        let star = self.setting.efficient_action(profile);
        let zeros = vec![Rational::zero(); self.setting.num_outcomes()];
        let wel_star = self.setting.welfare(star, profile);
        Ok(PaymentTable(
            (0..profile.n())
                .map(|l| {
                    let base = self.setting.max_welfare_with(profile, l, &zeros) - &wel_star;
                    profile.bid(l).iter().map(|b| &base + b).collect()
                })
                .collect(),
        ))
    }

    fn h_values(&self, profile: &BidProfile) -> Option<Result<Vec<Rational>, RuleError>> {
        let zeros = vec![Rational::zero(); self.setting.num_outcomes()];
        Some(Ok((0..profile.n())
            .map(|l| self.setting.max_welfare_with(profile, l, &zeros))
            .collect()))
    }
}

/// The graph-weighted contract: always LL; IR exactly on G-correlated settings.
#[derive(Debug, Clone)]
pub struct Weighted {
    setting: Setting,
    graph: CorrelationGraph,
}

impl Weighted {
    pub fn new(setting: Setting, graph: CorrelationGraph) -> Result<Self, GraphError> {
        if graph.n() != setting.num_principals() {
            return Err(GraphError::SizeMismatch {
                graph: graph.n(),
                setting: setting.num_principals(),
            });
        }
        Ok(Self { setting, graph })
    }

    pub fn graph(&self) -> &CorrelationGraph {
        &self.graph
    }
}

impl PaymentRule for Weighted {
    fn name(&self) -> &str {
        "weighted"
    }

    fn payment_table(&self, profile: &BidProfile) -> Result<PaymentTable, RuleError> {
        let star = self.setting.efficient_action(profile);
        let table = reference_table(&self.setting, profile, star, |l| {
            weighted_valuation(&self.graph, profile, l).0
        });
        if table.0.iter().flatten().any(Signed::is_negative) {
            return Err(RuleError::Internal(
                "weighted contract produced a negative payment".into(),
            ));
        }
        Ok(table)
    }

    fn h_values(&self, profile: &BidProfile) -> Option<Result<Vec<Rational>, RuleError>> {
        Some(Ok((0..profile.n())
            .map(|l| {
                let r = weighted_valuation(&self.graph, profile, l);
                self.setting.max_welfare_with(profile, l, &r)
            })
            .collect()))
    }
}

/// A profile and principal at which replacing the principal's valuation by
/// her graph-weighted proxy raises the optimal welfare.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GCorrelationViolation {
    pub profile: BidProfile,
    pub principal: usize,
    #[serde(with = "crate::rational::serde_exact")]
    pub proxy_welfare: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub true_welfare: Rational,
}

/// Searches `samples` for a violation of
/// `max_a Wel^a(v^{-l}, v̂^l_G) <= max_a Wel^a(v)`. `None` is evidence, not proof.
pub fn g_correlation_falsify(
    setting: &Setting,
    g: &CorrelationGraph,
    samples: &[BidProfile],
) -> Option<GCorrelationViolation> {
    samples.iter().find_map(|v| {
        let true_welfare = setting.max_welfare(v);
        (0..v.n()).find_map(|l| {
            let proxy = weighted_valuation(g, v, l);
            let proxy_welfare = setting.max_welfare_with(v, l, &proxy);
            (proxy_welfare > true_welfare).then(|| GCorrelationViolation {
                profile: v.clone(),
                principal: l,
                proxy_welfare,
                true_welfare: true_welfare.clone(),
            })
        })
    })
}

/// Which of the two known sufficient conditions for G-correlation hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientConditions {
    /// Singleton domains with equal expected value across principals for every action.
    pub same_expected_value: bool,
    /// Every domain is the same cube `[lo, hi]^m` with `hi − lo <= lo`.
    pub narrow_box: bool,
    /// A graph under which the setting is G-correlated, when either holds.
    pub witness: Option<CorrelationGraph>,
}

pub fn sufficient_condition_check(setting: &Setting) -> SufficientConditions {
    let n = setting.num_principals();
    if n < 2 {
        return SufficientConditions {
            same_expected_value: false,
            narrow_box: false,
            witness: None,
        };
    }
    let singletons: Option<Vec<&Vec<Rational>>> = setting
        .principals()
        .iter()
        .map(|p| match &p.domain {
            ValuationDomain::Box { lower, upper }
                if lower.iter().zip(upper).all(|(lo, hi)| hi.as_ref() == Some(lo)) =>
            {
                Some(lower)
            }
            _ => None,
        })
        .collect();
    let same_expected_value = singletons.is_some_and(|vs| {
        (0..setting.num_actions()).all(|a| {
            let first = setting.expected(a, vs[0]);
            vs.iter().all(|v| setting.expected(a, v) == first)
        })
    });

    let cube = |d: &ValuationDomain| match d {
        ValuationDomain::Box { lower, upper } => {
            let lo = lower.first()?;
            let hi = upper.first()?.as_ref()?;
            (lower.iter().all(|x| x == lo) && upper.iter().all(|x| x.as_ref() == Some(hi)))
                .then(|| (lo.clone(), hi.clone()))
        }
        ValuationDomain::Polytope { .. } => None,
    };
    let first = cube(setting.domain(0));
    let narrow_box = first.as_ref().is_some_and(|(lo, hi)| {
        hi - lo <= *lo && (1..n).all(|l| cube(setting.domain(l)).as_ref() == first.as_ref())
    });

    let witness = (same_expected_value || narrow_box)
        .then(|| build_uniform_graph(n, GraphKind::Complete).expect("n >= 2"));
    SufficientConditions {
        same_expected_value,
        narrow_box,
        witness,
    }
}
