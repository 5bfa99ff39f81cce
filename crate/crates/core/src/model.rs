//! Common agency settings: actions with costs, outcomes, the outcome
//! distribution of every action, and one valuation domain per principal.
//!
//! Everything here is a pure function of immutable values.

use std::fmt;
use std::ops::Deref;

use num_traits::{Signed, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};
use thiserror::Error;

use crate::lp::{self, LinearProgram, LpError, LpResult, Sense};
use crate::rational::{dot, to_exact_string, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub cost: Rational,
}

impl Action {
    pub fn new(name: impl Into<String>, cost: Rational) -> Self {
        Self {
            name: name.into(),
            cost,
        }
    }
}

/// One linear inequality `coeffs · x <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

/// The set of valuations a principal may hold or report. Always convex and
/// inside the nonnegative orthant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuationDomain {
    /// `lower <= x <= upper` coordinatewise; a missing upper bound is `+inf`.
    Box {
        lower: Vec<Rational>,
        upper: Vec<Option<Rational>>,
    },
    /// `rows` intersected with `x >= 0`.
    Polytope { rows: Vec<LinearRow> },
}

impl ValuationDomain {
    /// `[0, +inf)^m`.
    pub fn orthant(m: usize) -> Self {
        ValuationDomain::Box {
            lower: vec![Rational::zero(); m],
            upper: vec![None; m],
        }
    }

    /// `[lo, hi]^m`.
    pub fn cube(m: usize, lo: Rational, hi: Rational) -> Self {
        ValuationDomain::Box {
            lower: vec![lo; m],
            upper: vec![Some(hi); m],
        }
    }

    /// The single valuation `v`.
    pub fn singleton(v: &[Rational]) -> Self {
        ValuationDomain::Box {
            lower: v.to_vec(),
            upper: v.iter().cloned().map(Some).collect(),
        }
    }

    /// Number of outcomes the domain is written over. For a polytope without
    /// rows this is unknown and reported as `None`.
    fn declared_dim(&self) -> Option<usize> {
        match self {
            ValuationDomain::Box { lower, .. } => Some(lower.len()),
            ValuationDomain::Polytope { rows } => rows.first().map(|r| r.coeffs.len()),
        }
    }

    pub fn dim(&self) -> usize {
        self.declared_dim().unwrap_or(0)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        match self {
            ValuationDomain::Box { lower, upper } => {
                x.len() == lower.len()
                    && x.iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(v, (lo, hi))| v >= lo && hi.as_ref().is_none_or(|h| v <= h))
            }
            ValuationDomain::Polytope { rows } => {
                x.iter().all(|v| !v.is_negative())
                    && rows
                        .iter()
                        .all(|r| r.coeffs.len() == x.len() && dot(&r.coeffs, x) <= r.rhs)
            }
        }
    }

    /// True when every coordinate has a finite upper bound (boxes only; a
    /// polytope is reported bounded if an LP can bound every coordinate).
    pub fn is_bounded(&self) -> bool {
        match self {
            ValuationDomain::Box { upper, .. } => upper.iter().all(Option::is_some),
            ValuationDomain::Polytope { .. } => {
                (0..self.dim()).all(|k| self.coordinate_max(k).is_some())
            }
        }
    }

    /// `max x_k` over the domain, `None` when unbounded.
    pub fn coordinate_max(&self, k: usize) -> Option<Rational> {
        match self {
            ValuationDomain::Box { upper, .. } => upper[k].clone(),
            ValuationDomain::Polytope { .. } => {
                let m = self.dim();
                let mut objective = vec![Rational::zero(); m];
                objective[k] = Rational::from_integer(1.into());
                let mut lp = LinearProgram::new(Sense::Maximize, objective);
                lp::restrict_to_domain(&mut lp, self, 0);
                match lp::solve(&lp) {
                    Ok(LpResult::Optimal(s)) => Some(s.value),
                    _ => None,
                }
            }
        }
    }

    /// Largest finite number appearing as a bound of the domain (lower bounds,
    /// finite upper bounds, polytope coordinate maxima).
    pub fn max_finite_bound(&self) -> Rational {
        let mut best = Rational::zero();
        match self {
            ValuationDomain::Box { lower, upper } => {
                for v in lower.iter().chain(upper.iter().flatten()) {
                    if *v > best {
                        best = v.clone();
                    }
                }
            }
            ValuationDomain::Polytope { .. } => {
                for k in 0..self.dim() {
                    if let Some(v) = self.coordinate_max(k) {
                        if v > best {
                            best = v;
                        }
                    }
                }
            }
        }
        best
    }

    fn validate(&self, principal: usize, m: usize) -> Result<(), ModelError> {
        match self {
            ValuationDomain::Box { lower, upper } => {
                if lower.len() != m || upper.len() != m {
                    return Err(ModelError::DomainDimension {
                        principal,
                        expected: m,
                    });
                }
                for (k, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if lo.is_negative() || hi.as_ref().is_some_and(|h| h < lo) {
                        return Err(ModelError::InvalidBox {
                            principal,
                            coordinate: k,
                        });
                    }
                }
                Ok(())
            }
            ValuationDomain::Polytope { rows } => {
                if rows.iter().any(|r| r.coeffs.len() != m) {
                    return Err(ModelError::DomainDimension {
                        principal,
                        expected: m,
                    });
                }
                let mut lp = LinearProgram::new(Sense::Minimize, vec![Rational::zero(); m]);
                lp::restrict_to_domain(&mut lp, self, 0);
                match lp::solve(&lp)? {
                    LpResult::Optimal(_) => Ok(()),
                    _ => Err(ModelError::EmptyDomain { principal }),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principal {
    pub name: String,
    pub domain: ValuationDomain,
}

impl Principal {
    pub fn new(name: impl Into<String>, domain: ValuationDomain) -> Self {
        Self {
            name: name.into(),
            domain,
        }
    }
}

/// A value (or bid) per outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(pub Vec<Rational>);

impl Valuation {
    pub fn zeros(m: usize) -> Self {
        Valuation(vec![Rational::zero(); m])
    }
}

impl Deref for Valuation {
    type Target = [Rational];
    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

impl From<Vec<Rational>> for Valuation {
    fn from(v: Vec<Rational>) -> Self {
        Valuation(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for v in &self.0 {
            seq.serialize_element(&to_exact_string(v))?;
        }
        seq.end()
    }
}

/// One bid (or valuation) per principal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct BidProfile(pub Vec<Valuation>);

impl BidProfile {
    pub fn new(bids: Vec<Valuation>) -> Self {
        BidProfile(bids)
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        BidProfile(rows.into_iter().map(Valuation).collect())
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        BidProfile(vec![Valuation::zeros(m); n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn bid(&self, l: usize) -> &Valuation {
        &self.0[l]
    }

    /// Coordinatewise sum of every bid.
    pub fn total(&self) -> Vec<Rational> {
        let m = self.0.first().map_or(0, |b| b.len());
        let mut acc = vec![Rational::zero(); m];
        for b in &self.0 {
            for (a, v) in acc.iter_mut().zip(b.iter()) {
                *a += v;
            }
        }
        acc
    }

    /// `b^{-l}` summed coordinatewise: the total of every bid except `l`'s.
    pub fn others_total(&self, l: usize) -> Vec<Rational> {
        let m = self.0.first().map_or(0, |b| b.len());
        let mut acc = vec![Rational::zero(); m];
        for (k, b) in self.0.iter().enumerate() {
            if k == l {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(b.iter()) {
                *a += v;
            }
        }
        acc
    }

    /// The profile with bid `l` replaced by `v`.
    pub fn with_bid(&self, l: usize, v: Valuation) -> Self {
        let mut out = self.clone();
        out.0[l] = v;
        out
    }
}

impl fmt::Display for BidProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Payments `t^l(b, o)` for one bid profile, indexed `[principal][outcome]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaymentTable(pub Vec<Vec<Rational>>);

impl PaymentTable {
    pub fn payment(&self, l: usize, o: usize) -> &Rational {
        &self.0[l][o]
    }

    /// Payments of every principal for outcome `o`.
    pub fn for_outcome(&self, o: usize) -> Vec<Rational> {
        self.0.iter().map(|row| row[o].clone()).collect()
    }

    /// `Σ_o row(o)·t^l(b, o)`.
    pub fn expected(&self, l: usize, row: &[Rational]) -> Rational {
        dot(row, &self.0[l])
    }

    /// `Σ_l Σ_o row(o)·t^l(b, o)`.
    pub fn total_expected(&self, row: &[Rational]) -> Rational {
        (0..self.0.len()).map(|l| self.expected(l, row)).sum()
    }
}

/// Why a payment rule could not produce payments at a profile.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("no contract with limited liability and individual rationality exists at this profile: action {action} needs k = {k} but the principals can bear only {sum_m}")]
    Impossible {
        action: usize,
        k: Rational,
        sum_m: Rational,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// A contract: maps a bid profile to per-principal, per-outcome payments.
pub trait PaymentRule: Sync {
    fn name(&self) -> &str;

    /// `t^l(b, o)` for every principal `l` and outcome `o`.
    fn payment_table(&self, profile: &BidProfile) -> Result<PaymentTable, RuleError>;

    /// `t^l(b, o)` for every principal at one outcome.
    fn payments(&self, profile: &BidProfile, o: usize) -> Result<Vec<Rational>, RuleError> {
        Ok(self.payment_table(profile)?.for_outcome(o))
    }

    /// For contracts of the VCG family, the per-principal terms `h^l(b^{-l})`
    /// their expected payments are pinned to. `None` when not applicable.
    fn h_values(&self, _profile: &BidProfile) -> Option<Result<Vec<Rational>, RuleError>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a setting needs at least one {0}")]
    Empty(&'static str),
    #[error("distribution has {found} rows, expected one per action ({expected})")]
    DistributionRows { expected: usize, found: usize },
    #[error("distribution row {row} has {found} entries, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("distribution row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: Rational },
    #[error("distribution row {row}, column {col} is outside [0, 1]")]
    EntryRange { row: usize, col: usize },
    #[error("action {action} has a negative cost")]
    NegativeCost { action: usize },
    #[error("actions {first} and {second} have the same cost")]
    DuplicateCost { first: usize, second: usize },
    #[error("no action has cost 0")]
    NoZeroCost,
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("domain of principal {principal} is not over {expected} outcomes")]
    DomainDimension { principal: usize, expected: usize },
    #[error("box domain of principal {principal} is invalid at coordinate {coordinate}")]
    InvalidBox { principal: usize, coordinate: usize },
    #[error("domain of principal {principal} is empty")]
    EmptyDomain { principal: usize },
    #[error("expected {expected} bids, found {found}")]
    BidCount { expected: usize, found: usize },
    #[error("bid of principal {principal} has {found} entries, expected {expected}")]
    BidLength {
        principal: usize,
        expected: usize,
        found: usize,
    },
    #[error("bid of principal {principal} is outside its domain")]
    BidOutsideDomain { principal: usize },
    #[error("vectors of length {left} and {right} cannot be combined")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `Σ_o row(o)·v(o)`.
pub fn expected_value(row: &[Rational], v: &[Rational]) -> Result<Rational, ModelError> {
    if row.len() != v.len() {
        return Err(ModelError::DimensionMismatch {
            left: row.len(),
            right: v.len(),
        });
    }
    Ok(dot(row, v))
}

/// A validated common agency instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Setting {
    actions: Vec<Action>,
    outcomes: Vec<String>,
    distribution: Vec<Vec<Rational>>,
    principals: Vec<Principal>,
}

impl Setting {
    pub fn new(
        actions: Vec<Action>,
        outcomes: Vec<String>,
        distribution: Vec<Vec<Rational>>,
        principals: Vec<Principal>,
    ) -> Result<Self, ModelError> {
        if actions.is_empty() {
            return Err(ModelError::Empty("action"));
        }
        if outcomes.is_empty() {
            return Err(ModelError::Empty("outcome"));
        }
        if principals.is_empty() {
            return Err(ModelError::Empty("principal"));
        }
        let m = outcomes.len();
        if distribution.len() != actions.len() {
            return Err(ModelError::DistributionRows {
                expected: actions.len(),
                found: distribution.len(),
            });
        }
        for (j, row) in distribution.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::RowLength {
                    row: j,
                    expected: m,
                    found: row.len(),
                });
            }
            for (o, p) in row.iter().enumerate() {
                if p.is_negative() || *p > Rational::from_integer(1.into()) {
                    return Err(ModelError::EntryRange { row: j, col: o });
                }
            }
            let sum: Rational = row.iter().sum();
            if sum != Rational::from_integer(1.into()) {
                return Err(ModelError::RowSum { row: j, sum });
            }
        }
        for (j, a) in actions.iter().enumerate() {
            if a.cost.is_negative() {
                return Err(ModelError::NegativeCost { action: j });
            }
            if let Some(i) = actions[..j].iter().position(|b| b.cost == a.cost) {
                return Err(ModelError::DuplicateCost {
                    first: i,
                    second: j,
                });
            }
        }
        if !actions.iter().any(|a| a.cost.is_zero()) {
            return Err(ModelError::NoZeroCost);
        }
        check_unique("action", actions.iter().map(|a| a.name.as_str()))?;
        check_unique("outcome", outcomes.iter().map(String::as_str))?;
        check_unique("principal", principals.iter().map(|p| p.name.as_str()))?;
        for (l, p) in principals.iter().enumerate() {
            p.domain.validate(l, m)?;
        }
        Ok(Self {
            actions,
            outcomes,
            distribution,
            principals,
        })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn distribution(&self) -> &[Vec<Rational>] {
        &self.distribution
    }

    pub fn principals(&self) -> &[Principal] {
        &self.principals
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn num_principals(&self) -> usize {
        self.principals.len()
    }

    pub fn cost(&self, a: usize) -> &Rational {
        &self.actions[a].cost
    }

    /// `F_{|a}`.
    pub fn row(&self, a: usize) -> &[Rational] {
        &self.distribution[a]
    }

    pub fn domain(&self, l: usize) -> &ValuationDomain {
        &self.principals[l].domain
    }

    pub fn zero_cost_action(&self) -> usize {
        self.actions
            .iter()
            .position(|a| a.cost.is_zero())
            .expect("validated settings have a zero-cost action")
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn outcome_index(&self, name: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == name)
    }

    /// Checks shape and domain membership of a bid profile.
    pub fn validate_profile(&self, profile: &BidProfile) -> Result<(), ModelError> {
        if profile.n() != self.num_principals() {
            return Err(ModelError::BidCount {
                expected: self.num_principals(),
                found: profile.n(),
            });
        }
        for (l, b) in profile.0.iter().enumerate() {
            if b.len() != self.num_outcomes() {
                return Err(ModelError::BidLength {
                    principal: l,
                    expected: self.num_outcomes(),
                    found: b.len(),
                });
            }
            if !self.domain(l).contains(b) {
                return Err(ModelError::BidOutsideDomain { principal: l });
            }
        }
        Ok(())
    }

    /// `F_{|a}·v`.
    pub fn expected(&self, a: usize, v: &[Rational]) -> Rational {
        dot(self.row(a), v)
    }

    /// Welfare of `a` when the principals' values sum to `total`.
    pub fn welfare_of_total(&self, a: usize, total: &[Rational]) -> Rational {
        self.expected(a, total) - self.cost(a)
    }

    /// `Wel^a(b) = Σ_l F_{|a}·b^l − ψ(a)`.
    pub fn welfare(&self, a: usize, profile: &BidProfile) -> Rational {
        self.welfare_of_total(a, &profile.total())
    }

    /// `Wel^a(b^{-l}, w)`: welfare with bid `l` replaced by `w`.
    pub fn welfare_with(&self, a: usize, profile: &BidProfile, l: usize, w: &[Rational]) -> Rational {
        let mut total = profile.others_total(l);
        for (t, x) in total.iter_mut().zip(w) {
            *t += x;
        }
        self.welfare_of_total(a, &total)
    }

    /// Welfare-maximizing action for the summed values, ties to the highest cost.
    pub fn efficient_action_for_total(&self, total: &[Rational]) -> usize {
        let mut best = 0;
        let mut best_wel = self.welfare_of_total(0, total);
        for a in 1..self.num_actions() {
            let wel = self.welfare_of_total(a, total);
            if wel > best_wel || (wel == best_wel && self.cost(a) > self.cost(best)) {
                best = a;
                best_wel = wel;
            }
        }
        best
    }

    /// `a*(b)`: the welfare-maximizing action, ties to the highest cost.
    pub fn efficient_action(&self, profile: &BidProfile) -> usize {
        self.efficient_action_for_total(&profile.total())
    }

    /// `max_a Wel^a` for the summed values.
    pub fn max_welfare_of_total(&self, total: &[Rational]) -> Rational {
        let a = self.efficient_action_for_total(total);
        self.welfare_of_total(a, total)
    }

    pub fn max_welfare(&self, profile: &BidProfile) -> Rational {
        self.max_welfare_of_total(&profile.total())
    }

    /// `max_a Wel^a(b^{-l}, w)`.
    pub fn max_welfare_with(&self, profile: &BidProfile, l: usize, w: &[Rational]) -> Rational {
        let mut total = profile.others_total(l);
        for (t, x) in total.iter_mut().zip(w) {
            *t += x;
        }
        self.max_welfare_of_total(&total)
    }

    /// The agent's choice given a payment table: maximum utility, then maximum
    /// declared welfare, then maximum cost.
    pub fn best_response_to_table(&self, profile: &BidProfile, table: &PaymentTable) -> usize {
        let total = profile.total();
        let key = |a: usize| {
            (
                table.total_expected(self.row(a)) - self.cost(a),
                self.welfare_of_total(a, &total),
            )
        };
        let mut best = 0;
        let mut best_key = key(0);
        for a in 1..self.num_actions() {
            let k = key(a);
            let better = match k.0.cmp(&best_key.0) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => match k.1.cmp(&best_key.1) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => self.cost(a) > self.cost(best),
                },
            };
            if better {
                best = a;
                best_key = k;
            }
        }
        best
    }

    /// `x*(b)` under `rule`.
    pub fn agent_best_response(
        &self,
        profile: &BidProfile,
        rule: &dyn PaymentRule,
    ) -> Result<usize, RuleError> {
        let table = rule.payment_table(profile)?;
        Ok(self.best_response_to_table(profile, &table))
    }

    /// Whether `a ∈ argmax_{a'} F_{|a'}·w − ψ(a')` (no tie-breaking).
    pub fn in_incentive_set(&self, w: &[Rational], a: usize) -> bool {
        let target = self.welfare_of_total(a, w);
        (0..self.num_actions()).all(|j| self.welfare_of_total(j, w) <= target)
    }

    /// Expected utility of principal `l` with true values `v` when the agent
    /// takes `a` and payments are `table`.
    pub fn principal_utility(
        &self,
        l: usize,
        v: &[Rational],
        a: usize,
        table: &PaymentTable,
    ) -> Rational {
        self.expected(a, v) - table.expected(l, self.row(a))
    }
}

fn check_unique<'a>(
    kind: &'static str,
    names: impl Iterator<Item = &'a str>,
) -> Result<(), ModelError> {
    let mut seen = std::collections::HashSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(ModelError::DuplicateName {
                kind,
                name: name.to_string(),
            });
        }
    }
    Ok(())
}
