//! Brute-force audits of a payment rule on a finite grid of profiles:
//! truthfulness, individual rationality, limited liability, agent
//! efficiency, and the VCG expected-payment identity. Every comparison is
//! exact; the first violation in scan order is reported.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::{candidates, truncation_bound};
use crate::model::{BidProfile, PaymentRule, PaymentTable, RuleError, Setting, Valuation};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditConfig {
    /// Lattice points per dimension.
    pub resolution: usize,
    /// Seeded random points per principal.
    pub random_points: usize,
    pub seed: u64,
    /// Truncation edge for unbounded domains; default [`truncation_bound`].
    #[serde(skip)]
    pub bound: Option<Rational>,
    /// Cap on the number of sampled profiles (seeded subsample of the product grid).
    pub max_profiles: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            resolution: 5,
            random_points: 32,
            seed: 0,
            bound: None,
            max_profiles: 256,
        }
    }
}

/// Per-principal candidate valuations plus the sampled profiles.
#[derive(Debug, Clone)]
pub struct AuditGrid {
    pub candidates: Vec<Vec<Valuation>>,
    pub profiles: Vec<BidProfile>,
    pub bound: Rational,
    pub config: AuditConfig,
}

impl AuditGrid {
    pub fn build(setting: &Setting, config: AuditConfig) -> Self {
        let bound = config
            .bound
            .clone()
            .unwrap_or_else(|| truncation_bound(setting));
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let per_principal: Vec<Vec<Valuation>> = setting
            .principals()
            .iter()
            .map(|p| candidates(&p.domain, config.resolution, config.random_points, &bound, &mut rng))
            .collect();
        let total: usize = per_principal
            .iter()
            .map(Vec::len)
            .try_fold(1usize, |acc, k| acc.checked_mul(k))
            .unwrap_or(usize::MAX);
        let profiles = if total <= config.max_profiles {
            product(&per_principal)
        } else {
            let mut seen = std::collections::BTreeSet::new();
            let mut attempts = 0;
            while seen.len() < config.max_profiles && attempts < config.max_profiles * 20 {
                attempts += 1;
                let p = BidProfile::new(
                    per_principal
                        .iter()
                        .map(|c| c.choose(&mut rng).expect("nonempty").clone())
                        .collect(),
                );
                seen.insert(p);
            }
            seen.into_iter().collect()
        };
        Self {
            candidates: per_principal,
            profiles,
            bound,
            config,
        }
    }

    /// Adds profiles (e.g. known witnesses) to the scan.
    pub fn with_profiles(mut self, extra: impl IntoIterator<Item = BidProfile>) -> Self {
        for p in extra {
            if !self.profiles.contains(&p) {
                self.profiles.push(p);
            }
        }
        self
    }
}

fn product(per: &[Vec<Valuation>]) -> Vec<BidProfile> {
    let mut out = vec![Vec::new()];
    for c in per {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Valuation>| {
                c.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(BidProfile::new).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub profile: BidProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub principal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<Valuation>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail(Counterexample),
    NotApplicable,
}

impl Status {
    pub fn passed(&self) -> bool {
        !matches!(self, Status::Fail(_))
    }

    fn fail(profile: &BidProfile, principal: Option<usize>, deviation: Option<Valuation>, detail: String) -> Self {
        Status::Fail(Counterexample {
            profile: profile.clone(),
            principal,
            deviation,
            detail,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMetadata {
    pub resolution: usize,
    pub random_points: usize,
    pub seed: u64,
    #[serde(with = "crate::rational::serde_exact")]
    pub truncation_bound: Rational,
    pub profiles: usize,
    pub candidates_per_principal: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub contract: String,
    pub truthful: Status,
    pub ir: Status,
    pub ll: Status,
    /// The relaxation requiring only the total payment per outcome to be nonnegative.
    pub aggregate_ll: Status,
    pub efficiency: Status,
    pub identity: Status,
    pub grid: GridMetadata,
}

impl AuditReport {
    /// All properties pass (the aggregate relaxation is informational).
    pub fn all_pass(&self) -> bool {
        [&self.truthful, &self.ir, &self.ll, &self.efficiency, &self.identity]
            .iter()
            .all(|s| s.passed())
    }
}

/// Memoizes payment tables per profile for one audit run.
pub struct Auditor<'a> {
    setting: &'a Setting,
    rule: &'a dyn PaymentRule,
    cache: HashMap<BidProfile, Result<PaymentTable, RuleError>>,
}

impl<'a> Auditor<'a> {
    pub fn new(setting: &'a Setting, rule: &'a dyn PaymentRule) -> Self {
        Self {
            setting,
            rule,
            cache: HashMap::new(),
        }
    }

    fn table(&mut self, profile: &BidProfile) -> Result<PaymentTable, RuleError> {
        if let Some(t) = self.cache.get(profile) {
            return t.clone();
        }
        let t = self.rule.payment_table(profile);
        self.cache.insert(profile.clone(), t.clone());
        t
    }

    /// Utility of principal `l` with values `v` at `profile`.
    fn utility(&mut self, l: usize, v: &[Rational], profile: &BidProfile) -> Result<Rational, RuleError> {
        let table = self.table(profile)?;
        let a = self.setting.best_response_to_table(profile, &table);
        Ok(self.setting.principal_utility(l, v, a, &table))
    }

    fn rule_error(profile: &BidProfile, e: RuleError) -> Status {
        Status::fail(profile, None, None, format!("contract undefined: {e}"))
    }

    /// Truth-telling beats every grid deviation, for every sampled profile of
    /// true values (the others' reports being their values).
    pub fn truthful(&mut self, grid: &AuditGrid) -> Status {
        for v in &grid.profiles {
            for l in 0..v.n() {
                let truth = match self.utility(l, v.bid(l), v) {
                    Ok(u) => u,
                    Err(e) => return Self::rule_error(v, e),
                };
                for dev in &grid.candidates[l] {
                    if dev == v.bid(l) {
                        continue;
                    }
                    let deviated = v.with_bid(l, dev.clone());
                    let u = match self.utility(l, v.bid(l), &deviated) {
                        Ok(u) => u,
                        Err(e) => return Self::rule_error(&deviated, e),
                    };
                    if u > truth {
                        return Status::fail(
                            v,
                            Some(l),
                            Some(dev.clone()),
                            format!("deviation earns {u} against {truth} for truth-telling"),
                        );
                    }
                }
            }
        }
        Status::Pass
    }

    pub fn ir(&mut self, grid: &AuditGrid) -> Status {
        for v in &grid.profiles {
            for l in 0..v.n() {
                match self.utility(l, v.bid(l), v) {
                    Ok(u) if u.is_negative() => {
                        return Status::fail(v, Some(l), None, format!("truthful utility {u} < 0"))
                    }
                    Ok(_) => {}
                    Err(e) => return Self::rule_error(v, e),
                }
            }
        }
        Status::Pass
    }

    /// Returns `(per-entry LL, aggregate LL)`.
    pub fn ll(&mut self, grid: &AuditGrid) -> (Status, Status) {
        let mut entry = Status::Pass;
        let mut aggregate = Status::Pass;
        for b in &grid.profiles {
            let table = match self.table(b) {
                Ok(t) => t,
                Err(e) => {
                    let s = Self::rule_error(b, e);
                    return (s.clone(), s);
                }
            };
            if entry.passed() {
                'outer: for (l, row) in table.0.iter().enumerate() {
                    for (o, t) in row.iter().enumerate() {
                        if t.is_negative() {
                            entry = Status::fail(
                                b,
                                Some(l),
                                None,
                                format!("payment {t} at outcome {}", self.setting.outcomes()[o]),
                            );
                            break 'outer;
                        }
                    }
                }
            }
            if aggregate.passed() {
                for o in 0..self.setting.num_outcomes() {
                    let total: Rational = table.for_outcome(o).iter().sum();
                    if total.is_negative() {
                        aggregate = Status::fail(
                            b,
                            None,
                            None,
                            format!("total payment {total} at outcome {}", self.setting.outcomes()[o]),
                        );
                        break;
                    }
                }
            }
            if !entry.passed() && !aggregate.passed() {
                break;
            }
        }
        (entry, aggregate)
    }

    pub fn efficiency(&mut self, grid: &AuditGrid) -> Status {
        for b in &grid.profiles {
            let table = match self.table(b) {
                Ok(t) => t,
                Err(e) => return Self::rule_error(b, e),
            };
            let chosen = self.setting.best_response_to_table(b, &table);
            let efficient = self.setting.efficient_action(b);
            if chosen != efficient {
                return Status::fail(
                    b,
                    None,
                    None,
                    format!(
                        "agent takes {} but {} maximizes declared welfare",
                        self.setting.actions()[chosen].name,
                        self.setting.actions()[efficient].name
                    ),
                );
            }
        }
        Status::Pass
    }

    pub fn identity(&mut self, grid: &AuditGrid) -> Status {
        for b in &grid.profiles {
            let h = match self.rule.h_values(b) {
                None => return Status::NotApplicable,
                Some(Ok(h)) => h,
                Some(Err(e)) => return Self::rule_error(b, e),
            };
            let table = match self.table(b) {
                Ok(t) => t,
                Err(e) => return Self::rule_error(b, e),
            };
            if let Err(l) = expected_payment_identity(self.setting, b, &table, &h) {
                return Status::fail(b, Some(l), None, "expected payment differs from h − Wel(b^{-l}, 0)".into());
            }
        }
        Status::Pass
    }
}

/// Checks `F_{|a*}·t^l = h^l − Wel^{a*}(b^{-l}, 0)` for every principal;
/// returns the first principal where it fails.
pub fn expected_payment_identity(
    setting: &Setting,
    profile: &BidProfile,
    table: &PaymentTable,
    h: &[Rational],
) -> Result<(), usize> {
    let star = setting.efficient_action(profile);
    let zeros = vec![Rational::zero(); setting.num_outcomes()];
    for (l, h) in h.iter().enumerate() {
        let lhs = table.expected(l, setting.row(star));
        let rhs = h - setting.welfare_with(star, profile, l, &zeros);
        if lhs != rhs {
            return Err(l);
        }
    }
    Ok(())
}

/// Runs every audit on `grid`.
pub fn audit(setting: &Setting, rule: &dyn PaymentRule, grid: &AuditGrid) -> AuditReport {
    let mut auditor = Auditor::new(setting, rule);
    let efficiency = auditor.efficiency(grid);
    let (ll, aggregate_ll) = auditor.ll(grid);
    let ir = auditor.ir(grid);
    let identity = auditor.identity(grid);
    let truthful = auditor.truthful(grid);
    AuditReport {
        contract: rule.name().to_string(),
        truthful,
        ir,
        ll,
        aggregate_ll,
        efficiency,
        identity,
        grid: GridMetadata {
            resolution: grid.config.resolution,
            random_points: grid.config.random_points,
            seed: grid.config.seed,
            truncation_bound: grid.bound.clone(),
            profiles: grid.profiles.len(),
            candidates_per_principal: grid.candidates.iter().map(Vec::len).collect(),
        },
    }
}

pub fn audit_truthful(setting: &Setting, rule: &dyn PaymentRule, grid: &AuditGrid) -> Status {
    Auditor::new(setting, rule).truthful(grid)
}

pub fn audit_ir(setting: &Setting, rule: &dyn PaymentRule, grid: &AuditGrid) -> Status {
    Auditor::new(setting, rule).ir(grid)
}

/// `(per-entry LL, aggregate LL)`.
pub fn audit_ll(setting: &Setting, rule: &dyn PaymentRule, grid: &AuditGrid) -> (Status, Status) {
    Auditor::new(setting, rule).ll(grid)
}

pub fn audit_efficiency(setting: &Setting, rule: &dyn PaymentRule, grid: &AuditGrid) -> Status {
    Auditor::new(setting, rule).efficiency(grid)
}

pub fn audit_expected_payment_identity(
    setting: &Setting,
    rule: &dyn PaymentRule,
    grid: &AuditGrid,
) -> Status {
    Auditor::new(setting, rule).identity(grid)
}
