//! The algorithmic IIVCG contract: per-profile payments with limited liability
//! and individual rationality, and the decision of whether such a contract
//! exists for a setting at all.
//!
//! Notation: `b^{-l}` is the sum of every bid except principal `l`'s,
//! `a*(b)` the declared-welfare-maximizing action (ties to the higher cost),
//! `h^l(b^{-l})` the smallest achievable maximum welfare when `l`'s bid ranges
//! over her domain, `m^l(b)` the most `l` can be charged in expectation
//! without violating IR, and `k_a` the least total expected payment that
//! makes `a` a best response under limited liability.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::lp::{self, LinearProgram, LpResult, Relation, Sense};
use crate::model::{BidProfile, PaymentRule, PaymentTable, RuleError, Setting, Valuation};
use crate::rational::{pow, ratio, Rational};

/// Everything needed to write down the payments at one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractParams {
    pub star: usize,
    pub h: Vec<Rational>,
    pub m_bounds: Vec<Rational>,
    pub k: Rational,
    pub w_base: Vec<Rational>,
    pub shares: Vec<Rational>,
}

impl ContractParams {
    pub fn sum_m(&self) -> Rational {
        self.m_bounds.iter().sum()
    }

    /// Principal `l`'s outcome-specific payment vector `x_l · w^b`.
    pub fn incentive(&self, l: usize) -> Vec<Rational> {
        self.w_base.iter().map(|w| w * &self.shares[l]).collect()
    }
}

/// How the efficiency region `{b : a*(b) = a}` is encoded in the minimization
/// of `Σ_l m^l(b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionMode {
    /// Weak inequalities: the closure of the region.
    Closure,
    /// Competitors with a higher cost must be beaten by at least `eps`;
    /// cheaper ones only matched. Every feasible point is inside the region.
    Strict(Rational),
}

/// The default margin for [`RegionMode::Strict`]: `2^-20`.
pub fn default_strict_eps() -> Rational {
    pow(&ratio(1, 2), 20)
}

/// Outcome of the existence test for one action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionCheck {
    pub action: usize,
    /// `k_a`; absent when no nonnegative payment vector makes `a` a best response.
    #[serde(with = "opt_exact")]
    pub k: Option<Rational>,
    /// Minimum of `Σ_l m^l(b)` over the (closure of the) region where `a` is efficient;
    /// absent when that region is empty.
    #[serde(with = "opt_exact")]
    pub min_sum_m: Option<Rational>,
    pub passed: bool,
    /// Set when the closure minimum fell below `k_a` only on the region's boundary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A profile at which no payment can be both LL and IR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub action: usize,
    pub profile: BidProfile,
    #[serde(with = "crate::rational::serde_exact")]
    pub k: Rational,
    #[serde(with = "crate::rational::serde_exact")]
    pub sum_m: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Possible { checks: Vec<ActionCheck> },
    Impossible { witness: Witness, checks: Vec<ActionCheck> },
}

impl Verdict {
    pub fn is_possible(&self) -> bool {
        matches!(self, Verdict::Possible { .. })
    }

    pub fn checks(&self) -> &[ActionCheck] {
        match self {
            Verdict::Possible { checks } | Verdict::Impossible { checks, .. } => checks,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Possible { .. } => None,
            Verdict::Impossible { witness, .. } => Some(witness),
        }
    }
}

mod opt_exact {
    use super::Rational;
    use crate::rational::to_exact_string;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&to_exact_string(r)),
            None => s.serialize_none(),
        }
    }
}

/// Evaluates `t^l(b, o) = h − Wel^{star}(b^{-l}, w) + w(o)`.
pub fn assemble_payment(
    setting: &Setting,
    h: &Rational,
    star: usize,
    profile: &BidProfile,
    l: usize,
    w: &[Rational],
    o: usize,
) -> Rational {
    h - setting.welfare_with(star, profile, l, w) + &w[o]
}

/// A maximizer of `Σ x` subject to `Σ x <= 1`, `x_l·k <= m_l`, `x >= 0`.
///
/// Among the optimal points, principals are filled greedily in index order,
/// each taking as much as its bound allows; with `k = 0` the first principal
/// takes everything.
pub fn compute_shares(k: &Rational, m_bounds: &[Rational]) -> Vec<Rational> {
    let n = m_bounds.len();
    let mut lp = LinearProgram::new(Sense::Maximize, vec![Rational::one(); n]);
    lp.add_constraint(vec![Rational::one(); n], Relation::Le, Rational::one());
    for (l, m) in m_bounds.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); n];
        coeffs[l] = k.clone();
        lp.add_constraint(coeffs, Relation::Le, m.clone());
    }
    let optimum = lp::solve(&lp)
        .ok()
        .and_then(LpResult::optimal)
        .expect("the share program is feasible and bounded")
        .value;

    let mut remaining = Rational::one();
    let shares: Vec<Rational> = m_bounds
        .iter()
        .map(|m| {
            let cap = if k.is_zero() {
                remaining.clone()
            } else {
                (m / k).min(remaining.clone())
            };
            remaining -= &cap;
            cap
        })
        .collect();
    debug_assert_eq!(shares.iter().sum::<Rational>(), optimum);
    shares
}

/// Precomputed per-setting data plus a memo of `h^l(b^{-l})`.
pub struct Engine {
    setting: Setting,
    k: Vec<Option<(Rational, Vec<Rational>)>>,
    h_memo: Mutex<HashMap<(usize, Vec<Rational>), Rational>>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("setting", &self.setting)
            .field("k", &self.k)
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(setting: Setting) -> Result<Self, RuleError> {
        let k = (0..setting.num_actions())
            .map(|a| compute_k(&setting, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            setting,
            k,
            h_memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    /// `(k_a, w)` with `w` a cheapest LL payment vector inducing `a`;
    /// `None` when no nonnegative payment vector induces `a`.
    pub fn k(&self, a: usize) -> Option<&(Rational, Vec<Rational>)> {
        self.k[a].as_ref()
    }

    /// `h^l` given the sum of the other principals' bids.
    pub fn h(&self, l: usize, others_total: &[Rational]) -> Result<Rational, RuleError> {
        let key = (l, others_total.to_vec());
        if let Some(h) = self.h_memo.lock().expect("memo lock").get(&key) {
            return Ok(h.clone());
        }
        let h = compute_h(&self.setting, l, others_total)?;
        self.h_memo.lock().expect("memo lock").insert(key, h.clone());
        Ok(h)
    }

    /// `(h^l(b^{-l}), m^l(b))`.
    pub fn compute_m(&self, l: usize, profile: &BidProfile) -> Result<(Rational, Rational), RuleError> {
        let star = self.setting.efficient_action(profile);
        self.compute_m_for(l, profile, star)
    }

    fn compute_m_for(
        &self,
        l: usize,
        profile: &BidProfile,
        star: usize,
    ) -> Result<(Rational, Rational), RuleError> {
        let others = profile.others_total(l);
        let h = self.h(l, &others)?;
        let m = &h - self.setting.welfare_of_total(star, &others);
        if m.is_negative() {
            return Err(RuleError::Internal(format!(
                "negative IR bound {m} for principal {l}"
            )));
        }
        Ok((h, m))
    }

    /// Per-profile parameters, or `Impossible` when `k_{a*(b)} > Σ_l m^l(b)`.
    pub fn contract_params(&self, profile: &BidProfile) -> Result<ContractParams, RuleError> {
        let star = self.setting.efficient_action(profile);
        let (h, m_bounds): (Vec<_>, Vec<_>) = (0..profile.n())
            .map(|l| self.compute_m_for(l, profile, star))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        let (k, w_base) = self.k[star].clone().ok_or_else(|| {
            RuleError::Internal(format!("efficient action {star} cannot be incentivized"))
        })?;
        let sum_m: Rational = m_bounds.iter().sum();
        if k > sum_m {
            return Err(RuleError::Impossible {
                action: star,
                k,
                sum_m,
            });
        }
        let shares = compute_shares(&k, &m_bounds);
        Ok(ContractParams {
            star,
            h,
            m_bounds,
            k,
            w_base,
            shares,
        })
    }

    pub fn payment_table_from(&self, profile: &BidProfile, params: &ContractParams) -> PaymentTable {
        let m = self.setting.num_outcomes();
        PaymentTable(
            (0..profile.n())
                .map(|l| {
                    let w = params.incentive(l);
                    let base =
                        &params.h[l] - self.setting.welfare_with(params.star, profile, l, &w);
                    (0..m).map(|o| &base + &w[o]).collect()
                })
                .collect(),
        )
    }

    /// Payments of every principal at every outcome.
    pub fn alg1_payment_table(&self, profile: &BidProfile) -> Result<PaymentTable, RuleError> {
        let params = self.contract_params(profile)?;
        Ok(self.payment_table_from(profile, &params))
    }

    /// `t^l(b, o)` for every principal.
    pub fn alg1_payments(&self, profile: &BidProfile, o: usize) -> Result<Vec<Rational>, RuleError> {
        Ok(self.alg1_payment_table(profile)?.for_outcome(o))
    }

    /// Minimum of `Σ_l m^l(b)` over profiles where `a` is efficient, with a
    /// minimizing profile; `None` when no such profile exists.
    pub fn min_sum_m(
        &self,
        a: usize,
        mode: &RegionMode,
    ) -> Result<Option<(Rational, BidProfile)>, RuleError> {
        min_sum_m(&self.setting, a, mode)
    }

    /// Decides whether some IIVCG contract has limited liability and
    /// individual rationality. `strict_eps` forces the strict region encoding.
    pub fn alg2_exists(&self, strict_eps: Option<&Rational>) -> Result<Verdict, RuleError> {
        let mut checks = Vec::new();
        let mut witness = None;
        for a in 0..self.setting.num_actions() {
            let (check, found) = self.check_action(a, strict_eps)?;
            checks.push(check);
            if witness.is_none() {
                witness = found;
            }
        }
        Ok(match witness {
            Some(witness) => Verdict::Impossible { witness, checks },
            None => Verdict::Possible { checks },
        })
    }

    fn check_action(
        &self,
        a: usize,
        strict_eps: Option<&Rational>,
    ) -> Result<(ActionCheck, Option<Witness>), RuleError> {
        let mut check = ActionCheck {
            action: a,
            k: None,
            min_sum_m: None,
            passed: true,
            note: None,
        };
        let Some((k, _)) = self.k[a].clone() else {
            // an action no payment can induce is never efficient either
            return Ok((check, None));
        };
        check.k = Some(k.clone());
        let first_mode = match strict_eps {
            Some(eps) => RegionMode::Strict(eps.clone()),
            None => RegionMode::Closure,
        };
        let Some((value, profile)) = self.min_sum_m(a, &first_mode)? else {
            return Ok((check, None));
        };
        check.min_sum_m = Some(value.clone());
        if k <= value {
            return Ok((check, None));
        }
        if let Some(w) = self.verify_witness(a, &k, profile)? {
            check.passed = false;
            return Ok((check, Some(w)));
        }
        if strict_eps.is_none() {
            let eps = default_strict_eps();
            if let Some((value, profile)) = self.min_sum_m(a, &RegionMode::Strict(eps.clone()))? {
                if value < k {
                    if let Some(w) = self.verify_witness(a, &k, profile)? {
                        check.passed = false;
                        return Ok((check, Some(w)));
                    }
                }
            }
            check.note = Some(format!(
                "minimum below k only on the boundary of the efficiency region; \
                 no interior witness at margin {eps}"
            ));
        }
        Ok((check, None))
    }

    /// Re-derives `a*(b)` and `Σ m^l(b)` at `profile` from scratch.
    fn verify_witness(
        &self,
        a: usize,
        k: &Rational,
        profile: BidProfile,
    ) -> Result<Option<Witness>, RuleError> {
        if self.setting.efficient_action(&profile) != a {
            return Ok(None);
        }
        let mut sum_m = Rational::zero();
        for l in 0..profile.n() {
            sum_m += self.compute_m_for(l, &profile, a)?.1;
        }
        Ok((sum_m < *k).then(|| Witness {
            action: a,
            profile,
            k: k.clone(),
            sum_m,
        }))
    }
}

/// `h^l = min_{v ∈ V^l} max_j F_{|a_j}·(others_total + v) − ψ(a_j)`.
pub fn compute_h(setting: &Setting, l: usize, others_total: &[Rational]) -> Result<Rational, RuleError> {
    let m = setting.num_outcomes();
    let mut objective = vec![Rational::zero(); m + 1];
    objective[m] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    lp.set_free(m);
    lp::restrict_to_domain(&mut lp, setting.domain(l), 0);
    for j in 0..setting.num_actions() {
        let mut coeffs = setting.row(j).to_vec();
        coeffs.push(-Rational::one());
        let rhs = setting.cost(j) - setting.expected(j, others_total);
        lp.add_constraint(coeffs, Relation::Le, rhs);
    }
    match lp::solve(&lp)? {
        LpResult::Optimal(s) => Ok(s.value),
        other => Err(RuleError::Internal(format!(
            "IR bound program for principal {l} returned {other:?}"
        ))),
    }
}

/// `k_a = min F_{|a}·w` over `w >= 0` making `a` a best response, with a minimizer.
pub fn compute_k(setting: &Setting, a: usize) -> Result<Option<(Rational, Vec<Rational>)>, RuleError> {
    let mut lp = LinearProgram::new(Sense::Minimize, setting.row(a).to_vec());
    for j in 0..setting.num_actions() {
        if j == a {
            continue;
        }
        let coeffs = setting
            .row(j)
            .iter()
            .zip(setting.row(a))
            .map(|(fj, fa)| fj - fa)
            .collect();
        lp.add_constraint(coeffs, Relation::Le, setting.cost(j) - setting.cost(a));
    }
    match lp::solve(&lp)? {
        LpResult::Optimal(s) => Ok(Some((s.value, s.point))),
        LpResult::Infeasible => Ok(None),
        LpResult::Unbounded => Err(RuleError::Internal(format!(
            "incentive program for action {a} is unbounded"
        ))),
    }
}

/// Minimizes `Σ_l m^l(b)` jointly over the bids, the per-principal IR
/// minimizers and the `h` terms, subject to `a` being efficient at `b`.
pub fn min_sum_m(
    setting: &Setting,
    a: usize,
    mode: &RegionMode,
) -> Result<Option<(Rational, BidProfile)>, RuleError> {
    let n = setting.num_principals();
    let m = setting.num_outcomes();
    let q = setting.num_actions();
    let bid = |l: usize, o: usize| l * m + o;
    let alt = |l: usize, o: usize| n * m + l * m + o;
    let hv = |l: usize| 2 * n * m + l;
    let num_vars = 2 * n * m + n;
    let n_minus_1 = Rational::from_integer((n as i64 - 1).into());

    // Σ_l h_l − Σ_l F_a·b^{-l} + n·ψ(a) = Σ_l h_l − (n−1)·Σ_l F_a·b^l + n·ψ(a)
    let mut objective = vec![Rational::zero(); num_vars];
    for l in 0..n {
        objective[hv(l)] = Rational::one();
        for o in 0..m {
            objective[bid(l, o)] = -(&n_minus_1 * &setting.row(a)[o]);
        }
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for l in 0..n {
        lp.set_free(hv(l));
        lp::restrict_to_domain(&mut lp, setting.domain(l), bid(l, 0));
        lp::restrict_to_domain(&mut lp, setting.domain(l), alt(l, 0));
    }
    for l in 0..n {
        for j in 0..q {
            let mut terms = Vec::with_capacity(n * m + 1);
            for k in (0..n).filter(|&k| k != l) {
                for o in 0..m {
                    terms.push((bid(k, o), setting.row(j)[o].clone()));
                }
            }
            for o in 0..m {
                terms.push((alt(l, o), setting.row(j)[o].clone()));
            }
            terms.push((hv(l), -Rational::one()));
            lp.add_sparse(&terms, Relation::Le, setting.cost(j).clone());
        }
    }
    for j in (0..q).filter(|&j| j != a) {
        let diff: Vec<Rational> = setting
            .row(a)
            .iter()
            .zip(setting.row(j))
            .map(|(fa, fj)| fa - fj)
            .collect();
        let mut terms = Vec::with_capacity(n * m);
        for l in 0..n {
            for (o, d) in diff.iter().enumerate() {
                terms.push((bid(l, o), d.clone()));
            }
        }
        let mut rhs = setting.cost(a) - setting.cost(j);
        if let RegionMode::Strict(eps) = mode {
            if setting.cost(j) > setting.cost(a) {
                rhs += eps;
            }
        }
        lp.add_sparse(&terms, Relation::Ge, rhs);
    }
    match lp::solve(&lp)? {
        LpResult::Optimal(s) => {
            let n_cost = Rational::from_integer((n as i64).into()) * setting.cost(a);
            let profile = BidProfile::new(
                (0..n)
                    .map(|l| Valuation((0..m).map(|o| s.point[bid(l, o)].clone()).collect()))
                    .collect(),
            );
            Ok(Some((s.value + n_cost, profile)))
        }
        LpResult::Infeasible => Ok(None),
        LpResult::Unbounded => Err(RuleError::Internal(format!(
            "joint IR bound program for action {a} is unbounded"
        ))),
    }
}

/// The contract computed by the engine, as a payment rule.
#[derive(Debug)]
pub struct Alg1Contract {
    engine: Engine,
}

impl Alg1Contract {
    pub fn new(engine: Engine) -> Self {
        Self { engine }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }
}

impl PaymentRule for Alg1Contract {
    fn name(&self) -> &str {
        "alg1"
    }

    fn payment_table(&self, profile: &BidProfile) -> Result<PaymentTable, RuleError> {
        self.engine.alg1_payment_table(profile)
    }

    fn h_values(&self, profile: &BidProfile) -> Option<Result<Vec<Rational>, RuleError>> {
        Some(
            (0..profile.n())
                .map(|l| self.engine.h(l, &profile.others_total(l)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Action, Principal, ValuationDomain};
    use crate::rational::int;

    fn tradeoff() -> Setting {
        let eps = ratio(1, 10);
        Setting::new(
            vec![Action::new("a1", int(0)), Action::new("a2", eps)],
            vec!["o1".into(), "o2".into()],
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![int(0), int(1)]],
            vec![Principal::new("p1", ValuationDomain::orthant(2))],
        )
        .unwrap()
    }

    #[test]
    fn shares_fill_in_index_order() {
        assert_eq!(compute_shares(&int(0), &[int(0), int(0)]), vec![int(1), int(0)]);
        assert_eq!(
            compute_shares(&int(2), &[int(1), int(3)]),
            vec![ratio(1, 2), ratio(1, 2)]
        );
        assert_eq!(
            compute_shares(&int(4), &[int(1), int(1)]),
            vec![ratio(1, 4), ratio(1, 4)]
        );
    }

    #[test]
    fn tradeoff_setting_is_impossible() {
        let engine = Engine::new(tradeoff()).unwrap();
        assert_eq!(engine.k(1).unwrap(), &(ratio(1, 5), vec![int(0), ratio(1, 5)]));
        let b = BidProfile::from_rows(vec![vec![int(0), ratio(3, 10)]]);
        assert_eq!(engine.compute_m(0, &b).unwrap().1, ratio(1, 10));
        assert!(matches!(
            engine.alg1_payments(&b, 0),
            Err(RuleError::Impossible { action: 1, .. })
        ));
        let verdict = engine.alg2_exists(None).unwrap();
        let w = verdict.witness().expect("impossible");
        assert_eq!(w.action, 1);
        assert!(w.k > w.sum_m);
    }

    #[test]
    fn singleton_zero_domain_pays_nothing() {
        let s = Setting::new(
            vec![Action::new("a1", int(0)), Action::new("a2", int(1))],
            vec!["o1".into(), "o2".into()],
            vec![vec![int(1), int(0)], vec![int(0), int(1)]],
            vec![Principal::new(
                "p",
                ValuationDomain::singleton(&[int(0), int(0)]),
            )],
        )
        .unwrap();
        let engine = Engine::new(s).unwrap();
        let b = BidProfile::zeros(1, 2);
        let table = engine.alg1_payment_table(&b).unwrap();
        assert!(table.0.iter().flatten().all(Zero::is_zero));
        assert_eq!(engine.setting().best_response_to_table(&b, &table), 0);
        assert!(engine.alg2_exists(None).unwrap().is_possible());
    }

    #[test]
    fn assemble_payment_collapses_without_incentive() {
        let s = tradeoff();
        let b = BidProfile::from_rows(vec![vec![int(0), ratio(3, 10)]]);
        let t = assemble_payment(&s, &int(0), 1, &b, 0, &[int(0), int(0)], 1);
        assert_eq!(t, ratio(1, 10));
    }
}
