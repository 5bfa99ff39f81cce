use iivcg_core::audit::{
    audit, audit_efficiency, audit_expected_payment_identity, audit_truthful, AuditConfig,
    AuditGrid, Status,
};
use iivcg_core::engine::{Alg1Contract, Engine};
use iivcg_core::first_price::fp_rule;
use iivcg_core::fixtures::{pos_example, pos_truthful, weighted_example};
use iivcg_core::model::{BidProfile, PaymentRule, PaymentTable, RuleError, Setting};
use iivcg_core::rational::{int, ratio, Rational};

fn pos() -> Setting {
    pos_example(3, &ratio(1, 4), &ratio(1, 12)).unwrap()
}

fn small_grid(s: &Setting) -> AuditGrid {
    AuditGrid::build(
        s,
        AuditConfig {
            resolution: 4,
            random_points: 4,
            seed: 3,
            bound: None,
            max_profiles: 64,
        },
    )
}

/// Pays nothing: the agent always takes the free action.
struct Nothing(usize, usize);

impl PaymentRule for Nothing {
    fn name(&self) -> &str {
        "nothing"
    }

    fn payment_table(&self, _: &BidProfile) -> Result<PaymentTable, RuleError> {
        Ok(PaymentTable(vec![vec![Rational::from_integer(0.into()); self.1]; self.0]))
    }
}

/// Wraps a contract and adds a constant to the first principal's payments.
struct Shifted<R>(R, Rational);

impl<R: PaymentRule> PaymentRule for Shifted<R> {
    fn name(&self) -> &str {
        "shifted"
    }

    fn payment_table(&self, b: &BidProfile) -> Result<PaymentTable, RuleError> {
        let mut t = self.0.payment_table(b)?;
        for x in t.0[0].iter_mut() {
            *x += &self.1;
        }
        Ok(t)
    }

    fn h_values(&self, b: &BidProfile) -> Option<Result<Vec<Rational>, RuleError>> {
        self.0.h_values(b)
    }
}

#[test]
fn algorithmic_contract_passes_every_audit() {
    for s in [pos(), weighted_example()] {
        let rule = Alg1Contract::new(Engine::new(s.clone()).unwrap());
        let grid = small_grid(&s);
        let report = audit(&s, &rule, &grid);
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.grid.profiles, grid.profiles.len());
    }
}

#[test]
fn first_price_fails_truthfulness() {
    let s = pos();
    let grid = small_grid(&s).with_profiles([pos_truthful(3, &ratio(1, 4))]);
    match audit_truthful(&s, &fp_rule(), &grid) {
        Status::Fail(c) => {
            assert_eq!(c.principal, Some(0));
            assert!(c.deviation.is_some());
        }
        other => panic!("expected a failure, got {other:?}"),
    }
    // first price has no pinned expected payments
    assert_eq!(
        audit_expected_payment_identity(&s, &fp_rule(), &grid),
        Status::NotApplicable
    );
}

#[test]
fn paying_nothing_fails_efficiency() {
    let s = pos();
    let grid = small_grid(&s);
    let rule = Nothing(1, 2);
    assert!(matches!(audit_efficiency(&s, &rule, &grid), Status::Fail(_)));
}

#[test]
fn perturbed_payments_fail_the_identity() {
    let s = weighted_example();
    let rule = Shifted(Alg1Contract::new(Engine::new(s.clone()).unwrap()), int(1));
    let grid = small_grid(&s);
    let report = audit(&s, &rule, &grid);
    assert!(matches!(report.identity, Status::Fail(_)));
    assert!(report.ll.passed());
}

#[test]
fn audits_are_reproducible() {
    let s = weighted_example();
    let a = small_grid(&s);
    let b = small_grid(&s);
    assert_eq!(a.profiles, b.profiles);
}
