//! Exact-arithmetic engine for contracts in common agency: one agent, several
//! principals with private valuations over outcomes, and a hidden action.
//!
//! The crate decides whether a VCG-style contract with limited liability and
//! individual rationality exists for a setting, computes its payments, offers
//! two closed-form contract families, analyzes first-price contracts, and
//! audits any contract against brute-force oracles.

// Rule errors carry exact witness values; they are rare and not worth boxing.
#![allow(clippy::result_large_err)]

pub mod audit;
pub mod engine;
pub mod first_price;
pub mod fixtures;
pub mod grid;
pub mod instantiations;
pub mod io;
pub mod lp;
pub mod model;
pub mod rational;

pub use engine::{Alg1Contract, ContractParams, Engine, RegionMode, Verdict, Witness};
pub use model::{
    expected_value, Action, BidProfile, LinearRow, ModelError, PaymentRule, PaymentTable,
    Principal, RuleError, Setting, Valuation, ValuationDomain,
};
pub use rational::{parse_rational, Rational};
