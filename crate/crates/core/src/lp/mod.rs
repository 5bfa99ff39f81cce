//! Exact linear programming over the rationals.
//!
//! The engine only ever builds small dense programs (tens of variables), so the
//! solver is a dense-tableau two-phase simplex with Bland's rule. Results are
//! exact: an `Optimal` point satisfies every constraint with no tolerance.

mod simplex;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::ValuationDomain;
use crate::rational::{dot, Rational};

pub use simplex::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.relation.holds(&dot(&self.coeffs, x), &self.rhs)
    }
}

/// Optional lower/upper bound on one variable. Both absent means free.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn nonnegative() -> Self {
        Self {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Self::default()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

impl LinearProgram {
    /// A program over `objective.len()` variables, all of them `>= 0`.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let num_vars = objective.len();
        Self {
            num_vars,
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBounds::nonnegative(); num_vars],
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    /// Adds `Σ coeff·x_var rel rhs` given as sparse `(var, coeff)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            coeffs[*var] += c;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) {
        self.bounds[var] = VarBounds { lower, upper };
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = VarBounds::free();
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.bounds.iter().zip(x).all(|(b, v)| b.contains(v))
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.num_vars == 0 {
            return Err(LpError::NoVariables);
        }
        if self.objective.len() != self.num_vars {
            return Err(LpError::DimensionMismatch {
                what: "objective",
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        if self.bounds.len() != self.num_vars {
            return Err(LpError::DimensionMismatch {
                what: "bounds",
                expected: self.num_vars,
                found: self.bounds.len(),
            });
        }
        for c in &self.constraints {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::DimensionMismatch {
                    what: "constraint",
                    expected: self.num_vars,
                    found: c.coeffs.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: Rational,
    pub point: Vec<Rational>,
    /// One multiplier per constraint, in input order, read off the final
    /// basis. For a minimization over `x >= 0` they satisfy
    /// `Σ_i duals[i]·a_i <= c` with `duals[i] >= 0` on `>=` rows and
    /// `<= 0` on `<=` rows, and `Σ_i duals[i]·rhs_i == value`.
    /// For maximization every inequality flips.
    pub duals: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program has no variables")]
    NoVariables,
    #[error("{what} has {found} coefficients, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Linear constraints placing variables `var_offset..var_offset+m` inside `domain`,
/// written over `num_vars` variables. A box yields one `>=` row per coordinate and
/// one `<=` row per finite upper bound; a polytope yields its rows plus `x >= 0`.
pub fn domain_constraints(
    domain: &ValuationDomain,
    var_offset: usize,
    num_vars: usize,
) -> Vec<Constraint> {
    let unit = |k: usize| {
        let mut coeffs = vec![Rational::zero(); num_vars];
        coeffs[var_offset + k] = Rational::one();
        coeffs
    };
    let mut out = Vec::new();
    match domain {
        ValuationDomain::Box { lower, upper } => {
            for (k, lo) in lower.iter().enumerate() {
                out.push(Constraint::new(unit(k), Relation::Ge, lo.clone()));
            }
            for (k, hi) in upper.iter().enumerate() {
                if let Some(hi) = hi {
                    out.push(Constraint::new(unit(k), Relation::Le, hi.clone()));
                }
            }
        }
        ValuationDomain::Polytope { rows } => {
            for row in rows {
                let mut coeffs = vec![Rational::zero(); num_vars];
                for (k, c) in row.coeffs.iter().enumerate() {
                    coeffs[var_offset + k] = c.clone();
                }
                out.push(Constraint::new(coeffs, Relation::Le, row.rhs.clone()));
            }
            for k in 0..domain.dim() {
                out.push(Constraint::new(unit(k), Relation::Ge, Rational::zero()));
            }
        }
    }
    out
}

/// Puts a block of variables inside `domain`. Boxes become variable bounds
/// (cheaper for the simplex); polytopes become rows.
pub fn restrict_to_domain(lp: &mut LinearProgram, domain: &ValuationDomain, var_offset: usize) {
    match domain {
        ValuationDomain::Box { lower, upper } => {
            for (k, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                lp.set_bounds(var_offset + k, Some(lo.clone()), hi.clone());
            }
        }
        ValuationDomain::Polytope { .. } => {
            for k in 0..domain.dim() {
                lp.set_bounds(var_offset + k, Some(Rational::zero()), None);
            }
            let n = lp.num_vars;
            lp.constraints
                .extend(domain_constraints(domain, var_offset, n).into_iter().filter(|c| {
                    // nonnegativity is already carried by the bounds
                    !(c.relation == Relation::Ge
                        && c.rhs.is_zero()
                        && c.coeffs.iter().filter(|x| !x.is_zero()).count() == 1
                        && c.coeffs.iter().all(|x| !x.is_negative()))
                }));
        }
    }
}
