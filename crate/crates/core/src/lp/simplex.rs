use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpError, LpResult, Relation, Sense, Solution};
use crate::rational::Rational;

/// How an original variable is expressed through nonnegative tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// `x = offset + sign * col`
    Shift {
        col: usize,
        offset: Rational,
        negate: bool,
    },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
    Fixed(Rational),
}

struct Row {
    coeffs: Vec<Rational>,
    relation: Relation,
    rhs: Rational,
}

struct Tableau {
    /// rows × (cols + 1); the last column is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    /// reduced costs
    d: Vec<Rational>,
    z: Rational,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.t[r][self.cols]
    }

    fn price(&mut self, costs: &[Rational]) {
        let mut d = costs.to_vec();
        let mut z = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                if !self.t[r][j].is_zero() {
                    *dj -= cb * &self.t[r][j];
                }
            }
            z += cb * self.rhs(r);
        }
        self.d = d;
        self.z = z;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.t[r][e].clone();
        if !p.is_one() {
            for x in self.t[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[e].is_zero() {
                continue;
            }
            let f = row[e].clone();
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *x -= &f * pr;
                }
            }
        }
        let de = self.d[e].clone();
        if !de.is_zero() {
            for (dj, pr) in self.d.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *dj -= &de * pr;
                }
            }
            self.z += &de * &pivot_row[self.cols];
        }
        self.basis[r] = e;
    }

    /// Primal simplex with Bland's rule over the columns allowed to enter.
    fn run(&mut self, allowed: &[bool]) -> Phase {
        loop {
            let Some(e) = (0..self.cols).find(|&j| allowed[j] && self.d[j].is_negative()) else {
                return Phase::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return Phase::Unbounded,
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        self.t.remove(r);
        self.basis.remove(r);
    }
}

/// Solves `lp` exactly: two-phase simplex, Bland's anti-cycling rule.
pub fn solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    lp.validate()?;

    // Express every variable through nonnegative columns.
    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), Some(u)) if l == u => VarMap::Fixed(l.clone()),
            (Some(l), Some(u)) if l > u => return Ok(LpResult::Infeasible),
            (Some(l), upper) => {
                let col = ncols;
                ncols += 1;
                if let Some(u) = upper {
                    bound_rows.push((col, u - l));
                }
                VarMap::Shift {
                    col,
                    offset: l.clone(),
                    negate: false,
                }
            }
            (None, Some(u)) => {
                let col = ncols;
                ncols += 1;
                VarMap::Shift {
                    col,
                    offset: u.clone(),
                    negate: true,
                }
            }
            (None, None) => {
                let pos = ncols;
                ncols += 2;
                VarMap::Split { pos, neg: pos + 1 }
            }
        };
        maps.push(map);
    }
    let structural = ncols;

    let mut rows: Vec<Row> = Vec::with_capacity(lp.constraints.len() + bound_rows.len());
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); structural];
        let mut rhs = c.rhs.clone();
        for (a, map) in c.coeffs.iter().zip(&maps) {
            if a.is_zero() {
                continue;
            }
            match map {
                VarMap::Shift {
                    col,
                    offset,
                    negate,
                } => {
                    rhs -= a * offset;
                    coeffs[*col] += if *negate { -a.clone() } else { a.clone() };
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
                VarMap::Fixed(v) => rhs -= a * v,
            }
        }
        rows.push(Row {
            coeffs,
            relation: c.relation,
            rhs,
        });
    }
    for (col, cap) in &bound_rows {
        let mut coeffs = vec![Rational::zero(); structural];
        coeffs[*col] = Rational::one();
        rows.push(Row {
            coeffs,
            relation: Relation::Le,
            rhs: cap.clone(),
        });
    }

    // Normalize to rhs >= 0 and lay out slack/surplus/artificial columns.
    let mut sign_flipped = vec![false; rows.len()];
    for (row, flipped) in rows.iter_mut().zip(sign_flipped.iter_mut()) {
        if row.rhs.is_negative() {
            *flipped = true;
            row.rhs = -row.rhs.clone();
            for c in row.coeffs.iter_mut() {
                *c = -c.clone();
            }
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let n_slack = rows
        .iter()
        .filter(|r| r.relation != Relation::Eq)
        .count();
    let n_art = rows
        .iter()
        .filter(|r| r.relation != Relation::Le)
        .count();
    let cols = structural + n_slack + n_art;
    let art_start = structural + n_slack;

    let mut t = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let mut identity_col = Vec::with_capacity(rows.len());
    let (mut next_slack, mut next_art) = (structural, art_start);
    for row in &rows {
        let mut line = row.coeffs.clone();
        line.resize(cols + 1, Rational::zero());
        line[cols] = row.rhs.clone();
        match row.relation {
            Relation::Le => {
                line[next_slack] = Rational::one();
                basis.push(next_slack);
                identity_col.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                line[next_slack] = -Rational::one();
                next_slack += 1;
                line[next_art] = Rational::one();
                basis.push(next_art);
                identity_col.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                line[next_art] = Rational::one();
                basis.push(next_art);
                identity_col.push(next_art);
                next_art += 1;
            }
        }
        t.push(line);
    }

    let mut tab = Tableau {
        t,
        basis,
        cols,
        d: Vec::new(),
        z: Rational::zero(),
    };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut costs = vec![Rational::zero(); cols];
        for c in costs.iter_mut().skip(art_start) {
            *c = Rational::one();
        }
        tab.price(&costs);
        let allowed = vec![true; cols];
        if let Phase::Unbounded = tab.run(&allowed) {
            unreachable!("phase one objective is bounded below by zero");
        }
        if tab.z.is_positive() {
            return Ok(LpResult::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tab.t[r][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => tab.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase 2 on the internal minimization objective.
    let mut costs = vec![Rational::zero(); cols];
    let mut constant = Rational::zero();
    for (c, map) in lp.objective.iter().zip(&maps) {
        let c = match lp.sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c.clone(),
        };
        match map {
            VarMap::Shift {
                col,
                offset,
                negate,
            } => {
                constant += &c * offset;
                costs[*col] = if *negate { -c } else { c };
            }
            VarMap::Split { pos, neg } => {
                costs[*neg] = -c.clone();
                costs[*pos] = c;
            }
            VarMap::Fixed(v) => constant += &c * v,
        }
    }
    let _ = constant;
    tab.price(&costs);
    let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
    if let Phase::Unbounded = tab.run(&allowed) {
        return Ok(LpResult::Unbounded);
    }

    let mut y = vec![Rational::zero(); cols];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs(r).clone();
    }
    let point: Vec<Rational> = maps
        .iter()
        .map(|map| match map {
            VarMap::Shift {
                col,
                offset,
                negate,
            } => {
                if *negate {
                    offset - &y[*col]
                } else {
                    offset + &y[*col]
                }
            }
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
            VarMap::Fixed(v) => v.clone(),
        })
        .collect();
    let value = lp.objective_at(&point);

    // Simplex multipliers c_B B^{-1}, read from each row's initial identity column.
    let duals = (0..lp.constraints.len())
        .map(|i| {
            let col = identity_col[i];
            let mut pi = Rational::zero();
            for (r, &b) in tab.basis.iter().enumerate() {
                if !costs[b].is_zero() && !tab.t[r][col].is_zero() {
                    pi += &costs[b] * &tab.t[r][col];
                }
            }
            if sign_flipped[i] {
                pi = -pi;
            }
            if lp.sense == Sense::Maximize {
                pi = -pi;
            }
            pi
        })
        .collect();

    debug_assert!(lp.is_feasible_point(&point), "simplex returned an infeasible point");
    Ok(LpResult::Optimal(Solution {
        value,
        point,
        duals,
    }))
}
