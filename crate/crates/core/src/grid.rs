//! Finite samples of valuation domains: box lattices, vertices, and seeded
//! random points. Unbounded coordinates are cut at a truncation bound.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::model::{Setting, Valuation, ValuationDomain};
use crate::rational::{int, ratio, Rational};

/// `4 × (max cost + max finite domain bound + 1)`: the edge of the box on
/// which unbounded domains are sampled.
pub fn truncation_bound(setting: &Setting) -> Rational {
    let max_cost = setting
        .actions()
        .iter()
        .map(|a| a.cost.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let max_bound = setting
        .principals()
        .iter()
        .map(|p| p.domain.max_finite_bound())
        .max()
        .unwrap_or_else(Rational::zero);
    int(4) * (max_cost + max_bound + int(1))
}

/// Per-coordinate `[lo, hi]` enclosing the domain, with `bound` standing in
/// for missing upper limits.
pub fn bounding_box(d: &ValuationDomain, bound: &Rational) -> Vec<(Rational, Rational)> {
    match d {
        ValuationDomain::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(lo, hi)| {
                let hi = hi.clone().unwrap_or_else(|| bound.max(lo).clone());
                (lo.clone(), hi)
            })
            .collect(),
        ValuationDomain::Polytope { .. } => (0..d.dim())
            .map(|k| {
                let hi = d.coordinate_max(k).unwrap_or_else(|| bound.clone());
                (Rational::zero(), hi)
            })
            .collect(),
    }
}

/// Evenly spaced points per coordinate (`points` per dimension, a single
/// point for degenerate coordinates), kept when inside the domain.
pub fn lattice(d: &ValuationDomain, points: usize, bound: &Rational) -> Vec<Valuation> {
    let axes: Vec<Vec<Rational>> = bounding_box(d, bound)
        .into_iter()
        .map(|(lo, hi)| {
            if lo == hi || points <= 1 {
                vec![lo]
            } else {
                let step = (&hi - &lo) / int(points as i64 - 1);
                (0..points).map(|i| &lo + &step * int(i as i64)).collect()
            }
        })
        .collect();
    cartesian(&axes)
        .into_iter()
        .map(Valuation)
        .filter(|v| d.contains(v))
        .collect()
}

fn cartesian(axes: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Solves the square system `a x = b` exactly; `None` when singular.
pub fn solve_square(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Vertices of the domain intersected with its bounding box (so unbounded
/// domains yield the corners of their truncation), found by solving every
/// choice of `m` tight constraints.
pub fn vertices(d: &ValuationDomain, bound: &Rational) -> Vec<Valuation> {
    let bbox = bounding_box(d, bound);
    let m = bbox.len();
    if let ValuationDomain::Box { .. } = d {
        let axes: Vec<Vec<Rational>> = bbox
            .into_iter()
            .map(|(lo, hi)| if lo == hi { vec![lo] } else { vec![lo, hi] })
            .collect();
        return cartesian(&axes).into_iter().map(Valuation).collect();
    }
    let ValuationDomain::Polytope { rows } = d else {
        unreachable!()
    };
    // every row as `coeffs · x <= rhs`
    let mut halfspaces: Vec<(Vec<Rational>, Rational)> =
        rows.iter().map(|r| (r.coeffs.clone(), r.rhs.clone())).collect();
    for (k, (_, hi)) in bbox.iter().enumerate() {
        let mut lower = vec![Rational::zero(); m];
        lower[k] = -Rational::one();
        halfspaces.push((lower, Rational::zero()));
        let mut upper = vec![Rational::zero(); m];
        upper[k] = Rational::one();
        halfspaces.push((upper, hi.clone()));
    }
    let mut found = BTreeSet::new();
    for subset in combinations(halfspaces.len(), m) {
        let a: Vec<Vec<Rational>> = subset.iter().map(|&i| halfspaces[i].0.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|&i| halfspaces[i].1.clone()).collect();
        if let Some(x) = solve_square(&a, &b) {
            let inside = halfspaces
                .iter()
                .all(|(c, r)| crate::rational::dot(c, &x) <= *r);
            if inside {
                found.insert(Valuation(x));
            }
        }
    }
    found.into_iter().collect()
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// `count` seeded points inside the (truncated) domain with denominators
/// dividing 64: uniform in boxes, random convex combinations of vertices in
/// polytopes.
pub fn random_points<R: Rng>(
    d: &ValuationDomain,
    count: usize,
    bound: &Rational,
    rng: &mut R,
) -> Vec<Valuation> {
    match d {
        ValuationDomain::Box { .. } => {
            let bbox = bounding_box(d, bound);
            (0..count)
                .map(|_| {
                    Valuation(
                        bbox.iter()
                            .map(|(lo, hi)| lo + (hi - lo) * ratio(rng.gen_range(0..=64), 64))
                            .collect(),
                    )
                })
                .collect()
        }
        ValuationDomain::Polytope { .. } => {
            let vs = vertices(d, bound);
            if vs.is_empty() {
                return Vec::new();
            }
            (0..count)
                .map(|_| {
                    let weights: Vec<i64> = vs.iter().map(|_| rng.gen_range(1..=8)).collect();
                    let total: i64 = weights.iter().sum();
                    let mut acc = vec![Rational::zero(); d.dim()];
                    for (v, w) in vs.iter().zip(&weights) {
                        let c = ratio(*w, total);
                        for (a, x) in acc.iter_mut().zip(v.iter()) {
                            *a += &c * x;
                        }
                    }
                    Valuation(acc)
                })
                .collect()
        }
    }
}

/// Lattice, vertices and random points, deduplicated and sorted.
pub fn candidates<R: Rng>(
    d: &ValuationDomain,
    points: usize,
    random: usize,
    bound: &Rational,
    rng: &mut R,
) -> Vec<Valuation> {
    let mut set: BTreeSet<Valuation> = lattice(d, points, bound).into_iter().collect();
    set.extend(vertices(d, bound));
    set.extend(random_points(d, random, bound, rng));
    debug_assert!(set.iter().all(|v| d.contains(v) && v.iter().all(|x| !x.is_negative())));
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearRow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lattice_of_a_cube() {
        let d = ValuationDomain::cube(2, int(10), int(15));
        let pts = lattice(&d, 3, &int(100));
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&Valuation(vec![ratio(25, 2), int(15)])));
    }

    #[test]
    fn unbounded_axes_are_truncated() {
        let d = ValuationDomain::Box {
            lower: vec![int(0), int(0)],
            upper: vec![Some(int(0)), None],
        };
        let pts = lattice(&d, 5, &int(8));
        assert_eq!(pts.len(), 5);
        assert_eq!(pts.last().unwrap().0, vec![int(0), int(8)]);
    }

    #[test]
    fn simplex_vertices() {
        let d = ValuationDomain::Polytope {
            rows: vec![LinearRow {
                coeffs: vec![int(1), int(1)],
                rhs: int(5),
            }],
        };
        let vs = vertices(&d, &int(100));
        assert_eq!(
            vs,
            vec![
                Valuation(vec![int(0), int(0)]),
                Valuation(vec![int(0), int(5)]),
                Valuation(vec![int(5), int(0)]),
            ]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(random_points(&d, 10, &int(100), &mut rng).iter().all(|v| d.contains(v)));
    }

    #[test]
    fn singular_systems_are_detected() {
        assert!(solve_square(&[vec![int(1), int(1)], vec![int(2), int(2)]], &[int(1), int(2)]).is_none());
        assert_eq!(
            solve_square(&[vec![int(2), int(1)], vec![int(1), int(3)]], &[int(3), int(4)]),
            Some(vec![int(1), int(1)])
        );
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }
}
