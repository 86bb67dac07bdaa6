//! Fourier-Motzkin projection with strictness tracking.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::{Cmp, LinearConstraint};
use crate::rational::Rational;

/// Result of projecting a constraint system.
#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    /// The system has no solution.
    Empty,
    /// Constraints over the remaining variables; eliminated variables keep
    /// zero coefficients.
    Constraints(Vec<LinearConstraint>),
}

/// Existentially quantifies `vars` out of the conjunction `constraints`.
pub fn eliminate(constraints: &[LinearConstraint], vars: &[usize]) -> Projection {
    let mut system = match tidy(constraints.to_vec()) {
        Some(s) => s,
        None => return Projection::Empty,
    };
    for &k in vars {
        system = match eliminate_one(system, k) {
            Some(s) => s,
            None => return Projection::Empty,
        };
    }
    Projection::Constraints(system)
}

fn eliminate_one(system: Vec<LinearConstraint>, k: usize) -> Option<Vec<LinearConstraint>> {
    if let Some(pos) = system.iter().position(|c| c.cmp == Cmp::Eq && !c.coeffs[k].is_zero()) {
        let pivot = system[pos].clone();
        let rest = system
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, c)| substitute(&c, &pivot, k))
            .collect();
        return tidy(rest);
    }

    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut kept = Vec::new();
    for c in system {
        let a = c.coeffs[k].clone();
        if a.is_zero() {
            kept.push(c);
        } else if a.is_positive() {
            upper.push(c);
        } else {
            lower.push(c);
        }
    }
    for u in &upper {
        for l in &lower {
            // u: a x_k + ... <= b (a > 0); l: -c x_k + ... <= d (c > 0)
            let a = u.coeffs[k].clone();
            let c = -l.coeffs[k].clone();
            let coeffs = u.coeffs.iter().zip(&l.coeffs).map(|(x, y)| x * &c + y * &a).collect();
            let rhs = &u.rhs * &c + &l.rhs * &a;
            let cmp = if u.cmp == Cmp::Lt || l.cmp == Cmp::Lt {
                Cmp::Lt
            } else {
                Cmp::Le
            };
            let mut combined = LinearConstraint::new(coeffs, cmp, rhs);
            combined.coeffs[k] = Rational::zero();
            kept.push(combined);
        }
    }
    tidy(kept)
}

/// Replaces `x_k` in `c` using the equality `pivot`.
fn substitute(c: &LinearConstraint, pivot: &LinearConstraint, k: usize) -> LinearConstraint {
    let a = &c.coeffs[k];
    if a.is_zero() {
        return c.clone();
    }
    let factor = a / &pivot.coeffs[k];
    let mut coeffs: Vec<Rational> = c
        .coeffs
        .iter()
        .zip(&pivot.coeffs)
        .map(|(x, p)| x - &factor * p)
        .collect();
    coeffs[k] = Rational::zero();
    LinearConstraint::new(coeffs, c.cmp, &c.rhs - &factor * &pivot.rhs)
}

/// Normalizes, drops trivially true rows, keeps the tightest of parallel
/// inequalities. `None` when a row is trivially false.
fn tidy(system: Vec<LinearConstraint>) -> Option<Vec<LinearConstraint>> {
    let mut out: Vec<LinearConstraint> = Vec::new();
    let mut index: BTreeMap<(Vec<Rational>, bool), usize> = BTreeMap::new();
    for c in system {
        match c.constant_truth() {
            Some(true) => continue,
            Some(false) => return None,
            None => {}
        }
        let c = c.normalized();
        let key = (c.coeffs.clone(), c.cmp == Cmp::Eq);
        match index.get(&key) {
            Some(&at) if c.cmp == Cmp::Eq => {
                if out[at].rhs != c.rhs {
                    return None;
                }
            }
            Some(&at) => {
                let old = &out[at];
                if c.rhs < old.rhs || (c.rhs == old.rhs && c.cmp == Cmp::Lt) {
                    out[at] = c;
                }
            }
            None => {
                index.insert(key, out.len());
                out.push(c);
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Polytope;
    use crate::rational::int;

    fn v(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn projects_triangle_onto_axis() {
        // x >= 0, y >= 0, x + y <= 3, exists y -> 0 <= x <= 3
        let cs = vec![
            LinearConstraint::ge(v(&[1, 0]), int(0)),
            LinearConstraint::ge(v(&[0, 1]), int(0)),
            LinearConstraint::le(v(&[1, 1]), int(3)),
        ];
        let Projection::Constraints(out) = eliminate(&cs, &[1]) else {
            panic!()
        };
        let p = Polytope::new(2, out);
        assert!(p.contains(&v(&[3, 100])));
        assert!(!p.contains(&v(&[4, 0])));
        assert!(!p.contains(&v(&[-1, 0])));
    }

    #[test]
    fn strictness_propagates() {
        // 1 < y, y <= x  ->  x > 1
        let cs = vec![
            LinearConstraint::gt(v(&[0, 1]), int(1)),
            LinearConstraint::le(v(&[-1, 1]), int(0)),
        ];
        let Projection::Constraints(out) = eliminate(&cs, &[1]) else {
            panic!()
        };
        let p = Polytope::new(2, out);
        assert!(!p.contains(&v(&[1, 0])));
        assert!(p.contains(&v(&[2, 0])));
    }

    #[test]
    fn equalities_are_substituted() {
        // x = 2y, y <= 1, y >= 0  ->  0 <= x <= 2
        let cs = vec![
            LinearConstraint::eq(v(&[1, -2]), int(0)),
            LinearConstraint::le(v(&[0, 1]), int(1)),
            LinearConstraint::ge(v(&[0, 1]), int(0)),
        ];
        let Projection::Constraints(out) = eliminate(&cs, &[1]) else {
            panic!()
        };
        let p = Polytope::new(2, out);
        assert!(p.contains(&v(&[2, 7])));
        assert!(!p.contains(&v(&[3, 0])));
    }

    #[test]
    fn detects_empty_projection() {
        let cs = vec![
            LinearConstraint::gt(v(&[1]), int(2)),
            LinearConstraint::lt(v(&[1]), int(2)),
        ];
        assert_eq!(eliminate(&cs, &[0]), Projection::Empty);
    }
}
