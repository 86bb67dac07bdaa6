//! Linear constraints with strictness, convex polytopes in half-space form and
//! the exact feasibility kernel.

pub mod elimination;
pub mod formula;
pub mod simplex;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, int, one, to_f64, zero, Rational};
use simplex::{maximize, LpOutcome, Row, RowKind};

pub use elimination::{eliminate, Projection};
pub use formula::ConstraintFormula;

/// Comparison of `coeffs . x` against the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
}

/// `coeffs . x  cmp  rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rational>,
    pub cmp: Cmp,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<Rational>, cmp: Cmp, rhs: Rational) -> Self {
        LinearConstraint { coeffs, cmp, rhs }
    }

    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Cmp::Le, rhs)
    }

    pub fn lt(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Cmp::Lt, rhs)
    }

    pub fn eq(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Cmp::Eq, rhs)
    }

    /// `coeffs . x >= rhs`
    pub fn ge(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::le(coeffs.into_iter().map(|c| -c).collect(), -rhs)
    }

    /// `coeffs . x > rhs`
    pub fn gt(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::lt(coeffs.into_iter().map(|c| -c).collect(), -rhs)
    }

    /// Single-variable bound helper: `x_k cmp rhs` (or `x_k >= rhs` when `lower`).
    pub fn bound(dim: usize, k: usize, lower: bool, rhs: Rational) -> Self {
        let mut coeffs = vec![zero(); dim];
        coeffs[k] = one();
        if lower {
            Self::ge(coeffs, rhs)
        } else {
            Self::le(coeffs, rhs)
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .fold(zero(), |acc, (c, v)| if c.is_zero() { acc } else { acc + c * v })
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Lt => lhs < self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }

    /// Membership in the topological closure, in floating point.
    pub fn holds_closure_f64(&self, x: &[f64], tolerance: f64) -> bool {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(c, v)| to_f64(c) * v).sum();
        let rhs = to_f64(&self.rhs);
        match self.cmp {
            Cmp::Le | Cmp::Lt => lhs <= rhs + tolerance,
            Cmp::Eq => (lhs - rhs).abs() <= tolerance,
        }
    }

    /// Variables with a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, _)| k)
    }

    /// Truth value when every coefficient is zero.
    pub fn constant_truth(&self) -> Option<bool> {
        if self.coeffs.iter().all(Zero::is_zero) {
            let z = zero();
            Some(match self.cmp {
                Cmp::Le => z <= self.rhs,
                Cmp::Lt => z < self.rhs,
                Cmp::Eq => z == self.rhs,
            })
        } else {
            None
        }
    }

    /// The complement as a disjunction of constraints.
    pub fn negate(&self) -> Vec<LinearConstraint> {
        match self.cmp {
            Cmp::Le => vec![Self::gt(self.coeffs.clone(), self.rhs.clone())],
            Cmp::Lt => vec![Self::ge(self.coeffs.clone(), self.rhs.clone())],
            Cmp::Eq => vec![
                Self::lt(self.coeffs.clone(), self.rhs.clone()),
                Self::gt(self.coeffs.clone(), self.rhs.clone()),
            ],
        }
    }

    /// Positive rescaling to coprime integer coefficients; equalities also get
    /// a positive leading coefficient.
    pub fn normalized(&self) -> LinearConstraint {
        let mut lcm = BigInt::one();
        for c in self.coeffs.iter().chain(std::iter::once(&self.rhs)) {
            lcm = lcm.lcm(c.denom());
        }
        let scale = Rational::from_integer(lcm);
        let mut gcd = BigInt::zero();
        for c in &self.coeffs {
            gcd = gcd.gcd(&(c * &scale).to_integer());
        }
        if gcd.is_zero() {
            return self.clone();
        }
        let mut factor = scale / Rational::from_integer(gcd);
        if self.cmp == Cmp::Eq {
            if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()) {
                if lead.is_negative() {
                    factor = -factor;
                }
            }
        }
        LinearConstraint {
            coeffs: self.coeffs.iter().map(|c| c * &factor).collect(),
            cmp: self.cmp,
            rhs: &self.rhs * &factor,
        }
    }

    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut lhs = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if lhs.is_empty() {
                if c.is_negative() {
                    lhs.push('-');
                }
            } else {
                lhs.push_str(&format!(" {sign} "));
            }
            if !magnitude.is_one() {
                lhs.push_str(&format_rational(&magnitude));
                lhs.push('*');
            }
            lhs.push_str(&name(k));
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        let op = match self.cmp {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "=",
        };
        format!("{lhs} {op} {}", format_rational(&self.rhs))
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|k| format!("x{}", k + 1)))
    }
}

/// Conjunction of linear constraints over a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polytope {
    dim: usize,
    constraints: Vec<LinearConstraint>,
}

impl Polytope {
    /// The whole space.
    pub fn universe(dim: usize) -> Self {
        Polytope {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn new(dim: usize, constraints: Vec<LinearConstraint>) -> Self {
        assert!(
            constraints.iter().all(|c| c.dim() == dim),
            "constraint dimension mismatch"
        );
        Polytope { dim, constraints }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn push(&mut self, c: LinearConstraint) {
        assert_eq!(c.dim(), self.dim, "constraint dimension mismatch");
        self.constraints.push(c);
    }

    pub fn with(&self, c: LinearConstraint) -> Polytope {
        let mut next = self.clone();
        next.push(c);
        next
    }

    pub fn intersect(&self, other: &Polytope) -> Polytope {
        assert_eq!(self.dim, other.dim);
        let mut constraints = self.constraints.clone();
        constraints.extend(other.constraints.iter().cloned());
        Polytope {
            dim: self.dim,
            constraints,
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn contains_closure_f64(&self, x: &[f64], tolerance: f64) -> bool {
        self.constraints.iter().all(|c| c.holds_closure_f64(x, tolerance))
    }

    /// Exact feasibility, honouring strict inequalities.
    pub fn is_feasible(&self) -> bool {
        self.witness().is_some()
    }

    /// A point satisfying every constraint (strict ones strictly).
    pub fn witness(&self) -> Option<Vec<Rational>> {
        let mut free = vec![true; self.dim];
        let mut rows = Vec::with_capacity(self.constraints.len() + 1);
        let strict = self.constraints.iter().any(|c| c.cmp == Cmp::Lt);
        for c in &self.constraints {
            match c.constant_truth() {
                Some(true) => continue,
                Some(false) => return None,
                None => {}
            }
            if let Some(k) = nonnegativity_of(c) {
                free[k] = false;
                continue;
            }
            let mut coeffs = c.coeffs.clone();
            coeffs.push(if c.cmp == Cmp::Lt { one() } else { zero() });
            let kind = if c.cmp == Cmp::Eq { RowKind::Eq } else { RowKind::Le };
            rows.push(Row {
                coeffs,
                kind,
                rhs: c.rhs.clone(),
            });
        }
        let mut objective = vec![zero(); self.dim + 1];
        free.push(false);
        if strict {
            let mut cap = vec![zero(); self.dim + 1];
            cap[self.dim] = one();
            rows.push(Row {
                coeffs: cap,
                kind: RowKind::Le,
                rhs: one(),
            });
            objective[self.dim] = one();
        }
        match maximize(&rows, &objective, &free, strict) {
            LpOutcome::Optimal { mut point, value } => {
                if strict && !value.is_positive() {
                    return None;
                }
                point.truncate(self.dim);
                Some(point)
            }
            LpOutcome::Unbounded => unreachable!("slack variable is capped"),
            LpOutcome::Infeasible => None,
        }
    }

    /// Maximizes `objective . x` over the closure.
    pub fn maximize_closure(&self, objective: &[Rational]) -> LpOutcome {
        let mut free = vec![true; self.dim];
        let mut rows = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            match c.constant_truth() {
                Some(true) => continue,
                Some(false) if c.cmp == Cmp::Lt && c.rhs.is_zero() => continue,
                Some(false) => return LpOutcome::Infeasible,
                None => {}
            }
            if let Some(k) = nonnegativity_of(c) {
                free[k] = false;
                continue;
            }
            let kind = if c.cmp == Cmp::Eq { RowKind::Eq } else { RowKind::Le };
            rows.push(Row {
                coeffs: c.coeffs.clone(),
                kind,
                rhs: c.rhs.clone(),
            });
        }
        maximize(&rows, objective, &free, false)
    }

    /// Whether every point of `self` satisfies `c`.
    pub fn implies(&self, c: &LinearConstraint) -> bool {
        c.negate().into_iter().all(|neg| !self.with(neg).is_feasible())
    }

    pub fn is_subset_of(&self, other: &Polytope) -> bool {
        !self.is_feasible() || other.constraints.iter().all(|c| self.implies(c))
    }

    pub fn set_equal(&self, other: &Polytope) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    /// Removes duplicate and redundant constraints; an empty polytope is
    /// returned unchanged.
    pub fn simplified(&self) -> Polytope {
        let mut unique: Vec<LinearConstraint> = Vec::new();
        let mut seen: BTreeMap<(Vec<Rational>, Cmp), usize> = BTreeMap::new();
        for c in &self.constraints {
            if c.constant_truth() == Some(true) {
                continue;
            }
            let c = c.normalized();
            let key = (c.coeffs.clone(), if c.cmp == Cmp::Eq { Cmp::Eq } else { Cmp::Le });
            match seen.get(&key) {
                Some(&at) if c.cmp != Cmp::Eq => {
                    let old = &unique[at];
                    if c.rhs < old.rhs || (c.rhs == old.rhs && c.cmp == Cmp::Lt) {
                        unique[at] = c;
                    }
                }
                Some(&at) if unique[at] == c => {}
                _ => {
                    seen.insert(key, unique.len());
                    unique.push(c);
                }
            }
        }
        let mut current = Polytope {
            dim: self.dim,
            constraints: unique,
        };
        if !current.is_feasible() {
            return self.clone();
        }
        let mut k = 0;
        while k < current.constraints.len() {
            let mut rest = current.clone();
            let candidate = rest.constraints.remove(k);
            if rest.implies(&candidate) {
                current = rest;
            } else {
                k += 1;
            }
        }
        current
    }

    /// `self \ other` as pairwise-disjoint polytopes.
    pub fn subtract(&self, other: &Polytope) -> Vec<Polytope> {
        if !self.intersect(other).is_feasible() {
            return vec![self.clone()];
        }
        let mut pieces = Vec::new();
        let mut inside = self.clone();
        for c in &other.constraints {
            for neg in c.negate() {
                let piece = inside.with(neg);
                if piece.is_feasible() {
                    pieces.push(piece);
                }
            }
            inside.push(c.clone());
        }
        pieces
    }

    /// Whether `self` is covered by the union of `cover`.
    pub fn covered_by(&self, cover: &[Polytope]) -> bool {
        let mut remaining = vec![self.clone()];
        for p in cover {
            remaining = remaining.iter().flat_map(|r| r.subtract(p)).collect();
            if remaining.is_empty() {
                return true;
            }
        }
        remaining.iter().all(|r| !r.is_feasible())
    }

    /// Random points of the polytope: convex combinations of closure vertices
    /// found with random objectives and a strict witness that always keeps a
    /// positive weight, so strict constraints stay strict. Empty when the
    /// polytope is empty.
    pub fn sample_interior<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Vec<Rational>> {
        let Some(witness) = self.witness() else {
            return Vec::new();
        };
        let mut anchors = vec![witness];
        for _ in 0..2 * self.dim + 2 {
            let objective: Vec<Rational> = (0..self.dim).map(|_| int(rng.random_range(-5..=5))).collect();
            if let LpOutcome::Optimal { point, .. } = self.maximize_closure(&objective) {
                if !anchors.contains(&point) {
                    anchors.push(point);
                }
            }
        }
        (0..count)
            .map(|_| {
                let weights: Vec<i64> = (0..anchors.len()).map(|_| rng.random_range(0..=100)).collect();
                let head = weights[0] + 1;
                let total = Rational::from_integer(BigInt::from(head + weights[1..].iter().sum::<i64>()));
                let mut point = vec![zero(); self.dim];
                for (k, anchor) in anchors.iter().enumerate() {
                    let w = if k == 0 { head } else { weights[k] };
                    if w == 0 {
                        continue;
                    }
                    let w = int(w) / &total;
                    for (x, a) in point.iter_mut().zip(anchor) {
                        *x += &w * a;
                    }
                }
                point
            })
            .collect()
    }

    pub fn render(&self, name: &dyn Fn(usize) -> String) -> Vec<String> {
        self.constraints.iter().map(|c| c.render(name)).collect()
    }
}

/// `Some(k)` when `c` reads `-a x_k <= 0` with `a > 0`.
fn nonnegativity_of(c: &LinearConstraint) -> Option<usize> {
    if c.cmp != Cmp::Le || !c.rhs.is_zero() {
        return None;
    }
    let mut support = c.support();
    let k = support.next()?;
    if support.next().is_some() || !c.coeffs[k].is_negative() {
        return None;
    }
    Some(k)
}
