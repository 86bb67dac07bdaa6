//! And/or trees of linear constraints with CNF and cell (DNF) normal forms.

use std::collections::BTreeSet;

use super::{LinearConstraint, Polytope};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintFormula {
    True,
    False,
    Atom(LinearConstraint),
    And(Vec<ConstraintFormula>),
    Or(Vec<ConstraintFormula>),
}

impl ConstraintFormula {
    pub fn atom(c: LinearConstraint) -> Self {
        ConstraintFormula::Atom(c)
    }

    pub fn all(parts: impl IntoIterator<Item = LinearConstraint>) -> Self {
        ConstraintFormula::And(parts.into_iter().map(ConstraintFormula::Atom).collect())
    }

    pub fn and(self, other: ConstraintFormula) -> Self {
        match (self, other) {
            (ConstraintFormula::And(mut a), ConstraintFormula::And(b)) => {
                a.extend(b);
                ConstraintFormula::And(a)
            }
            (ConstraintFormula::And(mut a), b) => {
                a.push(b);
                ConstraintFormula::And(a)
            }
            (a, b) => ConstraintFormula::And(vec![a, b]),
        }
    }

    pub fn or(self, other: ConstraintFormula) -> Self {
        match (self, other) {
            (ConstraintFormula::Or(mut a), ConstraintFormula::Or(b)) => {
                a.extend(b);
                ConstraintFormula::Or(a)
            }
            (ConstraintFormula::Or(mut a), b) => {
                a.push(b);
                ConstraintFormula::Or(a)
            }
            (a, b) => ConstraintFormula::Or(vec![a, b]),
        }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        match self {
            ConstraintFormula::True => true,
            ConstraintFormula::False => false,
            ConstraintFormula::Atom(c) => c.holds(x),
            ConstraintFormula::And(parts) => parts.iter().all(|p| p.holds(x)),
            ConstraintFormula::Or(parts) => parts.iter().any(|p| p.holds(x)),
        }
    }

    pub fn negate(&self) -> ConstraintFormula {
        match self {
            ConstraintFormula::True => ConstraintFormula::False,
            ConstraintFormula::False => ConstraintFormula::True,
            ConstraintFormula::Atom(c) => {
                ConstraintFormula::Or(c.negate().into_iter().map(ConstraintFormula::Atom).collect())
            }
            ConstraintFormula::And(parts) => ConstraintFormula::Or(parts.iter().map(|p| p.negate()).collect()),
            ConstraintFormula::Or(parts) => ConstraintFormula::And(parts.iter().map(|p| p.negate()).collect()),
        }
    }

    /// Atoms mentioned anywhere in the tree.
    pub fn atoms(&self) -> Vec<&LinearConstraint> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a LinearConstraint>) {
        match self {
            ConstraintFormula::Atom(c) => out.push(c),
            ConstraintFormula::And(parts) | ConstraintFormula::Or(parts) => {
                parts.iter().for_each(|p| p.collect_atoms(out))
            }
            _ => {}
        }
    }

    /// Conjunction of clauses, each a disjunction of atoms. An empty clause
    /// is false.
    pub fn to_cnf(&self) -> Vec<Vec<LinearConstraint>> {
        match self {
            ConstraintFormula::True => Vec::new(),
            ConstraintFormula::False => vec![Vec::new()],
            ConstraintFormula::Atom(c) => vec![vec![c.clone()]],
            ConstraintFormula::And(parts) => dedupe(parts.iter().flat_map(|p| p.to_cnf()).collect()),
            ConstraintFormula::Or(parts) => {
                let mut acc: Vec<Vec<LinearConstraint>> = vec![Vec::new()];
                for p in parts {
                    let cnf = p.to_cnf();
                    let mut next = Vec::with_capacity(acc.len() * cnf.len());
                    for left in &acc {
                        for right in &cnf {
                            let mut clause = left.clone();
                            clause.extend(right.iter().cloned());
                            next.push(clause);
                        }
                    }
                    acc = next;
                }
                dedupe(acc)
            }
        }
    }

    /// Disjunction of feasible conjunctive cells, intersected with `base`.
    /// Infeasible partial cells are pruned as the expansion proceeds.
    pub fn cells(&self, base: &Polytope) -> Vec<Polytope> {
        let mut cells = vec![base.clone()];
        for clause in self.to_cnf() {
            let mut next = Vec::new();
            let mut seen = BTreeSet::new();
            for cell in &cells {
                if clause.iter().any(|c| cell.constraints().contains(c)) {
                    if seen.insert(cell.constraints().to_vec()) {
                        next.push(cell.clone());
                    }
                    continue;
                }
                for atom in &clause {
                    let candidate = cell.with(atom.clone());
                    let mut key = candidate.constraints().to_vec();
                    key.sort();
                    if seen.contains(&key) || !candidate.is_feasible() {
                        continue;
                    }
                    seen.insert(key);
                    next.push(candidate);
                }
            }
            cells = next;
            if cells.is_empty() {
                break;
            }
        }
        cells
    }
}

fn dedupe(clauses: Vec<Vec<LinearConstraint>>) -> Vec<Vec<LinearConstraint>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mut clause in clauses {
        clause.sort();
        clause.dedup();
        if seen.insert(clause.clone()) {
            out.push(clause);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn x_le(k: i64) -> LinearConstraint {
        LinearConstraint::le(vec![int(1)], int(k))
    }

    fn x_ge(k: i64) -> LinearConstraint {
        LinearConstraint::ge(vec![int(1)], int(k))
    }

    #[test]
    fn cnf_preserves_truth() {
        // (x <= 1 and x >= 0) or (x >= 3 and x <= 4)
        let f = ConstraintFormula::all([x_le(1), x_ge(0)]).or(ConstraintFormula::all([x_ge(3), x_le(4)]));
        let cnf = f.to_cnf();
        for x in -2..7 {
            let point = vec![int(x)];
            let via_cnf = cnf.iter().all(|cl| cl.iter().any(|c| c.holds(&point)));
            assert_eq!(via_cnf, f.holds(&point), "x = {x}");
        }
    }

    #[test]
    fn cells_cover_formula() {
        let f = ConstraintFormula::all([x_le(1), x_ge(0)]).or(ConstraintFormula::all([x_ge(3), x_le(4)]));
        let base = Polytope::new(1, vec![x_ge(-10), x_le(10)]);
        let cells = f.cells(&base);
        assert!(!cells.is_empty());
        for x in -2..7 {
            let point = vec![int(x)];
            let in_cells = cells.iter().any(|c| c.contains(&point));
            assert_eq!(in_cells, f.holds(&point), "x = {x}");
        }
    }

    #[test]
    fn negation_complements() {
        let f = ConstraintFormula::atom(x_le(1)).and(ConstraintFormula::atom(x_ge(0)));
        let g = f.negate();
        for x in -3..4 {
            let point = vec![int(x)];
            assert_ne!(f.holds(&point), g.holds(&point));
        }
    }

    #[test]
    fn false_has_no_cells() {
        let base = Polytope::universe(1);
        assert!(ConstraintFormula::False.cells(&base).is_empty());
        assert_eq!(ConstraintFormula::True.cells(&base).len(), 1);
    }
}
