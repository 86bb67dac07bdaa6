//! Dense two-phase simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::rational::{zero, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub kind: RowKind,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { point: Vec<Rational>, value: Rational },
}

/// `maximize objective . x` subject to `rows`, with `x_k >= 0` unless
/// `free[k]`. When `stop_positive` is set the search returns as soon as a
/// feasible basis with a positive objective value is found.
pub fn maximize(rows: &[Row], objective: &[Rational], free: &[bool], stop_positive: bool) -> LpOutcome {
    let dim = objective.len();
    debug_assert_eq!(free.len(), dim);

    // structural columns: free variables get a positive and a negative part
    let mut columns: Vec<(usize, bool)> = Vec::with_capacity(dim);
    for (k, &is_free) in free.iter().enumerate() {
        columns.push((k, true));
        if is_free {
            columns.push((k, false));
        }
    }
    let structural = columns.len();

    let m = rows.len();
    let mut kinds = Vec::with_capacity(m);
    let mut signs = Vec::with_capacity(m);
    for row in rows {
        let flip = row.rhs.is_negative();
        let kind = match (row.kind, flip) {
            (RowKind::Le, true) => RowKind::Ge,
            (RowKind::Ge, true) => RowKind::Le,
            (k, _) => k,
        };
        kinds.push(kind);
        signs.push(flip);
    }
    let slacks = kinds.iter().filter(|k| **k != RowKind::Eq).count();
    let artificials = kinds.iter().filter(|k| **k != RowKind::Le).count();
    let width = structural + slacks + artificials;
    let rhs_col = width;

    let mut table: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (structural, structural + slacks);
    for (r, row) in rows.iter().enumerate() {
        let mut line = vec![zero(); width + 1];
        for (c, &(k, positive)) in columns.iter().enumerate() {
            let a = &row.coeffs[k];
            if !a.is_zero() {
                line[c] = if positive { a.clone() } else { -a };
            }
        }
        line[rhs_col] = row.rhs.clone();
        if signs[r] {
            for v in line.iter_mut() {
                *v = -&*v;
            }
        }
        match kinds[r] {
            RowKind::Le => {
                line[next_slack] = Rational::from_integer(1.into());
                basis.push(next_slack);
                next_slack += 1;
            }
            RowKind::Ge => {
                line[next_slack] = Rational::from_integer((-1).into());
                next_slack += 1;
                line[next_art] = Rational::from_integer(1.into());
                basis.push(next_art);
                next_art += 1;
            }
            RowKind::Eq => {
                line[next_art] = Rational::from_integer(1.into());
                basis.push(next_art);
                next_art += 1;
            }
        }
        table.push(line);
    }
    let first_art = structural + slacks;
    let mut tableau = Tableau {
        table,
        basis,
        width,
        allowed: vec![true; width],
    };

    if artificials > 0 {
        let mut cost = vec![zero(); width];
        for c in cost.iter_mut().skip(first_art) {
            *c = Rational::from_integer((-1).into());
        }
        if tableau.run(&cost, false) == Run::Unbounded {
            unreachable!("phase one is bounded");
        }
        if tableau.value(&cost).is_negative() {
            return LpOutcome::Infeasible;
        }
        tableau.drive_out(first_art);
        for a in tableau.allowed.iter_mut().skip(first_art) {
            *a = false;
        }
    }

    let mut cost = vec![zero(); width];
    for (c, &(k, positive)) in columns.iter().enumerate() {
        cost[c] = if positive { objective[k].clone() } else { -&objective[k] };
    }
    if tableau.run(&cost, stop_positive) == Run::Unbounded {
        return LpOutcome::Unbounded;
    }
    let value = tableau.value(&cost);

    let mut column_values = vec![zero(); width];
    for (r, &b) in tableau.basis.iter().enumerate() {
        column_values[b] = tableau.table[r][rhs_col].clone();
    }
    let mut point = vec![zero(); dim];
    for (c, &(k, positive)) in columns.iter().enumerate() {
        if positive {
            point[k] += &column_values[c];
        } else {
            point[k] -= &column_values[c];
        }
    }
    LpOutcome::Optimal { point, value }
}

#[derive(PartialEq, Eq)]
enum Run {
    Done,
    Unbounded,
}

struct Tableau {
    table: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
    allowed: Vec<bool>,
}

impl Tableau {
    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .fold(zero(), |acc, (r, &b)| acc + &cost[b] * &self.table[r][self.width])
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d: Vec<Rational> = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let t = &self.table[r][j];
                if !t.is_zero() {
                    *dj -= &cost[b] * t;
                }
            }
        }
        d
    }

    fn run(&mut self, cost: &[Rational], stop_positive: bool) -> Run {
        let mut d = self.reduced_costs(cost);
        loop {
            if stop_positive && self.value(cost).is_positive() {
                return Run::Done;
            }
            let Some(enter) = (0..self.width).find(|&j| self.allowed[j] && d[j].is_positive()) else {
                return Run::Done;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.table.len() {
                let a = &self.table[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.table[r][self.width] / a;
                let better = match &leave {
                    None => true,
                    Some((best_r, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Run::Unbounded;
            };
            self.pivot(row, enter);
            let factor = d[enter].clone();
            if !factor.is_zero() {
                for (j, dj) in d.iter_mut().enumerate() {
                    let t = &self.table[row][j];
                    if !t.is_zero() {
                        *dj -= &factor * t;
                    }
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.table[row][col].clone();
        for v in self.table[row].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = self.table[row].clone();
        for (r, line) in self.table.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Pivots zero-valued artificial variables out of the basis, dropping
    /// rows that turn out to be redundant.
    fn drive_out(&mut self, first_art: usize) {
        let mut r = 0;
        while r < self.table.len() {
            if self.basis[r] >= first_art {
                match (0..first_art).find(|&j| !self.table[r][j].is_zero()) {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.table.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn row(coeffs: &[i64], kind: RowKind, rhs: i64) -> Row {
        Row {
            coeffs: coeffs.iter().map(|&c| int(c)).collect(),
            kind,
            rhs: int(rhs),
        }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
        let rows = [
            row(&[1, 0], RowKind::Le, 4),
            row(&[0, 2], RowKind::Le, 12),
            row(&[3, 2], RowKind::Le, 18),
        ];
        match maximize(&rows, &[int(3), int(5)], &[false, false], false) {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(value, int(36));
                assert_eq!(point, vec![int(2), int(6)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let rows = [row(&[1], RowKind::Ge, 3), row(&[1], RowKind::Le, 2)];
        assert_eq!(maximize(&rows, &[int(0)], &[false], false), LpOutcome::Infeasible);
        let rows = [row(&[1, -1], RowKind::Le, 1)];
        assert_eq!(
            maximize(&rows, &[int(1), int(0)], &[false, false], false),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn free_variables_and_equalities() {
        // x free, x = -7/2
        let rows = [Row {
            coeffs: vec![int(2)],
            kind: RowKind::Eq,
            rhs: int(-7),
        }];
        match maximize(&rows, &[int(0)], &[true], false) {
            LpOutcome::Optimal { point, .. } => assert_eq!(point, vec![frac(-7, 2)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let rows = [
            row(&[1, 1], RowKind::Eq, 2),
            row(&[2, 2], RowKind::Eq, 4),
            row(&[1, 0], RowKind::Le, 1),
        ];
        match maximize(&rows, &[int(0), int(1)], &[false, false], false) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(2)),
            other => panic!("{other:?}"),
        }
    }
}
