//! Unilateral deviations: per-target allocation thresholds, exact
//! reachability of reduced outcomes and the exact best response.

use num_traits::Signed;

use crate::error::Result;
use crate::model::{state_vector, total_support, total_threat, EnvironmentGraph, Relation, StrategyMatrix};
use crate::preferences::{reduce_state, Preference, ReducedStateVector};
use crate::rational::{zero, Rational};

/// Replacement row for one country.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub country: usize,
    pub row: Vec<Rational>,
}

impl Deviation {
    /// The strategy matrix with the row swapped in (validated).
    pub fn apply(&self, g: &EnvironmentGraph, u: &StrategyMatrix) -> Result<StrategyMatrix> {
        u.with_row(g, self.country, &self.row)
    }
}

/// Binary targets of one country on its own coordinate and on each of its
/// relations, sorted by country index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TargetProfile {
    pub country: usize,
    pub targets: Vec<(usize, bool)>,
}

impl TargetProfile {
    /// Profile read off a full reduced vector.
    pub fn from_reduced(g: &EnvironmentGraph, i: usize, reduced: &ReducedStateVector) -> Self {
        let targets = (0..g.n())
            .filter(|&j| j == i || g.relation(i, j).is_related())
            .map(|j| (j, reduced.get(j)))
            .collect();
        TargetProfile { country: i, targets }
    }

    pub fn get(&self, j: usize) -> Option<bool> {
        self.targets.iter().find(|(k, _)| *k == j).map(|(_, b)| *b)
    }
}

/// The value of `u_ij` at which country `j`'s reduced bit (seen from `i`)
/// flips to 1, other rows held fixed: the bit is 1 iff `u_ij >= boundary`.
pub fn boundary(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize, j: usize) -> Rational {
    let sigma = total_support(g, u, j);
    let tau = total_threat(g, u, j);
    let own = u.get(i, j);
    match g.relation(i, j) {
        // sigma_j = sigma_j^{-i} + u_ij must reach tau_j
        Relation::Friend => tau - (sigma - own),
        // tau_j = tau_j^{-i} + u_ij must reach sigma_j
        Relation::Adversary => sigma - (tau - own),
        Relation::Null => panic!("countries {} and {} are unrelated", i + 1, j + 1),
    }
}

/// Minimal `u_ij` realizing `target` for relation `j`, or `None` when no
/// value in `[0, p_i]` does.
pub fn threshold(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize, j: usize, target: bool) -> Option<Rational> {
    let b = boundary(g, u, i, j);
    if target {
        let need = if b.is_positive() { b } else { zero() };
        (&need <= g.power(i)).then_some(need)
    } else {
        // strict: u_ij < b, cheapest at zero
        b.is_positive().then(zero)
    }
}

/// Quantities that fix the outcome of any row of country `i` against the
/// other rows of `u`.
struct Landscape {
    i: usize,
    related: Vec<usize>,
    boundary: Vec<Rational>,
    /// `p_i + support from friends - tau_i`; survival iff friend spend <= base
    base: Rational,
}

impl Landscape {
    fn new(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize) -> Self {
        let related = g.related(i);
        let boundary = related.iter().map(|&j| boundary(g, u, i, j)).collect();
        let incoming = g.friends_of(i).fold(zero(), |acc, k| acc + u.get(k, i));
        let base = g.power(i) + incoming - total_threat(g, u, i);
        Landscape {
            i,
            related,
            boundary,
            base,
        }
    }

    /// Row spending exactly the clipped boundary on each chosen relation.
    fn minimal_row(&self, g: &EnvironmentGraph, chosen: usize) -> Option<Vec<Rational>> {
        let mut row = vec![zero(); g.n()];
        let mut spent = zero();
        for (k, &j) in self.related.iter().enumerate() {
            if chosen >> k & 1 == 1 && self.boundary[k].is_positive() {
                spent += &self.boundary[k];
                row[j] = self.boundary[k].clone();
            }
        }
        let slack = g.power(self.i) - spent;
        if slack.is_negative() {
            return None;
        }
        row[self.i] = slack;
        Some(row)
    }

    /// Reduced vector produced by `row`, starting from `current`.
    fn outcome(&self, g: &EnvironmentGraph, row: &[Rational], current: &ReducedStateVector) -> ReducedStateVector {
        let mut bits = current.0.clone();
        let mut friend_spend = zero();
        for (k, &j) in self.related.iter().enumerate() {
            bits[j] = row[j] >= self.boundary[k];
            if g.relation(self.i, j) == Relation::Friend {
                friend_spend += &row[j];
            }
        }
        bits[self.i] = friend_spend <= self.base;
        ReducedStateVector(bits)
    }
}

/// Whether country `i` can move the reduced outcome, on its own coordinate
/// and its relations, to the values of `target`.
pub fn deviation_feasible(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize, target: &ReducedStateVector) -> bool {
    let land = Landscape::new(g, u, i);
    let mut budget = g.power(i).clone();
    let mut friend_min = zero();
    let mut friend_cap = zero();
    let mut open_friend = false;
    let mut friends_outside = false;
    for (k, &j) in land.related.iter().enumerate() {
        let b = &land.boundary[k];
        let is_friend = g.relation(i, j) == Relation::Friend;
        if target.get(j) {
            if b.is_positive() {
                budget -= b;
                if is_friend {
                    friend_min += b;
                }
            }
            open_friend |= is_friend;
        } else {
            if !b.is_positive() {
                return false;
            }
            if is_friend {
                friends_outside = true;
                friend_cap += b;
            }
        }
    }
    if budget.is_negative() {
        return false;
    }
    if target.get(i) {
        friend_min <= land.base
    } else if open_friend {
        // friend spend can go anywhere in [friend_min, friend_min + budget]
        &friend_min + &budget > land.base
    } else if friends_outside {
        // friend spend ranges over [0, min(budget, cap)) with the cap strict
        budget > land.base && friend_cap > land.base
    } else {
        land.base.is_negative()
    }
}

/// Best row for a country together with its score and the score of the row
/// it currently plays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestResponse {
    pub deviation: Deviation,
    pub outcome: ReducedStateVector,
    pub score: Rational,
    pub current: Rational,
}

impl BestResponse {
    pub fn improves(&self) -> bool {
        self.score > self.current
    }
}

/// Exact best response of country `i`. Every achievable outcome is realized
/// by a minimal row for some subset of relations, so enumerating subsets is
/// exhaustive. Ties prefer own survival, then the smallest outcome profile,
/// then the smallest row.
pub fn best_response<P: Preference + ?Sized>(
    g: &EnvironmentGraph,
    pref: &P,
    u: &StrategyMatrix,
    i: usize,
) -> BestResponse {
    let land = Landscape::new(g, u, i);
    let current_reduced = reduce_state(g, &state_vector(g, u), i);
    let current = pref.score(i, &current_reduced);
    type Key = (
        Rational,
        bool,
        std::cmp::Reverse<TargetProfile>,
        std::cmp::Reverse<Vec<Rational>>,
    );
    let mut best: Option<(Key, ReducedStateVector)> = None;
    for chosen in 0..1usize << land.related.len() {
        let Some(row) = land.minimal_row(g, chosen) else {
            continue;
        };
        let outcome = land.outcome(g, &row, &current_reduced);
        let score = pref.score(i, &outcome);
        let key = (
            score,
            outcome.get(i),
            std::cmp::Reverse(TargetProfile::from_reduced(g, i, &outcome)),
            std::cmp::Reverse(row),
        );
        if best.as_ref().is_none_or(|(k, _)| key > *k) {
            best = Some((key, outcome));
        }
    }
    let ((score, _, _, std::cmp::Reverse(row)), outcome) = best.expect("keeping every power on self is a valid row");
    BestResponse {
        deviation: Deviation { country: i, row },
        outcome,
        score,
        current,
    }
}

/// Whether no country has a strictly improving row.
pub fn is_equilibrium<P: Preference + ?Sized>(g: &EnvironmentGraph, pref: &P, u: &StrategyMatrix) -> bool {
    (0..g.n()).all(|i| !best_response(g, pref, u, i).improves())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{unflatten, FlatAllocation};
    use crate::preferences::{CountryOrder, StateOrders, UtilityTable};
    use crate::rational::{frac, int};

    fn line_game() -> EnvironmentGraph {
        EnvironmentGraph::builder(vec![int(5), int(9), int(5)])
            .adversaries(0, 1)
            .unwrap()
            .adversaries(1, 2)
            .unwrap()
            .build()
            .unwrap()
    }

    fn at(g: &EnvironmentGraph, a: Rational, b: Rational, c: Rational, d: Rational) -> StrategyMatrix {
        unflatten(g, &FlatAllocation(vec![a, b, c, d])).unwrap()
    }

    fn rsv(text: &str) -> ReducedStateVector {
        ReducedStateVector::parse(text).unwrap()
    }

    fn line_orders() -> StateOrders {
        let t = |layout: &[&[&str]]| -> Vec<Vec<ReducedStateVector>> {
            layout
                .iter()
                .map(|tier| tier.iter().map(|v| rsv(v)).collect())
                .collect()
        };
        StateOrders(vec![
            CountryOrder::from_tiers(
                0,
                3,
                t(&[&["111", "110"], &["101", "100"], &["010", "011", "001", "000"]]),
            )
            .unwrap(),
            CountryOrder::from_tiers(
                1,
                3,
                t(&[
                    &["111"],
                    &["011"],
                    &["110"],
                    &["010"],
                    &["101"],
                    &["001", "100"],
                    &["000"],
                ]),
            )
            .unwrap(),
            CountryOrder::from_tiers(
                2,
                3,
                t(&[&["111", "011"], &["101", "001"], &["110", "010", "100", "000"]]),
            )
            .unwrap(),
        ])
    }

    #[test]
    fn adversary_threshold_from_line_game() {
        let g = line_game();
        let u = at(&g, int(4), int(0), int(0), int(0));
        // country 3 pushing country 2 to unsafe or precarious needs d >= 9 - 4
        assert_eq!(threshold(&g, &u, 2, 1, true), Some(int(5)));
        assert_eq!(threshold(&g, &u, 2, 1, false), Some(int(0)));
    }

    #[test]
    fn threshold_infeasible_beyond_budget() {
        let g = line_game();
        let u = at(&g, int(0), int(0), int(0), int(0));
        // country 1 alone cannot make country 2 unsafe: needs 9 > 5
        assert_eq!(threshold(&g, &u, 0, 1, true), None);
    }

    #[test]
    fn friend_already_safe_needs_nothing() {
        let g = EnvironmentGraph::builder(vec![int(2), int(3)])
            .friends(0, 1)
            .unwrap()
            .build()
            .unwrap();
        let u = StrategyMatrix::all_self(&g);
        assert_eq!(threshold(&g, &u, 0, 1, true), Some(int(0)));
        assert_eq!(threshold(&g, &u, 0, 1, false), None);
    }

    #[test]
    fn interior_point_blocks_country_two() {
        let g = line_game();
        let u = at(&g, frac(9, 2), int(2), int(6), int(5));
        for mask in 0..8 {
            let target = ReducedStateVector::from_mask(3, mask);
            if target.get(1) {
                assert!(!deviation_feasible(&g, &u, 1, &target), "{target}");
            }
        }
    }

    #[test]
    fn current_outcome_is_always_reachable() {
        let g = line_game();
        for (a, b, c, d) in [(0, 0, 0, 0), (4, 0, 5, 5), (5, 9, 0, 5), (2, 3, 4, 1)] {
            let u = at(&g, int(a), int(b), int(c), int(d));
            let x = state_vector(&g, &u);
            for i in 0..3 {
                assert!(deviation_feasible(&g, &u, i, &reduce_state(&g, &x, i)));
            }
        }
    }

    #[test]
    fn lone_country_cannot_fall() {
        let g = EnvironmentGraph::builder(vec![int(3)]).build().unwrap();
        let u = StrategyMatrix::all_self(&g);
        assert!(!deviation_feasible(&g, &u, 0, &rsv("0")));
        assert!(deviation_feasible(&g, &u, 0, &rsv("1")));
        let br = best_response(&g, &UtilityTable::with_defaults(&g), &u, 0);
        assert_eq!(br.deviation.row, vec![int(3)]);
        assert!(!br.improves());
    }

    /// Integer grid search over all rows of country `i`.
    fn grid_best(g: &EnvironmentGraph, pref: &dyn Preference, u: &StrategyMatrix, i: usize) -> Rational {
        let related = g.related(i);
        let p: i64 = g.power(i).to_integer().try_into().unwrap();
        let mut best: Option<Rational> = None;
        let mut stack = vec![(0usize, vec![0i64; g.n()], 0i64)];
        while let Some((k, row, used)) = stack.pop() {
            if k == related.len() {
                let mut full: Vec<Rational> = row.iter().map(|&v| int(v)).collect();
                full[i] = int(p - used);
                let v = u.with_row(g, i, &full).unwrap();
                let s = pref.score(i, &reduce_state(g, &state_vector(g, &v), i));
                if best.as_ref().is_none_or(|b| s > *b) {
                    best = Some(s);
                }
                continue;
            }
            for amount in 0..=p - used {
                let mut next = row.clone();
                next[related[k]] = amount;
                stack.push((k + 1, next, used + amount));
            }
        }
        best.unwrap()
    }

    #[test]
    fn best_response_matches_grid_on_line_game() {
        let g = line_game();
        let orders = line_orders();
        for a in 0..=5 {
            for d in 0..=5 {
                for (b, c) in [(0, 0), (0, 5), (3, 4), (9, 0)] {
                    let u = at(&g, int(a), int(b), int(c), int(d));
                    for i in 0..3 {
                        let br = best_response(&g, &orders, &u, i);
                        assert_eq!(br.score, grid_best(&g, &orders, &u, i), "({a},{b},{c},{d}) i={i}");
                        let v = br.deviation.apply(&g, &u).unwrap();
                        let realized = reduce_state(&g, &state_vector(&g, &v), i);
                        assert_eq!(realized, br.outcome);
                        assert!(br.score >= br.current);
                    }
                }
            }
        }
    }

    #[test]
    fn tie_break_prefers_smallest_row() {
        let g = line_game();
        let orders = line_orders();
        // country 1 is safe and cannot hurt country 2: staying put is optimal
        let u = at(&g, int(0), int(0), int(0), int(0));
        let br = best_response(&g, &orders, &u, 0);
        assert_eq!(br.deviation.row, vec![int(5), int(0), int(0)]);
        // country 2 attacks nobody usefully but must keep itself safe
        let br = best_response(&g, &orders, &u, 1);
        assert!(br.outcome.get(1));
    }
}
