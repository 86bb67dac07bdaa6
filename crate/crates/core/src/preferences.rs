//! Per-country preferences over reduced state vectors: explicit tiered
//! orders, their axiom checks, and the pairwise-utility function that induces
//! orders for the simulation engine.

use std::fmt;

use crate::error::{PagError, Result};
use crate::model::{state_vector, EnvironmentGraph, Relation, State, StateVector, StrategyMatrix};
use crate::rational::{int, one, zero, Rational};

/// Binary recoding of a state vector from one observer's point of view: a
/// coordinate is `1` when that country's state is good for the observer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedStateVector(pub Vec<bool>);

impl ReducedStateVector {
    pub fn from_mask(n: usize, mask: usize) -> Self {
        ReducedStateVector((0..n).map(|j| mask >> j & 1 == 1).collect())
    }

    /// Bit `j` of the mask is coordinate `j`.
    pub fn mask(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | (usize::from(b) << j))
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `[1,0,1]`, `1,0,1` or `101`.
    pub fn parse(text: &str) -> Option<Self> {
        let body = text.trim().trim_start_matches('[').trim_end_matches(']');
        let bits: Option<Vec<bool>> = body
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        bits.filter(|b| !b.is_empty()).map(ReducedStateVector)
    }
}

impl fmt::Display for ReducedStateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, b) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u8::from(*b))?;
        }
        write!(f, "]")
    }
}

/// Whether `state` of country `j` counts as `1` for observer `i`.
pub fn reduced_bit(relation: Relation, state: State) -> bool {
    match relation {
        Relation::Adversary => state != State::Safe,
        Relation::Friend | Relation::Null => state != State::Unsafe,
    }
}

pub fn reduce_state(g: &EnvironmentGraph, x: &StateVector, i: usize) -> ReducedStateVector {
    ReducedStateVector((0..g.n()).map(|j| reduced_bit(g.relation(i, j), x.get(j))).collect())
}

/// Anything that ranks reduced state vectors for each country; larger scores
/// are better.
pub trait Preference: Sync {
    fn score(&self, country: usize, reduced: &ReducedStateVector) -> Rational;
}

/// Total preorder of one country over all `2^n` reduced vectors, stored as
/// tiers from best to worst.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountryOrder {
    tiers: Vec<Vec<ReducedStateVector>>,
    tier_of: Vec<usize>,
}

impl CountryOrder {
    pub fn from_tiers(country: usize, n: usize, tiers: Vec<Vec<ReducedStateVector>>) -> Result<Self> {
        let size = 1usize << n;
        let mut tier_of = vec![usize::MAX; size];
        for (t, tier) in tiers.iter().enumerate() {
            if tier.is_empty() {
                return Err(PagError::InvalidOrder {
                    country,
                    reason: "empty tier".into(),
                });
            }
            for v in tier {
                if v.len() != n {
                    return Err(PagError::InvalidOrder {
                        country,
                        reason: format!("{v} has length {} instead of {n}", v.len()),
                    });
                }
                let slot = &mut tier_of[v.mask()];
                if *slot != usize::MAX {
                    return Err(PagError::InvalidOrder {
                        country,
                        reason: format!("{v} listed twice"),
                    });
                }
                *slot = t;
            }
        }
        if let Some(missing) = tier_of.iter().position(|&t| t == usize::MAX) {
            return Err(PagError::InvalidOrder {
                country,
                reason: format!("{} is not ranked", ReducedStateVector::from_mask(n, missing)),
            });
        }
        Ok(CountryOrder { tiers, tier_of })
    }

    pub fn tiers(&self) -> &[Vec<ReducedStateVector>] {
        &self.tiers
    }

    /// 0 is the best tier.
    pub fn tier(&self, v: &ReducedStateVector) -> usize {
        self.tier_of[v.mask()]
    }
}

impl fmt::Display for CountryOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, tier) in self.tiers.iter().enumerate() {
            if t > 0 {
                write!(f, " > ")?;
            }
            for (k, v) in tier.iter().enumerate() {
                if k > 0 {
                    write!(f, " ~ ")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

/// One order per country.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateOrders(pub Vec<CountryOrder>);

impl StateOrders {
    pub fn country(&self, i: usize) -> &CountryOrder {
        &self.0[i]
    }

    /// Orders obtained by sorting reduced vectors by utility; equal utilities
    /// share a tier.
    pub fn induced(g: &EnvironmentGraph, table: &UtilityTable) -> Self {
        let n = g.n();
        let orders = (0..n)
            .map(|i| {
                let mut scored: Vec<(Rational, ReducedStateVector)> = (0..1usize << n)
                    .map(|mask| {
                        let v = ReducedStateVector::from_mask(n, mask);
                        (table.score(i, &v), v)
                    })
                    .collect();
                scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| b.1.cmp(&a.1)));
                let mut tiers: Vec<Vec<ReducedStateVector>> = Vec::new();
                let mut last: Option<Rational> = None;
                for (score, v) in scored {
                    if last.as_ref() == Some(&score) {
                        tiers.last_mut().expect("tier exists").push(v);
                    } else {
                        tiers.push(vec![v]);
                        last = Some(score);
                    }
                }
                CountryOrder::from_tiers(i, n, tiers).expect("utility order covers every vector")
            })
            .collect();
        StateOrders(orders)
    }
}

impl Preference for StateOrders {
    fn score(&self, country: usize, reduced: &ReducedStateVector) -> Rational {
        -int(self.0[country].tier(reduced) as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// Componentwise domination on own and relation coordinates implies weak preference.
    WeakPreference,
    /// Agreement on own and relation coordinates implies indifference.
    Indifference,
    /// Own survival beats own demise.
    StrongPreference,
}

/// `better` should rank at least as high as (or strictly above, for the strong
/// axiom; equal to, for indifference) `worse`, but does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub better: ReducedStateVector,
    pub worse: ReducedStateVector,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.axiom {
            Axiom::WeakPreference => write!(f, "weak preference: {} must not rank below {}", self.better, self.worse),
            Axiom::Indifference => write!(f, "indifference: {} and {} must share a tier", self.better, self.worse),
            Axiom::StrongPreference => {
                write!(
                    f,
                    "strong preference: {} must rank strictly above {}",
                    self.better, self.worse
                )
            }
        }
    }
}

/// Checks the three preference axioms for country `i` over every ordered
/// pair of reduced vectors.
pub fn validate_axioms(
    g: &EnvironmentGraph,
    order: &CountryOrder,
    i: usize,
) -> std::result::Result<(), Vec<AxiomViolation>> {
    let n = g.n();
    // own coordinate plus friends and adversaries
    let care: usize = (0..n)
        .filter(|&j| g.relation(i, j).is_related())
        .fold(0, |m, j| m | 1 << j);
    let own = 1usize << i;
    let mut violations = Vec::new();
    for a in 0..1usize << n {
        for b in 0..1usize << n {
            if a == b {
                continue;
            }
            let (ta, tb) = (order.tier_of[a], order.tier_of[b]);
            let va = || ReducedStateVector::from_mask(n, a);
            let vb = || ReducedStateVector::from_mask(n, b);
            // a dominates b on the coordinates i cares about
            if (a & care) & (b & care) == (b & care) && ta > tb {
                violations.push(AxiomViolation {
                    axiom: Axiom::WeakPreference,
                    better: va(),
                    worse: vb(),
                });
            }
            if a < b && a & care == b & care && ta != tb {
                violations.push(AxiomViolation {
                    axiom: Axiom::Indifference,
                    better: va(),
                    worse: vb(),
                });
            }
            if a & own != 0 && b & own == 0 && ta >= tb {
                violations.push(AxiomViolation {
                    axiom: Axiom::StrongPreference,
                    better: va(),
                    worse: vb(),
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preferred {
    First,
    Second,
    Indifferent,
}

pub fn prefer(order: &StateOrders, i: usize, a: &ReducedStateVector, b: &ReducedStateVector) -> Preferred {
    let order = order.country(i);
    match order.tier(a).cmp(&order.tier(b)) {
        std::cmp::Ordering::Less => Preferred::First,
        std::cmp::Ordering::Greater => Preferred::Second,
        std::cmp::Ordering::Equal => Preferred::Indifferent,
    }
}

/// Pairwise utilities of one country: `t_ij(1)` for every relation, plus the
/// self terms `t_ii(1)` (survival) and `t_ii(0)` (demise).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseUtilities {
    pub country: usize,
    pub survive: Rational,
    pub demise: Rational,
    relations: Vec<Relation>,
    pairs: Vec<Rational>,
}

impl PairwiseUtilities {
    pub fn pair(&self, j: usize) -> &Rational {
        &self.pairs[j]
    }

    /// Utility of a reduced outcome: `t_ii(0)` if the country does not
    /// survive, otherwise `t_ii(1)` plus `t_ij(1)` over friends that survive
    /// and adversaries that do not stay safe.
    pub fn of_reduced(&self, reduced: &ReducedStateVector) -> Rational {
        if !reduced.get(self.country) {
            return self.demise.clone();
        }
        let mut total = self.survive.clone();
        for (j, relation) in self.relations.iter().enumerate() {
            if j != self.country && relation.is_related() && reduced.get(j) {
                total += &self.pairs[j];
            }
        }
        total
    }
}

/// Pairwise utilities for every country.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityTable(pub Vec<PairwiseUtilities>);

impl UtilityTable {
    /// Uses the graph's relation importances as `t_ij(1)`.
    pub fn from_graph(g: &EnvironmentGraph, survive: &[Rational], demise: &[Rational]) -> Result<Self> {
        let n = g.n();
        if survive.len() != n || demise.len() != n {
            return Err(PagError::InvalidConfig("one self utility per country required".into()));
        }
        let table = (0..n)
            .map(|i| {
                if survive[i] <= demise[i] {
                    return Err(PagError::InvalidOrder {
                        country: i,
                        reason: "survival utility must exceed demise utility".into(),
                    });
                }
                Ok(PairwiseUtilities {
                    country: i,
                    survive: survive[i].clone(),
                    demise: demise[i].clone(),
                    relations: (0..n).map(|j| g.relation(i, j)).collect(),
                    pairs: (0..n)
                        .map(|j| {
                            if j == i || !g.relation(i, j).is_related() {
                                zero()
                            } else {
                                g.importance(i, j).clone()
                            }
                        })
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UtilityTable(table))
    }

    /// `t_ii(1) = 1`, `t_ii(0) = 0` for everyone.
    pub fn with_defaults(g: &EnvironmentGraph) -> Self {
        let n = g.n();
        Self::from_graph(g, &vec![one(); n], &vec![zero(); n]).expect("defaults are valid")
    }

    pub fn country(&self, i: usize) -> &PairwiseUtilities {
        &self.0[i]
    }
}

impl Preference for UtilityTable {
    fn score(&self, country: usize, reduced: &ReducedStateVector) -> Rational {
        self.0[country].of_reduced(reduced)
    }
}

/// Utility of country `i` under strategy matrix `u`.
pub fn utility(g: &EnvironmentGraph, table: &UtilityTable, u: &StrategyMatrix, i: usize) -> Rational {
    table.country(i).of_reduced(&reduce_state(g, &state_vector(g, u), i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{unflatten, FlatAllocation};
    use crate::rational::{frac, int};

    fn rsv(text: &str) -> ReducedStateVector {
        ReducedStateVector::parse(text).unwrap()
    }

    fn tiers(layout: &[&[&str]]) -> Vec<Vec<ReducedStateVector>> {
        layout.iter().map(|t| t.iter().map(|v| rsv(v)).collect()).collect()
    }

    fn line_game() -> EnvironmentGraph {
        EnvironmentGraph::builder(vec![int(5), int(9), int(5)])
            .adversaries(0, 1)
            .unwrap()
            .adversaries(1, 2)
            .unwrap()
            .build()
            .unwrap()
    }

    fn line_orders() -> StateOrders {
        StateOrders(vec![
            CountryOrder::from_tiers(
                0,
                3,
                tiers(&[&["111", "110"], &["101", "100"], &["010", "011", "001", "000"]]),
            )
            .unwrap(),
            CountryOrder::from_tiers(
                1,
                3,
                tiers(&[
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
                tiers(&[&["111", "011"], &["101", "001"], &["110", "010", "100", "000"]]),
            )
            .unwrap(),
        ])
    }

    /// Independent rule: enumerate the definition of the recoding.
    fn reduce_oracle(g: &EnvironmentGraph, x: &StateVector, i: usize) -> Vec<bool> {
        (0..g.n())
            .map(|j| {
                let s = x.get(j);
                let friend_like = j == i || g.relation(i, j) != Relation::Adversary;
                if friend_like {
                    matches!(s, State::Safe | State::Precarious)
                } else {
                    matches!(s, State::Unsafe | State::Precarious)
                }
            })
            .collect()
    }

    #[test]
    fn reduce_matches_rule_on_all_ternary_vectors() {
        let g = line_game();
        let x = StateVector::parse("SPP").unwrap();
        assert_eq!(reduce_state(&g, &x, 1), rsv("011"));
        for x in StateVector::all(3) {
            for i in 0..3 {
                assert_eq!(reduce_state(&g, &x, i).0, reduce_oracle(&g, &x, i));
            }
        }
    }

    #[test]
    fn reduce_trivial_cases() {
        let g = EnvironmentGraph::builder(vec![int(1), int(1), int(1)])
            .friends(0, 1)
            .unwrap()
            .friends(0, 2)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(reduce_state(&g, &StateVector::parse("SSS").unwrap(), 0), rsv("111"));
        assert_eq!(reduce_state(&g, &StateVector::parse("UUU").unwrap(), 0), rsv("000"));
    }

    #[test]
    fn printed_line_orders_satisfy_axioms() {
        let g = line_game();
        let orders = line_orders();
        for i in 0..3 {
            assert_eq!(validate_axioms(&g, orders.country(i), i), Ok(()), "country {}", i + 1);
        }
    }

    #[test]
    fn own_demise_above_survival_is_rejected() {
        let g = line_game();
        let order = CountryOrder::from_tiers(
            0,
            3,
            tiers(&[&["011"], &["111", "110"], &["101", "100"], &["010", "001", "000"]]),
        )
        .unwrap();
        let violations = validate_axioms(&g, &order, 0).unwrap_err();
        assert!(violations
            .iter()
            .any(|v| v.axiom == Axiom::StrongPreference && v.better == rsv("111") && v.worse == rsv("011")));
    }

    #[test]
    fn indifference_violation_detected() {
        let g = line_game();
        // country 1 is unrelated to 3, so [1,1,1] and [1,1,0] must tie
        let order = CountryOrder::from_tiers(
            0,
            3,
            tiers(&[&["111"], &["110"], &["101", "100"], &["010", "011", "001", "000"]]),
        )
        .unwrap();
        let violations = validate_axioms(&g, &order, 0).unwrap_err();
        assert!(violations.iter().any(|v| v.axiom == Axiom::Indifference));
        assert!(violations.iter().all(|v| v.axiom != Axiom::StrongPreference));
    }

    #[test]
    fn order_construction_requires_coverage() {
        assert!(CountryOrder::from_tiers(0, 2, tiers(&[&["11", "10"], &["01"]])).is_err());
        assert!(CountryOrder::from_tiers(0, 2, tiers(&[&["11", "10"], &["01", "00", "11"]])).is_err());
        assert!(CountryOrder::from_tiers(0, 2, tiers(&[&["11", "10"], &["01", "000"]])).is_err());
    }

    #[test]
    fn prefer_uses_tiers() {
        let orders = line_orders();
        assert_eq!(prefer(&orders, 1, &rsv("011"), &rsv("110")), Preferred::First);
        assert_eq!(prefer(&orders, 1, &rsv("001"), &rsv("100")), Preferred::Indifferent);
        assert_eq!(prefer(&orders, 1, &rsv("000"), &rsv("001")), Preferred::Second);
        assert_eq!(prefer(&orders, 0, &rsv("101"), &rsv("101")), Preferred::Indifferent);
    }

    #[test]
    fn utility_branches() {
        let g = line_game();
        let table = UtilityTable::with_defaults(&g);
        // country 2 (index 1) unsafe
        let u = unflatten(&g, &FlatAllocation(vec![int(5), int(0), int(0), int(5)])).unwrap();
        assert_eq!(utility(&g, &table, &u, 1), int(0));

        let lone = EnvironmentGraph::builder(vec![int(2)]).build().unwrap();
        let table = UtilityTable::from_graph(&lone, &[frac(7, 4)], &[int(0)]).unwrap();
        assert_eq!(utility(&lone, &table, &StrategyMatrix::all_self(&lone), 0), frac(7, 4));
    }

    #[test]
    fn utility_sums_surviving_friends_and_threatened_adversaries() {
        // 1 friends with 2; adversary of 3
        let g = EnvironmentGraph::builder(vec![int(4), int(1), int(1)])
            .relate(0, 1, Relation::Friend, frac(1, 5))
            .unwrap()
            .relate(0, 2, Relation::Adversary, frac(3, 10))
            .unwrap()
            .build()
            .unwrap();
        let table = UtilityTable::with_defaults(&g);
        // everyone keeps power: 3 is safe, so only self + friend count
        let u = StrategyMatrix::all_self(&g);
        assert_eq!(utility(&g, &table, &u, 0), frac(6, 5));
        // 1 attacks 3 with 2 units: 3 unsafe
        let u = unflatten(&g, &FlatAllocation(vec![int(0), int(2), int(0), int(0)])).unwrap();
        assert_eq!(utility(&g, &table, &u, 0), frac(15, 10));
    }

    #[test]
    fn self_utilities_must_order_survival_first() {
        let g = line_game();
        assert!(UtilityTable::from_graph(&g, &[int(0), int(1), int(1)], &[int(0), int(0), int(0)]).is_err());
    }

    #[test]
    fn induced_orders_satisfy_axioms() {
        let g = EnvironmentGraph::builder(vec![int(1), int(1), int(1), int(1)])
            .relate(0, 1, Relation::Friend, frac(1, 3))
            .unwrap()
            .relate(0, 2, Relation::Adversary, frac(1, 2))
            .unwrap()
            .relate(1, 3, Relation::Adversary, frac(1, 7))
            .unwrap()
            .build()
            .unwrap();
        let table = UtilityTable::with_defaults(&g);
        let orders = StateOrders::induced(&g, &table);
        for i in 0..4 {
            assert_eq!(validate_axioms(&g, orders.country(i), i), Ok(()));
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(rsv("[1, 0,1]").to_string(), "[1,0,1]");
        assert_eq!(rsv("101").mask(), 0b101);
        assert!(ReducedStateVector::parse("[1,2]").is_none());
        assert!(ReducedStateVector::parse("[]").is_none());
    }
}
