//! Core game objects: the signed environment graph, strategy matrices, the
//! support / threat functionals and the state function.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{PagError, Result};
use crate::rational::{format_rational, zero, Rational};

/// Relation between two distinct countries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Friend,
    Adversary,
    Null,
}

impl Relation {
    /// Numeric code used by scenario tables: friend `1`, adversary `-1`, null `0`.
    pub fn code(self) -> i8 {
        match self {
            Relation::Friend => 1,
            Relation::Adversary => -1,
            Relation::Null => 0,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(Relation::Friend),
            -1 => Some(Relation::Adversary),
            0 => Some(Relation::Null),
            _ => None,
        }
    }

    pub fn is_related(self) -> bool {
        self != Relation::Null
    }
}

/// Position of every off-diagonal allocation `u_ij` (with `(i, j)` a friend or
/// adversary edge) in the flat `2m`-vector. Country `i`'s entries are
/// contiguous and ordered by `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatIndex {
    entries: Vec<(usize, usize)>,
    starts: Vec<usize>,
    lookup: Vec<Option<usize>>,
    n: usize,
}

impl FlatIndex {
    fn build(n: usize, relations: &[Relation]) -> Self {
        let mut entries = Vec::new();
        let mut starts = Vec::with_capacity(n + 1);
        let mut lookup = vec![None; n * n];
        for i in 0..n {
            starts.push(entries.len());
            for j in 0..n {
                if i != j && relations[i * n + j].is_related() {
                    lookup[i * n + j] = Some(entries.len());
                    entries.push((i, j));
                }
            }
        }
        starts.push(entries.len());
        FlatIndex {
            entries,
            starts,
            lookup,
            n,
        }
    }

    /// Number of flat variables (`2m`).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(allocator, target)` pair of flat variable `k`.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.entries[k]
    }

    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        self.lookup[i * self.n + j]
    }

    /// Flat variables owned by country `i` (the set `z_i`).
    pub fn owned_by(&self, i: usize) -> std::ops::Range<usize> {
        self.starts[i]..self.starts[i + 1]
    }

    pub fn owner(&self, k: usize) -> usize {
        self.entries[k].0
    }

    /// Human-readable name of variable `k`, 1-based: `u[1,2]`.
    pub fn name(&self, k: usize) -> String {
        let (i, j) = self.entries[k];
        format!("u[{},{}]", i + 1, j + 1)
    }
}

/// Countries, power budgets and symmetric signed relations.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentGraph {
    n: usize,
    power: Vec<Rational>,
    relations: Vec<Relation>,
    importance: Vec<Rational>,
    flat: FlatIndex,
}

/// Incremental constructor for [`EnvironmentGraph`].
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    n: usize,
    power: Vec<Rational>,
    relations: Vec<Relation>,
    importance: Vec<Rational>,
}

impl GraphBuilder {
    pub fn new(power: Vec<Rational>) -> Self {
        let n = power.len();
        GraphBuilder {
            n,
            power,
            relations: vec![Relation::Null; n * n],
            importance: vec![zero(); n * n],
        }
    }

    /// Sets the relation of the unordered pair `{i, j}` (0-based).
    pub fn relate(mut self, i: usize, j: usize, relation: Relation, importance: Rational) -> Result<Self> {
        for index in [i, j] {
            if index >= self.n {
                return Err(PagError::CountryOutOfRange { index, n: self.n });
            }
        }
        if i == j {
            return Err(PagError::InvalidGraph(format!(
                "country {} cannot be related to itself",
                i + 1
            )));
        }
        if relation == Relation::Null && !importance.is_zero() {
            return Err(PagError::InvalidGraph(format!(
                "null pair ({}, {}) must have importance 0",
                i + 1,
                j + 1
            )));
        }
        if importance.is_negative() || importance > crate::rational::one() {
            return Err(PagError::InvalidGraph(format!(
                "importance of pair ({}, {}) outside [0, 1]",
                i + 1,
                j + 1
            )));
        }
        let n = self.n;
        self.relations[i * n + j] = relation;
        self.relations[j * n + i] = relation;
        self.importance[i * n + j] = importance.clone();
        self.importance[j * n + i] = importance;
        Ok(self)
    }

    pub fn friends(self, i: usize, j: usize) -> Result<Self> {
        self.relate(i, j, Relation::Friend, zero())
    }

    pub fn adversaries(self, i: usize, j: usize) -> Result<Self> {
        self.relate(i, j, Relation::Adversary, zero())
    }

    pub fn build(self) -> Result<EnvironmentGraph> {
        if self.n == 0 {
            return Err(PagError::InvalidGraph("a game needs at least one country".into()));
        }
        if let Some(i) = self.power.iter().position(|p| p.is_negative()) {
            return Err(PagError::InvalidGraph(format!("country {} has negative power", i + 1)));
        }
        let flat = FlatIndex::build(self.n, &self.relations);
        Ok(EnvironmentGraph {
            n: self.n,
            power: self.power,
            relations: self.relations,
            importance: self.importance,
            flat,
        })
    }
}

impl EnvironmentGraph {
    pub fn builder(power: Vec<Rational>) -> GraphBuilder {
        GraphBuilder::new(power)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn power(&self, i: usize) -> &Rational {
        &self.power[i]
    }

    pub fn powers(&self) -> &[Rational] {
        &self.power
    }

    /// Relation of `j` as seen from `i`. A country is its own friend.
    pub fn relation(&self, i: usize, j: usize) -> Relation {
        if i == j {
            Relation::Friend
        } else {
            self.relations[i * self.n + j]
        }
    }

    pub fn importance(&self, i: usize, j: usize) -> &Rational {
        &self.importance[i * self.n + j]
    }

    /// Distinct countries related to `i` (friends and adversaries), ascending.
    pub fn related(&self, i: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| j != i && self.relation(i, j).is_related())
            .collect()
    }

    pub fn friends_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| j != i && self.relation(i, j) == Relation::Friend)
    }

    pub fn adversaries_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.relation(i, j) == Relation::Adversary)
    }

    /// Number of friend or adversary edges (`m`).
    pub fn edge_count(&self) -> usize {
        self.flat.len() / 2
    }

    pub fn flat_index(&self) -> &FlatIndex {
        &self.flat
    }

    pub fn check_country(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(PagError::CountryOutOfRange { index: i, n: self.n })
        }
    }
}

/// Nonnegative `n x n` allocation with row sums equal to the power budgets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl StrategyMatrix {
    /// Validates rows against the graph: nonnegative, zero off-support, row
    /// sums equal to `p_i`.
    pub fn new(g: &EnvironmentGraph, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if rows.len() != g.n() || rows.iter().any(|r| r.len() != g.n()) {
            return Err(PagError::InvalidStrategy(format!("expected a {0}x{0} matrix", g.n())));
        }
        for (i, row) in rows.iter().enumerate() {
            validate_row(g, i, row)?;
        }
        Ok(StrategyMatrix {
            n: g.n(),
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Every country keeps its whole budget.
    pub fn all_self(g: &EnvironmentGraph) -> Self {
        let n = g.n();
        let mut entries = vec![zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = g.power(i).clone();
        }
        StrategyMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n)
    }

    /// Copy of this matrix with row `i` replaced; the row is validated.
    pub fn with_row(&self, g: &EnvironmentGraph, i: usize, row: &[Rational]) -> Result<Self> {
        g.check_country(i)?;
        validate_row(g, i, row)?;
        let mut next = self.clone();
        next.entries[i * self.n..(i + 1) * self.n].clone_from_slice(row);
        Ok(next)
    }

    /// Elementwise `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &StrategyMatrix, alpha: &Rational) -> StrategyMatrix {
        let beta = crate::rational::one() - alpha;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| alpha * a + &beta * b)
            .collect();
        StrategyMatrix { n: self.n, entries }
    }
}

fn validate_row(g: &EnvironmentGraph, i: usize, row: &[Rational]) -> Result<()> {
    if row.len() != g.n() {
        return Err(PagError::InvalidStrategy(format!("row {} has wrong length", i + 1)));
    }
    let mut total = zero();
    for (j, value) in row.iter().enumerate() {
        if value.is_negative() {
            return Err(PagError::InvalidStrategy(format!("u[{},{}] is negative", i + 1, j + 1)));
        }
        if i != j && !g.relation(i, j).is_related() && !value.is_zero() {
            return Err(PagError::InvalidStrategy(format!(
                "u[{},{}] must be zero: countries {} and {} are unrelated",
                i + 1,
                j + 1,
                i + 1,
                j + 1
            )));
        }
        total += value;
    }
    if &total != g.power(i) {
        return Err(PagError::InvalidStrategy(format!(
            "row {} sums to {} instead of {}",
            i + 1,
            format_rational(&total),
            format_rational(g.power(i))
        )));
    }
    Ok(())
}

/// State of a single country.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    Safe,
    Precarious,
    Unsafe,
}

impl State {
    pub const ALL: [State; 3] = [State::Safe, State::Precarious, State::Unsafe];

    pub fn survives(self) -> bool {
        self != State::Unsafe
    }

    pub fn letter(self) -> char {
        match self {
            State::Safe => 'S',
            State::Precarious => 'P',
            State::Unsafe => 'U',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'S' | 's' => Some(State::Safe),
            'P' | 'p' => Some(State::Precarious),
            'U' | 'u' => Some(State::Unsafe),
            _ => None,
        }
    }

    fn from_ordering(margin: std::cmp::Ordering) -> Self {
        match margin {
            std::cmp::Ordering::Greater => State::Safe,
            std::cmp::Ordering::Equal => State::Precarious,
            std::cmp::Ordering::Less => State::Unsafe,
        }
    }
}

/// Per-country states, written compactly as e.g. `SPU`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector(pub Vec<State>);

impl StateVector {
    pub fn get(&self, i: usize) -> State {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(text: &str) -> Option<Self> {
        text.chars()
            .map(State::from_letter)
            .collect::<Option<Vec<_>>>()
            .map(StateVector)
    }

    /// All `3^n` state vectors in lexicographic order (`S < P < U`).
    pub fn all(n: usize) -> Vec<StateVector> {
        let mut out = vec![StateVector(Vec::with_capacity(n))];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| {
                    State::ALL.iter().map(move |s| {
                        let mut next = v.0.clone();
                        next.push(*s);
                        StateVector(next)
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.letter())?;
        }
        Ok(())
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        StateVector::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("bad state vector {text}")))
    }
}

/// Total support: friends' allocations to `i` (its own `u_ii` included) plus
/// `i`'s allocations against its adversaries.
pub fn total_support(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize) -> Rational {
    let mut sum = zero();
    for j in 0..g.n() {
        match g.relation(i, j) {
            Relation::Friend => sum += u.get(j, i),
            Relation::Adversary => sum += u.get(i, j),
            Relation::Null => {}
        }
    }
    sum
}

/// Total threat: adversaries' allocations against `i`.
pub fn total_threat(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize) -> Rational {
    g.adversaries_of(i).map(|j| u.get(j, i)).fold(zero(), |acc, x| acc + x)
}

pub fn state_of(g: &EnvironmentGraph, u: &StrategyMatrix, i: usize) -> State {
    State::from_ordering(total_support(g, u, i).cmp(&total_threat(g, u, i)))
}

pub fn state_vector(g: &EnvironmentGraph, u: &StrategyMatrix) -> StateVector {
    StateVector((0..g.n()).map(|i| state_of(g, u, i)).collect())
}

/// Affine function `coeffs . x + constant` over the flat allocation variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl LinearForm {
    pub fn zero(dim: usize) -> Self {
        LinearForm {
            coeffs: vec![zero(); dim],
            constant: zero(),
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .fold(self.constant.clone(), |acc, (c, v)| acc + c * v)
    }
}

/// `sigma_i - tau_i` as an affine form over the flat variables. The
/// self-allocation is eliminated as `p_i` minus the row's flat entries, so
/// `i`'s allocations against adversaries cancel out.
pub fn margin_form(g: &EnvironmentGraph, i: usize) -> LinearForm {
    let flat = g.flat_index();
    let mut form = LinearForm::zero(flat.len());
    form.constant = g.power(i).clone();
    let one = crate::rational::one();
    for j in g.friends_of(i) {
        let out = flat.index(i, j).expect("friend edge is flat");
        let inc = flat.index(j, i).expect("friend edge is flat");
        form.coeffs[out] -= &one;
        form.coeffs[inc] += &one;
    }
    for j in g.adversaries_of(i) {
        let inc = flat.index(j, i).expect("adversary edge is flat");
        form.coeffs[inc] -= &one;
    }
    form
}

/// The `2m` independent allocations of a strategy matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlatAllocation(pub Vec<Rational>);

pub fn flatten(g: &EnvironmentGraph, u: &StrategyMatrix) -> FlatAllocation {
    let flat = g.flat_index();
    FlatAllocation(
        (0..flat.len())
            .map(|k| {
                let (i, j) = flat.pair(k);
                u.get(i, j).clone()
            })
            .collect(),
    )
}

/// Rebuilds the strategy matrix, recovering `u_ii` as budget slack.
pub fn unflatten(g: &EnvironmentGraph, x: &FlatAllocation) -> Result<StrategyMatrix> {
    let flat = g.flat_index();
    if x.0.len() != flat.len() {
        return Err(PagError::InvalidFlat(format!(
            "expected {} entries, got {}",
            flat.len(),
            x.0.len()
        )));
    }
    let n = g.n();
    let mut entries = vec![zero(); n * n];
    for i in 0..n {
        let mut used = zero();
        for k in flat.owned_by(i) {
            let value = &x.0[k];
            if value.is_negative() {
                return Err(PagError::InvalidFlat(format!("{} is negative", flat.name(k))));
            }
            used += value;
            entries[i * n + flat.pair(k).1] = value.clone();
        }
        let slack = g.power(i) - used;
        if slack.is_negative() {
            return Err(PagError::InvalidFlat(format!(
                "country {} allocates more than its power",
                i + 1
            )));
        }
        entries[i * n + i] = slack;
    }
    Ok(StrategyMatrix { n, entries })
}
