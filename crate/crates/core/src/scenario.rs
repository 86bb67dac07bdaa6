//! Line-oriented scenario files and random scenario generation.
//!
//! ```text
//! # comment
//! countries: 3
//! names: North Center South
//! power: 5 9 5
//! unsafe_utility: 0
//! sim.q: 1000
//! sim.rounds: 50
//! sim.mode: async
//! sim.seed: 7
//! order 1: [1,1,1] ~ [1,1,0] > [1,0,1] ~ [1,0,0] > [0,1,0] ~ [0,1,1] ~ [0,0,1] ~ [0,0,0]
//! relations:
//! 1 1 1 1
//! 1 2 -1 0.3016625
//! ```
//!
//! Countries are 1-based. Relation rows are `first second type importance`
//! with type `1` (friend), `-1` (adversary) or `0` (null); a self row sets
//! the survival utility `t_ii(1)` (default 1). Missing pairs are null.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PagError, Result};
use crate::model::{EnvironmentGraph, Relation};
use crate::preferences::{
    validate_axioms, AxiomViolation, CountryOrder, Preference, ReducedStateVector, StateOrders, UtilityTable,
};
use crate::rational::{format_rational, one, parse_rational, zero, Rational};
use crate::sim::UpdateMode;

/// Denominator of randomly drawn importances.
pub const IMPORTANCE_LATTICE: u64 = 10_000_000;

/// Simulation settings a scenario may carry; command-line flags override them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimDefaults {
    pub q: Option<usize>,
    pub rounds: Option<usize>,
    pub mode: Option<UpdateMode>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub names: Vec<String>,
    pub graph: EnvironmentGraph,
    /// `t_ii(1)` per country.
    pub survive: Vec<Rational>,
    /// `t_ii(0)` per country.
    pub demise: Vec<Rational>,
    pub orders: Option<StateOrders>,
    pub sim: SimDefaults,
    /// Non-fatal normalizations applied while parsing.
    pub warnings: Vec<String>,
}

/// The preference a scenario induces: explicit orders when given, otherwise
/// the pairwise utilities.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioPreference {
    Orders(StateOrders),
    Utilities(UtilityTable),
}

impl Preference for ScenarioPreference {
    fn score(&self, country: usize, reduced: &ReducedStateVector) -> Rational {
        match self {
            ScenarioPreference::Orders(o) => o.score(country, reduced),
            ScenarioPreference::Utilities(u) => u.score(country, reduced),
        }
    }
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Display name of country `i` (0-based).
    pub fn name(&self, i: usize) -> String {
        self.names.get(i).cloned().unwrap_or_else(|| (i + 1).to_string())
    }

    pub fn utilities(&self) -> Result<UtilityTable> {
        UtilityTable::from_graph(&self.graph, &self.survive, &self.demise)
    }

    pub fn preference(&self) -> Result<ScenarioPreference> {
        Ok(match &self.orders {
            Some(o) => ScenarioPreference::Orders(o.clone()),
            None => ScenarioPreference::Utilities(self.utilities()?),
        })
    }

    /// Orders the scenario ranks outcomes by: the explicit ones, or those
    /// induced by the utilities.
    pub fn effective_orders(&self) -> Result<StateOrders> {
        Ok(match &self.orders {
            Some(o) => o.clone(),
            None => StateOrders::induced(&self.graph, &self.utilities()?),
        })
    }

    /// Axiom violations per country (0-based), empty when all orders pass.
    pub fn axiom_violations(&self) -> Result<Vec<(usize, Vec<AxiomViolation>)>> {
        let orders = self.effective_orders()?;
        Ok((0..self.n())
            .filter_map(|i| validate_axioms(&self.graph, orders.country(i), i).err().map(|v| (i, v)))
            .collect())
    }

    /// Canonical text: headers, orders, self rows, then every pair `i < j`.
    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let _ = writeln!(out, "countries: {n}");
        if !self.names.is_empty() {
            let _ = writeln!(out, "names: {}", self.names.join(" "));
        }
        let _ = writeln!(out, "power: {}", join(self.graph.powers()));
        if self.demise.iter().any(|d| d != &zero()) {
            if self.demise.iter().all(|d| d == &self.demise[0]) {
                let _ = writeln!(out, "unsafe_utility: {}", format_rational(&self.demise[0]));
            } else {
                let _ = writeln!(out, "unsafe_utility: {}", join(&self.demise));
            }
        }
        if let Some(q) = self.sim.q {
            let _ = writeln!(out, "sim.q: {q}");
        }
        if let Some(rounds) = self.sim.rounds {
            let _ = writeln!(out, "sim.rounds: {rounds}");
        }
        if let Some(mode) = self.sim.mode {
            let _ = writeln!(out, "sim.mode: {mode}");
        }
        if let Some(seed) = self.sim.seed {
            let _ = writeln!(out, "sim.seed: {seed}");
        }
        if let Some(orders) = &self.orders {
            for (i, order) in orders.0.iter().enumerate() {
                let _ = writeln!(out, "order {}: {order}", i + 1);
            }
        }
        out.push_str("relations:\n");
        for i in 0..n {
            let _ = writeln!(out, "{0} {0} 1 {1}", i + 1, format_rational(&self.survive[i]));
        }
        for i in 0..n {
            for j in i + 1..n {
                let relation = self.graph.relation(i, j);
                let _ = writeln!(
                    out,
                    "{} {} {} {}",
                    i + 1,
                    j + 1,
                    relation.code(),
                    format_rational(self.graph.importance(i, j))
                );
            }
        }
        out
    }
}

fn join(values: &[Rational]) -> String {
    values.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

fn parse_error(line: usize, message: impl Into<String>) -> PagError {
    PagError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_values(line: usize, text: &str) -> Result<Vec<Rational>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t).ok_or_else(|| parse_error(line, format!("'{t}' is not a number"))))
        .collect()
}

fn parse_count<T: std::str::FromStr>(line: usize, key: &str, text: &str) -> Result<T> {
    text.trim().parse().map_err(|_| {
        parse_error(
            line,
            format!("{key} expects a nonnegative integer, got '{}'", text.trim()),
        )
    })
}

struct Row {
    line: usize,
    i: usize,
    j: usize,
    relation: Relation,
    importance: Rational,
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut count: Option<usize> = None;
    let mut names = Vec::new();
    let mut power: Option<(usize, Vec<Rational>)> = None;
    let mut demise: Option<(usize, Vec<Rational>)> = None;
    let mut sim = SimDefaults::default();
    let mut order_lines: Vec<(usize, usize, String)> = Vec::new();
    let mut rows = Vec::new();
    let mut in_table = false;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("order") {
            let (who, body) = rest
                .split_once(':')
                .ok_or_else(|| parse_error(line, "order lines read 'order <country>: <tiers>'"))?;
            let country: usize = parse_count(line, "order", who)?;
            order_lines.push((line, country, body.trim().to_string()));
            continue;
        }
        if let Some((key, value)) = content.split_once(':') {
            let value = value.trim();
            match key.trim() {
                "countries" => {
                    let value: i64 = value
                        .parse()
                        .map_err(|_| parse_error(line, format!("countries expects an integer, got '{value}'")))?;
                    if value <= 0 {
                        return Err(parse_error(line, "the country count must be positive"));
                    }
                    count = Some(value as usize);
                }
                "names" => names = value.split_whitespace().map(str::to_string).collect(),
                "power" => power = Some((line, parse_values(line, value)?)),
                "unsafe_utility" => demise = Some((line, parse_values(line, value)?)),
                "sim.q" => sim.q = Some(parse_count(line, "sim.q", value)?),
                "sim.rounds" => sim.rounds = Some(parse_count(line, "sim.rounds", value)?),
                "sim.seed" => sim.seed = Some(parse_count(line, "sim.seed", value)?),
                "sim.mode" => sim.mode = Some(value.parse().map_err(|e: PagError| parse_error(line, e.to_string()))?),
                "relations" => in_table = true,
                other => return Err(parse_error(line, format!("unknown key '{other}'"))),
            }
            continue;
        }
        if !in_table {
            return Err(parse_error(line, "relation rows must follow 'relations:'"));
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_error(line, "relation rows read 'first second type importance'"));
        }
        let i: usize = parse_count(line, "first country", fields[0])?;
        let j: usize = parse_count(line, "second country", fields[1])?;
        let code: i64 = fields[2]
            .parse()
            .map_err(|_| parse_error(line, format!("relation type '{}' is not an integer", fields[2])))?;
        let relation = Relation::from_code(code)
            .ok_or_else(|| parse_error(line, format!("unknown relation type {code}; expected 1, -1 or 0")))?;
        let importance =
            parse_rational(fields[3]).ok_or_else(|| parse_error(line, format!("'{}' is not a number", fields[3])))?;
        if importance < zero() || importance > one() {
            return Err(parse_error(line, format!("importance {} outside [0, 1]", fields[3])));
        }
        if i == 0 || j == 0 {
            return Err(parse_error(line, "countries are numbered from 1"));
        }
        rows.push(Row {
            line,
            i: i - 1,
            j: j - 1,
            relation,
            importance,
        });
    }

    let n = count.ok_or_else(|| PagError::InvalidScenario("missing 'countries:'".into()))?;
    let (power_line, power) = power.ok_or_else(|| PagError::InvalidScenario("missing 'power:'".into()))?;
    if power.len() != n {
        return Err(parse_error(
            power_line,
            format!("expected {n} power values, got {}", power.len()),
        ));
    }
    if !names.is_empty() && names.len() != n {
        return Err(PagError::InvalidScenario(format!(
            "expected {n} names, got {}",
            names.len()
        )));
    }
    let demise = match demise {
        None => vec![zero(); n],
        Some((_, v)) if v.len() == 1 => vec![v[0].clone(); n],
        Some((line, v)) if v.len() != n => {
            return Err(parse_error(
                line,
                format!("unsafe_utility takes 1 or {n} values, got {}", v.len()),
            ))
        }
        Some((_, v)) => v,
    };

    let mut warnings = Vec::new();
    let mut survive: Vec<Option<Rational>> = vec![None; n];
    let mut pairs: Vec<Option<(Relation, Rational, usize)>> = vec![None; n * n];
    for row in rows {
        if row.i >= n || row.j >= n {
            return Err(parse_error(row.line, format!("country index out of range 1..={n}")));
        }
        if row.i == row.j {
            if row.relation != Relation::Friend {
                return Err(parse_error(row.line, "self rows must have relation type 1"));
            }
            if let Some(prev) = &survive[row.i] {
                if prev != &row.importance {
                    return Err(parse_error(
                        row.line,
                        format!("conflicting self row for country {}", row.i + 1),
                    ));
                }
            }
            survive[row.i] = Some(row.importance);
            continue;
        }
        let mut importance = row.importance;
        if row.relation == Relation::Null && importance != zero() {
            warnings.push(format!(
                "line {}: null pair ({}, {}) has importance {}; using 0",
                row.line,
                row.i + 1,
                row.j + 1,
                format_rational(&importance)
            ));
            importance = zero();
        }
        let (a, b) = (row.i.min(row.j), row.i.max(row.j));
        if let Some((rel, imp, first)) = &pairs[a * n + b] {
            if *rel != row.relation || *imp != importance {
                return Err(parse_error(
                    row.line,
                    format!("pair ({}, {}) conflicts with line {first}", a + 1, b + 1),
                ));
            }
        }
        pairs[a * n + b] = Some((row.relation, importance, row.line));
    }

    let mut builder = EnvironmentGraph::builder(power);
    for a in 0..n {
        for b in a + 1..n {
            if let Some((rel, imp, _)) = pairs[a * n + b].take() {
                builder = builder.relate(a, b, rel, imp)?;
            }
        }
    }
    let graph = builder.build()?;
    let survive: Vec<Rational> = survive.into_iter().map(|s| s.unwrap_or_else(one)).collect();
    for i in 0..n {
        if survive[i] <= demise[i] {
            return Err(PagError::InvalidScenario(format!(
                "country {}: survival utility must exceed unsafe utility",
                i + 1
            )));
        }
    }

    let orders = if order_lines.is_empty() {
        None
    } else {
        let mut slots: Vec<Option<CountryOrder>> = vec![None; n];
        for (line, country, body) in order_lines {
            if country == 0 || country > n {
                return Err(parse_error(line, format!("order for unknown country {country}")));
            }
            let tiers = body
                .split('>')
                .map(|tier| {
                    tier.split('~')
                        .map(|v| {
                            ReducedStateVector::parse(v)
                                .ok_or_else(|| parse_error(line, format!("bad reduced vector '{}'", v.trim())))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let order =
                CountryOrder::from_tiers(country - 1, n, tiers).map_err(|e| parse_error(line, e.to_string()))?;
            if slots[country - 1].replace(order).is_some() {
                return Err(parse_error(line, format!("second order for country {country}")));
            }
        }
        let orders = slots
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| PagError::InvalidScenario(format!("no order for country {}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Some(StateOrders(orders))
    };

    Ok(Scenario {
        names,
        graph,
        survive,
        demise,
        orders,
        sim,
        warnings,
    })
}

/// A scenario with uniformly random relation types and importances on a
/// `1e-7` lattice; deterministic per seed.
pub fn randomize_scenario(n: usize, power: &[Rational], seed: u64) -> Result<Scenario> {
    if n == 0 {
        return Err(PagError::InvalidScenario("a game needs at least one country".into()));
    }
    if power.len() != n {
        return Err(PagError::InvalidScenario(format!(
            "expected {n} power values, got {}",
            power.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = EnvironmentGraph::builder(power.to_vec());
    for i in 0..n {
        for j in i + 1..n {
            let relation = [Relation::Friend, Relation::Adversary, Relation::Null][rng.random_range(0..3)];
            let importance = if relation.is_related() {
                Rational::new(
                    rng.random_range(0..=IMPORTANCE_LATTICE).into(),
                    IMPORTANCE_LATTICE.into(),
                )
            } else {
                zero()
            };
            builder = builder.relate(i, j, relation, importance)?;
        }
    }
    Ok(Scenario {
        names: Vec::new(),
        graph: builder.build()?,
        survive: vec![one(); n],
        demise: vec![zero(); n],
        orders: None,
        sim: SimDefaults::default(),
        warnings: Vec::new(),
    })
}
