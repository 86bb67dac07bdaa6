//! Exact enumeration of equilibrium classes as unions of convex polytopes
//! over the flat allocation variables.

mod volume;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PagError, Result};
use crate::model::{margin_form, EnvironmentGraph, LinearForm, Relation, State, StateVector};
use crate::polytope::{eliminate, ConstraintFormula, LinearConstraint, Polytope, Projection};
use crate::preferences::{reduce_state, Preference, ReducedStateVector};
use crate::rational::{int, one, zero, Rational};

pub use volume::{estimate_volume, strategy_space_volume, VolumeEstimate};

/// Largest game enumerated unless the caller raises the cap.
pub const DEFAULT_CAP: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    pub cap: usize,
    /// Monte Carlo samples per class; zero skips volume estimation.
    pub volume_samples: usize,
    pub seed: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            cap: DEFAULT_CAP,
            volume_samples: 0,
            seed: 0,
        }
    }
}

/// All equilibria sharing one state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumClass {
    pub label: StateVector,
    pub polytopes: Vec<Polytope>,
    pub volume: Option<VolumeEstimate>,
}

impl EquilibriumClass {
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.polytopes.iter().any(|p| p.contains(x))
    }
}

/// Sign condition on an affine form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Zero,
    Negative,
    NonNegative,
    NonPositive,
}

/// `form ⋈ 0` as a constraint.
pub fn sign_constraint(form: &LinearForm, sign: Sign) -> LinearConstraint {
    let coeffs = form.coeffs.clone();
    let rhs = -form.constant.clone();
    match sign {
        Sign::Positive => LinearConstraint::gt(coeffs, rhs),
        Sign::Zero => LinearConstraint::eq(coeffs, rhs),
        Sign::Negative => LinearConstraint::lt(coeffs, rhs),
        Sign::NonNegative => LinearConstraint::ge(coeffs, rhs),
        Sign::NonPositive => LinearConstraint::le(coeffs, rhs),
    }
}

/// The strategy space `{A u <= p, -u <= 0}`: one budget row per country
/// (all-zero for countries without relations) and one sign row per variable.
pub fn strategy_space(g: &EnvironmentGraph) -> Polytope {
    let flat = g.flat_index();
    let dim = flat.len();
    let mut constraints = Vec::with_capacity(g.n() + dim);
    for i in 0..g.n() {
        let mut coeffs = vec![zero(); dim];
        for k in flat.owned_by(i) {
            coeffs[k] = one();
        }
        constraints.push(LinearConstraint::le(coeffs, g.power(i).clone()));
    }
    for k in 0..dim {
        let mut coeffs = vec![zero(); dim];
        coeffs[k] = int(-1);
        constraints.push(LinearConstraint::le(coeffs, zero()));
    }
    Polytope::new(dim, constraints)
}

/// Nonnegativity of country `i`'s flat variables and its budget, with the
/// self-allocation eliminated as slack.
pub fn power_constraints(g: &EnvironmentGraph, i: usize) -> ConstraintFormula {
    let flat = g.flat_index();
    let dim = flat.len();
    let owned = flat.owned_by(i);
    if owned.is_empty() {
        return ConstraintFormula::And(Vec::new());
    }
    let mut parts: Vec<LinearConstraint> = owned
        .clone()
        .map(|k| LinearConstraint::bound(dim, k, true, zero()))
        .collect();
    let mut budget = vec![zero(); dim];
    for k in owned {
        budget[k] = one();
    }
    parts.push(LinearConstraint::le(budget, g.power(i).clone()));
    ConstraintFormula::all(parts)
}

/// `sigma_i ⋈ tau_i` for the state `state`.
pub fn state_constraint(g: &EnvironmentGraph, state: State, i: usize) -> LinearConstraint {
    let sign = match state {
        State::Safe => Sign::Positive,
        State::Precarious => Sign::Zero,
        State::Unsafe => Sign::Negative,
    };
    sign_constraint(&margin_form(g, i), sign)
}

pub fn state_constraints(g: &EnvironmentGraph, x: &StateVector, i: usize) -> ConstraintFormula {
    ConstraintFormula::atom(state_constraint(g, x.get(i), i))
}

/// Reduced-coding condition on `j` seen from `observer` (who treats itself as
/// a friend) expressed on an affine margin form.
pub fn bit_sign(relation: Relation, bit: bool) -> Sign {
    match (relation, bit) {
        (Relation::Adversary, true) => Sign::NonPositive,
        (Relation::Adversary, false) => Sign::Positive,
        (_, true) => Sign::NonNegative,
        (_, false) => Sign::Negative,
    }
}

/// Constraints of a best-response set split by variable support: `strat`
/// only mention the country's own allocations, `cond` mention others'.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponseConstraints {
    pub formula: ConstraintFormula,
    pub strat: Vec<LinearConstraint>,
    pub cond: Vec<LinearConstraint>,
}

/// Intersection of the state and power constraints of `i` and its relations
/// under the state vector `x`.
pub fn best_response_constraints(g: &EnvironmentGraph, x: &StateVector, i: usize) -> BestResponseConstraints {
    let flat = g.flat_index();
    let own = flat.owned_by(i);
    let mut members = vec![i];
    members.extend(g.related(i));
    let mut formula = ConstraintFormula::And(Vec::new());
    for &j in &members {
        formula = formula.and(state_constraints(g, x, j)).and(power_constraints(g, j));
    }
    let mut strat = Vec::new();
    let mut cond = Vec::new();
    for atom in formula.atoms() {
        let mut support = atom.support().peekable();
        if support.peek().is_some() && support.all(|k| own.contains(&k)) {
            strat.push(atom.clone());
        } else {
            cond.push(atom.clone());
        }
    }
    BestResponseConstraints { formula, strat, cond }
}

/// Exact feasibility of a polytope, strict inequalities honoured.
pub fn feasible(p: &Polytope) -> bool {
    p.is_feasible()
}

/// Coordinates country `i` cares about: itself and its relations.
fn care_set(g: &EnvironmentGraph, i: usize) -> Vec<usize> {
    (0..g.n())
        .filter(|&j| j == i || g.relation(i, j).is_related())
        .collect()
}

/// Points (over the others' allocations) from which country `i` can reach the
/// reduced values `target` on its care set by changing its own row. `None`
/// when no such point exists.
pub fn reachable_set(g: &EnvironmentGraph, i: usize, target: &ReducedStateVector) -> Option<Polytope> {
    let flat = g.flat_index();
    let dim = flat.len();
    let own: Vec<usize> = flat.owned_by(i).collect();
    let wide = dim + own.len();
    let widen = |form: &LinearForm| -> LinearForm {
        let mut coeffs = vec![zero(); wide];
        for (k, c) in form.coeffs.iter().enumerate() {
            match own.iter().position(|&o| o == k) {
                Some(slot) => coeffs[dim + slot] = c.clone(),
                None => coeffs[k] = c.clone(),
            }
        }
        LinearForm {
            coeffs,
            constant: form.constant.clone(),
        }
    };
    let mut system = Vec::new();
    let mut budget = vec![zero(); wide];
    for slot in 0..own.len() {
        system.push(LinearConstraint::bound(wide, dim + slot, true, zero()));
        budget[dim + slot] = one();
    }
    system.push(LinearConstraint::le(budget, g.power(i).clone()));
    for j in care_set(g, i) {
        let form = widen(&margin_form(g, j));
        system.push(sign_constraint(&form, bit_sign(g.relation(i, j), target.get(j))));
    }
    let vars: Vec<usize> = (dim..wide).collect();
    match eliminate(&system, &vars) {
        Projection::Empty => None,
        Projection::Constraints(cs) => {
            let narrowed = cs
                .into_iter()
                .map(|mut c| {
                    c.coeffs.truncate(dim);
                    c
                })
                .collect();
            let p = Polytope::new(dim, narrowed);
            p.is_feasible().then_some(p)
        }
    }
}

/// Reachable sets for every care-set pattern of every country, indexed by
/// pattern bits in care-set order.
struct ReachTable {
    care: Vec<Vec<usize>>,
    sets: Vec<Vec<Option<Polytope>>>,
}

impl ReachTable {
    fn build(g: &EnvironmentGraph) -> Self {
        let n = g.n();
        let care: Vec<Vec<usize>> = (0..n).map(|i| care_set(g, i)).collect();
        let jobs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..1usize << care[i].len()).map(move |pattern| (i, pattern)))
            .collect();
        let computed: Vec<Option<Polytope>> = jobs
            .par_iter()
            .map(|&(i, pattern)| reachable_set(g, i, &expand(n, &care[i], pattern, None)))
            .collect();
        let mut sets: Vec<Vec<Option<Polytope>>> = care.iter().map(|c| Vec::with_capacity(1 << c.len())).collect();
        for ((i, _), set) in jobs.into_iter().zip(computed) {
            sets[i].push(set);
        }
        ReachTable { care, sets }
    }
}

/// Reduced vector with `pattern` on `care` and the remaining coordinates
/// copied from `rest` (zero when absent).
fn expand(n: usize, care: &[usize], pattern: usize, rest: Option<&ReducedStateVector>) -> ReducedStateVector {
    let mut bits = match rest {
        Some(r) => r.0.clone(),
        None => vec![false; n],
    };
    for (slot, &j) in care.iter().enumerate() {
        bits[j] = pattern >> slot & 1 == 1;
    }
    ReducedStateVector(bits)
}

/// Part of `cell` (all of whose points share the state vector `x`) where no
/// country can unilaterally reach a strictly preferred reduced outcome.
pub fn non_deviation_filter<P: Preference + ?Sized>(
    g: &EnvironmentGraph,
    pref: &P,
    x: &StateVector,
    cell: &Polytope,
) -> Vec<Polytope> {
    filter_with(g, pref, x, cell, &ReachTable::build(g))
}

fn filter_with<P: Preference + ?Sized>(
    g: &EnvironmentGraph,
    pref: &P,
    x: &StateVector,
    cell: &Polytope,
    table: &ReachTable,
) -> Vec<Polytope> {
    let mut pieces = vec![cell.clone()];
    for i in 0..g.n() {
        let current = reduce_state(g, x, i);
        let current_score = pref.score(i, &current);
        let care = &table.care[i];
        for pattern in 0..1usize << care.len() {
            let Some(reach) = &table.sets[i][pattern] else { continue };
            let target = expand(g.n(), care, pattern, Some(&current));
            if pref.score(i, &target) <= current_score {
                continue;
            }
            pieces = pieces.iter().flat_map(|p| p.subtract(reach)).collect();
            if pieces.is_empty() {
                return pieces;
            }
        }
    }
    pieces.iter().map(Polytope::simplified).collect()
}

/// Every nonempty equilibrium class, in the order of [`StateVector::all`].
pub fn enumerate_classes<P: Preference + ?Sized>(
    g: &EnvironmentGraph,
    pref: &P,
    options: &EnumerationOptions,
) -> Result<Vec<EquilibriumClass>> {
    if g.n() > options.cap {
        return Err(PagError::InstanceTooLarge {
            n: g.n(),
            cap: options.cap,
        });
    }
    let table = ReachTable::build(g);
    let space = strategy_space(g);
    let base = Polytope::universe(space.dim());
    let candidates = StateVector::all(g.n());
    let classes: Vec<Option<EquilibriumClass>> = candidates
        .par_iter()
        .enumerate()
        .map(|(index, x)| {
            let mut formula = ConstraintFormula::all(space.constraints().iter().cloned());
            for i in 0..g.n() {
                formula = formula.and(best_response_constraints(g, x, i).formula);
            }
            let polytopes: Vec<Polytope> = formula
                .cells(&base)
                .iter()
                .flat_map(|cell| filter_with(g, pref, x, cell, &table))
                .collect();
            if polytopes.is_empty() {
                return None;
            }
            let volume = (options.volume_samples > 0).then(|| {
                let seed = options.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                estimate_volume(g, &polytopes, options.volume_samples, seed)
            });
            Some(EquilibriumClass {
                label: x.clone(),
                polytopes,
                volume,
            })
        })
        .collect();
    Ok(classes.into_iter().flatten().collect())
}
