//! Best-response dynamics from sampled initial allocations and the
//! likelihood report over the terminal matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PagError, Result};
use crate::model::{state_vector, EnvironmentGraph, StateVector, StrategyMatrix};
use crate::preferences::Preference;
use crate::rational::{zero, Rational};
use crate::response::best_response;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateMode {
    /// Round-robin in index order, each country seeing the latest matrix.
    #[default]
    #[serde(rename = "async")]
    Asynchronous,
    /// Every row replaced at once from the round-start matrix.
    #[serde(rename = "sync")]
    Synchronous,
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::Asynchronous => "async",
            UpdateMode::Synchronous => "sync",
        })
    }
}

impl FromStr for UpdateMode {
    type Err = PagError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "async" | "asynchronous" => Ok(UpdateMode::Asynchronous),
            "sync" | "synchronous" => Ok(UpdateMode::Synchronous),
            other => Err(PagError::InvalidConfig(format!("unknown update mode '{other}'"))),
        }
    }
}

pub const DEFAULT_ROUNDS: usize = 50;
pub const DEFAULT_LATTICE: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub q: usize,
    pub rounds: usize,
    pub mode: UpdateMode,
    pub seed: u64,
    /// Denominator of the lattice initial rows are sampled on.
    pub lattice: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            q: 1000,
            rounds: DEFAULT_ROUNDS,
            mode: UpdateMode::default(),
            seed: 0,
            lattice: DEFAULT_LATTICE,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(PagError::InvalidConfig("q must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(PagError::InvalidConfig("rounds must be at least 1".into()));
        }
        if self.lattice == 0 {
            return Err(PagError::InvalidConfig("lattice denominator must be positive".into()));
        }
        Ok(())
    }
}

/// Generator for process `h`: the master seed with `h` as stream number.
pub fn process_rng(seed: u64, h: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h as u64);
    rng
}

/// A row of country `i` uniform over the lattice points of its scaled
/// simplex: a uniform composition of `lattice` into one part per supported
/// entry (self included), via stars and bars.
pub fn sample_row(g: &EnvironmentGraph, i: usize, lattice: u64, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let n = g.n();
    let mut support = vec![i];
    support.extend(g.related(i));
    support.sort_unstable();
    let parts = support.len();
    let slots = lattice as usize + parts - 1;
    let mut bars: Vec<usize> = sample(rng, slots, parts - 1).into_iter().collect();
    bars.sort_unstable();
    let denominator = BigInt::from(lattice);
    let mut row = vec![zero(); n];
    let mut prev = 0usize;
    for (k, &j) in support.iter().enumerate() {
        let end = if k + 1 < parts { bars[k] } else { slots };
        let count = end - prev;
        prev = end + 1;
        row[j] = g.power(i) * Rational::new(BigInt::from(count), denominator.clone());
    }
    row
}

fn sample_matrix(g: &EnvironmentGraph, lattice: u64, rng: &mut ChaCha8Rng) -> StrategyMatrix {
    let rows = (0..g.n()).map(|i| sample_row(g, i, lattice, rng)).collect();
    StrategyMatrix::new(g, rows).expect("sampled rows are valid")
}

/// `q` initial matrices; matrix `h` depends only on the seed and `h`.
pub fn sample_initial(g: &EnvironmentGraph, q: usize, seed: u64, lattice: u64) -> Vec<StrategyMatrix> {
    (0..q)
        .map(|h| sample_matrix(g, lattice, &mut process_rng(seed, h)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessResult {
    pub id: usize,
    #[serde(skip)]
    pub terminal: Option<StrategyMatrix>,
    pub converged: bool,
    pub rounds: usize,
    pub state: StateVector,
}

/// Myopic update process from `start`. Stops after the first round in which
/// nobody strictly improves, or after `config.rounds` rounds.
pub fn run_process<P: Preference + ?Sized>(
    g: &EnvironmentGraph,
    pref: &P,
    id: usize,
    start: StrategyMatrix,
    config: &SimConfig,
) -> ProcessResult {
    let mut u = start;
    let mut converged = false;
    let mut rounds = 0;
    for round in 1..=config.rounds {
        rounds = round;
        let moved = match config.mode {
            UpdateMode::Asynchronous => {
                let mut moved = false;
                for i in 0..g.n() {
                    let br = best_response(g, pref, &u, i);
                    if br.improves() {
                        u = br.deviation.apply(g, &u).expect("best response row is valid");
                        moved = true;
                    }
                }
                moved
            }
            UpdateMode::Synchronous => {
                let moves: Vec<_> = (0..g.n())
                    .map(|i| best_response(g, pref, &u, i))
                    .filter(|br| br.improves())
                    .collect();
                for br in &moves {
                    u = br.deviation.apply(g, &u).expect("best response row is valid");
                }
                !moves.is_empty()
            }
        };
        if !moved {
            converged = true;
            break;
        }
    }
    let state = state_vector(g, &u);
    ProcessResult {
        id,
        terminal: Some(u),
        converged,
        rounds,
        state,
    }
}

/// All `q` processes, in parallel on the current rayon pool. The output is
/// identical for any number of worker threads.
pub fn run_all<P: Preference + ?Sized>(
    g: &EnvironmentGraph,
    pref: &P,
    config: &SimConfig,
) -> Result<Vec<ProcessResult>> {
    config.validate()?;
    Ok((0..config.q)
        .into_par_iter()
        .map(|h| {
            let start = sample_matrix(g, config.lattice, &mut process_rng(config.seed, h));
            run_process(g, pref, h, start, config)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub label: StateVector,
    pub count: usize,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodReport {
    pub total: usize,
    pub classes: Vec<ClassShare>,
    /// Share of terminal matrices in which each country is safe or precarious.
    pub survival: Vec<f64>,
    /// Share in which each country is safe.
    pub safe_only: Vec<f64>,
}

/// Groups results by terminal state vector; classes sorted by label.
pub fn partition_report(results: &[ProcessResult]) -> Result<LikelihoodReport> {
    let first = results
        .first()
        .ok_or_else(|| PagError::Empty("no process results to partition".into()))?;
    let n = first.state.len();
    let total = results.len();
    let mut counts: BTreeMap<StateVector, usize> = BTreeMap::new();
    let mut survive = vec![0usize; n];
    let mut safe = vec![0usize; n];
    for r in results {
        *counts.entry(r.state.clone()).or_default() += 1;
        for (i, s) in r.state.0.iter().enumerate() {
            survive[i] += usize::from(s.survives());
            safe[i] += usize::from(*s == crate::model::State::Safe);
        }
    }
    let ratio = |k: usize| k as f64 / total as f64;
    Ok(LikelihoodReport {
        total,
        classes: counts
            .into_iter()
            .map(|(label, count)| ClassShare {
                label,
                count,
                share: ratio(count),
            })
            .collect(),
        survival: survive.into_iter().map(ratio).collect(),
        safe_only: safe.into_iter().map(ratio).collect(),
    })
}

/// Reports over all results and over the converged ones only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub processes: usize,
    pub converged: usize,
    pub mean_rounds: f64,
    pub all: LikelihoodReport,
    pub converged_only: Option<LikelihoodReport>,
}

pub fn summarize(results: &[ProcessResult]) -> Result<SimulationSummary> {
    let all = partition_report(results)?;
    let done: Vec<ProcessResult> = results.iter().filter(|r| r.converged).cloned().collect();
    let converged_only = if done.is_empty() {
        None
    } else {
        Some(partition_report(&done)?)
    };
    let rounds: usize = results.iter().map(|r| r.rounds).sum();
    Ok(SimulationSummary {
        processes: results.len(),
        converged: done.len(),
        mean_rounds: rounds as f64 / results.len() as f64,
        all,
        converged_only,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{unflatten, FlatAllocation};
    use crate::preferences::UtilityTable;
    use crate::rational::{frac, int, to_f64};
    use crate::response::is_equilibrium;

    fn line_game() -> EnvironmentGraph {
        EnvironmentGraph::builder(vec![int(5), int(9), int(5)])
            .adversaries(0, 1)
            .unwrap()
            .adversaries(1, 2)
            .unwrap()
            .build()
            .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig {
            q: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            rounds: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig::default().validate().is_ok());
        assert_eq!("sync".parse::<UpdateMode>().unwrap(), UpdateMode::Synchronous);
        assert!("sometimes".parse::<UpdateMode>().is_err());
    }

    #[test]
    fn lone_country_sample_is_all_self() {
        let g = EnvironmentGraph::builder(vec![int(4)]).build().unwrap();
        let m = sample_initial(&g, 1, 7, DEFAULT_LATTICE);
        assert_eq!(m[0], StrategyMatrix::all_self(&g));
    }

    #[test]
    fn sampled_rows_are_exact() {
        let g = line_game();
        for u in sample_initial(&g, 50, 3, DEFAULT_LATTICE) {
            // construction validated the rows; check exact totals again
            for (i, row) in u.rows().enumerate() {
                let total = row.iter().fold(zero(), |a, x| a + x);
                assert_eq!(&total, g.power(i));
            }
        }
    }

    #[test]
    fn row_mean_is_uniform() {
        let g = EnvironmentGraph::builder(vec![int(3), int(1), int(1)])
            .friends(0, 1)
            .unwrap()
            .adversaries(0, 2)
            .unwrap()
            .build()
            .unwrap();
        let mut rng = process_rng(11, 0);
        let draws = 100_000;
        let mut sums = [0.0f64; 3];
        for _ in 0..draws {
            let row = sample_row(&g, 0, DEFAULT_LATTICE, &mut rng);
            for (s, x) in sums.iter_mut().zip(&row) {
                *s += to_f64(x);
            }
        }
        for s in sums {
            let mean = s / draws as f64;
            assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        }
    }

    #[test]
    fn equilibrium_start_is_a_fixed_point() {
        let g = line_game();
        let table = UtilityTable::with_defaults(&g);
        let start = unflatten(&g, &FlatAllocation(vec![frac(9, 2), int(2), int(6), int(5)])).unwrap();
        assert!(is_equilibrium(&g, &table, &start));
        let config = SimConfig {
            q: 1,
            ..Default::default()
        };
        let r = run_process(&g, &table, 0, start.clone(), &config);
        assert!(r.converged);
        assert_eq!(r.rounds, 1);
        assert_eq!(r.terminal.as_ref(), Some(&start));
    }

    #[test]
    fn converged_processes_are_equilibria() {
        let g = line_game();
        let table = UtilityTable::with_defaults(&g);
        for mode in [UpdateMode::Asynchronous, UpdateMode::Synchronous] {
            let config = SimConfig {
                q: 40,
                rounds: 30,
                mode,
                seed: 5,
                ..Default::default()
            };
            for r in run_all(&g, &table, &config).unwrap() {
                let u = r.terminal.unwrap();
                assert_eq!(state_vector(&g, &u), r.state);
                if r.converged {
                    assert!(is_equilibrium(&g, &table, &u));
                }
            }
        }
    }

    #[test]
    fn report_is_consistent() {
        let g = line_game();
        let table = UtilityTable::with_defaults(&g);
        let config = SimConfig {
            q: 60,
            seed: 1,
            ..Default::default()
        };
        let results = run_all(&g, &table, &config).unwrap();
        let report = partition_report(&results).unwrap();
        let share_sum: f64 = report.classes.iter().map(|c| c.share).sum();
        assert!((share_sum - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!(report.survival[i] >= report.safe_only[i]);
            let from_classes: f64 = report
                .classes
                .iter()
                .filter(|c| c.label.get(i).survives())
                .map(|c| c.share)
                .sum();
            assert!((from_classes - report.survival[i]).abs() < 1e-12);
        }
        assert!(partition_report(&[]).is_err());
    }

    #[test]
    fn identical_results_form_one_class() {
        let state = StateVector::parse("SSP").unwrap();
        let results: Vec<ProcessResult> = (0..5)
            .map(|id| ProcessResult {
                id,
                terminal: None,
                converged: true,
                rounds: 1,
                state: state.clone(),
            })
            .collect();
        let report = partition_report(&results).unwrap();
        assert_eq!(report.classes.len(), 1);
        assert_eq!(report.classes[0].share, 1.0);
    }
}
