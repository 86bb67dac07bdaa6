//! Exact equilibrium enumeration and best-response simulation for the power
//! allocation game on signed networks.
//!
//! Countries split a power budget between themselves, their friends and
//! their adversaries. A country is safe, precarious or unsafe as its total
//! support exceeds, equals or falls short of its total threat. [`exact`]
//! describes every pure Nash equilibrium as a union of convex polytopes over
//! the `2m` free allocations; [`sim`] estimates class likelihoods by running
//! best-response dynamics from sampled starts.

pub mod error;
pub mod exact;
pub mod model;
pub mod polytope;
pub mod preferences;
pub mod rational;
pub mod report;
pub mod response;
pub mod scenario;
pub mod sim;

pub use error::{PagError, Result};
pub use exact::{enumerate_classes, strategy_space, EnumerationOptions, EquilibriumClass, VolumeEstimate};
pub use model::{
    flatten, margin_form, state_of, state_vector, total_support, total_threat, unflatten, EnvironmentGraph,
    FlatAllocation, FlatIndex, Relation, State, StateVector, StrategyMatrix,
};
pub use polytope::{Cmp, ConstraintFormula, LinearConstraint, Polytope};
pub use preferences::{
    prefer, reduce_state, utility, validate_axioms, CountryOrder, Preference, Preferred, ReducedStateVector,
    StateOrders, UtilityTable,
};
pub use rational::{format_rational, parse_rational, Rational};
pub use report::ReportDocument;
pub use response::{best_response, deviation_feasible, is_equilibrium, threshold, BestResponse, Deviation};
pub use scenario::{parse_scenario, randomize_scenario, Scenario, ScenarioPreference};
pub use sim::{
    partition_report, run_all, run_process, sample_initial, LikelihoodReport, ProcessResult, SimConfig, UpdateMode,
};
