//! Laws, sample paths, and return observables of random walks.

mod dist;
pub mod finite;
mod sample;

pub use dist::{hitting_by_horizon, law_after, push_forward, SparseDist};
pub use finite::{
    green_partial_sums, green_partial_sums_f64, verify_equivalences, EquivalenceReport, FiniteChain,
};
pub use sample::{
    observe_returns, return_prob_estimate, sample_path, sample_path_indexed, walk_until,
    ReturnObservables, Trajectory,
};
