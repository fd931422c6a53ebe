//! Optimization problems, their incremental move sets and exhaustive oracles.
//!
//! Every problem implements [`Problem`]: a configuration type, a move type
//! whose cost change is computed incrementally, and a deterministic
//! neighbourhood. Problems usable by the replica annealer additionally
//! implement [`ReplicaCoupling`], which defines the inter-replica energy.

mod barrier;
mod coloring;
mod continuous;
mod generate;
mod instance;
pub mod io;
mod ising;
mod tsp;

pub use barrier::{barrier_landscape, BarrierLandscape, BarrierProfile, BarrierSpec, ChainSite, Step};
pub use coloring::{coloring_conflicts, planted_coloring_instance, ColoringConfiguration, GraphInstance, Recolor};
pub use continuous::{rastrigin, BoxDomain, ContinuousPoint, Rastrigin, Shift};
pub use generate::{Generated, GeneratorSpec};
pub use instance::{ExactSummary, Instance};
pub use ising::{
    ising_energy, random_ising, Coupling, CouplingDistribution, Flip, IsingInstance, SpinConfiguration, Topology,
};
pub use tsp::{random_tsp, tour_length, Tour, TspInstance, TwoOpt};

use crate::{Error, Result};
use rand::Rng;
use serde::Serialize;
use std::fmt::Debug;

/// Largest discrete search space the exhaustive oracles will enumerate.
pub const MAX_ENUMERATION_STATES: u64 = 1 << 24;

/// Largest TSP instance the exhaustive oracle accepts.
pub const MAX_ORACLE_CITIES: usize = 10;

/// Relative tolerance used when grouping equal-cost optima.
pub const COST_TOLERANCE: f64 = 1e-9;

pub(crate) fn same_cost(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// An optimization problem with a local move structure.
pub trait Problem: Send + Sync {
    type Config: Clone + Debug + PartialEq + Send + Sync + Serialize;
    type Move: Copy + Debug;

    /// Number of degrees of freedom; the default sweep length.
    fn size(&self) -> usize;

    fn random_config<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Config;

    fn validate(&self, config: &Self::Config) -> Result<()>;

    /// Full cost evaluation.
    fn cost(&self, config: &Self::Config) -> f64;

    /// Draws a random move. `None` means the configuration has no moves,
    /// which only happens at a terminal optimum (a proper coloring).
    fn propose<R: Rng + ?Sized>(&self, config: &Self::Config, rng: &mut R) -> Option<Self::Move>;

    /// Cost change of `mv`, computed in time proportional to the move's locality.
    fn delta(&self, config: &Self::Config, mv: Self::Move) -> f64;

    fn apply(&self, config: &mut Self::Config, mv: Self::Move);

    /// The full deterministic neighbourhood of `config`.
    fn neighbors(&self, config: &Self::Config) -> Vec<Self::Move>;

    /// A cost below which no configuration exists; reaching it ends a run.
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

/// Inter-replica interaction used by the path-integral annealer.
///
/// The kinetic energy of a replica ring is `J_perp * sum_r coupling(w_r, w_{r+1})`.
pub trait ReplicaCoupling: Problem {
    fn coupling(&self, a: &Self::Config, b: &Self::Config) -> f64;

    /// Change of `coupling(config, other)` when `mv` is applied to `config`.
    fn coupling_delta(&self, config: &Self::Config, mv: Self::Move, other: &Self::Config) -> f64;
}

/// A proven global optimum found by enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct Optimum<C> {
    pub config: C,
    pub cost: f64,
    /// Number of distinct optimal configurations.
    pub degeneracy: u64,
}

/// Exhaustive search over the whole configuration space.
pub trait ExactOracle: Problem {
    fn brute_force_optimum(&self) -> Result<Optimum<Self::Config>>;
}

/// Proposes a random move and returns the neighbouring configuration with its cost change.
pub fn propose_move<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    config: &P::Config,
    rng: &mut R,
) -> Result<(P::Config, f64)> {
    problem.validate(config)?;
    let mv = problem.propose(config, rng).ok_or(Error::NoMove)?;
    let delta = problem.delta(config, mv);
    let mut next = config.clone();
    problem.apply(&mut next, mv);
    Ok((next, delta))
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
