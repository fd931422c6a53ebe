//! Annealing optimizers over small combinatorial and continuous problems.
//!
//! The crate provides classical baselines ([`sa`]), path-integral quantum
//! annealing over Trotter replicas ([`sqa`]), a quantum-transition search
//! with tunnelling restarts ([`qts`]) and an exact state-vector emulator of
//! adiabatic evolution ([`aqc`]). Every stochastic routine is driven by an
//! explicit 64-bit seed so runs are reproducible bit for bit.
//!
//! Problems live in [`problems`]; each exposes an incremental move interface
//! and, at small sizes, an exhaustive oracle used to define success in the
//! [`harness`].

// `!(x > 0.0)` is how parameter checks reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aqc;
pub mod error;
pub mod harness;
pub mod problems;
pub mod qts;
pub mod sa;
pub mod schedule;
pub mod sqa;

mod result;

pub use error::{Error, Result};
pub use result::{AnnealResult, TracePoint};

use rand::SeedableRng;

/// Random stream used by every solver.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the solver random stream for `seed`.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
