//! Closed-loop environments.
//!
//! An environment owns a latent state and an RNG. Each call to
//! [`Environment::step`] samples a fresh batch from the current state,
//! scores the played threshold into an [`Observation`], and then updates the
//! state as a function of the batch's group acceptance rates. Freezing an
//! environment disables the state update, turning it into a stationary
//! (i.i.d.-batch) distribution for property tests and oracle sweeps.
//!
//! Determinism contract: given the reset seed and the sequence of played
//! thetas, the observation sequence is reproduced bit-for-bit. Per
//! individual the RNG is consumed in a fixed order (group, then score or
//! pool coordinates, then label), so identical histories consume identical
//! stream prefixes.

pub mod mves;
pub mod semisyn;

use serde_json::Value;

use crate::policy::{ConstraintSpec, Observation};

pub use mves::{MvesConfig, MvesEnv};
pub use semisyn::{PoolEntry, PoolSet, SemiSynConfig, SemiSynEnv};

/// Static facts a learner may know about an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvDescriptor {
    pub c_fp: f64,
    pub constraints: ConstraintSpec,
    pub batch_size: usize,
}

pub trait Environment: Send {
    /// Reinitialize state and reseed the RNG. Two environments reset with
    /// the same seed and fed the same thetas produce identical observations.
    fn reset(&mut self, seed: u64);

    /// Play one round at `theta`.
    fn step(&mut self, theta: f64) -> Observation;

    fn descriptor(&self) -> EnvDescriptor;

    /// Stop updating state; batches stay i.i.d. from the current
    /// distribution. Idempotent.
    fn freeze(&mut self);

    /// Current latent state, for run-directory snapshots and tests.
    fn state_snapshot(&self) -> Value;
}

/// Freeze an environment in place and hand it back (see
/// [`Environment::freeze`]).
pub fn frozen_env(mut env: Box<dyn Environment>) -> Box<dyn Environment> {
    env.freeze();
    env
}

/// Shared affine contraction used by both environment families:
/// pull `prev` toward `base` at rate `rho` and force by
/// `kappa * (acc - acc_ref)`. Clipping is applied by the caller.
pub(crate) fn contract_update(
    prev: f64,
    base: f64,
    rho: f64,
    kappa: f64,
    acc: Option<f64>,
    acc_ref: f64,
) -> f64 {
    // A group absent from the batch exerts no forcing that round.
    let force = match acc {
        Some(a) => kappa * (a - acc_ref),
        None => 0.0,
    };
    (1.0 - rho) * base + rho * prev + force
}
