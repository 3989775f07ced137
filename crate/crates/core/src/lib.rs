//! Closed-loop threshold-policy learning under demographic-parity and
//! service-rate constraints.
//!
//! The crate is organised around a small core: a scalar threshold policy
//! scored on batches of individuals ([`policy`]), environments whose state
//! reacts to past acceptance decisions ([`env`]), learners that pick the next
//! threshold from bandit feedback ([`learner`]), a dataset-to-environment
//! pipeline ([`data`]), post-hoc metrics ([`analysis`]), and an experiment
//! harness ([`harness`]) that wires presets, seeding, and run logging
//! together.

pub mod analysis;
pub mod data;
pub mod env;
pub mod error;
pub mod harness;
pub mod learner;
pub mod policy;
pub mod seeding;

pub use error::{Error, Result};
