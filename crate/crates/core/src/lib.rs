//! Lifelong learning engine for vehicle routing problems.
//!
//! The crate is organized around a construction-policy training loop that
//! survives distribution drift: a task generator interpolates between
//! principal instance distributions over a fixed epoch horizon, a linear
//! softmax policy builds tours step by step, and the training engine combats
//! forgetting with a replay buffer that is consulted in two ways (behavior
//! replay against stored action distributions, and instance replay that
//! re-solves stored problems) plus in-place enhancement of stored solutions.
//!
//! Modules:
//! - [`vrp`]: instances, construction states, tours, exact and local-search
//!   reference solvers.
//! - [`taskgen`]: drifting task schedules and instance sampling.
//! - [`policy`]: featurized softmax construction policy, rollouts, replay.
//! - [`learner`]: loss terms, analytic gradients, Adam.
//! - [`dree`]: experience buffer, replay scheduling, the lifelong engine.
//! - [`metrics`]: gap ledgers and the four lifelong metrics.
//! - [`seeding`]: deterministic RNG construction and stream splitting.

pub mod dree;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod policy;
pub mod seeding;
pub mod taskgen;
pub mod vrp;

pub use error::{Error, Result};
