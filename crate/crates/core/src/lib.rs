//! Agent-based simulation of the feedback loop between recommendation
//! algorithms and the users they serve.
//!
//! A latent "ground truth" world (user preferences, item attributes and
//! utilities) drives user choices; recommenders only ever observe the
//! resulting interaction log. Repeatedly retraining on that confounded log
//! and comparing against an oracle recommender exposes homogenization of
//! user behavior and shifts in item consumption.
//!
//! The numerical core is generic over the floating point type through
//! [`Scalar`]; the aliases at the crate root fix it to `f64`, which is what
//! the command line tool runs with.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod error;
pub mod interaction;
pub mod metrics;
pub mod numerics;
pub mod output;
pub mod recommenders;
pub mod rng;
mod scalar;
pub mod validation;
pub mod world;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type UserId = usize;
pub type ItemId = usize;

/// Double precision instantiations used by the simulator binary.
pub type GroundTruthWorld = world::GroundTruthWorld<f64>;
pub type RecommenderModel = recommenders::RecommenderModel<f64>;
pub type FactorizationResult = numerics::FactorizationResult<f64>;
pub type BetaPrimeParams = numerics::BetaPrimeParams<f64>;
pub type MetricsRecord = metrics::MetricsRecord<f64>;
pub type WorldRun = engine::WorldRun<f64>;
pub type ExperimentResult = engine::ExperimentResult<f64>;
