//! Prospect-theoretic equilibrium analysis and learning for finite games.
//!
//! * [`cpt`]: CPT values of finite lotteries and CPT regret.
//! * [`game`]: normal-form games, joint distributions and induced lotteries.
//! * [`equilibrium`]: membership checks for CPT correlated, CPT Nash and
//!   mediated CPT correlated equilibria, plus mediator construction.
//! * [`learning`]: the repeated-game engine, calibrated forecasting, CPT
//!   regret tracking and scripted counterexamples.
//! * [`harness`]: scenario catalog, run configuration and report drivers
//!   behind the `cpt-games` binary.

pub mod catalog;
pub mod cpt;
pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod game;
pub mod harness;
pub mod learning;
pub mod rng;
mod simplex;

pub use error::{Error, Result};
pub use exec::Execution;

/// Version tag written into every JSON document this crate emits.
pub const SCHEMA_VERSION: u32 = 1;
