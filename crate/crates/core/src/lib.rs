//! # coop-landing
//!
//! Deterministic simulator for a cooperative UAV-USV system: a catamaran
//! surface vehicle carrying a landing platform with an IR beacon, and a
//! quadrotor that lands on it in two phases (GPS approach, then beacon-guided
//! descent).
//!
//! ## Modules
//!
//! - [`scenario`]: experiment description, JSON loading, world clock
//! - [`rng`]: seeded named sub-streams for every noise source
//! - [`dynamics`]: surge-yaw USV, velocity-controlled UAV, gust model, RK4
//! - [`sensors`]: GPS, compass, gyro and IR beacon measurement models
//! - [`guidance`]: carrot-chasing path following over a waypoint list
//! - [`control`]: PI speed, PD heading, thrust allocation, UAV velocity law
//! - [`landing`]: two-phase landing state machine and touchdown classification
//! - [`hydrostatics`]: buoyancy and payload arithmetic
//! - [`harness`]: trial runner, Monte Carlo batches, log audit, file output

pub mod control;
pub mod dynamics;
pub mod guidance;
pub mod harness;
pub mod hydrostatics;
pub mod landing;
pub mod math;
pub mod rng;
pub mod scenario;
pub mod sensors;

pub use harness::{run_monte_carlo, run_trial, BatchSummary, Execution, TrialLog};
pub use scenario::{load_scenario, Scenario, ScenarioError};

use thiserror::Error;

/// Faults raised while stepping a simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite state at step {step}")]
    NonFinite { step: u64 },
    #[error("motor thrust {thrust} N exceeds the {max} N limit; clamp before integrating")]
    ThrustSaturation { thrust: f64, max: f64 },
    #[error("clock at t={t} s cannot advance past duration_max={duration_max} s")]
    PastEnd { t: f64, duration_max: f64 },
    #[error(transparent)]
    Mission(#[from] guidance::MissionError),
}
