//! Repeated elections with candidate reputations and credible promises:
//! per-election strategy tables, expected payoffs, maximal credible promise
//! distances d*(δ), and repeated-game simulations.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod payoffs;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod stage_game;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 aliases for the generic building blocks.
pub type PolicyPoint64 = stage_game::PolicyPoint<f64>;
pub type IdealPoint64 = stage_game::IdealPoint<f64>;
pub type Reach64 = stage_game::Reach<f64>;
pub type StageOutcome64 = stage_game::StageOutcome<f64>;
pub type PayoffValue64 = payoffs::PayoffValue<f64>;
pub type DiscountFactor64 = equilibrium::DiscountFactor<f64>;
pub type EquilibriumPoint64 = equilibrium::EquilibriumPoint<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
