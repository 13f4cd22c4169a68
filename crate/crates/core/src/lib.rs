//! Distributed placement of a UAV receiver swarm for line-of-sight MIMO
//! backhaul.
//!
//! The swarm is steered toward a well-conditioned channel by per-drone
//! gradient descent, by axis-probing brute force, or by flying to an optimal
//! uniform rectangular array, under localization and actuation errors.

pub mod channel;
pub mod cli;
pub mod combining;
pub mod experiments;
pub mod optimizers;
pub mod protocol;
