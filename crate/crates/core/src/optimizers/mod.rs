//! Per-drone motion proposals: gradient steps, axis probes, and the uniform
//! rectangular array (URA) baseline with optimal target assignment.

mod assignment;
mod brute_force;
mod gradient;
mod ura;

use thiserror::Error;

pub use assignment::{assign_targets, assignment_cost};
pub use brute_force::{bf_probe_set, bf_select, BfParams, Probe};
pub(crate) use gradient::gradient_from_partial_gram;
pub use gradient::{gd_step, gradient, GdParams};
pub use ura::{ura_targets, UniformGrid, UraPlan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("decay must lie in (0, 1], got {0}")]
    Decay(f64),
    #[error("drone {drone} coincides with transmit antenna {antenna}")]
    AtAntenna { drone: usize, antenna: usize },
    #[error("swarm centroid coincides with the transmit array centroid")]
    Boresight,
    #[error("receive grid {rows}x{cols} does not hold {n_rx} drones")]
    GridSize {
        rows: usize,
        cols: usize,
        n_rx: usize,
    },
    #[error("{0}")]
    Grid(String),
}

fn check_schedule(step: f64, decay: f64) -> Result<(), OptimizerError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(OptimizerError::Step(step));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(OptimizerError::Decay(decay));
    }
    Ok(())
}
