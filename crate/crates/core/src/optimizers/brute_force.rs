use super::{check_schedule, OptimizerError};
use crate::channel::Position3;

/// Probe length `b` in meters and per-iteration decay `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfParams {
    step: f64,
    decay: f64,
}

impl BfParams {
    pub fn new(step: f64, decay: f64) -> Result<Self, OptimizerError> {
        check_schedule(step, decay)?;
        Ok(BfParams { step, decay })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn step_at(&self, iteration: u32) -> f64 {
        self.step * self.decay.powi(iteration as i32)
    }
}

/// One of the seven candidate displacements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    Stay,
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusZ,
    MinusZ,
}

impl Probe {
    pub fn unit(self) -> Position3 {
        match self {
            Probe::Stay => Position3::zeros(),
            Probe::PlusX => Position3::new(1.0, 0.0, 0.0),
            Probe::MinusX => Position3::new(-1.0, 0.0, 0.0),
            Probe::PlusY => Position3::new(0.0, 1.0, 0.0),
            Probe::MinusY => Position3::new(0.0, -1.0, 0.0),
            Probe::PlusZ => Position3::new(0.0, 0.0, 1.0),
            Probe::MinusZ => Position3::new(0.0, 0.0, -1.0),
        }
    }
}

/// `[0, +x, −x, +y, −y, +z, −z]`.
pub fn bf_probe_set() -> [Probe; 7] {
    [
        Probe::Stay,
        Probe::PlusX,
        Probe::MinusX,
        Probe::PlusY,
        Probe::MinusY,
        Probe::PlusZ,
        Probe::MinusZ,
    ]
}

/// Index of the smallest objective. Ties go to `Stay` (index 0) and then to
/// the lowest index; NaN never wins.
pub fn bf_select(objectives: &[f64; 7]) -> usize {
    let mut best = 0;
    for (i, &value) in objectives.iter().enumerate().skip(1) {
        let current = objectives[best];
        if value < current || (current.is_nan() && !value.is_nan()) {
            best = i;
        }
    }
    best
}
