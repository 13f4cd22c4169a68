use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_schedule, OptimizerError};
use crate::channel::{phase_cycles, ArrayGeometry, ChannelMatrix, Position3};

/// Step size `b` (meters per unit gradient) and per-iteration decay `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdParams {
    step: f64,
    decay: f64,
}

impl GdParams {
    pub fn new(step: f64, decay: f64) -> Result<Self, OptimizerError> {
        check_schedule(step, decay)?;
        Ok(GdParams { step, decay })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// `b · d^iteration`.
    pub fn step_at(&self, iteration: u32) -> f64 {
        self.step * self.decay.powi(iteration as i32)
    }
}

/// Gradient of the column-orthogonality objective with respect to the
/// position `q_m` of drone `m`.
///
/// Only the other drones' rows of `h` enter (as `Σ_{n≠m} conj(h_nl) h_nk`),
/// the drone's own contribution is rebuilt from `q_m` and the transmit
/// positions. The result carries the factor `amplitude²` of `h`, so for a
/// unit-amplitude channel it reduces to
/// `Σ (4π/λ)(Re{g} sin a − Im{g} cos a)(u_l − u_k)`.
pub fn gradient(
    q_m: &Position3,
    geom: &ArrayGeometry,
    h: &ChannelMatrix,
    m: usize,
) -> Result<Position3, OptimizerError> {
    let mut gram = h.gram();
    let row = h.entries().row(m);
    for k in 0..h.n_tx() {
        for l in 0..h.n_tx() {
            gram[(l, k)] -= row[l].conj() * row[k];
        }
    }
    gradient_from_partial_gram(q_m, geom, h.amplitude(), &gram, m)
}

/// [`gradient`] with `Σ_{n≠m} conj(h_nl) h_nk` already formed.
pub(crate) fn gradient_from_partial_gram(
    q_m: &Position3,
    geom: &ArrayGeometry,
    amplitude: f64,
    partial_gram: &DMatrix<Complex64>,
    m: usize,
) -> Result<Position3, OptimizerError> {
    let n_tx = geom.n_tx();
    let k = geom.wavenumber();
    let mut units = Vec::with_capacity(n_tx);
    let mut phasors = Vec::with_capacity(n_tx);
    for (antenna, p) in geom.tx_positions.iter().enumerate() {
        let v = p - q_m;
        let d = v.norm();
        if d <= f64::EPSILON * p.norm().max(q_m.norm()).max(1.0) {
            return Err(OptimizerError::AtAntenna { drone: m, antenna });
        }
        units.push(v / d);
        let cycles = phase_cycles(p, q_m, geom.wavelength);
        phasors.push(Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * cycles,
        ));
    }
    let scale = 2.0 * k * amplitude * amplitude;
    let mut grad = Position3::zeros();
    for l in 0..n_tx {
        for kk in 0..n_tx {
            if l == kk {
                continue;
            }
            // e^{ja} with a = k (d_l − d_k)
            let e = phasors[l] * phasors[kk].conj();
            let g = partial_gram[(l, kk)];
            let coeff = scale * (g.re * e.im - g.im * e.re);
            grad += coeff * (units[l] - units[kk]);
        }
    }
    Ok(grad)
}

/// Motion command `−b d^iteration ∇f`.
pub fn gd_step(grad: &Position3, params: GdParams, iteration: u32) -> Position3 {
    -params.step_at(iteration) * grad
}
