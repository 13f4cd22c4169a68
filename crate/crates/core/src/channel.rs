//! Line-of-sight MIMO channel between a base-station array and a swarm of
//! single-antenna receivers.
//!
//! Entry `(n, m)` couples transmit antenna `m` to receiver `n`. Amplitudes use
//! the far-field approximation `λ / (4πR)` shared by every entry, phases use the
//! exact antenna-to-receiver distance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use thiserror::Error;

/// A point or displacement in 3D space, in meters.
pub type Position3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("wavelength must be positive and finite, got {0}")]
    Wavelength(f64),
    #[error("swarm range must be positive and finite, got {0}")]
    Range(f64),
    #[error("{side} position {index} is not finite")]
    NonFinite { side: &'static str, index: usize },
    #[error("{side} positions {first} and {second} coincide")]
    Coincident {
        side: &'static str,
        first: usize,
        second: usize,
    },
    #[error("channel needs N_R >= N_T >= 1, got {rows}x{cols}")]
    Dimensions { rows: usize, cols: usize },
    #[error("amplitude must be positive and finite, got {0}")]
    Amplitude(f64),
}

/// Ground-truth geometry of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub tx_positions: Vec<Position3>,
    pub rx_positions: Vec<Position3>,
    pub wavelength: f64,
    /// BS-to-swarm distance `R` used for the common amplitude.
    pub swarm_range: f64,
}

impl ArrayGeometry {
    pub fn new(
        tx_positions: Vec<Position3>,
        rx_positions: Vec<Position3>,
        wavelength: f64,
        swarm_range: f64,
    ) -> Result<Self, ChannelError> {
        let geom = ArrayGeometry {
            tx_positions,
            rx_positions,
            wavelength,
            swarm_range,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn n_tx(&self) -> usize {
        self.tx_positions.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_positions.len()
    }

    /// Wavenumber `2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Common entry magnitude `λ / (4πR)`.
    pub fn amplitude(&self) -> f64 {
        self.wavelength / (4.0 * PI * self.swarm_range)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(ChannelError::Wavelength(self.wavelength));
        }
        if !(self.swarm_range.is_finite() && self.swarm_range > 0.0) {
            return Err(ChannelError::Range(self.swarm_range));
        }
        let (rows, cols) = (self.n_rx(), self.n_tx());
        if cols == 0 || rows < cols {
            return Err(ChannelError::Dimensions { rows, cols });
        }
        check_points("tx", &self.tx_positions)?;
        check_points("rx", &self.rx_positions)
    }
}

fn check_points(side: &'static str, points: &[Position3]) -> Result<(), ChannelError> {
    for (index, p) in points.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite()) {
            return Err(ChannelError::NonFinite { side, index });
        }
    }
    for first in 0..points.len() {
        for second in first + 1..points.len() {
            if points[first] == points[second] {
                return Err(ChannelError::Coincident {
                    side,
                    first,
                    second,
                });
            }
        }
    }
    Ok(())
}

/// Complex `N_R × N_T` channel. `amplitude` is the reference entry magnitude;
/// channels produced by [`build_channel`] have every entry at exactly that
/// magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
    amplitude: f64,
}

impl ChannelMatrix {
    pub fn from_entries(entries: DMatrix<Complex64>, amplitude: f64) -> Result<Self, ChannelError> {
        let (rows, cols) = entries.shape();
        if cols == 0 || rows < cols {
            return Err(ChannelError::Dimensions { rows, cols });
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(ChannelError::Amplitude(amplitude));
        }
        Ok(ChannelMatrix { entries, amplitude })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }

    pub fn column(&self, k: usize) -> DVector<Complex64> {
        self.entries.column(k).into_owned()
    }

    /// Gram matrix `HᴴH`; entry `(l, k)` is `h_lᴴ h_k`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        self.entries.ad_mul(&self.entries)
    }

    /// The same channel rescaled to unit amplitude.
    pub fn normalized(&self) -> ChannelMatrix {
        ChannelMatrix {
            entries: self.entries.unscale(self.amplitude),
            amplitude: 1.0,
        }
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self
            .entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Recomputes row `n` from the current geometry, keeping this matrix's
    /// amplitude.
    pub fn refresh_row(&mut self, geom: &ArrayGeometry, n: usize) {
        let q = geom.rx_positions[n];
        for (m, p) in geom.tx_positions.iter().enumerate() {
            self.entries[(n, m)] = path_gain(self.amplitude, geom.wavelength, p, &q);
        }
    }
}

/// `amplitude · exp(−j 2π ‖p − q‖ / λ)`.
pub(crate) fn path_gain(
    amplitude: f64,
    wavelength: f64,
    p: &Position3,
    q: &Position3,
) -> Complex64 {
    Complex64::from_polar(amplitude, -2.0 * PI * phase_cycles(p, q, wavelength))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Fractional part of `‖p − q‖ / λ`, in `[0, 1)`.
///
/// Evaluated in double-double arithmetic: at kilometer range a plain `f64`
/// distance carries ~1e-13 m of rounding, which is visible in the phase when
/// positions are perturbed by micrometers.
pub(crate) fn phase_cycles(p: &Position3, q: &Position3, wavelength: f64) -> f64 {
    let mut sum_hi = 0.0;
    let mut sum_lo = 0.0;
    for axis in 0..3 {
        let (d, d_err) = two_sum(p[axis], -q[axis]);
        let sq = d * d;
        let sq_err = d.mul_add(d, -sq) + 2.0 * d * d_err;
        let (s, e) = two_sum(sum_hi, sq);
        sum_hi = s;
        sum_lo += e + sq_err;
    }
    let (s_hi, s_lo) = two_sum(sum_hi, sum_lo);
    let d_hi = s_hi.sqrt();
    if d_hi == 0.0 {
        return 0.0;
    }
    let d_lo = ((-d_hi).mul_add(d_hi, s_hi) + s_lo) / (2.0 * d_hi);
    let c_hi = d_hi / wavelength;
    let c_lo = ((-c_hi).mul_add(wavelength, d_hi) + d_lo) / wavelength;
    ((c_hi - c_hi.floor()) + c_lo).rem_euclid(1.0)
}

pub fn build_channel(geom: &ArrayGeometry) -> Result<ChannelMatrix, ChannelError> {
    geom.validate()?;
    Ok(assemble(geom))
}

/// [`build_channel`] without revalidating the geometry.
pub(crate) fn assemble(geom: &ArrayGeometry) -> ChannelMatrix {
    assemble_with_amplitude(geom, geom.amplitude())
}

/// Same phases as [`assemble`], any common amplitude.
pub(crate) fn assemble_with_amplitude(geom: &ArrayGeometry, amplitude: f64) -> ChannelMatrix {
    let entries = DMatrix::from_fn(geom.n_rx(), geom.n_tx(), |n, m| {
        path_gain(
            amplitude,
            geom.wavelength,
            &geom.tx_positions[m],
            &geom.rx_positions[n],
        )
    });
    ChannelMatrix { entries, amplitude }
}

/// `σ_min / σ_max`, in `[0, 1]`.
pub fn inverse_condition_number(h: &ChannelMatrix) -> f64 {
    let sv = h.singular_values();
    let largest = sv[0];
    if largest <= 0.0 {
        return 0.0;
    }
    (sv[sv.len() - 1] / largest).clamp(0.0, 1.0)
}

/// Sum of `|h_lᴴ h_k|²` over ordered column pairs `l ≠ k`.
pub fn objective(h: &ChannelMatrix) -> f64 {
    off_diagonal_energy(&h.gram())
}

pub(crate) fn off_diagonal_energy(gram: &DMatrix<Complex64>) -> f64 {
    let n = gram.ncols();
    let mut total = 0.0;
    for k in 0..n {
        for l in 0..n {
            if l != k {
                total += gram[(l, k)].norm_sqr();
            }
        }
    }
    total
}

/// Equal-power capacity in bits/s/Hz with no transmit CSI. `snr` is the linear
/// per-entry SNR after path loss, so singular values are measured in units of
/// the channel amplitude.
pub fn capacity(h: &ChannelMatrix, snr: f64) -> f64 {
    let per_stream = snr / h.n_tx() as f64;
    let gain = h.amplitude * h.amplitude;
    h.singular_values()
        .iter()
        .map(|s| (1.0 + per_stream * s * s / gain).log2())
        .sum()
}

/// Capacity of a channel with equal singular values and the same Frobenius
/// norm as `h`, the maximum of [`capacity`] at fixed total power.
pub fn equal_singular_value_capacity(h: &ChannelMatrix, snr: f64) -> f64 {
    let n_tx = h.n_tx() as f64;
    let power = h.entries.norm_squared() / (h.amplitude * h.amplitude);
    n_tx * (1.0 + snr / n_tx * power / n_tx).log2()
}
