//! Single-stream SINR under zero-forcing (ZF), naive matched-filter (NV) and
//! interference-free matched-filter (MF) combining.
//!
//! Stream indices are zero-based.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelMatrix;

/// Relative projection norm below which a zero-forcing combiner is degenerate.
pub const ZF_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombiningError {
    #[error("stream {stream} out of range for {n_tx} streams")]
    Stream { stream: usize, n_tx: usize },
    #[error("stream {stream} lies in the span of the interfering columns")]
    Degenerate { stream: usize },
    #[error("noise variance must be positive and finite, got {0}")]
    Noise(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    ZeroForcing,
    Naive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerWeights {
    pub w: DVector<Complex64>,
    pub kind: CombinerKind,
}

/// Receiver noise variance `ψ²` in linear power units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self, CombiningError> {
        if variance.is_finite() && variance > 0.0 {
            Ok(NoiseModel { variance })
        } else {
            Err(CombiningError::Noise(variance))
        }
    }

    /// Noise for a per-receive-antenna SNR: `ψ² = γ² / snr`.
    pub fn from_snr(amplitude: f64, snr_linear: f64) -> Result<Self, CombiningError> {
        Self::new(amplitude * amplitude / snr_linear)
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

fn check_stream(h: &ChannelMatrix, stream: usize) -> Result<(), CombiningError> {
    if stream < h.n_tx() {
        Ok(())
    } else {
        Err(CombiningError::Stream {
            stream,
            n_tx: h.n_tx(),
        })
    }
}

/// Projects `h_stream` onto the orthogonal complement of the other columns.
///
/// The interfering span is orthonormalized with modified Gram-Schmidt and a
/// second reorthogonalization pass; columns already inside the span are
/// dropped.
pub fn zf_weights(h: &ChannelMatrix, stream: usize) -> Result<CombinerWeights, CombiningError> {
    check_stream(h, stream)?;
    let target = h.column(stream);
    let scale = target.norm();
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(h.n_tx());
    for k in (0..h.n_tx()).filter(|&k| k != stream) {
        let mut v = h.column(k);
        let norm0 = v.norm();
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dotc(&v);
                v.axpy(-coeff, q, Complex64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm > 1e-13 * norm0 {
            basis.push(v.unscale(norm));
        }
    }
    let mut w = target;
    for _ in 0..2 {
        for q in &basis {
            let coeff = q.dotc(&w);
            w.axpy(-coeff, q, Complex64::new(1.0, 0.0));
        }
    }
    if w.norm() < ZF_DEGENERACY_TOL * scale {
        return Err(CombiningError::Degenerate { stream });
    }
    Ok(CombinerWeights {
        w,
        kind: CombinerKind::ZeroForcing,
    })
}

pub fn nv_weights(h: &ChannelMatrix, stream: usize) -> Result<CombinerWeights, CombiningError> {
    check_stream(h, stream)?;
    Ok(CombinerWeights {
        w: h.column(stream),
        kind: CombinerKind::Naive,
    })
}

/// `|wᴴh_s|² / (Σ_{k≠s} |wᴴh_k|² + ‖w‖² ψ²)`, linear.
pub fn stream_sinr(
    h: &ChannelMatrix,
    weights: &CombinerWeights,
    stream: usize,
    noise: NoiseModel,
) -> Result<f64, CombiningError> {
    check_stream(h, stream)?;
    let w = &weights.w;
    let w_energy = w.norm_squared();
    if w_energy == 0.0 {
        return Err(CombiningError::Degenerate { stream });
    }
    let mut signal = 0.0;
    let mut interference = 0.0;
    for k in 0..h.n_tx() {
        let p = w.dotc(&h.entries().column(k)).norm_sqr();
        if k == stream {
            signal = p;
        } else {
            interference += p;
        }
    }
    Ok(signal / (interference + w_energy * noise.variance()))
}

/// Interference-free matched-filter SINR `‖h_s‖² / ψ²`.
pub fn mf_bound(
    h: &ChannelMatrix,
    stream: usize,
    noise: NoiseModel,
) -> Result<f64, CombiningError> {
    check_stream(h, stream)?;
    Ok(h.entries().column(stream).norm_squared() / noise.variance())
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Per-stream linear SINRs for all three combiners.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub zf: Vec<f64>,
    pub nv: Vec<f64>,
    pub mf: Vec<f64>,
}

/// How a per-stream report collapses to one number per combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrAggregate {
    /// Mean over streams of the dB values.
    #[default]
    MeanDb,
    /// First stream only.
    FirstStream,
}

impl SinrReport {
    /// Evaluates every stream with the explicit combiners. A degenerate ZF
    /// stream reports zero SINR.
    pub fn evaluate(h: &ChannelMatrix, noise: NoiseModel) -> SinrReport {
        let n = h.n_tx();
        let mut report = SinrReport {
            zf: Vec::with_capacity(n),
            nv: Vec::with_capacity(n),
            mf: Vec::with_capacity(n),
        };
        for s in 0..n {
            let zf = zf_weights(h, s)
                .and_then(|w| stream_sinr(h, &w, s, noise))
                .unwrap_or(0.0);
            let nv = nv_weights(h, s)
                .and_then(|w| stream_sinr(h, &w, s, noise))
                .unwrap_or(0.0);
            report.zf.push(zf);
            report.nv.push(nv);
            report.mf.push(mf_bound(h, s, noise).unwrap_or(0.0));
        }
        report
    }

    /// Same quantities from the Gram matrix `G = HᴴH`: NV and MF read off `G`
    /// directly, ZF uses `1 / (ψ² [G⁻¹]_ss)`. Falls back to
    /// [`SinrReport::evaluate`] when `G` is not numerically positive definite.
    pub fn from_gram(
        h: &ChannelMatrix,
        gram: &DMatrix<Complex64>,
        noise: NoiseModel,
    ) -> SinrReport {
        let psi = noise.variance();
        let n = gram.ncols();
        let Some(inverse) = gram.clone().cholesky().map(|c| c.inverse()) else {
            return Self::evaluate(h, noise);
        };
        let mut report = SinrReport {
            zf: Vec::with_capacity(n),
            nv: Vec::with_capacity(n),
            mf: Vec::with_capacity(n),
        };
        for s in 0..n {
            let energy = gram[(s, s)].re;
            let interference: f64 = (0..n)
                .filter(|&k| k != s)
                .map(|k| gram[(s, k)].norm_sqr())
                .sum();
            let diag = inverse[(s, s)].re;
            if !(diag.is_finite() && diag > 0.0) {
                return Self::evaluate(h, noise);
            }
            report.zf.push(1.0 / (psi * diag));
            report
                .nv
                .push(energy * energy / (interference + energy * psi));
            report.mf.push(energy / psi);
        }
        report
    }

    fn collapse(values: &[f64], how: SinrAggregate) -> f64 {
        match how {
            SinrAggregate::MeanDb => {
                values.iter().map(|&v| to_db(v)).sum::<f64>() / values.len() as f64
            }
            SinrAggregate::FirstStream => to_db(values[0]),
        }
    }

    /// `(zf, nv, mf)` in dB.
    pub fn aggregate_db(&self, how: SinrAggregate) -> (f64, f64, f64) {
        (
            Self::collapse(&self.zf, how),
            Self::collapse(&self.nv, how),
            Self::collapse(&self.mf, how),
        )
    }

    /// `Σ log2(1 + SINR_s)` over streams for the given per-stream values.
    pub fn sum_rate(values: &[f64]) -> f64 {
        values.iter().map(|s| (1.0 + s).log2()).sum()
    }
}
