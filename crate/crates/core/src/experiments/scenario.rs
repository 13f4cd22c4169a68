//! Scenario configuration and its `key = value` file format.
//!
//! A scenario file holds one `key = value` pair per line; `#` starts a
//! comment. Keys are the [`Scenario`] field names, plus `frequency_hz` as an
//! alternative to `wavelength_m`. Strings (`algorithm`, `sinr_aggregate`) may
//! be bare or quoted. Unknown keys are an error.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::Position3;
use crate::combining::SinrAggregate;
use crate::optimizers::{BfParams, GdParams, UniformGrid};
use crate::protocol::{Algorithm, ErrorModel, ProtocolError, RunConfig, UraParams};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    Gd,
    Bf,
    Ura,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [AlgorithmKind::Gd, AlgorithmKind::Bf, AlgorithmKind::Ura];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Gd => "gd",
            AlgorithmKind::Bf => "bf",
            AlgorithmKind::Ura => "ura",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gd" => Ok(AlgorithmKind::Gd),
            "bf" => Ok(AlgorithmKind::Bf),
            "ura" => Ok(AlgorithmKind::Ura),
            other => Err(ScenarioError::Invalid(format!(
                "unknown algorithm {other:?} (gd, bf, ura)"
            ))),
        }
    }
}

fn aggregate_name(a: SinrAggregate) -> &'static str {
    match a {
        SinrAggregate::MeanDb => "mean_db",
        SinrAggregate::FirstStream => "first_stream",
    }
}

fn parse_aggregate(s: &str) -> Result<SinrAggregate, ScenarioError> {
    match s {
        "mean_db" => Ok(SinrAggregate::MeanDb),
        "first_stream" => Ok(SinrAggregate::FirstStream),
        other => Err(ScenarioError::Invalid(format!(
            "unknown sinr_aggregate {other:?} (mean_db, first_stream)"
        ))),
    }
}

/// Everything needed to reproduce one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx_rows: usize,
    pub tx_cols: usize,
    pub tx_spacing_m: f64,
    pub n_rx: usize,
    pub cube_side_m: f64,
    pub range_m: f64,
    pub wavelength_m: f64,
    pub snr_db: f64,
    pub alpha: f64,
    pub algorithm: AlgorithmKind,
    pub gd_step_m: f64,
    pub bf_step_m: f64,
    pub decay: f64,
    pub sigma_loc_m: f64,
    pub sigma_act_m: f64,
    pub max_iterations: u32,
    pub seed: u64,
    /// Shape of the baseline receive grid.
    pub ura_rows: usize,
    pub ura_cols: usize,
    pub sinr_aggregate: SinrAggregate,
}

impl Default for Scenario {
    /// 4×4 array at 25 cm, 16 drones in a 50 m cube 1 km out, 60 GHz,
    /// 10 dB SNR, stop at ICN 0.95.
    fn default() -> Self {
        Scenario {
            tx_rows: 4,
            tx_cols: 4,
            tx_spacing_m: 0.25,
            n_rx: 16,
            cube_side_m: 50.0,
            range_m: 1000.0,
            wavelength_m: SPEED_OF_LIGHT / 60e9,
            snr_db: 10.0,
            alpha: 0.95,
            algorithm: AlgorithmKind::Gd,
            gd_step_m: 0.05,
            bf_step_m: 0.3,
            decay: 0.999,
            sigma_loc_m: 0.0,
            sigma_act_m: 0.0,
            max_iterations: 5000,
            seed: 0,
            ura_rows: 4,
            ura_cols: 4,
            sinr_aggregate: SinrAggregate::MeanDb,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Overrides {
    tx_rows: Option<usize>,
    tx_cols: Option<usize>,
    tx_spacing_m: Option<f64>,
    n_rx: Option<usize>,
    cube_side_m: Option<f64>,
    range_m: Option<f64>,
    wavelength_m: Option<f64>,
    frequency_hz: Option<f64>,
    snr_db: Option<f64>,
    alpha: Option<f64>,
    algorithm: Option<String>,
    gd_step_m: Option<f64>,
    bf_step_m: Option<f64>,
    decay: Option<f64>,
    sigma_loc_m: Option<f64>,
    sigma_act_m: Option<f64>,
    max_iterations: Option<u32>,
    seed: Option<u64>,
    ura_rows: Option<usize>,
    ura_cols: Option<usize>,
    sinr_aggregate: Option<String>,
}

const STRING_KEYS: [&str; 2] = ["algorithm", "sinr_aggregate"];

/// Quotes bare identifiers for the string-valued keys so that
/// `algorithm = bf` parses.
fn normalize_line(line: &str) -> String {
    let body = line.split('#').next().unwrap_or("").trim();
    if let Some((key, value)) = body.split_once('=') {
        let (key, value) = (key.trim(), value.trim());
        if STRING_KEYS.contains(&key) && !value.starts_with('"') {
            return format!("{key} = \"{value}\"");
        }
        return format!("{key} = {value}");
    }
    body.to_string()
}

impl Scenario {
    /// Defaults with the file's `key = value` overrides applied.
    pub fn from_config_str(text: &str) -> Result<Scenario, ScenarioError> {
        let mut s = Scenario::default();
        s.apply_config_str(text)?;
        Ok(s)
    }

    pub fn apply_config_str(&mut self, text: &str) -> Result<(), ScenarioError> {
        for (i, line) in text.lines().enumerate() {
            let normalized = normalize_line(line);
            if normalized.is_empty() {
                continue;
            }
            if !normalized.contains('=') {
                return Err(ScenarioError::Parse {
                    line: i + 1,
                    message: format!("expected `key = value`, got {line:?}"),
                });
            }
            let o: Overrides = toml::from_str(&normalized).map_err(|e| ScenarioError::Parse {
                line: i + 1,
                message: e.message().to_string(),
            })?;
            self.apply(o).map_err(|e| ScenarioError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    fn apply(&mut self, o: Overrides) -> Result<(), ScenarioError> {
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = o.$field { self.$field = v; })* };
        }
        set!(
            tx_rows,
            tx_cols,
            tx_spacing_m,
            n_rx,
            cube_side_m,
            range_m,
            wavelength_m,
            snr_db,
            alpha,
            gd_step_m,
            bf_step_m,
            decay,
            sigma_loc_m,
            sigma_act_m,
            max_iterations,
            seed,
            ura_rows,
            ura_cols
        );
        if let Some(f) = o.frequency_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(ScenarioError::Invalid(format!(
                    "frequency_hz must be > 0, got {f}"
                )));
            }
            self.wavelength_m = SPEED_OF_LIGHT / f;
        }
        if let Some(a) = o.algorithm {
            self.algorithm = a.parse()?;
        }
        if let Some(a) = o.sinr_aggregate {
            self.sinr_aggregate = parse_aggregate(&a)?;
        }
        Ok(())
    }

    /// `key = value` lines that [`Scenario::from_config_str`] reads back to
    /// the same scenario.
    pub fn manifest(&self) -> Vec<(&'static str, String)> {
        vec![
            ("tx_rows", self.tx_rows.to_string()),
            ("tx_cols", self.tx_cols.to_string()),
            ("tx_spacing_m", self.tx_spacing_m.to_string()),
            ("n_rx", self.n_rx.to_string()),
            ("cube_side_m", self.cube_side_m.to_string()),
            ("range_m", self.range_m.to_string()),
            ("wavelength_m", self.wavelength_m.to_string()),
            ("snr_db", self.snr_db.to_string()),
            ("alpha", self.alpha.to_string()),
            ("algorithm", self.algorithm.to_string()),
            ("gd_step_m", self.gd_step_m.to_string()),
            ("bf_step_m", self.bf_step_m.to_string()),
            ("decay", self.decay.to_string()),
            ("sigma_loc_m", self.sigma_loc_m.to_string()),
            ("sigma_act_m", self.sigma_act_m.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("seed", self.seed.to_string()),
            ("ura_rows", self.ura_rows.to_string()),
            ("ura_cols", self.ura_cols.to_string()),
            (
                "sinr_aggregate",
                aggregate_name(self.sinr_aggregate).to_string(),
            ),
        ]
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        for (name, v) in [
            ("tx_spacing_m", self.tx_spacing_m),
            ("cube_side_m", self.cube_side_m),
            ("range_m", self.range_m),
            ("wavelength_m", self.wavelength_m),
            ("gd_step_m", self.gd_step_m),
            ("bf_step_m", self.bf_step_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.tx_rows == 0 || self.tx_cols == 0 {
            return bad("transmit grid must be nonempty".into());
        }
        if self.n_rx < self.tx_rows * self.tx_cols {
            return bad(format!(
                "n_rx = {} is smaller than the {} transmit antennas",
                self.n_rx,
                self.tx_rows * self.tx_cols
            ));
        }
        if self.cube_side_m / 2.0 >= self.range_m {
            return bad("the drone cube must lie entirely in front of the array".into());
        }
        if !self.snr_db.is_finite() {
            return bad(format!("snr_db must be finite, got {}", self.snr_db));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad(format!("decay must be in (0, 1], got {}", self.decay));
        }
        for (name, v) in [
            ("sigma_loc_m", self.sigma_loc_m),
            ("sigma_act_m", self.sigma_act_m),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        if self.algorithm == AlgorithmKind::Ura && self.ura_rows * self.ura_cols != self.n_rx {
            return bad(format!(
                "URA grid {}x{} does not hold {} drones",
                self.ura_rows, self.ura_cols, self.n_rx
            ));
        }
        Ok(())
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn tx_grid(&self) -> UniformGrid {
        UniformGrid::new(self.tx_rows, self.tx_cols, self.tx_spacing_m).expect("validated scenario")
    }

    /// Transmit antennas centered on the origin in the x = 0 plane.
    pub fn tx_positions(&self) -> Vec<Position3> {
        self.tx_grid().positions()
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            alpha: self.alpha,
            max_iterations: self.max_iterations,
            errors: ErrorModel {
                sigma_loc: self.sigma_loc_m,
                sigma_act: self.sigma_act_m,
            },
            snr_linear: self.snr_linear(),
            sinr_aggregate: self.sinr_aggregate,
        }
    }

    pub fn algorithm_params(&self) -> Result<Algorithm, ProtocolError> {
        Ok(match self.algorithm {
            AlgorithmKind::Gd => Algorithm::Gd(GdParams::new(self.gd_step_m, self.decay)?),
            AlgorithmKind::Bf => Algorithm::Bf(BfParams::new(self.bf_step_m, self.decay)?),
            AlgorithmKind::Ura => Algorithm::Ura(UraParams {
                tx_grid: self.tx_grid(),
                rx_rows: self.ura_rows,
                rx_cols: self.ura_cols,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let s = Scenario::default();
        assert_eq!(
            (s.tx_rows, s.tx_cols, s.tx_spacing_m, s.n_rx),
            (4, 4, 0.25, 16)
        );
        assert!((s.wavelength_m - 0.005).abs() < 1e-5);
        assert_eq!((s.alpha, s.snr_db), (0.95, 10.0));
        assert_eq!((s.gd_step_m, s.bf_step_m, s.decay), (0.05, 0.3, 0.999));
        assert_eq!((s.cube_side_m, s.range_m), (50.0, 1000.0));
        s.validate().unwrap();
    }

    #[test]
    fn config_overrides() {
        let s = Scenario::from_config_str(
            "# desk run\nalgorithm = bf\nsigma_act_m = 0.01   # meters\n\nfrequency_hz = 30e9\nsinr_aggregate = \"first_stream\"\n",
        )
        .unwrap();
        assert_eq!(s.algorithm, AlgorithmKind::Bf);
        assert_eq!(s.sigma_act_m, 0.01);
        assert!((s.wavelength_m - 0.00999308).abs() < 1e-7);
        assert_eq!(s.sinr_aggregate, SinrAggregate::FirstStream);
        assert_eq!(s.gd_step_m, 0.05);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            Scenario::from_config_str("nonsense = 1"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(Scenario::from_config_str("alpha 0.5").is_err());
        assert!(Scenario::from_config_str("\nalgorithm = sgd").is_err());
        assert!(Scenario::from_config_str("n_rx = -3").is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let mut s = Scenario::default();
        s.algorithm = AlgorithmKind::Ura;
        s.sigma_loc_m = 3e-4;
        s.seed = 1234;
        let text: String = s
            .manifest()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        assert_eq!(Scenario::from_config_str(&text).unwrap(), s);
    }

    #[test]
    fn validation() {
        let mut s = Scenario::default();
        s.n_rx = 8;
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.algorithm = AlgorithmKind::Ura;
        s.ura_cols = 3;
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.alpha = -0.1;
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.cube_side_m = 3000.0;
        assert!(s.validate().is_err());
    }
}
