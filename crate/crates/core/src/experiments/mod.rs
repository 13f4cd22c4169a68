//! Scenarios, Monte Carlo ensembles and error sweeps.

mod output;
mod plot;
mod scenario;

pub use output::{
    read_sweep_csv, read_trace_csv, write_sweep_csv, write_trace_csv, SweepRecord, TraceRecord,
    SWEEP_HEADER, TRACE_HEADER,
};
pub use plot::{plot_table, PlotSpec};
pub use scenario::{AlgorithmKind, Scenario, ScenarioError};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{capacity, equal_singular_value_capacity, ArrayGeometry, Position3};
use crate::protocol::{run_algorithm, IterationTrace, ProtocolError, RunOutput, SwarmWorld};

/// Matches the default sweep of error standard deviations, in meters.
pub const DEFAULT_SIGMA_AXIS: [f64; 10] = [0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0];

/// Uniform draw of `n_rx` points in the scenario's cube.
pub fn sample_initial_positions<R: Rng + ?Sized>(
    scenario: &Scenario,
    rng: &mut R,
) -> Vec<Position3> {
    let half = scenario.cube_side_m / 2.0;
    let center = Position3::new(scenario.range_m, 0.0, 0.0);
    (0..scenario.n_rx)
        .map(|_| {
            center
                + Position3::new(
                    rng.random_range(-half..=half),
                    rng.random_range(-half..=half),
                    rng.random_range(-half..=half),
                )
        })
        .collect()
}

/// Per-trial quantities aggregated by [`monte_carlo`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub seed: u64,
    pub converged: bool,
    pub iterations: u32,
    pub initial_icn: f64,
    pub final_icn: f64,
    pub initial_sinr_zf_db: f64,
    pub initial_sinr_nv_db: f64,
    pub initial_sinr_mf_db: f64,
    pub final_sinr_zf_db: f64,
    pub final_sinr_nv_db: f64,
    pub final_sinr_mf_db: f64,
    /// Mean traveled distance when the ICN first reached 0.5 / 0.95.
    pub dist_to_icn050_m: Option<f64>,
    pub dist_to_icn095_m: Option<f64>,
    pub final_traveled_m: f64,
    pub final_net_traveled_m: f64,
    pub initial_capacity: f64,
    pub final_capacity: f64,
    /// Capacity of a perfectly conditioned channel with the final Frobenius norm.
    pub final_capacity_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub output: RunOutput,
    pub summary: TrialSummary,
}

impl Trial {
    /// Iteration 0 followed by every recorded iteration.
    pub fn full_trace(&self) -> Vec<IterationTrace> {
        std::iter::once(self.output.initial.clone())
            .chain(self.output.trace.iter().cloned())
            .collect()
    }
}

fn first_crossing(
    initial: &IterationTrace,
    trace: &[IterationTrace],
    threshold: f64,
) -> Option<f64> {
    std::iter::once(initial)
        .chain(trace)
        .find(|t| t.icn >= threshold)
        .map(|t| t.mean_traveled_m)
}

/// One seeded run of the scenario's algorithm from a fresh random placement.
pub fn run_trial(scenario: &Scenario) -> Result<Trial, ProtocolError> {
    scenario
        .validate()
        .map_err(|e| ProtocolError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let rx = sample_initial_positions(scenario, &mut rng);
    let geom = ArrayGeometry::new(
        scenario.tx_positions(),
        rx,
        scenario.wavelength_m,
        scenario.range_m,
    )?;
    let world = SwarmWorld::new(geom)?;
    let output = run_algorithm(
        world,
        &scenario.run_config(),
        scenario.algorithm_params()?,
        &mut rng,
    )?;

    let last = output.trace.last().unwrap_or(&output.initial);
    let snr = scenario.snr_linear();
    let summary = TrialSummary {
        seed: scenario.seed,
        converged: output.converged,
        iterations: last.iteration,
        initial_icn: output.initial.icn,
        final_icn: last.icn,
        initial_sinr_zf_db: output.initial.sinr_zf_db,
        initial_sinr_nv_db: output.initial.sinr_nv_db,
        initial_sinr_mf_db: output.initial.sinr_mf_db,
        final_sinr_zf_db: last.sinr_zf_db,
        final_sinr_nv_db: last.sinr_nv_db,
        final_sinr_mf_db: last.sinr_mf_db,
        dist_to_icn050_m: first_crossing(&output.initial, &output.trace, 0.5),
        dist_to_icn095_m: first_crossing(&output.initial, &output.trace, 0.95),
        final_traveled_m: last.mean_traveled_m,
        final_net_traveled_m: last.mean_net_traveled_m,
        initial_capacity: capacity(&output.initial_channel, snr),
        final_capacity: capacity(&output.final_channel, snr),
        final_capacity_bound: equal_singular_value_capacity(&output.final_channel, snr),
    };
    Ok(Trial { output, summary })
}

/// Which error standard deviation a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    SigmaLoc,
    SigmaAct,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SigmaLoc => "sigma_loc",
            SweepAxis::SigmaAct => "sigma_act",
        }
    }

    pub fn parse(s: &str) -> Option<SweepAxis> {
        match s {
            "sigma_loc" | "loc" => Some(SweepAxis::SigmaLoc),
            "sigma_act" | "act" => Some(SweepAxis::SigmaAct),
            _ => None,
        }
    }

    fn apply(self, scenario: &mut Scenario, sigma: f64) {
        match self {
            SweepAxis::SigmaLoc => scenario.sigma_loc_m = sigma,
            SweepAxis::SigmaAct => scenario.sigma_act_m = sigma,
        }
    }

    fn read(self, scenario: &Scenario) -> f64 {
        match self {
            SweepAxis::SigmaLoc => scenario.sigma_loc_m,
            SweepAxis::SigmaAct => scenario.sigma_act_m,
        }
    }
}

/// One row of a sweep table: aggregates over `n_trials` seeded trials.
///
/// A trial that never reaches an ICN threshold enters the threshold distance
/// mean with the distance it traveled before the run ended, so those means
/// are lower bounds whenever `converged_fraction < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: AlgorithmKind,
    pub axis: SweepAxis,
    pub sigma_m: f64,
    pub n_trials: usize,
    pub mean_final_sinr_nv_db: f64,
    pub std_final_sinr_nv_db: f64,
    pub mean_final_sinr_zf_db: f64,
    pub mean_final_sinr_mf_db: f64,
    pub mean_dist_to_icn050_m: f64,
    pub mean_dist_to_icn095_m: f64,
    pub converged_fraction: f64,
    pub trials: Vec<TrialSummary>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Population standard deviation.
fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values.iter().copied());
    mean(values.iter().map(|v| (v - m) * (v - m))).sqrt()
}

impl SweepRow {
    /// Recomputes every aggregate from the per-trial summaries.
    pub fn from_trials(
        algorithm: AlgorithmKind,
        axis: SweepAxis,
        sigma_m: f64,
        trials: Vec<TrialSummary>,
    ) -> SweepRow {
        let nv: Vec<f64> = trials.iter().map(|t| t.final_sinr_nv_db).collect();
        SweepRow {
            algorithm,
            axis,
            sigma_m,
            n_trials: trials.len(),
            mean_final_sinr_nv_db: mean(nv.iter().copied()),
            std_final_sinr_nv_db: std_dev(&nv),
            mean_final_sinr_zf_db: mean(trials.iter().map(|t| t.final_sinr_zf_db)),
            mean_final_sinr_mf_db: mean(trials.iter().map(|t| t.final_sinr_mf_db)),
            mean_dist_to_icn050_m: mean(
                trials
                    .iter()
                    .map(|t| t.dist_to_icn050_m.unwrap_or(t.final_traveled_m)),
            ),
            mean_dist_to_icn095_m: mean(
                trials
                    .iter()
                    .map(|t| t.dist_to_icn095_m.unwrap_or(t.final_traveled_m)),
            ),
            converged_fraction: trials.iter().filter(|t| t.converged).count() as f64
                / trials.len() as f64,
            trials,
        }
    }
}

/// Runs seeds `base_seed..base_seed + n_trials` in parallel and aggregates
/// them in seed order.
pub fn monte_carlo(
    scenario: &Scenario,
    axis: SweepAxis,
    n_trials: usize,
    base_seed: u64,
) -> Result<SweepRow, ProtocolError> {
    if n_trials == 0 {
        return Err(ProtocolError::Config("n_trials must be >= 1".into()));
    }
    let trials = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = scenario.clone();
            s.seed = base_seed + i;
            run_trial(&s).map(|t| t.summary)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepRow::from_trials(
        scenario.algorithm,
        axis,
        axis.read(scenario),
        trials,
    ))
}

/// Full sweep table, ordered by algorithm then sigma.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub base_seed: u64,
    pub scenario: Scenario,
    pub rows: Vec<SweepRow>,
}

/// One [`monte_carlo`] row per (algorithm, sigma) cell. All cells reuse the
/// same seeds, so they start from the same placements.
pub fn sweep(
    scenario: &Scenario,
    axis: SweepAxis,
    values: &[f64],
    algorithms: &[AlgorithmKind],
    n_trials: usize,
    base_seed: u64,
) -> Result<SweepResult, ProtocolError> {
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0))
        || values.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(ProtocolError::Config(
            "sweep values must be nonnegative and ascending".into(),
        ));
    }
    let cells: Vec<(AlgorithmKind, f64)> = algorithms
        .iter()
        .flat_map(|a| values.iter().map(move |v| (*a, *v)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|(algorithm, sigma)| {
            let mut s = scenario.clone();
            s.algorithm = *algorithm;
            axis.apply(&mut s, *sigma);
            monte_carlo(&s, axis, n_trials, base_seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        base_seed,
        scenario: scenario.clone(),
        rows,
    })
}
