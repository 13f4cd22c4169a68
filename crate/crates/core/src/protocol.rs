//! Master/drone iteration loops for the three placement strategies.
//!
//! A run owns its random stream and is strictly sequential: drones update in
//! ascending index order and the master evaluates the stopping criterion after
//! every full sweep. CSI is measured without estimation noise; only
//! localization and actuation errors are injected.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::channel::{
    assemble, assemble_with_amplitude, inverse_condition_number, off_diagonal_energy, path_gain,
    ArrayGeometry, ChannelError, ChannelMatrix, Position3,
};
use crate::combining::{CombiningError, NoiseModel, SinrAggregate, SinrReport};
use crate::optimizers::{
    bf_probe_set, bf_select, gd_step, gradient_from_partial_gram, ura_targets, BfParams, GdParams,
    OptimizerError, UniformGrid, UraPlan,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Combining(#[from] CombiningError),
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// Per-axis standard deviations of zero-mean Gaussian localization and
/// actuation errors, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorModel {
    pub sigma_loc: f64,
    pub sigma_act: f64,
}

impl ErrorModel {
    pub fn new(sigma_loc: f64, sigma_act: f64) -> Result<Self, ProtocolError> {
        for (name, v) in [("sigma_loc", sigma_loc), ("sigma_act", sigma_act)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ProtocolError::Config(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(ErrorModel {
            sigma_loc,
            sigma_act,
        })
    }

    pub fn none() -> Self {
        ErrorModel::default()
    }
}

/// Ground truth plus per-drone bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmWorld {
    pub geom: ArrayGeometry,
    /// Latest position estimate of each drone, `None` until it localizes.
    pub believed_rx: Vec<Option<Position3>>,
    pub initial_rx: Vec<Position3>,
    /// Cumulative path length per drone.
    pub traveled: Vec<f64>,
    /// Sum over iterations of each drone's net per-iteration displacement.
    pub net_traveled: Vec<f64>,
}

impl SwarmWorld {
    pub fn new(geom: ArrayGeometry) -> Result<Self, ProtocolError> {
        geom.validate()?;
        let n = geom.n_rx();
        Ok(SwarmWorld {
            initial_rx: geom.rx_positions.clone(),
            believed_rx: vec![None; n],
            traveled: vec![0.0; n],
            net_traveled: vec![0.0; n],
            geom,
        })
    }

    pub fn n_drones(&self) -> usize {
        self.geom.n_rx()
    }

    pub fn mean_traveled(&self) -> f64 {
        self.traveled.iter().sum::<f64>() / self.traveled.len() as f64
    }

    fn mean_net_traveled(&self) -> f64 {
        self.net_traveled.iter().sum::<f64>() / self.net_traveled.len() as f64
    }
}

/// Channel as all drones would measure it: built from true positions.
pub fn measure_csi(world: &SwarmWorld) -> ChannelMatrix {
    assemble(&world.geom)
}

fn gaussian3<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Position3 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Position3::new(sigma * x, sigma * y, sigma * z)
}

/// Drone-side position estimate: truth plus `N(0, σ_loc²)` per axis.
///
/// Always draws three normals, so runs that differ only in `σ_loc` share
/// their random stream.
pub fn observe_position<R: Rng + ?Sized>(
    true_pos: &Position3,
    errors: ErrorModel,
    rng: &mut R,
) -> Position3 {
    let noise = gaussian3(errors.sigma_loc, rng);
    if errors.sigma_loc == 0.0 {
        *true_pos
    } else {
        true_pos + noise
    }
}

/// Executes a motion command. A zero command is no actuation at all: the
/// drone does not move and no noise is drawn. Returns the realized
/// displacement.
pub fn apply_actuation<R: Rng + ?Sized>(
    world: &mut SwarmWorld,
    drone: usize,
    command: &Position3,
    errors: ErrorModel,
    rng: &mut R,
) -> Position3 {
    if *command == Position3::zeros() {
        return Position3::zeros();
    }
    let realized = command + gaussian3(errors.sigma_act, rng);
    world.geom.rx_positions[drone] += realized;
    world.traveled[drone] += realized.norm();
    realized
}

/// True iff `ICN(H) ≥ alpha`.
pub fn meets_criterion(h: &ChannelMatrix, alpha: f64) -> bool {
    inverse_condition_number(h) >= alpha
}

/// Metrics recorded after each outer iteration (iteration 0 is the initial
/// placement). `objective` is evaluated on the unit-amplitude channel.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iteration: u32,
    pub icn: f64,
    pub objective: f64,
    pub sinr_zf_db: f64,
    pub sinr_nv_db: f64,
    pub sinr_mf_db: f64,
    pub mean_traveled_m: f64,
    pub per_drone_traveled_m: Vec<f64>,
    pub mean_net_traveled_m: f64,
}

/// Settings shared by all three loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub max_iterations: u32,
    pub errors: ErrorModel,
    /// Linear per-receive-antenna SNR after path loss.
    pub snr_linear: f64,
    pub sinr_aggregate: SinrAggregate,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ProtocolError::Config(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.max_iterations == 0 {
            return Err(ProtocolError::Config("max_iterations must be >= 1".into()));
        }
        NoiseModel::from_snr(1.0, self.snr_linear)?;
        ErrorModel::new(self.errors.sigma_loc, self.errors.sigma_act)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UraParams {
    pub tx_grid: UniformGrid,
    pub rx_rows: usize,
    pub rx_cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Gd(GdParams),
    Bf(BfParams),
    Ura(UraParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub position_observations: u64,
    pub actuations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub initial: IterationTrace,
    pub trace: Vec<IterationTrace>,
    /// Unit-amplitude channels at the start and end of the run.
    pub initial_channel: ChannelMatrix,
    pub final_channel: ChannelMatrix,
    pub converged: bool,
    pub stats: RunStats,
    pub world: SwarmWorld,
}

/// One brute-force decision, reported to [`RunObserver::bf_decision`].
#[derive(Debug, Clone, PartialEq)]
pub struct BfDecision {
    pub iteration: u32,
    pub drone: usize,
    pub probe_objectives: [f64; 7],
    pub chosen: usize,
    /// Objective measured after the chosen move was executed.
    pub objective_after: f64,
}

/// Instrumentation hooks; every method defaults to a no-op.
pub trait RunObserver {
    fn position_observed(&mut self, _drone: usize) {}
    fn bf_decision(&mut self, _decision: &BfDecision) {}
    fn iteration_done(&mut self, _trace: &IterationTrace) {}
}

pub struct NoObserver;

impl RunObserver for NoObserver {}

/// Mutable state of one run.
struct Session<'a, R: Rng + ?Sized, O: RunObserver + ?Sized> {
    world: SwarmWorld,
    csi: ChannelMatrix,
    gram: DMatrix<Complex64>,
    cfg: RunConfig,
    noise: NoiseModel,
    rng: &'a mut R,
    observer: &'a mut O,
    stats: RunStats,
}

impl<'a, R: Rng + ?Sized, O: RunObserver + ?Sized> Session<'a, R, O> {
    fn start(
        world: SwarmWorld,
        cfg: RunConfig,
        rng: &'a mut R,
        observer: &'a mut O,
    ) -> Result<Self, ProtocolError> {
        cfg.validate()?;
        world.geom.validate()?;
        let csi = assemble_with_amplitude(&world.geom, 1.0);
        let gram = csi.gram();
        Ok(Session {
            world,
            csi,
            gram,
            noise: NoiseModel::from_snr(1.0, cfg.snr_linear)?,
            cfg,
            rng,
            observer,
            stats: RunStats::default(),
        })
    }

    fn observe_all(&mut self) {
        for d in 0..self.world.n_drones() {
            let estimate =
                observe_position(&self.world.geom.rx_positions[d], self.cfg.errors, self.rng);
            self.world.believed_rx[d] = Some(estimate);
            self.stats.position_observations += 1;
            self.observer.position_observed(d);
        }
    }

    fn actuate(&mut self, drone: usize, command: &Position3) {
        if *command != Position3::zeros() {
            self.stats.actuations += 1;
        }
        apply_actuation(&mut self.world, drone, command, self.cfg.errors, self.rng);
    }

    fn believed(&self, drone: usize) -> Position3 {
        self.world.believed_rx[drone].expect("drone localized before use")
    }

    /// Gram matrix with drone `m`'s row removed.
    fn partial_gram(&self, m: usize) -> DMatrix<Complex64> {
        let mut partial = self.gram.clone();
        let row = self.csi.entries().row(m);
        subtract_outer(&mut partial, row.iter());
        partial
    }

    /// Re-measures drone `m`'s row and folds it back into the Gram matrix.
    fn broadcast_row(&mut self, m: usize, partial: DMatrix<Complex64>) {
        self.csi.refresh_row(&self.world.geom, m);
        self.gram = partial;
        add_outer(&mut self.gram, self.csi.entries().row(m).iter());
    }

    fn snapshot(&self, iteration: u32) -> IterationTrace {
        let report = SinrReport::from_gram(&self.csi, &self.gram, self.noise);
        let (zf, nv, mf) = report.aggregate_db(self.cfg.sinr_aggregate);
        IterationTrace {
            iteration,
            icn: inverse_condition_number(&self.csi),
            objective: off_diagonal_energy(&self.gram),
            sinr_zf_db: zf,
            sinr_nv_db: nv,
            sinr_mf_db: mf,
            mean_traveled_m: self.world.mean_traveled(),
            per_drone_traveled_m: self.world.traveled.clone(),
            mean_net_traveled_m: self.world.mean_net_traveled(),
        }
    }

    fn run<F>(mut self, mut sweep: F) -> Result<RunOutput, ProtocolError>
    where
        F: FnMut(&mut Self, u32) -> Result<(), ProtocolError>,
    {
        let initial_channel = self.csi.clone();
        let initial = self.snapshot(0);
        let mut trace = Vec::new();
        let mut converged = false;
        for iteration in 1..=self.cfg.max_iterations {
            let before = self.world.geom.rx_positions.clone();
            sweep(&mut self, iteration)?;
            // Rebuild from scratch once per sweep so incremental updates
            // cannot drift.
            self.csi = assemble_with_amplitude(&self.world.geom, 1.0);
            self.gram = self.csi.gram();
            for (d, start) in before.iter().enumerate() {
                self.world.net_traveled[d] += (self.world.geom.rx_positions[d] - start).norm();
            }
            let snap = self.snapshot(iteration);
            self.observer.iteration_done(&snap);
            let done = snap.icn >= self.cfg.alpha;
            trace.push(snap);
            if done {
                converged = true;
                break;
            }
        }
        Ok(RunOutput {
            initial,
            trace,
            initial_channel,
            final_channel: self.csi,
            converged,
            stats: self.stats,
            world: self.world,
        })
    }
}

fn subtract_outer<'r>(
    gram: &mut DMatrix<Complex64>,
    row: impl Iterator<Item = &'r Complex64> + Clone,
) {
    let row: Vec<Complex64> = row.copied().collect();
    for k in 0..row.len() {
        for l in 0..row.len() {
            gram[(l, k)] -= row[l].conj() * row[k];
        }
    }
}

fn add_outer<'r>(gram: &mut DMatrix<Complex64>, row: impl Iterator<Item = &'r Complex64>) {
    let row: Vec<Complex64> = row.copied().collect();
    for k in 0..row.len() {
        for l in 0..row.len() {
            gram[(l, k)] += row[l].conj() * row[k];
        }
    }
}

/// Objective of a channel whose Gram matrix without row `m` is `partial` and
/// whose row `m` is `row`.
fn objective_with_row(partial: &DMatrix<Complex64>, row: &[Complex64]) -> f64 {
    let n = row.len();
    let mut total = 0.0;
    for k in 1..n {
        for l in 0..k {
            total += (partial[(l, k)] + row[l].conj() * row[k]).norm_sqr();
        }
    }
    2.0 * total
}

/// Unit-amplitude channel row of drone `m`, written into `row`.
fn unit_row_into(geom: &ArrayGeometry, m: usize, row: &mut [Complex64]) {
    let q = geom.rx_positions[m];
    for (slot, p) in row.iter_mut().zip(&geom.tx_positions) {
        *slot = path_gain(1.0, geom.wavelength, p, &q);
    }
}

pub fn run_gd<R: Rng + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    params: GdParams,
    rng: &mut R,
) -> Result<RunOutput, ProtocolError> {
    run_gd_observed(world, cfg, params, rng, &mut NoObserver)
}

/// Gradient descent: localize everyone, then each drone in turn steps along
/// the negative gradient computed at its believed position from the shared
/// CSI, and re-broadcasts its row.
pub fn run_gd_observed<R: Rng + ?Sized, O: RunObserver + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    params: GdParams,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunOutput, ProtocolError> {
    let session = Session::start(world, *cfg, rng, observer)?;
    session.run(|s, iteration| {
        s.observe_all();
        for m in 0..s.world.n_drones() {
            let partial = s.partial_gram(m);
            let grad = gradient_from_partial_gram(&s.believed(m), &s.world.geom, 1.0, &partial, m)?;
            let command = gd_step(&grad, params, iteration - 1);
            s.actuate(m, &command);
            s.broadcast_row(m, partial);
        }
        Ok(())
    })
}

pub fn run_bf<R: Rng + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    params: BfParams,
    rng: &mut R,
) -> Result<RunOutput, ProtocolError> {
    run_bf_observed(world, cfg, params, rng, &mut NoObserver)
}

/// Brute force: each drone physically tries the six axis probes (out and
/// back), measures the objective at each, and keeps the best of the seven
/// candidates including staying put. Never localizes.
pub fn run_bf_observed<R: Rng + ?Sized, O: RunObserver + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    params: BfParams,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunOutput, ProtocolError> {
    let probes = bf_probe_set();
    let session = Session::start(world, *cfg, rng, observer)?;
    session.run(|s, iteration| {
        let step = params.step_at(iteration - 1);
        for m in 0..s.world.n_drones() {
            let partial = s.partial_gram(m);
            let here: Vec<Complex64> = s.csi.entries().row(m).iter().copied().collect();
            let mut probed = here.clone();
            let mut objectives = [0.0; 7];
            objectives[0] = objective_with_row(&partial, &here);
            for (slot, probe) in probes.iter().enumerate().skip(1) {
                let command = step * probe.unit();
                s.actuate(m, &command);
                unit_row_into(&s.world.geom, m, &mut probed);
                objectives[slot] = objective_with_row(&partial, &probed);
                s.actuate(m, &-command);
            }
            let chosen = bf_select(&objectives);
            s.actuate(m, &(step * probes[chosen].unit()));
            s.broadcast_row(m, partial);
            let decision = BfDecision {
                iteration,
                drone: m,
                probe_objectives: objectives,
                chosen,
                objective_after: off_diagonal_energy(&s.gram),
            };
            s.observer.bf_decision(&decision);
        }
        Ok(())
    })
}

pub fn run_ura<R: Rng + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    params: UraParams,
    rng: &mut R,
) -> Result<RunOutput, ProtocolError> {
    run_ura_observed(world, cfg, params, rng, &mut NoObserver)
}

/// Baseline: plan a Rayleigh-spaced URA from the first position estimates,
/// assign drones to targets by minimum total distance, then every iteration
/// each drone re-localizes and flies the remaining vector to its target.
pub fn run_ura_observed<R: Rng + ?Sized, O: RunObserver + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    params: UraParams,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunOutput, ProtocolError> {
    if params.tx_grid.len() != world.geom.n_tx() {
        return Err(ProtocolError::Config(format!(
            "transmit grid has {} antennas, geometry has {}",
            params.tx_grid.len(),
            world.geom.n_tx()
        )));
    }
    let session = Session::start(world, *cfg, rng, observer)?;
    let mut plan: Option<UraPlan> = None;
    session.run(|s, _iteration| {
        s.observe_all();
        let believed: Vec<Position3> = (0..s.world.n_drones()).map(|d| s.believed(d)).collect();
        if plan.is_none() {
            let estimated = ArrayGeometry {
                rx_positions: believed.clone(),
                ..s.world.geom.clone()
            };
            let targets = ura_targets(&estimated, &params.tx_grid, params.rx_rows, params.rx_cols)?;
            plan = Some(UraPlan::new(&believed, targets));
        }
        let plan = plan.as_ref().expect("plan set above");
        for (m, estimate) in believed.iter().enumerate() {
            let command = plan.target_of(m) - estimate;
            s.actuate(m, &command);
        }
        Ok(())
    })
}

/// Dispatches to the loop for `algorithm`.
pub fn run_algorithm<R: Rng + ?Sized>(
    world: SwarmWorld,
    cfg: &RunConfig,
    algorithm: Algorithm,
    rng: &mut R,
) -> Result<RunOutput, ProtocolError> {
    match algorithm {
        Algorithm::Gd(p) => run_gd(world, cfg, p, rng),
        Algorithm::Bf(p) => run_bf(world, cfg, p, rng),
        Algorithm::Ura(p) => run_ura(world, cfg, p, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channel, objective};
    use crate::optimizers::assignment_cost;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> UniformGrid {
        UniformGrid::new(4, 4, 0.25).unwrap()
    }

    fn world(seed: u64, side: f64) -> SwarmWorld {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rx = (0..16)
            .map(|_| {
                Position3::new(
                    1000.0 + rng.random_range(-side / 2.0..side / 2.0),
                    rng.random_range(-side / 2.0..side / 2.0),
                    rng.random_range(-side / 2.0..side / 2.0),
                )
            })
            .collect();
        SwarmWorld::new(ArrayGeometry::new(grid().positions(), rx, 0.0049965, 1000.0).unwrap())
            .unwrap()
    }

    fn cfg(errors: ErrorModel, max_iterations: u32) -> RunConfig {
        RunConfig {
            alpha: 0.95,
            max_iterations,
            errors,
            snr_linear: 10.0,
            sinr_aggregate: SinrAggregate::MeanDb,
        }
    }

    fn ura_params() -> UraParams {
        UraParams {
            tx_grid: grid(),
            rx_rows: 4,
            rx_cols: 4,
        }
    }

    #[test]
    fn csi_follows_truth_only() {
        let mut w = world(1, 50.0);
        let h = measure_csi(&w);
        assert_eq!(h, build_channel(&w.geom).unwrap());
        w.believed_rx = vec![Some(Position3::new(1.0, 2.0, 3.0)); 16];
        assert_eq!(measure_csi(&w), h);
        assert_eq!(measure_csi(&w), measure_csi(&w));
    }

    #[test]
    fn observation_noise() {
        let p = Position3::new(1000.0, 3.0, -4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(observe_position(&p, ErrorModel::none(), &mut rng), p);

        let errors = ErrorModel::new(0.01, 0.0).unwrap();
        let n = 100_000;
        let mut sum = Position3::zeros();
        let mut sq = Position3::zeros();
        for _ in 0..n {
            let e = observe_position(&p, errors, &mut rng) - p;
            sum += e;
            sq += e.component_mul(&e);
        }
        for axis in 0..3 {
            let mean = sum[axis] / n as f64;
            let std = (sq[axis] / n as f64 - mean * mean).sqrt();
            assert!((std - 0.01).abs() < 0.02 * 0.01, "axis {axis}: {std}");
        }

        let mut a = ChaCha8Rng::seed_from_u64(77);
        let mut b = ChaCha8Rng::seed_from_u64(77);
        assert_eq!(
            observe_position(&p, errors, &mut a),
            observe_position(&p, errors, &mut b)
        );
    }

    #[test]
    fn actuation_rules() {
        let mut w = world(2, 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = w.geom.rx_positions[3];
        apply_actuation(&mut w, 3, &Position3::x(), ErrorModel::none(), &mut rng);
        assert_eq!(w.geom.rx_positions[3], start + Position3::x());
        assert_eq!(w.traveled[3], 1.0);

        let noisy = ErrorModel::new(0.0, 0.5).unwrap();
        let before = w.clone();
        let mut probe = rng.clone();
        apply_actuation(&mut w, 3, &Position3::zeros(), noisy, &mut rng);
        assert_eq!(w, before);
        // No random draws were consumed either.
        assert_eq!(rng.random::<u64>(), probe.random::<u64>());
    }

    #[test]
    fn actuation_error_radial_mean() {
        // Mean norm of a 3D isotropic Gaussian: σ √(8/π).
        let sigma = 0.05;
        let errors = ErrorModel::new(0.0, sigma).unwrap();
        let mut w = world(3, 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut total = 0.0;
        for _ in 0..n {
            let start = w.geom.rx_positions[0];
            apply_actuation(&mut w, 0, &Position3::x(), errors, &mut rng);
            total += (w.geom.rx_positions[0] - start - Position3::x()).norm();
            w.geom.rx_positions[0] = start;
        }
        let expected = sigma * (8.0 / std::f64::consts::PI).sqrt();
        assert!((total / n as f64 - expected).abs() < 0.02 * expected);
    }

    #[test]
    fn criterion_boundary() {
        let diag = |a: f64| {
            ChannelMatrix::from_entries(
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(a, 0.0),
                ])),
                1.0,
            )
            .unwrap()
        };
        assert!(meets_criterion(&diag(0.96), 0.95));
        assert!(meets_criterion(&diag(0.5), 0.5));
        assert!(!meets_criterion(&diag(0.94), 0.95));
        assert!(meets_criterion(&diag(0.0), 0.0));
    }

    #[test]
    fn objective_with_row_matches_full_evaluation() {
        let w = world(4, 50.0);
        let h = assemble_with_amplitude(&w.geom, 1.0);
        let mut partial = h.gram();
        subtract_outer(&mut partial, h.entries().row(5).iter());
        let row: Vec<Complex64> = h.entries().row(5).iter().copied().collect();
        assert_relative_eq!(
            objective_with_row(&partial, &row),
            objective(&h),
            max_relative = 1e-12
        );
        let mut probed = vec![Complex64::new(0.0, 0.0); 16];
        unit_row_into(&w.geom, 5, &mut probed);
        assert_eq!(probed, row);
    }

    #[test]
    fn gd_is_deterministic_and_accounts_distance() {
        let errors = ErrorModel::new(0.001, 0.001).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_gd(
                world(5, 50.0),
                &cfg(errors, 20),
                GdParams::new(0.05, 0.999).unwrap(),
                &mut rng,
            )
            .unwrap()
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(a, b);
        assert!(a.trace.len() <= 20);
        let mut last = vec![0.0; 16];
        for t in &a.trace {
            assert!((0.0..=1.0).contains(&t.icn));
            assert!(t.sinr_mf_db >= t.sinr_zf_db.max(t.sinr_nv_db) - 1e-6);
            for d in 0..16 {
                assert!(t.per_drone_traveled_m[d] >= last[d]);
            }
            last.clone_from(&t.per_drone_traveled_m);
        }
        for d in 0..16 {
            let net = (a.world.geom.rx_positions[d] - a.world.initial_rx[d]).norm();
            assert!(a.world.traveled[d] >= net - 1e-12);
        }
        assert_eq!(a.stats.position_observations, 16 * a.trace.len() as u64);
    }

    /// 2×2 link whose path difference is exactly a quarter wavelength, so
    /// the channel is orthogonal and the gradient vanishes.
    fn orthogonal_pair() -> SwarmWorld {
        let (lambda, range, t) = (0.005, 1000.0, 0.125);
        let k = 2.0 * std::f64::consts::PI / lambda;
        let p1 = Position3::new(0.0, -t, 0.0);
        let p2 = Position3::new(0.0, t, 0.0);
        let excess = |y: f64| {
            let a = Position3::new(range, y, 0.0);
            k * ((p1 - a).norm() - (p2 - a).norm()) - std::f64::consts::FRAC_PI_2
        };
        let (mut lo, mut hi) = (1.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) * excess(lo) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let y = 0.5 * (lo + hi);
        let rx = vec![
            Position3::new(range, -y, 0.0),
            Position3::new(range, y, 0.0),
        ];
        SwarmWorld::new(ArrayGeometry::new(vec![p1, p2], rx, lambda, range).unwrap()).unwrap()
    }

    #[test]
    fn gd_stops_after_first_sweep_when_already_orthogonal() {
        let w = orthogonal_pair();
        let start = w.geom.rx_positions.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = run_gd(
            w,
            &cfg(ErrorModel::none(), 100),
            GdParams::new(0.05, 0.999).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert!(out.initial.icn > 0.999_999);
        assert_eq!(out.trace.len(), 1);
        assert!(out.converged);
        for (a, b) in start.iter().zip(&out.world.geom.rx_positions) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn gd_stops_after_first_sweep_from_ura_with_small_step() {
        let mut w = world(6, 50.0);
        let placed = ura_targets(&w.geom, &grid(), 4, 4).unwrap();
        w = SwarmWorld::new(ArrayGeometry {
            rx_positions: placed,
            ..w.geom
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = run_gd(
            w,
            &cfg(ErrorModel::none(), 100),
            GdParams::new(1e-4, 0.999).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert!(out.initial.icn >= 0.99);
        assert_eq!(out.trace.len(), 1);
        assert!(out.trace[0].mean_traveled_m > 0.0);
    }

    #[test]
    fn gd_converges_on_default_setup() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = run_gd(
            world(7, 50.0),
            &cfg(ErrorModel::none(), 5000),
            GdParams::new(0.05, 0.999).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert!(out.converged, "final icn {}", out.trace.last().unwrap().icn);
        assert!(out.trace.last().unwrap().icn >= 0.95);
    }

    #[test]
    fn gd_objective_eventually_nonincreasing() {
        // α = 1 keeps the run going after it settles into a basin.
        let mut c = cfg(ErrorModel::none(), 3000);
        c.alpha = 1.0;
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = run_gd(
                world(20 + seed, 50.0),
                &c,
                GdParams::new(0.05, 0.999).unwrap(),
                &mut rng,
            )
            .unwrap();
            let f: Vec<f64> = out.trace.iter().map(|t| t.objective).collect();
            assert_eq!(f.len(), 3000);
            for (i, w) in f[1500..].windows(2).enumerate() {
                assert!(
                    w[1] <= w[0] + 1e-9 * f[0],
                    "seed {seed}, iteration {}: {} -> {}",
                    1501 + i,
                    w[0],
                    w[1]
                );
            }
        }
    }

    struct BfLog {
        decisions: Vec<BfDecision>,
        observations: usize,
    }

    impl RunObserver for BfLog {
        fn position_observed(&mut self, _drone: usize) {
            self.observations += 1;
        }
        fn bf_decision(&mut self, d: &BfDecision) {
            self.decisions.push(d.clone());
        }
    }

    #[test]
    fn bf_never_localizes_and_never_worsens_without_noise() {
        let mut log = BfLog {
            decisions: Vec::new(),
            observations: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = run_bf_observed(
            world(8, 50.0),
            &cfg(ErrorModel::none(), 30),
            BfParams::new(0.3, 0.999).unwrap(),
            &mut rng,
            &mut log,
        )
        .unwrap();
        assert_eq!(log.observations, 0);
        assert_eq!(out.stats.position_observations, 0);
        assert!(out.world.believed_rx.iter().all(Option::is_none));
        assert_eq!(log.decisions.len(), 16 * out.trace.len());
        for d in &log.decisions {
            let stay = d.probe_objectives[0];
            assert!(d.objective_after <= stay * (1.0 + 1e-9), "{d:?}");
            assert!((d.objective_after - d.probe_objectives[d.chosen]).abs() <= 1e-9 * stay);
        }
    }

    #[test]
    fn bf_distance_per_iteration_is_bounded() {
        let params = BfParams::new(0.3, 0.999).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = run_bf(
            world(9, 50.0),
            &cfg(ErrorModel::none(), 25),
            params,
            &mut rng,
        )
        .unwrap();
        let mut prev = vec![0.0; 16];
        for t in &out.trace {
            let bound = 13.0 * params.step_at(t.iteration - 1);
            for d in 0..16 {
                let step = t.per_drone_traveled_m[d] - prev[d];
                assert!(step <= bound + 1e-9, "{step} > {bound}");
            }
            prev.clone_from(&t.per_drone_traveled_m);
        }
    }

    #[test]
    fn ura_without_errors_converges_in_one_move() {
        let w = world(10, 50.0);
        let start = w.geom.rx_positions.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = run_ura(w, &cfg(ErrorModel::none(), 50), ura_params(), &mut rng).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert!(out.trace[0].icn >= 0.99);
        let geom =
            ArrayGeometry::new(grid().positions(), start.clone(), 0.0049965, 1000.0).unwrap();
        let targets = ura_targets(&geom, &grid(), 4, 4).unwrap();
        let plan = UraPlan::new(&start, targets.clone());
        let cost = assignment_cost(&start, &targets, &plan.assignment);
        assert_relative_eq!(
            out.world.traveled.iter().sum::<f64>(),
            cost,
            max_relative = 1e-12
        );
    }

    #[test]
    fn ura_rejects_mismatched_grid() {
        let mut params = ura_params();
        params.tx_grid = UniformGrid::new(2, 2, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_ura(
            world(1, 50.0),
            &cfg(ErrorModel::none(), 5),
            params,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(ErrorModel::none(), 10);
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        c.alpha = 0.9;
        c.max_iterations = 0;
        assert!(c.validate().is_err());
        assert!(ErrorModel::new(-1.0, 0.0).is_err());
    }
}
