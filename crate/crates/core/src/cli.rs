//! Command-line front end: `run`, `mc`, `sweep` and `plot`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::experiments::{
    monte_carlo, plot_table, run_trial, sweep, write_sweep_csv, write_trace_csv, AlgorithmKind,
    PlotSpec, Scenario, SweepAxis, SweepResult, DEFAULT_SIGMA_AXIS,
};

/// Distributed UAV swarm placement for line-of-sight MIMO.
#[derive(Parser)]
#[command(name = "swarm-mimo", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single trial; writes the per-iteration trace.
    Run(RunArgs),
    /// Monte Carlo ensemble of one scenario; writes a one-row sweep table.
    Mc(McArgs),
    /// Error-std sweep across algorithms.
    Sweep(SweepArgs),
    /// Draw an SVG from a trace or sweep CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// `key = value` scenario file applied over the defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// gd, bf or ura
    #[arg(long)]
    algorithm: Option<AlgorithmKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// Localization error std per axis, meters
    #[arg(long)]
    sigma_loc: Option<f64>,
    /// Actuation error std per axis, meters
    #[arg(long)]
    sigma_act: Option<f64>,
    /// Stop once the inverse condition number reaches this value
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    max_iters: Option<u32>,
    #[arg(long)]
    snr_db: Option<f64>,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Scenario::from_config_str(&text)
                    .with_context(|| format!("in {}", path.display()))?
            }
            None => Scenario::default(),
        };
        if let Some(a) = self.algorithm {
            s.algorithm = a;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.sigma_loc {
            s.sigma_loc_m = v;
        }
        if let Some(v) = self.sigma_act {
            s.sigma_act_m = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.max_iters {
            s.max_iterations = v;
        }
        if let Some(v) = self.snr_db {
            s.snr_db = v;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output CSV (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// sigma_loc or sigma_act
    #[arg(long, default_value = "sigma_loc")]
    axis: String,
    /// Comma-separated sigma values in meters
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Comma-separated algorithms
    #[arg(long, value_delimiter = ',', default_value = "gd,bf,ura")]
    algorithms: Vec<AlgorithmKind>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Trace or sweep CSV
    input: PathBuf,
    /// x column (default: iteration for traces, sigma_m for sweeps)
    #[arg(long)]
    x: Option<String>,
    /// y column
    #[arg(long, default_value = "sinr_nv_db")]
    y: String,
    /// Logarithmic x axis (default for sweeps)
    #[arg(long)]
    log_x: Option<bool>,
    #[arg(long)]
    title: Option<String>,
    /// Output SVG
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file =
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

/// Runs one parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let s = args.scenario.scenario()?;
            let trial = run_trial(&s)?;
            emit(args.out.as_deref(), |w| {
                write_trace_csv(w, &s, &trial.full_trace())
            })?;
            let t = &trial.summary;
            eprintln!(
                "{}: {} after {} iterations, ICN {:.4}, NV SINR {:.2} dB",
                s.algorithm,
                if t.converged {
                    "converged"
                } else {
                    "not converged"
                },
                t.iterations,
                t.final_icn,
                t.final_sinr_nv_db
            );
        }
        Command::Mc(args) => {
            if args.trials == 0 {
                bail!("--trials must be >= 1");
            }
            let s = args.scenario.scenario()?;
            let axis = if s.sigma_loc_m == 0.0 && s.sigma_act_m > 0.0 {
                SweepAxis::SigmaAct
            } else {
                SweepAxis::SigmaLoc
            };
            let row = monte_carlo(&s, axis, args.trials, s.seed)?;
            let result = SweepResult {
                base_seed: s.seed,
                scenario: s,
                rows: vec![row],
            };
            emit(args.out.as_deref(), |w| write_sweep_csv(w, &result))?;
        }
        Command::Sweep(args) => {
            if args.trials == 0 {
                bail!("--trials must be >= 1");
            }
            let s = args.scenario.scenario()?;
            let Some(axis) = SweepAxis::parse(&args.axis) else {
                bail!("unknown axis {:?} (sigma_loc, sigma_act)", args.axis);
            };
            let values = args.values.unwrap_or_else(|| DEFAULT_SIGMA_AXIS.to_vec());
            let result = sweep(&s, axis, &values, &args.algorithms, args.trials, s.seed)?;
            emit(args.out.as_deref(), |w| write_sweep_csv(w, &result))?;
        }
        Command::Plot(args) => {
            let text = fs::read_to_string(&args.input)
                .with_context(|| format!("reading {}", args.input.display()))?;
            let is_sweep = text.lines().any(|l| l.trim() == "# table = sweep");
            let x = args
                .x
                .unwrap_or_else(|| if is_sweep { "sigma_m" } else { "iteration" }.to_string());
            let spec = PlotSpec {
                title: args.title.unwrap_or_else(|| format!("{} vs {x}", args.y)),
                log_x: args.log_x.unwrap_or(is_sweep),
                x,
                y: args.y,
            };
            plot_table(text.as_bytes(), &spec, &args.out)?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and executes them. Help and usage
/// errors come back as errors instead of exiting the process.
pub fn run_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    execute(Cli::try_parse_from(args)?)
}
