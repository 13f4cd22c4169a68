//! CSV tables. Each file starts with `# key = value` comment lines recording
//! the scenario and seeds that produced it.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use super::{Scenario, SweepResult};
use crate::protocol::IterationTrace;

pub const TRACE_HEADER: &str =
    "iteration,icn,objective,sinr_zf_db,sinr_nv_db,sinr_mf_db,mean_traveled_m";
pub const SWEEP_HEADER: &str = "algorithm,axis,sigma_m,n_trials,mean_final_sinr_nv_db,std_final_sinr_nv_db,mean_final_sinr_zf_db,mean_final_sinr_mf_db,mean_dist_to_icn050_m,mean_dist_to_icn095_m,converged_fraction";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u32,
    pub icn: f64,
    pub objective: f64,
    pub sinr_zf_db: f64,
    pub sinr_nv_db: f64,
    pub sinr_mf_db: f64,
    pub mean_traveled_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub algorithm: String,
    pub axis: String,
    pub sigma_m: f64,
    pub n_trials: usize,
    pub mean_final_sinr_nv_db: f64,
    pub std_final_sinr_nv_db: f64,
    pub mean_final_sinr_zf_db: f64,
    pub mean_final_sinr_mf_db: f64,
    pub mean_dist_to_icn050_m: f64,
    pub mean_dist_to_icn095_m: f64,
    pub converged_fraction: f64,
}

fn write_manifest<W: Write>(
    out: &mut W,
    kind: &str,
    scenario: &Scenario,
    extra: &[(&str, String)],
) -> io::Result<()> {
    writeln!(out, "# table = {kind}")?;
    for (k, v) in scenario.manifest().iter().chain(extra) {
        writeln!(out, "# {k} = {v}")?;
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_trace_csv<W: Write>(
    mut out: W,
    scenario: &Scenario,
    trace: &[IterationTrace],
) -> io::Result<()> {
    write_manifest(&mut out, "trace", scenario, &[])?;
    let mut w = csv::Writer::from_writer(out);
    for t in trace {
        w.serialize(TraceRecord {
            iteration: t.iteration,
            icn: t.icn,
            objective: t.objective,
            sinr_zf_db: t.sinr_zf_db,
            sinr_nv_db: t.sinr_nv_db,
            sinr_mf_db: t.sinr_mf_db,
            mean_traveled_m: t.mean_traveled_m,
        })
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_sweep_csv<W: Write>(mut out: W, result: &SweepResult) -> io::Result<()> {
    let n_trials = result.rows.first().map_or(0, |r| r.n_trials);
    let extra = [
        ("base_seed", result.base_seed.to_string()),
        (
            "seed_range",
            format!(
                "{}..{}",
                result.base_seed,
                result.base_seed + n_trials as u64
            ),
        ),
    ];
    write_manifest(&mut out, "sweep", &result.scenario, &extra)?;
    let mut w = csv::Writer::from_writer(out);
    for r in &result.rows {
        w.serialize(SweepRecord {
            algorithm: r.algorithm.to_string(),
            axis: r.axis.name().to_string(),
            sigma_m: r.sigma_m,
            n_trials: r.n_trials,
            mean_final_sinr_nv_db: r.mean_final_sinr_nv_db,
            std_final_sinr_nv_db: r.std_final_sinr_nv_db,
            mean_final_sinr_zf_db: r.mean_final_sinr_zf_db,
            mean_final_sinr_mf_db: r.mean_final_sinr_mf_db,
            mean_dist_to_icn050_m: r.mean_dist_to_icn050_m,
            mean_dist_to_icn095_m: r.mean_dist_to_icn095_m,
            converged_fraction: r.converged_fraction,
        })
        .map_err(csv_err)?;
    }
    w.flush()
}

fn read_records<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> io::Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(csv_err)
}

pub fn read_trace_csv<R: Read>(input: R) -> io::Result<Vec<TraceRecord>> {
    read_records(input)
}

pub fn read_sweep_csv<R: Read>(input: R) -> io::Result<Vec<SweepRecord>> {
    read_records(input)
}
