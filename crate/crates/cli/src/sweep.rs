//! Regime map over a grid of (a, profile) cells.

use std::path::Path;

use gpj_core::{classify, solve_eta_with, EtaStatus, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ProfileSpec, SweepConfig};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub profile: String,
    pub gamma: f64,
    pub verdict: String,
    pub time_bound: Option<f64>,
    pub status: String,
    /// t* for a blow-up, the integration horizon otherwise.
    pub t_star_or_horizon: Option<f64>,
    pub min_bracket: Option<f64>,
    pub error: String,
}

fn cell(a: f64, spec: &ProfileSpec, cfg: &SweepConfig, base: &Path) -> SweepRow {
    let mut row = SweepRow {
        a,
        profile: spec.label(),
        gamma: spec.gamma,
        verdict: String::new(),
        time_bound: None,
        status: String::new(),
        t_star_or_horizon: None,
        min_bracket: None,
        error: String::new(),
    };
    let profile = match spec.build(base) {
        Ok(p) => p,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let params = match ModelParams::new(a) {
        Ok(m) => m,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    match classify(&profile, &params, cfg.n_improved) {
        Ok(r) => {
            row.verdict = r.verdict.to_string();
            row.time_bound = r.time_bound;
        }
        Err(e) => row.error = e.to_string(),
    }
    if params.is_minus_one() {
        row.status = "reached_t_end".into();
        row.t_star_or_horizon = Some(cfg.t_end);
        row.min_bracket = Some(1.0);
        return row;
    }
    match solve_eta_with(&profile, &params, cfg.t_end, &cfg.tolerances) {
        Ok(tr) => {
            row.status = tr.status().label().into();
            row.t_star_or_horizon = Some(tr.t_star().unwrap_or(tr.t_last()));
            row.min_bracket = tr.min_bracket().last().copied();
            if let EtaStatus::NumericalFailure { reason } = tr.status() {
                row.error = reason.clone();
            }
        }
        Err(e) => {
            row.status = "numerical_failure".into();
            row.error = e.to_string();
        }
    }
    row
}

/// Evaluates every cell with at most `workers` threads; rows come back in
/// (a, profile) input order.
pub fn sweep(cfg: &SweepConfig, base: &Path, workers: usize) -> Result<Vec<SweepRow>, CliError> {
    cfg.validate()?;
    let cells: Vec<(f64, &ProfileSpec)> =
        cfg.a_values.iter().flat_map(|&a| cfg.profiles.iter().map(move |p| (a, p))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|(a, p)| cell(*a, p, cfg, base)).collect()))
}

pub fn write_rows(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
