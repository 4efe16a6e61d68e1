//! The `simulate`, `classify`, `xcheck` and `oracle` commands.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use gpj_core::eta::{eta_rhs, BlowupMechanism};
use gpj_core::eulerian::{compare, evolve};
use gpj_core::profiles::ProfileSummary;
use gpj_core::reference::{self, OracleResult};
use gpj_core::{
    classify, solve_eta_with, BoundaryCondition, CriteriaReport, EtaStatus, EtaTrajectory, FlowMap, InitialProfile,
    ModelParams, ProfileKind,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{core_err, CliError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Label count of the Lagrangian snapshot interpolated in cross-checks.
const XCHECK_LABELS: usize = 257;

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub path: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDelta {
    pub name: String,
    pub t: f64,
    pub numeric: f64,
    pub closed_form: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct XcheckReport {
    pub t: f64,
    pub n: usize,
    pub cfl: f64,
    pub status: String,
    pub t_reached: f64,
    pub linf_u: Option<f64>,
    pub l2_u: Option<f64>,
    pub linf_ux: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub profile: ProfileSummary,
    pub criteria: CriteriaReport,
    pub verdict: String,
    pub status: String,
    pub t_star: Option<f64>,
    pub eta_star: Option<f64>,
    pub mechanism: Option<BlowupMechanism>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    /// Null when infinite.
    pub eta_crit: Option<f64>,
    pub t_last: f64,
    pub min_bracket_at_horizon: f64,
    pub trajectory: Option<String>,
    pub snapshots: Vec<SnapshotEntry>,
    pub skipped_snapshots: Vec<f64>,
    pub oracles: Vec<OracleDelta>,
    pub xcheck: Option<XcheckReport>,
}

impl Report {
    /// 4 on numerical failure, 0 otherwise (a detected blow-up is a result).
    pub fn exit_code(&self) -> i32 {
        let eul_failed = self.xcheck.as_ref().is_some_and(|x| x.status == "numerical_failure");
        if self.status == "numerical_failure" || eul_failed {
            4
        } else {
            0
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn create_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

fn write_trajectory(path: &Path, traj: Option<&EtaTrajectory>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["t", "eta", "eta_prime", "min_bracket"]).map_err(|e| io_err(path, e))?;
    if let Some(tr) = traj {
        for k in 0..tr.times().len() {
            w.serialize((tr.times()[k], tr.eta()[k], tr.eta_prime()[k], tr.min_bracket()[k])).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_snapshot(path: &Path, snap: &gpj_core::FlowSnapshot) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["xi", "F", "F_xi", "u", "u_x", "u_xx"]).map_err(|e| io_err(path, e))?;
    for k in 0..snap.xi.len() {
        w.serialize((snap.xi[k], snap.f[k], snap.f_xi[k], snap.u_hat[k], snap.ux_hat[k], snap.uxx_hat[k]))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(f, "{text}").map_err(|e| io_err(path, e))
}

/// Last time the solution is known on: t* for a blow-up, the final node otherwise.
fn horizon(traj: Option<&EtaTrajectory>, t_end: f64) -> f64 {
    traj.map_or(t_end, |tr| tr.t_star().unwrap_or(tr.t_last()))
}

fn solve(profile: &InitialProfile, params: &ModelParams, cfg: &RunConfig) -> Result<Option<EtaTrajectory>, CliError> {
    if params.is_minus_one() {
        return Ok(None);
    }
    solve_eta_with(profile, params, cfg.t_end, &cfg.tolerances).map(Some).map_err(core_err)
}

/// Closed-form values that apply to (profile, a) at time t.
pub fn closed_forms(profile: &InitialProfile, a: f64, t: f64) -> Result<Vec<OracleResult>, CliError> {
    let g = profile.gamma();
    let kind = profile.kind();
    let mut out = Vec::new();
    if a == -3.0 {
        let ts = reference::burgers_tstar(profile);
        out.push(OracleResult::new("burgers_t_star", ts, (0.0, f64::INFINITY)));
        if t < ts {
            out.push(OracleResult::new("burgers_eta", t, (0.0, ts)));
            out.push(OracleResult::new("burgers_flow_mid", reference::burgers_flow(profile, 0.5, t).map_err(core_err)?, (0.0, ts)));
        }
    }
    if a == -2.0 {
        let ts = reference::hs_tstar(profile).map_err(core_err)?;
        out.push(OracleResult::new("hs_t_star", ts, (0.0, f64::INFINITY)));
        if t < ts {
            out.push(OracleResult::new("hs_eta", reference::hs_eta(profile, t).map_err(core_err)?, (0.0, ts)));
            out.push(OracleResult::new("hs_flow_mid", reference::hs_flow(profile, 0.5, t).map_err(core_err)?, (0.0, ts)));
        }
    }
    if a == -1.0 {
        out.push(OracleResult::new("exp_flow_mid", reference::exp_flow(profile, 0.5, t).map_err(core_err)?, (0.0, f64::INFINITY)));
    }
    if a == 0.0 && kind == ProfileKind::Parabola {
        out.push(OracleResult::new("cc_eta", reference::cc_eta(g, t), (0.0, f64::INFINITY)));
        out.push(OracleResult::new("cc_flow_mid", reference::cc_flow(g, 0.5, t).map_err(core_err)?, (0.0, f64::INFINITY)));
    }
    if a == 1.0 && kind == ProfileKind::Cosine {
        out.push(OracleResult::new("cosine_eta", reference::cosine_eta_closed(g, t), (0.0, f64::INFINITY)));
    }
    if a == 1.0 && kind == ProfileKind::Parabola && g != 0.0 {
        let ts = reference::pj_psi_of_eta(g, 1.0 / g.abs()).map_err(core_err)?;
        out.push(OracleResult::new("pj_t_star", ts, (0.0, f64::INFINITY)));
    }
    Ok(out)
}

fn oracle_deltas(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    t_end: f64,
) -> Result<Vec<OracleDelta>, CliError> {
    let h = horizon(traj, t_end);
    let t = if traj.and_then(|tr| tr.t_star()).is_some() { 0.5 * h } else { h };
    let fm = FlowMap::for_params(profile, params, traj).map_err(core_err)?;
    let mut out = Vec::new();
    let mut push = |name: &str, t: f64, numeric: f64, closed: f64| {
        out.push(OracleDelta { name: name.into(), t, numeric, closed_form: closed, delta: (numeric - closed).abs() });
    };
    let t_star = traj.and_then(|tr| tr.t_star());
    for o in closed_forms(profile, params.a(), t)? {
        let numeric = match o.name.as_str() {
            "burgers_t_star" | "hs_t_star" | "pj_t_star" => match t_star {
                Some(ts) => ts,
                None => continue,
            },
            "burgers_eta" | "hs_eta" | "cc_eta" | "cosine_eta" => match traj {
                Some(tr) => tr.eta_at(t).map_err(core_err)?,
                None => continue,
            },
            // periodic flows are known only up to a translation
            _ if params.bc() != BoundaryCondition::Dirichlet => continue,
            _ => fm.flow(0.5, t).map_err(core_err)?,
        };
        push(&o.name, t, numeric, o.value);
    }
    if params.a() == 1.0 && profile.kind() == ProfileKind::Zigzag {
        if let Some(tr) = traj {
            let eta = tr.eta_at(t).map_err(core_err)?;
            let closed = reference::zigzag_eta_rhs_closed(profile.gamma(), 1.0, eta).map_err(core_err)?;
            push("zigzag_eta_rhs", t, eta_rhs(profile, params, eta).map_err(core_err)?, closed);
        }
    }
    Ok(out)
}

/// Runs the Eulerian solver to `t` and compares it with the Lagrangian flow there.
pub fn cross_check(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    t: f64,
    n: usize,
    cfl: f64,
) -> Result<(XcheckReport, Option<gpj_core::VorticityState>), CliError> {
    let mut rep =
        XcheckReport { t, n, cfl, status: String::new(), t_reached: 0.0, linf_u: None, l2_u: None, linf_ux: None, note: None };
    if params.bc() != BoundaryCondition::Dirichlet {
        rep.status = "skipped".into();
        rep.note = Some("cross-check runs only under Dirichlet conditions".into());
        return Ok((rep, None));
    }
    let run = evolve(profile, params, t, n, cfl).map_err(core_err)?;
    rep.status = run.status.label().into();
    rep.t_reached = run.last().t;
    if run.status == gpj_core::EulerianStatus::ReachedTEnd {
        let snap = FlowMap::for_params(profile, params, traj).map_err(core_err)?.sample(t, XCHECK_LABELS).map_err(core_err)?;
        let e = compare(&snap, run.last()).map_err(core_err)?;
        rep.linf_u = Some(e.linf_u);
        rep.l2_u = Some(e.l2_u);
        rep.linf_ux = Some(e.linf_ux);
    }
    Ok((rep, run.states.last().cloned()))
}

/// Cross-check time: t_end, or half the blow-up time when that comes first.
pub fn xcheck_time(traj: Option<&EtaTrajectory>, t_end: f64) -> f64 {
    match traj.and_then(|tr| tr.t_star()) {
        Some(ts) => t_end.min(0.5 * ts),
        None => t_end,
    }
}

/// classify → solve_eta → snapshots → optional cross-check, writing every output
/// under `out`.
pub fn simulate(cfg: &RunConfig, base: &Path, out: &Path) -> Result<Report, CliError> {
    cfg.validate()?;
    let profile = cfg.profile.build(base)?;
    let params = cfg.params()?;
    create_out_dir(out)?;

    let criteria = classify(&profile, &params, cfg.n_improved).map_err(core_err)?;
    let traj = solve(&profile, &params, cfg)?;
    let traj_ref = traj.as_ref();

    let traj_path = out.join(&cfg.outputs.trajectory);
    write_trajectory(&traj_path, traj_ref)?;

    let (status, t_star, eta_star, mechanism, failure_reason) = match traj_ref.map(|t| t.status()) {
        None | Some(EtaStatus::ReachedTEnd) => ("reached_t_end", None, None, None, None),
        Some(EtaStatus::Blowup { t_star, eta_star, mechanism }) => {
            ("blowup", Some(*t_star), Some(*eta_star), Some(*mechanism), None)
        }
        Some(EtaStatus::NumericalFailure { reason }) => ("numerical_failure", None, None, None, Some(reason.clone())),
    };
    let h = horizon(traj_ref, cfg.t_end);

    let mut snapshots = Vec::new();
    let mut skipped = Vec::new();
    if status != "numerical_failure" {
        let fm = FlowMap::for_params(&profile, &params, traj_ref).map_err(core_err)?;
        for (i, &t) in cfg.outputs.snapshot_times.iter().enumerate() {
            if traj_ref.is_some_and(|tr| tr.eval(t).is_err()) {
                log::warn!("snapshot at t = {t} skipped: solution known up to {h}");
                skipped.push(t);
                continue;
            }
            let snap = fm.sample(t, cfg.grid_n).map_err(core_err)?;
            let name = format!("snapshot_{i:03}.csv");
            write_snapshot(&out.join(&name), &snap)?;
            snapshots.push(SnapshotEntry { t, path: name });
        }
    }

    let oracles =
        if status == "numerical_failure" { Vec::new() } else { oracle_deltas(&profile, &params, traj_ref, cfg.t_end)? };

    let xcheck = if cfg.xcheck.enabled && status != "numerical_failure" {
        let t = xcheck_time(traj_ref, cfg.t_end);
        Some(cross_check(&profile, &params, traj_ref, t, cfg.xcheck.n, cfg.xcheck.cfl)?.0)
    } else {
        None
    };

    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        profile: profile.summary(),
        verdict: criteria.verdict.to_string(),
        criteria,
        status: status.into(),
        t_star,
        eta_star,
        mechanism,
        failure_reason,
        eta_crit: traj_ref.and_then(|tr| finite(tr.eta_crit())),
        t_last: traj_ref.map_or(cfg.t_end, |tr| tr.t_last()),
        min_bracket_at_horizon: traj_ref.and_then(|tr| tr.min_bracket().last().copied()).unwrap_or(1.0),
        trajectory: Some(cfg.outputs.trajectory.display().to_string()),
        snapshots,
        skipped_snapshots: skipped,
        oracles,
        xcheck,
    };
    write_json(&out.join(&cfg.outputs.report), &report)?;
    log::info!("a = {}: {} ({})", cfg.a, report.status, report.verdict);
    Ok(report)
}

/// Runs only the cross-check, writing `xcheck.csv` (final Eulerian state) and
/// `xcheck.json`.
pub fn xcheck(cfg: &RunConfig, base: &Path, out: &Path) -> Result<XcheckReport, CliError> {
    cfg.validate()?;
    let profile = cfg.profile.build(base)?;
    let params = cfg.params()?;
    create_out_dir(out)?;
    let traj = solve(&profile, &params, cfg)?;
    if let Some(EtaStatus::NumericalFailure { reason }) = traj.as_ref().map(|t| t.status()) {
        return Err(CliError::Numerical(reason.clone()));
    }
    let t = xcheck_time(traj.as_ref(), cfg.t_end);
    let (rep, last) = cross_check(&profile, &params, traj.as_ref(), t, cfg.xcheck.n, cfg.xcheck.cfl)?;
    if let Some(s) = last {
        let path = out.join("xcheck.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(["x", "omega", "u", "u_x"]).map_err(|e| io_err(&path, e))?;
        for k in 0..s.x.len() {
            w.serialize((s.x[k], s.omega[k], s.u[k], s.u_x[k])).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
    }
    write_json(&out.join("xcheck.json"), &rep)?;
    Ok(rep)
}

pub fn classify_only(cfg: &RunConfig, base: &Path) -> Result<CriteriaReport, CliError> {
    cfg.validate()?;
    let profile = cfg.profile.build(base)?;
    classify(&profile, &cfg.params()?, cfg.n_improved).map_err(core_err)
}
