//! Method-of-lines solver for the vorticity form ω_t + uω_x = a·u_x·ω, with u
//! recovered from ω = u_xx under Dirichlet conditions.
//!
//! Shares no code with the Lagrangian pipeline so that the two can check each other.

use serde::Serialize;

use crate::bracket::{BoundaryCondition, ModelParams};
use crate::error::{Error, Result};
use crate::flowmap::FlowSnapshot;
use crate::profiles::InitialProfile;

/// Smallest grid accepted by [`recover_velocity`].
pub const MIN_RECOVERY_POINTS: usize = 16;
/// Smallest grid accepted by [`evolve`].
pub const MIN_EVOLVE_POINTS: usize = 128;
/// |u_x| above this halts the run with [`EulerianStatus::GradientBlowup`].
pub const GRADIENT_CAP: f64 = 1e6;
/// |ω| above this counts as an instability.
const VORTICITY_CAP: f64 = 1e12;
const MAX_STEPS: usize = 2_000_000;
/// Allowed mismatch between snapshot and state times in [`compare`].
pub const TIME_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VorticityState {
    pub t: f64,
    pub x: Vec<f64>,
    pub omega: Vec<f64>,
    pub u: Vec<f64>,
    pub u_x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EulerianStatus {
    ReachedTEnd,
    GradientBlowup { t: f64, max_ux: f64 },
    NumericalFailure { t: f64, reason: String },
}

impl EulerianStatus {
    pub fn label(&self) -> &'static str {
        match self {
            EulerianStatus::ReachedTEnd => "reached_t_end",
            EulerianStatus::GradientBlowup { .. } => "gradient_blowup",
            EulerianStatus::NumericalFailure { .. } => "numerical_failure",
        }
    }
}

/// States after every accepted step, starting with the initial one.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianRun {
    pub states: Vec<VorticityState>,
    pub status: EulerianStatus,
}

impl EulerianRun {
    pub fn last(&self) -> &VorticityState {
        self.states.last().expect("a run always holds its initial state")
    }
}

/// Uniform grid of `n` points on [0, 1].
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let dx = 1.0 / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { 1.0 } else { i as f64 * dx }).collect()
}

fn cumulative_trapezoid(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// u and u_x from ω = u_xx with u(0) = u(1) = 0, by two cumulative trapezoid sums.
pub fn recover_velocity(omega: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    if n < MIN_RECOVERY_POINTS || omega.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_RECOVERY_POINTS} matching grid points, got {} and {}",
            n,
            omega.len()
        )));
    }
    let dx = x[1] - x[0];
    let first = cumulative_trapezoid(omega, dx);
    let second = cumulative_trapezoid(&first, dx);
    let c = second[n - 1];
    let u = second.iter().zip(x).map(|(s, xi)| s - xi * c).collect();
    let u_x = first.iter().map(|f| f - c).collect();
    Ok((u, u_x))
}

/// Fourth-order ω_x, centered inside and one-sided at the two points next to each wall.
fn derivative(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let s = 1.0 / (12.0 * dx);
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) * s;
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * s;
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * s;
    d
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn state(t: f64, x: &[f64], omega: Vec<f64>) -> Result<VorticityState> {
    let (u, u_x) = recover_velocity(&omega, x)?;
    Ok(VorticityState { t, x: x.to_vec(), omega, u, u_x })
}

/// ω_t = −u·ω_x + a·u_x·ω.
fn rhs(a: f64, x: &[f64], omega: &[f64]) -> Result<Vec<f64>> {
    let (u, u_x) = recover_velocity(omega, x)?;
    let wx = derivative(omega, x[1] - x[0]);
    Ok((0..omega.len()).map(|i| -u[i] * wx[i] + a * u_x[i] * omega[i]).collect())
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(y, k)| y + h * k).collect()
}

/// Initial state with ω = u⁰_xx sampled on `n` uniform points.
pub fn initial_state(profile: &InitialProfile, n: usize) -> Result<VorticityState> {
    let x = uniform_grid(n);
    let omega = x.iter().map(|&xi| profile.uxx(xi)).collect();
    state(0.0, &x, omega)
}

/// Classic RK4 with Δt = cfl·Δx/max|u|, the last step clipped to land on `t_end`.
pub fn evolve(profile: &InitialProfile, params: &ModelParams, t_end: f64, n: usize, cfl: f64) -> Result<EulerianRun> {
    if n < MIN_EVOLVE_POINTS {
        return Err(Error::InvalidArgument(format!("grid needs at least {MIN_EVOLVE_POINTS} points, got {n}")));
    }
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(Error::OutOfDomain { value: cfl, lo: 0.0, hi: 0.5 });
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be finite and nonnegative, got {t_end}")));
    }
    if params.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::InvalidArgument("the vorticity solver only supports Dirichlet conditions".into()));
    }
    let a = params.a();
    let s0 = initial_state(profile, n)?;
    let x = s0.x.clone();
    let dx = x[1] - x[0];
    let mut states = vec![s0];
    let mut steps = 0;
    loop {
        let cur = states.last().expect("nonempty");
        let t = cur.t;
        if t >= t_end {
            return Ok(EulerianRun { states, status: EulerianStatus::ReachedTEnd });
        }
        if steps >= MAX_STEPS {
            let reason = format!("step limit {MAX_STEPS} reached");
            return Ok(EulerianRun { states, status: EulerianStatus::NumericalFailure { t, reason } });
        }
        let umax = max_abs(&cur.u);
        let mut dt = if umax > 0.0 { cfl * dx / umax } else { t_end - t };
        let last = t + dt >= t_end;
        if last {
            dt = t_end - t;
        }
        let w = &cur.omega;
        let k1 = rhs(a, &x, w)?;
        let k2 = rhs(a, &x, &axpy(w, 0.5 * dt, &k1))?;
        let k3 = rhs(a, &x, &axpy(w, 0.5 * dt, &k2))?;
        let k4 = rhs(a, &x, &axpy(w, dt, &k3))?;
        let omega: Vec<f64> = (0..n).map(|i| w[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let t_new = if last { t_end } else { t + dt };
        let wmax = max_abs(&omega);
        if !wmax.is_finite() || wmax > VORTICITY_CAP {
            let reason = format!("vorticity became {wmax:e}");
            return Ok(EulerianRun { states, status: EulerianStatus::NumericalFailure { t: t_new, reason } });
        }
        let next = state(t_new, &x, omega)?;
        let max_ux = max_abs(&next.u_x);
        states.push(next);
        steps += 1;
        if max_ux > GRADIENT_CAP {
            log::info!("eulerian run stopped at t = {t_new}: max |u_x| = {max_ux:e}");
            return Ok(EulerianRun { states, status: EulerianStatus::GradientBlowup { t: t_new, max_ux } });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareError {
    pub linf_u: f64,
    pub l2_u: f64,
    pub linf_ux: f64,
}

fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * h * d1
}

/// Interpolates the Lagrangian graph (F, û) onto the state's grid and measures the
/// difference. û and û_x are interpolated as cubic Hermite in F with slopes û_x and û_xx.
pub fn compare(snapshot: &FlowSnapshot, state: &VorticityState) -> Result<CompareError> {
    if (snapshot.t - state.t).abs() > TIME_MATCH_TOL {
        return Err(Error::TimeMismatch { snapshot: snapshot.t, state: state.t });
    }
    let f = &snapshot.f;
    if f.len() < 2 {
        return Err(Error::InvalidArgument("snapshot needs at least two labels".into()));
    }
    let mut err = CompareError { linf_u: 0.0, l2_u: 0.0, linf_ux: 0.0 };
    let mut sq = Vec::with_capacity(state.x.len());
    let mut k = 0;
    for (i, &x) in state.x.iter().enumerate() {
        while k + 2 < f.len() && f[k + 1] < x {
            k += 1;
        }
        let (x0, x1) = (f[k], f[k + 1]);
        let u = hermite(x0, x1, snapshot.u_hat[k], snapshot.u_hat[k + 1], snapshot.ux_hat[k], snapshot.ux_hat[k + 1], x);
        let ux = hermite(x0, x1, snapshot.ux_hat[k], snapshot.ux_hat[k + 1], snapshot.uxx_hat[k], snapshot.uxx_hat[k + 1], x);
        let du = (u - state.u[i]).abs();
        err.linf_u = err.linf_u.max(du);
        err.linf_ux = err.linf_ux.max((ux - state.u_x[i]).abs());
        sq.push(du * du);
    }
    let dx = state.x[1] - state.x[0];
    let integral: f64 = sq.windows(2).map(|w| 0.5 * dx * (w[0] + w[1])).sum();
    err.l2_u = integral.sqrt();
    Ok(err)
}
