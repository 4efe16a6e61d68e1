//! The conformal clock η(t): η' = I(η)^(−(a+1)), η(0) = 0.
//!
//! When η_crit is finite the ODE is integrated in s = −ln(1 − η/η_crit), the
//! negative log of the bracket minimum, so η approaches η_crit without ever
//! reaching it in floating point and the bracket minimum is known to full relative
//! precision. The integrator is Dormand–Prince 5(4) with its native dense output.

use serde::{Deserialize, Serialize};

use crate::bracket::{critical_eta, integrals_at, ClockPoint, ModelParams};
use crate::error::{Error, Result};
use crate::profiles::InitialProfile;

/// Tolerances used by the clock solver and everything built on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative and absolute local error target of the ODE integrator.
    pub ode: f64,
    /// Tolerance of every bracket quadrature.
    pub quad: f64,
    /// Bracket minimum at which bracket closure is declared.
    pub event: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ode: 1e-9, quad: 1e-12, event: 1e-9 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("ode", self.ode), ("quad", self.quad), ("event", self.event)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("tolerance `{name}` must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// η' above this counts as the clock escaping to infinity.
pub const ESCAPE_RATE: f64 = 1e12;

/// A bracket closure is only a blow-up if ln η' / ln(η_crit − η) stays below this;
/// at 1 or above the remaining time to η_crit is infinite.
pub const CLOSURE_RATE_THRESHOLD: f64 = 0.9;

const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupMechanism {
    /// min_ξ B reached the event threshold.
    BracketClosure,
    /// η' exceeded [`ESCAPE_RATE`] with the bracket still open.
    EtaEscape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EtaStatus {
    ReachedTEnd,
    Blowup { t_star: f64, eta_star: f64, mechanism: BlowupMechanism },
    NumericalFailure { reason: String },
}

impl EtaStatus {
    pub fn label(&self) -> &'static str {
        match self {
            EtaStatus::ReachedTEnd => "reached_t_end",
            EtaStatus::Blowup { .. } => "blowup",
            EtaStatus::NumericalFailure { .. } => "numerical_failure",
        }
    }
}

/// The clock and its derivative at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaPoint {
    pub t: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub min_bracket: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Coordinate {
    /// y = η
    Eta,
    /// y = −ln(1 − η/η_crit)
    LogBracket,
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy)]
struct DenseStep {
    t0: f64,
    h: f64,
    r: [f64; 5],
}

impl DenseStep {
    fn value(&self, t: f64) -> f64 {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = self.r;
        r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))
    }

    fn derivative(&self, t: f64) -> f64 {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let [_, r2, r3, r4, r5] = self.r;
        (r2 + (1.0 - 2.0 * th) * r3 + th * (2.0 - 3.0 * th) * r4
            + 2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * r5)
            / self.h
    }
}

#[derive(Debug, Clone)]
pub struct EtaTrajectory {
    times: Vec<f64>,
    eta: Vec<f64>,
    eta_prime: Vec<f64>,
    min_bracket: Vec<f64>,
    eta_crit: f64,
    status: EtaStatus,
    tolerances: Tolerances,
    coordinate: Coordinate,
    dense: Vec<DenseStep>,
}

impl EtaTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn eta_prime(&self) -> &[f64] {
        &self.eta_prime
    }

    pub fn min_bracket(&self) -> &[f64] {
        &self.min_bracket
    }

    pub fn eta_crit(&self) -> f64 {
        self.eta_crit
    }

    pub fn status(&self) -> &EtaStatus {
        &self.status
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn t_star(&self) -> Option<f64> {
        match self.status {
            EtaStatus::Blowup { t_star, .. } => Some(t_star),
            _ => None,
        }
    }

    /// Last time covered by the trajectory.
    pub fn t_last(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial node")
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if let Some(t_star) = self.t_star() {
            if t >= t_star {
                return Err(Error::BeyondBlowup { t, t_star });
            }
        }
        if !(t >= 0.0 && t <= self.t_last()) {
            return Err(Error::TimeOutOfRange { t, t_end: self.t_last() });
        }
        Ok(())
    }

    fn step_at(&self, t: f64) -> Option<&DenseStep> {
        let i = self.dense.partition_point(|d| d.t0 + d.h < t);
        self.dense.get(i.min(self.dense.len().saturating_sub(1)))
    }

    /// Coordinate value and its time derivative at `t`, no range check.
    fn raw(&self, t: f64) -> (f64, f64) {
        match self.step_at(t) {
            Some(d) => (d.value(t), d.derivative(t)),
            None => (0.0, self.eta_prime[0]),
        }
    }

    fn point_from_raw(&self, t: f64, y: f64, dy: f64) -> EtaPoint {
        match self.coordinate {
            Coordinate::Eta => EtaPoint { t, eta: y, eta_prime: dy, min_bracket: 1.0 },
            Coordinate::LogBracket => {
                let m = (-y).exp();
                EtaPoint { t, eta: self.eta_crit * -(-y).exp_m1(), eta_prime: self.eta_crit * m * dy, min_bracket: m }
            }
        }
    }

    /// η, η' and min_ξ B at `t` from the dense output.
    pub fn eval(&self, t: f64) -> Result<EtaPoint> {
        self.check_time(t)?;
        let (y, dy) = self.raw(t);
        Ok(self.point_from_raw(t, y, dy))
    }

    pub fn eta_at(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.eta)
    }

    pub fn eta_prime_at(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.eta_prime)
    }

    /// The clock at `t` in the form the bracket integrals take.
    pub fn clock_at(&self, t: f64) -> Result<ClockPoint> {
        let p = self.eval(t)?;
        Ok(ClockPoint { eta: p.eta, min_bracket: p.min_bracket })
    }
}

/// η_crit: 2/((a+1)u_max) for a > −1, −2/((a+1)u_min) for a < −1, +∞ when that
/// extremum vanishes.
pub fn eta_crit(profile: &InitialProfile, params: &ModelParams) -> Result<f64> {
    critical_eta(profile, params)
}

/// Quadrature tolerance of [`eta_rhs`].
pub const ETA_RHS_QUAD_TOL: f64 = 1e-12;

/// η' = I(η)^(−(a+1)).
pub fn eta_rhs(profile: &InitialProfile, params: &ModelParams, eta: f64) -> Result<f64> {
    let clock = ClockPoint::from_eta(profile, params, eta)?;
    rate(profile, params, clock, ETA_RHS_QUAD_TOL)
}

fn rate(profile: &InitialProfile, params: &ModelParams, clock: ClockPoint, tol: f64) -> Result<f64> {
    let i = integrals_at(profile, params, clock, tol)?.i;
    Ok(i.powf(-(params.a() + 1.0)))
}

/// d ln η' / d ln(η_crit − η) = (a+1)(η_crit − η) W(1)/I.
fn closure_rate(profile: &InitialProfile, params: &ModelParams, clock: ClockPoint, eta_crit: f64, tol: f64) -> Result<f64> {
    let r = integrals_at(profile, params, clock, tol)?;
    Ok((params.a() + 1.0) * eta_crit * clock.min_bracket * r.w1 / r.i)
}

/// Integrates the clock ODE on [0, t_end] with the default quadrature and event
/// tolerances and ODE tolerance `tol`.
pub fn solve_eta(profile: &InitialProfile, params: &ModelParams, t_end: f64, tol: f64) -> Result<EtaTrajectory> {
    solve_eta_with(profile, params, t_end, &Tolerances { ode: tol, ..Tolerances::default() })
}

pub fn solve_eta_with(
    profile: &InitialProfile,
    params: &ModelParams,
    t_end: f64,
    tols: &Tolerances,
) -> Result<EtaTrajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive and finite, got {t_end}")));
    }
    tols.validate()?;
    let crit = eta_crit(profile, params)?;
    let coordinate = if crit.is_finite() { Coordinate::LogBracket } else { Coordinate::Eta };
    let quad = tols.quad;

    let clock_of = |y: f64| match coordinate {
        Coordinate::Eta => ClockPoint { eta: y, min_bracket: 1.0 },
        Coordinate::LogBracket => ClockPoint { eta: crit * -(-y).exp_m1(), min_bracket: (-y).exp() },
    };
    let f = |y: f64| -> Result<f64> {
        let g = rate(profile, params, clock_of(y), quad)?;
        Ok(match coordinate {
            Coordinate::Eta => g,
            Coordinate::LogBracket => g * y.exp() / crit,
        })
    };
    let eta_rate = |y: f64, dy: f64| match coordinate {
        Coordinate::Eta => dy,
        Coordinate::LogBracket => crit * (-y).exp() * dy,
    };

    let mut traj = EtaTrajectory {
        times: vec![0.0],
        eta: vec![0.0],
        eta_prime: vec![1.0],
        min_bracket: vec![1.0],
        eta_crit: crit,
        status: EtaStatus::ReachedTEnd,
        tolerances: *tols,
        coordinate,
        dense: Vec::new(),
    };

    let (mut t, mut y) = (0.0_f64, 0.0_f64);
    let mut k1 = f(y)?;
    let mut h = (0.1 * tols.ode.powf(0.2)).min(t_end);
    let y_event = -tols.event.ln();
    let mut steps = 0usize;
    log::debug!("solve_eta: a = {}, eta_crit = {crit}, t_end = {t_end}", params.a());

    while t < t_end {
        steps += 1;
        if steps > MAX_STEPS {
            traj.status = EtaStatus::NumericalFailure { reason: format!("step budget of {MAX_STEPS} exhausted at t = {t}") };
            return Ok(traj);
        }
        if h < 1e-14 * t.max(1.0) {
            traj.status = EtaStatus::NumericalFailure { reason: format!("step size underflow at t = {t}") };
            return Ok(traj);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let step = match dopri_step(&f, y, k1, h) {
            Ok(s) => s,
            Err(e) => {
                log::debug!("stage failure at t = {t}, h = {h}: {e}");
                h *= 0.25;
                continue;
            }
        };
        let scale = tols.ode * (1.0 + y.abs().max(step.y1.abs()));
        let err = step.err / scale;
        if !(err <= 1.0) {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            continue;
        }

        let t1 = if last { t_end } else { t + h };
        let dense = DenseStep { t0: t, h, r: step.dense(y, k1, h) };
        traj.dense.push(dense);
        let p1 = traj.point_from_raw(t1, step.y1, step.k7);

        // escape of the clock rate
        if p1.eta_prime > ESCAPE_RATE {
            let te = bisect(t, t1, tols.ode, |tm| {
                let (yv, dv) = (dense.value(tm), dense.derivative(tm));
                eta_rate(yv, dv) >= ESCAPE_RATE
            });
            let pe = traj.point_from_raw(te, dense.value(te), dense.derivative(te));
            traj.push(pe);
            traj.status = EtaStatus::Blowup { t_star: te, eta_star: pe.eta, mechanism: BlowupMechanism::EtaEscape };
            return Ok(traj);
        }
        // bracket closure
        if coordinate == Coordinate::LogBracket && step.y1 >= y_event {
            let beta = closure_rate(profile, params, clock_of(step.y1), crit, quad)?;
            if beta < CLOSURE_RATE_THRESHOLD {
                let te = if y < y_event {
                    bisect(t, t1, tols.ode, |tm| dense.value(tm) >= y_event)
                } else {
                    t1
                };
                let pe = traj.point_from_raw(te, dense.value(te), dense.derivative(te));
                traj.push(pe);
                traj.status = EtaStatus::Blowup { t_star: te, eta_star: pe.eta, mechanism: BlowupMechanism::BracketClosure };
                log::info!("bracket closure at t* = {te} (closure rate {beta:.3})");
                return Ok(traj);
            }
        }

        traj.push(p1);
        t = t1;
        y = step.y1;
        k1 = step.k7;
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    log::debug!("solve_eta: reached t_end after {} steps", traj.dense.len());
    Ok(traj)
}

impl EtaTrajectory {
    fn push(&mut self, p: EtaPoint) {
        self.times.push(p.t);
        self.eta.push(p.eta);
        self.eta_prime.push(p.eta_prime);
        self.min_bracket.push(p.min_bracket);
    }
}

/// Smallest time in [lo, hi] at which `pred` holds, to within `tol`; `pred(hi)` is
/// assumed true.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > tol && hi - lo > 4.0 * f64::EPSILON * hi.abs() {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

// Dormand–Prince 5(4) tableau (autonomous, so the nodes c_i are not needed).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
struct Step {
    y1: f64,
    k: [f64; 7],
    k7: f64,
    err: f64,
}

impl Step {
    fn dense(&self, y0: f64, k1: f64, h: f64) -> [f64; 5] {
        let ydiff = self.y1 - y0;
        let bspl = h * k1 - ydiff;
        let [_, _, k3, k4, k5, k6, k7] = self.k;
        [
            y0,
            ydiff,
            bspl,
            ydiff - h * k7 - bspl,
            h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
        ]
    }
}

fn dopri_step<F: Fn(f64) -> Result<f64>>(f: &F, y: f64, k1: f64, h: f64) -> Result<Step> {
    let k2 = f(y + h * A21 * k1)?;
    let k3 = f(y + h * (A31 * k1 + A32 * k2))?;
    let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
    let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
    let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
    let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = f(y1)?;
    if !y1.is_finite() || !k7.is_finite() {
        return Err(Error::NumericalFailure("non-finite stage".into()));
    }
    let err = (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
    Ok(Step { y1, k: [k1, k2, k3, k4, k5, k6, k7], k7, err })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola(g: f64) -> InitialProfile {
        InitialProfile::parabola(g).unwrap()
    }

    fn dense_error(h: f64) -> (f64, f64) {
        let f = |y: f64| -> Result<f64> { Ok(y) };
        let s = dopri_step(&f, 1.0, 1.0, h).unwrap();
        let d = DenseStep { t0: 0.0, h, r: s.dense(1.0, 1.0, h) };
        let (mut ev, mut ed) = (0.0f64, 0.0f64);
        for i in 0..=20 {
            let t = h * i as f64 / 20.0;
            ev = ev.max((d.value(t) - t.exp()).abs());
            ed = ed.max((d.derivative(t) - t.exp()).abs());
        }
        (ev, ed)
    }

    #[test]
    fn dense_output_is_fourth_order() {
        // y' = y on a single step
        let (e1, d1) = dense_error(0.1);
        let (e2, _) = dense_error(0.05);
        assert!(e1 < 1e-8 && d1 < 1e-6, "{e1} {d1}");
        assert!(e1 / e2 > 20.0, "order ratio {}", e1 / e2);
    }

    #[test]
    fn rhs_examples() {
        let p = parabola(1.0);
        let burgers = ModelParams::new(-3.0).unwrap();
        assert!((eta_rhs(&p, &burgers, 0.7).unwrap() - 1.0).abs() < 1e-12);
        let hs = ModelParams::new(-2.0).unwrap();
        for eta in [0.0, 0.5, 1.5] {
            assert!((eta_rhs(&p, &hs, eta).unwrap() - (1.0 + eta * eta / 12.0)).abs() < 1e-11);
        }
        assert!(eta_rhs(&p, &ModelParams::new(-1.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn crit_examples() {
        assert_eq!(eta_crit(&parabola(1.0), &ModelParams::new(-3.0).unwrap()).unwrap(), 1.0);
        assert_eq!(eta_crit(&parabola(1.0), &ModelParams::new(-2.0).unwrap()).unwrap(), 2.0);
        assert_eq!(eta_crit(&parabola(2.0), &ModelParams::new(0.0).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn burgers_blows_up_at_one() {
        let p = parabola(1.0);
        let tr = solve_eta(&p, &ModelParams::new(-3.0).unwrap(), 2.0, 1e-9).unwrap();
        let t_star = tr.t_star().expect("blow-up");
        assert!((t_star - 1.0).abs() < 1e-6, "{t_star}");
        for (&t, &e) in tr.times().iter().zip(tr.eta()) {
            assert!((e - t).abs() < 1e-8);
        }
        assert!(matches!(tr.status(), EtaStatus::Blowup { mechanism: BlowupMechanism::BracketClosure, .. }));
        assert!(matches!(tr.eval(1.5), Err(Error::BeyondBlowup { .. })));
    }

    #[test]
    fn constant_curvature_is_global() {
        let tr = solve_eta(&parabola(2.0), &ModelParams::new(0.0).unwrap(), 10.0, 1e-9).unwrap();
        assert_eq!(tr.status(), &EtaStatus::ReachedTEnd);
        assert_eq!(tr.t_last(), 10.0);
        for i in 0..=200 {
            let t = i as f64 * 0.05;
            let e = tr.eta_at(t).unwrap();
            assert!((e - t.tanh()).abs() < 1e-8, "t={t}: {e}");
        }
        assert!(matches!(tr.eval(10.5), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn zero_profile_runs_on_the_plain_clock() {
        let tr = solve_eta(&parabola(0.0), &ModelParams::new(1.0).unwrap(), 3.0, 1e-9).unwrap();
        assert_eq!(tr.eta_crit(), f64::INFINITY);
        assert_eq!(tr.status(), &EtaStatus::ReachedTEnd);
        assert!((tr.eta_at(2.5).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = parabola(1.0);
        let params = ModelParams::new(0.0).unwrap();
        assert!(solve_eta(&p, &params, 0.0, 1e-9).is_err());
        assert!(solve_eta(&p, &params, 1.0, 0.0).is_err());
        assert!(solve_eta(&p, &ModelParams::new(-1.0).unwrap(), 1.0, 1e-9).is_err());
    }
}
