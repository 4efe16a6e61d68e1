//! The flow map F(ξ,t) and the velocity field along particle paths.
//!
//! For a ≠ −1, with I, J, W the bracket integrals at η(t) and η' = I^(−(a+1)):
//!
//! ```text
//! F    = J(ξ)/I
//! F_ξ  = B(ξ)^α / I
//! û    = η'·(W(ξ) − F·W(1))/I
//! û_x  = η'·u⁰_x/B − η'·W(1)/I
//! û_xx = u⁰_xx·F_ξ^a
//! ```
//!
//! For a = −1 the map is F = ∫₀^ξ e^(u⁰_x t) / ∫₀¹ e^(u⁰_x t), evaluated with the
//! exponent shifted by u_max so nothing overflows.

use serde::Serialize;

use crate::bracket::{BoundaryCondition, Bracket, ModelParams};
use crate::error::{Error, Result};
use crate::eta::EtaTrajectory;
use crate::profiles::InitialProfile;
use crate::quadrature::{integrate, normalize_breaks, DEFAULT_MAX_PANELS};

/// Lagrangian state at one time on a uniform grid of labels ξ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSnapshot {
    pub t: f64,
    pub xi: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "F_xi")]
    pub f_xi: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub ux_hat: Vec<f64>,
    pub uxx_hat: Vec<f64>,
    /// Periodic runs do not integrate the translation, so F is only known up to a shift.
    pub modulo_translation: bool,
}

/// All flow quantities at one (ξ, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowPoint {
    pub f: f64,
    pub f_xi: f64,
    pub u_hat: f64,
    pub ux_hat: f64,
    pub uxx_hat: f64,
}

#[derive(Debug, Clone, Copy)]
enum Clock<'a> {
    Eta(&'a EtaTrajectory),
    Exponential,
}

/// Flow-map evaluator tying a profile and model to a solved clock.
#[derive(Debug, Clone, Copy)]
pub struct FlowMap<'a> {
    profile: &'a InitialProfile,
    params: &'a ModelParams,
    clock: Clock<'a>,
    tol: f64,
}

/// Quadrature tolerance of the a = −1 branch.
const EXPONENTIAL_QUAD_TOL: f64 = 1e-13;

impl<'a> FlowMap<'a> {
    /// Flow map for a ≠ −1 driven by a solved clock.
    pub fn new(profile: &'a InitialProfile, params: &'a ModelParams, traj: &'a EtaTrajectory) -> Result<Self> {
        if params.is_minus_one() {
            return Err(Error::InvalidArgument("a = -1 uses FlowMap::exponential".into()));
        }
        Ok(FlowMap { profile, params, clock: Clock::Eta(traj), tol: traj.tolerances().quad })
    }

    /// The closed-form a = −1 flow, defined for all t ≥ 0.
    pub fn exponential(profile: &'a InitialProfile, params: &'a ModelParams) -> Result<Self> {
        if !params.is_minus_one() {
            return Err(Error::InvalidArgument(format!("exponential flow needs a = -1, got {}", params.a())));
        }
        Ok(FlowMap { profile, params, clock: Clock::Exponential, tol: EXPONENTIAL_QUAD_TOL })
    }

    /// Picks the branch from `params`; `traj` is required for a ≠ −1.
    pub fn for_params(
        profile: &'a InitialProfile,
        params: &'a ModelParams,
        traj: Option<&'a EtaTrajectory>,
    ) -> Result<Self> {
        match (params.is_minus_one(), traj) {
            (true, _) => Self::exponential(profile, params),
            (false, Some(tr)) => Self::new(profile, params, tr),
            (false, None) => Err(Error::InvalidArgument("a != -1 needs a solved clock trajectory".into())),
        }
    }

    pub fn profile(&self) -> &InitialProfile {
        self.profile
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    /// Latest time the flow can be evaluated at, if bounded.
    pub fn t_max(&self) -> Option<f64> {
        match self.clock {
            Clock::Eta(tr) => Some(tr.t_star().unwrap_or(tr.t_last())),
            Clock::Exponential => None,
        }
    }

    pub fn point(&self, xi: f64, t: f64) -> Result<FlowPoint> {
        check_xi(xi)?;
        Ok(self.sample_at(&[xi], t)?.remove(0))
    }

    pub fn flow(&self, xi: f64, t: f64) -> Result<f64> {
        Ok(self.point(xi, t)?.f)
    }

    pub fn flow_xi(&self, xi: f64, t: f64) -> Result<f64> {
        Ok(self.point(xi, t)?.f_xi)
    }

    pub fn velocity(&self, xi: f64, t: f64) -> Result<f64> {
        Ok(self.point(xi, t)?.u_hat)
    }

    pub fn gradient(&self, xi: f64, t: f64) -> Result<f64> {
        Ok(self.point(xi, t)?.ux_hat)
    }

    pub fn curvature(&self, xi: f64, t: f64) -> Result<f64> {
        Ok(self.point(xi, t)?.uxx_hat)
    }

    /// Flow quantities on the sorted labels `xs`.
    pub fn sample_at(&self, xs: &[f64], t: f64) -> Result<Vec<FlowPoint>> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
        }
        match self.clock {
            Clock::Eta(tr) => self.sample_eta(tr, xs, t),
            Clock::Exponential => self.sample_exponential(xs, t),
        }
    }

    fn sample_eta(&self, tr: &EtaTrajectory, xs: &[f64], t: f64) -> Result<Vec<FlowPoint>> {
        let clock = tr.clock_at(t)?;
        let b = Bracket::new(self.profile, self.params, clock)?;
        let a = self.params.a();
        let alpha = b.alpha();
        let i = b.integral_pow(0.0, 1.0, self.tol)?;
        let w1 = b.integral_weighted(0.0, 1.0, self.tol)?;
        let rate = i.powf(-(a + 1.0));
        let (j, w) = b.cumulative(xs, self.tol)?;
        Ok(xs
            .iter()
            .zip(j.iter().zip(&w))
            .map(|(&x, (&jx, &wx))| {
                let bx = b.value(x);
                let f = if x == 1.0 { 1.0 } else { jx / i };
                let f_xi = bx.powf(alpha) / i;
                FlowPoint {
                    f,
                    f_xi,
                    u_hat: rate * (wx - f * w1) / i,
                    ux_hat: rate * (self.profile.ux(x) / bx - w1 / i),
                    uxx_hat: self.profile.uxx(x) * f_xi.powf(a),
                }
            })
            .collect())
    }

    fn sample_exponential(&self, xs: &[f64], t: f64) -> Result<Vec<FlowPoint>> {
        check_grid(xs)?;
        let p = self.profile;
        // e^(u⁰_x t) = e^(u_max t)·e^(−gap t); the common factor cancels everywhere
        let weight = |x: f64| (-p.slope_gap_to_max(x) * t).exp();
        let integral = |lo: f64, hi: f64, first: bool| -> Result<f64> {
            if hi <= lo {
                return Ok(0.0);
            }
            let breaks = normalize_breaks(lo, hi, p.quadrature_breaks());
            let r = if first {
                integrate(&weight, &breaks, self.tol, DEFAULT_MAX_PANELS)?
            } else {
                integrate(|x| p.ux(x) * weight(x), &breaks, self.tol, DEFAULT_MAX_PANELS)?
            };
            Ok(r.value)
        };
        let e1 = integral(0.0, 1.0, true)?;
        let m1 = integral(0.0, 1.0, false)?;
        let (mut acc_e, mut acc_m, mut prev) = (0.0, 0.0, 0.0);
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            acc_e += integral(prev, x, true)?;
            acc_m += integral(prev, x, false)?;
            prev = x;
            let f = if x == 1.0 { 1.0 } else { acc_e / e1 };
            let f_xi = weight(x) / e1;
            out.push(FlowPoint {
                f,
                f_xi,
                u_hat: acc_m / e1 - f * m1 / e1,
                ux_hat: p.ux(x) - m1 / e1,
                uxx_hat: p.uxx(x) / f_xi,
            });
        }
        Ok(out)
    }

    /// Snapshot on ξ_i = i/(n−1).
    pub fn sample(&self, t: f64, n: usize) -> Result<FlowSnapshot> {
        if n < 16 {
            return Err(Error::InvalidArgument(format!("snapshot needs at least 16 points, got {n}")));
        }
        let xi: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let pts = self.sample_at(&xi, t)?;
        Ok(FlowSnapshot {
            t,
            f: pts.iter().map(|p| p.f).collect(),
            f_xi: pts.iter().map(|p| p.f_xi).collect(),
            u_hat: pts.iter().map(|p| p.u_hat).collect(),
            ux_hat: pts.iter().map(|p| p.ux_hat).collect(),
            uxx_hat: pts.iter().map(|p| p.uxx_hat).collect(),
            xi,
            modulo_translation: self.params.bc() == BoundaryCondition::PeriodicMeanfree,
        })
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { value: xi, lo: 0.0, hi: 1.0 })
    }
}

fn check_grid(xs: &[f64]) -> Result<()> {
    for &x in xs {
        check_xi(x)?;
    }
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("grid must be sorted".into()));
    }
    Ok(())
}

/// F(ξ,t).
pub fn flow_f(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    xi: f64,
    t: f64,
) -> Result<f64> {
    FlowMap::for_params(profile, params, traj)?.flow(xi, t)
}

/// F_ξ(ξ,t).
pub fn flow_fxi(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    xi: f64,
    t: f64,
) -> Result<f64> {
    FlowMap::for_params(profile, params, traj)?.flow_xi(xi, t)
}

/// û(ξ,t) = u(F(ξ,t),t).
pub fn velocity_hat(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    xi: f64,
    t: f64,
) -> Result<f64> {
    FlowMap::for_params(profile, params, traj)?.velocity(xi, t)
}

/// û_x(ξ,t) = u_x(F(ξ,t),t).
pub fn gradient_hat(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    xi: f64,
    t: f64,
) -> Result<f64> {
    FlowMap::for_params(profile, params, traj)?.gradient(xi, t)
}

/// û_xx(ξ,t) = u⁰_xx(ξ)·F_ξ^a.
pub fn curvature_hat(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    xi: f64,
    t: f64,
) -> Result<f64> {
    FlowMap::for_params(profile, params, traj)?.curvature(xi, t)
}

/// Snapshot of the pushed-forward state on `n` uniform labels.
pub fn sample_eulerian(
    profile: &InitialProfile,
    params: &ModelParams,
    traj: Option<&EtaTrajectory>,
    t: f64,
    n: usize,
) -> Result<FlowSnapshot> {
    FlowMap::for_params(profile, params, traj)?.sample(t, n)
}
