//! Closed-form oracles for the special cases with explicit solutions, and the
//! finite-difference checks of the 3D velocity ansatz.

use serde::Serialize;

use crate::bracket::ModelParams;
use crate::error::{Error, Result};
use crate::flowmap::FlowMap;
use crate::profiles::InitialProfile;
use crate::quadrature::{integrate, normalize_breaks, DEFAULT_MAX_PANELS};

const ORACLE_QUAD_TOL: f64 = 1e-12;

/// A named closed-form value and the interval (in t or η) where the formula holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub name: String,
    pub value: f64,
    pub validity: (f64, f64),
}

impl OracleResult {
    pub fn new(name: &str, value: f64, validity: (f64, f64)) -> Self {
        OracleResult { name: name.to_string(), value, validity }
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { value: xi, lo: 0.0, hi: 1.0 })
    }
}

fn check_before(t: f64, t_star: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    if t >= t_star {
        return Err(Error::BeyondBlowup { t, t_star });
    }
    Ok(())
}

fn quad(f: impl FnMut(f64) -> f64, breaks: &[f64]) -> Result<f64> {
    Ok(integrate(f, breaks, ORACLE_QUAD_TOL, DEFAULT_MAX_PANELS)?.value)
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Burgers blow-up time 1/u_min, infinite when u⁰_x never goes negative.
pub fn burgers_tstar(profile: &InitialProfile) -> f64 {
    let (u_min, _) = profile.extrema_ux();
    if u_min > 0.0 {
        1.0 / u_min
    } else {
        f64::INFINITY
    }
}

/// Characteristics of the inviscid Burgers equation, F = ξ + t·u⁰(ξ).
pub fn burgers_flow(profile: &InitialProfile, xi: f64, t: f64) -> Result<f64> {
    check_xi(xi)?;
    check_before(t, burgers_tstar(profile))?;
    Ok(xi + t * profile.u(xi))
}

/// Hunter–Saxton blow-up time (2/N)·arctan(N/u_min), N = ‖u⁰_x‖₂.
pub fn hs_tstar(profile: &InitialProfile) -> Result<f64> {
    let n = profile.norm(1, 2.0)?;
    let (u_min, _) = profile.extrema_ux();
    if u_min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / n * (n / u_min).atan())
}

/// Hunter–Saxton clock η = (2/N)·tan(tN/2).
pub fn hs_eta(profile: &InitialProfile, t: f64) -> Result<f64> {
    check_before(t, hs_tstar(profile)?)?;
    let n = profile.norm(1, 2.0)?;
    if n == 0.0 {
        return Ok(t);
    }
    Ok(2.0 / n * (0.5 * t * n).tan())
}

/// Hunter–Saxton flow map in its expanded form
/// cos²θ·[ξ + (2/N)tanθ·u⁰ + tan²θ/N²·∫₀^ξ (u⁰_x)²], θ = tN/2.
pub fn hs_flow(profile: &InitialProfile, xi: f64, t: f64) -> Result<f64> {
    check_xi(xi)?;
    check_before(t, hs_tstar(profile)?)?;
    let n = profile.norm(1, 2.0)?;
    if n == 0.0 {
        return Ok(xi);
    }
    let th = 0.5 * t * n;
    let breaks = normalize_breaks(0.0, xi, profile.quadrature_breaks());
    let sq = quad(|x| profile.ux(x).powi(2), &breaks)?;
    let (c, tn) = (th.cos(), th.tan());
    Ok(c * c * (xi + 2.0 / n * tn * profile.u(xi) + tn * tn / (n * n) * sq))
}

/// Constant-curvature clock at a = 0, η = (2/γ)·tanh(γt/2).
pub fn cc_eta(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        return t;
    }
    2.0 / gamma * (0.5 * gamma * t).tanh()
}

/// Constant-curvature flow at a = 0, ξ(coth(γt/2)−1)/(1−2ξ+coth(γt/2)).
pub fn cc_flow(gamma: f64, xi: f64, t: f64) -> Result<f64> {
    check_xi(xi)?;
    if gamma == 0.0 || t == 0.0 {
        return Ok(xi);
    }
    let c = coth(0.5 * gamma * t);
    Ok(xi * (c - 1.0) / (1.0 - 2.0 * xi + c))
}

/// artanh(z)²/z² for 0 ≤ z < 1, with the even series near 0.
fn atanh_sq_over_sq(z: f64) -> f64 {
    if z < 1e-4 {
        let s = 1.0 + z * z / 3.0 + z.powi(4) / 5.0;
        s * s
    } else {
        (z.atanh() / z).powi(2)
    }
}

/// Ψ(η) = (1/γ)·∫₀^{γη} artanh²(z)/z² dz, the time at which the a = 1 parabola clock
/// reaches η. For γη > 1 the integrand is continued with |log| as printed,
/// i.e. artanh²(1/z)/z².
pub fn pj_psi_of_eta(gamma: f64, eta: f64) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::OutOfDomain { value: eta, lo: 0.0, hi: f64::INFINITY });
    }
    let g = gamma.abs();
    if g == 0.0 {
        return Ok(eta);
    }
    let z = g * eta;
    let inner = quad(atanh_sq_over_sq, &[0.0, z.min(1.0)])?;
    // ∫₁^z artanh²(1/y)/y² dy = ∫_{1/z}^1 artanh²(w) dw
    let outer = if z > 1.0 { quad(|w: f64| w.atanh().powi(2), &[1.0 / z, 1.0])? } else { 0.0 };
    Ok((inner + outer) / g)
}

/// η' for the zigzag profile from the exact bracket integral
/// I = ((1+X)^{α+1} − (1−X)^{α+1}) / (2X(α+1)), X = (a+1)γη/2, η' = I^{−(a+1)}.
pub fn zigzag_eta_rhs_closed(gamma: f64, a: f64, eta: f64) -> Result<f64> {
    let params = ModelParams::new(a)?;
    if params.is_minus_one() {
        return Ok(1.0);
    }
    let alpha = params.alpha()?;
    let x = ((a + 1.0) * gamma * eta / 2.0).abs();
    if !(x < 1.0) {
        return Err(Error::OutOfDomain { value: x, lo: 0.0, hi: 1.0 });
    }
    let p = alpha + 1.0;
    let i = if x < 1e-4 {
        1.0 + (p - 1.0) * (p - 2.0) / 6.0 * x * x + (p - 1.0) * (p - 2.0) * (p - 3.0) * (p - 4.0) / 120.0 * x.powi(4)
    } else if p.abs() < 1e-12 {
        x.atanh() / x
    } else {
        ((1.0 + x).powf(p) - (1.0 - x).powf(p)) / (2.0 * x * p)
    };
    Ok(i.powf(-(a + 1.0)))
}

/// Cosine profile clock at a = 1, η = tanh(ct)/c with c = 8γ/π².
pub fn cosine_eta_closed(gamma: f64, t: f64) -> f64 {
    let c = 8.0 * gamma / (std::f64::consts::PI * std::f64::consts::PI);
    if c == 0.0 {
        return t;
    }
    (c * t).tanh() / c
}

/// Flow map at a = −1, ∫₀^ξ exp(u⁰_x t) / ∫₀¹ exp(u⁰_x t).
pub fn exp_flow(profile: &InitialProfile, xi: f64, t: f64) -> Result<f64> {
    check_xi(xi)?;
    let (_, u_max) = profile.extrema_ux();
    // shifting the exponent by u_max cancels in the ratio and keeps it ≤ 0
    let w = |x: f64| ((profile.ux(x) - u_max) * t).exp();
    let all = profile.quadrature_breaks();
    let num = quad(w, &normalize_breaks(0.0, xi, all.iter().copied()))?;
    let den = quad(w, &all)?;
    Ok(num / den)
}

/// Physical parameter β of the 3D ansatz mapped to a = −(1+2β).
pub fn a_of_beta(beta: f64) -> f64 {
    -(1.0 + 2.0 * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnsatzResidual {
    /// max |div U − (1+β)u⁰_x|
    pub divergence: f64,
    /// max |ω₃ − β·u⁰_xx·y|
    pub curl: f64,
}

/// Finite-difference check of div and curl of U = (u⁰(x), β·u⁰_x(x)·y, 0) on a
/// 32-point x grid and y ∈ {0.1, 0.5, 1}.
pub fn ansatz_check(profile: &InitialProfile, beta: f64, fd_step: f64) -> Result<AnsatzResidual> {
    if !(fd_step > 0.0 && fd_step <= 1e-2) {
        return Err(Error::OutOfDomain { value: fd_step, lo: 0.0, hi: 1e-2 });
    }
    let h = fd_step;
    let u1 = |x: f64, _y: f64| profile.u(x);
    let u2 = |x: f64, y: f64| beta * profile.ux(x) * y;
    let mut res = AnsatzResidual { divergence: 0.0, curl: 0.0 };
    for i in 0..32 {
        let x = (i as f64 + 0.5) / 32.0;
        for y in [0.1, 0.5, 1.0] {
            let d1x = (u1(x + h, y) - u1(x - h, y)) / (2.0 * h);
            let d2y = (u2(x, y + h) - u2(x, y - h)) / (2.0 * h);
            let d2x = (u2(x + h, y) - u2(x - h, y)) / (2.0 * h);
            let d1y = (u1(x, y + h) - u1(x, y - h)) / (2.0 * h);
            let div = d1x + d2y;
            let omega3 = d2x - d1y;
            res.divergence = res.divergence.max((div - (1.0 + beta) * profile.ux(x)).abs());
            res.curl = res.curl.max((omega3 - beta * profile.uxx(x) * y).abs());
        }
    }
    Ok(res)
}

/// Step used by [`liouville_residual`] in both ξ and t.
pub const LIOUVILLE_STEP: f64 = 1e-4;

/// max over ξ ∈ [0.05, 0.95] of |∂²_{tξ} log f − (a+1)u⁰_xx·f| with f = F_ξ^{a+1},
/// by a mixed central difference of the flow at time t.
pub fn liouville_residual(flow: &FlowMap<'_>, t: f64) -> Result<f64> {
    let a1 = flow.params().a() + 1.0;
    let h = LIOUVILLE_STEP;
    if t < h {
        return Err(Error::OutOfDomain { value: t, lo: h, hi: f64::INFINITY });
    }
    let n = 19;
    let xs: Vec<f64> = (0..n).map(|i| 0.05 + 0.9 * i as f64 / (n - 1) as f64).collect();
    let shifted = |dx: f64| -> Vec<f64> { xs.iter().map(|x| x + dx).collect() };
    let log_f = |pts: &[f64], s: f64| -> Result<Vec<f64>> {
        Ok(flow.sample_at(pts, s)?.iter().map(|p| a1 * p.f_xi.ln()).collect())
    };
    let pp = log_f(&shifted(h), t + h)?;
    let pm = log_f(&shifted(h), t - h)?;
    let mp = log_f(&shifted(-h), t + h)?;
    let mm = log_f(&shifted(-h), t - h)?;
    let here = flow.sample_at(&xs, t)?;
    let mut worst: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let mixed = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
        let f = here[i].f_xi.powf(a1);
        worst = worst.max((mixed - a1 * flow.profile().uxx(*x) * f).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn burgers_examples() {
        let p = InitialProfile::parabola(1.0).unwrap();
        assert_eq!(burgers_tstar(&p), 1.0);
        assert_eq!(burgers_flow(&p, 0.0, 0.9).unwrap(), 0.0);
        assert!((burgers_flow(&p, 0.5, 0.5).unwrap() - 0.375).abs() < 1e-15);
        assert!(matches!(burgers_flow(&p, 0.5, 1.0), Err(Error::BeyondBlowup { .. })));
    }

    #[test]
    fn hunter_saxton_examples() {
        let p = InitialProfile::parabola(1.0).unwrap();
        let ts = hs_tstar(&p).unwrap();
        assert!((ts - PI / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(hs_eta(&p, 0.0).unwrap(), 0.0);
        // η → η_crit = 2/u_min just before t*
        assert!((hs_eta(&p, ts * (1.0 - 1e-10)).unwrap() - 2.0).abs() < 1e-6);
        assert!(hs_eta(&p, ts).is_err());
        // endpoints of the expanded flow
        assert!(hs_flow(&p, 0.0, 1.0).unwrap().abs() < 1e-15);
        assert!((hs_flow(&p, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_curvature_examples() {
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(cc_flow(2.0, 1.0, t).unwrap(), 1.0);
        }
        assert!((cc_flow(2.0, 0.5, 1.0).unwrap() - 0.1192029220).abs() < 1e-9);
        assert_eq!(cc_flow(2.0, 0.3, 0.0).unwrap(), 0.3);
        assert!((cc_eta(2.0, 50.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_is_monotone_and_bounded() {
        assert_eq!(pj_psi_of_eta(2.0, 0.0).unwrap(), 0.0);
        let (a, b) = (pj_psi_of_eta(2.0, 1.0).unwrap(), pj_psi_of_eta(2.0, 2.0).unwrap());
        assert!(a < b);
        // at γη = 1 the integral is π²/6
        assert!((pj_psi_of_eta(2.0, 0.5).unwrap() - PI * PI / 12.0).abs() < 1e-9);
        let far = pj_psi_of_eta(2.0, f64::INFINITY).unwrap();
        assert!(far.is_finite() && far > b);
        assert!((pj_psi_of_eta(2.0, 1e-3).unwrap() - 1e-3).abs() < 1e-8);
    }

    #[test]
    fn zigzag_rhs_limits() {
        assert_eq!(zigzag_eta_rhs_closed(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(zigzag_eta_rhs_closed(1.0, 1.0, 1.0 - 1e-12).unwrap() < 0.01);
        assert!(zigzag_eta_rhs_closed(1.0, 1.0, 1.0).is_err());
        // spec form at a=1: [(a+1)γη / log((1+X)/(1−X))]²
        let (g, eta) = (1.0, 0.5);
        let x: f64 = g * eta;
        let spec = (2.0 * x / ((1.0 + x) / (1.0 - x)).ln()).powi(2);
        assert!((zigzag_eta_rhs_closed(g, 1.0, eta).unwrap() - spec).abs() < 1e-15);
        // Hunter–Saxton: η' = 1 + γ²η²/12 for the zigzag (‖u_x‖₂² = γ²/3)
        let hs = zigzag_eta_rhs_closed(1.5, -2.0, 0.4).unwrap();
        assert!((hs - (1.0 + 1.5f64.powi(2) * 0.16 / 12.0)).abs() < 1e-14);
        // series and closed branches agree at the switch
        let lo = zigzag_eta_rhs_closed(1.0, 2.0, 0.99e-4 / 1.5).unwrap();
        let hi = zigzag_eta_rhs_closed(1.0, 2.0, 1.01e-4 / 1.5).unwrap();
        assert!((lo - hi).abs() < 1e-9);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_eta_closed(1.0, 0.0), 0.0);
        assert!((cosine_eta_closed(1.0, 1e3) - PI * PI / 8.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_flow_endpoints() {
        let p = InitialProfile::cosine(1.0).unwrap();
        assert_eq!(exp_flow(&p, 0.0, 3.0).unwrap(), 0.0);
        assert!((exp_flow(&p, 1.0, 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((exp_flow(&p, 0.4, 0.0).unwrap() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn appendix_mapping() {
        assert_eq!(a_of_beta(-1.0), 1.0);
        assert_eq!(a_of_beta(0.0), -1.0);
        assert_eq!(a_of_beta(1.0), -3.0);
    }

    #[test]
    fn ansatz_residuals() {
        let r = ansatz_check(&InitialProfile::parabola(1.0).unwrap(), 0.5, 1e-4).unwrap();
        assert!(r.divergence <= 1e-6 && r.curl <= 1e-6, "{r:?}");
        let z = ansatz_check(&InitialProfile::parabola(0.0).unwrap(), 3.0, 1e-3).unwrap();
        assert_eq!(z, AnsatzResidual { divergence: 0.0, curl: 0.0 });
        assert!(ansatz_check(&InitialProfile::parabola(1.0).unwrap(), 0.5, 0.1).is_err());
    }
}
