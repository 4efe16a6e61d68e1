//! The bracket B(ξ;η) = 1 − η(a+1)/2·u⁰_x(ξ) and its integrals.
//!
//! With α = −2/(a+1):
//!
//! * I(η) = ∫₀¹ B^α ds
//! * J(ξ;η) = ∫₀^ξ B^α ds
//! * W(ξ;η) = ∫₀^ξ B^(α−1) u⁰_x ds = ∂J/∂η
//! * ψ(η) = ∫₀¹ B^(−1) ds
//!
//! Near the critical clock value the bracket minimum m = min_ξ B is tiny and
//! `1 − η(a+1)/2·u⁰_x` loses every significant digit. The `_at` variants take a
//! [`ClockPoint`] that carries m explicitly, and B is rebuilt from the profile's
//! slope gaps, which keeps full relative accuracy down to m ~ 1e−300.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::InitialProfile;
use crate::quadrature::{integrate, normalize_breaks, DEFAULT_MAX_PANELS};

/// |a+1| at or below this is treated as a = −1.
pub const CRITICAL_A_TOL: f64 = 1e-9;

/// Default quadrature tolerance for the bracket integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Below this bracket minimum the integration mesh is seeded geometrically
/// toward the minimizing ξ.
pub const GRADED_MESH_THRESHOLD: f64 = 1e-3;

/// Decrement-ratio threshold of the ψ² integrability classifier.
pub const PSI_SQ_RATIO: f64 = 0.9;
/// Partial-integral cap above which ψ² is declared divergent.
pub const PSI_SQ_CAP: f64 = 1e6;
/// Partial integrals run over [0, η_max(1 − 2^(−k))] for k in this range.
pub const PSI_SQ_K_FIRST: u32 = 4;
pub const PSI_SQ_K_LAST: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
    PeriodicMeanfree,
}

/// Rows of the a ↔ α table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// a < −3, 0 < α < 1
    BelowMinusThree,
    /// −3 ≤ a < −1, α ≥ 1
    MinusThreeToMinusOne,
    /// a = −1, α undefined
    MinusOne,
    /// −1 < a < 0, α < −2
    MinusOneToZero,
    /// 0 ≤ a < 1, −2 ≤ α < −1
    ZeroToOne,
    /// a ≥ 1, −1 ≤ α < 0
    OneAndAbove,
}

impl Regime {
    pub fn of(a: f64) -> Regime {
        if (a + 1.0).abs() <= CRITICAL_A_TOL {
            Regime::MinusOne
        } else if a < -3.0 {
            Regime::BelowMinusThree
        } else if a < -1.0 {
            Regime::MinusThreeToMinusOne
        } else if a < 0.0 {
            Regime::MinusOneToZero
        } else if a < 1.0 {
            Regime::ZeroToOne
        } else {
            Regime::OneAndAbove
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    a: f64,
    alpha: Option<f64>,
    regime: Regime,
    bc: BoundaryCondition,
}

impl ModelParams {
    pub fn new(a: f64) -> Result<Self> {
        Self::with_bc(a, BoundaryCondition::Dirichlet)
    }

    pub fn with_bc(a: f64, bc: BoundaryCondition) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidArgument(format!("a must be finite, got {a}")));
        }
        let regime = Regime::of(a);
        let alpha = (regime != Regime::MinusOne).then(|| -2.0 / (a + 1.0));
        Ok(ModelParams { a, alpha, regime, bc })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// α = −2/(a+1); an error at a = −1.
    pub fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or(Error::UndefinedAlpha)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// True when a is within [`CRITICAL_A_TOL`] of −1.
    pub fn is_minus_one(&self) -> bool {
        self.alpha.is_none()
    }
}

/// A clock value together with the bracket minimum 1 − η/η_crit it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockPoint {
    pub eta: f64,
    pub min_bracket: f64,
}

impl ClockPoint {
    /// Clock point for `eta`, with the bracket minimum computed as 1 − η/η_crit.
    pub fn from_eta(profile: &InitialProfile, params: &ModelParams, eta: f64) -> Result<Self> {
        let crit = critical_eta(profile, params)?;
        Ok(ClockPoint { eta, min_bracket: min_bracket_for(eta, crit) })
    }

    /// Clock point at bracket minimum `m` (only meaningful when η_crit is finite).
    pub fn from_min_bracket(eta_crit: f64, m: f64) -> Self {
        ClockPoint { eta: eta_crit * (1.0 - m), min_bracket: m }
    }
}

fn min_bracket_for(eta: f64, crit: f64) -> f64 {
    if crit.is_finite() {
        1.0 - eta / crit
    } else {
        1.0
    }
}

/// Smallest η > 0 at which min_ξ B vanishes; +∞ when the closing extremum is zero.
pub fn critical_eta(profile: &InitialProfile, params: &ModelParams) -> Result<f64> {
    if params.is_minus_one() {
        return Err(Error::UndefinedAlpha);
    }
    let a1 = params.a() + 1.0;
    let (u_min, u_max) = profile.extrema_ux();
    let crit = if a1 > 0.0 {
        if u_max > 0.0 {
            2.0 / (a1 * u_max)
        } else {
            f64::INFINITY
        }
    } else if u_min > 0.0 {
        -2.0 / (a1 * u_min)
    } else {
        f64::INFINITY
    };
    Ok(crit)
}

#[derive(Debug, Clone, Copy)]
enum Closing {
    /// B = 1 − η(a+1)/2·u⁰_x evaluated directly.
    Direct { scale: f64 },
    /// a+1 > 0: B = (gap_max + m·u⁰_x)/u_max.
    AtMax { u_max: f64 },
    /// a+1 < 0: B = (gap_min − m·u⁰_x)/u_min.
    AtMin { u_min: f64 },
}

/// The bracket at a fixed clock point.
#[derive(Debug, Clone)]
pub struct Bracket<'p> {
    profile: &'p InitialProfile,
    alpha: f64,
    clock: ClockPoint,
    closing: Closing,
}

impl<'p> Bracket<'p> {
    pub fn new(profile: &'p InitialProfile, params: &ModelParams, clock: ClockPoint) -> Result<Self> {
        let alpha = params.alpha()?;
        if !(clock.eta >= 0.0) || !clock.eta.is_finite() {
            return Err(Error::InvalidArgument(format!("eta must be finite and >= 0, got {}", clock.eta)));
        }
        if !(clock.min_bracket > 0.0) {
            return Err(Error::BracketNonpositive { eta: clock.eta, min_bracket: clock.min_bracket });
        }
        let a1 = params.a() + 1.0;
        let (u_min, u_max) = profile.extrema_ux();
        let closing = if clock.eta == 0.0 {
            Closing::Direct { scale: 0.0 }
        } else if a1 > 0.0 && u_max > 0.0 {
            Closing::AtMax { u_max }
        } else if a1 < 0.0 && u_min > 0.0 {
            Closing::AtMin { u_min }
        } else {
            Closing::Direct { scale: clock.eta * a1 / 2.0 }
        };
        Ok(Bracket { profile, alpha, clock, closing })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn clock(&self) -> ClockPoint {
        self.clock
    }

    /// B(ξ) > 0.
    pub fn value(&self, x: f64) -> f64 {
        self.local(0.0, x).0
    }

    /// (B, u⁰_x) at ξ = anchor + offset, with the gaps resolved relative to the anchor.
    fn local(&self, anchor: f64, offset: f64) -> (f64, f64) {
        let x = anchor + offset;
        let ux = self.profile.ux(x);
        let m = self.clock.min_bracket;
        let b = match self.closing {
            Closing::Direct { scale } => 1.0 - scale * ux,
            Closing::AtMax { u_max } => {
                (self.profile.slope_gaps_local(anchor, offset).0 + m * ux) / u_max
            }
            Closing::AtMin { u_min } => {
                (self.profile.slope_gaps_local(anchor, offset).1 - m * ux) / u_min
            }
        };
        (b, ux)
    }

    /// Where B attains its minimum.
    fn minimizers(&self) -> &[f64] {
        let ext = self.profile.slope_extrema();
        match self.closing {
            Closing::Direct { .. } => &[],
            Closing::AtMax { .. } => &ext.argmax,
            Closing::AtMin { .. } => &ext.argmin,
        }
    }

    /// Integrates `f(B, u⁰_x)` over [lo, hi].
    ///
    /// The interval is split at profile kinks, slope extrema and bracket minimizers.
    /// Pieces that touch a minimizer are integrated in the offset from it, and when
    /// the bracket nearly closes they are seeded with a geometric mesh toward it.
    fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let mins = self.minimizers();
        let is_min = |x: f64| mins.contains(&x);
        let mut pts = normalize_breaks(
            lo,
            hi,
            self.profile.quadrature_breaks().into_iter().chain(mins.iter().copied()),
        );
        // a piece bounded by two minimizers gets a midpoint so each half has one anchor
        let mut i = 0;
        while i + 1 < pts.len() {
            if is_min(pts[i]) && is_min(pts[i + 1]) {
                pts.insert(i + 1, 0.5 * (pts[i] + pts[i + 1]));
            }
            i += 1;
        }
        let graded = self.clock.min_bracket < GRADED_MESH_THRESHOLD;
        let floor = (self.clock.min_bracket * 1e-3).max(1e-300);
        let piece_tol = tol / (pts.len() - 1) as f64;
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let (anchored, anchor, d_lo, d_hi) = if is_min(q) {
                (true, q, p - q, 0.0)
            } else if is_min(p) {
                (true, p, 0.0, q - p)
            } else {
                (false, 0.0, p, q)
            };
            let mut seeds = Vec::new();
            if graded && anchored {
                let mut d = 0.25;
                while d > floor {
                    seeds.push(d);
                    seeds.push(-d);
                    d *= 0.5;
                }
            }
            let breaks = normalize_breaks(d_lo, d_hi, seeds);
            let r = integrate(
                |d| {
                    let (b, ux) = self.local(anchor, d);
                    f(b, ux)
                },
                &breaks,
                piece_tol,
                DEFAULT_MAX_PANELS,
            )?;
            total += r.value;
        }
        Ok(total)
    }

    /// ∫_lo^hi B^α.
    pub fn integral_pow(&self, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        let alpha = self.alpha;
        self.integrate(|b, _| pow(b, alpha), lo, hi, tol)
    }

    /// ∫_lo^hi B^(α−1) u⁰_x.
    pub fn integral_weighted(&self, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        let e = self.alpha - 1.0;
        self.integrate(|b, ux| pow(b, e) * ux, lo, hi, tol)
    }

    /// ∫_lo^hi B^(−1).
    pub fn integral_harmonic(&self, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        self.integrate(|b, _| 1.0 / b, lo, hi, tol)
    }

    /// J and W at every point of the sorted grid `xs ⊂ [0, 1]`, accumulated
    /// segment by segment.
    pub fn cumulative(&self, xs: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if xs.iter().any(|x| !(0.0..=1.0).contains(x)) {
            let bad = xs.iter().copied().find(|x| !(0.0..=1.0).contains(x)).unwrap_or(f64::NAN);
            return Err(Error::OutOfDomain { value: bad, lo: 0.0, hi: 1.0 });
        }
        if xs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("grid must be sorted".into()));
        }
        let mut j = Vec::with_capacity(xs.len());
        let mut w = Vec::with_capacity(xs.len());
        let (mut acc_j, mut acc_w, mut prev) = (0.0, 0.0, 0.0);
        for &x in xs {
            acc_j += self.integral_pow(prev, x, tol)?;
            acc_w += self.integral_weighted(prev, x, tol)?;
            j.push(acc_j);
            w.push(acc_w);
            prev = x;
        }
        Ok((j, w))
    }
}

/// `b^e` with the integer cases of the common parameter values kept exact.
#[inline]
fn pow(b: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() <= 16.0 {
        b.powi(e as i32)
    } else {
        b.powf(e)
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { value: xi, lo: 0.0, hi: 1.0 })
    }
}

/// B(ξ;η) = 1 − η(a+1)/2·u⁰_x(ξ).
pub fn bracket_value(profile: &InitialProfile, params: &ModelParams, eta: f64, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    params.alpha()?;
    Ok(1.0 - eta * (params.a() + 1.0) / 2.0 * profile.ux(xi))
}

/// min_ξ B(ξ;η) = 1 − η/η_crit.
pub fn min_bracket(profile: &InitialProfile, params: &ModelParams, eta: f64) -> Result<f64> {
    Ok(min_bracket_for(eta, critical_eta(profile, params)?))
}

fn at_eta<'p>(profile: &'p InitialProfile, params: &ModelParams, eta: f64) -> Result<Bracket<'p>> {
    Bracket::new(profile, params, ClockPoint::from_eta(profile, params, eta)?)
}

/// I(η) = ∫₀¹ B^α.
pub fn integral_i(profile: &InitialProfile, params: &ModelParams, eta: f64, tol: f64) -> Result<f64> {
    at_eta(profile, params, eta)?.integral_pow(0.0, 1.0, tol)
}

/// J(ξ;η) = ∫₀^ξ B^α.
pub fn integral_j(profile: &InitialProfile, params: &ModelParams, eta: f64, xi: f64, tol: f64) -> Result<f64> {
    check_xi(xi)?;
    at_eta(profile, params, eta)?.integral_pow(0.0, xi, tol)
}

/// W(ξ;η) = ∫₀^ξ B^(α−1) u⁰_x = ∂J/∂η.
pub fn integral_w(profile: &InitialProfile, params: &ModelParams, eta: f64, xi: f64, tol: f64) -> Result<f64> {
    check_xi(xi)?;
    at_eta(profile, params, eta)?.integral_weighted(0.0, xi, tol)
}

/// ψ(η) = ∫₀¹ B^(−1); requires a > −1.
pub fn psi_value(profile: &InitialProfile, params: &ModelParams, eta: f64, tol: f64) -> Result<f64> {
    if !(params.a() > -1.0) || params.is_minus_one() {
        return Err(Error::InvalidArgument(format!("psi needs a > -1, got {}", params.a())));
    }
    at_eta(profile, params, eta)?.integral_harmonic(0.0, 1.0, tol)
}

/// I and W(1) at a clock point; the pair the clock ODE needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketIntegrals {
    pub i: f64,
    pub w1: f64,
}

pub fn integrals_at(
    profile: &InitialProfile,
    params: &ModelParams,
    clock: ClockPoint,
    tol: f64,
) -> Result<BracketIntegrals> {
    let b = Bracket::new(profile, params, clock)?;
    Ok(BracketIntegrals { i: b.integral_pow(0.0, 1.0, tol)?, w1: b.integral_weighted(0.0, 1.0, tol)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Integrability {
    Finite(f64),
    Divergent,
}

/// Outcome of the ψ² test together with the evidence it was based on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiSquareReport {
    pub verdict: Integrability,
    pub eta_max: f64,
    /// Partial integrals P_k for k = 4..=20 (stops early on the cap).
    pub partials: Vec<f64>,
    /// Ratios of successive increments of the partials.
    pub ratios: Vec<f64>,
    pub ratio_threshold: f64,
    pub cap: f64,
}

/// Decides whether ψ² is integrable on [0, η_max), η_max = 2/((a+1)u_max).
///
/// The partial integrals are taken in the variable s = −ln(1 − η/η_max), where
/// every halving of the distance to η_max is a unit-length piece.
pub fn psi_sq_integrable(profile: &InitialProfile, params: &ModelParams, tol: f64) -> Result<PsiSquareReport> {
    if !(params.a() >= 1.0) {
        return Err(Error::InvalidArgument(format!("psi^2 test needs a >= 1, got {}", params.a())));
    }
    let (_, u_max) = profile.extrema_ux();
    if !(u_max > 0.0) {
        return Err(Error::InvalidArgument("psi^2 test needs u_max > 0".into()));
    }
    let eta_max = critical_eta(profile, params)?;
    let inner_tol = (tol * 1e-2).max(1e-13);
    let mut failure = None;
    let mut piece = |s0: f64, s1: f64| -> Result<f64> {
        let r = integrate(
            |s| {
                let m = (-s).exp();
                let clock = ClockPoint::from_min_bracket(eta_max, m);
                match Bracket::new(profile, params, clock).and_then(|b| b.integral_harmonic(0.0, 1.0, inner_tol)) {
                    Ok(psi) => psi * psi * eta_max * m,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &[s0, s1],
            tol,
            DEFAULT_MAX_PANELS,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(r?.value)
    };

    let ln2 = std::f64::consts::LN_2;
    let mut partials = vec![piece(0.0, PSI_SQ_K_FIRST as f64 * ln2)?];
    let mut ratios = Vec::new();
    let mut verdict = None;
    for k in PSI_SQ_K_FIRST + 1..=PSI_SQ_K_LAST {
        let last = *partials.last().unwrap();
        let next = last + piece((k - 1) as f64 * ln2, k as f64 * ln2)?;
        partials.push(next);
        let n = partials.len();
        if n >= 3 {
            let d1 = partials[n - 1] - partials[n - 2];
            let d0 = partials[n - 2] - partials[n - 3];
            ratios.push(if d0 > 0.0 { d1 / d0 } else { f64::INFINITY });
        }
        if next > PSI_SQ_CAP {
            verdict = Some(Integrability::Divergent);
            break;
        }
    }
    let verdict = match verdict {
        Some(v) => v,
        None => {
            let tail = &ratios[ratios.len().saturating_sub(4)..];
            if tail.len() == 4 && tail.iter().all(|&r| r <= PSI_SQ_RATIO) {
                let n = partials.len();
                let d = partials[n - 1] - partials[n - 2];
                let r = *tail.last().unwrap();
                Integrability::Finite(partials[n - 1] + d * r / (1.0 - r))
            } else if tail.len() == 4 && tail.iter().all(|&r| r > PSI_SQ_RATIO) {
                Integrability::Divergent
            } else {
                return Err(Error::Undecidable(format!(
                    "psi^2 partial integrals neither converge nor diverge clearly (ratios {tail:?})"
                )));
            }
        }
    };
    Ok(PsiSquareReport { verdict, eta_max, partials, ratios, ratio_threshold: PSI_SQ_RATIO, cap: PSI_SQ_CAP })
}
