//! Initial velocity profiles u⁰ on [0, 1] with u⁰(0) = u⁰(1) = 0.
//!
//! Every profile exposes u⁰, u⁰_x and u⁰_xx, the list of points where u⁰_xx jumps,
//! and the extrema of the slope u⁰_x. The slope gaps `u_max - u⁰_x` and
//! `u⁰_x + u_min` are available in cancellation-free form; the bracket integrals
//! use them once the bracket minimum gets close to zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, normalize_breaks, DEFAULT_MAX_PANELS};

/// Relative quadrature tolerance for norms and moments.
const PROFILE_QUAD_TOL: f64 = 1e-14;

/// Sampling density used when extrema have no closed form.
const EXTREMA_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Parabola,
    Zigzag,
    FourierZigzag,
    Cosine,
    Samples,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Parabola => "parabola",
            ProfileKind::Zigzag => "zigzag",
            ProfileKind::FourierZigzag => "fourier_zigzag",
            ProfileKind::Cosine => "cosine",
            ProfileKind::Samples => "samples",
        }
    }
}

impl std::fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parabola" => Ok(ProfileKind::Parabola),
            "zigzag" => Ok(ProfileKind::Zigzag),
            "fourier_zigzag" => Ok(ProfileKind::FourierZigzag),
            "cosine" => Ok(ProfileKind::Cosine),
            "samples" => Ok(ProfileKind::Samples),
            other => Err(Error::InvalidProfile(format!("unknown profile kind `{other}`"))),
        }
    }
}

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Extremal values of the initial slope, with the sign convention
/// `-u_min <= u⁰_x <= u_max` (both reported as non-negative numbers).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeExtrema {
    pub u_min: f64,
    pub u_max: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Shape {
    Parabola,
    Zigzag,
    /// Odd-cosine series for u⁰_x; `modes` counts odd harmonics 1, 3, ..., 2·modes-1.
    Fourier { modes: usize },
    Spline(CubicSpline),
}

#[derive(Debug, Clone)]
pub struct InitialProfile {
    kind: ProfileKind,
    gamma: f64,
    n_modes: Option<usize>,
    samples: Option<Vec<(f64, f64)>>,
    breakpoints: Vec<f64>,
    shape: Shape,
    extrema: SlopeExtrema,
}

/// Serializable description of a profile, used in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub kind: ProfileKind,
    pub gamma: f64,
    pub n_modes: Option<usize>,
    pub n_samples: Option<usize>,
    pub u_min: f64,
    pub u_max: f64,
}

/// Builds a profile from its tag and parameters.
///
/// `gamma` is the amplitude of the analytic kinds; sampled profiles carry their own
/// amplitude and only require `gamma` to be finite.
pub fn make_profile(
    kind: ProfileKind,
    gamma: f64,
    n_modes: Option<usize>,
    samples: Option<Vec<(f64, f64)>>,
) -> Result<InitialProfile> {
    if !gamma.is_finite() {
        return Err(Error::InvalidProfile(format!("gamma must be finite, got {gamma}")));
    }
    match kind {
        ProfileKind::Parabola => Ok(InitialProfile::analytic(kind, gamma, None, Shape::Parabola)),
        ProfileKind::Zigzag => Ok(InitialProfile::analytic(kind, gamma, None, Shape::Zigzag)),
        ProfileKind::Cosine => {
            Ok(InitialProfile::analytic(kind, gamma, Some(1), Shape::Fourier { modes: 1 }))
        }
        ProfileKind::FourierZigzag => {
            let modes = n_modes.filter(|&m| m >= 1).ok_or_else(|| {
                Error::InvalidProfile("fourier_zigzag requires n_modes >= 1".into())
            })?;
            Ok(InitialProfile::analytic(kind, gamma, Some(modes), Shape::Fourier { modes }))
        }
        ProfileKind::Samples => {
            let samples = samples
                .ok_or_else(|| Error::InvalidProfile("samples kind requires sample points".into()))?;
            InitialProfile::from_samples(gamma, samples)
        }
    }
}

impl InitialProfile {
    pub fn parabola(gamma: f64) -> Result<Self> {
        make_profile(ProfileKind::Parabola, gamma, None, None)
    }

    pub fn zigzag(gamma: f64) -> Result<Self> {
        make_profile(ProfileKind::Zigzag, gamma, None, None)
    }

    pub fn fourier_zigzag(gamma: f64, n_modes: usize) -> Result<Self> {
        make_profile(ProfileKind::FourierZigzag, gamma, Some(n_modes), None)
    }

    pub fn cosine(gamma: f64) -> Result<Self> {
        make_profile(ProfileKind::Cosine, gamma, None, None)
    }

    pub fn samples(points: Vec<(f64, f64)>) -> Result<Self> {
        make_profile(ProfileKind::Samples, 1.0, None, Some(points))
    }

    fn analytic(kind: ProfileKind, gamma: f64, n_modes: Option<usize>, shape: Shape) -> Self {
        let g = gamma.abs();
        let (peak, trough) = match shape {
            Shape::Parabola => (vec![1.0], vec![0.0]),
            _ => (vec![0.0, 1.0], vec![0.5]),
        };
        let value = match shape {
            Shape::Parabola | Shape::Zigzag => g,
            Shape::Fourier { modes } => 8.0 * g / (PI * PI) * odd_inverse_square_sum(modes),
            Shape::Spline(_) => unreachable!("spline profiles are built from samples"),
        };
        let extrema = if gamma == 0.0 {
            SlopeExtrema { u_min: 0.0, u_max: 0.0, argmin: vec![], argmax: vec![] }
        } else if gamma > 0.0 {
            SlopeExtrema { u_min: value, u_max: value, argmin: trough, argmax: peak }
        } else {
            let (argmax, argmin) = match shape {
                Shape::Parabola => (vec![0.0], vec![1.0]),
                _ => (vec![0.5], vec![0.0, 1.0]),
            };
            SlopeExtrema { u_min: value, u_max: value, argmin, argmax }
        };
        let breakpoints = match shape {
            Shape::Zigzag => vec![0.5],
            _ => vec![],
        };
        InitialProfile { kind, gamma, n_modes, samples: None, breakpoints, shape, extrema }
    }

    fn from_samples(gamma: f64, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidProfile(format!(
                "need at least 3 samples, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(x, u)| !x.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidProfile("samples must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidProfile("sample abscissae must be strictly increasing".into()));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if first.0 != 0.0 || last.0 != 1.0 {
            return Err(Error::InvalidProfile("samples must cover [0, 1] including both endpoints".into()));
        }
        if first.1.abs() > 1e-12 || last.1.abs() > 1e-12 {
            return Err(Error::InvalidProfile("sampled profile must vanish at 0 and 1".into()));
        }
        let spline = CubicSpline::natural(&points);
        let breakpoints = points[1..points.len() - 1].iter().map(|p| p.0).collect();
        let mut profile = InitialProfile {
            kind: ProfileKind::Samples,
            gamma,
            n_modes: None,
            samples: Some(points),
            breakpoints,
            shape: Shape::Spline(spline),
            extrema: SlopeExtrema { u_min: 0.0, u_max: 0.0, argmin: vec![], argmax: vec![] },
        };
        profile.extrema = profile.sampled_extrema();
        Ok(profile)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_modes(&self) -> Option<usize> {
        self.n_modes
    }

    pub fn sample_points(&self) -> Option<&[(f64, f64)]> {
        self.samples.as_deref()
    }

    /// Points where u⁰_xx jumps, sorted.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slope_extrema(&self) -> &SlopeExtrema {
        &self.extrema
    }

    /// `(u_min, u_max)` with `-u_min <= u⁰_x <= u_max`.
    pub fn extrema_ux(&self) -> (f64, f64) {
        (self.extrema.u_min, self.extrema.u_max)
    }

    pub fn is_zero(&self) -> bool {
        self.extrema.u_min == 0.0 && self.extrema.u_max == 0.0
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            kind: self.kind,
            gamma: self.gamma,
            n_modes: self.n_modes,
            n_samples: self.samples.as_ref().map(Vec::len),
            u_min: self.extrema.u_min,
            u_max: self.extrema.u_max,
        }
    }

    /// Points every quadrature over [0, 1] should split at: breakpoints and the
    /// arg-extrema of u⁰_x.
    pub fn quadrature_breaks(&self) -> Vec<f64> {
        normalize_breaks(
            0.0,
            1.0,
            self.breakpoints
                .iter()
                .chain(&self.extrema.argmin)
                .chain(&self.extrema.argmax)
                .copied(),
        )
    }

    /// u⁰, u⁰_x or u⁰_xx at `xi`. At a breakpoint the second derivative is the
    /// right-sided limit (left-sided at ξ = 1); use [`Self::eval_one_sided`] to choose.
    pub fn eval(&self, order: u8, xi: f64) -> Result<f64> {
        self.eval_one_sided(order, xi, if xi >= 1.0 { Side::Left } else { Side::Right })
    }

    pub fn eval_one_sided(&self, order: u8, xi: f64, side: Side) -> Result<f64> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::OutOfDomain { value: xi, lo: 0.0, hi: 1.0 });
        }
        match order {
            0 => Ok(self.u(xi)),
            1 => Ok(self.ux(xi)),
            2 => Ok(self.uxx_sided(xi, side)),
            _ => Err(Error::InvalidArgument(format!("derivative order {order} not in {{0,1,2}}"))),
        }
    }

    /// u⁰(ξ) without domain checks.
    pub fn u(&self, x: f64) -> f64 {
        let g = self.gamma;
        match &self.shape {
            Shape::Parabola => g * x * (x - 1.0),
            Shape::Zigzag => {
                if x < 0.5 {
                    g * x * (1.0 - 2.0 * x)
                } else {
                    g * (2.0 * x - 1.0) * (x - 1.0)
                }
            }
            Shape::Fourier { modes } => {
                let s: f64 = odd_harmonics(*modes)
                    .map(|n| (2.0 * PI * n * x).sin() / (n * n * n))
                    .sum();
                4.0 * g / (PI * PI * PI) * s
            }
            Shape::Spline(s) => s.value(x, Side::Right),
        }
    }

    /// u⁰_x(ξ) without domain checks.
    pub fn ux(&self, x: f64) -> f64 {
        let g = self.gamma;
        match &self.shape {
            Shape::Parabola => g * (2.0 * x - 1.0),
            Shape::Zigzag => {
                if x < 0.5 {
                    g * (1.0 - 4.0 * x)
                } else {
                    g * (4.0 * x - 3.0)
                }
            }
            Shape::Fourier { modes } => {
                let s: f64 = odd_harmonics(*modes).map(|n| (2.0 * PI * n * x).cos() / (n * n)).sum();
                8.0 * g / (PI * PI) * s
            }
            Shape::Spline(s) => s.slope(x, Side::Right),
        }
    }

    /// u⁰_xx(ξ) without domain checks (right-sided at breakpoints).
    pub fn uxx(&self, x: f64) -> f64 {
        self.uxx_sided(x, Side::Right)
    }

    fn uxx_sided(&self, x: f64, side: Side) -> f64 {
        let g = self.gamma;
        match &self.shape {
            Shape::Parabola => 2.0 * g,
            Shape::Zigzag => {
                let left = x < 0.5 || (x == 0.5 && side == Side::Left);
                if left {
                    -4.0 * g
                } else {
                    4.0 * g
                }
            }
            Shape::Fourier { modes } => {
                let s: f64 = odd_harmonics(*modes).map(|n| (2.0 * PI * n * x).sin() / n).sum();
                -16.0 * g / PI * s
            }
            Shape::Spline(s) => s.curvature(x, side),
        }
    }

    /// `u_max - u⁰_x(ξ) >= 0`, evaluated without cancellation near the maximizers.
    pub fn slope_gap_to_max(&self, x: f64) -> f64 {
        self.slope_gaps(x).0
    }

    /// `u⁰_x(ξ) + u_min >= 0`, evaluated without cancellation near the minimizers.
    pub fn slope_gap_to_min(&self, x: f64) -> f64 {
        self.slope_gaps(x).1
    }

    fn slope_gaps(&self, x: f64) -> (f64, f64) {
        self.slope_gaps_local(0.0, x)
    }

    /// Slope gaps `(u_max − u⁰_x, u⁰_x + u_min)` at ξ = anchor + offset.
    ///
    /// For the analytic kinds and an anchor in {0, ½, 1} the gaps are computed from
    /// the offset alone, so they keep full relative accuracy however small the
    /// offset is. Quadratures near a slope extremum integrate in the offset.
    pub fn slope_gaps_local(&self, anchor: f64, offset: f64) -> (f64, f64) {
        let g = self.gamma.abs();
        let x = anchor + offset;
        let d0 = if anchor == 0.0 { offset } else { x };
        let dh = if anchor == 0.5 { offset } else { x - 0.5 };
        let d1 = if anchor == 1.0 { -offset } else { 1.0 - x };
        // (gap below the peak, gap above the trough) for positive gamma
        let (below_peak, above_trough) = match &self.shape {
            Shape::Parabola => (2.0 * g * d1, 2.0 * g * d0),
            Shape::Zigzag => {
                if dh < 0.0 {
                    (4.0 * g * d0, -4.0 * g * dh)
                } else {
                    (4.0 * g * d1, 4.0 * g * dh)
                }
            }
            Shape::Fourier { modes } => {
                // odd harmonics: a half-period shift swaps sin² and cos²
                let (t, swap) = match anchor {
                    a if a == 0.0 || a == 1.0 => (offset, false),
                    0.5 => (offset, true),
                    _ => (x, false),
                };
                let (mut s, mut c) = (0.0, 0.0);
                for n in odd_harmonics(*modes) {
                    let (sn, cn) = (PI * n * t).sin_cos();
                    s += 2.0 * sn * sn / (n * n);
                    c += 2.0 * cn * cn / (n * n);
                }
                let scale = 8.0 * g / (PI * PI);
                if swap {
                    (scale * c, scale * s)
                } else {
                    (scale * s, scale * c)
                }
            }
            Shape::Spline(_) => {
                let ux = self.ux(x);
                return ((self.extrema.u_max - ux).max(0.0), (ux + self.extrema.u_min).max(0.0));
            }
        };
        if self.gamma >= 0.0 {
            (below_peak, above_trough)
        } else {
            (above_trough, below_peak)
        }
    }

    /// L^p norm of u⁰_x (`derivative = 1`) or u⁰_xx (`derivative = 2`) over (0, 1);
    /// `p = f64::INFINITY` gives the sup norm.
    pub fn norm(&self, derivative: u8, p: f64) -> Result<f64> {
        if !(derivative == 1 || derivative == 2) {
            return Err(Error::InvalidArgument(format!("norm of derivative {derivative}")));
        }
        if !(p > 0.0) {
            return Err(Error::InvalidArgument(format!("norm exponent {p} must be positive")));
        }
        if p == f64::INFINITY {
            return Ok(if derivative == 1 {
                self.extrema.u_min.max(self.extrema.u_max)
            } else {
                self.sup_abs_uxx()
            });
        }
        let integer = p.fract() == 0.0 && p <= 64.0;
        let power = |v: f64| if integer { v.abs().powi(p as i32) } else { v.abs().powf(p) };
        let r = if derivative == 1 {
            integrate(|x| power(self.ux(x)), &self.quadrature_breaks(), PROFILE_QUAD_TOL, DEFAULT_MAX_PANELS)
        } else {
            integrate(|x| power(self.uxx(x)), &self.quadrature_breaks(), PROFILE_QUAD_TOL, DEFAULT_MAX_PANELS)
        };
        match r {
            Ok(q) => Ok(q.value.powf(1.0 / p)),
            Err(Error::QuadratureFailure { estimate, .. }) if estimate > 1e8 => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    /// ∫₀¹ (u⁰_x)^k ds for 1 <= k <= 16.
    pub fn moment_ux(&self, k: u32) -> Result<f64> {
        if !(1..=16).contains(&k) {
            return Err(Error::InvalidArgument(format!("moment order {k} not in 1..=16")));
        }
        let q = integrate(
            |x| self.ux(x).powi(k as i32),
            &self.quadrature_breaks(),
            PROFILE_QUAD_TOL,
            DEFAULT_MAX_PANELS,
        )?;
        Ok(q.value)
    }

    fn sup_abs_uxx(&self) -> f64 {
        let f = |x: f64| self.uxx(x).abs();
        let mut best = self
            .breakpoints
            .iter()
            .map(|&b| self.uxx_sided(b, Side::Left).abs().max(self.uxx_sided(b, Side::Right).abs()))
            .fold(f(0.0).max(self.uxx_sided(1.0, Side::Left).abs()), f64::max);
        let (mut arg, mut grid_best) = (0.0, f64::NEG_INFINITY);
        for i in 0..=EXTREMA_GRID {
            let x = i as f64 / EXTREMA_GRID as f64;
            let v = f(x);
            if v > grid_best {
                grid_best = v;
                arg = x;
            }
        }
        let h = 1.0 / EXTREMA_GRID as f64;
        let (_, polished) = golden_max(f, (arg - h).max(0.0), (arg + h).min(1.0));
        best = best.max(grid_best).max(polished);
        best
    }

    fn sampled_extrema(&self) -> SlopeExtrema {
        let h = 1.0 / EXTREMA_GRID as f64;
        let (mut imin, mut imax) = (0usize, 0usize);
        let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=EXTREMA_GRID {
            let v = self.ux(i as f64 * h);
            if v < vmin {
                vmin = v;
                imin = i;
            }
            if v > vmax {
                vmax = v;
                imax = i;
            }
        }
        let bracket = |i: usize| (((i as f64) - 1.0) * h).max(0.0)..=(((i as f64) + 1.0) * h).min(1.0);
        let rmax = bracket(imax);
        let (xmax, pmax) = golden_max(|x| self.ux(x), *rmax.start(), *rmax.end());
        let rmin = bracket(imin);
        let (xmin, pmin) = golden_max(|x| -self.ux(x), *rmin.start(), *rmin.end());
        let (xmax, umax) = if pmax > vmax { (xmax, pmax) } else { (imax as f64 * h, vmax) };
        let (xmin, umin) = if pmin > -vmin { (xmin, pmin) } else { (imin as f64 * h, -vmin) };
        SlopeExtrema {
            u_min: umin.max(0.0),
            u_max: umax.max(0.0),
            argmin: vec![xmin],
            argmax: vec![xmax],
        }
    }
}

fn odd_harmonics(modes: usize) -> impl Iterator<Item = f64> {
    (0..modes).map(|k| (2 * k + 1) as f64)
}

fn odd_inverse_square_sum(modes: usize) -> f64 {
    odd_harmonics(modes).map(|n| 1.0 / (n * n)).sum()
}

/// Golden-section search for the maximum of a unimodal `f` on [a, b].
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Natural cubic spline; u_x is continuous and u_xx is piecewise linear.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    fn natural(points: &[(f64, f64)]) -> Self {
        let n = points.len();
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        CubicSpline { x, y, m }
    }

    fn interval(&self, t: f64, side: Side) -> usize {
        let last = self.x.len() - 2;
        let idx = match side {
            Side::Right => self.x.partition_point(|&k| k <= t),
            Side::Left => self.x.partition_point(|&k| k < t),
        };
        idx.saturating_sub(1).min(last)
    }

    fn value(&self, t: f64, side: Side) -> f64 {
        let i = self.interval(t, side);
        let h = self.x[i + 1] - self.x[i];
        let (a, b) = (self.x[i + 1] - t, t - self.x[i]);
        self.m[i] * a * a * a / (6.0 * h)
            + self.m[i + 1] * b * b * b / (6.0 * h)
            + (self.y[i] / h - self.m[i] * h / 6.0) * a
            + (self.y[i + 1] / h - self.m[i + 1] * h / 6.0) * b
    }

    fn slope(&self, t: f64, side: Side) -> f64 {
        let i = self.interval(t, side);
        let h = self.x[i + 1] - self.x[i];
        let (a, b) = (self.x[i + 1] - t, t - self.x[i]);
        -self.m[i] * a * a / (2.0 * h) + self.m[i + 1] * b * b / (2.0 * h) + (self.y[i + 1] - self.y[i]) / h
            - (self.m[i + 1] - self.m[i]) * h / 6.0
    }

    fn curvature(&self, t: f64, side: Side) -> f64 {
        let i = self.interval(t, side);
        let h = self.x[i + 1] - self.x[i];
        (self.m[i] * (self.x[i + 1] - t) + self.m[i + 1] * (t - self.x[i])) / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn parabola_values() {
        let p = InitialProfile::parabola(1.0).unwrap();
        assert!(close(p.eval(0, 0.5).unwrap(), -0.25, 1e-15));
        for xi in [0.0, 0.3, 1.0] {
            assert_eq!(p.eval(2, xi).unwrap(), 2.0);
        }
        assert_eq!(p.extrema_ux(), (1.0, 1.0));
        assert!(p.breakpoints().is_empty());
    }

    #[test]
    fn zigzag_values() {
        let p = InitialProfile::zigzag(1.0).unwrap();
        assert_eq!(p.eval(1, 0.0).unwrap(), 1.0);
        assert_eq!(p.eval(1, 0.5).unwrap(), -1.0);
        assert_eq!(p.eval(1, 0.25).unwrap(), 0.0);
        assert_eq!(p.breakpoints(), &[0.5]);
        assert_eq!(p.eval_one_sided(2, 0.5, Side::Left).unwrap(), -4.0);
        assert_eq!(p.eval_one_sided(2, 0.5, Side::Right).unwrap(), 4.0);
        let p2 = InitialProfile::zigzag(2.0).unwrap();
        assert_eq!(p2.extrema_ux(), (2.0, 2.0));
        // u⁰ is the antiderivative of u⁰_x
        for x in [0.1, 0.4, 0.6, 0.9] {
            let h = 1e-6;
            let fd = (p.u(x + h) - p.u(x - h)) / (2.0 * h);
            assert!(close(fd, p.ux(x), 1e-8));
        }
    }

    #[test]
    fn cosine_and_one_mode_series_agree() {
        let c = InitialProfile::cosine(1.0).unwrap();
        let f = InitialProfile::fourier_zigzag(1.0, 1).unwrap();
        let k = 8.0 / (PI * PI);
        assert!(close(c.eval(1, 0.0).unwrap(), k, 1e-15));
        assert!(close(c.eval(1, 0.0).unwrap(), 0.810_569_469_138_702, 1e-12));
        for x in [0.0, 0.13, 0.5, 0.77] {
            assert!(close(f.ux(x), k * (2.0 * PI * x).cos(), 1e-15));
            assert_eq!(c.ux(x), f.ux(x));
        }
        let (umin, umax) = c.extrema_ux();
        assert!(close(umin, k, 1e-15) && close(umax, k, 1e-15));
    }

    #[test]
    fn derivatives_are_consistent_for_fourier() {
        let p = InitialProfile::fourier_zigzag(0.7, 5).unwrap();
        let h = 1e-5;
        for x in [0.11, 0.37, 0.62, 0.93] {
            let d1 = (p.u(x + h) - p.u(x - h)) / (2.0 * h);
            let d2 = (p.ux(x + h) - p.ux(x - h)) / (2.0 * h);
            assert!(close(d1, p.ux(x), 1e-8), "{d1} {}", p.ux(x));
            assert!(close(d2, p.uxx(x), 1e-6), "{d2} {}", p.uxx(x));
        }
    }

    #[test]
    fn norms_and_moments() {
        let p = InitialProfile::parabola(1.0).unwrap();
        assert!(close(p.norm(1, 2.0).unwrap(), 1.0 / 3f64.sqrt(), 1e-14));
        assert!(close(p.norm(2, f64::INFINITY).unwrap(), 2.0, 0.0));
        assert!(close(p.moment_ux(3).unwrap(), 0.0, 1e-15));
        assert!(close(p.moment_ux(2).unwrap(), 1.0 / 3.0, 1e-15));
        let z = InitialProfile::zigzag(1.0).unwrap();
        assert!(close(z.norm(1, 2.0).unwrap(), 1.0 / 3f64.sqrt(), 1e-14));
        assert!(close(z.moment_ux(1).unwrap(), 0.0, 1e-15));
        assert!(z.moment_ux(0).is_err());
        assert!(z.moment_ux(17).is_err());
        assert!(z.norm(3, 2.0).is_err());
        assert!(z.norm(1, 0.0).is_err());
    }

    #[test]
    fn sup_norm_of_fourier_curvature() {
        // one mode: u_xx = -(16γ/π) sin(2πx), sup = 16/π
        let c = InitialProfile::cosine(1.0).unwrap();
        assert!(close(c.norm(2, f64::INFINITY).unwrap(), 16.0 / PI, 1e-12));
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        let p = InitialProfile::parabola(1.0).unwrap();
        assert!(matches!(p.eval(0, -0.1), Err(Error::OutOfDomain { .. })));
        assert!(matches!(p.eval(1, 1.5), Err(Error::OutOfDomain { .. })));
        assert!(p.eval(3, 0.5).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(InitialProfile::parabola(f64::NAN).is_err());
        assert!(InitialProfile::fourier_zigzag(1.0, 0).is_err());
        assert!(make_profile(ProfileKind::FourierZigzag, 1.0, None, None).is_err());
        assert!(InitialProfile::samples(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(InitialProfile::samples(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.1)]).is_err());
        assert!(InitialProfile::samples(vec![(0.0, 0.0), (0.6, 1.0), (0.5, 1.0), (1.0, 0.0)]).is_err());
        assert!(InitialProfile::samples(vec![(0.1, 0.0), (0.5, 1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn sampled_parabola_is_close_to_exact() {
        let n = 257;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                (x, x * (x - 1.0))
            })
            .collect();
        let s = InitialProfile::samples(pts).unwrap();
        assert_eq!(s.breakpoints().len(), n - 2);
        assert!(s.u(0.0).abs() < 1e-15 && s.u(1.0).abs() < 1e-15);
        for x in [0.1, 0.5, 0.9] {
            assert!(close(s.u(x), x * (x - 1.0), 1e-6));
            assert!(close(s.ux(x), 2.0 * x - 1.0, 1e-4));
        }
        let (umin, umax) = s.extrema_ux();
        assert!(close(umin, 1.0, 1e-2) && close(umax, 1.0, 1e-2));
        assert!(s.moment_ux(1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn slope_gaps_match_direct_differences() {
        let profiles = [
            InitialProfile::parabola(1.3).unwrap(),
            InitialProfile::parabola(-0.8).unwrap(),
            InitialProfile::zigzag(0.9).unwrap(),
            InitialProfile::zigzag(-1.1).unwrap(),
            InitialProfile::fourier_zigzag(1.0, 3).unwrap(),
            InitialProfile::fourier_zigzag(-2.0, 4).unwrap(),
        ];
        for p in &profiles {
            let (umin, umax) = p.extrema_ux();
            for i in 0..=40 {
                let x = i as f64 / 40.0;
                assert!(close(p.slope_gap_to_max(x), umax - p.ux(x), 1e-13), "{:?} {x}", p.kind());
                assert!(close(p.slope_gap_to_min(x), p.ux(x) + umin, 1e-13), "{:?} {x}", p.kind());
                assert!(p.slope_gap_to_max(x) >= 0.0 && p.slope_gap_to_min(x) >= 0.0);
            }
            for &x in &p.slope_extrema().argmax {
                assert!(close(p.ux(x), umax, 1e-14));
            }
            for &x in &p.slope_extrema().argmin {
                assert!(close(p.ux(x), -umin, 1e-14));
            }
        }
    }

    #[test]
    fn local_gaps_agree_with_global_and_resolve_tiny_offsets() {
        let f = InitialProfile::fourier_zigzag(1.0, 3).unwrap();
        let z = InitialProfile::zigzag(-1.0).unwrap();
        for p in [&f, &z] {
            for anchor in [0.0, 0.5, 1.0] {
                for d in [-0.2, -0.01, 0.03, 0.2] {
                    let x = anchor + d;
                    if !(0.0..=1.0).contains(&x) {
                        continue;
                    }
                    let (a, b) = p.slope_gaps_local(anchor, d);
                    assert!(close(a, p.slope_gap_to_max(x), 1e-13));
                    assert!(close(b, p.slope_gap_to_min(x), 1e-13));
                }
            }
        }
        // u_max − u⁰_x ≈ (8/π²)·Σ 2π²n²d²/n² · ... = 16·3·d² for three modes near ξ = 1
        let d = 1e-12;
        let (gap, _) = f.slope_gaps_local(1.0, -d);
        assert!(((gap - 48.0 * d * d) / gap).abs() < 1e-10, "{gap}");
        let (gap, _) = f.slope_gaps_local(0.5, d);
        assert!((gap - 2.0 * f.extrema_ux().1).abs() < 1e-12);
    }

    #[test]
    fn zero_profile_has_no_extremal_points() {
        let p = InitialProfile::parabola(0.0).unwrap();
        assert!(p.is_zero());
        assert!(p.slope_extrema().argmax.is_empty());
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for k in [
            ProfileKind::Parabola,
            ProfileKind::Zigzag,
            ProfileKind::FourierZigzag,
            ProfileKind::Cosine,
            ProfileKind::Samples,
        ] {
            assert_eq!(k.as_str().parse::<ProfileKind>().unwrap(), k);
        }
        assert!("hat".parse::<ProfileKind>().is_err());
    }
}
