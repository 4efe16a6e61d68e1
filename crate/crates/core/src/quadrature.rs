//! Adaptive composite Gauss-Legendre quadrature.
//!
//! Every panel carries a 15-point rule on the whole panel and on both halves; the
//! difference is the panel's error estimate. The panel with the largest estimate is
//! bisected until the summed estimate meets the target. Callers pass the initial
//! break points (kinks, peaks, graded seeds), which is where all of the problem
//! knowledge goes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Points per panel.
pub const PANEL_POINTS: usize = 15;

/// Default panel budget for a single integral.
pub const DEFAULT_MAX_PANELS: usize = 6000;

static GL15: LazyLock<(Vec<f64>, Vec<f64>)> = LazyLock::new(|| gauss_legendre(PANEL_POINTS));

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Roots of P_n are found by Newton iteration from the Chebyshev-like initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed 15-point rule on [a, b].
pub fn gl15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = &*GL15;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    whole: f64,
    left: f64,
    right: f64,
}

impl Panel {
    fn new<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64) -> Self {
        let m = 0.5 * (a + b);
        let left = gl15(f, a, m);
        let right = gl15(f, m, b);
        Panel { a, b, whole, left, right }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }

    fn error(&self) -> f64 {
        (self.whole - self.value()).abs()
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error().total_cmp(&other.error())
    }
}

/// Integrates `f` over [breaks[0], breaks[last]], starting from one panel per
/// consecutive pair of break points.
///
/// `tol` is absolute for integrals below unit magnitude and relative above.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let whole = gl15(&mut f, a, b);
        heap.push(Panel::new(&mut f, a, b, whole));
    }
    let mut panels = heap.len();
    loop {
        let (value, error, magnitude) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value(), acc.1 + p.error(), acc.2 + p.value().abs())
        });
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NumericalFailure(
                "non-finite integrand value in quadrature".into(),
            ));
        }
        let target = (tol * value.abs().max(1.0)).max(1e3 * f64::EPSILON * magnitude);
        if error <= target {
            return Ok(QuadResult { value, error, panels });
        }
        if panels >= max_panels {
            return Err(Error::QuadratureFailure { estimate: value, error });
        }
        // Split the worst panels in a batch so the O(n) bookkeeping above stays cheap.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b {
                // Panel at floating-point resolution; keep its estimate as is.
                heap.push(Panel { whole: worst.value(), ..worst });
                continue;
            }
            heap.push(Panel::new(&mut f, worst.a, m, worst.left));
            heap.push(Panel::new(&mut f, m, worst.b, worst.right));
            panels += 1;
        }
    }
}

/// Sorts, clamps to [lo, hi] and de-duplicates candidate break points, always
/// including both ends.
pub fn normalize_breaks(lo: f64, hi: f64, candidates: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = candidates
        .into_iter()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
