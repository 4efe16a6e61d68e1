//! Global-existence and blow-up criteria, evaluated clause by clause.
//!
//! Clause ids follow the main existence theorem (A1, A2, B, C, D, E, F) plus G for
//! the improved polynomial criterion. Every applicable clause is evaluated and
//! reported; the verdict cites the first satisfied one in the order
//! A1, A2, B, C, D, E, G, F.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::bracket::{critical_eta, psi_sq_integrable, Integrability, ModelParams, Regime};
use crate::error::{Error, Result};
use crate::profiles::InitialProfile;

/// Norms at or above this count as divergent when deciding L^p membership.
pub const LP_DIVERGENCE_CAP: f64 = 1e8;

/// Number of candidate exponents q tried for clause A2.
pub const A2_GRID_POINTS: usize = 16;

/// Default largest polynomial degree tried for clause G.
pub const DEFAULT_N_IMPROVED: usize = 4;

/// Largest degree accepted by [`improved_root`].
pub const MAX_N_IMPROVED: usize = 12;

/// Tolerance handed to the ψ² test of clause F.
const PSI_SQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClauseId {
    A1,
    A2,
    B,
    C,
    D,
    E,
    G,
    F,
    /// The zero profile: the stationary solution, global by inspection.
    #[serde(rename = "C-analogue")]
    CAnalogue,
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClauseId::A1 => "A1",
            ClauseId::A2 => "A2",
            ClauseId::B => "B",
            ClauseId::C => "C",
            ClauseId::D => "D",
            ClauseId::E => "E",
            ClauseId::G => "G",
            ClauseId::F => "F",
            ClauseId::CAnalogue => "C-analogue",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Global,
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub id: ClauseId,
    /// What the clause concludes when satisfied.
    pub outcome: Outcome,
    pub applicable: bool,
    pub satisfied: bool,
    /// Numbers the decision was based on.
    pub detail: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Clause {
    fn new(id: ClauseId, outcome: Outcome, applicable: bool) -> Self {
        Clause { id, outcome, applicable, satisfied: false, detail: BTreeMap::new(), note: None }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    GlobalByTheorem(ClauseId),
    SingularByTheorem { clause: ClauseId, time_bound: Option<f64> },
    Inconclusive,
}

impl Verdict {
    pub fn is_global(&self) -> bool {
        matches!(self, Verdict::GlobalByTheorem(_))
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Verdict::SingularByTheorem { .. })
    }

    pub fn time_bound(&self) -> Option<f64> {
        match self {
            Verdict::SingularByTheorem { time_bound, .. } => *time_bound,
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::GlobalByTheorem(c) => write!(f, "GlobalByTheorem({c})"),
            Verdict::SingularByTheorem { clause, .. } => write!(f, "SingularByTheorem({clause})"),
            Verdict::Inconclusive => f.write_str("Inconclusive"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub a: f64,
    pub regime: Regime,
    pub u_min: f64,
    pub u_max: f64,
    pub ux_l2: f64,
    pub n_improved: usize,
    pub clauses: Vec<Clause>,
    pub verdict: Verdict,
    /// Bound on the blow-up time carried by the verdict, if any.
    pub time_bound: Option<f64>,
    /// False when a global and a singular clause are both satisfied.
    pub consistency_flag: bool,
}

impl CriteriaReport {
    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }
}

/// (1+x)^α − [α(α−1)x²/2 + αx + α(3−α)/2] for x > −1, 0 < α < 1.
pub fn reverse_bernoulli_gap(x: f64, alpha: f64) -> Result<f64> {
    if !(x > -1.0) || !x.is_finite() {
        return Err(Error::OutOfDomain { value: x, lo: -1.0, hi: f64::INFINITY });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfDomain { value: alpha, lo: 0.0, hi: 1.0 });
    }
    let rhs = alpha * (alpha - 1.0) / 2.0 * x * x + alpha * x + alpha * (3.0 - alpha) / 2.0;
    Ok((1.0 + x).powf(alpha) - rhs)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients c_0..c_n of p_n(η) = 1 + (1/n)Σ_{k=2}^n C(n,k) α^(1−k) M_k η^k,
/// with M_k = ∫(u⁰_x)^k.
fn improved_polynomial(profile: &InitialProfile, alpha: f64, n: usize) -> Result<Vec<f64>> {
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    for (k, ck) in c.iter_mut().enumerate().skip(2) {
        *ck = binomial(n, k) * alpha.powi(1 - k as i32) * profile.moment_ux(k as u32)? / n as f64;
    }
    Ok(c)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Smallest positive root η* of the improved polynomial p_n on (0, 10·η_crit].
pub fn improved_root(profile: &InitialProfile, params: &ModelParams, n: usize) -> Result<Option<f64>> {
    if !(params.a() > -1.0) || params.is_minus_one() {
        return Err(Error::InvalidArgument(format!("improved criterion needs a > -1, got {}", params.a())));
    }
    if !(2..=MAX_N_IMPROVED).contains(&n) {
        return Err(Error::InvalidArgument(format!("polynomial degree {n} not in 2..={MAX_N_IMPROVED}")));
    }
    let crit = critical_eta(profile, params)?;
    if !crit.is_finite() {
        return Ok(None);
    }
    let c = improved_polynomial(profile, params.alpha()?, n)?;
    let hi = 10.0 * crit;
    let grid = 20_000;
    let mut prev = (0.0, horner(&c, 0.0));
    for i in 1..=grid {
        let x = hi * i as f64 / grid as f64;
        let v = horner(&c, x);
        if v == 0.0 {
            return Ok(Some(x));
        }
        if v.signum() != prev.1.signum() {
            let (mut lo, mut up) = (prev.0, x);
            let s_lo = prev.1.signum();
            while up - lo > 1e-12 {
                let mid = 0.5 * (lo + up);
                if horner(&c, mid).signum() == s_lo {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            return Ok(Some(0.5 * (lo + up)));
        }
        prev = (x, v);
    }
    Ok(None)
}

/// L^p membership of u⁰_xx: the norm and whether it stays below the cap.
fn uxx_in_lp(profile: &InitialProfile, p: f64) -> (f64, bool) {
    match profile.norm(2, p) {
        Ok(v) => (v, v.is_finite() && v < LP_DIVERGENCE_CAP),
        Err(_) => (f64::INFINITY, false),
    }
}

/// Evaluates every clause for `profile` under `params`; `n_improved` is the largest
/// degree tried by clause G.
pub fn classify(profile: &InitialProfile, params: &ModelParams, n_improved: usize) -> Result<CriteriaReport> {
    if !(2..=MAX_N_IMPROVED).contains(&n_improved) {
        return Err(Error::InvalidArgument(format!("n_improved {n_improved} not in 2..={MAX_N_IMPROVED}")));
    }
    let a = params.a();
    let a1 = a + 1.0;
    let (u_min, u_max) = profile.extrema_ux();
    let l2 = profile.norm(1, 2.0)?;
    let zero = profile.is_zero();
    let minus_one = params.is_minus_one();
    let sup_uxx = profile.norm(2, f64::INFINITY).unwrap_or(f64::INFINITY);
    let bounded_uxx = sup_uxx.is_finite() && sup_uxx < LP_DIVERGENCE_CAP;
    let mut clauses = Vec::new();

    // A1
    let mut c = Clause::new(ClauseId::A1, Outcome::Singular, a < -3.0 && !zero && u_min > 0.0);
    if c.applicable {
        let factor = ((3.0 * a + 5.0) / (a + 3.0)).sqrt();
        c = c.with("ux_l2", l2).with("u_min", u_min).with("bound", factor * u_min);
        c.satisfied = l2 < factor * u_min;
    }
    clauses.push(c);

    // A2
    let mut c = Clause::new(ClauseId::A2, Outcome::Singular, a < -3.0 && !zero);
    if c.applicable {
        let q_max = -2.0 / a1;
        c = c.with("q_max", q_max);
        let mut witness = None;
        let mut members = Vec::new();
        for j in 1..=A2_GRID_POINTS {
            let q = q_max * 0.75f64.powi(j as i32);
            let p = 2.0 / (2.0 + a1 * q);
            let (norm, member) = if bounded_uxx { (profile.norm(2, p).unwrap_or(sup_uxx), true) } else { uxx_in_lp(profile, p) };
            members.push(member);
            if member && witness.is_none() {
                witness = Some((q, p, norm));
            }
        }
        if let Some((q, p, norm)) = witness {
            c = c.with("witness_q", q).with("witness_p", p).with("uxx_lp_norm", norm);
            c.satisfied = true;
        }
        // membership must be nested: once a grid q works, every smaller one does
        if let Some(first) = members.iter().position(|&m| m) {
            if !members[first..].iter().all(|&m| m) {
                c.note = Some("L^p membership not nested along the q grid".into());
            }
        }
    }
    clauses.push(c);

    // B
    let mut c = Clause::new(ClauseId::B, Outcome::Singular, (-3.0..-1.0).contains(&a) && !minus_one && !zero && u_min > 0.0);
    if c.applicable {
        let bound = -2.0 / (a1 * u_min);
        c = c.with("time_bound", bound).with("u_min", u_min);
        c.satisfied = true;
    }
    clauses.push(c);

    // C
    let mut c = Clause::new(ClauseId::C, Outcome::Global, minus_one && !zero);
    c.satisfied = c.applicable;
    clauses.push(c);

    // D
    let mut c = Clause::new(ClauseId::D, Outcome::Global, a > -1.0 && a < 0.0 && !minus_one && !zero);
    if c.applicable {
        let p = -1.0 / a;
        let (norm, member) = if bounded_uxx { (profile.norm(2, p).unwrap_or(sup_uxx), true) } else { uxx_in_lp(profile, p) };
        c = c.with("p", p).with("uxx_lp_norm", norm);
        c.satisfied = member;
    }
    clauses.push(c);

    // E
    let mut c = Clause::new(ClauseId::E, Outcome::Global, a > -1.0 && !minus_one && !zero);
    if c.applicable {
        let bound = l2 / a1.sqrt();
        c = c.with("u_max", u_max).with("bound", bound).with("ux_l2", l2);
        c.satisfied = u_max < bound;
    }
    clauses.push(c);

    // G
    let mut c = Clause::new(ClauseId::G, Outcome::Global, a > -1.0 && !minus_one && !zero);
    if c.applicable {
        let limit = 2.0 / a1;
        c = c.with("limit", limit).with("n_max", n_improved as f64);
        for n in 2..=n_improved {
            match improved_root(profile, params, n) {
                Ok(Some(root)) => {
                    c.detail.insert(format!("root_n{n}"), root);
                    if !c.satisfied && root * u_max < limit {
                        c.satisfied = true;
                        c.detail.insert("witness_n".into(), n as f64);
                        c.detail.insert("eta_star".into(), root);
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    c.note = Some(format!("undecidable: {e}"));
                }
            }
        }
    }
    clauses.push(c);

    // F
    let mut c = Clause::new(ClauseId::F, Outcome::Singular, a >= 1.0 && !zero && u_max > 0.0);
    if c.applicable {
        match psi_sq_integrable(profile, params, PSI_SQ_TOL) {
            Ok(r) => {
                c = c.with("eta_max", r.eta_max);
                if let Some(&last) = r.partials.last() {
                    c = c.with("last_partial", last);
                }
                if let Some(&ratio) = r.ratios.last() {
                    c = c.with("last_ratio", ratio);
                }
                match r.verdict {
                    Integrability::Finite(v) => {
                        c = c.with("psi_sq_integral", v);
                        c.satisfied = true;
                    }
                    Integrability::Divergent => c.note = Some("psi^2 divergent".into()),
                }
            }
            Err(e) => c.note = Some(format!("undecidable: {e}")),
        }
    }
    clauses.push(c);

    let satisfied = |o: Outcome| clauses.iter().any(|c| c.satisfied && c.outcome == o);
    let consistency_flag = !(satisfied(Outcome::Global) && satisfied(Outcome::Singular));
    let verdict = if zero {
        Verdict::GlobalByTheorem(ClauseId::CAnalogue)
    } else {
        clauses
            .iter()
            .find(|c| c.satisfied)
            .map(|c| match c.outcome {
                Outcome::Global => Verdict::GlobalByTheorem(c.id),
                Outcome::Singular => {
                    Verdict::SingularByTheorem { clause: c.id, time_bound: c.detail.get("time_bound").copied() }
                }
            })
            .unwrap_or(Verdict::Inconclusive)
    };
    if zero {
        for c in clauses.iter_mut() {
            c.note = Some("stationary solution".into());
        }
    }
    if !consistency_flag {
        log::warn!("a = {a}: both a global and a singular clause are satisfied");
    }
    Ok(CriteriaReport {
        a,
        regime: params.regime(),
        u_min,
        u_max,
        ux_l2: l2,
        n_improved,
        time_bound: verdict.time_bound(),
        clauses,
        verdict,
        consistency_flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64) -> ModelParams {
        ModelParams::new(a).unwrap()
    }

    #[test]
    fn bernoulli_examples() {
        assert!((reverse_bernoulli_gap(0.0, 0.5).unwrap() - 0.375).abs() < 1e-15);
        assert!((reverse_bernoulli_gap(1.0, 0.5).unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(reverse_bernoulli_gap(-1.0 + 1e-12, 0.5).unwrap() >= 0.0);
        assert!(reverse_bernoulli_gap(-1.0, 0.5).is_err());
        assert!(reverse_bernoulli_gap(0.0, 1.0).is_err());
    }

    #[test]
    fn hunter_saxton_is_clause_b() {
        let r = classify(&InitialProfile::parabola(1.0).unwrap(), &params(-2.0), 4).unwrap();
        assert_eq!(r.verdict, Verdict::SingularByTheorem { clause: ClauseId::B, time_bound: Some(2.0) });
        assert_eq!(r.verdict.to_string(), "SingularByTheorem(B)");
        assert!(r.consistency_flag);
    }

    #[test]
    fn negative_half_is_clause_d() {
        let r = classify(&InitialProfile::parabola(1.0).unwrap(), &params(-0.5), 4).unwrap();
        assert_eq!(r.verdict, Verdict::GlobalByTheorem(ClauseId::D));
        assert!((r.clause(ClauseId::D).unwrap().detail["uxx_lp_norm"] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn proudman_johnson_parabola() {
        let r = classify(&InitialProfile::parabola(1.0).unwrap(), &params(1.0), 4).unwrap();
        let e = r.clause(ClauseId::E).unwrap();
        assert!(e.applicable && !e.satisfied);
        assert!((e.detail["bound"] - 1.0 / 6f64.sqrt()).abs() < 1e-12);
        assert!(r.clause(ClauseId::F).unwrap().satisfied);
        assert!(!r.clause(ClauseId::G).unwrap().satisfied);
        assert_eq!(r.verdict.to_string(), "SingularByTheorem(F)");
        assert!(r.consistency_flag);
    }

    #[test]
    fn minus_one_is_global() {
        let r = classify(&InitialProfile::zigzag(1.0).unwrap(), &params(-1.0), 4).unwrap();
        assert_eq!(r.verdict.to_string(), "GlobalByTheorem(C)");
    }

    #[test]
    fn a_below_minus_three() {
        let r = classify(&InitialProfile::parabola(1.0).unwrap(), &params(-5.0), 4).unwrap();
        // ‖u_x‖₂ = 1/√3 < √(10/2)·1
        assert!(r.clause(ClauseId::A1).unwrap().satisfied);
        let a2 = r.clause(ClauseId::A2).unwrap();
        assert!(a2.satisfied && a2.note.is_none());
        assert!(a2.detail["witness_q"] < a2.detail["q_max"]);
        assert_eq!(r.verdict.to_string(), "SingularByTheorem(A1)");
    }

    #[test]
    fn zero_profile_is_stationary() {
        let r = classify(&InitialProfile::parabola(0.0).unwrap(), &params(2.0), 4).unwrap();
        assert_eq!(r.verdict.to_string(), "GlobalByTheorem(C-analogue)");
        assert!(r.clauses.iter().all(|c| !c.applicable));
        assert_eq!(improved_root(&InitialProfile::parabola(0.0).unwrap(), &params(0.5), 3).unwrap(), None);
    }

    #[test]
    fn quadratic_root_is_closed_form() {
        for (g, a) in [(1.0, 0.0), (2.0, 1.0), (0.5, -0.5)] {
            let p = InitialProfile::parabola(g).unwrap();
            let l2 = p.norm(1, 2.0).unwrap();
            let exact = 2.0 / ((a + 1.0f64).sqrt() * l2);
            let got = improved_root(&p, &params(a), 2).unwrap().unwrap();
            assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");
        }
        assert!(improved_root(&InitialProfile::parabola(1.0).unwrap(), &params(-2.0), 2).is_err());
        assert!(improved_root(&InitialProfile::parabola(1.0).unwrap(), &params(0.0), 13).is_err());
    }

    #[test]
    fn rejects_bad_degree() {
        assert!(classify(&InitialProfile::parabola(1.0).unwrap(), &params(0.0), 1).is_err());
    }
}
