//! The Phillips–Sarnak integral `I(s)` for an odd Hecke–Maass form `φ` and a
//! weight-2 form `f = Σ_d t_d E₂(dz)`, computed three independent ways:
//!
//! * `series`: `2/(2^{2s}π^{s−1}) · Γ(s+s_φ)Γ(s−s_φ+1)/Γ(s) · L(s+½, f×φ)`
//!   with `L(w, f×φ) = Σ b_n ρ(n) n^{−w}`;
//! * `quadrature`: `s/(2π)^{s−½} · M(s) · Σ b_n(ρ(n)−ρ(−n)) n^{−s−½}` where
//!   the Bessel moment `M(s) = ∫₀^∞ e^{−y}K_{s_φ−½}(y)y^{s−½}dy` is integrated
//!   numerically;
//! * `closed`: for `f = G_{q₁,q₂}`,
//!   `−24(1−λ(q₁)q₁^{½−s})(1−λ(q₂)q₂^{−½−s}) Λ(s−½,φ)Λ(s+½,φ)/Λ(2s,χ)`.
//!
//! Even forms give `I(s) = 0`; every mode returns an exact zero for them
//! without summing anything. Coefficients are Hecke normalized, `ρ(n) = λ(n)`,
//! times an optional constant `rho_scale`.

use crate::forms::{FormsError, HolomorphicQExpansion};
use crate::hecke::HeckeEigenSystem;
use crate::lfunc::{
    assemble_quotient, completed_l_prefactor, complex_pair, dirichlet_l_cached, divisor_tail_bound,
    l_series_cached, GrowthModel, LfuncError, PowerCache, PowerTable,
};
use crate::numeric::{fixed_block_sum, int_pow_neg, rel_diff, C64};
use crate::special::{bessel_moment_estimate, log_gamma, QuadratureSpec, SpecialError};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("L(2s, chi) = {denominator:e} is too small to divide by reliably")]
    Conditioning { denominator: f64 },
    #[error(transparent)]
    Lfunc(#[from] LfuncError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Forms(#[from] FormsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsMode {
    Closed,
    Series,
    Quadrature,
}

impl PsMode {
    pub const ALL: [PsMode; 3] = [PsMode::Series, PsMode::Quadrature, PsMode::Closed];

    pub fn name(self) -> &'static str {
        match self {
            PsMode::Closed => "closed",
            PsMode::Series => "series",
            PsMode::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for PsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PsMode {
    type Err = PsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PsMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| PsError::InvalidProblem(format!("unknown mode {s:?}")))
    }
}

/// Error budget of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    /// Series terms summed (0 when the parity branch short-circuits).
    pub terms: u64,
    /// Certified truncation bound on `|value − I(s)|`; infinite outside the
    /// half-plane of absolute convergence.
    pub tail_bound: f64,
    /// Estimated absolute error of the Bessel-moment quadrature.
    pub quadrature_error: Option<f64>,
    /// `Σ|terms| / |Σ terms|` for summed modes, `1/|L(2s,χ)|` for the closed mode.
    pub condition: f64,
    pub absolutely_convergent: bool,
    pub model: GrowthModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsResult {
    pub mode: PsMode,
    #[serde(with = "complex_pair")]
    pub s: C64,
    #[serde(with = "complex_pair")]
    pub value: C64,
    pub parity: i8,
    pub tolerances: ToleranceReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsOptions {
    /// Truncation `N` of every Dirichlet series.
    pub terms: u64,
    /// Extra length for `L(2s,χ)` in the closed mode.
    pub p_max: u64,
    /// Constant `c` in `ρ(n) = c·λ(n)`.
    pub rho_scale: C64,
    pub quadrature: QuadratureSpec,
}

impl Default for PsOptions {
    fn default() -> Self {
        Self {
            terms: 100_000,
            p_max: 1000,
            rho_scale: C64::new(1.0, 0.0),
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl PsOptions {
    pub fn with_terms(mut self, terms: u64) -> Self {
        self.terms = terms;
        self
    }

    pub fn with_rho_scale(mut self, c: C64) -> Self {
        self.rho_scale = c;
        self
    }
}

fn zero_result(mode: PsMode, sys: &HeckeEigenSystem, s: C64) -> PsResult {
    PsResult {
        mode,
        s,
        value: C64::new(0.0, 0.0),
        parity: sys.parity(),
        tolerances: ToleranceReport {
            terms: 0,
            tail_bound: 0.0,
            quadrature_error: None,
            condition: 1.0,
            absolutely_convergent: true,
            model: GrowthModel::of(sys),
        },
    }
}

fn powers(cache: Option<&PowerCache>, s: C64, n: usize) -> Arc<PowerTable> {
    match cache {
        Some(c) => c.get(s, n),
        None => Arc::new(PowerTable::new(s, n)),
    }
}

/// `Σ_{n≤N} b_n λ(n) n^{−w}` and `Σ_{n≤N} |b_n λ(n) n^{−w}|`.
fn rankin_pair_sum(
    sys: &HeckeEigenSystem,
    f: &HolomorphicQExpansion,
    w: C64,
    n: u64,
    cache: Option<&PowerCache>,
) -> Result<(C64, f64), PsError> {
    let nn = n as usize;
    if f.truncation() < nn {
        return Err(FormsError::InsufficientTerms {
            needed: nn,
            available: f.truncation(),
        }
        .into());
    }
    let lam = sys.coefficients_upto(nn);
    let pw = powers(cache, w, nn);
    let (b, pv) = (f.coefficients(), pw.values());
    let value = fixed_block_sum(1, nn, |k| b[k] * lam[k] * pv[k]);
    let abs = fixed_block_sum(1, nn, |k| C64::new((b[k] * lam[k] * pv[k]).norm(), 0.0)).re;
    Ok((value, abs))
}

/// `Σ_{n>N} |b_n λ(n)| n^{−Re w}` with `|b_n| ≤ B σ₁(n)`, `σ₁(n)|λ(n)| ≤ n^{1+θ} d₄(n)`.
fn pair_tail(f: &HolomorphicQExpansion, w: C64, theta: f64, n: u64) -> f64 {
    f.sigma_bound() * divisor_tail_bound(4, w.re - 1.0 - theta, n)
}

fn convergent(sys: &HeckeEigenSystem, s: C64) -> bool {
    s.re > 1.5 + sys.growth_exponent()
}

fn condition_number(abs: f64, value: C64) -> f64 {
    if abs == 0.0 {
        1.0
    } else {
        abs / value.norm()
    }
}

/// `2/(2^{2s}π^{s−1}) · Γ(s+s_φ)Γ(s−s_φ+1)/Γ(s)`.
pub fn series_prefactor(s: C64, s_phi: C64) -> Result<C64, PsError> {
    let log = LN_2 - 2.0 * s * LN_2 - (s - 1.0) * PI.ln() + log_gamma(s + s_phi)?
        + log_gamma(s - s_phi + 1.0)?
        - log_gamma(s)?;
    Ok(log.exp())
}

/// `I(s)` from `L(s+½, f×φ)` and the closed Gamma prefactor.
pub fn ps_series(
    sys: &HeckeEigenSystem,
    f: &HolomorphicQExpansion,
    s: C64,
    opts: &PsOptions,
    cache: Option<&PowerCache>,
) -> Result<PsResult, PsError> {
    if !sys.is_odd() {
        return Ok(zero_result(PsMode::Series, sys, s));
    }
    let w = s + 0.5;
    let pre = series_prefactor(s, sys.s_phi())?;
    let (sum, abs) = rankin_pair_sum(sys, f, w, opts.terms, cache)?;
    let c = opts.rho_scale;
    let model = GrowthModel::of(sys);
    Ok(PsResult {
        mode: PsMode::Series,
        s,
        value: pre * sum * c,
        parity: sys.parity(),
        tolerances: ToleranceReport {
            terms: opts.terms,
            tail_bound: pre.norm() * c.norm() * pair_tail(f, w, model.theta(), opts.terms),
            quadrature_error: None,
            condition: condition_number(abs, sum),
            absolutely_convergent: convergent(sys, s),
            model,
        },
    })
}

/// `I(s)` with the Bessel moment integrated numerically.
pub fn ps_quadrature(
    sys: &HeckeEigenSystem,
    f: &HolomorphicQExpansion,
    s: C64,
    opts: &PsOptions,
    cache: Option<&PowerCache>,
) -> Result<PsResult, PsError> {
    if !sys.is_odd() {
        return Ok(zero_result(PsMode::Quadrature, sys, s));
    }
    let w = s + 0.5;
    let moment = bessel_moment_estimate(s, sys.s_phi(), &opts.quadrature)?;
    // ρ(n) − ρ(−n) = 2ρ(n) for odd φ
    let (sum, abs) = rankin_pair_sum(sys, f, w, opts.terms, cache)?;
    let unfold = s * (-(s - 0.5) * (2.0 * PI).ln()).exp();
    let c = opts.rho_scale;
    let pre = unfold * moment.value * 2.0;
    let model = GrowthModel::of(sys);
    let tail = pre.norm() * pair_tail(f, w, model.theta(), opts.terms);
    let quad = unfold.norm() * 2.0 * (sum.norm() + pair_tail(f, w, model.theta(), opts.terms)) * moment.error;
    Ok(PsResult {
        mode: PsMode::Quadrature,
        s,
        value: pre * sum * c,
        parity: sys.parity(),
        tolerances: ToleranceReport {
            terms: opts.terms,
            tail_bound: tail * c.norm(),
            quadrature_error: Some(quad * c.norm()),
            condition: condition_number(abs, sum),
            absolutely_convergent: convergent(sys, s),
            model,
        },
    })
}

/// `I(s)` for `f = G_{q₁,q₂}` from completed L-functions.
pub fn ps_closed(
    sys: &HeckeEigenSystem,
    q1: u64,
    q2: u64,
    s: C64,
    opts: &PsOptions,
    cache: Option<&PowerCache>,
) -> Result<PsResult, PsError> {
    check_split(sys, q1, q2)?;
    if !sys.is_odd() {
        return Ok(zero_result(PsMode::Closed, sys, s));
    }
    let one = C64::new(1.0, 0.0);
    let euler = (one - sys.coefficient_u(q1) * int_pow_neg(q1, s - 0.5))
        * (one - sys.coefficient_u(q2) * int_pow_neg(q2, s + 0.5));

    let a = l_series_cached(sys, s - 0.5, opts.terms, cache);
    let b = l_series_cached(sys, s + 0.5, opts.terms, cache);
    let chi_terms = opts.terms.max(opts.p_max);
    let cl = dirichlet_l_cached(sys.nebentypus(), 2.0 * s, chi_terms, cache)?;
    let quotient = assemble_quotient(a, b, cl);
    if quotient.ill_conditioned {
        return Err(PsError::Conditioning {
            denominator: quotient.denominator,
        });
    }

    // Λ(2s,χ) = (q/π)^s Γ(s) L(2s,χ), with q the modulus of χ
    let q = sys.nebentypus().modulus() as f64;
    let chi_pre = (s * (q.ln() - PI.ln()) + log_gamma(s)?).exp();
    let gamma = completed_l_prefactor(sys, s - 0.5)? * completed_l_prefactor(sys, s + 0.5)? / chi_pre;
    let factor = -24.0 * euler * gamma;
    let c = opts.rho_scale;
    let model = GrowthModel::of(sys);
    Ok(PsResult {
        mode: PsMode::Closed,
        s,
        value: factor * quotient.value * c,
        parity: sys.parity(),
        tolerances: ToleranceReport {
            terms: opts.terms,
            tail_bound: factor.norm() * quotient.error_bound * c.norm(),
            quadrature_error: None,
            condition: 1.0 / quotient.denominator,
            absolutely_convergent: convergent(sys, s),
            model,
        },
    })
}

fn check_split(sys: &HeckeEigenSystem, q1: u64, q2: u64) -> Result<(), PsError> {
    if q1 < 2 || q2 < 2 || q1.checked_mul(q2) != Some(sys.level()) {
        return Err(PsError::InvalidProblem(format!(
            "need q1, q2 >= 2 with q1*q2 = level {}, got ({q1}, {q2})",
            sys.level()
        )));
    }
    Ok(())
}

/// Inputs shared by all modes: the system, `f = G_{q₁,q₂}` and the point `s`.
#[derive(Debug, Clone)]
pub struct PsProblem<'a> {
    pub sys: &'a HeckeEigenSystem,
    pub form: &'a HolomorphicQExpansion,
    pub q1: u64,
    pub q2: u64,
    pub s: C64,
}

impl<'a> PsProblem<'a> {
    pub fn new(
        sys: &'a HeckeEigenSystem,
        form: &'a HolomorphicQExpansion,
        q1: u64,
        q2: u64,
        s: C64,
    ) -> Result<Self, PsError> {
        check_split(sys, q1, q2)?;
        if form.level() != sys.level() {
            return Err(PsError::InvalidProblem(format!(
                "form level {} differs from system level {}",
                form.level(),
                sys.level()
            )));
        }
        Ok(Self { sys, form, q1, q2, s })
    }
}

/// One way of computing `I(s)`.
pub trait PsEvaluator: Send + Sync {
    fn mode(&self) -> PsMode;

    fn evaluate(
        &self,
        problem: &PsProblem<'_>,
        opts: &PsOptions,
        cache: Option<&PowerCache>,
    ) -> Result<PsResult, PsError>;
}

struct SeriesMode;
struct QuadratureMode;
struct ClosedMode;

impl PsEvaluator for SeriesMode {
    fn mode(&self) -> PsMode {
        PsMode::Series
    }

    fn evaluate(&self, p: &PsProblem<'_>, opts: &PsOptions, cache: Option<&PowerCache>) -> Result<PsResult, PsError> {
        ps_series(p.sys, p.form, p.s, opts, cache)
    }
}

impl PsEvaluator for QuadratureMode {
    fn mode(&self) -> PsMode {
        PsMode::Quadrature
    }

    fn evaluate(&self, p: &PsProblem<'_>, opts: &PsOptions, cache: Option<&PowerCache>) -> Result<PsResult, PsError> {
        ps_quadrature(p.sys, p.form, p.s, opts, cache)
    }
}

impl PsEvaluator for ClosedMode {
    fn mode(&self) -> PsMode {
        PsMode::Closed
    }

    fn evaluate(&self, p: &PsProblem<'_>, opts: &PsOptions, cache: Option<&PowerCache>) -> Result<PsResult, PsError> {
        ps_closed(p.sys, p.q1, p.q2, p.s, opts, cache)
    }
}

static EVALUATORS: [&dyn PsEvaluator; 3] = [&SeriesMode, &QuadratureMode, &ClosedMode];

/// Every registered evaluator, series first.
pub fn registered_evaluators() -> &'static [&'static dyn PsEvaluator] {
    &EVALUATORS
}

pub fn evaluator(mode: PsMode) -> &'static dyn PsEvaluator {
    *EVALUATORS
        .iter()
        .find(|e| e.mode() == mode)
        .expect("every mode has an evaluator")
}

/// All three modes at one point with their pairwise relative differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeModeReport {
    pub results: Vec<PsResult>,
    pub series_vs_closed: f64,
    pub series_vs_quadrature: f64,
}

impl ThreeModeReport {
    pub fn value(&self, mode: PsMode) -> Option<C64> {
        self.results.iter().find(|r| r.mode == mode).map(|r| r.value)
    }
}

pub fn three_mode(
    problem: &PsProblem<'_>,
    opts: &PsOptions,
    cache: Option<&PowerCache>,
) -> Result<ThreeModeReport, PsError> {
    let results = registered_evaluators()
        .iter()
        .map(|e| e.evaluate(problem, opts, cache))
        .collect::<Result<Vec<_>, _>>()?;
    let get = |m: PsMode| results.iter().find(|r| r.mode == m).map(|r| r.value).unwrap_or_default();
    let series = get(PsMode::Series);
    Ok(ThreeModeReport {
        series_vs_closed: rel_diff(series, get(PsMode::Closed)),
        series_vs_quadrature: rel_diff(series, get(PsMode::Quadrature)),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DirichletCharacter;
    use crate::forms::g_q1q2;
    use crate::hecke::random_system;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn odd_system(seed: u64, q: u64) -> HeckeEigenSystem {
        let chi = DirichletCharacter::principal(q).unwrap();
        random_system(seed, q, &chi, c(0.5, 4.0 + seed as f64 * 0.37), -1).unwrap()
    }

    #[test]
    fn even_forms_vanish_exactly() {
        let sys = odd_system(1, 6).with_parity(1).unwrap();
        let f = g_q1q2(2, 3, 2000).unwrap();
        let opts = PsOptions::default().with_terms(2000);
        let p = PsProblem::new(&sys, &f, 2, 3, c(2.5, 0.0)).unwrap();
        for e in registered_evaluators() {
            let r = e.evaluate(&p, &opts, None).unwrap();
            assert_eq!(r.value, C64::new(0.0, 0.0));
            assert_eq!(r.tolerances.terms, 0);
        }
    }

    #[test]
    fn zero_form_gives_zero() {
        let sys = odd_system(2, 6);
        let f = HolomorphicQExpansion::from_coefficients(vec![C64::new(0.0, 0.0); 501], 6, 0.0);
        let r = ps_series(&sys, &f, c(2.5, 0.0), &PsOptions::default().with_terms(500), None).unwrap();
        assert_eq!(r.value, C64::new(0.0, 0.0));
    }

    #[test]
    fn three_modes_agree_at_moderate_s() {
        let sys = odd_system(7, 6);
        let n = 200_000;
        let f = g_q1q2(2, 3, n).unwrap();
        let cache = PowerCache::new();
        let opts = PsOptions::default().with_terms(n as u64);
        let p = PsProblem::new(&sys, &f, 2, 3, c(3.0, 0.0)).unwrap();
        let rep = three_mode(&p, &opts, Some(&cache)).unwrap();
        assert!(rep.series_vs_closed < 1e-6, "{rep:?}");
        assert!(rep.series_vs_quadrature < 1e-7, "{rep:?}");
    }

    #[test]
    fn ramified_zero_prefactor() {
        // level 4 with trivial character forces λ(2) = 0
        let sys = odd_system(3, 4);
        assert_eq!(sys.seed(2), C64::new(0.0, 0.0));
        let s = c(3.0, 0.0);
        let opts = PsOptions::default().with_terms(20_000);
        let r = ps_closed(&sys, 2, 2, s, &opts, None).unwrap();
        let a = l_series_cached(&sys, s - 0.5, 20_000, None).value;
        let b = l_series_cached(&sys, s + 0.5, 20_000, None).value;
        let l = dirichlet_l_cached(sys.nebentypus(), 2.0 * s, 20_000, None).unwrap().value;
        let q = 4.0f64;
        let chi_pre = (s * (q.ln() - PI.ln()) + log_gamma(s).unwrap()).exp();
        let expect = -24.0
            * completed_l_prefactor(&sys, s - 0.5).unwrap()
            * completed_l_prefactor(&sys, s + 0.5).unwrap()
            * a
            * b
            / (chi_pre * l);
        assert!(rel_diff(r.value, expect) < 1e-13);
    }

    #[test]
    fn homogeneity_is_exact() {
        let sys = odd_system(5, 10);
        let n = 5000;
        let f = g_q1q2(2, 5, n).unwrap();
        let base = PsOptions::default().with_terms(n as u64);
        let k = c(-1.5, 0.25);
        let p = PsProblem::new(&sys, &f, 2, 5, c(2.5, 1.0)).unwrap();
        for e in registered_evaluators() {
            let v1 = e.evaluate(&p, &base, None).unwrap().value;
            let vk = e.evaluate(&p, &base.with_rho_scale(k), None).unwrap().value;
            assert_eq!(vk, v1 * k);
        }
    }

    #[test]
    fn problem_validation() {
        let sys = odd_system(1, 6);
        let f = g_q1q2(2, 3, 10).unwrap();
        assert!(PsProblem::new(&sys, &f, 2, 2, c(2.5, 0.0)).is_err());
        assert!(ps_closed(&sys, 1, 6, c(2.5, 0.0), &PsOptions::default(), None).is_err());
        let r = ps_series(&sys, &f, c(2.5, 0.0), &PsOptions::default().with_terms(100), None);
        assert!(matches!(r, Err(PsError::Forms(FormsError::InsufficientTerms { .. }))));
    }

    #[test]
    fn convergence_flag_below_three_halves() {
        let sys = odd_system(4, 6);
        let f = g_q1q2(2, 3, 1000).unwrap();
        let s = sys.s_phi() + 0.9;
        let opts = PsOptions::default().with_terms(1000);
        let a = ps_series(&sys, &f, s, &opts, None).unwrap();
        let b = ps_quadrature(&sys, &f, s, &opts, None).unwrap();
        assert!(!a.tolerances.absolutely_convergent && !b.tolerances.absolutely_convergent);
        assert!(a.tolerances.tail_bound.is_infinite());
        assert!(rel_diff(a.value, b.value) < 1e-7);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in PsMode::ALL {
            assert_eq!(m.name().parse::<PsMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
