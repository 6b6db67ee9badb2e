//! Dirichlet series, Euler products, completed L-functions and the
//! Rankin–Selberg factorization
//! `Σ σ₁(n)λ(n)n^{−s} = L(s−1,φ)L(s,φ)/L(2s−1,χ)`.
//!
//! Every truncated series carries a rigorous tail bound under a declared
//! coefficient-growth model. Evaluation is restricted to half-planes of
//! absolute convergence.

use crate::arith::{primes_up_to, shared_sigma1_table, DirichletCharacter};
use crate::hecke::{HeckeEigenSystem, HeckeError};
use crate::numeric::{fixed_block_sum, int_pow_neg, CompensatedSum, ComplexSum, C64};
use crate::special::{log_gamma, SpecialError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LfuncError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("local factor vanishes at p = {p}")]
    VanishingFactor { p: u64 },
    #[error("character must be even")]
    OddCharacter,
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
}

/// Declared bound on `|λ(n)|`: `d(n)` when tempered, `d(n)·n^θ` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthModel {
    Tempered,
    General { theta: f64 },
}

impl GrowthModel {
    pub fn of(sys: &HeckeEigenSystem) -> Self {
        let theta = sys.growth_exponent();
        if theta == 0.0 {
            Self::Tempered
        } else {
            Self::General { theta }
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            Self::Tempered => 0.0,
            Self::General { theta } => theta,
        }
    }
}

/// A truncated series or product. `|value − limit| ≤ tail_bound` under `model`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    #[serde(with = "complex_pair")]
    pub value: C64,
    #[serde(rename = "terms")]
    pub terms_used: u64,
    pub tail_bound: f64,
    pub model: GrowthModel,
}

pub(crate) mod complex_pair {
    use crate::numeric::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Upper bound for `Σ_{n>N} d_k(n)·n^{−σ}`.
///
/// Partial summation with `Σ_{n≤x} d_k(n) ≤ x(1+ln x)^{k−1}` gives
/// `σ ∫_N^∞ x^{−σ}(1+ln x)^{k−1} dx`, evaluated in closed form. Infinite
/// when `σ ≤ 1`.
pub fn divisor_tail_bound(k: u32, sigma: f64, n: u64) -> f64 {
    if sigma <= 1.0 || !sigma.is_finite() {
        return f64::INFINITY;
    }
    let a = sigma - 1.0;
    let x = (n.max(1)) as f64;
    let lead = (-a * x.ln()).exp();
    let l = 1.0 + x.ln();
    // I_j = N^{-a}(1+ln N)^j / a + (j/a) I_{j-1}
    let mut integral = lead / a;
    for j in 1..k {
        integral = lead * l.powi(j as i32) / a + (j as f64 / a) * integral;
    }
    sigma * integral
}

/// `n^{−s}` for `n = 0..=N` (entry 0 is 0).
#[derive(Debug, Clone)]
pub struct PowerTable {
    s: C64,
    values: Vec<C64>,
}

impl PowerTable {
    pub fn new(s: C64, n: usize) -> Self {
        let mut values = Vec::with_capacity(n + 1);
        values.push(C64::new(0.0, 0.0));
        let tail: Vec<C64> = (1..=n as u64).into_par_iter().map(|k| int_pow_neg(k, s)).collect();
        values.extend(tail);
        Self { s, values }
    }

    pub fn exponent(&self) -> C64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// Shared cache of power tables keyed by exponent and length.
#[derive(Debug, Default)]
pub struct PowerCache {
    tables: Mutex<HashMap<(u64, u64, usize), Arc<PowerTable>>>,
}

impl PowerCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n^{−s}` for `n ≤ N`; reuses any cached table for `s` that is long enough.
    pub fn get(&self, s: C64, n: usize) -> Arc<PowerTable> {
        let key = (s.re.to_bits(), s.im.to_bits(), n);
        {
            let map = self.tables.lock().unwrap_or_else(|e| e.into_inner());
            if let Some(t) = map.get(&key) {
                return Arc::clone(t);
            }
            if let Some(t) = map
                .iter()
                .filter(|((re, im, len), _)| *re == key.0 && *im == key.1 && *len >= n)
                .map(|(_, t)| t)
                .next()
            {
                return Arc::clone(t);
            }
        }
        let table = Arc::new(PowerTable::new(s, n));
        let mut map = self.tables.lock().unwrap_or_else(|e| e.into_inner());
        Arc::clone(map.entry(key).or_insert(table))
    }

    pub fn clear(&self) {
        self.tables.lock().unwrap_or_else(|e| e.into_inner()).clear();
    }
}

fn powers(cache: Option<&PowerCache>, s: C64, n: usize) -> Arc<PowerTable> {
    match cache {
        Some(c) => c.get(s, n),
        None => Arc::new(PowerTable::new(s, n)),
    }
}

/// `Σ_{n≤N} coeff[n]·n^{−s}` from dense tables.
fn dense_series(coeff: &[C64], pw: &PowerTable, n: usize) -> C64 {
    let pv = pw.values();
    fixed_block_sum(1, n, |k| coeff[k] * pv[k])
}

/// `L(s,φ) = Σ λ(n) n^{−s}` truncated at `N`.
pub fn l_series(sys: &HeckeEigenSystem, s: C64, n: u64) -> SeriesEvaluation {
    l_series_cached(sys, s, n, None)
}

pub fn l_series_cached(
    sys: &HeckeEigenSystem,
    s: C64,
    n: u64,
    cache: Option<&PowerCache>,
) -> SeriesEvaluation {
    let model = GrowthModel::of(sys);
    let nn = n as usize;
    let coeff = sys.coefficients_upto(nn);
    let pw = powers(cache, s, nn);
    let value = dense_series(&coeff, &pw, nn);
    let tail_bound = if s.re > 1.0 {
        divisor_tail_bound(2, s.re - model.theta(), n)
    } else {
        f64::INFINITY
    };
    SeriesEvaluation {
        value,
        terms_used: n,
        tail_bound,
        model,
    }
}

/// `∏_{p≤P} (1 − λ(p)p^{−s} + χ(p)p^{−2s})^{−1}` accumulated in the log domain.
pub fn euler_product(sys: &HeckeEigenSystem, s: C64, p_max: u64) -> Result<SeriesEvaluation, LfuncError> {
    let model = GrowthModel::of(sys);
    let sigma = s.re - model.theta();
    if sigma <= 1.0 {
        return Err(LfuncError::Domain(format!(
            "Euler product needs Re s > 1 + theta, got s = {s}"
        )));
    }
    let chi = sys.nebentypus();
    let mut log = ComplexSum::new();
    for p in primes_up_to(p_max) {
        let ps = int_pow_neg(p, s);
        let factor = C64::new(1.0, 0.0) - sys.seed(p) * ps + chi.value_u(p) * ps * ps;
        if factor.norm() == 0.0 {
            return Err(LfuncError::VanishingFactor { p });
        }
        log.add(-factor.ln());
    }
    let value = log.value().exp();
    Ok(SeriesEvaluation {
        value,
        terms_used: p_max,
        tail_bound: product_tail(value, 2.0, sigma, p_max),
        model,
    })
}

/// Bound on `|value − limit|` for an Euler product truncated at `P` whose
/// omitted log-factors satisfy `|log L_p| ≤ −weight·log(1 − p^{−σ})`.
fn product_tail(value: C64, weight: f64, sigma: f64, p_max: u64) -> f64 {
    let start = p_max.max(1) as f64;
    let x = (p_max + 1).max(2) as f64;
    let first = x.powf(-sigma);
    // −log(1−u) ≤ u/(1−u) with u ≤ first
    let delta = weight / (1.0 - first) * start.powf(1.0 - sigma) / (sigma - 1.0);
    value.norm() * delta.exp_m1()
}

/// `Λ(s,φ) = (√q/π)^s Γ((s+s_φ−½)/2 + (1−ε)/4) Γ((s−s_φ+½)/2 + (1−ε)/4) L(s,φ)`.
/// The returned tail bound is the series tail scaled by the prefactor.
pub fn completed_l(sys: &HeckeEigenSystem, s: C64, n: u64) -> Result<SeriesEvaluation, LfuncError> {
    completed_l_cached(sys, s, n, None)
}

pub fn completed_l_cached(
    sys: &HeckeEigenSystem,
    s: C64,
    n: u64,
    cache: Option<&PowerCache>,
) -> Result<SeriesEvaluation, LfuncError> {
    let pre = completed_l_prefactor(sys, s)?;
    let series = l_series_cached(sys, s, n, cache);
    Ok(SeriesEvaluation {
        value: pre * series.value,
        tail_bound: pre.norm() * series.tail_bound,
        ..series
    })
}

/// The gamma and conductor factor of [`completed_l`].
pub fn completed_l_prefactor(sys: &HeckeEigenSystem, s: C64) -> Result<C64, LfuncError> {
    let shift = if sys.parity() == 1 { 0.0 } else { 0.5 };
    let mu = sys.s_phi() - 0.5;
    let q = sys.level() as f64;
    let log = s * (0.5 * q.ln() - PI.ln())
        + log_gamma((s + mu) * 0.5 + shift)?
        + log_gamma((s - mu) * 0.5 + shift)?;
    Ok(log.exp())
}

/// `L(s,χ) = Σ χ(n) n^{−s}` truncated at `N`, for even `χ`.
pub fn dirichlet_l(chi: &DirichletCharacter, s: C64, n: u64) -> Result<SeriesEvaluation, LfuncError> {
    dirichlet_l_cached(chi, s, n, None)
}

pub fn dirichlet_l_cached(
    chi: &DirichletCharacter,
    s: C64,
    n: u64,
    cache: Option<&PowerCache>,
) -> Result<SeriesEvaluation, LfuncError> {
    if !chi.is_even() {
        return Err(LfuncError::OddCharacter);
    }
    let nn = n as usize;
    let pw = powers(cache, s, nn);
    let pv = pw.values();
    let value = fixed_block_sum(1, nn, |k| chi.value_u(k as u64) * pv[k]);
    Ok(SeriesEvaluation {
        value,
        terms_used: n,
        tail_bound: divisor_tail_bound(1, s.re, n),
        model: GrowthModel::Tempered,
    })
}

/// `Λ(s,χ) = (q/π)^{s/2} Γ(s/2) L(s,χ)` with `q` the modulus of `χ`.
pub fn completed_dirichlet_l(chi: &DirichletCharacter, s: C64, n: u64) -> Result<SeriesEvaluation, LfuncError> {
    completed_dirichlet_l_cached(chi, s, n, None)
}

pub fn completed_dirichlet_l_cached(
    chi: &DirichletCharacter,
    s: C64,
    n: u64,
    cache: Option<&PowerCache>,
) -> Result<SeriesEvaluation, LfuncError> {
    let series = dirichlet_l_cached(chi, s, n, cache)?;
    let q = chi.modulus() as f64;
    let pre = (s * 0.5 * (q.ln() - PI.ln()) + log_gamma(s * 0.5)?).exp();
    Ok(SeriesEvaluation {
        value: pre * series.value,
        tail_bound: pre.norm() * series.tail_bound,
        ..series
    })
}

/// `Σ_{n≤N} σ₁(n) λ(n) n^{−s}`.
pub fn rankin_sigma_series(sys: &HeckeEigenSystem, s: C64, n: u64) -> SeriesEvaluation {
    rankin_sigma_series_cached(sys, s, n, None)
}

pub fn rankin_sigma_series_cached(
    sys: &HeckeEigenSystem,
    s: C64,
    n: u64,
    cache: Option<&PowerCache>,
) -> SeriesEvaluation {
    let model = GrowthModel::of(sys);
    let nn = n as usize;
    let coeff = sys.coefficients_upto(nn);
    let sig = shared_sigma1_table(nn);
    let pw = powers(cache, s, nn);
    let pv = pw.values();
    let value = fixed_block_sum(1, nn, |k| coeff[k] * (sig[k] as f64) * pv[k]);
    // |σ₁(n)λ(n)| ≤ n·d(n)²·n^θ ≤ n^{1+θ} d₄(n)
    SeriesEvaluation {
        value,
        terms_used: n,
        tail_bound: divisor_tail_bound(4, s.re - 1.0 - model.theta(), n),
        model,
    }
}

/// `(1−χ(p)p^{1−2s}) / ((1−λ(p)p^{1−s}+χ(p)p^{2−2s})(1−λ(p)p^{−s}+χ(p)p^{−2s}))`.
pub fn rankin_local_factor(sys: &HeckeEigenSystem, p: u64, s: C64) -> Result<C64, LfuncError> {
    rankin_local_factor_from(sys.seed(p), sys.nebentypus().value_u(p), p, s)
}

/// [`rankin_local_factor`] for explicit `λ(p)` and `χ(p)`.
pub fn rankin_local_factor_from(lam: C64, chi_p: C64, p: u64, s: C64) -> Result<C64, LfuncError> {
    let one = C64::new(1.0, 0.0);
    let x1 = int_pow_neg(p, s - 1.0);
    let x0 = int_pow_neg(p, s);
    let d1 = one - lam * x1 + chi_p * x1 * x1;
    let d0 = one - lam * x0 + chi_p * x0 * x0;
    let den = d1 * d0;
    if den.norm() == 0.0 {
        return Err(LfuncError::VanishingFactor { p });
    }
    Ok((one - chi_p * int_pow_neg(p, 2.0 * s - 1.0)) / den)
}

/// `∏_{p≤P}` of [`rankin_local_factor`].
pub fn rankin_euler_product(sys: &HeckeEigenSystem, s: C64, p_max: u64) -> Result<SeriesEvaluation, LfuncError> {
    let model = GrowthModel::of(sys);
    let sigma = s.re - 1.0 - model.theta();
    if sigma <= 1.0 {
        return Err(LfuncError::Domain(format!(
            "Rankin Euler product needs Re s > 2 + theta, got s = {s}"
        )));
    }
    let mut log = ComplexSum::new();
    for p in primes_up_to(p_max) {
        let f = rankin_local_factor(sys, p, s)?;
        if f.norm() == 0.0 {
            return Err(LfuncError::VanishingFactor { p });
        }
        log.add(f.ln());
    }
    let value = log.value().exp();
    Ok(SeriesEvaluation {
        value,
        terms_used: p_max,
        // four Satake-type roots of size ≤ p^{1+θ}, one more of size ≤ p from the numerator
        tail_bound: product_tail(value, 5.0, sigma, p_max),
        model,
    })
}

/// `L(s−1,φ)L(s,φ)/L(2s−1,χ)` with propagated truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankinClosedForm {
    #[serde(with = "complex_pair")]
    pub value: C64,
    pub error_bound: f64,
    /// `|L(2s−1,χ)|` as computed.
    pub denominator: f64,
    /// Set when the denominator is small or poorly resolved by its tail bound.
    pub ill_conditioned: bool,
}

pub fn rankin_closed_form(
    sys: &HeckeEigenSystem,
    s: C64,
    n: u64,
    p_max: u64,
) -> Result<RankinClosedForm, LfuncError> {
    rankin_closed_form_cached(sys, s, n, p_max, None)
}

/// The `L(s,φ)` pieces are truncated at `N`; `L(2s−1,χ)` is truncated at
/// `max(N, P)`.
pub fn rankin_closed_form_cached(
    sys: &HeckeEigenSystem,
    s: C64,
    n: u64,
    p_max: u64,
    cache: Option<&PowerCache>,
) -> Result<RankinClosedForm, LfuncError> {
    if s.re - 1.0 - sys.growth_exponent() <= 1.0 {
        return Err(LfuncError::Domain(format!("closed form needs Re s > 2 + theta, got s = {s}")));
    }
    let a = l_series_cached(sys, s - 1.0, n, cache);
    let b = l_series_cached(sys, s, n, cache);
    let c = dirichlet_l_cached(sys.nebentypus(), 2.0 * s - 1.0, n.max(p_max), cache)?;
    Ok(assemble_quotient(a, b, c))
}

pub(crate) fn assemble_quotient(a: SeriesEvaluation, b: SeriesEvaluation, c: SeriesEvaluation) -> RankinClosedForm {
    let value = a.value * b.value / c.value;
    let (na, nb, nc) = (a.value.norm(), b.value.norm(), c.value.norm());
    let (ta, tb, tc) = (a.tail_bound, b.tail_bound, c.tail_bound);
    let error_bound = if tc >= nc {
        f64::INFINITY
    } else {
        let e1 = na * tb + nb * ta + ta * tb;
        e1 / (nc - tc) + na * nb * tc / (nc * (nc - tc))
    };
    RankinClosedForm {
        value,
        error_bound,
        denominator: nc,
        ill_conditioned: nc < 1e-3 || tc > 0.5 * nc,
    }
}

/// Options for [`twist_nonvanishing_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistScanOptions {
    /// Only conductors coprime to `avoid` are scanned.
    pub avoid: u64,
    pub r_max: u64,
    pub threshold: f64,
    pub terms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistScanEntry {
    pub conductor: u64,
    /// Position of `ψ` in the enumeration of characters mod its conductor.
    pub index: usize,
    pub abs_value: f64,
    pub tail_bound: f64,
}

/// Even primitive `ψ` of conductor `≤ r_max`, coprime to `avoid`, for which
/// the truncated `|L(s, φ⊗ψ)|` exceeds `threshold + tail_bound`.
pub fn twist_nonvanishing_scan(
    sys: &HeckeEigenSystem,
    s: C64,
    opts: &TwistScanOptions,
) -> Result<Vec<TwistScanEntry>, LfuncError> {
    if s.re - sys.growth_exponent() <= 1.0 {
        return Err(LfuncError::Domain(format!("scan needs Re s > 1 + theta, got s = {s}")));
    }
    let mut candidates = Vec::new();
    for r in 1..=opts.r_max {
        if num_integer::gcd(r, opts.avoid.max(1)) != 1 {
            continue;
        }
        for (index, psi) in crate::arith::enumerate_characters(r)
            .map_err(HeckeError::from)?
            .into_iter()
            .enumerate()
        {
            if psi.is_even() && psi.is_primitive() {
                candidates.push((r, index, psi));
            }
        }
    }
    let evaluated: Vec<Result<Option<TwistScanEntry>, LfuncError>> = candidates
        .par_iter()
        .map(|(r, index, psi)| {
            let twisted = sys.twist(psi)?;
            let l = l_series(&twisted, s, opts.terms);
            let abs_value = l.value.norm();
            Ok((abs_value > opts.threshold + l.tail_bound).then_some(TwistScanEntry {
                conductor: *r,
                index: *index,
                abs_value,
                tail_bound: l.tail_bound,
            }))
        })
        .collect();
    evaluated.into_iter().filter_map(|r| r.transpose()).collect()
}

/// `Σ_{k=0}^{K} σ₁(p^k) λ(p^k) p^{−ks}` from explicit `λ(p)`, `χ(p)`.
pub fn rankin_local_series(lam: C64, chi_p: C64, ramified: bool, p: u64, s: C64, terms: u32) -> C64 {
    let x = int_pow_neg(p, s);
    let mut acc = ComplexSum::new();
    let (mut prev, mut cur) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let mut sigma = CompensatedSum::new();
    let mut pk = 1.0f64;
    let mut xk = C64::new(1.0, 0.0);
    for k in 0..=terms {
        sigma.add(pk);
        acc.add(cur * sigma.value() * xk);
        let next = if ramified { lam * cur } else if k == 0 { lam } else { lam * cur - chi_p * prev };
        prev = cur;
        cur = next;
        pk *= p as f64;
        xk *= x;
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::random_system;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn zero_seed_system(q: u64) -> HeckeEigenSystem {
        let chi = DirichletCharacter::principal(q).unwrap();
        let seeds = (primes_up_to(1000).into_iter())
            .filter(|p| q % p != 0)
            .map(|p| (p, c(0.0, 0.0)))
            .collect::<BTreeMap<_, _>>();
        HeckeEigenSystem::from_seeds(q, &chi, c(0.5, 1.0), 1, c(1.0, 0.0), seeds, true).unwrap()
    }

    #[test]
    fn tail_bound_closed_form_matches_numeric_integral() {
        // σ ∫_N^∞ x^{−σ}(1+ln x)^{k−1} dx by a crude Riemann sum in log space
        for &(k, sigma, n) in &[(1u32, 2.0, 10u64), (2, 3.0, 100), (4, 2.5, 1000)] {
            let mut acc = 0.0;
            let steps = 200_000;
            let (lo, hi) = ((n as f64).ln(), (n as f64).ln() + 80.0);
            let h = (hi - lo) / steps as f64;
            for i in 0..steps {
                let t = lo + (i as f64 + 0.5) * h;
                acc += (t * (1.0 - sigma)).exp() * (1.0 + t).powi(k as i32 - 1) * h;
            }
            let want = sigma * acc;
            let got = divisor_tail_bound(k, sigma, n);
            assert!((got - want).abs() < 1e-6 * want, "k={k}: {got} vs {want}");
        }
        assert!(divisor_tail_bound(2, 1.0, 10).is_infinite());
    }

    #[test]
    fn zero_seeds_truncated_at_three() {
        let sys = zero_seed_system(1);
        let v = l_series(&sys, c(2.0, 0.0), 3);
        assert_eq!(v.value, c(1.0, 0.0));
    }

    #[test]
    fn empty_product() {
        let sys = zero_seed_system(1);
        let v = euler_product(&sys, c(2.0, 0.0), 0).unwrap();
        assert_eq!(v.value, c(1.0, 0.0));
    }

    #[test]
    fn series_vs_product_zero_seeds() {
        let sys = zero_seed_system(1);
        let s = c(1.5, 0.0);
        let series = l_series(&sys, s, 1_000_000);
        let product = euler_product(&sys, s, 10_000).unwrap();
        assert!((series.value - product.value).norm() <= 1e-6);
    }

    #[test]
    fn self_consistency_under_doubling() {
        let chi = DirichletCharacter::principal(1).unwrap();
        let sys = random_system(5, 1, &chi, c(0.5, 3.0), 1).unwrap();
        let a = l_series(&sys, c(3.0, 0.0), 100_000);
        let b = l_series(&sys, c(3.0, 0.0), 200_000);
        assert!((a.value - b.value).norm() <= a.tail_bound);
    }

    #[test]
    fn completed_l_parity_shift() {
        let chi = DirichletCharacter::principal(36).unwrap();
        let even = random_system(2, 36, &chi, c(0.5, 2.0), 1).unwrap();
        let odd = even.with_parity(-1).unwrap();
        let s = c(3.0, 0.0);
        let mu = even.s_phi() - 0.5;
        let scale = (6.0 / PI).powi(3);
        let g = |shift: f64| {
            (log_gamma((s + mu) * 0.5 + shift).unwrap() + log_gamma((s - mu) * 0.5 + shift).unwrap()).exp()
        };
        let l = l_series(&even, s, 1000).value;
        let e = completed_l(&even, s, 1000).unwrap().value;
        let o = completed_l(&odd, s, 1000).unwrap().value;
        assert!((e - scale * g(0.0) * l).norm() < 1e-12 * e.norm());
        assert!((o - scale * g(0.5) * l).norm() < 1e-12 * o.norm());
    }

    #[test]
    fn zeta_two() {
        let chi = DirichletCharacter::principal(1).unwrap();
        let v = dirichlet_l(&chi, c(2.0, 0.0), 1_000_000).unwrap();
        assert!((v.value.re - PI * PI / 6.0).abs() <= v.tail_bound);
    }

    /// Hurwitz zeta by Euler–Maclaurin, real s > 1, 0 < a ≤ 1.
    fn hurwitz(s: f64, a: f64) -> f64 {
        let m = 20;
        let mut sum = 0.0;
        for k in 0..m {
            sum += (k as f64 + a).powf(-s);
        }
        let x = m as f64 + a;
        sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
        // Bernoulli corrections B_{2j}/(2j)! · s(s+1)…(s+2j−2) x^{−s−2j+1}
        let b = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
        let mut rising = s;
        let mut fact = 2.0;
        for (j, bj) in b.iter().enumerate() {
            let jj = j as f64;
            sum += bj / fact * rising * x.powf(-s - 2.0 * jj - 1.0);
            rising *= (s + 2.0 * jj + 1.0) * (s + 2.0 * jj + 2.0);
            fact *= (2.0 * jj + 3.0) * (2.0 * jj + 4.0);
        }
        sum
    }

    #[test]
    fn quadratic_mod_five_at_one_point_two() {
        let chi = DirichletCharacter::quadratic(5).unwrap();
        let s = 1.2;
        let oracle: f64 = (1..5u64)
            .map(|a| chi.value_u(a).re * hurwitz(s, a as f64 / 5.0))
            .sum::<f64>()
            * 5f64.powf(-s);
        let v = dirichlet_l(&chi, c(s, 0.0), 100_000).unwrap();
        assert!((v.value.re - oracle).abs() < 1e-8, "{} vs {oracle}", v.value.re);
    }

    #[test]
    fn odd_character_rejected() {
        let odd = crate::arith::enumerate_characters(5).unwrap().into_iter().find(|c| !c.is_even()).unwrap();
        assert_eq!(dirichlet_l(&odd, c(2.0, 0.0), 10).unwrap_err(), LfuncError::OddCharacter);
    }

    #[test]
    fn rankin_small_cases() {
        let sys = zero_seed_system(1);
        assert_eq!(rankin_sigma_series(&sys, c(3.0, 0.0), 1).value, c(1.0, 0.0));
        assert_eq!(rankin_sigma_series(&sys, c(3.0, 0.0), 3).value, c(1.0, 0.0));
        assert_eq!(rankin_local_factor_from(c(0.0, 0.0), c(0.0, 0.0), 7, c(3.0, 0.0)).unwrap(), c(1.0, 0.0));
        let s = c(3.5, 0.0);
        let closed = rankin_closed_form(&sys, s, 100_000, 100_000).unwrap();
        let series = rankin_sigma_series(&sys, s, 100_000);
        assert!((closed.value - series.value).norm() <= 1e-6);
    }

    #[test]
    fn local_factor_degenerate_seed() {
        // λ(p) = 2, χ(p) = 1 gives a double root in each denominator
        let s = c(3.5, 0.0);
        let f = rankin_local_factor_from(c(2.0, 0.0), c(1.0, 0.0), 3, s).unwrap();
        let brute = rankin_local_series(c(2.0, 0.0), c(1.0, 0.0), false, 3, s, 80);
        assert!((f - brute).norm() < 1e-12 * f.norm());
    }

    #[test]
    fn closed_form_reports_conditioning_fields() {
        let chi = DirichletCharacter::principal(6).unwrap();
        let sys = random_system(3, 6, &chi, c(0.5, 1.0), 1).unwrap();
        let r = rankin_closed_form(&sys, c(3.5, 0.0), 10_000, 10_000).unwrap();
        assert!(!r.ill_conditioned);
        assert!(r.error_bound.is_finite());
        assert!(rankin_closed_form(&sys, c(2.0, 0.0), 100, 100).is_err());
    }

    #[test]
    fn twist_scan_basics() {
        let chi = DirichletCharacter::principal(1).unwrap();
        let sys = random_system(21, 1, &chi, c(0.5, 4.0), 1).unwrap();
        let opts = TwistScanOptions {
            avoid: 1,
            r_max: 20,
            threshold: 0.1,
            terms: 5_000,
        };
        let found = twist_nonvanishing_scan(&sys, c(2.0, 0.0), &opts).unwrap();
        assert!(!found.is_empty());
        let none = twist_nonvanishing_scan(
            &sys,
            c(2.0, 0.0),
            &TwistScanOptions {
                threshold: f64::INFINITY,
                ..opts
            },
        )
        .unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn power_table_matches_direct() {
        let s = c(2.5, 1.0);
        let t = PowerTable::new(s, 1000);
        for n in 1..=1000u64 {
            assert_eq!(t.values()[n as usize], int_pow_neg(n, s));
        }
        let cache = PowerCache::new();
        let a = cache.get(s, 100);
        let b = cache.get(s, 50);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
