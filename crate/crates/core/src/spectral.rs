//! Geometric side of the Selberg trace formula for supplied class data,
//! Gaussian test functions, and the Laplace-transform smoothing machinery:
//! Laplace transforms, fractional integrals `f_ρ`, Bromwich inversion and the
//! smoothed counting functions `N_w(T)`.
//!
//! Class data is input: conjugacy classes, cusp data and areas are read from
//! JSON, not derived from a group.

use crate::numeric::{ComplexSum, C64};
use crate::special::{digamma, integrate, log_gamma, Domain, QuadratureError, QuadratureSpec, SpecialError};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid test function: {0}")]
    TestFunction(String),
    #[error("invalid class data: {0}")]
    ClassData(String),
    #[error("invalid spectrum: {0}")]
    Spectrum(String),
    #[error("Re z = {re} must exceed the growth rate {c}")]
    OutsideHalfPlane { re: f64, c: f64 },
    #[error("Bromwich inversion needs rho >= 1, got {0}")]
    SmoothingOrder(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Bromwich panels did not converge after {panels} panels (last change {change:e})")]
    BromwichNonConvergence { panels: usize, change: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// An even test function `h` with its transform `g(x) = (1/2π)∫h(r)e^{−irx}dr`.
pub trait TestFunction: Send + Sync {
    fn h(&self, r: C64) -> C64;

    fn g(&self, x: f64) -> C64;

    /// Upper bound for `|g(y)|` over all `y ≥ x ≥ 0`.
    fn g_envelope(&self, x: f64) -> f64;

    fn h_real(&self, r: f64) -> C64 {
        self.h(C64::new(r, 0.0))
    }
}

/// `h(r) = exp(−zr²)`, `g(x) = (4πz)^{−1/2} exp(−x²/4z)`, `Re z > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTestFunction {
    #[serde(with = "crate::lfunc::complex_pair")]
    z: C64,
}

impl GaussianTestFunction {
    pub fn new(z: C64) -> Result<Self, SpectralError> {
        if !(z.re > 0.0 && z.im.is_finite() && z.re.is_finite()) {
            return Err(SpectralError::TestFunction(format!("Re z must be positive, got {z}")));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> C64 {
        self.z
    }
}

impl TestFunction for GaussianTestFunction {
    fn h(&self, r: C64) -> C64 {
        (-self.z * r * r).exp()
    }

    fn g(&self, x: f64) -> C64 {
        (-(x * x) / (4.0 * self.z)).exp() / (4.0 * PI * self.z).sqrt()
    }

    fn g_envelope(&self, x: f64) -> f64 {
        // Re(1/4z) > 0, so |g| decreases in |x|
        let decay = (1.0 / (4.0 * self.z)).re;
        (-(x * x) * decay).exp() / (4.0 * PI * self.z.norm()).sqrt()
    }
}

/// `(h, g)` of a Gaussian test function as plain closures.
pub fn gaussian_pair(
    tf: GaussianTestFunction,
) -> (impl Fn(f64) -> C64 + Send + Sync, impl Fn(f64) -> C64 + Send + Sync) {
    (move |r: f64| tf.h_real(r), move |x: f64| tf.g(x))
}

/// `Σ c_i h_i` for Gaussian `h_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCombination {
    parts: Vec<(C64, GaussianTestFunction)>,
}

impl LinearCombination {
    pub fn new(parts: Vec<(C64, GaussianTestFunction)>) -> Self {
        Self { parts }
    }
}

impl TestFunction for LinearCombination {
    fn h(&self, r: C64) -> C64 {
        self.parts.iter().map(|(c, t)| c * t.h(r)).sum()
    }

    fn g(&self, x: f64) -> C64 {
        self.parts.iter().map(|(c, t)| c * t.g(x)).sum()
    }

    fn g_envelope(&self, x: f64) -> f64 {
        self.parts.iter().map(|(c, t)| c.norm() * t.g_envelope(x)).sum()
    }
}

/// A complex number stored as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Pair(pub C64);

impl From<[f64; 2]> for Pair {
    fn from([re, im]: [f64; 2]) -> Self {
        Pair(C64::new(re, im))
    }
}

impl From<Pair> for [f64; 2] {
    fn from(p: Pair) -> Self {
        [p.0.re, p.0.im]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicClass {
    pub norm: f64,
    /// `χ(γ^k)` for `k = 1, 2, …`; beyond the list `χ(γ)^k` is used.
    pub chi_powers: Vec<Pair>,
}

impl HyperbolicClass {
    pub fn chi_power(&self, k: usize) -> C64 {
        match self.chi_powers.get(k - 1) {
            Some(p) => p.0,
            None => self.chi_powers[0].0.powi(k as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticClass {
    pub order: u32,
    /// `χ(γ^ν)` for `1 ≤ ν < order`.
    pub chi_values: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspData {
    pub open: u32,
    pub closed: u32,
    /// `χ(γ_a)` at the closed cusps.
    pub chi_values: Vec<Pair>,
    /// Number of open cusps.
    pub k1: u32,
    /// `tr(I − Φ(1/2, χ))`.
    pub phi_trace: f64,
}

/// Conjugacy-class input of the geometric side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicClassData {
    pub area: f64,
    #[serde(default)]
    pub hyperbolic: Vec<HyperbolicClass>,
    #[serde(default)]
    pub elliptic: Vec<EllipticClass>,
    pub cusps: CuspData,
}

const UNIT_TOL: f64 = 1e-12;

fn check_unit(what: &str, z: C64) -> Result<(), SpectralError> {
    if (z.norm() - 1.0).abs() > UNIT_TOL {
        return Err(SpectralError::ClassData(format!("{what} has modulus {} != 1", z.norm())));
    }
    Ok(())
}

impl GeodesicClassData {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(SpectralError::ClassData(format!("area must be positive, got {}", self.area)));
        }
        for (i, c) in self.hyperbolic.iter().enumerate() {
            if !(c.norm > 1.0 && c.norm.is_finite()) {
                return Err(SpectralError::ClassData(format!("hyperbolic class {i}: norm {} <= 1", c.norm)));
            }
            if c.chi_powers.is_empty() {
                return Err(SpectralError::ClassData(format!("hyperbolic class {i}: no character values")));
            }
            for v in &c.chi_powers {
                check_unit(&format!("hyperbolic class {i} character value"), v.0)?;
            }
        }
        for (i, c) in self.elliptic.iter().enumerate() {
            if c.order < 2 {
                return Err(SpectralError::ClassData(format!("elliptic class {i}: order {} < 2", c.order)));
            }
            if c.chi_values.len() != c.order as usize - 1 {
                return Err(SpectralError::ClassData(format!(
                    "elliptic class {i}: expected {} character values, got {}",
                    c.order - 1,
                    c.chi_values.len()
                )));
            }
            for v in &c.chi_values {
                check_unit(&format!("elliptic class {i} character value"), v.0)?;
            }
        }
        let cd = &self.cusps;
        if cd.k1 != cd.open {
            return Err(SpectralError::ClassData(format!(
                "k1 = {} must equal the number of open cusps {}",
                cd.k1, cd.open
            )));
        }
        if cd.chi_values.len() != cd.closed as usize {
            return Err(SpectralError::ClassData(format!(
                "{} closed cusps but {} character values",
                cd.closed,
                cd.chi_values.len()
            )));
        }
        for v in &cd.chi_values {
            check_unit("cusp character value", v.0)?;
            if (v.0 - 1.0).norm() < UNIT_TOL {
                return Err(SpectralError::ClassData("a closed cusp has chi = 1".into()));
            }
        }
        if !cd.phi_trace.is_finite() {
            return Err(SpectralError::ClassData("phi_trace is not finite".into()));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, SpectralError> {
        let d: Self = serde_json::from_str(s).map_err(|e| SpectralError::ClassData(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }
}

fn ordered_sum(parts: Vec<C64>) -> C64 {
    parts.into_iter().collect::<ComplexSum>().value()
}

/// `μ(F)/2π ∫_ℝ r tanh(πr) h(r) dr`, folded onto `[0, ∞)`.
pub fn identity_term(area: f64, tf: &dyn TestFunction, spec: &QuadratureSpec) -> Result<C64, SpectralError> {
    if !(area > 0.0) {
        return Err(SpectralError::ClassData(format!("area must be positive, got {area}")));
    }
    let est = integrate(|r| tf.h_real(r) * (r * (PI * r).tanh()), Domain::SemiInfinite(0.0), spec)?;
    Ok(est.value * (area / PI))
}

/// Terms with `|term| ≤ HYPERBOLIC_CUTOFF` are dropped along with all larger `k`.
pub const HYPERBOLIC_CUTOFF: f64 = 1e-17;

/// `Σ_γ Σ_{k≤k_max} χ(γ^k) 2 log N(γ)/(N^{k/2} − N^{−k/2}) g(k log N)`.
pub fn hyperbolic_term(classes: &[HyperbolicClass], tf: &dyn TestFunction, k_max: usize) -> C64 {
    let parts: Vec<C64> = classes
        .par_iter()
        .map(|c| {
            let l = c.norm.ln();
            let mut acc = ComplexSum::new();
            for k in 1..=k_max {
                let x = k as f64 * l;
                // 2l/(N^{k/2} − N^{−k/2}) and the envelope of g both decrease in k
                let weight = 2.0 * l / (2.0 * (0.5 * x).sinh());
                if weight * tf.g_envelope(x) <= HYPERBOLIC_CUTOFF {
                    break;
                }
                acc.add(c.chi_power(k) * weight * tf.g(x));
            }
            acc.value()
        })
        .collect();
    ordered_sum(parts)
}

/// `e^{−ar}/(1 + e^{−2πr})` without overflow.
fn elliptic_weight(a: f64, r: f64) -> f64 {
    if r >= 0.0 {
        (-a * r).exp() / (1.0 + (-2.0 * PI * r).exp())
    } else {
        ((2.0 * PI - a) * r).exp() / ((2.0 * PI * r).exp() + 1.0)
    }
}

/// Exponent of the elliptic kernel `e^{−κπνr/m}/(1+e^{−2πr})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EllipticKernel {
    /// `κ = 2`: the even part is `cosh(π(1−2ν/m)r)/(2cosh πr)`, symmetric
    /// under `ν ↦ m−ν`.
    #[default]
    Standard,
    /// `κ = 1`.
    AsPrinted,
}

impl EllipticKernel {
    fn factor(self) -> f64 {
        match self {
            EllipticKernel::Standard => 2.0,
            EllipticKernel::AsPrinted => 1.0,
        }
    }
}

/// `Σ_γ Σ_{1≤ν<m} 2χ(γ^ν)/(m sin(πν/m)) ∫_ℝ h(r) e^{−2πνr/m}/(1+e^{−2πr}) dr`.
pub fn elliptic_term(
    classes: &[EllipticClass],
    tf: &dyn TestFunction,
    spec: &QuadratureSpec,
) -> Result<C64, SpectralError> {
    elliptic_term_with(classes, tf, spec, EllipticKernel::Standard)
}

pub fn elliptic_term_with(
    classes: &[EllipticClass],
    tf: &dyn TestFunction,
    spec: &QuadratureSpec,
    kernel: EllipticKernel,
) -> Result<C64, SpectralError> {
    let parts: Vec<Result<C64, SpectralError>> = classes
        .par_iter()
        .map(|c| {
            let m = c.order as f64;
            let mut acc = ComplexSum::new();
            for (i, chi) in c.chi_values.iter().enumerate() {
                let nu = (i + 1) as f64;
                let a = kernel.factor() * PI * nu / m;
                let est = integrate(|r| tf.h_real(r) * elliptic_weight(a, r), Domain::RealLine, spec)?;
                acc.add(chi.0 * est.value * (2.0 / (m * (PI * nu / m).sin())));
            }
            Ok(acc.value())
        })
        .collect();
    Ok(ordered_sum(parts.into_iter().collect::<Result<_, _>>()?))
}

/// `∫_ℝ h(r) ψ(1+ir) dr = 2∫₀^∞ h(r) Re ψ(1+ir) dr` for even `h`.
pub fn digamma_integral(tf: &dyn TestFunction, spec: &QuadratureSpec) -> Result<C64, SpectralError> {
    let failure = std::cell::Cell::new(None);
    let est = integrate(
        |r| match digamma(C64::new(1.0, r)) {
            Ok(psi) => tf.h_real(r) * (2.0 * psi.re),
            Err(e) => {
                failure.set(Some(e));
                C64::new(0.0, 0.0)
            }
        },
        Domain::SemiInfinite(0.0),
        spec,
    )?;
    if let Some(e) = failure.take() {
        return Err(e.into());
    }
    Ok(est.value)
}

/// The three cusp lines:
/// `−2(k₁ log 2 + Σ_closed log|1−χ(γ_a)|) g(0) + ½ tr(I−Φ(½,χ)) h(0) − (k₁/π)∫ h(r)ψ(1+ir) dr`.
pub fn parabolic_terms(cusps: &CuspData, tf: &dyn TestFunction, spec: &QuadratureSpec) -> Result<C64, SpectralError> {
    let mut logs = ComplexSum::new();
    for _ in 0..cusps.open {
        logs.add(C64::new(LN_2, 0.0));
    }
    for v in &cusps.chi_values {
        logs.add(C64::new((C64::new(1.0, 0.0) - v.0).norm().ln(), 0.0));
    }
    let zero = C64::new(0.0, 0.0);
    let mut acc = ComplexSum::new();
    acc.add(-2.0 * logs.value() * tf.g(0.0));
    acc.add(0.5 * cusps.phi_trace * tf.h(zero));
    if cusps.k1 > 0 {
        acc.add(-(cusps.k1 as f64 / PI) * digamma_integral(tf, spec)?);
    }
    Ok(acc.value())
}

/// The four contributions to the geometric side and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSide {
    #[serde(with = "crate::lfunc::complex_pair")]
    pub identity: C64,
    #[serde(with = "crate::lfunc::complex_pair")]
    pub hyperbolic: C64,
    #[serde(with = "crate::lfunc::complex_pair")]
    pub elliptic: C64,
    #[serde(with = "crate::lfunc::complex_pair")]
    pub parabolic: C64,
    #[serde(with = "crate::lfunc::complex_pair")]
    pub total: C64,
}

impl GeometricSide {
    pub fn component_sum(&self) -> C64 {
        self.identity + self.hyperbolic + self.elliptic + self.parabolic
    }
}

pub fn geometric_side(
    data: &GeodesicClassData,
    tf: &dyn TestFunction,
    k_max: usize,
    spec: &QuadratureSpec,
) -> Result<GeometricSide, SpectralError> {
    data.validate()?;
    let identity = identity_term(data.area, tf, spec)?;
    let hyperbolic = hyperbolic_term(&data.hyperbolic, tf, k_max);
    let elliptic = elliptic_term(&data.elliptic, tf, spec)?;
    let parabolic = parabolic_terms(&data.cusps, tf, spec)?;
    Ok(GeometricSide {
        identity,
        hyperbolic,
        elliptic,
        parabolic,
        total: identity + hyperbolic + elliptic + parabolic,
    })
}

/// Ascending discrete eigenvalues `0 ≤ λ₀ ≤ λ₁ ≤ …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpectrumList(Vec<f64>);

impl TryFrom<Vec<f64>> for SpectrumList {
    type Error = SpectralError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(SpectralError::Spectrum("eigenvalues must be finite and >= 0".into()));
        }
        if v.windows(2).any(|w| w[0] > w[1]) {
            return Err(SpectralError::Spectrum("eigenvalues must be ascending".into()));
        }
        Ok(Self(v))
    }
}

impl From<SpectrumList> for Vec<f64> {
    fn from(s: SpectrumList) -> Self {
        s.0
    }
}

impl SpectrumList {
    pub fn new(v: Vec<f64>) -> Result<Self, SpectralError> {
        v.try_into()
    }

    /// Sorts the input first.
    pub fn from_unsorted(mut v: Vec<f64>) -> Result<Self, SpectralError> {
        v.sort_by(f64::total_cmp);
        v.try_into()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }

    pub fn from_json(s: &str) -> Result<Self, SpectralError> {
        serde_json::from_str(s).map_err(|e| SpectralError::Spectrum(e.to_string()))
    }
}

/// Tabulated `−φ′/φ(½+ir)` on an ascending grid of `r ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSamples {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

/// `2Σ h(r_i) + (1/2π)∫ h(r)(−φ′/φ)(½+ir) dr` with `λ_i = ¼ + r_i²`; the
/// integral is the trapezoid rule on the samples, doubled by evenness.
pub fn spectral_side(
    spectrum: &SpectrumList,
    scattering: Option<&ScatteringSamples>,
    tf: &dyn TestFunction,
) -> Result<C64, SpectralError> {
    let mut acc = ComplexSum::new();
    for &lam in spectrum.eigenvalues() {
        let r = C64::new(lam - 0.25, 0.0).sqrt();
        acc.add(2.0 * tf.h(r));
    }
    if let Some(s) = scattering {
        if s.r.len() != s.values.len() || s.r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpectralError::InvalidArgument("scattering samples must be ascending pairs".into()));
        }
        let mut integral = ComplexSum::new();
        for i in 1..s.r.len() {
            let dr = s.r[i] - s.r[i - 1];
            integral.add(0.5 * dr * (tf.h_real(s.r[i]) * s.values[i] + tf.h_real(s.r[i - 1]) * s.values[i - 1]));
        }
        acc.add(integral.value() * (2.0 / (2.0 * PI)));
    }
    Ok(acc.value())
}

/// `|f(t)| ≤ M e^{ct}` for `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialOrder {
    pub m: f64,
    pub c: f64,
}

/// A Laplace transform value with its certified tail and quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    #[serde(with = "crate::lfunc::complex_pair")]
    pub value: C64,
    pub cutoff: f64,
    pub tail_bound: f64,
    pub quadrature_error: f64,
}

/// Tail allowance for [`laplace`].
pub const LAPLACE_TAIL: f64 = 1e-14;

/// `𝓛f(z) = ∫₀^∞ f(t) e^{−zt} dt`, integrated over `[0, T]` with `T` chosen so
/// that `∫_T^∞ M e^{(c−Re z)t} dt ≤ 1e−14`.
pub fn laplace<F: Fn(f64) -> C64>(
    f: F,
    z: C64,
    order: ExponentialOrder,
    spec: &QuadratureSpec,
) -> Result<LaplaceValue, SpectralError> {
    let gap = z.re - order.c;
    if !(gap > 0.0) {
        return Err(SpectralError::OutsideHalfPlane { re: z.re, c: order.c });
    }
    let cutoff = ((order.m / (gap * LAPLACE_TAIL)).ln() / gap).max(1.0);
    let tail_bound = order.m * (-gap * cutoff).exp() / gap;
    let est = integrate(|t| f(t) * (-z * t).exp(), Domain::Finite(0.0, cutoff), spec)?;
    Ok(LaplaceValue {
        value: est.value,
        cutoff,
        tail_bound,
        quadrature_error: est.error,
    })
}

/// `f_ρ(t) = ∫₀^t (t−u)^{ρ−1}/Γ(ρ) f(u) du`.
pub fn convolve_frac<F: Fn(f64) -> C64>(f: F, rho: f64, t: f64, spec: &QuadratureSpec) -> Result<C64, SpectralError> {
    if !(rho > 0.0) {
        return Err(SpectralError::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    if t <= 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let lg = log_gamma(C64::new(rho, 0.0))?.re;
    let kernel = |v: f64| ((rho - 1.0) * v.ln() - lg).exp();
    // split at t/2 so each endpoint singularity sits at an exact zero
    let half = 0.5 * t;
    let lower = integrate(|u| f(u) * kernel(t - u), Domain::Finite(0.0, half), spec)?;
    let upper = integrate(
        |v| if v <= 0.0 { C64::new(0.0, 0.0) } else { f(t - v) * kernel(v) },
        Domain::Finite(0.0, half),
        spec,
    )?;
    Ok(lower.value + upper.value)
}

/// Controls for [`bromwich_smoothed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BromwichOptions {
    pub max_panels: usize,
    pub tolerance: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for BromwichOptions {
    fn default() -> Self {
        Self {
            max_panels: 2000,
            tolerance: 1e-10,
            quadrature: QuadratureSpec::default().with_tolerances(1e-14, 1e-12),
        }
    }
}

/// Wynn's epsilon extrapolation of the last entries of `s`.
fn wynn_epsilon(s: &[C64]) -> C64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&C64::new(0.0, 0.0));
    }
    let mut prev = vec![C64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<C64> = s.to_vec();
    let mut best = cur[n - 1];
    let mut level = 0;
    while cur.len() > 1 {
        let next: Vec<C64> = (0..cur.len() - 1)
            .map(|i| {
                let d = cur[i + 1] - cur[i];
                if d.norm() == 0.0 {
                    C64::new(f64::INFINITY, 0.0)
                } else {
                    prev[i + 1] + d.inv()
                }
            })
            .collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        level += 1;
        prev = cur;
        cur = next;
        if level % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}

/// `(1/2πi)∫_{a−i∞}^{a+i∞} e^{zu} 𝓛f(z)/z^ρ dz`, which is `f_ρ(u)` for
/// `u ≥ 0` and `0` for `u < 0` when `a` lies in the half-plane of convergence.
///
/// On the line the integrand decays like `|y|^{−ρ}|𝓛f|`; `ρ ≥ 1` is required.
/// For `u ≠ 0` the half-line is cut into half-periods of `e^{iyu}` and the
/// partial sums are accelerated with Wynn's epsilon; for `u = 0` the
/// half-line is integrated directly.
pub fn bromwich_smoothed<F: Fn(C64) -> C64>(
    lf: F,
    rho: f64,
    u: f64,
    a: f64,
    opts: &BromwichOptions,
) -> Result<C64, SpectralError> {
    if !(rho >= 1.0) {
        return Err(SpectralError::SmoothingOrder(rho));
    }
    if !(a > 0.0) {
        return Err(SpectralError::InvalidArgument(format!("abscissa must be positive, got {a}")));
    }
    let phi = |y: f64| {
        let z = C64::new(a, y);
        (z * u).exp() * lf(z) * (-rho * z.ln()).exp()
    };
    // y and −y folded together
    let sym = |y: f64| phi(y) + phi(-y);
    let scale = 1.0 / (2.0 * PI);
    if u == 0.0 {
        let est = integrate(sym, Domain::SemiInfinite(0.0), &opts.quadrature)?;
        return Ok(est.value * scale);
    }
    let width = PI / u.abs();
    let mut partial = Vec::new();
    let mut acc = ComplexSum::new();
    let mut last = C64::new(f64::NAN, 0.0);
    let mut change = f64::INFINITY;
    for k in 0..opts.max_panels {
        let lo = k as f64 * width;
        let est = integrate(&sym, Domain::Finite(lo, lo + width), &opts.quadrature)?;
        acc.add(est.value);
        partial.push(acc.value());
        if partial.len() > 40 {
            partial.remove(0);
        }
        if k >= 6 {
            let ext = wynn_epsilon(&partial);
            change = (ext - last).norm();
            if change <= opts.tolerance * ext.norm().max(1e-3) {
                return Ok(ext * scale);
            }
            last = ext;
        }
    }
    Err(SpectralError::BromwichNonConvergence {
        panels: opts.max_panels,
        change,
    })
}

/// The `v_T` kernel: `exp(−z/4 − x²/4z)/√(4πz) · 𝓛f(z) e^{zT}/z`.
///
/// Intended for `T < 1/4`; not enforced.
pub fn v_t_kernel<F: Fn(C64) -> C64>(lf: F, x: f64, t: f64) -> impl Fn(C64) -> C64 {
    move |z: C64| (-z / 4.0 - x * x / (4.0 * z)).exp() / (4.0 * PI * z).sqrt() * lf(z) * (z * t).exp() / z
}

/// `N_w(T) = Σ_{λ_i ≤ T} (T − λ_i)^w`.
pub fn smoothed_counting(spectrum: &SpectrumList, t: f64, w: f64) -> f64 {
    spectrum
        .eigenvalues()
        .iter()
        .filter(|&&lam| lam <= t)
        .map(|&lam| if w == 0.0 { 1.0 } else { (t - lam).powf(w) })
        .sum()
}

/// The mean-value sandwich `N₀(T) ≤ (N₁(T+δ) − N₁(T))/δ ≤ N₀(T+δ)`,
/// decided in exact rational arithmetic on the binary values supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub lower_strict: bool,
    pub upper_strict: bool,
    pub n0: u64,
    pub n0_shifted: u64,
    /// `(N₁(T+δ) − N₁(T))/δ` rounded to `f64`.
    pub quotient: f64,
}

fn exact(x: f64) -> Result<BigRational, SpectralError> {
    BigRational::from_float(x).ok_or_else(|| SpectralError::InvalidArgument(format!("{x} is not finite")))
}

fn exact_n1(spectrum: &[BigRational], t: &BigRational) -> BigRational {
    spectrum
        .iter()
        .filter(|lam| *lam <= t)
        .fold(BigRational::zero(), |acc, lam| acc + (t - lam))
}

pub fn sandwich_check(spectrum: &SpectrumList, t: f64, delta: f64) -> Result<SandwichResult, SpectralError> {
    if !(delta > 0.0) {
        return Err(SpectralError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let lams = spectrum.eigenvalues().iter().map(|&x| exact(x)).collect::<Result<Vec<_>, _>>()?;
    let (tq, dq) = (exact(t)?, exact(delta)?);
    let shifted = &tq + &dq;
    let n0 = lams.iter().filter(|l| **l <= tq).count() as u64;
    let n0_shifted = lams.iter().filter(|l| **l <= shifted).count() as u64;
    let quotient = (exact_n1(&lams, &shifted) - exact_n1(&lams, &tq)) / &dq;
    let lo = BigRational::from_integer(n0.into());
    let hi = BigRational::from_integer(n0_shifted.into());
    Ok(SandwichResult {
        lower_holds: lo <= quotient,
        upper_holds: quotient <= hi,
        lower_strict: lo < quotient,
        upper_strict: quotient < hi,
        n0,
        n0_shifted,
        quotient: quotient.to_f64().unwrap_or(f64::NAN),
    })
}
