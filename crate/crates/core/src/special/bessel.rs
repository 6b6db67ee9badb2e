//! Modified Bessel function `K_ν(y)` of complex order and the Bessel moment
//! `∫₀^∞ e^{-y} K_ν(y) y^{s-1/2} dy`.
//!
//! `K_ν(y) = ½ ∫_ℝ exp(−y cosh w − ν w) dw`. The line of integration is
//! shifted to `w = t + iα` towards the saddle of the integrand, which keeps
//! the oscillation of `e^{-iνt}` from cancelling catastrophically when
//! `Im ν` is large. The shifted integrand decays doubly exponentially, so the
//! trapezoid rule converges geometrically in the step.

use super::gamma::log_gamma;
use super::quadrature::{integrate, Domain, QuadEstimate, QuadratureSpec};
use super::SpecialError;
use crate::numeric::{ComplexSum, C64};
use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

/// Largest `|Im ν|` accepted by [`bessel_k`].
pub const MAX_IMAG_ORDER: f64 = 50.0;

/// Dynamic range, in natural-log units, kept below the peak of the integrand.
const LOG_RANGE: f64 = 45.0;

fn check_args(nu: C64, y: f64) -> Result<(), SpecialError> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(SpecialError::Domain(format!("bessel_k requires y > 0, got {y}")));
    }
    if !(nu.re.is_finite() && nu.im.is_finite()) || nu.im.abs() > MAX_IMAG_ORDER {
        return Err(SpecialError::Range(nu));
    }
    Ok(())
}

/// `e^{y} K_ν(y)`.
pub fn bessel_k_scaled(nu: C64, y: f64) -> Result<C64, SpecialError> {
    check_args(nu, y)?;
    Ok(k_scaled_unchecked(nu, y))
}

/// `K_ν(y)` for `y > 0` and `|Im ν| ≤ 50`.
pub fn bessel_k(nu: C64, y: f64) -> Result<C64, SpecialError> {
    bessel_k_scaled(nu, y).map(|k| k * (-y).exp())
}

fn k_scaled_unchecked(nu: C64, y: f64) -> C64 {
    // K is even in ν; keep Re ν >= 0 so the peak sits at t <= 0 consistently
    let nu = if nu.re < 0.0 { -nu } else { nu };
    let (a, b) = (nu.re, nu.im);

    let saddle = (-nu / y).asinh().im;
    let d_min = if b == 0.0 { FRAC_PI_2 } else { (1.5 / b.abs()).min(FRAC_PI_2) };
    let limit = FRAC_PI_2 - d_min;
    let alpha = saddle.clamp(-limit, limit);
    let d = FRAC_PI_2 - alpha.abs();
    let (sa, ca) = alpha.sin_cos();

    let h = (2.0 * PI * d / (45.0 + b.abs() * d + a * d)).min(0.6 / (y * ca + 1.0).sqrt());

    // real part of the exponent, without the constant bα
    let log_mag = |t: f64| -y * (t.cosh() * ca - 1.0) - a * t;
    let t_peak = (-a / (y * ca)).asinh();
    let peak = log_mag(t_peak);
    let mut lo = t_peak;
    while log_mag(lo) > peak - LOG_RANGE {
        lo -= 0.5;
    }
    let mut hi = t_peak;
    while log_mag(hi) > peak - LOG_RANGE {
        hi += 0.5;
    }

    let k0 = (lo / h).floor() as i64;
    let k1 = (hi / h).ceil() as i64;
    let mut acc = ComplexSum::new();
    for k in k0..=k1 {
        let t = k as f64 * h;
        let (sh, ch) = (t.sinh(), t.cosh());
        let re = -y * (ch * ca - 1.0) - a * t + b * alpha;
        let im = -y * sh * sa - b * t - a * alpha;
        acc.add(C64::from_polar(re.exp(), im));
    }
    // dw = dt along the shifted line
    acc.value() * (0.5 * h)
}

/// Closed form `√π / 2^{s+1/2} · Γ(s+s_φ) Γ(s−s_φ+1) / Γ(s+1)`.
pub fn bessel_moment(s: C64, s_phi: C64) -> Result<C64, SpecialError> {
    let log = 0.5 * PI.ln() - (s + 0.5) * LN_2 + log_gamma(s + s_phi)?
        + log_gamma(s - s_phi + 1.0)?
        - log_gamma(s + 1.0)?;
    Ok(log.exp())
}

/// `∫₀^∞ e^{-y} K_{s_φ−1/2}(y) y^{s−1/2} dy` by direct quadrature.
pub fn bessel_moment_quadrature(
    s: C64,
    s_phi: C64,
    spec: &QuadratureSpec,
) -> Result<C64, SpecialError> {
    bessel_moment_estimate(s, s_phi, spec).map(|e| e.value)
}

/// [`bessel_moment_quadrature`] with the quadrature error estimate.
///
/// The moment decays like `e^{-π|Im ν|}`, so `spec.abs_tol` is measured in
/// units of that factor rather than absolutely.
pub fn bessel_moment_estimate(
    s: C64,
    s_phi: C64,
    spec: &QuadratureSpec,
) -> Result<QuadEstimate, SpecialError> {
    let nu = s_phi - 0.5;
    if nu.im.abs() > MAX_IMAG_ORDER {
        return Err(SpecialError::Range(nu));
    }
    if s.re + 0.5 <= nu.re.abs() {
        return Err(SpecialError::Domain(format!(
            "Bessel moment diverges at the origin for s = {s}, s_phi = {s_phi}"
        )));
    }
    let failure = Cell::new(None);
    let power = s - 0.5;
    let integrand = |y: f64| {
        if y <= 0.0 || !y.is_finite() {
            return C64::new(0.0, 0.0);
        }
        match bessel_k_scaled(nu, y) {
            Ok(k) => k * (power * y.ln() - 2.0 * y).exp(),
            Err(e) => {
                failure.set(Some(e));
                C64::new(0.0, 0.0)
            }
        }
    };
    let scaled = spec.with_tolerances(spec.abs_tol * (-PI * nu.im.abs()).exp(), spec.rel_tol);
    let est = integrate(integrand, Domain::SemiInfinite(0.0), &scaled)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(est)
}
