//! Complex log-gamma, gamma and digamma.

use super::SpecialError;
use crate::numeric::C64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

fn is_pole(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor()
}

fn check(z: C64) -> Result<(), SpecialError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecialError::NonFinite(z));
    }
    if is_pole(z) {
        return Err(SpecialError::Pole(z));
    }
    Ok(())
}

/// Lanczos approximation, valid for `Re z >= 1/2`.
fn lanczos_ln_gamma(z: C64) -> C64 {
    let zm = z - 1.0;
    let mut acc = C64::new(LANCZOS_COEFFS[0], 0.0);
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (zm + k as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    (zm + 0.5) * t.ln() - t + LN_SQRT_2PI + acc.ln()
}

/// `log(sin(πz))` continued analytically through the upper half-plane.
fn ln_sin_pi_upper(z: C64) -> C64 {
    // sin(πz) = e^{-iπz}(1 - e^{2πiz}) / (2i)
    let i = C64::i();
    let w = (2.0 * PI * i * z).exp();
    C64::new(-std::f64::consts::LN_2, PI / 2.0) - i * PI * z + (C64::new(1.0, 0.0) - w).ln()
}

/// Principal branch of `log Γ(z)`: continuous on ℂ minus the negative real
/// axis, with `conj(lnΓ(z)) = lnΓ(conj z)`. On the negative real axis the
/// limit from the upper half-plane is returned.
pub fn log_gamma(z: C64) -> Result<C64, SpecialError> {
    check(z)?;
    Ok(log_gamma_unchecked(z))
}

fn log_gamma_unchecked(z: C64) -> C64 {
    if z.im < 0.0 {
        return log_gamma_unchecked(z.conj()).conj();
    }
    if z.re >= 0.5 {
        return lanczos_ln_gamma(z);
    }
    // reflection: Γ(z)Γ(1-z) = π / sin(πz)
    LN_PI - ln_sin_pi_upper(z) - lanczos_ln_gamma(C64::new(1.0, 0.0) - z)
}

pub fn gamma(z: C64) -> Result<C64, SpecialError> {
    log_gamma(z).map(|l| l.exp())
}

/// `ψ(z) = Γ'(z)/Γ(z)`.
pub fn digamma(z: C64) -> Result<C64, SpecialError> {
    check(z)?;
    Ok(digamma_unchecked(z))
}

fn digamma_unchecked(z: C64) -> C64 {
    if z.re < 0.5 {
        // ψ(1-z) - ψ(z) = π cot(πz)
        let pz = PI * z;
        return digamma_unchecked(C64::new(1.0, 0.0) - z) - PI * pz.cos() / pz.sin();
    }
    let mut shift = C64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 12.0 {
        shift -= w.inv();
        w += 1.0;
    }
    // ψ(w) ~ ln w - 1/(2w) - Σ B_{2k}/(2k w^{2k})
    const B: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let w2 = (w * w).inv();
    let mut pow = w2;
    let mut series = C64::new(0.0, 0.0);
    for (k, b) in B.iter().enumerate() {
        series += pow * (b / (2.0 * (k + 1) as f64));
        pow *= w2;
    }
    shift + w.ln() - 0.5 * w.inv() - series
}

/// `|Γ(z)Γ(z+1/2) − 2^{1−2z}√π Γ(2z)| / |Γ(2z)|`.
pub fn legendre_duplication_residual(z: C64) -> Result<f64, SpecialError> {
    let lhs = log_gamma(z)? + log_gamma(z + 0.5)?;
    let l2z = log_gamma(2.0 * z)?;
    let rhs = (C64::new(1.0, 0.0) - 2.0 * z) * std::f64::consts::LN_2 + 0.5 * LN_PI;
    Ok(((lhs - l2z).exp() - rhs.exp()).norm())
}
