//! Complex special functions and numerical integration.

mod bessel;
mod gamma;
pub mod quadrature;

pub use bessel::{bessel_k, bessel_k_scaled, bessel_moment, bessel_moment_estimate, bessel_moment_quadrature, MAX_IMAG_ORDER};
pub use gamma::{digamma, gamma, legendre_duplication_residual, log_gamma};
pub use quadrature::{integrate, Domain, QuadEstimate, QuadratureError, QuadratureSpec, Scheme};

use crate::numeric::C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("pole of the gamma function at {0}")]
    Pole(C64),
    #[error("order {0} outside the supported band |Im nu| <= 50")]
    Range(C64),
    #[error("non-finite argument {0}")]
    NonFinite(C64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}
