//! Numerical verification toolkit for Hecke eigensystems, Rankin–Selberg
//! factorizations, the Phillips–Sarnak integral, weight-2 Eisenstein series,
//! Kato perturbation sandboxes and Selberg trace-formula kernels.

pub mod arith;
pub mod forms;
pub mod hecke;
pub mod kato;
pub mod lfunc;
pub mod numeric;
pub mod psint;
pub mod special;
pub mod spectral;
