//! Finite-dimensional model of Kato's perturbation theory for
//! `T(ε) = T + εT₁ + ε²T₂` with real symmetric `T, T₁, T₂`.
//!
//! For matrices the region of boundedness and the region of strong
//! convergence both reduce to the resolvent set, and every eigenvalue is
//! stable. What remains checkable is the quantitative content: the total
//! projection `P(ε) = −(1/2πi)∮ R_ε(ζ)dζ` around an isolated cluster, the
//! expansion `μ(ε) = λ + εμ⁽¹⁾ + O(ε²)` with `μ⁽¹⁾` the eigenvalues of `PT₁P`
//! on `range P`, the reduced resolvent `S_λ` with `(T−λ)S_λ = 1−P`,
//! `S_λP = 0`, and the first-order projection identity
//! `(T−λ)P′(0) = −(1−P)(T₁−μ⁽¹⁾)P`.

use crate::numeric::{loglog_slope, C64};
use nalgebra::{DMatrix, Dyn, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Entrywise tolerance for self-adjointness.
pub const SYMMETRY_TOL: f64 = 1e-14;

/// Idempotency residual accepted from a contour projection.
pub const IDEMPOTENCY_TOL: f64 = 1e-10;

/// Singular values above this count towards the rank of a projection.
pub const RANK_TOL: f64 = 1e-6;

const MAX_CONTOUR_POINTS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KatoError {
    #[error("{0} is (numerically) in the spectrum")]
    SpectralPoint(C64),
    #[error("matrix is not self-adjoint: asymmetry {0:e}")]
    NotSelfAdjoint(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("contour does not separate the spectrum: idempotency residual {0:e}")]
    NonSeparating(f64),
    #[error("{0} is not an isolated eigenvalue inside the window")]
    NotIsolated(f64),
    #[error("epsilon {eps} exceeds gap/(4|T1|) = {limit}")]
    GapViolation { eps: f64, limit: f64 },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `T + εT₁ + ε²T₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    t: DMatrix<f64>,
    t1: DMatrix<f64>,
    t2: DMatrix<f64>,
}

impl OperatorFamily {
    pub fn new(t: DMatrix<f64>, t1: DMatrix<f64>, t2: DMatrix<f64>) -> Result<Self, KatoError> {
        let d = t.nrows();
        for (name, m) in [("T", &t), ("T1", &t1), ("T2", &t2)] {
            if m.nrows() != d || m.ncols() != d {
                return Err(KatoError::Dimension(format!(
                    "{name} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let a = asymmetry(m);
            if a > SYMMETRY_TOL {
                return Err(KatoError::NotSelfAdjoint(a));
            }
        }
        Ok(Self { t, t1, t2 })
    }

    pub fn dimension(&self) -> usize {
        self.t.nrows()
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn t1(&self) -> &DMatrix<f64> {
        &self.t1
    }

    pub fn t2(&self) -> &DMatrix<f64> {
        &self.t2
    }

    pub fn member(&self, eps: f64) -> DMatrix<f64> {
        &self.t + &self.t1 * eps + &self.t2 * (eps * eps)
    }

    pub fn to_record(&self) -> FamilyRecord {
        FamilyRecord {
            dimension: self.dimension(),
            t: rows(&self.t),
            t1: rows(&self.t1),
            t2: rows(&self.t2),
        }
    }

    pub fn from_record(r: &FamilyRecord) -> Result<Self, KatoError> {
        let m = |name: &str, v: &[Vec<f64>]| -> Result<DMatrix<f64>, KatoError> {
            if v.len() != r.dimension || v.iter().any(|row| row.len() != r.dimension) {
                return Err(KatoError::Dimension(format!("{name} is not {0}x{0}", r.dimension)));
            }
            Ok(DMatrix::from_fn(r.dimension, r.dimension, |i, j| v[i][j]))
        };
        Self::new(m("t", &r.t)?, m("t1", &r.t1)?, m("t2", &r.t2)?)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Row-major JSON form of an [`OperatorFamily`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub dimension: usize,
    pub t: Vec<Vec<f64>>,
    pub t1: Vec<Vec<f64>>,
    pub t2: Vec<Vec<f64>>,
}

/// Circle `|ζ − center| = radius` discretized with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub center: f64,
    pub radius: f64,
    pub points: usize,
}

impl SpectralWindow {
    pub fn new(center: f64, radius: f64) -> Result<Self, KatoError> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(KatoError::InvalidWindow(format!("center {center}, radius {radius}")));
        }
        Ok(Self {
            center,
            radius,
            points: 64,
        })
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points.max(4);
        self
    }

    fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}

/// `(M − ζ)⁻¹`.
pub fn resolvent(m: &DMatrix<f64>, zeta: C64) -> Result<DMatrix<C64>, KatoError> {
    let d = m.nrows();
    let shifted = complexify(m) - DMatrix::<C64>::identity(d, d) * zeta;
    let scale = shifted.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let inv = shifted.clone().lu().try_inverse().ok_or(KatoError::SpectralPoint(zeta))?;
    let size = inv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !size.is_finite() || size * scale > 1e15 {
        return Err(KatoError::SpectralPoint(zeta));
    }
    Ok(inv)
}

/// `(‖R(ζ)‖, 1/dist(ζ, spec M))` for symmetric `M`; equal up to rounding.
pub fn resolvent_norm_check(m: &DMatrix<f64>, zeta: C64) -> Result<(f64, f64), KatoError> {
    let r = resolvent(m, zeta)?;
    let eig = symmetric_eigen(m).eigenvalues;
    let dist = eig.iter().map(|&x| (C64::new(x, 0.0) - zeta).norm()).fold(f64::INFINITY, f64::min);
    Ok((spectral_norm(&r), 1.0 / dist))
}

fn trapezoid_projection(m: &DMatrix<f64>, win: &SpectralWindow, n: usize) -> Result<DMatrix<C64>, KatoError> {
    let d = m.nrows();
    let mut acc = DMatrix::<C64>::zeros(d, d);
    // −(1/2πi)∮R dζ with ζ = λ + δe^{iθ}: −(δ/n) Σ R(ζ_k) e^{iθ_k}
    for k in 0..n {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        let r = resolvent(m, win.center + e * win.radius)?;
        acc += r * e;
    }
    Ok(acc * C64::new(-win.radius / n as f64, 0.0))
}

/// A contour projection with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourProjection {
    pub matrix: DMatrix<f64>,
    pub points: usize,
    /// `‖P² − P‖_F`.
    pub idempotency: f64,
    /// `max |P_ij − P_ji|`.
    pub asymmetry: f64,
    pub trace: f64,
    pub rank: usize,
}

/// `P_ε` around the window, doubling the node count until successive
/// estimates agree to rounding.
pub fn contour_projection(
    fam: &OperatorFamily,
    eps: f64,
    win: &SpectralWindow,
) -> Result<ContourProjection, KatoError> {
    projection_of(&fam.member(eps), win)
}

/// [`contour_projection`] for a single matrix.
pub fn projection_of(m: &DMatrix<f64>, win: &SpectralWindow) -> Result<ContourProjection, KatoError> {
    let mut n = win.points.max(4);
    let mut p = trapezoid_projection(m, win, n)?;
    while n < MAX_CONTOUR_POINTS {
        let next = trapezoid_projection(m, win, 2 * n)?;
        let change = (&next - &p).norm();
        p = next;
        n *= 2;
        if change <= 1e-13 * (1.0 + p.norm()) {
            break;
        }
    }
    let real = p.map(|z| z.re);
    let idempotency = (&real * &real - &real).norm();
    if idempotency > IDEMPOTENCY_TOL {
        return Err(KatoError::NonSeparating(idempotency));
    }
    let rank = real.clone().singular_values().iter().filter(|&&s| s > RANK_TOL).count();
    Ok(ContourProjection {
        trace: real.trace(),
        asymmetry: asymmetry(&real),
        idempotency,
        rank,
        points: n,
        matrix: real,
    })
}

/// Largest number of cyclic Jacobi sweeps in [`symmetric_eigen`].
const JACOBI_SWEEPS: usize = 30;

/// Eigen-decomposition of a symmetric matrix, polished by cyclic Jacobi
/// rotations on `VᵀMV`.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, Dyn> {
    let first = SymmetricEigen::new(m.clone());
    let mut v = first.eigenvectors;
    let mut a = v.transpose() * m * &v;
    let d = a.nrows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    let eigenvalues = nalgebra::DVector::from_fn(d, |i, _| a[(i, i)]);
    SymmetricEigen { eigenvectors: v, eigenvalues }
}

/// `A ← JᵀAJ`, `V ← VJ` for the rotation in the `(p, q)` plane.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let d = a.nrows();
    for k in 0..d {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..d {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..d {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Eigenpairs of `T` split into the cluster inside the window and the rest.
struct Split {
    inside: Vec<(f64, nalgebra::DVector<f64>)>,
    outside: Vec<(f64, nalgebra::DVector<f64>)>,
}

fn split(t: &DMatrix<f64>, win: &SpectralWindow) -> Split {
    let eig = symmetric_eigen(t);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (i, &mu) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i).into_owned();
        if win.contains(mu) {
            inside.push((mu, v));
        } else {
            outside.push((mu, v));
        }
    }
    inside.sort_by(|a, b| a.0.total_cmp(&b.0));
    Split { inside, outside }
}

/// `Σ v vᵀ` over the eigenvectors of `m` with eigenvalue inside the window.
pub fn eigen_projection(m: &DMatrix<f64>, win: &SpectralWindow) -> DMatrix<f64> {
    let d = m.nrows();
    split(m, win)
        .inside
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, (_, v)| acc + v * v.transpose())
}

/// `S_λ = Σ_{μ≠λ} v_μ v_μᵀ/(μ−λ)`, the inverse of `T − λ` on `range(1−P)`.
pub fn reduced_resolvent(t: &DMatrix<f64>, lambda: f64, win: &SpectralWindow) -> Result<DMatrix<f64>, KatoError> {
    let sp = split(t, win);
    let scale = t.norm().max(1.0);
    if sp.inside.is_empty() || sp.inside.iter().any(|(mu, _)| (mu - lambda).abs() > 1e-9 * scale) {
        return Err(KatoError::NotIsolated(lambda));
    }
    let d = t.nrows();
    let mut s = DMatrix::<f64>::zeros(d, d);
    for (mu, v) in &sp.outside {
        s += v * v.transpose() / (mu - lambda);
    }
    Ok(s)
}

/// Gap between the cluster inside the window and the rest of `spec T`.
fn cluster_gap(sp: &Split) -> f64 {
    let mut gap = f64::INFINITY;
    for (a, _) in &sp.inside {
        for (b, _) in &sp.outside {
            gap = gap.min((a - b).abs());
        }
    }
    gap
}

/// Outcome of [`expansion_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Eigenvalues of `PT₁P` on `range P`, ascending.
    pub mu1: Vec<f64>,
    /// Largest gap between `mu1` and the Richardson-extrapolated slopes
    /// `dμ_j/dε(0)` of the perturbed eigenvalues.
    pub mu1_discrepancy: f64,
    pub eps_grid: Vec<f64>,
    /// `max_j |μ_j(ε) − λ − εμ⁽¹⁾_j|` over the grid.
    pub eigen_residuals: Vec<f64>,
    pub eigen_slope: f64,
    /// `‖(T−λ)P′(0) + (1−P)(T₁−μ⁽¹⁾)P‖_F` with `P′(0)` by Richardson-extrapolated
    /// central differences.
    pub projection_identity_residual: f64,
    /// The same residual with forward differences `(P(ε)−P(0))/ε`.
    pub forward_residuals: Vec<f64>,
    pub forward_slope: f64,
    /// Largest idempotency residual among the projections formed.
    pub max_idempotency: f64,
}

fn check_grid(fam: &OperatorFamily, gap: f64, eps_grid: &[f64]) -> Result<(), KatoError> {
    let norm_t1 = complexify(fam.t1()).singular_values().max();
    let limit = if norm_t1 == 0.0 { f64::INFINITY } else { gap / (4.0 * norm_t1) };
    for &eps in eps_grid {
        if !(eps > 0.0 && eps <= limit) {
            return Err(KatoError::GapViolation { eps, limit });
        }
    }
    Ok(())
}

fn cluster_eigenvalues(m: &DMatrix<f64>, win: &SpectralWindow, count: usize) -> Result<Vec<f64>, KatoError> {
    let mut ev: Vec<f64> = symmetric_eigen(m)
        .eigenvalues
        .iter()
        .copied()
        .filter(|&x| win.contains(x))
        .collect();
    if ev.len() != count {
        return Err(KatoError::NonSeparating(f64::NAN));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of the cluster aligned with `mu1`: the k-th smallest eigenvalue
/// is paired with the k-th smallest prediction `λ + εμ⁽¹⁾_j`.
fn aligned(ev: Vec<f64>, lambda: f64, eps: f64, mu1: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..mu1.len()).collect();
    order.sort_by(|&a, &b| (lambda + eps * mu1[a]).total_cmp(&(lambda + eps * mu1[b])));
    let mut out = vec![0.0; mu1.len()];
    for (k, &j) in order.iter().enumerate() {
        out[j] = ev[k];
    }
    out
}

/// Checks the first-order eigenvalue and projection expansions of the
/// cluster at `win.center` over `eps_grid`.
pub fn expansion_check(
    fam: &OperatorFamily,
    win: &SpectralWindow,
    eps_grid: &[f64],
) -> Result<ExpansionReport, KatoError> {
    if eps_grid.len() < 2 {
        return Err(KatoError::InvalidWindow("need at least two grid points".into()));
    }
    let t = fam.t();
    let lambda = win.center;
    let sp = split(t, win);
    let scale = t.norm().max(1.0);
    if sp.inside.is_empty() || sp.inside.iter().any(|(mu, _)| (mu - lambda).abs() > 1e-9 * scale) {
        return Err(KatoError::NotIsolated(lambda));
    }
    let gap = cluster_gap(&sp);
    check_grid(fam, gap, eps_grid)?;
    let m = sp.inside.len();
    let d = fam.dimension();

    // (a) μ⁽¹⁾ from the compression of T₁ to range P
    let basis = DMatrix::from_columns(&sp.inside.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>());
    let compressed = basis.transpose() * fam.t1() * &basis;
    let mut mu1: Vec<f64> = symmetric_eigen(&compressed).eigenvalues.iter().copied().collect();
    mu1.sort_by(f64::total_cmp);

    // (b) eigenvalue residuals
    let mut eigen_residuals = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let ev = aligned(cluster_eigenvalues(&fam.member(eps), win, m)?, lambda, eps, &mu1);
        let r = ev
            .iter()
            .zip(&mu1)
            .map(|(mu, m1)| (mu - lambda - eps * m1).abs())
            .fold(0.0, f64::max);
        eigen_residuals.push(r);
    }
    let eigen_slope = loglog_slope(eps_grid, &eigen_residuals);

    let h = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let slope_at = |h: f64| -> Result<Vec<f64>, KatoError> {
        let up = aligned(cluster_eigenvalues(&fam.member(h), win, m)?, lambda, h, &mu1);
        let down = aligned(cluster_eigenvalues(&fam.member(-h), win, m)?, lambda, -h, &mu1);
        Ok(up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let (d1, d2) = (slope_at(h)?, slope_at(h / 2.0)?);
    let mu1_discrepancy = d1
        .iter()
        .zip(&d2)
        .zip(&mu1)
        .map(|((a, b), m1)| ((4.0 * b - a) / 3.0 - m1).abs())
        .fold(0.0, f64::max);

    // (c) first-order projection identity
    let p0 = contour_projection(fam, 0.0, win)?;
    let mut max_idempotency = p0.idempotency;
    let p = &p0.matrix;
    let id = DMatrix::<f64>::identity(d, d);
    let shifted = t - &id * lambda;
    let rhs = -((&id - p) * fam.t1() * p);
    let mut proj = |eps: f64| -> Result<DMatrix<f64>, KatoError> {
        let c = contour_projection(fam, eps, win)?;
        max_idempotency = max_idempotency.max(c.idempotency);
        Ok(c.matrix)
    };
    let central = |h: f64, proj: &mut dyn FnMut(f64) -> Result<DMatrix<f64>, KatoError>| {
        Ok::<_, KatoError>((proj(h)? - proj(-h)?) / (2.0 * h))
    };
    let dh = central(h, &mut proj)?;
    let dh2 = central(h / 2.0, &mut proj)?;
    let dp = (dh2 * 4.0 - dh) / 3.0;
    let projection_identity_residual = (&shifted * dp - &rhs).norm();

    let mut forward_residuals = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let fd = (proj(eps)? - p) / eps;
        forward_residuals.push((&shifted * fd - &rhs).norm());
    }
    let forward_slope = loglog_slope(eps_grid, &forward_residuals);

    Ok(ExpansionReport {
        lambda,
        multiplicity: m,
        mu1,
        mu1_discrepancy,
        eps_grid: eps_grid.to_vec(),
        eigen_residuals,
        eigen_slope,
        projection_identity_residual,
        forward_residuals,
        forward_slope,
        max_idempotency,
    })
}

/// `‖R_ε(ζ) − R₀(ζ)‖` along `eps_grid`, and whether it decreases with `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongConvergenceProbe {
    pub eps_grid: Vec<f64>,
    pub differences: Vec<f64>,
    pub monotone: bool,
}

pub fn strong_convergence_probe(
    fam: &OperatorFamily,
    zeta: C64,
    eps_grid: &[f64],
) -> Result<StrongConvergenceProbe, KatoError> {
    let r0 = resolvent(fam.t(), zeta)?;
    let mut pairs: Vec<(f64, f64)> = eps_grid
        .iter()
        .map(|&eps| Ok((eps, spectral_norm(&(resolvent(&fam.member(eps), zeta)? - &r0)))))
        .collect::<Result<_, KatoError>>()?;
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = pairs.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok(StrongConvergenceProbe {
        eps_grid: pairs.iter().map(|p| p.0).collect(),
        differences: pairs.iter().map(|p| p.1).collect(),
        monotone,
    })
}

/// Random family whose `T` has eigenvalue `0` of the given multiplicity, the
/// rest of the spectrum in `±[1, 5]`, and `‖T₁‖ = ‖T₂‖ = 1`. The returned
/// window is centred at 0 with radius ½.
pub fn random_family<R: Rng>(rng: &mut R, dim: usize, multiplicity: usize) -> (OperatorFamily, SpectralWindow) {
    assert!(dim >= 2 && multiplicity >= 1 && multiplicity < dim);
    let q = random_orthogonal(rng, dim);
    let eig: Vec<f64> = (0..dim)
        .map(|i| {
            if i < multiplicity {
                0.0
            } else {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                sign * rng.gen_range(1.0..5.0)
            }
        })
        .collect();
    let t = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig)) * q.transpose();
    let t = symmetrize(&t);
    let t1 = unit_symmetric(rng, dim);
    let t2 = unit_symmetric(rng, dim);
    let fam = OperatorFamily::new(t, t1, t2).expect("symmetric by construction");
    (fam, SpectralWindow::new(0.0, 0.5).expect("valid window"))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn unit_symmetric<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let s = symmetrize(&raw);
    let norm = SymmetricEigen::new(s.clone()).eigenvalues.abs().max();
    symmetrize(&(s / norm))
}

fn random_orthogonal<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    raw.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    fn zero(d: usize) -> DMatrix<f64> {
        DMatrix::zeros(d, d)
    }

    fn two_by_two() -> OperatorFamily {
        let t1 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        OperatorFamily::new(diag(&[0.0, 1.0]), t1, zero(2)).unwrap()
    }

    #[test]
    fn resolvent_of_diagonal() {
        let r = resolvent(&diag(&[0.0, 1.0]), C64::new(0.5, 0.0)).unwrap();
        assert!((r[(0, 0)] - C64::new(-2.0, 0.0)).norm() < 1e-15);
        assert!((r[(1, 1)] - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(r[(0, 1)].norm() == 0.0);
        assert!(matches!(
            resolvent(&diag(&[0.0, 1.0]), C64::new(1.0, 0.0)),
            Err(KatoError::SpectralPoint(_))
        ));
    }

    #[test]
    fn resolvent_norm_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (fam, _) = random_family(&mut rng, 6, 1);
            let zeta = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..1.0));
            let (norm, bound) = resolvent_norm_check(fam.t(), zeta).unwrap();
            assert!((norm - bound).abs() <= 1e-10 * bound);
        }
    }

    #[test]
    fn projection_of_diagonal() {
        let fam = OperatorFamily::new(diag(&[0.0, 1.0]), zero(2), zero(2)).unwrap();
        let p = contour_projection(&fam, 0.0, &SpectralWindow::new(0.0, 0.3).unwrap()).unwrap();
        assert!((p.matrix - diag(&[1.0, 0.0])).norm() < 1e-14);
        assert_eq!(p.rank, 1);
    }

    #[test]
    fn projection_matches_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (fam, win) = random_family(&mut rng, 6, 1);
        let p = contour_projection(&fam, 0.0, &win).unwrap();
        let eig = SymmetricEigen::new(fam.t().clone());
        let i = eig.eigenvalues.iamin();
        let v = eig.eigenvectors.column(i);
        assert!((p.matrix - v * v.transpose()).norm() < 1e-8);
        assert!(p.asymmetry < 1e-10 && (p.trace - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rank_does_not_grow() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (fam, win) = random_family(&mut rng, 7, 2);
        let r0 = contour_projection(&fam, 0.0, &win).unwrap().rank;
        for eps in [1e-3, 1e-2, 5e-2] {
            assert!(contour_projection(&fam, eps, &win).unwrap().rank <= r0);
        }
    }

    #[test]
    fn non_separating_contour_is_detected() {
        let fam = OperatorFamily::new(diag(&[0.0, 0.3]), zero(2), zero(2)).unwrap();
        let r = contour_projection(&fam, 0.0, &SpectralWindow::new(0.0, 0.3).unwrap());
        assert!(r.is_err());
    }

    #[test]
    fn reduced_resolvent_of_diagonal() {
        let win = SpectralWindow::new(0.0, 0.5).unwrap();
        let s = reduced_resolvent(&diag(&[0.0, 1.0]), 0.0, &win).unwrap();
        assert!((s - diag(&[0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn reduced_resolvent_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (fam, win) = random_family(&mut rng, 8, 1);
        let s = reduced_resolvent(fam.t(), 0.0, &win).unwrap();
        let p = contour_projection(&fam, 0.0, &win).unwrap().matrix;
        let id = DMatrix::<f64>::identity(8, 8);
        assert!((fam.t() * &s - (&id - &p)).norm() < 1e-12);
        assert!((&s * &p).norm() < 1e-12);
        let eig = SymmetricEigen::new(fam.t().clone());
        let v = eig.eigenvectors.column(eig.eigenvalues.iamin()).into_owned();
        assert!((&s * v).norm() < 1e-12);
    }

    #[test]
    fn reduced_resolvent_rejects_clusters() {
        let win = SpectralWindow::new(0.0, 0.5).unwrap();
        assert!(matches!(
            reduced_resolvent(&diag(&[0.0, 0.1, 2.0]), 0.0, &win),
            Err(KatoError::NotIsolated(_))
        ));
    }

    #[test]
    fn polished_eigenvectors_for_close_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_501);
        rng.set_stream(8);
        let mut worst = 0.0f64;
        for _ in 0..60 {
            let (fam, _) = random_family(&mut rng, 3, 2);
            let m = fam.member(0.01);
            let eig = symmetric_eigen(&m);
            for (i, &mu) in eig.eigenvalues.iter().enumerate() {
                let v = eig.eigenvectors.column(i);
                worst = worst.max((&m * v - v * mu).norm());
            }
        }
        assert!(worst < 1e-14, "{worst:e}");
    }

    #[test]
    fn two_by_two_expansion() {
        let fam = two_by_two();
        let win = SpectralWindow::new(0.0, 0.5).unwrap();
        let grid = log_grid(1e-1, 1e-3, 7);
        let rep = expansion_check(&fam, &win, &grid).unwrap();
        assert_eq!(rep.mu1.len(), 1);
        assert!(rep.mu1[0].abs() < 1e-15);
        assert!((rep.eigen_slope - 2.0).abs() < 0.02, "{}", rep.eigen_slope);
        for (eps, r) in grid.iter().zip(&rep.eigen_residuals) {
            let exact = ((1.0 - (1.0 + 4.0 * eps * eps).sqrt()) / 2.0).abs();
            assert!((r - exact).abs() < 1e-14);
        }
        assert!(rep.projection_identity_residual < 1e-8);
    }

    #[test]
    fn two_by_two_projection_derivative() {
        let fam = two_by_two();
        let win = SpectralWindow::new(0.0, 0.5).unwrap();
        let h = 1e-4;
        let up = contour_projection(&fam, h, &win).unwrap().matrix;
        let down = contour_projection(&fam, -h, &win).unwrap().matrix;
        let lhs = diag(&[0.0, 1.0]) * ((up - down) / (2.0 * h));
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -1.0, 0.0]);
        assert!((lhs - expected).norm() < 1e-7);
    }

    #[test]
    fn degenerate_eigenvalue_splits() {
        let t = diag(&[0.0, 0.0, 2.0]);
        let t1 = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0]);
        let fam = OperatorFamily::new(t, t1, zero(3)).unwrap();
        let win = SpectralWindow::new(0.0, 0.5).unwrap();
        let rep = expansion_check(&fam, &win, &log_grid(1e-1, 1e-3, 5)).unwrap();
        assert_eq!(rep.multiplicity, 2);
        assert!((rep.mu1[0] + 1.0).abs() < 1e-12 && (rep.mu1[1] - 1.0).abs() < 1e-12);
        assert!(rep.mu1_discrepancy < 1e-8);
    }

    #[test]
    fn gap_violation_rejected() {
        let fam = two_by_two();
        let win = SpectralWindow::new(0.0, 0.5).unwrap();
        assert!(matches!(
            expansion_check(&fam, &win, &[0.5, 0.1]),
            Err(KatoError::GapViolation { .. })
        ));
    }

    #[test]
    fn strong_convergence_trend() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (fam, _) = random_family(&mut rng, 5, 1);
        let probe = strong_convergence_probe(&fam, C64::new(0.3, 0.4), &log_grid(1e-1, 1e-4, 8)).unwrap();
        assert!(probe.monotone);
        assert!(probe.differences[0] < 1e-3);
    }

    #[test]
    fn family_record_round_trip() {
        let fam = two_by_two();
        let json = serde_json::to_string(&fam.to_record()).unwrap();
        let back: FamilyRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(OperatorFamily::from_record(&back).unwrap(), fam);
        let mut bad = back.clone();
        bad.t1[0][1] = 2.0;
        assert!(matches!(OperatorFamily::from_record(&bad), Err(KatoError::NotSelfAdjoint(_))));
    }
}
