//! Weight-2 Eisenstein series `E₂`, `G_q(z) = E₂(z) − qE₂(qz)` and
//! `G_{q₁,q₂}(z) = G_{q₁}(z) − G_{q₁}(q₂z)`; evaluation of Maass forms from
//! Fourier data; the Gauss-sum twist average.

use crate::arith::{gauss_sum, shared_sigma1_table, ArithError, DirichletCharacter};
use crate::hecke::HeckeEigenSystem;
use crate::numeric::{root_of_unity, ComplexSum, C64};
use crate::special::{bessel_k, SpecialError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

/// Smallest imaginary part at which expansions are evaluated.
pub const MIN_IMAG: f64 = 0.2;

/// Target for the truncation error of q-expansion evaluations.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Largest truncation the adaptive rule may choose.
pub const MAX_TERMS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("Im z = {0} is below the supported minimum 0.2")]
    ImagTooSmall(f64),
    #[error("{needed} terms needed for the requested accuracy but only {available} are available")]
    InsufficientTerms { needed: usize, available: usize },
    #[error("matrix is not in SL2(Z): {0:?}")]
    NotInSl2z([[i64; 2]; 2]),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `f(z) = Σ_{n≥0} b_n e^{2πinz}` of weight 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicQExpansion {
    #[serde(with = "pairs")]
    coefficients: Vec<C64>,
    weight: u32,
    level: u64,
    /// `B` with `|b_n| ≤ B·σ₁(n)` for all `n ≥ 1`.
    sigma_bound: f64,
}

mod pairs {
    use crate::numeric::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl HolomorphicQExpansion {
    /// `Σ_d t_d E₂(dz)` truncated at `N`.
    pub fn from_e2_combination(terms: &[(u64, f64)], level: u64, n: usize) -> Self {
        let sig = shared_sigma1_table(n);
        let mut b = vec![C64::new(0.0, 0.0); n + 1];
        for &(d, t) in terms {
            b[0] += t;
            let d = d as usize;
            let mut m = 1;
            while m * d <= n {
                b[m * d] += -24.0 * t * sig[m] as f64;
                m += 1;
            }
        }
        // d·σ₁(m) ≤ σ₁(dm)
        let sigma_bound = 24.0 * terms.iter().map(|&(d, t)| t.abs() / d as f64).sum::<f64>();
        Self {
            coefficients: b,
            weight: 2,
            level,
            sigma_bound,
        }
    }

    pub fn from_coefficients(coefficients: Vec<C64>, level: u64, sigma_bound: f64) -> Self {
        Self {
            coefficients,
            weight: 2,
            level,
            sigma_bound,
        }
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: usize) -> C64 {
        self.coefficients[n]
    }

    /// Largest index stored.
    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn sigma_bound(&self) -> f64 {
        self.sigma_bound
    }

    /// Membership test for forms cuspidal at infinity.
    pub fn is_cuspidal_at_infinity(&self) -> bool {
        self.coefficients[0] == C64::new(0.0, 0.0)
    }

    /// `c·f` coefficientwise.
    pub fn scaled(&self, c: C64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|b| b * c).collect(),
            sigma_bound: self.sigma_bound * c.norm(),
            ..self.clone()
        }
    }

    /// Bound on `Σ_{n>N} |b_n| e^{−2πny}`, using `σ₁(n) ≤ n²`.
    pub fn tail_bound(&self, y: f64, n: usize) -> f64 {
        self.sigma_bound * square_geometric_tail(y, n)
    }

    /// `f(z)` with the truncation chosen so that the tail is below `1e−12`.
    pub fn eval(&self, z: C64) -> Result<C64, FormsError> {
        if z.im < MIN_IMAG {
            return Err(FormsError::ImagTooSmall(z.im));
        }
        let needed = required_terms(self.sigma_bound, z.im, TRUNCATION_TOL);
        if needed > self.truncation() {
            return Err(FormsError::InsufficientTerms {
                needed,
                available: self.truncation(),
            });
        }
        Ok(self.eval_truncated(z, needed))
    }

    fn eval_truncated(&self, z: C64, n: usize) -> C64 {
        let q = (2.0 * PI * C64::i() * z).exp();
        // Horner from the top
        let mut acc = C64::new(0.0, 0.0);
        for b in self.coefficients[..=n].iter().rev() {
            acc = acc * q + b;
        }
        acc
    }
}

/// `Σ_{n>N} n² e^{−2πny}`.
fn square_geometric_tail(y: f64, n: usize) -> f64 {
    let r = (-2.0 * PI * y).exp();
    let n1 = (n + 1) as f64;
    let first = n1 * n1 * r.powf(n1);
    let ratio = ((n1 + 1.0) / n1).powi(2) * r;
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        first / (1.0 - ratio)
    }
}

/// Smallest `N` with `B·Σ_{n>N} n² e^{−2πny} ≤ tol`.
pub fn required_terms(sigma_bound: f64, y: f64, tol: f64) -> usize {
    let mut n = 1;
    while n < MAX_TERMS && sigma_bound * square_geometric_tail(y, n) > tol {
        n += 1 + n / 8;
    }
    n
}

/// `E₂(z) = 1 − 24 Σ σ₁(n) e^{2πinz}`.
pub fn e2_coefficients(n: usize) -> HolomorphicQExpansion {
    HolomorphicQExpansion::from_e2_combination(&[(1, 1.0)], 1, n)
}

/// `G_q(z) = E₂(z) − qE₂(qz)`.
pub fn g_q(q: u64, n: usize) -> Result<HolomorphicQExpansion, FormsError> {
    if q < 2 {
        return Err(FormsError::InvalidArgument(format!("G_q needs q >= 2, got {q}")));
    }
    Ok(HolomorphicQExpansion::from_e2_combination(&[(1, 1.0), (q, -(q as f64))], q, n))
}

/// Coefficients `t_d` of `G_{q₁,q₂} = Σ_d t_d E₂(dz)`.
pub fn g_q1q2_terms(q1: u64, q2: u64) -> Vec<(u64, f64)> {
    let mut t: BTreeMap<u64, f64> = BTreeMap::new();
    for (d, v) in [(1, 1.0), (q1, -(q1 as f64)), (q2, -1.0), (q1 * q2, q1 as f64)] {
        *t.entry(d).or_default() += v;
    }
    t.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

/// `G_{q₁,q₂}(z) = G_{q₁}(z) − G_{q₁}(q₂z)`, level `q₁q₂`.
pub fn g_q1q2(q1: u64, q2: u64, n: usize) -> Result<HolomorphicQExpansion, FormsError> {
    if q1 < 2 || q2 < 2 {
        return Err(FormsError::InvalidArgument(format!(
            "G_(q1,q2) needs q1, q2 >= 2, got ({q1}, {q2})"
        )));
    }
    Ok(HolomorphicQExpansion::from_e2_combination(&g_q1q2_terms(q1, q2), q1 * q2, n))
}

fn check_sl2z(m: [[i64; 2]; 2]) -> Result<(), FormsError> {
    let [[a, b], [c, d]] = m;
    if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
        return Err(FormsError::NotInSl2z(m));
    }
    Ok(())
}

/// `γz` for `γ ∈ SL₂(ℤ)`.
pub fn mobius(m: [[i64; 2]; 2], z: C64) -> C64 {
    let [[a, b], [c, d]] = m;
    (a as f64 * z + b as f64) / (c as f64 * z + d as f64)
}

/// `|E₂(γz) − (cz+d)²E₂(z) + (6i/π)c(cz+d)|`; `n` is a minimum truncation,
/// raised as needed for both `z` and `γz`.
pub fn quasimodular_residual(m: [[i64; 2]; 2], z: C64, n: usize) -> Result<f64, FormsError> {
    check_sl2z(m)?;
    let gz = mobius(m, z);
    let ymin = z.im.min(gz.im);
    if ymin < MIN_IMAG {
        return Err(FormsError::ImagTooSmall(ymin));
    }
    let e2 = e2_coefficients(n.max(required_terms(24.0, ymin, TRUNCATION_TOL)));
    let [[_, _], [c, d]] = m;
    let j = c as f64 * z + d as f64;
    let lhs = e2.eval(gz)?;
    let rhs = j * j * e2.eval(z)? - 6.0 * C64::i() / PI * c as f64 * j;
    Ok((lhs - rhs).norm())
}

/// `|G_q(γz) − (cz+d)²G_q(z)|` for `γ ∈ Γ₀(q)`.
pub fn g_q_modular_residual(q: u64, m: [[i64; 2]; 2], z: C64, n: usize) -> Result<f64, FormsError> {
    check_sl2z(m)?;
    if m[1][0].rem_euclid(q as i64) != 0 {
        return Err(FormsError::InvalidArgument(format!("{m:?} is not in Gamma_0({q})")));
    }
    let gz = mobius(m, z);
    let ymin = z.im.min(gz.im);
    if ymin < MIN_IMAG {
        return Err(FormsError::ImagTooSmall(ymin));
    }
    let g = g_q(q, n.max(required_terms(48.0, ymin, TRUNCATION_TOL)))?;
    let j = m[1][0] as f64 * z + m[1][1] as f64;
    Ok((g.eval(gz)? - j * j * g.eval(z)?).norm())
}

/// Fourier data `ρ(n)` for `0 < |n| ≤ N` with `ρ(−n) = ε ρ(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaassFourierData {
    coeffs: Vec<C64>,
    s_phi: C64,
    parity: i8,
}

/// JSON form `{s_phi, parity, coeffs: {n: [re, im]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaassRecord {
    pub s_phi: [f64; 2],
    pub parity: i8,
    pub coeffs: BTreeMap<i64, [f64; 2]>,
}

impl MaassFourierData {
    /// From `ρ(1..=N)`; negative indices follow from the parity.
    pub fn new(positive: Vec<C64>, s_phi: C64, parity: i8) -> Result<Self, FormsError> {
        if parity != 1 && parity != -1 {
            return Err(FormsError::InvalidArgument(format!("parity must be +-1, got {parity}")));
        }
        let mut coeffs = Vec::with_capacity(positive.len() + 1);
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.extend(positive);
        Ok(Self { coeffs, s_phi, parity })
    }

    /// `ρ(n) = λ(n)` for `n ≤ N`.
    pub fn from_system(sys: &HeckeEigenSystem, n: usize) -> Self {
        let table = sys.coefficients_upto(n);
        Self {
            coeffs: table[..=n].to_vec(),
            s_phi: sys.s_phi(),
            parity: sys.parity(),
        }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn s_phi(&self) -> C64 {
        self.s_phi
    }

    pub fn parity(&self) -> i8 {
        self.parity
    }

    /// `ρ(n)`; zero for `n = 0` and beyond the stored range.
    pub fn rho(&self, n: i64) -> C64 {
        let k = n.unsigned_abs() as usize;
        if k == 0 || k >= self.coeffs.len() {
            return C64::new(0.0, 0.0);
        }
        if n < 0 {
            self.coeffs[k] * f64::from(self.parity)
        } else {
            self.coeffs[k]
        }
    }

    /// Coefficientwise twist `ψ(n)ρ(n)`; the parity becomes `ε·ψ(−1)`.
    pub fn twisted(&self, psi: &DirichletCharacter) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| psi.value_u(n as u64) * c)
                .collect(),
            s_phi: self.s_phi,
            parity: self.parity * psi.parity(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    /// Smallest `C` with `|ρ(n)| ≤ C√n` on the stored range.
    pub fn trivial_bound_constant(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c.norm() / (n as f64).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> MaassRecord {
        let mut coeffs = BTreeMap::new();
        for n in 1..self.coeffs.len() as i64 {
            let p = self.rho(n);
            let m = self.rho(-n);
            coeffs.insert(n, [p.re, p.im]);
            coeffs.insert(-n, [m.re, m.im]);
        }
        MaassRecord {
            s_phi: [self.s_phi.re, self.s_phi.im],
            parity: self.parity,
            coeffs,
        }
    }

    /// Rejects records whose negative coefficients break `ρ(−n) = ερ(n)`.
    pub fn from_record(r: &MaassRecord) -> Result<Self, FormsError> {
        let n_max = r.coeffs.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut positive = vec![C64::new(0.0, 0.0); n_max];
        for (&n, v) in &r.coeffs {
            if n > 0 {
                positive[n as usize - 1] = C64::new(v[0], v[1]);
            }
        }
        let data = Self::new(positive, C64::new(r.s_phi[0], r.s_phi[1]), r.parity)?;
        for (&n, v) in &r.coeffs {
            if n < 0 && data.rho(n) != C64::new(v[0], v[1]) {
                return Err(FormsError::InvalidArgument(format!("rho({n}) violates the parity relation")));
            }
        }
        Ok(data)
    }
}

/// A truncated Maass-form value with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaassValue {
    pub value: C64,
    pub tail_bound: f64,
}

fn bessel_column(nu: C64, y: f64, n: usize) -> Result<Vec<C64>, FormsError> {
    (1..=n)
        .map(|k| Ok(bessel_k(nu, 2.0 * PI * k as f64 * y)? * y.sqrt()))
        .collect()
}

fn maass_sum(data: &MaassFourierData, x: f64, kcol: &[C64]) -> C64 {
    let mut acc = ComplexSum::new();
    for (i, k) in kcol.iter().enumerate() {
        let n = (i + 1) as i64;
        let e = C64::from_polar(1.0, 2.0 * PI * n as f64 * x);
        acc.add(data.rho(n) * k * e);
        acc.add(data.rho(-n) * k * e.conj());
    }
    acc.value()
}

fn maass_tail(data: &MaassFourierData, y: f64, n: usize) -> f64 {
    let nu = data.s_phi - 0.5;
    if nu.re.abs() > 0.5 {
        return f64::INFINITY;
    }
    // |K_ν(t)| ≤ K_{1/2}(t) = √(π/2t) e^{−t} for |Re ν| ≤ 1/2, |ρ(n)| ≤ C√n
    let c = data.trivial_bound_constant();
    let r = (-2.0 * PI * y).exp();
    c * r.powi(n as i32 + 1) / (1.0 - r)
}

/// `Σ_{0<|n|≤N} ρ(n) √y K_{s_φ−1/2}(2π|n|y) e^{2πinx}`.
pub fn maass_eval(data: &MaassFourierData, z: C64, n: usize) -> Result<MaassValue, FormsError> {
    if z.im < MIN_IMAG {
        return Err(FormsError::ImagTooSmall(z.im));
    }
    if n > data.truncation() {
        return Err(FormsError::InsufficientTerms {
            needed: n,
            available: data.truncation(),
        });
    }
    let kcol = bessel_column(data.s_phi - 0.5, z.im, n)?;
    Ok(MaassValue {
        value: maass_sum(data, z.re, &kcol),
        tail_bound: maass_tail(data, z.im, n),
    })
}

/// `|τ(ψ̄)^{−1} Σ_{a mod r} ψ̄(a) φ(z + a/r) − (φ⊗ψ)(z)|` with both sides
/// truncated at `N`.
pub fn twist_average_residual(
    data: &MaassFourierData,
    psi: &DirichletCharacter,
    z: C64,
    n: usize,
) -> Result<f64, FormsError> {
    if !psi.is_primitive() {
        return Err(FormsError::InvalidArgument("twisting character must be primitive".into()));
    }
    if z.im < MIN_IMAG {
        return Err(FormsError::ImagTooSmall(z.im));
    }
    if n > data.truncation() {
        return Err(FormsError::InsufficientTerms {
            needed: n,
            available: data.truncation(),
        });
    }
    let r = psi.modulus();
    let psibar = psi.conj();
    let tau = gauss_sum(&psibar);
    let kcol = bessel_column(data.s_phi - 0.5, z.im, n)?;
    let mut avg = ComplexSum::new();
    for a in 0..r {
        let w = psibar.value_u(a);
        if w.norm() == 0.0 {
            continue;
        }
        avg.add(w * maass_sum(data, z.re + a as f64 / r as f64, &kcol));
    }
    let lhs = avg.value() / tau;
    let rhs = maass_sum(&data.twisted(psi), z.re, &kcol);
    Ok((lhs - rhs).norm())
}

/// `|Σ_{a mod r} ψ̄(a) e^{2πina/r} − ψ(n) τ(ψ̄)|`.
pub fn gauss_twist_identity_residual(psi: &DirichletCharacter, n: i64) -> f64 {
    let r = psi.modulus();
    let psibar = psi.conj();
    let mut acc = ComplexSum::new();
    for a in 0..r {
        let phase = ((n as i128 * a as i128).rem_euclid(r as i128)) as i64;
        acc.add(psibar.value_u(a) * root_of_unity(phase, r));
    }
    (acc.value() - psi.value(n) * gauss_sum(&psibar)).norm()
}
