//! Synthetic Hecke eigensystems.
//!
//! A system is fixed by its level `q`, an even nebentypus `χ` mod `q`, the
//! spectral parameter `s_φ`, the parity `ε_φ` and the prime seeds `λ(p)`.
//! All other coefficients follow from
//!
//! * `λ(p^{k+1}) = λ(p)λ(p^k) − χ(p)λ(p^{k−1})` for `p ∤ q`,
//! * `λ(p^k) = λ(p)^k` for `p | q`,
//! * multiplicativity on coprime arguments, and `λ(−n) = ε_φ λ(n)`.
//!
//! Seeds come from a [`SeedProvider`]: an explicit table, a deterministic
//! random generator, or a character twist of another system.

use crate::arith::{
    enumerate_characters, factorize, shared_smallest_prime_factors, valuation, ArithError,
    DirichletCharacter,
};
use num_integer::Integer;
use crate::numeric::{root_of_unity, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

/// Default upper index of the dense coefficient table.
pub const DEFAULT_MEMO_BOUND: usize = 1_000_000;

const MAGNITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeckeError {
    #[error("coefficient index must be nonzero")]
    ZeroIndex,
    #[error("nebentypus must be even")]
    OddNebentypus,
    #[error("nebentypus modulus {modulus} does not divide the level {level}")]
    LevelMismatch { modulus: u64, level: u64 },
    #[error("twisting character must be primitive (modulus {modulus}, conductor {conductor})")]
    NonPrimitiveTwist { modulus: u64, conductor: u64 },
    #[error("invalid seed at p = {p}: {reason}")]
    InvalidSeed { p: u64, reason: String },
    #[error("invalid system parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Source of the prime seeds `λ(p)`.
pub trait SeedProvider: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;

    /// `λ(p)` for a prime `p`.
    fn seed(&self, p: u64) -> C64;

    /// Exponent `θ ≥ 0` with `|λ(n)| ≤ d(n)·n^θ` for every `n`.
    fn growth_exponent(&self) -> f64;
}

/// Seeds listed explicitly; primes absent from the table have `λ(p) = 0`.
#[derive(Debug, Clone)]
pub struct TableSeeds {
    seeds: BTreeMap<u64, C64>,
    chi: DirichletCharacter,
}

impl TableSeeds {
    pub fn new(seeds: BTreeMap<u64, C64>, chi: DirichletCharacter) -> Self {
        Self { seeds, chi }
    }

    pub fn table(&self) -> &BTreeMap<u64, C64> {
        &self.seeds
    }
}

impl SeedProvider for TableSeeds {
    fn kind(&self) -> &'static str {
        "table"
    }

    fn seed(&self, p: u64) -> C64 {
        self.seeds.get(&p).copied().unwrap_or_default()
    }

    fn growth_exponent(&self) -> f64 {
        self.seeds
            .iter()
            .map(|(&p, &lam)| satake_exponent(p, lam, self.chi.value_u(p)))
            .fold(0.0, f64::max)
    }
}

/// `log_p max(|α|, |β|)` for the roots of `X² − λX + c`, clamped at 0.
fn satake_exponent(p: u64, lam: C64, c: C64) -> f64 {
    let disc = (lam * lam - 4.0 * c).sqrt();
    let r = ((lam + disc) * 0.5).norm().max(((lam - disc) * 0.5).norm());
    if r <= 1.0 {
        0.0
    } else {
        // a hair of slack for rounding in the root computation
        r.ln() / (p as f64).ln() + 1e-12
    }
}

/// Distribution of generated unramified seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum SeedModel {
    /// `λ(p) = 2cos θ_p · √χ(p)` with `θ_p` uniform on `[0, π]`.
    Tempered,
    /// `λ(p) = ±√χ(p)·(p^τ + p^{−τ})` with `τ` uniform on `[0, theta]`.
    Untempered { theta: f64 },
}

/// Seeds drawn lazily from a ChaCha stream keyed by `(seed, p)`, so the value
/// at each prime is independent of the order in which primes are queried.
#[derive(Debug, Clone)]
pub struct GeneratedSeeds {
    seed: u64,
    model: SeedModel,
    level: u64,
    chi: DirichletCharacter,
    conductor: u64,
}

impl GeneratedSeeds {
    fn rng(&self, p: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(p);
        rng
    }
}

/// `|λ(p)|` forced at a ramified prime `p | q`.
pub fn ramified_magnitude(p: u64, level: u64, conductor: u64) -> f64 {
    let vq = valuation(level, p);
    let vm = valuation(conductor, p);
    if vq >= 1 && vq == vm {
        1.0
    } else if vq == 1 && vm == 0 {
        1.0 / (p as f64).sqrt()
    } else {
        0.0
    }
}

impl SeedProvider for GeneratedSeeds {
    fn kind(&self) -> &'static str {
        "generated"
    }

    fn seed(&self, p: u64) -> C64 {
        let mut rng = self.rng(p);
        if self.level % p == 0 {
            let mag = ramified_magnitude(p, self.level, self.conductor);
            let phase: f64 = rng.gen();
            return C64::from_polar(mag, 2.0 * std::f64::consts::PI * phase);
        }
        let root = self.chi.value_u(p).sqrt();
        match self.model {
            SeedModel::Tempered => {
                let theta: f64 = rng.gen_range(0.0..=std::f64::consts::PI);
                root * (2.0 * theta.cos())
            }
            SeedModel::Untempered { theta } => {
                let tau: f64 = rng.gen_range(0.0..=theta);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let pt = (p as f64).powf(tau);
                root * (sign * (pt + 1.0 / pt))
            }
        }
    }

    fn growth_exponent(&self) -> f64 {
        match self.model {
            SeedModel::Tempered => 0.0,
            SeedModel::Untempered { theta } => theta,
        }
    }
}

/// Seeds of `φ ⊗ ψ`: `ψ(p)λ(p)` away from the new ramification, 0 at primes
/// dividing the twisted level but not the original one.
#[derive(Debug, Clone)]
pub struct TwistSeeds {
    base: Arc<dyn SeedProvider>,
    psi: DirichletCharacter,
    base_level: u64,
    level: u64,
}

impl SeedProvider for TwistSeeds {
    fn kind(&self) -> &'static str {
        "twist"
    }

    fn seed(&self, p: u64) -> C64 {
        if self.level % p == 0 && self.base_level % p != 0 {
            return C64::new(0.0, 0.0);
        }
        self.psi.value_u(p) * self.base.seed(p)
    }

    fn growth_exponent(&self) -> f64 {
        self.base.growth_exponent()
    }
}

/// Write-once dense table of `λ(0..=len-1)`, shared by concurrent readers.
#[derive(Debug, Default)]
struct CoefficientMemo {
    table: RwLock<Arc<Vec<C64>>>,
}

#[derive(Clone)]
pub struct HeckeEigenSystem {
    level: u64,
    chi: DirichletCharacter,
    s_phi: C64,
    parity: i8,
    eta: C64,
    seeds: Arc<dyn SeedProvider>,
    memo: Arc<CoefficientMemo>,
    memo_bound: usize,
}

impl fmt::Debug for HeckeEigenSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeckeEigenSystem")
            .field("level", &self.level)
            .field("conductor", &self.chi.conductor())
            .field("s_phi", &self.s_phi)
            .field("parity", &self.parity)
            .field("seeds", &self.seeds.kind())
            .finish()
    }
}

fn check_parity(parity: i8) -> Result<(), HeckeError> {
    if parity == 1 || parity == -1 {
        Ok(())
    } else {
        Err(HeckeError::InvalidParameter(format!("parity must be +1 or -1, got {parity}")))
    }
}

fn lift_nebentypus(level: u64, chi: &DirichletCharacter) -> Result<DirichletCharacter, HeckeError> {
    if level == 0 {
        return Err(ArithError::ZeroModulus.into());
    }
    if level % chi.modulus() != 0 {
        return Err(HeckeError::LevelMismatch {
            modulus: chi.modulus(),
            level,
        });
    }
    if !chi.is_even() {
        return Err(HeckeError::OddNebentypus);
    }
    Ok(if chi.modulus() == level { chi.clone() } else { chi.lift(level) })
}

impl HeckeEigenSystem {
    /// Assembles a system from an arbitrary seed provider. No magnitude
    /// checks are made on the seeds.
    pub fn from_provider(
        level: u64,
        chi: &DirichletCharacter,
        s_phi: C64,
        parity: i8,
        eta: C64,
        seeds: Arc<dyn SeedProvider>,
    ) -> Result<Self, HeckeError> {
        check_parity(parity)?;
        if ((eta.norm() - 1.0).abs()) > 1e-12 {
            return Err(HeckeError::InvalidParameter(format!("eta must be a unit, got {eta}")));
        }
        let chi = lift_nebentypus(level, chi)?;
        Ok(Self {
            level,
            chi,
            s_phi,
            parity,
            eta,
            seeds,
            memo: Arc::default(),
            memo_bound: DEFAULT_MEMO_BOUND,
        })
    }

    /// A system with explicitly listed seeds. Ramified seeds must obey the
    /// magnitude law; with `enforce_tempered` unramified seeds must satisfy
    /// `|λ(p)| ≤ 2`.
    pub fn from_seeds(
        level: u64,
        chi: &DirichletCharacter,
        s_phi: C64,
        parity: i8,
        eta: C64,
        seeds: BTreeMap<u64, C64>,
        enforce_tempered: bool,
    ) -> Result<Self, HeckeError> {
        let lifted = lift_nebentypus(level, chi)?;
        for (&p, &lam) in &seeds {
            if !crate::arith::is_prime(p) {
                return Err(HeckeError::InvalidSeed {
                    p,
                    reason: "not a prime".into(),
                });
            }
            if !(lam.re.is_finite() && lam.im.is_finite()) {
                return Err(HeckeError::InvalidSeed {
                    p,
                    reason: "non-finite value".into(),
                });
            }
            if level % p == 0 {
                let want = ramified_magnitude(p, level, lifted.conductor());
                if (lam.norm() - want).abs() > MAGNITUDE_TOL {
                    return Err(HeckeError::InvalidSeed {
                        p,
                        reason: format!("|lambda(p)| = {} but the ramified law requires {want}", lam.norm()),
                    });
                }
            } else if enforce_tempered && lam.norm() > 2.0 + MAGNITUDE_TOL {
                return Err(HeckeError::InvalidSeed {
                    p,
                    reason: format!("|lambda(p)| = {} exceeds 2", lam.norm()),
                });
            }
        }
        let provider = Arc::new(TableSeeds::new(seeds, lifted.clone()));
        Self::from_provider(level, &lifted, s_phi, parity, eta, provider)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn nebentypus(&self) -> &DirichletCharacter {
        &self.chi
    }

    pub fn conductor(&self) -> u64 {
        self.chi.conductor()
    }

    pub fn s_phi(&self) -> C64 {
        self.s_phi
    }

    pub fn parity(&self) -> i8 {
        self.parity
    }

    pub fn is_odd(&self) -> bool {
        self.parity == -1
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    pub fn seed_provider(&self) -> &Arc<dyn SeedProvider> {
        &self.seeds
    }

    pub fn growth_exponent(&self) -> f64 {
        self.seeds.growth_exponent()
    }

    pub fn memo_bound(&self) -> usize {
        self.memo_bound
    }

    /// Same system with a different parity; coefficients at `n > 0` are shared.
    pub fn with_parity(&self, parity: i8) -> Result<Self, HeckeError> {
        check_parity(parity)?;
        let mut out = self.clone();
        out.parity = parity;
        Ok(out)
    }

    /// Sets the largest index cached in the dense coefficient table.
    pub fn with_memo_bound(mut self, bound: usize) -> Self {
        self.memo_bound = bound;
        self.memo = Arc::default();
        self
    }

    /// `λ(p)` for a prime `p`.
    pub fn seed(&self, p: u64) -> C64 {
        self.seeds.seed(p)
    }

    /// `λ(p^k)` for `k = 0..=kmax`.
    pub fn prime_power_coefficients(&self, p: u64, kmax: u32) -> Vec<C64> {
        let lam = self.seed(p);
        let c = self.chi.value_u(p);
        let mut out = Vec::with_capacity(kmax as usize + 1);
        out.push(C64::new(1.0, 0.0));
        for k in 1..=kmax as usize {
            let next = if k == 1 {
                lam
            } else if self.level % p == 0 {
                lam * out[k - 1]
            } else {
                lam * out[k - 1] - c * out[k - 2]
            };
            out.push(next);
        }
        out
    }

    fn direct(&self, n: u64) -> C64 {
        // nested right-to-left product over ascending primes, matching the sieve
        factorize(n)
            .iter()
            .rev()
            .map(|&(p, e)| self.prime_power_coefficients(p, e)[e as usize])
            .reduce(|acc, pk| pk * acc)
            .unwrap_or(C64::new(1.0, 0.0))
    }

    /// `ρ(n)`: `λ(n)` for `n > 0` and `ε_φ λ(|n|)` for `n < 0`.
    pub fn coefficient(&self, n: i64) -> Result<C64, HeckeError> {
        if n == 0 {
            return Err(HeckeError::ZeroIndex);
        }
        let v = self.coefficient_u(n.unsigned_abs());
        Ok(if n < 0 { v * f64::from(self.parity) } else { v })
    }

    /// `λ(n)` for `n ≥ 1`.
    pub fn coefficient_u(&self, n: u64) -> C64 {
        assert!(n >= 1, "coefficient index must be positive");
        if (n as usize) <= self.memo_bound {
            let table = self.coefficients_upto(n as usize);
            return table[n as usize];
        }
        self.direct(n)
    }

    /// Dense table `[0, λ(1), …, λ(n)]` (entry 0 is unused and set to 0).
    /// Tables within the memo bound are cached and shared.
    pub fn coefficients_upto(&self, n: usize) -> Arc<Vec<C64>> {
        {
            let cur = self.memo.table.read().unwrap_or_else(|e| e.into_inner());
            if cur.len() > n {
                return Arc::clone(&cur);
            }
        }
        if n > self.memo_bound {
            return Arc::new(self.sieve(n));
        }
        let target = n.max(1024).next_power_of_two().min(self.memo_bound.max(n));
        let table = Arc::new(self.sieve(target));
        let mut w = self.memo.table.write().unwrap_or_else(|e| e.into_inner());
        if w.len() <= n {
            *w = Arc::clone(&table);
        }
        Arc::clone(&w)
    }

    fn sieve(&self, n: usize) -> Vec<C64> {
        let spf = shared_smallest_prime_factors(n);
        let mut lam = vec![C64::new(0.0, 0.0); n + 1];
        if n >= 1 {
            lam[1] = C64::new(1.0, 0.0);
        }
        for m in 2..=n {
            let p = spf[m] as usize;
            let mut rest = m;
            while rest % p == 0 {
                rest /= p;
            }
            lam[m] = if rest == 1 {
                if m == p {
                    self.seed(p as u64)
                } else if self.level % p as u64 == 0 {
                    lam[p] * lam[m / p]
                } else {
                    lam[p] * lam[m / p] - self.chi.value_u(p as u64) * lam[m / p / p]
                }
            } else {
                lam[m / rest] * lam[rest]
            };
        }
        lam
    }

    /// `|λ(m)λ(n) − Σ_{d | (m,n)} χ(d) λ(mn/d²)|`.
    pub fn verify_hecke_relation(&self, m: u64, n: u64) -> f64 {
        assert!(m >= 1 && n >= 1);
        let lhs = self.coefficient_u(m) * self.coefficient_u(n);
        let g = m.gcd(&n);
        let rhs: C64 = crate::arith::divisors(g)
            .into_iter()
            .map(|d| self.chi.value_u(d) * self.coefficient_u(m / d * (n / d)))
            .sum();
        (lhs - rhs).norm()
    }

    /// Twist by a primitive character `ψ` mod `r`.
    pub fn twist(&self, psi: &DirichletCharacter) -> Result<Self, HeckeError> {
        if !psi.is_primitive() {
            return Err(HeckeError::NonPrimitiveTwist {
                modulus: psi.modulus(),
                conductor: psi.conductor(),
            });
        }
        if psi.modulus() == 1 {
            return Ok(self.clone());
        }
        let level = twist_level(self.level, self.conductor(), psi.modulus());
        let chi = self.chi.mul(&psi.pow(2)).lift(level);
        let parity = self.parity * psi.parity();
        let provider = Arc::new(TwistSeeds {
            base: Arc::clone(&self.seeds),
            psi: psi.clone(),
            base_level: self.level,
            level,
        });
        let mut out = Self::from_provider(level, &chi, self.s_phi, parity, self.eta, provider)?;
        out.memo_bound = self.memo_bound;
        Ok(out)
    }

    /// JSON record; seeds are listed for every prime up to `prime_bound`.
    pub fn to_record(&self, prime_bound: u64) -> HeckeRecord {
        let chars = enumerate_characters(self.level).expect("level is positive");
        let index = chars
            .iter()
            .position(|c| c == &self.chi)
            .expect("nebentypus is a character mod the level");
        HeckeRecord {
            level: self.level,
            nebentypus_ref: NebentypusRef {
                modulus: self.level,
                index,
            },
            s_phi: [self.s_phi.re, self.s_phi.im],
            parity: self.parity,
            eta: [self.eta.re, self.eta.im],
            seeds: crate::arith::primes_up_to(prime_bound)
                .into_iter()
                .map(|p| {
                    let v = self.seed(p);
                    (p, [v.re, v.im])
                })
                .collect(),
        }
    }

    pub fn from_record(record: &HeckeRecord, enforce_tempered: bool) -> Result<Self, HeckeError> {
        let r = &record.nebentypus_ref;
        let chars = enumerate_characters(r.modulus)?;
        let chi = chars.get(r.index).ok_or_else(|| {
            HeckeError::InvalidParameter(format!("no character with index {} mod {}", r.index, r.modulus))
        })?;
        let seeds = record
            .seeds
            .iter()
            .map(|(&p, v)| (p, C64::new(v[0], v[1])))
            .collect();
        Self::from_seeds(
            record.level,
            chi,
            C64::new(record.s_phi[0], record.s_phi[1]),
            record.parity,
            C64::new(record.eta[0], record.eta[1]),
            seeds,
            enforce_tempered,
        )
    }
}

/// Reference to a character by its position in [`enumerate_characters`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NebentypusRef {
    pub modulus: u64,
    pub index: usize,
}

/// JSON form `{level, nebentypus_ref, s_phi, parity, eta, seeds}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeckeRecord {
    pub level: u64,
    pub nebentypus_ref: NebentypusRef,
    pub s_phi: [f64; 2],
    pub parity: i8,
    pub eta: [f64; 2],
    pub seeds: BTreeMap<u64, [f64; 2]>,
}

/// `lcm(q, q*·r, r²)`.
pub fn twist_level(q: u64, conductor: u64, r: u64) -> u64 {
    q.lcm(&(conductor * r)).lcm(&(r * r))
}

/// Deterministic random system of level `q` with even nebentypus `chi`.
///
/// Unramified seeds follow `model`; ramified seeds have the magnitude forced
/// by the level and conductor and a uniform phase.
pub fn random_system_with_model(
    seed: u64,
    q: u64,
    chi: &DirichletCharacter,
    s_phi: C64,
    parity: i8,
    model: SeedModel,
) -> Result<HeckeEigenSystem, HeckeError> {
    let lifted = lift_nebentypus(q, chi)?;
    if let SeedModel::Untempered { theta } = model {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(HeckeError::InvalidParameter(format!("theta must be >= 0, got {theta}")));
        }
    }
    let provider = Arc::new(GeneratedSeeds {
        seed,
        model,
        level: q,
        chi: lifted.clone(),
        conductor: lifted.conductor(),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let eta = root_of_unity(rng.gen_range(0..1_000_000), 1_000_000);
    HeckeEigenSystem::from_provider(q, &lifted, s_phi, parity, eta, provider)
}

/// Deterministic random tempered system.
pub fn random_system(
    seed: u64,
    q: u64,
    chi: &DirichletCharacter,
    s_phi: C64,
    parity: i8,
) -> Result<HeckeEigenSystem, HeckeError> {
    random_system_with_model(seed, q, chi, s_phi, parity, SeedModel::Tempered)
}
