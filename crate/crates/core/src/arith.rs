//! Arithmetic substrate: factorization, divisor functions, Dirichlet
//! characters (built by CRT from generator images of each prime-power
//! factor), conductor decomposition and Gauss sums.

use crate::numeric::{root_of_unity, ComplexSum, C64};
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock, RwLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("matrix [[{a}, {b}], [{c}, {d}]] is not in Gamma_0({q}) (det = 1 and q | c required)")]
    NotInGamma0 { a: i64, b: i64, c: i64, d: i64, q: u64 },
    #[error("invalid character table: {0}")]
    InvalidCharacter(String),
}

/// Prime factorization by trial division, primes in ascending order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).first() == Some(&(n, 1))
}

/// Exponent of `p` in `n` (`n > 0`).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn totient(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Divisor sum `σ₁(n)`, exact. `n = 0` returns 0.
pub fn sigma1(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize(n)
        .into_iter()
        .map(|(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

/// Smallest-prime-factor table for `0..=n` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    spf
}

/// Process-wide smallest-prime-factor table covering at least `0..=n`.
/// The table only grows; concurrent callers may race to build it, which is
/// harmless because every build yields the same table.
pub fn shared_smallest_prime_factors(n: usize) -> Arc<Vec<u32>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<u32>>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| RwLock::new(Arc::new(Vec::new())));
    {
        let cur = cell.read().unwrap_or_else(|e| e.into_inner());
        if cur.len() > n {
            return Arc::clone(&cur);
        }
    }
    let target = n.max(1 << 16);
    let table = Arc::new(smallest_prime_factors(target));
    let mut w = cell.write().unwrap_or_else(|e| e.into_inner());
    if w.len() <= n {
        *w = Arc::clone(&table);
    }
    Arc::clone(&w)
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n as usize + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n as usize {
        if sieve[i] {
            let mut j = i * i;
            while j <= n as usize {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &b)| b.then_some(k as u64))
        .collect()
}

/// `σ₁(n)` for `n = 0..=n_max` (entry 0 is 0) via a multiplicative sieve.
pub fn sigma1_table(n_max: usize) -> Vec<u64> {
    let spf = smallest_prime_factors(n_max);
    let mut sig = vec![0u64; n_max + 1];
    if n_max >= 1 {
        sig[1] = 1;
    }
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut m = n;
        let mut pk = 1usize;
        while m % p == 0 {
            m /= p;
            pk *= p;
        }
        sig[n] = if m == 1 {
            // σ₁(p^k) = p·σ₁(p^{k-1}) + 1
            sig[n / p] * p as u64 + 1
        } else {
            sig[pk] * sig[m]
        };
    }
    sig
}

/// Process-wide `σ₁` table covering at least `0..=n`.
pub fn shared_sigma1_table(n: usize) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<u64>>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| RwLock::new(Arc::new(Vec::new())));
    {
        let cur = cell.read().unwrap_or_else(|e| e.into_inner());
        if cur.len() > n {
            return Arc::clone(&cur);
        }
    }
    let table = Arc::new(sigma1_table(n.max(1 << 16)));
    let mut w = cell.write().unwrap_or_else(|e| e.into_inner());
    if w.len() <= n {
        *w = Arc::clone(&table);
    }
    Arc::clone(&w)
}

/// One prime-power factor of `(ℤ/q)*` together with generator data.
#[derive(Debug, Clone)]
struct PrimePowerComponent {
    p: u64,
    e: u32,
    modulus: u64,
    /// Orders of the chosen generators (empty for the trivial group mod 2).
    orders: Vec<u64>,
    /// `dlog[r]` = exponents of `r` in terms of the generators; `None` if `p | r`.
    dlog: Vec<Option<Vec<u64>>>,
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let phi = p - 1;
    let fs = factorize(phi);
    (2..p)
        .find(|&g| fs.iter().all(|&(f, _)| pow_mod(g, phi / f, p) != 1))
        .expect("every prime has a primitive root")
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u128;
    let mut bb = (b % m) as u128;
    let mm = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    b = r as u64;
    b
}

impl PrimePowerComponent {
    fn new(p: u64, e: u32) -> Self {
        let modulus = p.pow(e);
        let mut dlog = vec![None; modulus as usize];
        let orders;
        if p == 2 {
            match e {
                1 => {
                    orders = vec![];
                    dlog[1] = Some(vec![]);
                }
                2 => {
                    orders = vec![2];
                    dlog[1] = Some(vec![0]);
                    dlog[3] = Some(vec![1]);
                }
                _ => {
                    let ord5 = modulus / 4;
                    orders = vec![2, ord5];
                    let mut x = 1u64;
                    for b in 0..ord5 {
                        dlog[x as usize] = Some(vec![0, b]);
                        dlog[(modulus - x) as usize] = Some(vec![1, b]);
                        x = x * 5 % modulus;
                    }
                }
            }
        } else {
            let mut g = primitive_root_mod_prime(p);
            if e >= 2 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            let phi = modulus / p * (p - 1);
            orders = vec![phi];
            let mut x = 1u64;
            for k in 0..phi {
                dlog[x as usize] = Some(vec![k]);
                x = x * g % modulus;
            }
        }
        Self {
            p,
            e,
            modulus,
            orders,
            dlog,
        }
    }

    /// Conductor exponent of the component character with generator exponents `js`.
    fn conductor_exponent(&self, js: &[u64]) -> u32 {
        if self.p == 2 {
            match self.e {
                1 => 0,
                2 => {
                    if js[0] == 0 {
                        0
                    } else {
                        2
                    }
                }
                _ => {
                    if js[1] == 0 {
                        if js[0] == 0 {
                            0
                        } else {
                            2
                        }
                    } else {
                        let ord = self.orders[1] / js[1].gcd(&self.orders[1]);
                        valuation(ord, 2) + 2
                    }
                }
            }
        } else {
            let phi = self.orders[0];
            let ord = phi / js[0].gcd(&phi);
            if ord == 1 {
                0
            } else if (self.p - 1) % ord == 0 {
                1
            } else {
                1 + valuation(ord, self.p)
            }
        }
    }
}

/// A Dirichlet character stored as its full value table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "CharacterRecord", try_from = "CharacterRecord")]
pub struct DirichletCharacter {
    modulus: u64,
    values: Vec<C64>,
    conductor: u64,
    even: bool,
}

/// JSON form `{modulus, conductor, parity, values: [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharacterRecord {
    pub modulus: u64,
    pub conductor: u64,
    pub parity: i8,
    pub values: Vec<[f64; 2]>,
}

impl From<DirichletCharacter> for CharacterRecord {
    fn from(c: DirichletCharacter) -> Self {
        CharacterRecord {
            modulus: c.modulus,
            conductor: c.conductor,
            parity: if c.even { 1 } else { -1 },
            values: c.values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

impl TryFrom<CharacterRecord> for DirichletCharacter {
    type Error = ArithError;

    fn try_from(r: CharacterRecord) -> Result<Self, Self::Error> {
        let values = r.values.iter().map(|v| C64::new(v[0], v[1])).collect();
        let chi = DirichletCharacter::from_values(r.modulus, values)?;
        if chi.conductor != r.conductor {
            return Err(ArithError::InvalidCharacter(format!(
                "declared conductor {} but table has conductor {}",
                r.conductor, chi.conductor
            )));
        }
        if (r.parity == 1) != chi.even {
            return Err(ArithError::InvalidCharacter("parity does not match table".into()));
        }
        Ok(chi)
    }
}

const VALUE_TOL: f64 = 1e-12;

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).norm() <= VALUE_TOL)
    }
}

impl DirichletCharacter {
    /// The principal character mod `q`.
    pub fn principal(q: u64) -> Result<Self, ArithError> {
        if q == 0 {
            return Err(ArithError::ZeroModulus);
        }
        let values = (0..q)
            .map(|r| {
                if q == 1 || r.gcd(&q) == 1 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(Self {
            modulus: q,
            values,
            conductor: 1,
            even: true,
        })
    }

    /// Builds a character from a value table, checking the zero pattern,
    /// unit modulus and multiplicativity, and computing the conductor.
    pub fn from_values(q: u64, values: Vec<C64>) -> Result<Self, ArithError> {
        if q == 0 {
            return Err(ArithError::ZeroModulus);
        }
        if values.len() as u64 != q {
            return Err(ArithError::InvalidCharacter(format!(
                "expected {q} values, got {}",
                values.len()
            )));
        }
        if q == 1 {
            if (values[0] - 1.0).norm() > VALUE_TOL {
                return Err(ArithError::InvalidCharacter("the character mod 1 is 1".into()));
            }
            return Self::principal(1);
        }
        for (r, v) in values.iter().enumerate() {
            let unit = (r as u64).gcd(&q) == 1;
            if unit && (v.norm() - 1.0).abs() > VALUE_TOL {
                return Err(ArithError::InvalidCharacter(format!("|chi({r})| != 1")));
            }
            if !unit && v.norm() > VALUE_TOL {
                return Err(ArithError::InvalidCharacter(format!("chi({r}) != 0 but gcd({r}, {q}) > 1")));
            }
        }
        if (values[1] - 1.0).norm() > VALUE_TOL {
            return Err(ArithError::InvalidCharacter("chi(1) != 1".into()));
        }
        let units: Vec<u64> = (1..q).filter(|r| r.gcd(&q) == 1).collect();
        let probe = if q <= 512 { units.len() } else { units.len().min(64) };
        for &a in &units[..probe] {
            for &b in &units {
                let lhs = values[(a * b % q) as usize];
                if (lhs - values[a as usize] * values[b as usize]).norm() > 1e-10 {
                    return Err(ArithError::InvalidCharacter(format!(
                        "not multiplicative at ({a}, {b})"
                    )));
                }
            }
        }
        let even = (values[(q - 1) as usize] - 1.0).norm() <= VALUE_TOL;
        let mut chi = Self {
            modulus: q,
            values,
            conductor: q,
            even,
        };
        chi.conductor = chi.conductor_by_search();
        Ok(chi)
    }

    /// Smallest divisor `d | q` such that χ is trivial on units `≡ 1 (mod d)`.
    fn conductor_by_search(&self) -> u64 {
        let q = self.modulus;
        divisors(q)
            .into_iter()
            .find(|&d| {
                (1..q)
                    .step_by(d as usize)
                    .filter(|n| n.gcd(&q) == 1)
                    .all(|n| (self.values[n as usize] - 1.0).norm() <= VALUE_TOL)
            })
            .unwrap_or(q)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    /// `χ(-1)` as ±1.
    pub fn parity(&self) -> i8 {
        if self.even {
            1
        } else {
            -1
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.conductor == 1
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `χ(n)` for any integer `n`.
    #[inline]
    pub fn value(&self, n: i64) -> C64 {
        self.values[n.rem_euclid(self.modulus as i64) as usize]
    }

    #[inline]
    pub fn value_u(&self, n: u64) -> C64 {
        self.values[(n % self.modulus) as usize]
    }

    /// True when all values are real (χ = χ̄).
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() <= VALUE_TOL)
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        let mut k = 1u64;
        let mut pow = self.clone();
        while !pow.is_principal() {
            pow = pow.mul(self);
            k += 1;
        }
        k
    }

    pub fn conj(&self) -> Self {
        Self {
            modulus: self.modulus,
            values: self.values.iter().map(|v| v.conj()).collect(),
            conductor: self.conductor,
            even: self.even,
        }
    }

    /// The character mod `m` induced by this one; requires `modulus | m`.
    pub fn lift(&self, m: u64) -> Self {
        assert!(m % self.modulus == 0, "lift: {} does not divide {m}", self.modulus);
        let values = (0..m)
            .map(|r| {
                if r.gcd(&m) == 1 {
                    self.value_u(r)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Self {
            modulus: m,
            values,
            conductor: self.conductor,
            even: self.even,
        }
    }

    /// Product character on the lcm of the two moduli.
    pub fn mul(&self, other: &Self) -> Self {
        let m = self.modulus.lcm(&other.modulus);
        let values: Vec<C64> = (0..m)
            .map(|r| {
                if r.gcd(&m) == 1 {
                    self.value_u(r) * other.value_u(r)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let even = self.even == other.even;
        let mut chi = Self {
            modulus: m,
            values,
            conductor: m,
            even,
        };
        if m == 1 {
            return chi;
        }
        chi.conductor = chi.conductor_by_search();
        chi
    }

    pub fn pow(&self, k: u32) -> Self {
        (1..k).fold(
            if k == 0 {
                Self::principal(self.modulus).expect("modulus is positive")
            } else {
                self.clone()
            },
            |acc, _| acc.mul(self),
        )
    }

    /// The (real) quadratic character mod an odd prime `p`.
    pub fn quadratic(p: u64) -> Result<Self, ArithError> {
        if p < 3 || !is_prime(p) {
            return Err(ArithError::InvalidCharacter(format!("{p} is not an odd prime")));
        }
        Ok(enumerate_characters(p)?
            .into_iter()
            .find(|c| !c.is_principal() && c.is_real())
            .expect("an odd prime has a quadratic character"))
    }
}

/// Enumerates all `φ(q)` characters mod `q`.
///
/// Characters are indexed in mixed radix over the generator exponents of the
/// prime-power components (ascending primes; for `2^e`, `e ≥ 3`, the image of
/// `-1` comes before the image of `5`). Index 0 is the principal character.
pub fn enumerate_characters(q: u64) -> Result<Vec<DirichletCharacter>, ArithError> {
    if q == 0 {
        return Err(ArithError::ZeroModulus);
    }
    if q == 1 {
        return Ok(vec![DirichletCharacter::principal(1)?]);
    }
    let comps: Vec<PrimePowerComponent> = factorize(q)
        .into_iter()
        .map(|(p, e)| PrimePowerComponent::new(p, e))
        .collect();
    let orders: Vec<u64> = comps.iter().flat_map(|c| c.orders.iter().copied()).collect();
    let common = orders.iter().fold(1u64, |acc, o| acc.lcm(o));
    let count: u64 = orders.iter().product();

    // per-residue exponent vectors, flattened over components
    let residue_logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|r| {
            let mut all = Vec::with_capacity(orders.len());
            for c in &comps {
                match &c.dlog[(r % c.modulus) as usize] {
                    Some(ks) => all.extend_from_slice(ks),
                    None => return None,
                }
            }
            Some(all)
        })
        .collect();

    let mut out = Vec::with_capacity(count as usize);
    let mut js = vec![0u64; orders.len()];
    for _ in 0..count {
        let values: Vec<C64> = residue_logs
            .iter()
            .map(|ks| match ks {
                None => C64::new(0.0, 0.0),
                Some(ks) => {
                    let num = js
                        .iter()
                        .zip(ks)
                        .zip(&orders)
                        .fold(0u128, |acc, ((&j, &k), &o)| {
                            (acc + (j as u128 * k as u128 % o as u128) * (common / o) as u128)
                                % common as u128
                        });
                    root_of_unity(num as i64, common)
                }
            })
            .collect();
        let mut offset = 0;
        let mut conductor = 1u64;
        for c in &comps {
            let n = c.orders.len();
            conductor *= c.p.pow(c.conductor_exponent(&js[offset..offset + n]));
            offset += n;
        }
        let even = (values[(q - 1) as usize] - 1.0).norm() <= VALUE_TOL;
        out.push(DirichletCharacter {
            modulus: q,
            values,
            conductor,
            even,
        });
        // mixed-radix increment, last generator fastest
        for i in (0..js.len()).rev() {
            js[i] += 1;
            if js[i] < orders[i] {
                break;
            }
            js[i] = 0;
        }
    }
    Ok(out)
}

/// Primitive characters of conductor exactly `r`.
pub fn primitive_characters(r: u64) -> Result<Vec<DirichletCharacter>, ArithError> {
    Ok(enumerate_characters(r)?
        .into_iter()
        .filter(|c| c.is_primitive())
        .collect())
}

/// Writes `χ = χ*·χ₀` and returns the primitive `χ*` with its modulus `q*`.
pub fn conductor_decompose(chi: &DirichletCharacter) -> (DirichletCharacter, u64) {
    let q = chi.modulus;
    let qs = chi.conductor;
    if qs == q {
        return (chi.clone(), q);
    }
    let values: Vec<C64> = (0..qs)
        .map(|n| {
            if qs > 1 && n.gcd(&qs) != 1 {
                return C64::new(0.0, 0.0);
            }
            let m = (0..)
                .map(|k| n + k * qs)
                .find(|m| m.gcd(&q) == 1)
                .expect("a unit lift exists by CRT");
            chi.value_u(m)
        })
        .collect();
    let star = DirichletCharacter {
        modulus: qs,
        values,
        conductor: qs,
        even: chi.even,
    };
    (star, qs)
}

/// `τ(ψ) = Σ_{a mod r} ψ(a)·e^{2πia/r}`.
pub fn gauss_sum(psi: &DirichletCharacter) -> C64 {
    gauss_sum_at(psi, 1)
}

/// `Σ_{a mod r} ψ(a)·e^{2πina/r}`.
pub fn gauss_sum_at(psi: &DirichletCharacter, n: i64) -> C64 {
    let r = psi.modulus;
    let mut acc = ComplexSum::new();
    for a in 0..r {
        let v = psi.value_u(a);
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let phase = ((n as i128 * a as i128).rem_euclid(r as i128)) as i64;
        acc.add(v * root_of_unity(phase, r));
    }
    acc.value()
}

/// The group character `χ'(γ) = χ(d)` on `Γ₀(q)`.
#[derive(Debug, Clone)]
pub struct GroupCharacterView {
    pub base: DirichletCharacter,
}

impl GroupCharacterView {
    pub fn new(base: DirichletCharacter) -> Self {
        Self { base }
    }

    pub fn eval(&self, m: [[i64; 2]; 2]) -> Result<C64, ArithError> {
        let [[a, b], [c, d]] = m;
        let q = self.base.modulus;
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 || c.rem_euclid(q as i64) != 0 {
            return Err(ArithError::NotInGamma0 { a, b, c, d, q });
        }
        Ok(self.base.value(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        chi.conductor_by_search()
    }

    #[test]
    fn factor_and_divisor_functions() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(sigma1(1), 1);
        assert_eq!(sigma1(12), 28);
        assert_eq!(sigma1(97), 98);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(totient(36), 12);
        let table = sigma1_table(2000);
        for n in 1..=2000u64 {
            assert_eq!(table[n as usize], sigma1(n), "n = {n}");
        }
    }

    #[test]
    fn trivial_modulus_is_constant_one() {
        let chars = enumerate_characters(1).unwrap();
        assert_eq!(chars.len(), 1);
        for n in [-3i64, 0, 1, 7] {
            assert_eq!(chars[0].value(n), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn mod_five_has_two_even_two_odd() {
        let chars = enumerate_characters(5).unwrap();
        assert_eq!(chars.len(), 4);
        assert_eq!(chars.iter().filter(|c| c.is_even()).count(), 2);
        // brute force: characters of the cyclic group generated by 2 mod 5
        for c in &chars {
            let g = c.value(2);
            let k = (0..4)
                .find(|&k| (g - root_of_unity(k, 4)).norm() < 1e-14)
                .unwrap();
            let mut x = 1i64;
            for e in 0..4 {
                assert!((c.value(x) - root_of_unity(k * e, 4)).norm() < 1e-14);
                x = x * 2 % 5;
            }
        }
    }

    #[test]
    fn mod_eight_values_are_fourth_roots() {
        let chars = enumerate_characters(8).unwrap();
        assert_eq!(chars.len(), 4);
        for c in &chars {
            for r in [1i64, 3, 5, 7] {
                let v = c.value(r);
                assert!(v == C64::new(1.0, 0.0) || v == C64::new(-1.0, 0.0) || v.re == 0.0);
            }
            assert_eq!(c.value(2), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn enumeration_is_complete_distinct_and_closed() {
        for q in 1..=60u64 {
            let chars = enumerate_characters(q).unwrap();
            assert_eq!(chars.len() as u64, totient(q), "q = {q}");
            for (i, a) in chars.iter().enumerate() {
                for b in &chars[i + 1..] {
                    assert!(a != b);
                }
            }
            if q <= 24 {
                for a in &chars {
                    for b in &chars {
                        let ab = a.mul(b);
                        assert!(chars.iter().any(|c| *c == ab), "q = {q} not closed");
                    }
                }
            }
        }
    }

    #[test]
    fn structural_conductor_matches_search() {
        for q in 1..=200u64 {
            for c in enumerate_characters(q).unwrap() {
                assert_eq!(c.conductor(), brute_conductor(&c), "q = {q}");
                assert_eq!(c.is_even(), c.value(-1) == C64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn orthogonality_of_row_sums() {
        for q in 1..=50u64 {
            for c in enumerate_characters(q).unwrap() {
                let s: ComplexSum = (0..q as i64).map(|a| c.value(a)).collect();
                let expect = if c.is_principal() { totient(q) as f64 } else { 0.0 };
                assert!((s.value() - expect).norm() < 1e-10, "q = {q}");
            }
        }
    }

    #[test]
    fn conductor_decomposition_examples() {
        let triv6 = DirichletCharacter::principal(6).unwrap();
        let (star, qs) = conductor_decompose(&triv6);
        assert_eq!(qs, 1);
        assert_eq!(star, DirichletCharacter::principal(1).unwrap());

        let quad5 = DirichletCharacter::quadratic(5).unwrap();
        let (star, qs) = conductor_decompose(&quad5);
        assert_eq!(qs, 5);
        assert_eq!(star, quad5);

        let quad3 = DirichletCharacter::quadratic(3).unwrap();
        let induced = quad3.lift(15);
        assert_eq!(induced.conductor(), 3);
        let (star, qs) = conductor_decompose(&induced);
        assert_eq!(qs, 3);
        assert_eq!(star, quad3);
        for n in 0..15i64 {
            if n.gcd(&15) == 1 {
                assert_eq!(induced.value(n), star.value(n));
            }
        }
    }

    #[test]
    fn decomposition_is_idempotent() {
        for q in [12u64, 36, 45, 64, 100] {
            for c in enumerate_characters(q).unwrap() {
                let (star, qs) = conductor_decompose(&c);
                assert!(star.is_primitive());
                assert_eq!(q % qs, 0);
                let (again, qs2) = conductor_decompose(&star);
                assert_eq!(qs2, qs);
                assert_eq!(again, star);
            }
        }
    }

    #[test]
    fn gauss_sum_examples() {
        let quad5 = DirichletCharacter::quadratic(5).unwrap();
        let t = gauss_sum(&quad5);
        assert!((t - C64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        let triv = DirichletCharacter::principal(1).unwrap();
        assert_eq!(gauss_sum(&triv), C64::new(1.0, 0.0));
    }

    #[test]
    fn group_character_view() {
        let chi = enumerate_characters(5).unwrap().remove(1);
        let view = GroupCharacterView::new(chi.clone());
        assert_eq!(view.eval([[1, 0], [5, 1]]).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(view.eval([[3, 1], [5, 2]]).unwrap(), chi.value(2));
        assert!(view.eval([[1, 1], [1, 2]]).is_err());
        assert!(view.eval([[2, 0], [0, 1]]).is_err());
    }

    #[test]
    fn json_record_round_trip_and_validation() {
        let chi = enumerate_characters(12).unwrap().remove(3);
        let s = serde_json::to_string(&chi).unwrap();
        let back: DirichletCharacter = serde_json::from_str(&s).unwrap();
        assert_eq!(back, chi);
        let mut rec: CharacterRecord = chi.into();
        rec.values[5] = [0.5, 0.0];
        let bad: Result<DirichletCharacter, _> = rec.try_into();
        assert!(bad.is_err());
    }

    #[test]
    fn sigma1_multiplicative_on_coprime() {
        for m in 1..60u64 {
            for n in 1..60u64 {
                if m.gcd(&n) == 1 {
                    assert_eq!(sigma1(m * n), sigma1(m) * sigma1(n));
                }
            }
        }
    }
}
