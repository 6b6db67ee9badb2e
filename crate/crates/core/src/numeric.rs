//! Small numerical building blocks shared by the series, quadrature and
//! matrix code: compensated accumulation, exact roots of unity and
//! least-squares slope fits.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::ops::AddAssign;

pub type C64 = Complex64;

/// Error-free two-sum (Knuth). Returns `(s, e)` with `s + e == a + b` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Neumaier-style compensated accumulator for real values.
///
/// Summation order is the order of `add` calls, so results are reproducible
/// for a fixed input sequence.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.comp += e;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        iter.into_iter().for_each(|x| acc.add(x));
        acc
    }
}

/// Componentwise compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<C64> for ComplexSum {
    fn add_assign(&mut self, rhs: C64) {
        self.add(rhs);
    }
}

impl FromIterator<C64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        let mut acc = Self::new();
        iter.into_iter().for_each(|z| acc.add(z));
        acc
    }
}

/// `exp(2πi·num/den)` with the phase reduced exactly in integer arithmetic.
/// Quarter turns are returned exactly (1, i, -1, -i).
pub fn root_of_unity(num: i64, den: u64) -> C64 {
    assert!(den > 0, "root_of_unity: zero denominator");
    let den_i = den as i128;
    let mut k = (num as i128).rem_euclid(den_i);
    // fold into (-den/2, den/2] so the angle stays small
    if 2 * k > den_i {
        k -= den_i;
    }
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    if 4 * k == den_i {
        return C64::new(0.0, 1.0);
    }
    if 4 * k == -den_i {
        return C64::new(0.0, -1.0);
    }
    if 2 * k == den_i {
        return C64::new(-1.0, 0.0);
    }
    let angle = 2.0 * PI * (k as f64) / (den as f64);
    let (s, c) = angle.sin_cos();
    C64::new(c, s)
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `log|y|` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    ls_slope(&lx, &ly)
}

/// `n^{-s}` for a positive integer `n` and complex `s`.
#[inline]
pub fn int_pow_neg(n: u64, s: C64) -> C64 {
    let ln = (n as f64).ln();
    C64::from_polar((-s.re * ln).exp(), -s.im * ln)
}

/// Logarithmically spaced grid from `hi` down to `lo` (inclusive), `count` points.
pub fn log_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let (lh, ll) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| (lh + (ll - lh) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Terms per block in [`fixed_block_sum`].
pub const SUM_BLOCK: usize = 1 << 15;

/// `Σ_{n=lo}^{hi} term(n)` with compensated summation inside fixed-size
/// blocks and an ordered compensated reduction of the block partials. Blocks
/// may run in parallel; the partition does not depend on the thread count,
/// so the result is bit-identical across pool sizes.
pub fn fixed_block_sum<F>(lo: usize, hi: usize, term: F) -> C64
where
    F: Fn(usize) -> C64 + Sync,
{
    if hi < lo {
        return C64::new(0.0, 0.0);
    }
    let count = hi - lo + 1;
    let blocks = count.div_ceil(SUM_BLOCK);
    let partials: Vec<C64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = lo + b * SUM_BLOCK;
            let end = (start + SUM_BLOCK - 1).min(hi);
            let mut acc = ComplexSum::new();
            for n in start..=end {
                acc.add(term(n));
            }
            acc.value()
        })
        .collect();
    partials.into_iter().collect::<ComplexSum>().value()
}
