use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use spectral_forge::arith::{enumerate_characters, DirichletCharacter};
use spectral_forge::forms::g_q1q2;
use spectral_forge::hecke::{random_system, HeckeEigenSystem};
use spectral_forge::lfunc::{
    l_series, rankin_closed_form_cached, rankin_euler_product, rankin_sigma_series_cached, twist_nonvanishing_scan,
    PowerCache, TwistScanOptions,
};
use spectral_forge::numeric::{rel_diff, C64};
use spectral_forge::psint::{evaluator, three_mode, PsMode, PsOptions, PsProblem, PsResult};
use spectral_forge::special::{bessel_moment, bessel_moment_estimate, QuadratureSpec};

use super::{fail, pair, Context, Suite, SuiteError};
use crate::report::Check;

const RANKIN_LEVELS: [u64; 8] = [1, 2, 3, 4, 5, 6, 9, 10];

fn tempered_system(seed: u64, level: u64, s_phi: C64, parity: i8) -> Result<HeckeEigenSystem, SuiteError> {
    let chi = DirichletCharacter::principal(level).map_err(fail)?;
    random_system(seed, level, &chi, s_phi, parity).map_err(fail)
}

/// Series, Euler product and closed form of `Σ σ₁(n)λ(n)n^{−s}`.
pub struct RankinSuite {
    pub s: C64,
    pub systems: usize,
    pub terms: u64,
    pub p_max: u64,
    pub tolerance: f64,
}

impl Suite for RankinSuite {
    fn name(&self) -> &'static str {
        "rankin"
    }

    fn parameters(&self) -> Value {
        json!({
            "s": pair(self.s),
            "systems": self.systems,
            "terms": self.terms,
            "p_max": self.p_max,
            "tolerance": self.tolerance,
        })
    }

    fn run(&self, ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        let mut rng = ctx.rng(0);
        let draws: Vec<(u64, u64, C64)> = (0..self.systems)
            .map(|i| {
                let level = RANKIN_LEVELS[i % RANKIN_LEVELS.len()];
                (rng.gen(), level, C64::new(0.5, rng.gen_range(0.0..20.0)))
            })
            .collect();
        let cache = PowerCache::new();
        let per_system: Vec<Result<Vec<Check>, SuiteError>> = draws
            .par_iter()
            .enumerate()
            .map(|(i, &(seed, level, s_phi))| {
                let sys = tempered_system(seed, level, s_phi, 1)?.with_memo_bound(self.terms as usize);
                let series = rankin_sigma_series_cached(&sys, self.s, self.terms, Some(&cache));
                let product = rankin_euler_product(&sys, self.s, self.p_max).map_err(fail)?;
                let closed = rankin_closed_form_cached(&sys, self.s, self.terms, self.p_max, Some(&cache)).map_err(fail)?;
                let tag = format!("system{i:03}");
                Ok(vec![
                    Check::at_most(format!("{tag}.series_vs_closed"), rel_diff(series.value, closed.value), self.tolerance)
                        .with("level", level)
                        .with("s_phi", pair(s_phi))
                        .with("series", pair(series.value))
                        .with("closed", pair(closed.value))
                        .with("closed_error_bound", closed.error_bound),
                    Check::at_most(
                        format!("{tag}.series_vs_euler"),
                        rel_diff(series.value, product.value),
                        self.tolerance,
                    )
                    .with("euler", pair(product.value))
                    .with("euler_tail_bound", product.tail_bound),
                ])
            })
            .collect();
        let mut checks = Vec::new();
        for c in per_system {
            checks.extend(c?);
        }
        Ok(checks)
    }
}

/// Three-mode evaluation of the pairing with `G_{q₁,q₂}` for one odd system.
pub struct PsSuite {
    pub level: u64,
    pub q1: u64,
    pub q2: u64,
    pub s: C64,
    pub mode: Option<PsMode>,
    pub terms: u64,
}

fn result_json(r: &PsResult) -> Value {
    json!({
        "mode": r.mode.name(),
        "value": pair(r.value),
        "tail_bound": r.tolerances.tail_bound,
        "quadrature_error": r.tolerances.quadrature_error,
        "condition": r.tolerances.condition,
        "absolutely_convergent": r.tolerances.absolutely_convergent,
    })
}

impl Suite for PsSuite {
    fn name(&self) -> &'static str {
        "ps"
    }

    fn parameters(&self) -> Value {
        json!({
            "level": self.level,
            "q1": self.q1,
            "q2": self.q2,
            "s": pair(self.s),
            "mode": self.mode.map(|m| m.name()),
            "terms": self.terms,
        })
    }

    fn run(&self, ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        let mut rng = ctx.rng(0);
        let s_phi = C64::new(0.5, rng.gen_range(2.0..12.0));
        let odd = tempered_system(ctx.seed, self.level, s_phi, -1)?.with_memo_bound(self.terms as usize);
        let even = odd.with_parity(1).map_err(fail)?;
        let form = g_q1q2(self.q1, self.q2, self.terms as usize + 1).map_err(fail)?;
        let opts = PsOptions::default().with_terms(self.terms);
        let cache = PowerCache::new();
        let problem = PsProblem::new(&odd, &form, self.q1, self.q2, self.s).map_err(fail)?;
        let even_problem = PsProblem::new(&even, &form, self.q1, self.q2, self.s).map_err(fail)?;

        let modes: Vec<PsMode> = match self.mode {
            Some(m) => vec![m],
            None => PsMode::ALL.to_vec(),
        };
        let mut checks = Vec::new();
        match self.mode {
            Some(m) => {
                let r = evaluator(m).evaluate(&problem, &opts, Some(&cache)).map_err(fail)?;
                checks.push(
                    Check::verdict(format!("{}.value", m.name()), r.value.norm(), r.value.is_finite())
                        .with("s_phi", pair(s_phi))
                        .with("result", result_json(&r)),
                );
            }
            None => {
                let rep = three_mode(&problem, &opts, Some(&cache)).map_err(fail)?;
                let results: Vec<Value> = rep.results.iter().map(result_json).collect();
                checks.push(
                    Check::at_most("series_vs_closed", rep.series_vs_closed, 1e-6)
                        .with("s_phi", pair(s_phi))
                        .with("results", results),
                );
                checks.push(Check::at_most("series_vs_quadrature", rep.series_vs_quadrature, 1e-7));
            }
        }
        let mut worst = 0.0f64;
        for m in modes {
            let r = evaluator(m).evaluate(&even_problem, &opts, Some(&cache)).map_err(fail)?;
            worst = worst.max(r.value.norm());
        }
        checks.push(Check::verdict("even_vanishes", worst, worst == 0.0));
        Ok(checks)
    }
}

/// Closed-form Bessel moment against direct quadrature at random points of
/// `1/2 < Re s < 3`, `s_φ = σ + it` with `σ ∈ [0, 1]`, `|t| ≤ 5`.
pub struct BesselSuite {
    pub count: usize,
    pub tolerance: f64,
}

impl Suite for BesselSuite {
    fn name(&self) -> &'static str {
        "bessel"
    }

    fn parameters(&self) -> Value {
        json!({"count": self.count, "tolerance": self.tolerance})
    }

    fn run(&self, ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        let mut rng = ctx.rng(0);
        let points: Vec<(C64, C64)> = (0..self.count)
            .map(|_| {
                let s = C64::new(rng.gen_range(0.5..3.0), rng.gen_range(-2.0..2.0));
                let s_phi = C64::new(rng.gen_range(0.0..1.0), rng.gen_range(-5.0..5.0));
                (s, s_phi)
            })
            .collect();
        let spec = QuadratureSpec::default();
        points
            .par_iter()
            .enumerate()
            .map(|(i, &(s, s_phi))| {
                let closed = bessel_moment(s, s_phi).map_err(fail)?;
                let quad = bessel_moment_estimate(s, s_phi, &spec).map_err(fail)?;
                Ok(Check::at_most(format!("point{i:03}"), rel_diff(closed, quad.value), self.tolerance)
                    .with("s", pair(s))
                    .with("s_phi", pair(s_phi))
                    .with("closed", pair(closed))
                    .with("quadrature", pair(quad.value))
                    .with("quadrature_error", quad.error))
            })
            .collect()
    }
}

/// Scan of even primitive twists with non-vanishing truncated `L(s, φ⊗ψ)`,
/// each hit re-evaluated at twice the truncation.
pub struct TwistScanSuite {
    pub s: C64,
    pub avoid: u64,
    pub r_max: u64,
    pub threshold: f64,
    pub level: u64,
    pub terms: u64,
}

impl Suite for TwistScanSuite {
    fn name(&self) -> &'static str {
        "twist-scan"
    }

    fn parameters(&self) -> Value {
        json!({
            "s": pair(self.s),
            "M": self.avoid,
            "rmax": self.r_max,
            "threshold": self.threshold,
            "level": self.level,
            "terms": self.terms,
        })
    }

    fn run(&self, ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        let mut rng = ctx.rng(0);
        let s_phi = C64::new(0.5, rng.gen_range(1.0..15.0));
        let sys = tempered_system(ctx.seed, self.level, s_phi, 1)?;
        let opts = TwistScanOptions {
            avoid: self.avoid,
            r_max: self.r_max,
            threshold: self.threshold,
            terms: self.terms,
        };
        let hits = twist_nonvanishing_scan(&sys, self.s, &opts).map_err(fail)?;
        let mut checks = vec![Check::verdict("scan", hits.len() as f64, true)
            .with("s_phi", pair(s_phi))
            .with("hits", hits.len())];
        let rechecks: Vec<Result<Check, SuiteError>> = hits
            .par_iter()
            .map(|h| {
                let psi = enumerate_characters(h.conductor).map_err(fail)?.swap_remove(h.index);
                let l = l_series(&sys.twist(&psi).map_err(fail)?, self.s, 2 * self.terms);
                let margin = l.value.norm() - l.tail_bound - self.threshold;
                Ok(Check::verdict(format!("stable.r{}.{}", h.conductor, h.index), l.value.norm(), margin > 0.0)
                    .with("abs_value", h.abs_value)
                    .with("tail_bound", h.tail_bound)
                    .with("doubled_abs_value", l.value.norm())
                    .with("doubled_tail_bound", l.tail_bound))
            })
            .collect();
        for c in rechecks {
            checks.push(c?);
        }
        Ok(checks)
    }
}
