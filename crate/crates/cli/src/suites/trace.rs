use std::path::PathBuf;

use serde_json::{json, Value};
use spectral_forge::numeric::C64;
use spectral_forge::special::{QuadratureSpec, Scheme};
use spectral_forge::spectral::{
    elliptic_term, geometric_side, hyperbolic_term, identity_term, parabolic_terms, sandwich_check,
    smoothed_counting, GaussianTestFunction, GeodesicClassData, GeometricSide, LinearCombination, SpectrumList,
};

use super::{fail, pair, Context, Suite, SuiteError};
use crate::report::Check;

fn read(path: &PathBuf) -> Result<String, SuiteError> {
    std::fs::read_to_string(path).map_err(|e| SuiteError(format!("{}: {e}", path.display())))
}

fn scaled_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn side_json(g: &GeometricSide) -> Value {
    json!({
        "identity": pair(g.identity),
        "hyperbolic": pair(g.hyperbolic),
        "elliptic": pair(g.elliptic),
        "parabolic": pair(g.parabolic),
        "total": pair(g.total),
    })
}

/// Geometric side for the Gaussian `h(r) = e^{−zr²}` with scheme agreement,
/// linearity and assembly checks.
pub struct TraceSuite {
    pub classes: PathBuf,
    pub z: C64,
    pub k_max: usize,
}

impl Suite for TraceSuite {
    fn name(&self) -> &'static str {
        "trace"
    }

    fn parameters(&self) -> Value {
        json!({"classes": self.classes.display().to_string(), "z": pair(self.z), "k_max": self.k_max})
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        let data = GeodesicClassData::from_json(&read(&self.classes)?).map_err(fail)?;
        let tf = GaussianTestFunction::new(self.z).map_err(fail)?;
        let other = GaussianTestFunction::new(2.0 * self.z).map_err(fail)?;
        let de = QuadratureSpec::default().with_scheme(Scheme::DoubleExponential);
        let gk = QuadratureSpec::default().with_scheme(Scheme::GaussKronrod);
        let mut checks = Vec::new();

        let side = geometric_side(&data, &tf, self.k_max, &de).map_err(fail)?;
        let assembly_gap = (side.total - side.component_sum()).norm();
        checks.push(Check::verdict("assembly", assembly_gap, assembly_gap == 0.0).with("side", side_json(&side)));

        let pairs = [
            (
                "identity",
                identity_term(data.area, &tf, &de).map_err(fail)?,
                identity_term(data.area, &tf, &gk).map_err(fail)?,
            ),
            (
                "elliptic",
                elliptic_term(&data.elliptic, &tf, &de).map_err(fail)?,
                elliptic_term(&data.elliptic, &tf, &gk).map_err(fail)?,
            ),
            (
                "parabolic",
                parabolic_terms(&data.cusps, &tf, &de).map_err(fail)?,
                parabolic_terms(&data.cusps, &tf, &gk).map_err(fail)?,
            ),
        ];
        for (name, a, b) in pairs {
            checks.push(
                Check::at_most(format!("{name}.schemes"), scaled_gap(a, b), 1e-10)
                    .with("double_exponential", pair(a))
                    .with("gauss_kronrod", pair(b)),
            );
        }
        let short = hyperbolic_term(&data.hyperbolic, &tf, self.k_max);
        let long = hyperbolic_term(&data.hyperbolic, &tf, 2 * self.k_max);
        checks.push(Check::at_most("hyperbolic.truncation", scaled_gap(short, long), 1e-12));

        let (a, b) = (C64::new(0.7, 0.0), C64::new(-1.3, 0.4));
        let comb = LinearCombination::new(vec![(a, tf), (b, other)]);
        let s1 = side;
        let s2 = geometric_side(&data, &other, self.k_max, &de).map_err(fail)?;
        let sc = geometric_side(&data, &comb, self.k_max, &de).map_err(fail)?;
        let parts = [
            ("identity", s1.identity, s2.identity, sc.identity),
            ("hyperbolic", s1.hyperbolic, s2.hyperbolic, sc.hyperbolic),
            ("elliptic", s1.elliptic, s2.elliptic, sc.elliptic),
            ("parabolic", s1.parabolic, s2.parabolic, sc.parabolic),
            ("total", s1.total, s2.total, sc.total),
        ];
        for (name, x, y, combined) in parts {
            checks.push(Check::at_most(
                format!("{name}.linearity"),
                scaled_gap(combined, a * x + b * y),
                1e-10,
            ));
        }
        Ok(checks)
    }
}

/// `N_w(T)` of a spectrum file, with the mean-value sandwich when `delta` is set.
pub struct SmoothSuite {
    pub spectrum: PathBuf,
    pub t: f64,
    pub w: f64,
    pub delta: Option<f64>,
}

impl Suite for SmoothSuite {
    fn name(&self) -> &'static str {
        "smooth"
    }

    fn parameters(&self) -> Value {
        json!({
            "spectrum": self.spectrum.display().to_string(),
            "T": self.t,
            "w": self.w,
            "delta": self.delta,
        })
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        if !(self.w >= 0.0 && self.t.is_finite()) {
            return Err(SuiteError(format!("need w >= 0 and finite T, got w = {}, T = {}", self.w, self.t)));
        }
        let spectrum = SpectrumList::from_json(&read(&self.spectrum)?).map_err(fail)?;
        let value = smoothed_counting(&spectrum, self.t, self.w);
        let mut checks = vec![Check::verdict("value", value, value.is_finite()).with("eigenvalues", spectrum.eigenvalues().len())];
        if let Some(delta) = self.delta {
            let r = sandwich_check(&spectrum, self.t, delta).map_err(fail)?;
            checks.push(Check::verdict("sandwich.lower", r.quotient, r.lower_holds).with("n0", r.n0));
            checks.push(Check::verdict("sandwich.upper", r.quotient, r.upper_holds).with("n0_shifted", r.n0_shifted));
        }
        Ok(checks)
    }
}
