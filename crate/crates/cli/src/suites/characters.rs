use serde_json::{json, Value};
use spectral_forge::arith::{enumerate_characters, gauss_sum, totient};
use spectral_forge::numeric::{ComplexSum, C64};

use super::{fail, pair, Context, Suite, SuiteError};
use crate::report::Check;

/// Dump of the characters mod `q`. Primitive characters are checked against
/// `|τ(χ)| = √q`, the others against `Σ_a χ(a) = φ(q)·[χ principal]`.
pub struct CharactersSuite {
    pub q: u64,
}

impl Suite for CharactersSuite {
    fn name(&self) -> &'static str {
        "characters"
    }

    fn parameters(&self) -> Value {
        json!({"q": self.q})
    }

    fn run(&self, _ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        let chars = enumerate_characters(self.q).map_err(fail)?;
        let phi = totient(self.q);
        let mut checks = vec![Check::verdict("count", chars.len() as f64, chars.len() as u64 == phi).with("totient", phi)];
        for (i, chi) in chars.iter().enumerate() {
            let values: Vec<Value> = chi.values().iter().map(|&z| pair(z)).collect();
            let check = if chi.is_primitive() {
                let tau = gauss_sum(chi);
                let dev = (tau.norm() - (self.q as f64).sqrt()).abs();
                Check::at_most(format!("char{i}"), dev, 1e-10).with("gauss_sum", pair(tau))
            } else {
                let mut sum = ComplexSum::new();
                chi.values().iter().for_each(|&z| sum.add(z));
                let expected = if chi.is_principal() { phi as f64 } else { 0.0 };
                let dev = (sum.value() - C64::new(expected, 0.0)).norm();
                Check::at_most(format!("char{i}"), dev, 1e-10)
            };
            checks.push(
                check
                    .with("parity", chi.parity())
                    .with("conductor", chi.conductor())
                    .with("primitive", chi.is_primitive())
                    .with("order", chi.order())
                    .with("values", values),
            );
        }
        Ok(checks)
    }
}
