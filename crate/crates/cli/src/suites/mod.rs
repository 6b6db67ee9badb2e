//! Verification suites behind the subcommands.

mod analytic;
mod characters;
mod kato;
mod trace;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use spectral_forge::numeric::C64;

use crate::report::Check;

pub use analytic::{BesselSuite, PsSuite, RankinSuite, TwistScanSuite};
pub use characters::CharactersSuite;
pub use kato::{KatoSuite, DEFAULT_EPS_GRID};
pub use trace::{SmoothSuite, TraceSuite};

/// Input or evaluation failure that prevents a suite from producing checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteError(pub String);

impl fmt::Display for SuiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SuiteError {}

pub fn fail(e: impl fmt::Display) -> SuiteError {
    SuiteError(e.to_string())
}

pub struct Context {
    pub seed: u64,
}

impl Context {
    /// Independent generator per purpose, so suites stay stable when one
    /// part draws more numbers.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;

    /// Echo of the parameters, written to the report header.
    fn parameters(&self) -> Value;

    /// Checks in a fixed order with unique names.
    fn run(&self, ctx: &Context) -> Result<Vec<Check>, SuiteError>;
}

pub fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Parses `a`, `bi`, `a+bi`, `a-i` and the like.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse '{text}' as a complex number");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // the split point is the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = C64::new;
        assert_eq!(parse_complex("2.5").unwrap(), c(2.5, 0.0));
        assert_eq!(parse_complex("2.5+1i").unwrap(), c(2.5, 1.0));
        assert_eq!(parse_complex("2.5+i").unwrap(), c(2.5, 1.0));
        assert_eq!(parse_complex("2.5 - 0.5i").unwrap(), c(2.5, -0.5));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("3i").unwrap(), c(0.0, 3.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex("-2-3i").unwrap(), c(-2.0, -3.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+xi").is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        use rand::Rng;
        let ctx = Context { seed: 9 };
        let a: u64 = ctx.rng(2).gen();
        let b: u64 = ctx.rng(2).gen();
        let c: u64 = ctx.rng(3).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
