use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use spectral_forge::kato::{contour_projection, eigen_projection, expansion_check, random_family};

use super::{fail, Context, Suite, SuiteError};
use crate::report::Check;

pub const DEFAULT_EPS_GRID: [f64; 5] = [1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683794e-3, 1e-3];

/// Expansion checks on random symmetric families `T + εT₁ + ε²T₂`.
pub struct KatoSuite {
    pub dim: usize,
    pub families: usize,
    pub eps_grid: Vec<f64>,
}

impl Suite for KatoSuite {
    fn name(&self) -> &'static str {
        "kato"
    }

    fn parameters(&self) -> Value {
        json!({"dim": self.dim, "families": self.families, "eps_grid": self.eps_grid})
    }

    fn run(&self, ctx: &Context) -> Result<Vec<Check>, SuiteError> {
        if self.dim < 2 {
            return Err(SuiteError("--dim must be at least 2".into()));
        }
        let mut rng = ctx.rng(0);
        let families: Vec<_> = (0..self.families)
            .map(|_| {
                let multiplicity = rng.gen_range(1..=self.dim / 2);
                random_family(&mut rng, self.dim, multiplicity)
            })
            .collect();
        let per_family: Vec<Result<Vec<Check>, SuiteError>> = families
            .par_iter()
            .enumerate()
            .map(|(i, (fam, win))| {
                let rep = expansion_check(fam, win, &self.eps_grid).map_err(fail)?;
                let eps = self.eps_grid[0];
                let contour = contour_projection(fam, eps, win).map_err(fail)?;
                let direct = eigen_projection(&fam.member(eps), win);
                let tag = format!("family{i:03}");
                Ok(vec![
                    Check::at_least(format!("{tag}.eigen_slope"), rep.eigen_slope, 1.9)
                        .with("multiplicity", rep.multiplicity)
                        .with("mu1", rep.mu1.clone())
                        .with("eigen_residuals", rep.eigen_residuals.clone()),
                    Check::at_most(format!("{tag}.mu1"), rep.mu1_discrepancy, 1e-6),
                    Check::at_most(format!("{tag}.projection"), (&contour.matrix - &direct).norm(), 1e-8)
                        .with("contour_points", contour.points)
                        .with("rank", contour.rank),
                    Check::at_most(format!("{tag}.identity"), rep.projection_identity_residual, 1e-6),
                    Check::verdict(
                        format!("{tag}.forward_slope"),
                        rep.forward_slope,
                        (0.8..=1.2).contains(&rep.forward_slope),
                    )
                    .with("forward_residuals", rep.forward_residuals.clone()),
                ])
            })
            .collect();
        let mut checks = Vec::new();
        for c in per_family {
            checks.extend(c?);
        }
        Ok(checks)
    }
}
