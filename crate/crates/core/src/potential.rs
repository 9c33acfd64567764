use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// External potential U(x). Per-axis lists are indexed by grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    /// Σ_d ½·stiffness_d·(x_d − center_d)².
    Harmonic { stiffness: Vec<f64>, center: Vec<f64> },
    /// Σ_d Σ_k coeffs_d[k]·x_d^k.
    Polynomial { coeffs: Vec<Vec<f64>> },
    /// height·exp(−|x − center|²/(2·width²)).
    GaussianBarrier {
        height: f64,
        center: Vec<f64>,
        width: f64,
    },
}

impl PotentialSpec {
    pub fn harmonic_1d(stiffness: f64, center: f64) -> Self {
        PotentialSpec::Harmonic {
            stiffness: vec![stiffness],
            center: vec![center],
        }
    }

    /// Check the per-axis lists against the grid dimension.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let d = grid.ndim();
        let bad = |what: &str, n: usize| {
            Err(Error::InvalidParams(format!(
                "potential {what} has {n} entries for a {d}-dimensional grid"
            )))
        };
        match self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::Harmonic { stiffness, center } => {
                if stiffness.len() != d {
                    return bad("stiffness", stiffness.len());
                }
                if center.len() != d {
                    return bad("center", center.len());
                }
                Ok(())
            }
            PotentialSpec::Polynomial { coeffs } => {
                if coeffs.len() != d {
                    return bad("coeffs", coeffs.len());
                }
                Ok(())
            }
            PotentialSpec::GaussianBarrier { center, width, .. } => {
                if center.len() != d {
                    return bad("center", center.len());
                }
                if *width <= 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "barrier width must be positive, got {width}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { stiffness, center } => x
                .iter()
                .zip(stiffness.iter().zip(center))
                .map(|(&xi, (&k, &c))| 0.5 * k * (xi - c) * (xi - c))
                .sum(),
            PotentialSpec::Polynomial { coeffs } => x
                .iter()
                .zip(coeffs)
                .map(|(&xi, cs)| cs.iter().rev().fold(0.0, |acc, &c| acc * xi + c))
                .sum(),
            PotentialSpec::GaussianBarrier {
                height,
                center,
                width,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                height * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }

    /// U at every grid point.
    pub fn evaluate(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        self.validate(grid)?;
        let mut x = vec![0.0; grid.ndim()];
        let mut out = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            for (a, xa) in x.iter_mut().enumerate() {
                *xa = grid.coord(k, a);
            }
            let u = self.value_at(&x);
            if !u.is_finite() {
                return Err(Error::NonFinitePotential { index: k });
            }
            out.push(u);
        }
        Ok(out)
    }
}
