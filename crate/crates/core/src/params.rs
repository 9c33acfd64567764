use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass and quantum strength of one degree of freedom, in units with ħ = 1.
///
/// `lambda = 0` gives classical Hamilton-Jacobi dynamics for that degree of
/// freedom, `lambda = 1` the Schrödinger case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DofParams {
    pub mass: f64,
    pub lambda: f64,
}

impl DofParams {
    pub fn new(mass: f64, lambda: f64) -> Result<Self> {
        let p = DofParams { mass, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn quantum(mass: f64) -> Self {
        DofParams { mass, lambda: 1.0 }
    }

    pub fn classical(mass: f64) -> Self {
        DofParams { mass, lambda: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// The common lambda of all degrees of freedom, if they share one.
pub fn uniform_lambda(dofs: &[DofParams]) -> Option<f64> {
    let first = dofs.first()?.lambda;
    dofs.iter().all(|d| d.lambda == first).then_some(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DofParams::new(1.0, 0.0).is_ok());
        assert!(DofParams::new(0.0, 1.0).is_err());
        assert!(DofParams::new(1.0, -0.1).is_err());
        assert!(DofParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn uniform() {
        let q = DofParams::quantum(1.0);
        let c = DofParams::classical(1.0);
        assert_eq!(uniform_lambda(&[q, q]), Some(1.0));
        assert_eq!(uniform_lambda(&[q, c]), None);
        assert_eq!(uniform_lambda(&[]), None);
    }
}
