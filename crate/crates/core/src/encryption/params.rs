use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Key standard deviation `sigma` per quadrature and the truncation
/// tolerance. `x = 2 sigma^2 / (1 + 2 sigma^2)` and `y = 1 / (2 sigma^2)`
/// are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncryptionParams {
    sigma: f64,
    tail_eps: f64,
}

impl EncryptionParams {
    pub const DEFAULT_TAIL_EPS: f64 = 1e-10;

    pub fn new(sigma: f64) -> Result<Self> {
        Self::with_tail_eps(sigma, Self::DEFAULT_TAIL_EPS)
    }

    pub fn from_sigma_sq(sigma_sq: f64) -> Result<Self> {
        Self::new(sigma_sq.sqrt())
    }

    pub fn with_tail_eps(sigma: f64, tail_eps: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !(tail_eps.is_finite() && tail_eps > 0.0 && tail_eps < 1.0) {
            return Err(Error::InvalidParameter(format!("tail_eps must lie in (0, 1), got {tail_eps}")));
        }
        Ok(Self { sigma, tail_eps })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn tail_eps(&self) -> f64 {
        self.tail_eps
    }

    pub fn x(&self) -> f64 {
        let s2 = 2.0 * self.sigma_sq();
        s2 / (1.0 + s2)
    }

    pub fn y(&self) -> f64 {
        1.0 / (2.0 * self.sigma_sq())
    }

    /// `ln x`, accurate when `x` is close to one.
    pub fn ln_x(&self) -> f64 {
        -self.y().ln_1p()
    }

    pub fn ln_y(&self) -> f64 {
        -(2.0 * self.sigma_sq()).ln()
    }

    /// `ln(1 + 2 sigma^2)`.
    pub fn ln_norm(&self) -> f64 {
        (2.0 * self.sigma_sq()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = EncryptionParams::from_sigma_sq(2.0).unwrap();
        assert!((p.x() - 0.8).abs() < 1e-15);
        assert!((p.y() - 0.25).abs() < 1e-15);
        assert!((p.ln_x() - 0.8f64.ln()).abs() < 1e-15);
        assert_eq!(p.tail_eps(), 1e-10);
        let big = EncryptionParams::from_sigma_sq(1e12).unwrap();
        assert!(big.x() < 1.0 && big.x() > 0.0);
        assert!((big.ln_x() + 5e-13).abs() < 1e-24);
    }

    #[test]
    fn rejects_invalid() {
        assert!(EncryptionParams::new(0.0).is_err());
        assert!(EncryptionParams::new(-1.0).is_err());
        assert!(EncryptionParams::new(f64::NAN).is_err());
        assert!(EncryptionParams::with_tail_eps(1.0, 0.0).is_err());
    }
}
