use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA_MAX: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub sigma: f64,
    pub sigma_max: f64,
}

impl NoiseLevel {
    pub fn new(sigma: f64, sigma_max: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        if !(sigma_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma_max must be > 0, got {sigma_max}"
            )));
        }
        Ok(NoiseLevel { sigma, sigma_max })
    }

    /// `sigma_max = 3.0`.
    pub fn with_default_max(sigma: f64) -> Result<Self> {
        Self::new(sigma, DEFAULT_SIGMA_MAX)
    }

    pub fn clean() -> Self {
        NoiseLevel {
            sigma: 0.0,
            sigma_max: DEFAULT_SIGMA_MAX,
        }
    }

    pub fn confidence(&self) -> f64 {
        confidence(self)
    }
}

/// `c(σ) = 1[σ < σ_max] · (1 − σ/σ_max)₊²`
pub fn confidence(n: &NoiseLevel) -> f64 {
    if n.sigma >= n.sigma_max {
        return 0.0;
    }
    let r = (1.0 - n.sigma / n.sigma_max).max(0.0);
    r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(NoiseLevel::new(0.0, 3.0).unwrap().confidence(), 1.0);
        assert_eq!(NoiseLevel::new(3.0, 3.0).unwrap().confidence(), 0.0);
        assert_eq!(NoiseLevel::new(1.5, 3.0).unwrap().confidence(), 0.25);
        assert_eq!(NoiseLevel::new(7.0, 3.0).unwrap().confidence(), 0.0);
        assert!(NoiseLevel::new(-0.1, 3.0).is_err());
        assert!(NoiseLevel::new(0.1, 0.0).is_err());
    }

    #[test]
    fn continuous_at_sigma_max() {
        let below = NoiseLevel::new(3.0 - 1e-9, 3.0).unwrap().confidence();
        assert!(below < 1e-18);
    }

    proptest! {
        #[test]
        fn nonincreasing(a in 0.0f64..5.0, b in 0.0f64..5.0, max in 0.1f64..4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let cl = NoiseLevel::new(lo, max).unwrap().confidence();
            let ch = NoiseLevel::new(hi, max).unwrap().confidence();
            prop_assert!(cl >= ch);
            prop_assert!((0.0..=1.0).contains(&cl));
        }

        #[test]
        fn quarter_at_half_max(max in 0.01f64..100.0) {
            prop_assert_eq!(NoiseLevel::new(max / 2.0, max).unwrap().confidence(), 0.25);
        }
    }
}
