use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_d: f64,
    pub lambda_tau: f64,
    /// Iterations over which both auxiliary weights ramp linearly from 0.
    pub warmup_iters: u64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_d: 0.3,
            lambda_tau: 0.06,
            warmup_iters: 1000,
        }
    }
}

impl LossWeights {
    pub fn ramp(&self, iter: u64) -> f64 {
        if self.warmup_iters == 0 {
            1.0
        } else {
            (iter as f64 / self.warmup_iters as f64).min(1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_visual: f64,
    pub l_depth: f64,
    pub l_track: f64,
    pub l_total: f64,
    pub sigma: f64,
    pub iter: u64,
}

/// `l_total = l_visual + ramp · (λ_d · l_depth + λ_τ · l_track)`.
pub fn total_loss(
    l_visual: f64,
    l_depth: f64,
    l_track: f64,
    weights: &LossWeights,
    iter: u64,
    sigma: f64,
) -> LossReport {
    let aux = weights.lambda_d * l_depth + weights.lambda_tau * l_track;
    LossReport {
        l_visual,
        l_depth,
        l_track,
        l_total: l_visual + weights.ramp(iter) * aux,
        sigma,
        iter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let w = LossWeights::default();
        let r = total_loss(1.0, 0.5, 0.5, &w, 1000, 0.0);
        assert!((r.l_total - 1.18).abs() < 1e-15);
        let r = total_loss(1.0, 0.5, 0.5, &w, 5000, 0.0);
        assert!((r.l_total - 1.18).abs() < 1e-15);
        let r = total_loss(1.0, 0.5, 0.5, &w, 500, 0.0);
        assert!((r.l_total - 1.09).abs() < 1e-15);
        let r = total_loss(0.7, 0.0, 0.0, &w, 10, 0.0);
        assert_eq!(r.l_total, 0.7);
        assert_eq!(total_loss(1.0, 1.0, 1.0, &w, 0, 0.0).l_total, 1.0);
    }

    #[test]
    fn report_json_fields() {
        let r = total_loss(1.0, 0.5, 0.25, &LossWeights::default(), 3, 0.5);
        let v = serde_json::to_value(r).unwrap();
        for k in ["l_visual", "l_depth", "l_track", "l_total", "sigma", "iter"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
