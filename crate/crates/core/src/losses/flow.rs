//! Rectified-flow operators on caller-supplied arrays.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::fsum;

/// Clean latent, noise, and the noisy latent between them.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTriple {
    pub z0: Vec<f64>,
    pub eps: Vec<f64>,
    pub z_sigma: Vec<f64>,
}

impl LatentTriple {
    /// Forward process `z_σ = (1 − σ)·z₀ + σ·ε`.
    pub fn forward(z0: Vec<f64>, eps: Vec<f64>, sigma: f64) -> Result<Self> {
        same_len(z0.len(), eps.len(), "z0/eps")?;
        let z_sigma = z0
            .iter()
            .zip(&eps)
            .map(|(z, e)| (1.0 - sigma) * z + sigma * e)
            .collect();
        Ok(LatentTriple { z0, eps, z_sigma })
    }

    /// Straight-path velocity target `ε − z₀`.
    pub fn velocity_target(&self) -> Vec<f64> {
        self.eps.iter().zip(&self.z0).map(|(e, z)| e - z).collect()
    }
}

fn same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!("{what}: {a} vs {b} elements")));
    }
    Ok(())
}

/// One-step clean estimate `ẑ₀ = z_σ − σ·v`.
pub fn clean_estimate(z_sigma: &[f64], sigma: f64, v: &[f64]) -> Result<Vec<f64>> {
    same_len(z_sigma.len(), v.len(), "z_sigma/v")?;
    Ok(z_sigma.iter().zip(v).map(|(z, v)| z - sigma * v).collect())
}

/// Unweighted mean squared error against `ε − z₀`.
pub fn velocity_loss(v_pred: &[f64], triple: &LatentTriple) -> Result<f64> {
    same_len(v_pred.len(), triple.z0.len(), "v_pred/z0")?;
    same_len(triple.eps.len(), triple.z0.len(), "eps/z0")?;
    if v_pred.is_empty() {
        return Err(Error::InvalidArgument(
            "velocity loss on an empty array".into(),
        ));
    }
    let sq = v_pred
        .iter()
        .zip(triple.eps.iter().zip(&triple.z0))
        .map(|(v, (e, z))| {
            let r = v - (e - z);
            r * r
        });
    Ok(fsum(sq) / v_pred.len() as f64)
}

/// Draws `σ = exp(g)`, `g ~ N(0, 1)`.
pub fn sample_sigma(rng: &mut impl Rng) -> f64 {
    let g: f64 = StandardNormal.sample(rng);
    g.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triple(sigma: f64) -> LatentTriple {
        let z0 = vec![0.5, -1.25, 2.0, 0.0];
        let eps = vec![-0.3, 0.7, 1.1, -2.0];
        LatentTriple::forward(z0, eps, sigma).unwrap()
    }

    #[test]
    fn clean_estimate_identities() {
        for sigma in [0.0, 0.2, 0.5, 0.93, 1.0] {
            let t = triple(sigma);
            let v = t.velocity_target();
            let z0 = clean_estimate(&t.z_sigma, sigma, &v).unwrap();
            for (a, b) in z0.iter().zip(&t.z0) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        let t = triple(0.4);
        assert_eq!(
            clean_estimate(&t.z_sigma, 0.0, &[1.0; 4]).unwrap(),
            t.z_sigma
        );
        assert_eq!(
            clean_estimate(&t.z_sigma, 0.4, &[0.0; 4]).unwrap(),
            t.z_sigma
        );
        assert!(clean_estimate(&t.z_sigma, 0.4, &[0.0; 3]).is_err());
    }

    #[test]
    fn velocity_loss_examples() {
        let t = triple(0.3);
        let target = t.velocity_target();
        assert_eq!(velocity_loss(&target, &t).unwrap(), 0.0);
        let shifted: Vec<f64> = target.iter().map(|x| x + 1.0).collect();
        assert!((velocity_loss(&shifted, &t).unwrap() - 1.0).abs() < 1e-15);
        assert!(velocity_loss(&[0.0], &t).is_err());
    }

    #[test]
    fn velocity_loss_matches_naive_mean_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(1..500);
            let z0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let eps: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let t = LatentTriple::forward(z0.clone(), eps.clone(), 0.5).unwrap();
            let mut naive = 0.0;
            for i in 0..n {
                let d = v[i] - eps[i] + z0[i];
                naive += d * d;
            }
            naive /= n as f64;
            assert!((velocity_loss(&v, &t).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_sampling_is_seeded() {
        let a: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(5);
            (0..10).map(|_| sample_sigma(&mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(5);
            (0..10).map(|_| sample_sigma(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|&s| s > 0.0));
    }
}
