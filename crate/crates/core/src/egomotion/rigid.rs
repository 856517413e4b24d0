use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ransac::{ransac, RansacModel};
use super::umeyama::{fit, umeyama, Correspondences};
use crate::error::{Error, Result};
use crate::numeric::median_in_place;
use crate::pose::RigidPose;
use crate::sphere::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    pub iterations: usize,
    /// Absolute inlier threshold in meters. `None` uses
    /// `relative_threshold` times the median point norm of the pair.
    pub inlier_threshold: Option<f64>,
    pub relative_threshold: f64,
    pub min_inliers: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            iterations: 256,
            inlier_threshold: None,
            relative_threshold: 0.02,
            min_inliers: 6,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "RANSAC needs at least one iteration".into(),
            ));
        }
        let positive = match self.inlier_threshold {
            Some(t) => t > 0.0,
            None => self.relative_threshold > 0.0,
        };
        if !positive {
            return Err(Error::InvalidArgument(
                "inlier threshold must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Threshold in meters for `c`. Points are in camera coordinates, so their
    /// norms are the lifted radial depths.
    pub fn threshold_for(&self, c: &Correspondences) -> f64 {
        if let Some(t) = self.inlier_threshold {
            return t;
        }
        let mut norms: Vec<f64> = c.src.iter().chain(&c.dst).map(|p| p.norm()).collect();
        let median = median_in_place(&mut norms).unwrap_or(0.0);
        self.relative_threshold * median
    }
}

/// Result of a robust rigid fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidFit {
    pub pose: RigidPose,
    pub inliers: Vec<bool>,
}

impl RigidFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

struct RigidModel(RigidPose);

impl RansacModel for RigidModel {
    type Datum = (Vec3, Vec3);
    const SAMPLE_SIZE: usize = 3;

    fn fit(data: &[(Vec3, Vec3)], sample: &[usize]) -> Option<Self> {
        let src: Vec<Vec3> = sample.iter().map(|&i| data[i].0).collect();
        let dst: Vec<Vec3> = sample.iter().map(|&i| data[i].1).collect();
        fit(&src, &dst, false).ok().map(|(p, _)| RigidModel(p))
    }

    fn residual(&self, (src, dst): &(Vec3, Vec3)) -> f64 {
        (dst - self.0.apply(src)).norm()
    }
}

/// Robust rigid alignment `dst ≈ R·src + t` with RANSAC over minimal
/// three-point fits, followed by a least-squares refit on the consensus set.
pub fn ransac_rigid(c: &Correspondences, params: &RansacParams) -> Result<RigidFit> {
    params.validate()?;
    if c.len() < 3 {
        return Err(Error::DegenerateCorrespondences);
    }
    let threshold = params.threshold_for(c);
    let data: Vec<(Vec3, Vec3)> = c.src.iter().copied().zip(c.dst.iter().copied()).collect();
    let pool: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let best = ransac::<RigidModel>(&data, &pool, params.iterations, threshold, &mut rng);
    let best_count = best.as_ref().map_or(0, |b| b.inliers.len());
    let Some(best) = best.filter(|b| b.inliers.len() >= params.min_inliers.max(3)) else {
        return Err(Error::NoConsensus {
            best: best_count,
            required: params.min_inliers,
        });
    };

    let pose = umeyama(&c.subset(&best.inliers)).unwrap_or(best.model.0);
    let inliers = data
        .iter()
        .map(|d| RigidModel(pose).residual(d) < threshold)
        .collect();
    Ok(RigidFit { pose, inliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use rand::Rng;

    fn random_points(n: usize, rng: &mut impl Rng) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(1.0..5.0),
                )
            })
            .collect()
    }

    #[test]
    fn outlier_free_matches_umeyama() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Rotation3::from_euler_angles(0.05, 0.2, -0.1).into_inner();
        let t = Vec3::new(0.1, 0.0, -0.2);
        let src = random_points(50, &mut rng);
        let dst = src.iter().map(|p| r * p + t).collect();
        let c = Correspondences::new(src, dst).unwrap();
        let fit = ransac_rigid(&c, &RansacParams::default()).unwrap();
        assert_eq!(fit.inlier_count(), 50);
        let direct = umeyama(&c).unwrap();
        assert!((fit.pose.rotation - direct.rotation).amax() < 1e-12);
        assert!((fit.pose.translation - direct.translation).norm() < 1e-12);
    }

    #[test]
    fn deterministic_for_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let src = random_points(40, &mut rng);
        let dst = random_points(40, &mut rng);
        let c = Correspondences::new(src, dst).unwrap();
        let p = RansacParams {
            min_inliers: 3,
            ..Default::default()
        };
        let a = ransac_rigid(&c, &p);
        let b = ransac_rigid(&c, &p);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn rejects_invalid_params() {
        let c = Correspondences::new(vec![Vec3::x(); 3], vec![Vec3::x(); 3]).unwrap();
        let p = RansacParams {
            iterations: 0,
            ..Default::default()
        };
        assert!(matches!(
            ransac_rigid(&c, &p),
            Err(Error::InvalidArgument(_))
        ));
        let p = RansacParams {
            inlier_threshold: Some(0.0),
            ..Default::default()
        };
        assert!(ransac_rigid(&c, &p).is_err());
    }
}
