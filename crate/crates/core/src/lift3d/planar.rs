use nalgebra::{Matrix3, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use crate::egomotion::{ransac, RansacModel};
use crate::sphere::Vec3;

/// Points closer than this (relative to the plane offset scale) are treated
/// as already on the plane and left untouched, which makes a second pass a
/// no-op.
const ON_PLANE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarParams {
    /// Snap distance in meters; `None` uses 1% of the bounding-box diagonal.
    pub eps: Option<f64>,
    pub k_planes: usize,
    /// Planes supported by fewer points than this fraction of the cloud
    /// (and never fewer than 3) stop the search.
    pub min_support_fraction: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for PlanarParams {
    fn default() -> Self {
        PlanarParams {
            eps: None,
            k_planes: 8,
            min_support_fraction: 0.01,
            iterations: 256,
            seed: 0,
        }
    }
}

/// `n · x = d` with unit `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        p - self.distance(p) * self.normal
    }

    /// Least-squares plane through `points` (smallest principal axis).
    pub fn fit(points: &[Vec3]) -> Option<Plane> {
        if points.len() < 3 {
            return None;
        }
        let mean = points.iter().sum::<Vec3>() / points.len() as f64;
        let mut cov = Matrix3::zeros();
        for p in points {
            let c = p - mean;
            cov += c * c.transpose();
        }
        let eig = SymmetricEigen::new(cov);
        let k = eig.eigenvalues.imin();
        let normal = eig.eigenvectors.column(k).into_owned();
        Some(Plane {
            normal,
            offset: normal.dot(&mean),
        })
    }
}

impl RansacModel for Plane {
    type Datum = Vec3;
    const SAMPLE_SIZE: usize = 3;

    fn fit(data: &[Vec3], sample: &[usize]) -> Option<Self> {
        let (a, b, c) = (data[sample[0]], data[sample[1]], data[sample[2]]);
        let n = (b - a).cross(&(c - a));
        let scale = (b - a).norm() * (c - a).norm();
        if !(n.norm() > 1e-12 * scale) {
            return None;
        }
        let normal = n.normalize();
        Some(Plane {
            normal,
            offset: normal.dot(&a),
        })
    }

    fn residual(&self, p: &Vec3) -> f64 {
        self.distance(p).abs()
    }
}

/// Snaps near-coplanar points onto up to `k_planes` RANSAC planes.
///
/// Each round fits a plane to the remaining pool, refits it by least squares
/// to its consensus, projects every pool point within `eps` onto it, and
/// removes those points from the pool. A point near two planes therefore goes
/// to the one found first. Returns the regularized cloud and the planes.
pub fn planar_regularize(pc: &PointCloud, params: &PlanarParams) -> (PointCloud, Vec<Plane>) {
    let mut out = pc.clone();
    let mut planes = Vec::new();
    let n = pc.len();
    if n < 3 {
        return (out, planes);
    }
    let eps = params.eps.unwrap_or(0.01 * pc.bbox_diagonal());
    if !(eps > 0.0) {
        return (out, planes);
    }
    let min_support = ((params.min_support_fraction * n as f64).ceil() as usize).max(3);
    let xyz: Vec<Vec3> = pc.points.iter().map(|p| p.xyz).collect();
    let mut pool: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.k_planes {
        let Some(best) = ransac::<Plane>(&xyz, &pool, params.iterations, eps, &mut rng) else {
            break;
        };
        if best.inliers.len() < min_support {
            break;
        }
        let support: Vec<Vec3> = best.inliers.iter().map(|&i| xyz[i]).collect();
        let plane = Plane::fit(&support).unwrap_or(best.model);
        let tol = ON_PLANE_TOL * (1.0 + plane.offset.abs());
        let mut rest = Vec::with_capacity(pool.len());
        for &i in &pool {
            let d = plane.distance(&xyz[i]);
            if d.abs() < eps {
                if d.abs() > tol {
                    out.points[i].xyz = plane.project(&xyz[i]);
                }
            } else {
                rest.push(i);
            }
        }
        pool = rest;
        planes.push(plane);
    }
    (out, planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift3d::CloudPoint;
    use rand::Rng;

    fn cloud(points: Vec<Vec3>) -> PointCloud {
        PointCloud {
            points: points
                .into_iter()
                .map(|xyz| CloudPoint {
                    xyz,
                    rgb: [0.0; 3],
                    source: None,
                })
                .collect(),
        }
    }

    #[test]
    fn points_on_a_plane_are_unchanged() {
        let pts: Vec<Vec3> = (0..100)
            .map(|i| Vec3::new((i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1, 2.0))
            .collect();
        let pc = cloud(pts);
        let (out, planes) = planar_regularize(&pc, &PlanarParams::default());
        assert_eq!(out, pc);
        assert_eq!(planes.len(), 1);
    }

    #[test]
    fn noisy_plane_is_flattened() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let eps = 0.02;
        let pts: Vec<Vec3> = (0..400)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    1.0 + rng.random_range(-0.45..0.45) * eps,
                )
            })
            .collect();
        let params = PlanarParams {
            eps: Some(eps),
            ..Default::default()
        };
        let (out, planes) = planar_regularize(&cloud(pts), &params);
        let plane = planes[0];
        for p in &out.points {
            assert!(plane.distance(&p.xyz).abs() < 1e-9);
        }
    }

    #[test]
    fn tiny_clouds_pass_through() {
        let pc = cloud(vec![Vec3::x(), Vec3::y()]);
        let (out, planes) = planar_regularize(&pc, &PlanarParams::default());
        assert_eq!(out, pc);
        assert!(planes.is_empty());
    }
}
