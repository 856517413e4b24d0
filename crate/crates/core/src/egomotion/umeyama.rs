use nalgebra::{Matrix3, SVD};

use crate::error::{Error, Result};
use crate::pose::RigidPose;
use crate::sphere::Vec3;

/// Paired point lists; `dst[i]` corresponds to `src[i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Correspondences {
    pub src: Vec<Vec3>,
    pub dst: Vec<Vec3>,
}

impl Correspondences {
    pub fn new(src: Vec<Vec3>, dst: Vec<Vec3>) -> Result<Self> {
        if src.len() != dst.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} source vs {} destination points",
                src.len(),
                dst.len()
            )));
        }
        Ok(Correspondences { src, dst })
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Correspondences {
        Correspondences {
            src: idx.iter().map(|&i| self.src[i]).collect(),
            dst: idx.iter().map(|&i| self.dst[i]).collect(),
        }
    }
}

/// Least-squares rigid transform with `dst ≈ R·src + t`.
pub fn umeyama(c: &Correspondences) -> Result<RigidPose> {
    fit(&c.src, &c.dst, false).map(|(pose, _)| pose)
}

/// Similarity variant `dst ≈ s·R·src + t`. Diagnostics only; trajectories
/// use the rigid fit.
pub fn umeyama_with_scale(c: &Correspondences) -> Result<(RigidPose, f64)> {
    fit(&c.src, &c.dst, true)
}

pub(crate) fn fit(src: &[Vec3], dst: &[Vec3], with_scale: bool) -> Result<(RigidPose, f64)> {
    if src.len() != dst.len() {
        return Err(Error::ShapeMismatch(
            "correspondence lists differ in length".into(),
        ));
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::DegenerateCorrespondences);
    }
    let inv_n = 1.0 / n as f64;
    let mu_s = src.iter().sum::<Vec3>() * inv_n;
    let mu_d = dst.iter().sum::<Vec3>() * inv_n;
    let mut cov = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let (a, b) = (s - mu_s, d - mu_d);
        cov += b * a.transpose();
        var_s += a.norm_squared();
    }
    cov *= inv_n;
    var_s *= inv_n;

    let svd = SVD::new(cov, true, true);
    let sv = svd.singular_values;
    let max_sv = sv.max();
    let mut sorted = [sv[0], sv[1], sv[2]];
    sorted.sort_by(|a, b| b.total_cmp(a));
    if !(max_sv > 0.0) || sorted[1] <= 1e-12 * max_sv {
        return Err(Error::DegenerateCorrespondences);
    }
    let u = svd.u.ok_or(Error::DegenerateCorrespondences)?;
    let v_t = svd.v_t.ok_or(Error::DegenerateCorrespondences)?;
    let mut s = Matrix3::identity();
    if (u.determinant() * v_t.determinant()) < 0.0 {
        // flip the axis of the smallest singular value
        let k = (0..3).min_by(|&a, &b| sv[a].total_cmp(&sv[b])).unwrap();
        s[(k, k)] = -1.0;
    }
    let rotation = u * s * v_t;
    let scale = if with_scale {
        let trace: f64 = (0..3).map(|i| sv[i] * s[(i, i)]).sum();
        trace / var_s
    } else {
        1.0
    };
    let translation = mu_d - scale * rotation * mu_s;
    Ok((
        RigidPose {
            rotation,
            translation,
        },
        scale,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn cube() -> Vec<Vec3> {
        let mut v = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    v.push(Vec3::new(x, y, z));
                }
            }
        }
        v
    }

    #[test]
    fn identity_on_equal_sets() {
        let src = cube();
        let pose = umeyama(&Correspondences::new(src.clone(), src).unwrap()).unwrap();
        assert!((pose.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!(pose.translation.norm() < 1e-12);
    }

    #[test]
    fn recovers_quarter_turn_on_cube() {
        let r =
            Rotation3::from_axis_angle(&Vec3::z_axis(), std::f64::consts::FRAC_PI_2).into_inner();
        let t = Vec3::new(1.0, 2.0, 3.0);
        let src = cube();
        let dst = src.iter().map(|p| r * p + t).collect();
        let pose = umeyama(&Correspondences::new(src, dst).unwrap()).unwrap();
        assert!((pose.rotation - r).amax() < 1e-9);
        assert!((pose.translation - t).norm() < 1e-9);
        assert!(pose.is_proper(1e-9));
    }

    #[test]
    fn reflection_is_corrected() {
        // planar set mirrored through z: best proper rotation still det +1
        let src: Vec<Vec3> = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.3),
        ];
        let dst: Vec<Vec3> = src.iter().map(|p| Vec3::new(p.x, p.y, -p.z)).collect();
        let pose = umeyama(&Correspondences::new(src, dst).unwrap()).unwrap();
        assert!((pose.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_is_degenerate() {
        let src: Vec<Vec3> = (0..5)
            .map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.0))
            .collect();
        let err = umeyama(&Correspondences::new(src.clone(), src).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateCorrespondences));
        let two = vec![Vec3::zeros(), Vec3::x()];
        assert!(umeyama(&Correspondences::new(two.clone(), two).unwrap()).is_err());
    }

    #[test]
    fn scale_variant_recovers_scale() {
        let r = Rotation3::from_euler_angles(0.1, -0.4, 0.7).into_inner();
        let src = cube();
        let dst = src
            .iter()
            .map(|p| 2.5 * (r * p) + Vec3::new(0.0, 1.0, 0.0))
            .collect();
        let (pose, s) = umeyama_with_scale(&Correspondences::new(src, dst).unwrap()).unwrap();
        assert!((s - 2.5).abs() < 1e-12);
        assert!((pose.rotation - r).amax() < 1e-12);
    }
}
