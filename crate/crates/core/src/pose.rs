use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::Vec3;

/// Rigid world-to-camera transform: `x_cam = R · x_world + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

pub type PoseSequence = Vec<RigidPose>;

impl Default for RigidPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidPose {
    pub fn identity() -> Self {
        RigidPose {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        RigidPose {
            rotation,
            translation,
        }
    }

    /// Camera placed at `center` (world coordinates) with camera-to-world
    /// rotation `orientation`.
    pub fn from_camera(orientation: Matrix3<f64>, center: Vec3) -> Self {
        let rotation = orientation.transpose();
        RigidPose {
            rotation,
            translation: -(rotation * center),
        }
    }

    pub fn camera_center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// World point into camera coordinates.
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    /// Camera point into world coordinates.
    pub fn apply_inverse(&self, x: &Vec3) -> Vec3 {
        self.rotation.transpose() * (x - self.translation)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidPose {
        let rt = self.rotation.transpose();
        RigidPose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Geodesic angle between two rotations, radians.
    pub fn rotation_angle_to(&self, other: &RigidPose) -> f64 {
        let rel = self.rotation.transpose() * other.rotation;
        let c = ((rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        c.acos()
    }

    pub fn is_proper(&self, tol: f64) -> bool {
        let rtr = self.rotation.transpose() * self.rotation;
        (rtr - Matrix3::identity()).amax() <= tol
            && (self.rotation.determinant() - 1.0).abs() <= tol
    }

    /// Interpolates camera centers linearly and orientations by slerp.
    pub fn interpolate(&self, other: &RigidPose, s: f64) -> RigidPose {
        let qa = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(
            self.rotation.transpose(),
        ));
        let qb = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(
            other.rotation.transpose(),
        ));
        let q = qa.slerp(&qb, s);
        let center = self.camera_center() * (1.0 - s) + other.camera_center() * s;
        RigidPose::from_camera(q.to_rotation_matrix().into_inner(), center)
    }
}

#[derive(Serialize, Deserialize)]
struct PoseJson {
    #[serde(rename = "R")]
    r: [f64; 9],
    t: [f64; 3],
}

impl Serialize for RigidPose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.rotation;
        PoseJson {
            r: [
                m[(0, 0)],
                m[(0, 1)],
                m[(0, 2)],
                m[(1, 0)],
                m[(1, 1)],
                m[(1, 2)],
                m[(2, 0)],
                m[(2, 1)],
                m[(2, 2)],
            ],
            t: [self.translation.x, self.translation.y, self.translation.z],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigidPose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = PoseJson::deserialize(d)?;
        Ok(RigidPose {
            rotation: Matrix3::from_row_slice(&p.r),
            translation: Vec3::from_column_slice(&p.t),
        })
    }
}

pub fn validate_poses(poses: &[RigidPose]) -> Result<()> {
    for (i, p) in poses.iter().enumerate() {
        if !p.is_proper(1e-6) {
            return Err(Error::InvalidArgument(format!(
                "pose {i} rotation is not a proper rotation"
            )));
        }
    }
    Ok(())
}
