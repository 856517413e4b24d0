use serde::{Deserialize, Serialize};

use crate::pose::{PoseSequence, RigidPose};
use crate::sphere::{yaw_matrix, Vec3};

/// Named novel-view trajectories relative to an anchor pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CameraPath {
    /// Circle of `radius` around the anchor center, always facing it.
    Orbit { radius: f64 },
    /// Straight forward along the anchor heading, `step` meters per frame.
    Walk { step: f64 },
    /// Forward `step` and up `rise` per frame while sweeping yaw by `sweep`
    /// radians over the path.
    Fly { step: f64, rise: f64, sweep: f64 },
}

impl CameraPath {
    pub fn poses(&self, anchor: &RigidPose, frames: usize) -> PoseSequence {
        let orient = anchor.rotation.transpose();
        let center = anchor.camera_center();
        (0..frames)
            .map(|i| {
                let s = i as f64;
                match *self {
                    CameraPath::Orbit { radius } => {
                        let theta = std::f64::consts::TAU * s / frames.max(1) as f64;
                        let (sn, cs) = theta.sin_cos();
                        let offset = orient * Vec3::new(sn, 0.0, cs) * (-radius);
                        // facing the anchor center from the offset position
                        RigidPose::from_camera(orient * yaw_matrix(theta), center + offset)
                    }
                    CameraPath::Walk { step } => {
                        RigidPose::from_camera(orient, center + orient * Vec3::z() * (step * s))
                    }
                    CameraPath::Fly { step, rise, sweep } => {
                        let frac = if frames > 1 {
                            s / (frames - 1) as f64
                        } else {
                            0.0
                        };
                        let position = center + orient * Vec3::new(0.0, rise * s, step * s);
                        RigidPose::from_camera(orient * yaw_matrix(sweep * frac), position)
                    }
                }
            })
            .collect()
    }
}
