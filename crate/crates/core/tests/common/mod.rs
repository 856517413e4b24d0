#![allow(dead_code)]

use erpkit::pose::RigidPose;
use erpkit::sphere::{yaw_matrix, Vec3};
use erpkit::synth::{SceneSpec, SpherePath, SphereSpec};

/// 2 × 2 × 2 room, static camera at the center, no sphere.
pub fn unit_room(height: usize, width: usize, frames: usize) -> SceneSpec {
    SceneSpec {
        half_extents: [1.0, 1.0, 1.0],
        sphere: None,
        camera_keyframes: vec![RigidPose::identity()],
        num_frames: frames,
        height,
        width,
        track_grid: [8, 16],
        ..SceneSpec::default()
    }
}

/// Default room at reduced resolution with a scripted camera walk.
pub fn moving_camera(height: usize, width: usize, frames: usize, sphere: bool) -> SceneSpec {
    let mut s = SceneSpec {
        num_frames: frames,
        height,
        width,
        track_grid: [24, 48],
        camera_keyframes: vec![
            RigidPose::identity(),
            RigidPose::from_camera(
                yaw_matrix(0.3) * erpkit::sphere::pitch_matrix(0.05),
                Vec3::new(0.4, 0.1, 0.8),
            ),
            RigidPose::from_camera(yaw_matrix(0.5), Vec3::new(0.6, 0.0, 1.5)),
        ],
        ..SceneSpec::default()
    };
    if !sphere {
        s.sphere = None;
    }
    s
}

/// Sphere circling fast enough (0.135 m per frame) to leave the default
/// inlier band between consecutive frames.
pub fn with_fast_sphere(mut s: SceneSpec) -> SceneSpec {
    s.sphere = Some(SphereSpec {
        radius: 0.5,
        path: SpherePath::Circular {
            center: [-1.2, 0.0, 2.5],
            radius: 0.9,
            angular_velocity: 0.15,
            phase: 0.0,
        },
        color: [0.9, 0.2, 0.2],
    });
    s
}

pub fn rotation_error_deg(a: &RigidPose, b: &RigidPose) -> f64 {
    a.rotation_angle_to(b).to_degrees()
}

pub fn translation_error(a: &RigidPose, b: &RigidPose) -> f64 {
    (a.camera_center() - b.camera_center()).norm()
}
