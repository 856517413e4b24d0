use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{PoseSequence, RigidPose};
use crate::sphere::{yaw_matrix, Vec3};

/// Two-color checkerboard on one room face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checker {
    /// Cell edge length, meters.
    pub cell: f64,
    pub color_a: [f32; 3],
    pub color_b: [f32; 3],
}

/// Sphere center as a function of the frame index `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpherePath {
    /// `start + t · velocity`.
    Affine { start: [f64; 3], velocity: [f64; 3] },
    /// Horizontal circle: `center + radius · (sin θ, 0, cos θ)` with
    /// `θ = phase + t · angular_velocity`.
    Circular {
        center: [f64; 3],
        radius: f64,
        angular_velocity: f64,
        phase: f64,
    },
}

impl SpherePath {
    pub fn position(&self, t: f64) -> Vec3 {
        match *self {
            SpherePath::Affine { start, velocity } => Vec3::from(start) + t * Vec3::from(velocity),
            SpherePath::Circular {
                center,
                radius,
                angular_velocity,
                phase,
            } => {
                let (s, c) = (phase + t * angular_velocity).sin_cos();
                Vec3::from(center) + radius * Vec3::new(s, 0.0, c)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub radius: f64,
    pub path: SpherePath,
    pub color: [f32; 3],
}

/// Procedural room: an axis-aligned box centered at the origin with
/// checkerboard faces, an optional moving sphere, and a keyframed camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub half_extents: [f64; 3],
    /// Face textures in the order −x, +x, −y, +y, −z, +z.
    pub faces: [Checker; 6],
    #[serde(default)]
    pub sphere: Option<SphereSpec>,
    /// World-to-camera keyframes spread evenly over the clip; centers are
    /// interpolated linearly and orientations by slerp.
    pub camera_keyframes: Vec<RigidPose>,
    pub num_frames: usize,
    pub height: usize,
    pub width: usize,
    pub fps: f64,
    /// Drives the per-cell brightness jitter of the textures.
    pub seed: u64,
    /// Query grid (rows, cols) for the exact tracks.
    #[serde(default = "default_track_grid")]
    pub track_grid: [usize; 2],
}

fn default_track_grid() -> [usize; 2] {
    [16, 32]
}

fn default_faces() -> [Checker; 6] {
    let pair = |a: [f32; 3], b: [f32; 3]| Checker {
        cell: 0.5,
        color_a: a,
        color_b: b,
    };
    [
        pair([0.62, 0.45, 0.40], [0.48, 0.35, 0.31]),
        pair([0.40, 0.55, 0.62], [0.31, 0.43, 0.48]),
        pair([0.50, 0.50, 0.46], [0.40, 0.40, 0.37]),
        pair([0.70, 0.70, 0.68], [0.58, 0.58, 0.56]),
        pair([0.45, 0.60, 0.42], [0.35, 0.47, 0.33]),
        pair([0.60, 0.52, 0.68], [0.47, 0.40, 0.53]),
    ]
}

impl Default for SceneSpec {
    /// A 6 × 3 × 8 m room, a sphere circling on the right, and a camera that
    /// walks forward while turning 30°.
    fn default() -> Self {
        SceneSpec {
            half_extents: [3.0, 1.5, 4.0],
            faces: default_faces(),
            sphere: Some(SphereSpec {
                radius: 0.4,
                path: SpherePath::Circular {
                    center: [1.5, -0.5, 2.0],
                    radius: 0.8,
                    angular_velocity: 0.05,
                    phase: 0.0,
                },
                color: [0.85, 0.3, 0.2],
            }),
            camera_keyframes: vec![
                RigidPose::identity(),
                RigidPose::from_camera(yaw_matrix(30f64.to_radians()), Vec3::new(0.5, 0.1, 1.0)),
            ],
            num_frames: 93,
            height: 256,
            width: 512,
            fps: 16.0,
            seed: 0,
            track_grid: default_track_grid(),
        }
    }
}

/// What a ray hits first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    /// Face index in the order of [`SceneSpec::faces`].
    Wall(usize),
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub point: Vec3,
    pub surface: Surface,
}

impl SceneSpec {
    /// Largest room half-extent, the length scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.half_extents.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_frames == 0 {
            return Err(Error::InvalidArgument(
                "scene needs at least one frame".into(),
            ));
        }
        if self.height < 2 || self.width < 2 {
            return Err(Error::InvalidArgument("frame must be at least 2x2".into()));
        }
        if self
            .half_extents
            .iter()
            .any(|&h| !(h > 0.0 && h.is_finite()))
        {
            return Err(Error::InvalidArgument(
                "room half-extents must be positive".into(),
            ));
        }
        if self.faces.iter().any(|f| !(f.cell > 0.0)) {
            return Err(Error::InvalidArgument(
                "checker cells must be positive".into(),
            ));
        }
        if self.camera_keyframes.is_empty() {
            return Err(Error::InvalidArgument(
                "camera path needs at least one keyframe".into(),
            ));
        }
        if self.track_grid.contains(&0) {
            return Err(Error::InvalidArgument(
                "track grid must be at least 1x1".into(),
            ));
        }
        if let Some(s) = &self.sphere {
            if !(s.radius > 0.0) {
                return Err(Error::InvalidArgument(
                    "sphere radius must be positive".into(),
                ));
            }
        }
        for (t, pose) in self.poses().iter().enumerate() {
            let c = pose.camera_center();
            let inside = (0..3).all(|i| c[i].abs() < self.half_extents[i]);
            let clear = self
                .sphere
                .as_ref()
                .is_none_or(|s| (c - s.path.position(t as f64)).norm() > s.radius);
            if !(inside && clear) {
                return Err(Error::CameraOutsideScene(t));
            }
        }
        Ok(())
    }

    /// World-to-camera pose of frame `t`.
    pub fn pose(&self, t: usize) -> RigidPose {
        let k = &self.camera_keyframes;
        if k.len() == 1 || self.num_frames <= 1 {
            return k[0];
        }
        let s = t as f64 / (self.num_frames - 1) as f64 * (k.len() - 1) as f64;
        let i = (s.floor() as usize).min(k.len() - 2);
        let frac = s - i as f64;
        if frac == 0.0 {
            k[i]
        } else if frac == 1.0 {
            k[i + 1]
        } else {
            k[i].interpolate(&k[i + 1], frac)
        }
    }

    pub fn poses(&self) -> PoseSequence {
        (0..self.num_frames).map(|t| self.pose(t)).collect()
    }

    pub fn sphere_center(&self, t: usize) -> Option<Vec3> {
        self.sphere.as_ref().map(|s| s.path.position(t as f64))
    }

    /// Nearest intersection of the ray `origin + s·dir` (`dir` unit, origin
    /// inside the room) with the scene at frame `t`.
    pub fn cast(&self, origin: &Vec3, dir: &Vec3, t: usize) -> Hit {
        let mut best = Hit {
            distance: f64::INFINITY,
            point: *origin,
            surface: Surface::Wall(0),
        };
        for axis in 0..3 {
            let d = dir[axis];
            if d == 0.0 {
                continue;
            }
            let (bound, face) = if d > 0.0 {
                (self.half_extents[axis], 2 * axis + 1)
            } else {
                (-self.half_extents[axis], 2 * axis)
            };
            let s = (bound - origin[axis]) / d;
            if s < best.distance {
                best = Hit {
                    distance: s,
                    point: origin + s * dir,
                    surface: Surface::Wall(face),
                };
                best.point[axis] = bound;
            }
        }
        if let (Some(sph), Some(c)) = (&self.sphere, self.sphere_center(t)) {
            if let Some(s) = ray_sphere(origin, dir, &c, sph.radius) {
                if s < best.distance {
                    best = Hit {
                        distance: s,
                        point: origin + s * dir,
                        surface: Surface::Sphere,
                    };
                }
            }
        }
        best
    }

    /// Unlit albedo at a hit. `anchor` is the sphere center for sphere hits.
    pub fn shade(&self, hit: &Hit, anchor: Option<Vec3>) -> [f32; 3] {
        match hit.surface {
            Surface::Sphere => {
                let s = self.sphere.as_ref().expect("sphere hit without sphere");
                let local = hit.point - anchor.unwrap_or_else(Vec3::zeros);
                // two-tone bands so sphere motion is visible
                let band = ((local.y / s.radius * 3.0).floor() as i64).rem_euclid(2);
                let k = if band == 0 { 1.0 } else { 0.8 };
                s.color.map(|c| c * k)
            }
            Surface::Wall(face) => {
                let axis = face / 2;
                let (a, b) = match axis {
                    0 => (hit.point.y, hit.point.z),
                    1 => (hit.point.x, hit.point.z),
                    _ => (hit.point.x, hit.point.y),
                };
                let tex = &self.faces[face];
                let (i, j) = ((a / tex.cell).floor() as i64, (b / tex.cell).floor() as i64);
                let base = if (i + j).rem_euclid(2) == 0 {
                    tex.color_a
                } else {
                    tex.color_b
                };
                let jitter = self.cell_jitter(face, i, j);
                base.map(|c| (c * jitter).clamp(0.0, 1.0))
            }
        }
    }

    fn cell_jitter(&self, face: usize, i: i64, j: i64) -> f32 {
        let key = (face as u64) << 56 ^ ((i as u64 & 0xff_ffff) << 28) ^ (j as u64 & 0xfff_ffff);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(key);
        rng.random_range(0.92..1.08)
    }
}

/// Smallest positive root of `|o + s·d − c| = r` for unit `d`.
pub fn ray_sphere(o: &Vec3, d: &Vec3, c: &Vec3, r: f64) -> Option<f64> {
    let oc = o - c;
    let b = oc.dot(d);
    let disc = b * b - (oc.norm_squared() - r * r);
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let near = -b - sq;
    if near > 0.0 {
        return Some(near);
    }
    let far = -b + sq;
    (far > 0.0).then_some(far)
}
