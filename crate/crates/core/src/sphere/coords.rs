use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Normalized equirectangular coordinate.
///
/// `u` runs left to right and wraps modulo 1, `v` runs top (north pole) to
/// bottom (south pole) and is clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ErpCoord {
    u: f64,
    v: f64,
}

impl From<[f64; 2]> for ErpCoord {
    fn from([u, v]: [f64; 2]) -> Self {
        ErpCoord::new(u, v)
    }
}

impl From<ErpCoord> for [f64; 2] {
    fn from(c: ErpCoord) -> Self {
        [c.u, c.v]
    }
}

pub(crate) fn wrap_unit(u: f64) -> f64 {
    let w = u - u.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl ErpCoord {
    pub fn new(u: f64, v: f64) -> Self {
        ErpCoord {
            u: wrap_unit(u),
            v: v.clamp(0.0, 1.0),
        }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// λ = 2π(u − ½) ∈ [−π, π)
    pub fn longitude(&self) -> f64 {
        TAU * (self.u - 0.5)
    }

    /// φ = π(½ − v) ∈ [−π/2, π/2]
    pub fn latitude(&self) -> f64 {
        PI * (0.5 - self.v)
    }

    /// Coordinate of the center of pixel `(col, row)` in a `width × height`
    /// panorama. Pixel `(0, 0)` covers `u ∈ [0, 1/W)`, `v ∈ [0, 1/H)`.
    pub fn from_pixel(col: f64, row: f64, width: usize, height: usize) -> Self {
        ErpCoord::new((col + 0.5) / width as f64, (row + 0.5) / height as f64)
    }

    /// Continuous pixel position, inverse of [`ErpCoord::from_pixel`].
    pub fn to_pixel(&self, width: usize, height: usize) -> (f64, f64) {
        (self.u * width as f64 - 0.5, self.v * height as f64 - 0.5)
    }

    /// Shift by a whole number of columns the way [`circular_shift`] moves
    /// image content: output column `w` holds input column `w + offset`.
    ///
    /// [`circular_shift`]: crate::sphere::circular_shift
    pub fn shifted_columns(&self, offset: usize, width: usize) -> Self {
        ErpCoord::new(self.u - offset as f64 / width as f64, self.v)
    }
}

/// Unit direction. Convention: +z forward, +y up, +x right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction3(Vec3);

impl Direction3 {
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateDirection);
        }
        Ok(Direction3(v / n))
    }

    pub fn as_vec(&self) -> Vec3 {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }
}

pub fn erp_to_dir(c: ErpCoord) -> Direction3 {
    let (sl, cl) = c.longitude().sin_cos();
    let (sp, cp) = c.latitude().sin_cos();
    Direction3(Vec3::new(cp * sl, sp, cp * cl))
}

/// Inverse of [`erp_to_dir`]. At the poles `u` is pinned to 0.5.
pub fn dir_to_erp(d: &Vec3) -> Result<ErpCoord> {
    let d = Direction3::new(*d)?.as_vec();
    let horizontal = d.x.hypot(d.z);
    let lat = d.y.atan2(horizontal);
    let u = if horizontal == 0.0 {
        0.5
    } else {
        d.x.atan2(d.z) / TAU + 0.5
    };
    Ok(ErpCoord::new(u, 0.5 - lat / PI))
}

/// Rotation about +y; positive yaw turns the forward axis toward +x.
pub fn yaw_matrix(yaw: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = yaw.sin_cos();
    nalgebra::Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Rotation about +x; positive pitch tilts the forward axis toward +y.
pub fn pitch_matrix(pitch: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = pitch.sin_cos();
    nalgebra::Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}
