use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coords::{dir_to_erp, erp_to_dir, pitch_matrix, yaw_matrix, ErpCoord, Vec3};
use super::video::{MaskFrame, RgbFrame};
use crate::error::{Error, Result};

/// Pinhole camera looking out from the panorama center. Roll is fixed to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerspectiveCamera {
    /// Horizontal field of view in degrees.
    pub fov_deg: f64,
    pub yaw_rad: f64,
    pub pitch_rad: f64,
    pub width: usize,
    pub height: usize,
}

impl PerspectiveCamera {
    pub fn new(
        fov_deg: f64,
        yaw_rad: f64,
        pitch_rad: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let cam = PerspectiveCamera {
            fov_deg,
            yaw_rad,
            pitch_rad,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::InvalidArgument(format!(
                "camera must be at least 2x2 pixels, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::InvalidArgument(format!(
                "field of view must lie in (0, 180) degrees, got {}",
                self.fov_deg
            )));
        }
        if !self.yaw_rad.is_finite() || !self.pitch_rad.is_finite() {
            return Err(Error::InvalidArgument("yaw/pitch must be finite".into()));
        }
        Ok(())
    }

    /// Focal length in pixels; pixels are square so it serves both axes.
    pub fn focal_px(&self) -> f64 {
        0.5 * self.width as f64 / (0.5 * self.fov_deg.to_radians()).tan()
    }

    pub fn vertical_fov_deg(&self) -> f64 {
        2.0 * (0.5 * self.height as f64 / self.focal_px())
            .atan()
            .to_degrees()
    }

    /// Camera-to-panorama rotation `R_yaw · R_pitch`.
    pub fn rotation(&self) -> Matrix3<f64> {
        yaw_matrix(self.yaw_rad) * pitch_matrix(self.pitch_rad)
    }

    /// Camera-frame ray through continuous pixel position `(x, y)`; the
    /// center of pixel `(j, i)` is `(j + 0.5, i + 0.5)`.
    pub fn pixel_ray(&self, x: f64, y: f64) -> Vec3 {
        let f = self.focal_px();
        Vec3::new(
            (x - 0.5 * self.width as f64) / f,
            -(y - 0.5 * self.height as f64) / f,
            1.0,
        )
    }

    /// Continuous pixel position of a camera-frame direction, `None` behind
    /// the camera.
    pub fn project(&self, d: &Vec3) -> Option<(f64, f64)> {
        if d.z <= 0.0 {
            return None;
        }
        let f = self.focal_px();
        Some((
            f * d.x / d.z + 0.5 * self.width as f64,
            -f * d.y / d.z + 0.5 * self.height as f64,
        ))
    }

    /// Inside the image rectangle (edges included).
    pub fn in_frustum(&self, d: &Vec3) -> Option<(f64, f64)> {
        let (x, y) = self.project(d)?;
        let inside =
            (0.0..=self.width as f64).contains(&x) && (0.0..=self.height as f64).contains(&y);
        inside.then_some((x, y))
    }

    /// Draws a conditioning camera: FOV uniform in [30°, 120°], yaw uniform
    /// over the circle, pitch uniform in ±`max_pitch_rad`.
    pub fn sample_random(
        rng: &mut impl rand::Rng,
        width: usize,
        height: usize,
        max_pitch_rad: f64,
    ) -> Self {
        PerspectiveCamera {
            fov_deg: rng.random_range(30.0..=120.0),
            yaw_rad: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            pitch_rad: rng.random_range(-max_pitch_rad..=max_pitch_rad),
            width,
            height,
        }
    }
}

/// What to write into ERP pixels outside the camera frustum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FillPolicy {
    Constant {
        value: f32,
    },
    /// `scale · N(0, 1)` per channel, drawn in row-major pixel order.
    Noise {
        scale: f32,
        seed: u64,
    },
}

impl Default for FillPolicy {
    fn default() -> Self {
        FillPolicy::Constant { value: 0.0 }
    }
}

/// Renders the pinhole view `cam` out of an ERP frame.
pub fn sample_perspective(pano: &RgbFrame, cam: &PerspectiveCamera) -> Result<RgbFrame> {
    cam.validate()?;
    let rot = cam.rotation();
    let mut out = RgbFrame::new(cam.width, cam.height);
    out.data
        .par_chunks_mut(3 * cam.width)
        .enumerate()
        .for_each(|(row, line)| {
            for col in 0..cam.width {
                let ray = rot * cam.pixel_ray(col as f64 + 0.5, row as f64 + 0.5);
                // rays from pixel_ray are never zero
                let c = dir_to_erp(&ray).expect("nonzero ray");
                line[3 * col..3 * col + 3].copy_from_slice(&pano.sample_erp(c));
            }
        });
    Ok(out)
}

/// Projects a pinhole frame back onto an ERP canvas of `erp_width × erp_height`.
pub fn composite_to_erp(
    persp: &RgbFrame,
    cam: &PerspectiveCamera,
    erp_width: usize,
    erp_height: usize,
    fill: &FillPolicy,
) -> Result<(RgbFrame, MaskFrame)> {
    cam.validate()?;
    if persp.width != cam.width || persp.height != cam.height {
        return Err(Error::ShapeMismatch(format!(
            "perspective frame is {}x{}, camera expects {}x{}",
            persp.width, persp.height, cam.width, cam.height
        )));
    }
    let to_cam = cam.rotation().transpose();
    let mut out = match fill {
        FillPolicy::Constant { value } => RgbFrame::filled(erp_width, erp_height, [*value; 3]),
        FillPolicy::Noise { scale, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let data = (0..erp_width * erp_height * 3)
                .map(|_| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    n as f32 * scale
                })
                .collect();
            RgbFrame {
                width: erp_width,
                height: erp_height,
                data,
            }
        }
    };
    let mut mask = MaskFrame::new(erp_width, erp_height);
    out.data
        .par_chunks_mut(3 * erp_width)
        .zip(mask.data.par_chunks_mut(erp_width))
        .enumerate()
        .for_each(|(row, (line, mline))| {
            for col in 0..erp_width {
                let c = ErpCoord::from_pixel(col as f64, row as f64, erp_width, erp_height);
                let d = to_cam * erp_to_dir(c).as_vec();
                if let Some((x, y)) = cam.in_frustum(&d) {
                    line[3 * col..3 * col + 3]
                        .copy_from_slice(&persp.sample_clamped(x - 0.5, y - 0.5));
                    mline[col] = 1;
                }
            }
        });
    Ok((out, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn smooth_pano(w: usize, h: usize) -> RgbFrame {
        RgbFrame::from_fn(w, h, |col, row| {
            let c = ErpCoord::from_pixel(col as f64, row as f64, w, h);
            let d = erp_to_dir(c);
            [
                (0.5 + 0.4 * d.x()) as f32,
                (0.5 + 0.4 * d.y()) as f32,
                (0.5 + 0.4 * d.z()) as f32,
            ]
        })
    }

    #[test]
    fn center_pixel_follows_optical_axis() {
        let pano = smooth_pano(256, 128);
        let cam = PerspectiveCamera::new(90.0, 0.0, 0.0, 33, 33).unwrap();
        let view = sample_perspective(&pano, &cam).unwrap();
        assert_eq!(view.pixel(16, 16), pano.sample_erp(ErpCoord::new(0.5, 0.5)));

        let cam = PerspectiveCamera::new(90.0, FRAC_PI_2, 0.0, 33, 33).unwrap();
        let view = sample_perspective(&pano, &cam).unwrap();
        let want = pano.sample_erp(ErpCoord::new(0.75, 0.5));
        let got = view.pixel(16, 16);
        for k in 0..3 {
            assert!((want[k] - got[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn vertical_fov_from_aspect() {
        let cam = PerspectiveCamera::new(90.0, 0.0, 0.0, 200, 100).unwrap();
        let expected = 2.0 * (0.5f64).atan().to_degrees();
        assert!((cam.vertical_fov_deg() - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_fill_outside_mask_is_exact() {
        let pano = smooth_pano(128, 64);
        let cam = PerspectiveCamera::new(60.0, 0.3, -0.2, 40, 30).unwrap();
        let persp = sample_perspective(&pano, &cam).unwrap();
        let (erp, mask) =
            composite_to_erp(&persp, &cam, 128, 64, &FillPolicy::Constant { value: 0.0 }).unwrap();
        let mut outside = 0;
        for row in 0..64 {
            for col in 0..128 {
                if !mask.get(col, row) {
                    outside += 1;
                    assert_eq!(erp.pixel(col, row), [0.0; 3]);
                }
            }
        }
        assert!(outside > 0);
    }

    #[test]
    fn noise_fill_is_seeded() {
        let persp = RgbFrame::filled(8, 8, [1.0; 3]);
        let cam = PerspectiveCamera::new(45.0, 0.0, 0.0, 8, 8).unwrap();
        let fill = FillPolicy::Noise {
            scale: 0.5,
            seed: 3,
        };
        let a = composite_to_erp(&persp, &cam, 64, 32, &fill).unwrap();
        let b = composite_to_erp(&persp, &cam, 64, 32, &fill).unwrap();
        assert_eq!(a, b);
        let other = FillPolicy::Noise {
            scale: 0.5,
            seed: 4,
        };
        assert_ne!(
            a.0,
            composite_to_erp(&persp, &cam, 64, 32, &other).unwrap().0
        );
    }

    #[test]
    fn invalid_camera_rejected() {
        assert!(PerspectiveCamera::new(90.0, 0.0, 0.0, 1, 10).is_err());
        assert!(PerspectiveCamera::new(180.0, 0.0, 0.0, 10, 10).is_err());
    }
}
