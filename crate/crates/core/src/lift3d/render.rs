use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::pose::RigidPose;
use crate::sphere::{PerspectiveCamera, RgbFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplatConfig {
    /// Half-size of the square splat; 0 fills a single pixel.
    pub radius_px: usize,
    pub background: [f32; 3],
}

impl Default for SplatConfig {
    fn default() -> Self {
        SplatConfig {
            radius_px: 1,
            background: [0.0; 3],
        }
    }
}

/// Rendered view: colors and per-pixel camera-z depth (`+∞` where nothing
/// landed).
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedView {
    pub rgb: RgbFrame,
    pub depth: Vec<f64>,
}

/// Z-buffered square-splat rendering through a pinhole.
///
/// The pinhole sits at `pose` (world-to-camera, same convention as the
/// panorama camera) and looks along the yaw/pitch of `cam`. Points are
/// processed in input order with a strict-less depth test, so equal depths
/// keep the earlier point.
pub fn render_pointcloud(
    pc: &PointCloud,
    cam: &PerspectiveCamera,
    pose: &RigidPose,
    cfg: &SplatConfig,
) -> Result<RenderedView> {
    cam.validate()?;
    if 4 * cfg.radius_px > cam.width.min(cam.height) {
        return Err(Error::InvalidArgument(format!(
            "splat radius {} too large for a {}x{} view",
            cfg.radius_px, cam.width, cam.height
        )));
    }
    let (w, h) = (cam.width, cam.height);
    let mut rgb = RgbFrame::filled(w, h, cfg.background);
    let mut depth = vec![f64::INFINITY; w * h];
    let world_to_pin = cam.rotation().transpose() * pose.rotation;
    let offset = cam.rotation().transpose() * pose.translation;
    let r = cfg.radius_px as i64;
    for p in &pc.points {
        let x = world_to_pin * p.xyz + offset;
        if !(x.z > 0.0) {
            continue;
        }
        let Some((px, py)) = cam.project(&x) else {
            continue;
        };
        let (col, row) = (px.floor(), py.floor());
        if !(col > -(r as f64) - 1.0
            && col < (w as i64 + r) as f64
            && row > -(r as f64) - 1.0
            && row < (h as i64 + r) as f64)
        {
            continue;
        }
        let (col, row) = (col as i64, row as i64);
        for yy in (row - r).max(0)..=(row + r).min(h as i64 - 1) {
            for xx in (col - r).max(0)..=(col + r).min(w as i64 - 1) {
                let k = yy as usize * w + xx as usize;
                if x.z < depth[k] {
                    depth[k] = x.z;
                    rgb.set_pixel(xx as usize, yy as usize, p.rgb);
                }
            }
        }
    }
    Ok(RenderedView { rgb, depth })
}

/// Peak signal-to-noise ratio in dB for images in `[0, 1]`.
pub fn psnr(a: &RgbFrame, b: &RgbFrame) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::ShapeMismatch("images differ in size".into()));
    }
    let mse = crate::numeric::fsum(a.data.iter().zip(&b.data).map(|(x, y)| {
        let d = f64::from(*x) - f64::from(*y);
        d * d
    })) / a.data.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    })
}
