use crate::egomotion::lift_point;
use crate::error::{Error, Result};
use crate::pose::RigidPose;
use crate::sphere::{DepthVideo, ErpCoord, RgbFrame, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    pub xyz: Vec3,
    pub rgb: [f32; 3],
    /// `(t, h, w)` of the pixel the point was lifted from; `None` for points
    /// read back from a file.
    pub source: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounds `(min, max)`; `None` when empty.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = self.points.first()?.xyz;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(&p.xyz), hi.sup(&p.xyz))
        }))
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.bounds().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }

    /// Copy with `f` applied to every position.
    pub fn transformed(&self, f: impl Fn(&Vec3) -> Vec3) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| CloudPoint {
                    xyz: f(&p.xyz),
                    ..*p
                })
                .collect(),
        }
    }
}

/// World-frame points for every `stride`-th pixel (rows and columns) of frame
/// `t` with finite positive depth.
pub fn lift_pointcloud(
    frame: &RgbFrame,
    depth: &DepthVideo,
    t: usize,
    pose: &RigidPose,
    stride: usize,
) -> Result<PointCloud> {
    let (frames, h, w) = depth.shape();
    if t >= frames {
        return Err(Error::InvalidArgument(format!(
            "frame {t} out of range for {frames} depth frames"
        )));
    }
    if (frame.width, frame.height) != (w, h) {
        return Err(Error::ShapeMismatch(format!(
            "frame is {}x{}, depth is {w}x{h}",
            frame.width, frame.height
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    let mut points = Vec::new();
    for row in (0..h).step_by(stride) {
        for col in (0..w).step_by(stride) {
            let d = depth.get(t, row, col);
            if !(d > 0.0 && d.is_finite()) {
                continue;
            }
            let u = ErpCoord::from_pixel(col as f64, row as f64, w, h);
            points.push(CloudPoint {
                xyz: lift_point(u, d, pose)?,
                rgb: frame.pixel(col, row),
                source: Some([t, row, col]),
            });
        }
    }
    if points.is_empty() {
        return Err(Error::NoValidPixels);
    }
    Ok(PointCloud { points })
}
