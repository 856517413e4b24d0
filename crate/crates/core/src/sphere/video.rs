use serde::{Deserialize, Serialize};

use super::coords::ErpCoord;
use crate::error::{Error, Result};

/// Interleaved RGB image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize) -> Self {
        RgbFrame {
            width,
            height,
            data: vec![0.0; width * height * 3],
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        RgbFrame {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for row in 0..height {
            for col in 0..width {
                data.extend_from_slice(&f(col, row));
            }
        }
        RgbFrame {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn pixel(&self, col: usize, row: usize) -> [f32; 3] {
        let i = 3 * (row * self.width + col);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, col: usize, row: usize, rgb: [f32; 3]) {
        let i = 3 * (row * self.width + col);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Bilinear sample with horizontal wrap and vertical clamp.
    pub fn sample_erp(&self, c: ErpCoord) -> [f32; 3] {
        let (x, y) = c.to_pixel(self.width, self.height);
        self.blend(&Bilinear::erp(x, y, self.width, self.height))
    }

    /// Bilinear sample clamped at all four borders (pinhole images).
    pub fn sample_clamped(&self, x: f64, y: f64) -> [f32; 3] {
        self.blend(&Bilinear::clamped(x, y, self.width, self.height))
    }

    fn blend(&self, b: &Bilinear) -> [f32; 3] {
        let mut out = [0.0f64; 3];
        for k in 0..4 {
            let i = 3 * b.index[k];
            for (c, o) in out.iter_mut().enumerate() {
                *o += b.weight[k] * self.data[i + c] as f64;
            }
        }
        [out[0] as f32, out[1] as f32, out[2] as f32]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErpVideo {
    pub frames: Vec<RgbFrame>,
    pub fps: f64,
}

impl ErpVideo {
    pub fn new(frames: Vec<RgbFrame>, fps: f64) -> Result<Self> {
        if let Some(first) = frames.first() {
            if frames
                .iter()
                .any(|f| f.width != first.width || f.height != first.height)
            {
                return Err(Error::ShapeMismatch(
                    "frames of an ERP video must share one size".into(),
                ));
            }
        }
        Ok(ErpVideo { frames, fps })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames.first().map_or(0, |f| f.width)
    }

    pub fn height(&self) -> usize {
        self.frames.first().map_or(0, |f| f.height)
    }

    /// Canonical panoramas are twice as wide as they are tall.
    pub fn is_canonical_aspect(&self) -> bool {
        self.width() == 2 * self.height()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DepthUnit {
    #[default]
    Normalized,
    Meters,
}

/// `T × H × W` scalar field stored in `(t, h, w)` row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthVideo {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub unit: DepthUnit,
    pub data: Vec<f64>,
}

impl DepthVideo {
    pub fn new(
        frames: usize,
        height: usize,
        width: usize,
        unit: DepthUnit,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != frames * height * width {
            return Err(Error::ShapeMismatch(format!(
                "depth data has {} values, expected {frames}x{height}x{width}",
                data.len()
            )));
        }
        Ok(DepthVideo {
            frames,
            height,
            width,
            unit,
            data,
        })
    }

    pub fn filled(frames: usize, height: usize, width: usize, unit: DepthUnit, value: f64) -> Self {
        DepthVideo {
            frames,
            height,
            width,
            unit,
            data: vec![value; frames * height * width],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.frames, self.height, self.width)
    }

    pub fn frame_len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn index(&self, t: usize, h: usize, w: usize) -> usize {
        (t * self.height + h) * self.width + w
    }

    #[inline]
    pub fn get(&self, t: usize, h: usize, w: usize) -> f64 {
        self.data[self.index(t, h, w)]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    /// Bilinear weights for reading frame `t` at `c` (wrap in width, clamp in
    /// height), as flat indices into `data`.
    pub fn bilinear(&self, t: usize, c: ErpCoord) -> Bilinear {
        let (x, y) = c.to_pixel(self.width, self.height);
        let mut b = Bilinear::erp(x, y, self.width, self.height);
        let base = t * self.frame_len();
        for i in &mut b.index {
            *i += base;
        }
        b
    }

    pub fn sample(&self, t: usize, c: ErpCoord) -> f64 {
        self.bilinear(t, c).apply(&self.data)
    }

    pub fn from_frames(
        unit: DepthUnit,
        height: usize,
        width: usize,
        frames: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let t = frames.len();
        let mut data = Vec::with_capacity(t * height * width);
        for f in frames {
            if f.len() != height * width {
                return Err(Error::ShapeMismatch("depth frame size".into()));
            }
            data.extend(f);
        }
        DepthVideo::new(t, height, width, unit, data)
    }
}

/// Binary per-pixel visibility of one composited frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl MaskFrame {
    pub fn new(width: usize, height: usize) -> Self {
        MaskFrame {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        MaskFrame {
            width,
            height,
            data: vec![value as u8; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col] != 0
    }
}

pub type VisibilityMask = Vec<MaskFrame>;

/// Four taps of a bilinear read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilinear {
    pub index: [usize; 4],
    pub weight: [f64; 4],
}

impl Bilinear {
    /// Wrap in x, clamp in y; indices are into a `width × height` plane.
    pub fn erp(x: f64, y: f64, width: usize, height: usize) -> Self {
        let xf = x.floor();
        let fx = x - xf;
        let w = width as i64;
        let x0 = (xf as i64).rem_euclid(w) as usize;
        let x1 = (x0 + 1) % width;
        let (y0, y1, fy) = clamp_axis(y, height);
        Self::from_taps(x0, x1, fx, y0, y1, fy, width)
    }

    pub fn clamped(x: f64, y: f64, width: usize, height: usize) -> Self {
        let (x0, x1, fx) = clamp_axis(x, width);
        let (y0, y1, fy) = clamp_axis(y, height);
        Self::from_taps(x0, x1, fx, y0, y1, fy, width)
    }

    fn from_taps(
        x0: usize,
        x1: usize,
        fx: f64,
        y0: usize,
        y1: usize,
        fy: f64,
        width: usize,
    ) -> Self {
        Bilinear {
            index: [
                y0 * width + x0,
                y0 * width + x1,
                y1 * width + x0,
                y1 * width + x1,
            ],
            weight: [
                (1.0 - fx) * (1.0 - fy),
                fx * (1.0 - fy),
                (1.0 - fx) * fy,
                fx * fy,
            ],
        }
    }

    #[inline]
    pub fn apply(&self, data: &[f64]) -> f64 {
        self.weight[0] * data[self.index[0]]
            + self.weight[1] * data[self.index[1]]
            + self.weight[2] * data[self.index[2]]
            + self.weight[3] * data[self.index[3]]
    }
}

fn clamp_axis(p: f64, n: usize) -> (usize, usize, f64) {
    if n == 1 {
        return (0, 0, 0.0);
    }
    let max = (n - 1) as f64;
    let p = p.clamp(0.0, max);
    let p0 = (p.floor() as usize).min(n - 2);
    (p0, p0 + 1, p - p0 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_wraps_horizontally() {
        let b = Bilinear::erp(3.5, 0.0, 4, 2);
        assert_eq!(b.index[0], 3);
        assert_eq!(b.index[1], 0);
        assert_eq!(b.weight[0], 0.5);
        assert_eq!(b.weight[1], 0.5);
        let b = Bilinear::erp(-0.5, 0.0, 4, 2);
        assert_eq!(b.index[0], 3);
        assert_eq!(b.index[1], 0);
    }

    #[test]
    fn bilinear_clamps_vertically() {
        let b = Bilinear::erp(0.0, -3.0, 4, 3);
        assert_eq!(b.weight[0], 1.0);
        assert_eq!(b.index[0], 0);
        let b = Bilinear::erp(0.0, 7.0, 4, 3);
        assert_eq!(b.weight[2], 1.0);
        assert_eq!(b.index[2], 8);
    }

    #[test]
    fn depth_sample_at_pixel_center_is_exact() {
        let data: Vec<f64> = (0..2 * 3 * 4).map(|i| i as f64 * 0.37).collect();
        let d = DepthVideo::new(2, 3, 4, DepthUnit::Meters, data).unwrap();
        for t in 0..2 {
            for h in 0..3 {
                for w in 0..4 {
                    let c = ErpCoord::from_pixel(w as f64, h as f64, 4, 3);
                    assert_eq!(d.sample(t, c), d.get(t, h, w));
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        assert!(DepthVideo::new(1, 2, 2, DepthUnit::Meters, vec![0.0; 3]).is_err());
    }
}
