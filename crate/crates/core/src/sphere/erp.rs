use std::f64::consts::PI;

use super::video::{DepthVideo, ErpVideo, MaskFrame, RgbFrame};
use crate::error::{Error, Result};

/// Latitude-aware RoPE coordinates: rows follow `sin φ`, columns stay linear.
///
/// `pos_h[h] = (H−1)/2 · (sin(πh/(H−1) − π/2) + 1)`, `pos_w[w] = w`.
pub fn latitude_positions(height: usize, width: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if height < 2 {
        return Err(Error::InvalidArgument(format!(
            "latitude positions need at least 2 rows, got {height}"
        )));
    }
    if width < 1 {
        return Err(Error::InvalidArgument("width must be at least 1".into()));
    }
    let span = (height - 1) as f64;
    let half = 0.5 * span;
    // Centering the angle on the equator keeps the middle row a fixed point.
    let pos_h = (0..height)
        .map(|h| half * ((PI * (h as f64 - half) / span).sin() + 1.0))
        .collect();
    let pos_w = (0..width).map(|w| w as f64).collect();
    Ok((pos_h, pos_w))
}

/// Per-row `cos φ(h)` with `φ(h) = πh/(H−1) − π/2`.
pub fn area_weights(height: usize) -> Result<Vec<f64>> {
    if height < 2 {
        return Err(Error::InvalidArgument(format!(
            "area weights need at least 2 rows, got {height}"
        )));
    }
    let span = (height - 1) as f64;
    // cos(πh/(H−1) − π/2) = sin(πh/(H−1)); folding onto the upper half makes
    // the weights exactly symmetric and exactly zero at the poles.
    Ok((0..height)
        .map(|h| {
            let k = h.min(height - 1 - h) as f64;
            if 2 * h == height - 1 {
                1.0
            } else {
                (PI * k / span).sin()
            }
        })
        .collect())
}

fn check_offset(offset: usize, width: usize) -> Result<()> {
    if offset >= width {
        return Err(Error::InvalidArgument(format!(
            "circular shift offset {offset} must be < width {width}"
        )));
    }
    Ok(())
}

pub fn circular_shift_frame(frame: &RgbFrame, offset: usize) -> Result<RgbFrame> {
    check_offset(offset, frame.width)?;
    let w = frame.width;
    let mut out = RgbFrame::new(w, frame.height);
    for row in 0..frame.height {
        let src = &frame.data[3 * row * w..3 * (row + 1) * w];
        let dst = &mut out.data[3 * row * w..3 * (row + 1) * w];
        dst[..3 * (w - offset)].copy_from_slice(&src[3 * offset..]);
        dst[3 * (w - offset)..].copy_from_slice(&src[..3 * offset]);
    }
    Ok(out)
}

/// Rolls every frame left by `offset` columns: output column `w` is input
/// column `(w + offset) mod W`.
pub fn circular_shift(video: &ErpVideo, offset: usize) -> Result<ErpVideo> {
    let frames = video
        .frames
        .iter()
        .map(|f| circular_shift_frame(f, offset))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErpVideo {
        frames,
        fps: video.fps,
    })
}

pub fn circular_shift_depth(depth: &DepthVideo, offset: usize) -> Result<DepthVideo> {
    check_offset(offset, depth.width)?;
    let w = depth.width;
    let mut out = depth.clone();
    for (src, dst) in depth.data.chunks(w).zip(out.data.chunks_mut(w)) {
        dst[..w - offset].copy_from_slice(&src[offset..]);
        dst[w - offset..].copy_from_slice(&src[..offset]);
    }
    Ok(out)
}

/// `mask · observed + (1 − mask) · generated`, per frame and pixel.
pub fn masked_blend(
    observed: &ErpVideo,
    generated: &ErpVideo,
    mask: &[MaskFrame],
) -> Result<ErpVideo> {
    if observed.len() != generated.len() || observed.len() != mask.len() {
        return Err(Error::ShapeMismatch(format!(
            "frame counts differ: observed {}, generated {}, mask {}",
            observed.len(),
            generated.len(),
            mask.len()
        )));
    }
    let mut frames = Vec::with_capacity(observed.len());
    for ((o, g), m) in observed.frames.iter().zip(&generated.frames).zip(mask) {
        if (o.width, o.height) != (g.width, g.height) || (o.width, o.height) != (m.width, m.height)
        {
            return Err(Error::ShapeMismatch("frame and mask sizes differ".into()));
        }
        if m.data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidArgument("mask must be binary".into()));
        }
        let mut out = g.clone();
        for (px, &keep) in m.data.iter().enumerate() {
            if keep == 1 {
                out.data[3 * px..3 * px + 3].copy_from_slice(&o.data[3 * px..3 * px + 3]);
            }
        }
        frames.push(out);
    }
    Ok(ErpVideo {
        frames,
        fps: generated.fps,
    })
}

/// Source index for each of `t_eval` output frames, nearest-index with both
/// endpoints preserved.
pub fn resample_indices(source_len: usize, t_eval: usize) -> Result<Vec<usize>> {
    if source_len == 0 {
        return Err(Error::InvalidArgument(
            "cannot resample an empty sequence".into(),
        ));
    }
    if t_eval == 0 {
        return Err(Error::InvalidArgument(
            "target length must be at least 1".into(),
        ));
    }
    if t_eval == 1 {
        return Ok(vec![0]);
    }
    let scale = (source_len - 1) as f64 / (t_eval - 1) as f64;
    Ok((0..t_eval)
        .map(|i| ((i as f64 * scale).round() as usize).min(source_len - 1))
        .collect())
}

pub fn resample_temporal<T: Clone>(seq: &[T], t_eval: usize) -> Result<Vec<T>> {
    Ok(resample_indices(seq.len(), t_eval)?
        .into_iter()
        .map(|i| seq[i].clone())
        .collect())
}

pub fn resample_depth(depth: &DepthVideo, t_eval: usize) -> Result<DepthVideo> {
    let idx = resample_indices(depth.frames, t_eval)?;
    let mut data = Vec::with_capacity(t_eval * depth.frame_len());
    for i in idx {
        data.extend_from_slice(depth.frame(i));
    }
    DepthVideo::new(t_eval, depth.height, depth.width, depth.unit, data)
}

pub fn resample_video(video: &ErpVideo, t_eval: usize) -> Result<ErpVideo> {
    Ok(ErpVideo {
        frames: resample_temporal(&video.frames, t_eval)?,
        fps: video.fps * t_eval as f64 / video.len().max(1) as f64,
    })
}
