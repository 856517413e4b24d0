use serde::{Deserialize, Serialize};

use super::confidence::NoiseLevel;
use super::LossWithGrad;
use crate::error::{Error, Result};
use crate::numeric::{sign0, smallest_indices, trim_count, ExactSum};
use crate::sphere::DepthVideo;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthLossConfig {
    /// Ground truth must lie strictly inside `(valid_lo, valid_hi)`.
    pub valid_lo: f64,
    pub valid_hi: f64,
    /// Fraction of largest residuals dropped from the absolute term.
    pub trim_frac: f64,
    /// Trimming is disabled below this many supervised pixels.
    pub min_trim_count: usize,
}

impl Default for DepthLossConfig {
    fn default() -> Self {
        DepthLossConfig {
            valid_lo: 0.01,
            valid_hi: 0.95,
            trim_frac: 0.02,
            min_trim_count: 50,
        }
    }
}

/// Masked, trimmed, area-weighted L1 depth loss with an edge term.
///
/// `L = c(σ) · [ Σ_{M_q} w_h |D̂ − D| / |M_q| + ½ Σ_{a∈{h,w}} Σ_{M_a} |∇_a D̂ − ∇_a D| / |M_a| ]`
///
/// The width axis is periodic, so `∇_w` pairs the last column with the first.
/// The returned gradient is the L1 subgradient with respect to `pred`, zero at
/// exactly-zero residuals and on masked or trimmed pixels.
pub fn depth_loss(
    pred: &DepthVideo,
    gt: &DepthVideo,
    cfg: &DepthLossConfig,
    noise: &NoiseLevel,
    row_weights: &[f64],
) -> Result<LossWithGrad> {
    if pred.shape() != gt.shape() {
        return Err(Error::ShapeMismatch(format!(
            "pred depth {:?} vs gt depth {:?}",
            pred.shape(),
            gt.shape()
        )));
    }
    if row_weights.len() != gt.height {
        return Err(Error::ShapeMismatch(format!(
            "{} row weights for {} rows",
            row_weights.len(),
            gt.height
        )));
    }
    let (frames, height, width) = gt.shape();
    let valid: Vec<bool> = gt
        .data
        .iter()
        .map(|&d| d > cfg.valid_lo && d < cfg.valid_hi)
        .collect();
    let supervised: Vec<usize> = (0..valid.len()).filter(|&i| valid[i]).collect();
    if supervised.is_empty() {
        return Err(Error::NoSupervisablePixels);
    }

    let c = noise.confidence();
    let mut grad = vec![0.0; pred.data.len()];

    // absolute term over M_q
    let residuals: Vec<f64> = supervised
        .iter()
        .map(|&i| pred.data[i] - gt.data[i])
        .collect();
    let abs_res: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    let keep = supervised.len() - trim_count(supervised.len(), cfg.trim_frac, cfg.min_trim_count);
    let kept = smallest_indices(&abs_res, keep);
    let inv_q = 1.0 / keep as f64;
    let mut abs_sum = ExactSum::new();
    for (k, &i) in supervised.iter().enumerate() {
        if !kept[k] {
            continue;
        }
        let w = row_weights[(i / width) % height];
        abs_sum.add(w * abs_res[k]);
        grad[i] += c * w * sign0(residuals[k]) * inv_q;
    }
    let abs_term = abs_sum.value() * inv_q;

    // edge term: pairs (a, b) with b the next pixel along the axis
    let mut edge_term = 0.0;
    for axis in [Axis::Height, Axis::Width] {
        let pairs = neighbour_pairs(axis, frames, height, width, &valid);
        if pairs.is_empty() {
            continue;
        }
        let inv = 1.0 / pairs.len() as f64;
        let mut sum = ExactSum::new();
        for &(a, b) in &pairs {
            let diff = (pred.data[b] - pred.data[a]) - (gt.data[b] - gt.data[a]);
            sum.add(diff.abs());
            let g = 0.5 * c * sign0(diff) * inv;
            grad[b] += g;
            grad[a] -= g;
        }
        edge_term += sum.value() * inv;
    }

    Ok(LossWithGrad {
        value: c * (abs_term + 0.5 * edge_term),
        grad,
    })
}

#[derive(Clone, Copy)]
enum Axis {
    Height,
    Width,
}

fn neighbour_pairs(
    axis: Axis,
    frames: usize,
    height: usize,
    width: usize,
    valid: &[bool],
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for t in 0..frames {
        for h in 0..height {
            for w in 0..width {
                let a = (t * height + h) * width + w;
                let b = match axis {
                    Axis::Height if h + 1 < height => a + width,
                    Axis::Width if width >= 2 => (t * height + h) * width + (w + 1) % width,
                    _ => continue,
                };
                if valid[a] && valid[b] {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs
}
