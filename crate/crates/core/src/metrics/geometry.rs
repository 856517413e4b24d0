use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::{fsum, median_in_place, RunningStats};
use crate::sphere::DepthVideo;
use crate::tracks::TrackSet;

/// Mean cosine similarity between each frame embedding (row) and the text
/// embedding.
pub fn clip_t(frames: &DMatrix<f64>, text: &DVector<f64>) -> Result<f64> {
    if frames.ncols() != text.len() {
        return Err(Error::ShapeMismatch(format!(
            "frame embeddings have dimension {}, text has {}",
            frames.ncols(),
            text.len()
        )));
    }
    if frames.nrows() == 0 {
        return Err(Error::InvalidArgument("no frame embeddings".into()));
    }
    let tn = text.norm();
    if !(tn > 0.0) {
        return Err(Error::ZeroNormEmbedding);
    }
    let mut cosines = Vec::with_capacity(frames.nrows());
    for row in frames.row_iter() {
        let n = row.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroNormEmbedding);
        }
        cosines.push(row.dot(&text.transpose()) / (n * tn));
    }
    Ok(fsum(cosines.iter().copied()) / cosines.len() as f64)
}

/// Median norm of the second temporal difference of world positions over
/// every triple of consecutive frames where the track is visible (and its
/// position known) in all three.
pub fn smooth3d(tracks: &TrackSet) -> Result<f64> {
    let mut values = Vec::new();
    for tr in &tracks.tracks {
        let Some(xyz) = tr.xyz_world.as_ref() else {
            continue;
        };
        for t in 1..xyz.len().saturating_sub(1) {
            if !(tr.vis[t - 1] && tr.vis[t] && tr.vis[t + 1]) {
                continue;
            }
            if let (Some(a), Some(b), Some(c)) = (xyz[t - 1], xyz[t], xyz[t + 1]) {
                values.push((a - 2.0 * b + c).norm());
            }
        }
    }
    median_in_place(&mut values).ok_or(Error::InsufficientVisibility)
}

/// Median over pixels that are finite and positive in every frame of the
/// temporal coefficient of variation `σ_D / D̄` (divide-by-T deviation).
pub fn depth_sigma(depth: &DepthVideo) -> Result<f64> {
    let (frames, h, w) = depth.shape();
    if frames < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 frames, got {frames}"
        )));
    }
    let n = h * w;
    let mut ratios = Vec::with_capacity(n);
    'pixel: for p in 0..n {
        let mut stats = RunningStats::default();
        for t in 0..frames {
            let d = depth.data[t * n + p];
            if !(d.is_finite() && d > 0.0) {
                continue 'pixel;
            }
            stats.push(d);
        }
        ratios.push(stats.population_variance().sqrt() / stats.mean());
    }
    median_in_place(&mut ratios).ok_or(Error::NoValidPixels)
}

/// Mean over tracks of the fraction of frames each is visible. Zero for an
/// empty set.
pub fn track_life(tracks: &TrackSet) -> f64 {
    if tracks.is_empty() {
        return 0.0;
    }
    fsum(tracks.tracks.iter().map(|t| t.visible_fraction())) / tracks.len() as f64
}
