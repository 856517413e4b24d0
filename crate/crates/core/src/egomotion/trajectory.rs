use rand_chacha::rand_core::SeedableRng;
use rayon::prelude::*;

use super::rigid::{ransac_rigid, RansacParams};
use super::umeyama::Correspondences;
use crate::error::{Error, Result};
use crate::pose::{PoseSequence, RigidPose};
use crate::sphere::{erp_to_dir, DepthVideo, ErpCoord, Vec3};
use crate::tracks::TrackSet;

/// World point seen at `u` with radial depth `depth` from a camera at `pose`.
pub fn lift_point(u: ErpCoord, depth: f64, pose: &RigidPose) -> Result<Vec3> {
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "depth must be positive, got {depth}"
        )));
    }
    Ok(pose.apply_inverse(&(erp_to_dir(u).as_vec() * depth)))
}

/// Largest ratio between the bilinear taps of a depth read before the read
/// is treated as straddling an occlusion edge and dropped.
pub const DEPTH_EDGE_RATIO: f64 = 1.25;

/// Camera-frame point at `u` of frame `t`, or `None` when the depth there is
/// invalid or spans a discontinuity.
pub fn camera_point(depth: &DepthVideo, t: usize, u: ErpCoord) -> Option<Vec3> {
    let b = depth.bilinear(t, u);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (&i, &w) in b.index.iter().zip(&b.weight) {
        if w > 0.0 {
            let d = depth.data[i];
            if !(d > 0.0 && d.is_finite()) {
                return None;
            }
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (hi <= lo * DEPTH_EDGE_RATIO).then(|| erp_to_dir(u).as_vec() * b.apply(&depth.data))
}

/// Camera-frame correspondences between frames `t` and `t + 1` from tracks
/// visible in both with valid depth.
pub fn pair_correspondences(tracks: &TrackSet, depth: &DepthVideo, t: usize) -> Correspondences {
    let mut c = Correspondences::default();
    for tr in &tracks.tracks {
        if !(tr.vis[t] && tr.vis[t + 1]) {
            continue;
        }
        if let (Some(a), Some(b)) = (
            camera_point(depth, t, tr.uv[t]),
            camera_point(depth, t + 1, tr.uv[t + 1]),
        ) {
            c.src.push(a);
            c.dst.push(b);
        }
    }
    c
}

/// Per-frame world-to-camera poses with frame 0 at the identity, chained
/// from independent pairwise robust fits.
pub fn estimate_trajectory(
    tracks: &TrackSet,
    depth: &DepthVideo,
    params: &RansacParams,
) -> Result<PoseSequence> {
    params.validate()?;
    tracks.validate()?;
    let (frames, _, _) = depth.shape();
    if tracks.num_frames != frames {
        return Err(Error::ShapeMismatch(format!(
            "{} track frames vs {} depth frames",
            tracks.num_frames, frames
        )));
    }
    if frames == 0 {
        return Ok(Vec::new());
    }
    let deltas: Vec<Result<RigidPose>> = (0..frames - 1)
        .into_par_iter()
        .map(|t| {
            let c = pair_correspondences(tracks, depth, t);
            let pair_params = RansacParams {
                seed: pair_seed(params.seed, t),
                ..*params
            };
            ransac_rigid(&c, &pair_params)
                .map(|fit| fit.pose)
                .map_err(|e| Error::EgoMotion {
                    frame: t,
                    source: Box::new(e),
                })
        })
        .collect();

    let mut poses = Vec::with_capacity(frames);
    poses.push(RigidPose::identity());
    for delta in deltas {
        let prev = poses[poses.len() - 1];
        poses.push(delta?.compose(&prev));
    }
    Ok(poses)
}

/// Independent, reproducible seed for frame pair `t`.
fn pair_seed(seed: u64, t: usize) -> u64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    use rand_chacha::rand_core::RngCore;
    rng.next_u64()
}

/// Copy of `tracks` with world positions lifted through `depth` and `poses`
/// for every visible sample. Invisible samples and samples rejected by
/// [`camera_point`] stay `None`.
pub fn compensate(tracks: &TrackSet, depth: &DepthVideo, poses: &[RigidPose]) -> Result<TrackSet> {
    let (frames, _, _) = depth.shape();
    if poses.len() < tracks.num_frames || frames < tracks.num_frames {
        return Err(Error::ShapeMismatch(
            "poses or depth do not cover all track frames".into(),
        ));
    }
    let mut out = tracks.clone();
    out.tracks.par_iter_mut().for_each(|tr| {
        let xyz = (0..tr.uv.len())
            .map(|t| {
                if !tr.vis[t] {
                    return None;
                }
                camera_point(depth, t, tr.uv[t]).map(|p| poses[t].apply_inverse(&p))
            })
            .collect();
        tr.xyz_world = Some(xyz);
    });
    Ok(out)
}
