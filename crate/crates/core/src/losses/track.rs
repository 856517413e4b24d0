use serde::{Deserialize, Serialize};

use super::confidence::NoiseLevel;
use super::LossWithGrad;
use crate::error::{Error, Result};
use crate::numeric::{sign0, smallest_indices, trim_count, ExactSum};
use crate::pose::RigidPose;
use crate::sphere::{erp_to_dir, Bilinear, DepthVideo, ErpCoord, Vec3};
use crate::tracks::TrackSet;

/// `[X; α·ΔX; β·Δ²X]`
pub type StateVec = [f64; 9];

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.25;

/// Per-track, per-frame augmented states.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub alpha: f64,
    pub beta: f64,
    pub states: Vec<Vec<Option<StateVec>>>,
}

/// Stacks position, forward velocity and forward acceleration.
///
/// `ΔX_t = X_{t+1} − X_t` and `Δ²X_t = X_{t+2} − 2X_{t+1} + X_t`; a difference
/// is zero when it runs past the last frame or touches a missing position.
pub fn augment_state(track3d: &[Option<Vec3>], alpha: f64, beta: f64) -> Vec<Option<StateVec>> {
    let n = track3d.len();
    (0..n)
        .map(|t| {
            let x = track3d[t]?;
            let next = track3d.get(t + 1).copied().flatten();
            let next2 = track3d.get(t + 2).copied().flatten();
            let vel = next.map_or(Vec3::zeros(), |x1| (x1 - x) * alpha);
            let acc = match (next, next2) {
                (Some(x1), Some(x2)) => (x2 - 2.0 * x1 + x) * beta,
                _ => Vec3::zeros(),
            };
            Some([x.x, x.y, x.z, vel.x, vel.y, vel.z, acc.x, acc.y, acc.z])
        })
        .collect()
}

/// Ground-truth states from the tracks' world-frame positions.
pub fn states_from_tracks(tracks: &TrackSet, alpha: f64, beta: f64) -> Result<AugmentedState> {
    let mut states = Vec::with_capacity(tracks.len());
    for t in &tracks.tracks {
        let xyz = t.xyz_world.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("track {} has no world-frame positions", t.id))
        })?;
        states.push(augment_state(xyz, alpha, beta));
    }
    Ok(AugmentedState {
        alpha,
        beta,
        states,
    })
}

/// Which depth frame a track sample at frame `t` reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TemporalAlignment {
    /// Frame `t` reads depth frame `t`.
    #[default]
    FullRate,
    /// Frame `t` reads depth frame `⌊t / stride⌋` (latent-rate depth heads).
    LatentRate { stride: usize },
}

impl TemporalAlignment {
    fn depth_frame(&self, t: usize) -> usize {
        match *self {
            TemporalAlignment::FullRate => t,
            TemporalAlignment::LatentRate { stride } => t / stride.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackLossConfig {
    pub alpha: f64,
    pub beta: f64,
    pub trim_frac: f64,
    pub min_trim_count: usize,
    pub alignment: TemporalAlignment,
}

impl Default for TrackLossConfig {
    fn default() -> Self {
        TrackLossConfig {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            trim_frac: 0.02,
            min_trim_count: 50,
            alignment: TemporalAlignment::FullRate,
        }
    }
}

/// Lift `X = Rᵀ(D·d(u) − t)` and the derivative `∂X/∂D = Rᵀ d(u)`.
struct Lifted {
    x: Vec3,
    ray_world: Vec3,
    taps: Bilinear,
}

impl Lifted {
    fn new(depth: &DepthVideo, frame: usize, uv: ErpCoord, pose: &RigidPose) -> Self {
        let taps = depth.bilinear(frame, uv);
        let d = taps.apply(&depth.data);
        let ray_world = pose.rotation.transpose() * erp_to_dir(uv).as_vec();
        let x = d * ray_world - pose.rotation.transpose() * pose.translation;
        Lifted { x, ray_world, taps }
    }
}

/// Reference states lifted through `depth` with the same arithmetic as
/// [`track_loss`], so passing the same depth and poses back in scores exactly
/// zero. Only visible samples with positive finite depth get a position.
pub fn states_from_depth(
    tracks: &TrackSet,
    depth: &DepthVideo,
    poses: &[RigidPose],
    cfg: &TrackLossConfig,
) -> Result<AugmentedState> {
    let frames = tracks.num_frames;
    if poses.len() != frames {
        return Err(Error::ShapeMismatch(format!(
            "{} poses for {frames} frames",
            poses.len()
        )));
    }
    if frames > 0 && cfg.alignment.depth_frame(frames - 1) >= depth.frames {
        return Err(Error::ShapeMismatch(format!(
            "depth has {} frames, too few for {frames} track frames",
            depth.frames
        )));
    }
    let states = tracks
        .tracks
        .iter()
        .map(|track| {
            let positions: Vec<Option<Vec3>> = (0..frames)
                .map(|t| {
                    if !track.vis[t] {
                        return None;
                    }
                    let frame = cfg.alignment.depth_frame(t);
                    let d = depth.sample(frame, track.uv[t]);
                    (d > 0.0 && d.is_finite())
                        .then(|| Lifted::new(depth, frame, track.uv[t], &poses[t]).x)
                })
                .collect();
            augment_state(&positions, cfg.alpha, cfg.beta)
        })
        .collect();
    Ok(AugmentedState {
        alpha: cfg.alpha,
        beta: cfg.beta,
        states,
    })
}

/// Visibility- and latitude-weighted L1 loss between predicted and reference
/// augmented track states, with the gradient with respect to `pred_depth`.
///
/// Predicted positions are formed only where the reference has a position,
/// so both sides share one difference/padding pattern.
pub fn track_loss(
    tracks: &TrackSet,
    pred_depth: &DepthVideo,
    poses: &[RigidPose],
    reference: &AugmentedState,
    noise: &NoiseLevel,
    cfg: &TrackLossConfig,
) -> Result<LossWithGrad> {
    let frames = tracks.num_frames;
    if poses.len() != frames {
        return Err(Error::ShapeMismatch(format!(
            "{} poses for {frames} frames",
            poses.len()
        )));
    }
    if reference.states.len() != tracks.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} reference state tracks for {} tracks",
            reference.states.len(),
            tracks.len()
        )));
    }
    let needed_depth_frames = match cfg.alignment {
        TemporalAlignment::FullRate => frames,
        TemporalAlignment::LatentRate { .. } => {
            cfg.alignment.depth_frame(frames.saturating_sub(1)) + 1
        }
    };
    let depth_ok = match cfg.alignment {
        TemporalAlignment::FullRate => pred_depth.frames == frames,
        TemporalAlignment::LatentRate { .. } => pred_depth.frames >= needed_depth_frames,
    };
    if !depth_ok {
        return Err(Error::ShapeMismatch(format!(
            "depth has {} frames, tracks need {needed_depth_frames}",
            pred_depth.frames
        )));
    }

    struct Sample {
        track: usize,
        frame: usize,
        weight: f64,
        residual: f64,
        signs: StateVec,
    }

    let mut lifted: Vec<Vec<Option<Lifted>>> = Vec::with_capacity(tracks.len());
    let mut samples = Vec::new();
    for (p, track) in tracks.tracks.iter().enumerate() {
        let gt = &reference.states[p];
        if gt.len() != frames {
            return Err(Error::ShapeMismatch(format!(
                "reference states of track {} have wrong length",
                track.id
            )));
        }
        let lifts: Vec<Option<Lifted>> = (0..frames)
            .map(|t| {
                gt[t]?;
                Some(Lifted::new(
                    pred_depth,
                    cfg.alignment.depth_frame(t),
                    track.uv[t],
                    &poses[t],
                ))
            })
            .collect();
        let positions: Vec<Option<Vec3>> = lifts.iter().map(|l| l.as_ref().map(|l| l.x)).collect();
        let pred_states = augment_state(&positions, reference.alpha, reference.beta);
        for t in 0..frames {
            if !track.vis[t] {
                continue;
            }
            let (Some(ps), Some(gs)) = (pred_states[t], gt[t]) else {
                continue;
            };
            let mut signs = [0.0; 9];
            let mut residual = ExactSum::new();
            for k in 0..9 {
                let d = ps[k] - gs[k];
                signs[k] = sign0(d);
                residual.add(d.abs());
            }
            samples.push(Sample {
                track: p,
                frame: t,
                weight: track.uv[t].latitude().cos().max(0.0),
                residual: residual.value(),
                signs,
            });
        }
        lifted.push(lifts);
    }

    let residuals: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    let keep = samples.len() - trim_count(samples.len(), cfg.trim_frac, cfg.min_trim_count);
    let kept = smallest_indices(&residuals, keep);
    let mut weight_sum = ExactSum::new();
    let mut loss_sum = ExactSum::new();
    for (s, &k) in samples.iter().zip(&kept) {
        if k {
            weight_sum.add(s.weight);
            loss_sum.add(s.weight * s.residual);
        }
    }
    let weight_sum = weight_sum.value();
    if !(weight_sum > 0.0) {
        return Err(Error::NoVisibleSamples);
    }
    let c = noise.confidence();
    let value = c * loss_sum.value() / weight_sum;

    // back-propagate ξ residual signs to positions, then through the lift
    let mut grad = vec![0.0; pred_depth.data.len()];
    let mut grad_x: Vec<Vec<Vec3>> = lifted
        .iter()
        .map(|l| vec![Vec3::zeros(); l.len()])
        .collect();
    let (alpha, beta) = (reference.alpha, reference.beta);
    for (s, &k) in samples.iter().zip(&kept) {
        if !k {
            continue;
        }
        let scale = c * s.weight / weight_sum;
        let g = |range: usize| {
            Vec3::new(s.signs[range], s.signs[range + 1], s.signs[range + 2]) * scale
        };
        let lifts = &lifted[s.track];
        let gx = &mut grad_x[s.track];
        let t = s.frame;
        gx[t] += g(0);
        let has = |i: usize| lifts.get(i).is_some_and(|l| l.is_some());
        if has(t + 1) {
            let gv = g(3) * alpha;
            gx[t + 1] += gv;
            gx[t] -= gv;
            if has(t + 2) {
                let ga = g(6) * beta;
                gx[t + 2] += ga;
                gx[t + 1] -= 2.0 * ga;
                gx[t] += ga;
            }
        }
    }
    for (lifts, gx) in lifted.iter().zip(&grad_x) {
        for (l, g) in lifts.iter().zip(gx) {
            let Some(l) = l else { continue };
            let gd = g.dot(&l.ray_world);
            if gd == 0.0 {
                continue;
            }
            for k in 0..4 {
                grad[l.taps.index[k]] += gd * l.taps.weight[k];
            }
        }
    }
    Ok(LossWithGrad { value, grad })
}
