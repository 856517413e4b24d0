use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::clip::render_clip;
use super::scene::SceneSpec;
use crate::error::{Error, Result};
use crate::losses::{
    check_gradient, depth_loss, states_from_depth, track_loss, DepthLossConfig, GradCheckReport,
    NoiseLevel, TrackLossConfig,
};
use crate::pose::RigidPose;
use crate::sphere::{area_weights, pitch_matrix, yaw_matrix, DepthUnit, DepthVideo, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradcheckSetup {
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    /// Coordinates drawn per loss (and again among the track loss's nonzero
    /// gradient entries).
    pub pixels: usize,
    /// Relative Gaussian perturbation of the prediction.
    pub noise: f64,
    /// Difference step for the depth loss, in normalized depth.
    pub step: f64,
    /// Difference step for the track loss, in meters.
    pub track_step: f64,
    pub sigma: f64,
}

impl Default for GradcheckSetup {
    fn default() -> Self {
        GradcheckSetup {
            height: 32,
            width: 64,
            frames: 6,
            pixels: 1000,
            noise: 0.05,
            step: 1e-4,
            track_step: 1e-3,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGradcheck {
    pub seed: u64,
    pub depth: GradCheckReport,
    pub track: GradCheckReport,
}

impl OracleGradcheck {
    pub fn max_rel_error(&self) -> f64 {
        self.depth.max_rel_error.max(self.track.max_rel_error)
    }
}

/// Small oracle scene with a camera path drawn from `rng`.
pub fn random_scene(rng: &mut impl Rng, height: usize, width: usize, frames: usize) -> SceneSpec {
    let mut key = || {
        let c = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-0.4..0.4),
            rng.random_range(-1.5..0.5),
        );
        RigidPose::from_camera(
            yaw_matrix(rng.random_range(-3.0..3.0)) * pitch_matrix(rng.random_range(-0.2..0.2)),
            c,
        )
    };
    let camera_keyframes = vec![key(), key()];
    SceneSpec {
        camera_keyframes,
        num_frames: frames,
        height,
        width,
        seed: rng.random(),
        track_grid: [16, 32],
        ..SceneSpec::default()
    }
}

/// Finite-difference check of both auxiliary losses on a random oracle clip
/// with a perturbed depth prediction.
///
/// The depth loss runs on depth normalized by the clip's largest depth; the
/// track loss runs in meters against references lifted from the exact depth.
pub fn oracle_gradcheck(seed: u64, setup: &GradcheckSetup) -> Result<OracleGradcheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = random_scene(&mut rng, setup.height, setup.width, setup.frames);
    let clip = render_clip(&scene)?;
    let (t, h, w) = clip.depth.shape();
    let noise = NoiseLevel::with_default_max(setup.sigma)?;

    let perturb = |v: f64, rng: &mut ChaCha8Rng| {
        let n: f64 = StandardNormal.sample(rng);
        v * (1.0 + setup.noise * n)
    };
    let metric_pred: Vec<f64> = clip
        .depth
        .data
        .iter()
        .map(|&v| perturb(v, &mut rng))
        .collect();

    // depth loss
    let max = clip.depth.data.iter().copied().fold(0.0, f64::max);
    let gt_n = DepthVideo::new(
        t,
        h,
        w,
        DepthUnit::Normalized,
        clip.depth.data.iter().map(|v| v / max).collect(),
    )?;
    let pred_n: Vec<f64> = metric_pred.iter().map(|v| v / max).collect();
    let cfg = DepthLossConfig::default();
    let weights = area_weights(h)?;
    let depth_f = |x: &[f64]| -> Result<f64> {
        let pred = DepthVideo::new(t, h, w, DepthUnit::Normalized, x.to_vec())?;
        Ok(depth_loss(&pred, &gt_n, &cfg, &noise, &weights)?.value)
    };
    let pred = DepthVideo::new(t, h, w, DepthUnit::Normalized, pred_n.clone())?;
    let analytic = depth_loss(&pred, &gt_n, &cfg, &noise, &weights)?.grad;
    let valid: Vec<usize> = (0..gt_n.data.len())
        .filter(|&i| gt_n.data[i] > cfg.valid_lo && gt_n.data[i] < cfg.valid_hi)
        .collect();
    let picked = pick(&mut rng, &valid, setup.pixels)?;
    let depth = check_gradient(depth_f, &pred_n, &analytic, &picked, setup.step)?;

    // track loss
    let tcfg = TrackLossConfig::default();
    let reference = states_from_depth(&clip.tracks, &clip.depth, &clip.poses, &tcfg)?;
    let track_f = |x: &[f64]| -> Result<f64> {
        let pred = DepthVideo::new(t, h, w, DepthUnit::Meters, x.to_vec())?;
        Ok(track_loss(&clip.tracks, &pred, &clip.poses, &reference, &noise, &tcfg)?.value)
    };
    let pred = DepthVideo::new(t, h, w, DepthUnit::Meters, metric_pred.clone())?;
    let analytic = track_loss(&clip.tracks, &pred, &clip.poses, &reference, &noise, &tcfg)?.grad;
    let all: Vec<usize> = (0..metric_pred.len()).collect();
    let touched: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&i| analytic[i] != 0.0)
        .collect();
    let mut picked = pick(&mut rng, &all, setup.pixels)?;
    picked.extend(pick(&mut rng, &touched, setup.pixels.min(touched.len()))?);
    let track = check_gradient(track_f, &metric_pred, &analytic, &picked, setup.track_step)?;

    Ok(OracleGradcheck { seed, depth, track })
}

fn pick(rng: &mut ChaCha8Rng, pool: &[usize], n: usize) -> Result<Vec<usize>> {
    if pool.len() < n {
        return Err(Error::InvalidArgument(format!(
            "only {} candidate pixels for {n} requested",
            pool.len()
        )));
    }
    let mut idx: Vec<usize> = sample(rng, pool.len(), n)
        .into_iter()
        .map(|k| pool[k])
        .collect();
    idx.sort_unstable();
    Ok(idx)
}
