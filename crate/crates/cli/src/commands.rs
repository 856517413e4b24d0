use std::io::Write;
use std::path::Path;

use erpkit::egomotion::{estimate_trajectory, RansacParams};
use erpkit::io;
use erpkit::lift3d::{
    export_ply, import_ply, lift_pointcloud, planar_regularize, render_pointcloud, CameraPath,
    PlanarParams, SplatConfig,
};
use erpkit::losses::{
    depth_loss, states_from_depth, states_from_tracks, total_loss, track_loss, DepthLossConfig,
    LossWeights, NoiseLevel, TrackLossConfig,
};
use erpkit::pose::RigidPose;
use erpkit::sphere::{
    area_weights, composite_to_erp, sample_perspective, DepthUnit, DepthVideo, ErpVideo,
    FillPolicy, PerspectiveCamera, RgbFrame,
};
use erpkit::synth::{generate_clip, oracle_gradcheck, GradcheckSetup, SceneSpec};

use crate::{
    output_path, CliError, CliResult, CompositeArgs, CropArgs, EgomotionArgs, Fill, GradcheckArgs,
    LiftArgs, LossArgs, PathPreset, RansacArgs, RenderArgs, SynthArgs, View,
};

fn invalid(m: impl Into<String>) -> CliError {
    CliError::Invalid(m.into())
}

fn camera(view: &View, width: usize, height: usize) -> CliResult<PerspectiveCamera> {
    Ok(PerspectiveCamera::new(
        view.fov,
        view.yaw.to_radians(),
        view.pitch.to_radians(),
        width,
        height,
    )?)
}

fn require_exists(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Io(format!(
            "{}: no such file or directory",
            path.display()
        )))
    }
}

pub fn synth(a: SynthArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "synth")?;
    let mut scene = match &a.scene {
        Some(p) => io::read_json::<SceneSpec>(p)?,
        None => SceneSpec {
            num_frames: 93,
            height: 512,
            width: 1024,
            fps: 16.0,
            ..SceneSpec::default()
        },
    };
    scene.seed = a.seed;
    if let Some(v) = a.frames {
        scene.num_frames = v;
    }
    if let Some(v) = a.height {
        scene.height = v;
    }
    if let Some(v) = a.width {
        scene.width = v;
    }
    if let Some(v) = a.fps {
        scene.fps = v;
    }
    let clip = generate_clip(&scene, &out)?;
    writeln!(
        stdout,
        "wrote {} frames ({}x{}) and {} tracks to {}",
        clip.video.len(),
        scene.width,
        scene.height,
        clip.tracks.len(),
        out.display()
    )?;
    Ok(())
}

/// Applies `f` to a single PNG or to every frame of a video directory.
fn map_frames(
    input: &Path,
    out: &Path,
    f: impl Fn(&RgbFrame) -> CliResult<RgbFrame>,
) -> CliResult<usize> {
    require_exists(input)?;
    if input.is_dir() {
        let video = io::read_erp_video(input)?;
        let frames = video.frames.iter().map(&f).collect::<CliResult<Vec<_>>>()?;
        let n = frames.len();
        io::write_erp_video(out, &ErpVideo::new(frames, video.fps)?)?;
        Ok(n)
    } else {
        let frame = io::read_png_rgb(input)?;
        io::write_png_rgb(out, &f(&frame)?)?;
        Ok(1)
    }
}

pub fn crop(a: CropArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "crop")?;
    let cam = camera(&a.view, a.width, a.height)?;
    let n = map_frames(&a.input, &out, |f| Ok(sample_perspective(f, &cam)?))?;
    writeln!(stdout, "cropped {n} frame(s) to {}", out.display())?;
    Ok(())
}

pub fn composite(a: CompositeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "composite")?;
    require_exists(&a.input)?;
    let fill = match a.fill {
        Fill::Constant => FillPolicy::Constant {
            value: a.fill_value,
        },
        Fill::Noise => FillPolicy::Noise {
            scale: a.noise_scale,
            // clap enforces the seed for noise fill
            seed: a.seed.unwrap_or_default(),
        },
    };
    let probe = if a.input.is_dir() {
        let meta = io::read_video_meta(&a.input)?;
        (meta.width, meta.height)
    } else {
        let f = io::read_png_rgb(&a.input)?;
        (f.width, f.height)
    };
    let cam = camera(&a.view, probe.0, probe.1)?;
    let masks = std::cell::RefCell::new(Vec::new());
    let n = map_frames(&a.input, &out, |f| {
        let (erp, mask) = composite_to_erp(f, &cam, a.erp_width, a.erp_height, &fill)?;
        masks.borrow_mut().push(mask);
        Ok(erp)
    })?;
    if let Some(mask_out) = &a.mask_out {
        let masks = masks.into_inner();
        if a.input.is_dir() {
            io::write_masks(mask_out, &masks)?;
        } else {
            io::write_mask_png(mask_out, &masks[0])?;
        }
    }
    writeln!(stdout, "composited {n} frame(s) to {}", out.display())?;
    Ok(())
}

fn normalized(depth: &DepthVideo, max: f64) -> CliResult<DepthVideo> {
    let (t, h, w) = depth.shape();
    Ok(DepthVideo::new(
        t,
        h,
        w,
        DepthUnit::Normalized,
        depth.data.iter().map(|v| v / max).collect(),
    )?)
}

pub fn loss(a: LossArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let pred = io::read_depth(&a.pred_depth)?;
    let gt = io::read_depth(&a.gt_depth)?;
    let tracks = io::read_tracks(&a.tracks)?;
    let poses = io::read_poses(&a.poses)?;
    if pred.shape() != gt.shape() {
        return Err(invalid(format!(
            "pred depth {:?} vs gt depth {:?}",
            pred.shape(),
            gt.shape()
        )));
    }
    let noise = NoiseLevel::new(a.sigma, a.sigma_max)?;

    // the depth loss works on depth relative to the largest ground truth
    let max = gt
        .data
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    // the filter above already dropped NaN
    if max <= 0.0 {
        return Err(invalid("ground-truth depth has no positive finite values"));
    }
    let weights = area_weights(gt.height)?;
    let l_depth = depth_loss(
        &normalized(&pred, max)?,
        &normalized(&gt, max)?,
        &DepthLossConfig::default(),
        &noise,
        &weights,
    )?
    .value;

    let cfg = TrackLossConfig {
        alpha: a.alpha,
        beta: a.beta,
        ..TrackLossConfig::default()
    };
    let reference = if a.use_track_xyz {
        states_from_tracks(&tracks, a.alpha, a.beta)?
    } else {
        states_from_depth(&tracks, &gt, &poses, &cfg)?
    };
    let l_track = track_loss(&tracks, &pred, &poses, &reference, &noise, &cfg)?.value;

    let w = LossWeights {
        lambda_d: a.lambda_d,
        lambda_tau: a.lambda_tau,
        warmup_iters: a.warmup,
    };
    let report = total_loss(a.l_visual, l_depth, l_track, &w, a.iter, a.sigma);
    let text = serde_json::to_string_pretty(&report).map_err(|e| invalid(e.to_string()))?;
    writeln!(stdout, "{text}")?;
    if let Some(out) = &a.out {
        io::write_json(out, &report)?;
    }
    Ok(())
}

pub fn gradcheck(a: GradcheckArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let setup = GradcheckSetup {
        height: a.height,
        width: a.width,
        frames: a.frames,
        pixels: a.pixels,
        step: a.step,
        track_step: a.track_step,
        ..GradcheckSetup::default()
    };
    let r = oracle_gradcheck(a.seed, &setup)?;
    writeln!(
        stdout,
        "depth_loss: {} coordinates checked, {} near kinks skipped, max relative error {:.3e}",
        r.depth.checked, r.depth.skipped_kinks, r.depth.max_rel_error
    )?;
    writeln!(
        stdout,
        "track_loss: {} coordinates checked, {} near kinks skipped, max relative error {:.3e}",
        r.track.checked, r.track.skipped_kinks, r.track.max_rel_error
    )?;
    writeln!(stdout, "max relative error: {:.3e}", r.max_rel_error())?;
    if r.max_rel_error() < a.tolerance {
        Ok(())
    } else {
        Err(invalid(format!(
            "max relative error {:.3e} exceeds {:.0e}",
            r.max_rel_error(),
            a.tolerance
        )))
    }
}

pub fn ransac_params(a: &RansacArgs, seed: u64) -> CliResult<RansacParams> {
    let p = RansacParams {
        iterations: a.iterations,
        inlier_threshold: a.threshold,
        relative_threshold: a.relative_threshold,
        min_inliers: a.min_inliers,
        seed,
    };
    p.validate()?;
    Ok(p)
}

pub fn egomotion(a: EgomotionArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "egomotion/poses.json")?;
    let tracks = io::read_tracks(&a.tracks)?;
    let depth = io::read_depth(&a.depth)?;
    let poses = estimate_trajectory(&tracks, &depth, &ransac_params(&a.ransac, a.seed)?)?;
    io::write_poses(&out, &poses)?;
    writeln!(stdout, "wrote {} poses to {}", poses.len(), out.display())?;
    Ok(())
}

pub fn lift(a: LiftArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "lift/cloud.ply")?;
    require_exists(&a.input)?;
    let frame = if a.input.is_dir() {
        io::read_png_rgb(&a.input.join(io::frame_file_name(a.frame_index)))?
    } else {
        io::read_png_rgb(&a.input)?
    };
    let mut depth = io::read_depth(&a.depth)?;
    if !(a.depth_scale > 0.0 && a.depth_scale.is_finite()) {
        return Err(invalid(format!(
            "depth scale must be positive, got {}",
            a.depth_scale
        )));
    }
    if a.depth_scale != 1.0 {
        depth.data.iter_mut().for_each(|v| *v *= a.depth_scale);
    }
    let pose = match &a.poses {
        Some(p) => *io::read_poses(p)?
            .get(a.frame_index)
            .ok_or_else(|| invalid(format!("no pose for frame {}", a.frame_index)))?,
        None => RigidPose::identity(),
    };
    let mut pc = lift_pointcloud(&frame, &depth, a.frame_index, &pose, a.stride)?;
    let mut note = String::new();
    if a.planar {
        let params = PlanarParams {
            eps: a.eps,
            k_planes: a.k_planes,
            // clap ties --planar to --seed
            seed: a.seed.unwrap_or_default(),
            ..PlanarParams::default()
        };
        let (snapped, planes) = planar_regularize(&pc, &params);
        pc = snapped;
        note = format!(", {} planes", planes.len());
    }
    export_ply(&pc, &out)?;
    writeln!(
        stdout,
        "wrote {} points{note} to {}",
        pc.len(),
        out.display()
    )?;
    Ok(())
}

pub fn render(a: RenderArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "render")?;
    let pc = import_ply(&a.ply)?;
    let anchor = match &a.anchor_poses {
        Some(p) => *io::read_poses(p)?
            .get(a.anchor_index)
            .ok_or_else(|| invalid(format!("no pose at index {}", a.anchor_index)))?,
        None => RigidPose::identity(),
    };
    let path = match a.path {
        PathPreset::Orbit => CameraPath::Orbit { radius: a.radius },
        PathPreset::Walk => CameraPath::Walk { step: a.step },
        PathPreset::Fly => CameraPath::Fly {
            step: a.step,
            rise: a.rise,
            sweep: a.sweep.to_radians(),
        },
    };
    let cam = camera(&a.view, a.width, a.height)?;
    let cfg = SplatConfig {
        radius_px: a.splat_radius,
        ..SplatConfig::default()
    };
    let poses = path.poses(&anchor, a.frames);
    let mut depth = Vec::with_capacity(poses.len());
    for (i, pose) in poses.iter().enumerate() {
        let view = render_pointcloud(&pc, &cam, pose, &cfg)?;
        io::write_png_rgb(&out.join(io::frame_file_name(i)), &view.rgb)?;
        depth.push(view.depth);
    }
    io::write_depth(
        &out.join("depth.fdm"),
        &DepthVideo::from_frames(DepthUnit::Meters, a.height, a.width, depth)?,
    )?;
    io::write_poses(&out.join("poses.json"), &poses)?;
    writeln!(
        stdout,
        "rendered {} views of {} points to {}",
        poses.len(),
        pc.len(),
        out.display()
    )?;
    Ok(())
}
