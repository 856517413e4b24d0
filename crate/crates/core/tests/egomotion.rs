mod common;

use common::{moving_camera, rotation_error_deg, translation_error, unit_room, with_fast_sphere};
use erpkit::egomotion::{
    compensate, estimate_trajectory, ransac_rigid, umeyama, Correspondences, RansacParams,
};
use erpkit::sphere::Vec3;
use erpkit::synth::{exact_tracks, render_video, SceneSpec};
use erpkit::tracks::TrackSet;
use erpkit::{Error, RigidPose};
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

fn random_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    let axis: [f64; 3] = UnitSphere.sample(rng);
    Rotation3::from_axis_angle(
        &nalgebra::Unit::new_normalize(Vec3::from(axis)),
        rng.random_range(0.0..3.1),
    )
}

#[test]
fn noisy_alignment_monte_carlo() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_rotation(&mut rng);
        let t = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let src: Vec<Vec3> = (0..100)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let dst: Vec<Vec3> = src
            .iter()
            .map(|p| {
                let n = Vec3::from_fn(|_, _| {
                    0.01 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                });
                r * p + t + n
            })
            .collect();
        let pose = umeyama(&Correspondences::new(src, dst).unwrap()).unwrap();
        let angle = pose
            .rotation_angle_to(&RigidPose::new(r.into_inner(), t))
            .to_degrees();
        assert!(angle < 0.5, "seed {seed}: {angle}");
        assert!((pose.translation - t).norm() < 0.01, "seed {seed}");
    }
}

#[test]
fn umeyama_is_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let src: Vec<Vec3> = (0..20)
        .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
        .collect();
    let dst: Vec<Vec3> = src
        .iter()
        .map(|p| Vec3::new(p.z, -p.x, p.y + 0.3) + Vec3::from_fn(|_, _| 0.01 * rng.random::<f64>()))
        .collect();
    let a = umeyama(&Correspondences::new(src.clone(), dst.clone()).unwrap()).unwrap();
    let mut idx: Vec<usize> = (0..20).rev().collect();
    idx.swap(3, 11);
    let c = Correspondences::new(src, dst).unwrap().subset(&idx);
    let b = umeyama(&c).unwrap();
    assert!((a.rotation - b.rotation).amax() < 1e-12);
    assert!((a.translation - b.translation).norm() < 1e-12);
}

#[test]
fn pure_outliers_have_no_consensus() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut pt = || {
            Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            )
        };
        let src: Vec<Vec3> = (0..60).map(|_| pt()).collect();
        let dst: Vec<Vec3> = (0..60).map(|_| pt()).collect();
        let c = Correspondences::new(src, dst).unwrap();
        let p = RansacParams {
            inlier_threshold: Some(0.05),
            seed,
            ..Default::default()
        };
        assert!(
            matches!(ransac_rigid(&c, &p), Err(Error::NoConsensus { .. })),
            "seed {seed}"
        );
    }
}

#[test]
fn static_scene_gives_identity_poses() {
    let s = unit_room(32, 64, 5);
    let (_, depth) = render_video(&s).unwrap();
    let tracks = exact_tracks(&s).unwrap().without_xyz();
    let poses = estimate_trajectory(&tracks, &depth, &RansacParams::default()).unwrap();
    for p in &poses {
        assert!((p.rotation - nalgebra::Matrix3::identity()).amax() < 1e-6);
        assert!(p.translation.norm() < 1e-6);
    }
    let world = compensate(&tracks, &depth, &poses).unwrap();
    for tr in &world.tracks {
        let xyz: Vec<Vec3> = tr
            .xyz_world
            .as_ref()
            .unwrap()
            .iter()
            .flatten()
            .copied()
            .collect();
        if xyz.is_empty() {
            continue;
        }
        let mean = xyz.iter().sum::<Vec3>() / xyz.len() as f64;
        let var = xyz.iter().map(|p| (p - mean).norm_squared()).sum::<f64>() / xyz.len() as f64;
        assert!(var.sqrt() < 1e-6);
    }
}

fn check_trajectory(scene: &SceneSpec, tracks: &TrackSet, label: &str) {
    let (_, depth) = render_video(scene).unwrap();
    let est = estimate_trajectory(tracks, &depth, &RansacParams::default()).unwrap();
    let truth = scene.poses();
    // the estimate is anchored at frame 0; re-anchor the truth the same way
    let anchor = truth[0].inverse();
    let (mut worst_r, mut worst_t) = (0.0f64, 0.0f64);
    for (e, g) in est.iter().zip(&truth) {
        let g = g.compose(&anchor);
        worst_r = worst_r.max(rotation_error_deg(e, &g));
        worst_t = worst_t.max(translation_error(e, &g));
    }
    println!("{label}: rotation {worst_r:.2e} deg, translation {worst_t:.2e} m");
    assert!(worst_r < 0.1, "{label}: rotation {worst_r}");
    assert!(
        worst_t < 1e-3 * scene.scale(),
        "{label}: translation {worst_t}"
    );
}

#[test]
fn oracle_camera_path_is_recovered() {
    let s = moving_camera(128, 256, 93, false);
    let tracks = exact_tracks(&s).unwrap().without_xyz();
    check_trajectory(&s, &tracks, "static scene");
}

#[test]
fn moving_sphere_tracks_are_rejected() {
    let mut s = with_fast_sphere(moving_camera(128, 256, 93, false));
    s.track_grid = [96, 192];
    let all = exact_tracks(&s).unwrap();
    let center = s.sphere_center(0).unwrap();
    let on_sphere = |tr: &erpkit::Track| {
        let x = tr.xyz_world.as_ref().unwrap()[0].unwrap();
        (x - center).norm() < 0.5 + 1e-9
    };
    let (mover, wall): (Vec<_>, Vec<_>) = all.tracks.iter().cloned().partition(|t| on_sphere(t));
    assert!(!mover.is_empty());
    // keep 20% of the tracks on the sphere
    let n_wall = wall.len().min(mover.len() * 4);
    let step = wall.len() / n_wall;
    let mut tracks: Vec<_> = wall.into_iter().step_by(step).take(n_wall).collect();
    let n_mover = n_wall / 4;
    tracks.extend(mover.into_iter().take(n_mover));
    println!("{} wall + {} sphere tracks", n_wall, n_mover);
    let set = TrackSet::new(s.num_frames, tracks).unwrap().without_xyz();
    check_trajectory(&s, &set, "moving sphere");
}

#[test]
fn trajectory_is_deterministic() {
    let s = moving_camera(32, 64, 12, true);
    let (_, depth) = render_video(&s).unwrap();
    let tracks = exact_tracks(&s).unwrap().without_xyz();
    let p = RansacParams {
        seed: 5,
        ..Default::default()
    };
    let a = estimate_trajectory(&tracks, &depth, &p).unwrap();
    let b = estimate_trajectory(&tracks, &depth, &p).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reversed_clip_gives_inverse_trajectory() {
    let s = moving_camera(64, 128, 20, false);
    let (_, depth) = render_video(&s).unwrap();
    let tracks = exact_tracks(&s).unwrap().without_xyz();
    let p = RansacParams::default();
    let fwd = estimate_trajectory(&tracks, &depth, &p).unwrap();

    let t = s.num_frames;
    let rev_depth = erpkit::sphere::DepthVideo::from_frames(
        depth.unit,
        depth.height,
        depth.width,
        (0..t).rev().map(|i| depth.frame(i).to_vec()).collect(),
    )
    .unwrap();
    let mut rev_tracks = tracks.clone();
    for tr in &mut rev_tracks.tracks {
        tr.uv.reverse();
        tr.vis.reverse();
    }
    let rev = estimate_trajectory(&rev_tracks, &rev_depth, &p).unwrap();
    let last_inv = fwd[t - 1].inverse();
    for k in 0..t {
        let expected = fwd[t - 1 - k].compose(&last_inv);
        assert!(rotation_error_deg(&rev[k], &expected) < 0.05, "frame {k}");
        assert!(translation_error(&rev[k], &expected) < 1e-3, "frame {k}");
    }
}

/// Bilinear depth reads near the sphere limb can be off by centimeters, so the
/// path is compared through the per-frame median of the sample errors.
#[test]
fn compensated_sphere_tracks_follow_the_path() {
    let mut s = with_fast_sphere(moving_camera(512, 1024, 6, false));
    s.track_grid = [96, 192];
    let (_, depth) = render_video(&s).unwrap();
    let exact = exact_tracks(&s).unwrap();
    let world = compensate(&exact.without_xyz(), &depth, &s.poses()).unwrap();
    let center = s.sphere_center(0).unwrap();
    let mut per_frame = vec![Vec::new(); s.num_frames];
    for (e, w) in exact.tracks.iter().zip(&world.tracks) {
        let truth = e.xyz_world.as_ref().unwrap();
        if (truth[0].unwrap() - center).norm() > 0.5 + 1e-9 {
            continue;
        }
        for (t, got) in w.xyz_world.as_ref().unwrap().iter().enumerate() {
            if let Some(p) = got {
                per_frame[t].push((p - truth[t].unwrap()).norm());
            }
        }
    }
    for (t, mut errs) in per_frame.into_iter().enumerate() {
        assert!(errs.len() >= 10, "frame {t}: {} samples", errs.len());
        errs.sort_by(f64::total_cmp);
        let median = errs[errs.len() / 2];
        assert!(median < 1e-3, "frame {t}: median {median}");
    }
}
