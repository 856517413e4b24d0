mod common;

use common::moving_camera;
use erpkit::lift3d::{
    decode_ply, encode_ply, export_ply, import_ply, lift_pointcloud, planar_regularize, psnr,
    render_pointcloud, CloudPoint, PlanarParams, PointCloud, SplatConfig,
};
use erpkit::pose::RigidPose;
use erpkit::sphere::{sample_perspective, PerspectiveCamera, Vec3};
use erpkit::synth::{render_erp, SceneSpec};
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle_cloud(scene: &SceneSpec, t: usize, stride: usize) -> PointCloud {
    let (frame, depth) = render_erp(scene, t).unwrap();
    let depth = erpkit::sphere::DepthVideo::from_frames(
        erpkit::sphere::DepthUnit::Meters,
        scene.height,
        scene.width,
        vec![depth],
    )
    .unwrap();
    lift_pointcloud(&frame, &depth, 0, &scene.pose(t), stride).unwrap()
}

/// Distance to the nearest room face or the sphere surface.
fn surface_distance(scene: &SceneSpec, t: usize, p: &Vec3) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        best = best.min((p[i].abs() - scene.half_extents[i]).abs());
    }
    if let (Some(sp), Some(c)) = (&scene.sphere, scene.sphere_center(t)) {
        best = best.min(((p - c).norm() - sp.radius).abs());
    }
    best
}

#[test]
fn lifted_points_lie_on_scene_surfaces() {
    let scene = moving_camera(128, 256, 20, true);
    for t in [0, 11] {
        let pc = oracle_cloud(&scene, t, 1);
        assert_eq!(pc.len(), 128 * 256);
        let worst = pc
            .points
            .iter()
            .map(|p| surface_distance(&scene, t, &p.xyz))
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "frame {t}: worst surface distance {worst}");
    }
}

#[test]
fn self_reprojection_matches_the_panorama() {
    let scene = moving_camera(512, 1024, 20, true);
    let t = 7;
    let (frame, _) = render_erp(&scene, t).unwrap();
    let pc = oracle_cloud(&scene, t, 1);
    for (yaw, pitch) in [(0.0, 0.0), (1.2, 0.2), (-2.5, -0.3)] {
        // view pixels finer than the point spacing so radius-1 splats close the gaps
        let cam = PerspectiveCamera::new(80.0, yaw, pitch, 320, 240).unwrap();
        let view = render_pointcloud(&pc, &cam, &scene.pose(t), &SplatConfig::default()).unwrap();
        let reference = sample_perspective(&frame, &cam).unwrap();
        let db = psnr(&view.rgb, &reference).unwrap();
        assert!(db > 25.0, "yaw {yaw}: {db} dB");
        assert!(view.depth.iter().all(|d| d.is_finite()));
    }
}

#[test]
fn ply_round_trip_matches_lift_count() {
    let scene = moving_camera(32, 64, 4, true);
    let pc = oracle_cloud(&scene, 2, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.ply");
    export_ply(&pc, &path).unwrap();
    let back = import_ply(&path).unwrap();
    assert_eq!(back.len(), pc.len());
    for (a, b) in pc.points.iter().zip(&back.points) {
        for k in 0..3 {
            assert_eq!(b.xyz[k], a.xyz[k] as f32 as f64);
            assert_eq!(
                (b.rgb[k] * 255.0).round(),
                (a.rgb[k].clamp(0.0, 1.0) * 255.0).round()
            );
        }
    }
    assert_eq!(decode_ply(&encode_ply(&back)).unwrap(), back);
    assert!(import_ply(&dir.path().join("missing.ply")).is_err());
}

#[test]
fn planar_pass_is_idempotent_on_the_room() {
    let mut scene = moving_camera(48, 96, 4, true);
    scene.camera_keyframes = vec![RigidPose::identity()];
    let pc = oracle_cloud(&scene, 0, 1);
    let params = PlanarParams {
        seed: 3,
        ..Default::default()
    };
    let (once, planes) = planar_regularize(&pc, &params);
    assert!(planes.len() >= 5, "found {} planes", planes.len());
    let (twice, _) = planar_regularize(&once, &params);
    assert_eq!(once, twice);
}

fn noisy_wall(
    rng: &mut ChaCha8Rng,
    n: usize,
    normal_axis: usize,
    offset: f64,
    noise: f64,
) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            let mut p = Vec3::new(
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
            );
            p[normal_axis] = offset + rng.random_range(-noise..noise);
            p
        })
        .collect()
}

fn cloud_of(points: Vec<Vec3>) -> PointCloud {
    PointCloud {
        points: points
            .into_iter()
            .map(|xyz| CloudPoint {
                xyz,
                rgb: [0.5; 3],
                source: None,
            })
            .collect(),
    }
}

#[test]
fn two_perpendicular_walls_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eps = 0.02;
    let mut pts = noisy_wall(&mut rng, 600, 0, 0.0, 0.4 * eps);
    pts.extend(noisy_wall(&mut rng, 300, 2, 0.0, 0.4 * eps));
    let params = PlanarParams {
        eps: Some(eps),
        k_planes: 2,
        seed: 1,
        ..Default::default()
    };
    let (out, planes) = planar_regularize(&cloud_of(pts.clone()), &params);
    assert_eq!(planes.len(), 2);
    // the larger wall wins the first round
    assert!(planes[0].normal.x.abs() > 1.0 - 1e-4);
    assert!(planes[1].normal.z.abs() > 1.0 - 1e-4);
    for (orig, p) in pts.iter().zip(&out.points) {
        let d0 = planes[0].distance(orig).abs();
        let d1 = planes[1].distance(orig).abs();
        if d0 < eps {
            // edge points near both walls belong to the first one
            assert!(planes[0].distance(&p.xyz).abs() < 1e-9);
        } else if d1 < eps {
            assert!(planes[1].distance(&p.xyz).abs() < 1e-9);
        } else {
            assert_eq!(*orig, p.xyz);
        }
    }
}

/// Axis permutations with signs: exact in floating point.
fn signed_permutation(perm: [usize; 3], flips: [bool; 3]) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for (row, &col) in perm.iter().enumerate() {
        m[(row, col)] = if flips[row] { -1.0 } else { 1.0 };
    }
    if m.determinant() < 0.0 {
        m.row_mut(0).neg_mut();
    }
    m
}

fn dyadic_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
    cloud_of(
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-32..32) as f64,
                    rng.random_range(-32..32) as f64,
                    rng.random_range(-32..32) as f64,
                ) / 8.0
            })
            .collect(),
    )
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rendering_is_rigid_equivariant(
        seed in 0u64..1000,
        p in 0usize..6,
        flips in any::<[bool; 3]>(),
        q in 0usize..6,
        shift in prop::array::uniform3(-4i32..4),
        cam_shift in prop::array::uniform3(-4i32..4),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pc = dyadic_cloud(&mut rng, 300);
        let g_rot = signed_permutation(PERMS[p], flips);
        let g = RigidPose::new(g_rot, Vec3::new(shift[0] as f64, shift[1] as f64, shift[2] as f64) / 4.0);
        let pose = RigidPose::new(
            signed_permutation(PERMS[q], [false; 3]),
            Vec3::new(cam_shift[0] as f64, cam_shift[1] as f64, cam_shift[2] as f64) / 2.0,
        );
        let cam = PerspectiveCamera::new(90.0, 0.0, 0.0, 40, 30).unwrap();
        let cfg = SplatConfig::default();
        let a = render_pointcloud(&pc, &cam, &pose, &cfg).unwrap();
        let moved = pc.transformed(|x| g.apply(x));
        let b = render_pointcloud(&moved, &cam, &pose.compose(&g.inverse()), &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn z_buffer_keeps_the_nearer_point(
        x in -1.0f64..1.0, y in -1.0f64..1.0, near in 0.5f64..5.0, gap in 1e-6f64..5.0, swap: bool,
    ) {
        let cam = PerspectiveCamera::new(90.0, 0.0, 0.0, 21, 21).unwrap();
        let dir = Vec3::new(x, y, 2.0);
        let a = CloudPoint { xyz: dir * (near / 2.0), rgb: [1.0, 0.0, 0.0], source: None };
        let b = CloudPoint { xyz: dir * ((near + gap) / 2.0), rgb: [0.0, 1.0, 0.0], source: None };
        let points = if swap { vec![b, a] } else { vec![a, b] };
        let cfg = SplatConfig { radius_px: 0, ..Default::default() };
        let v = render_pointcloud(&PointCloud { points }, &cam, &RigidPose::identity(), &cfg).unwrap();
        let (px, py) = cam.project(&dir).unwrap();
        let k = py.floor() as usize * 21 + px.floor() as usize;
        prop_assert_eq!(v.depth[k], a.xyz.z);
        prop_assert_eq!(v.rgb.pixel(px.floor() as usize, py.floor() as usize), [1.0, 0.0, 0.0]);
    }
}
