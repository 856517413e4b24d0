use rayon::prelude::*;

use super::scene::{SceneSpec, Surface};
use crate::error::Result;
use crate::sphere::{dir_to_erp, erp_to_dir, ErpCoord, Vec3};
use crate::tracks::{Track, TrackSet};

/// Relative slack of the occlusion test, as a fraction of the scene scale.
const VISIBILITY_TOL: f64 = 1e-7;

/// Surface point fixed at frame 0: a wall point, or a sphere material point
/// stored relative to the sphere center.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Anchor {
    Wall(Vec3),
    Sphere(Vec3),
}

impl Anchor {
    fn position(&self, scene: &SceneSpec, t: usize) -> Vec3 {
        match *self {
            Anchor::Wall(p) => p,
            Anchor::Sphere(offset) => {
                scene
                    .sphere_center(t)
                    .expect("sphere anchor without sphere")
                    + offset
            }
        }
    }
}

/// Regular query grid at pixel-center-like positions `((j+½)/cols, (i+½)/rows)`.
pub fn grid_queries(rows: usize, cols: usize) -> Vec<ErpCoord> {
    let mut q = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            q.push(ErpCoord::new(
                (j as f64 + 0.5) / cols as f64,
                (i as f64 + 0.5) / rows as f64,
            ));
        }
    }
    q
}

/// Exact tracks for the scene's query grid.
pub fn exact_tracks(scene: &SceneSpec) -> Result<TrackSet> {
    let [rows, cols] = scene.track_grid;
    exact_tracks_at(scene, &grid_queries(rows, cols))
}

/// Tracks seeded at `queries` in frame 0 and followed analytically through
/// every frame. Positions are exact in every frame; visibility is false
/// where the point is hidden by the sphere or faces away from the camera.
pub fn exact_tracks_at(scene: &SceneSpec, queries: &[ErpCoord]) -> Result<TrackSet> {
    scene.validate()?;
    let poses = scene.poses();
    let origin0 = poses[0].camera_center();
    let cam0_to_world = poses[0].rotation.transpose();
    let tol = VISIBILITY_TOL * scene.scale();
    let tracks = queries
        .par_iter()
        .enumerate()
        .map(|(id, &q)| {
            let dir = cam0_to_world * erp_to_dir(q).as_vec();
            let hit = scene.cast(&origin0, &dir, 0);
            let anchor = match hit.surface {
                Surface::Wall(_) => Anchor::Wall(hit.point),
                Surface::Sphere => Anchor::Sphere(hit.point - scene.sphere_center(0).unwrap()),
            };
            let mut uv = Vec::with_capacity(scene.num_frames);
            let mut vis = Vec::with_capacity(scene.num_frames);
            let mut xyz = Vec::with_capacity(scene.num_frames);
            for (t, pose) in poses.iter().enumerate() {
                let x = anchor.position(scene, t);
                let cam = pose.apply(&x);
                let c = dir_to_erp(&cam)?;
                let origin = pose.camera_center();
                let to_point = x - origin;
                let dist = to_point.norm();
                let seen = scene.cast(&origin, &(to_point / dist), t);
                uv.push(if t == 0 { q } else { c });
                vis.push(seen.distance >= dist - tol);
                xyz.push(Some(x));
            }
            Ok(Track {
                id: id as u64,
                uv,
                vis,
                xyz_world: Some(xyz),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TrackSet::new(scene.num_frames, tracks)
}
