use rayon::prelude::*;

use super::scene::SceneSpec;
use crate::error::{Error, Result};
use crate::sphere::{erp_to_dir, DepthUnit, DepthVideo, ErpCoord, ErpVideo, RgbFrame};

/// Color and radial depth of frame `t`, ray cast at every pixel center.
pub fn render_erp(scene: &SceneSpec, t: usize) -> Result<(RgbFrame, Vec<f64>)> {
    if t >= scene.num_frames {
        return Err(Error::InvalidArgument(format!(
            "frame {t} out of range for {} frames",
            scene.num_frames
        )));
    }
    let pose = scene.pose(t);
    let origin = pose.camera_center();
    if (0..3).any(|i| origin[i].abs() >= scene.half_extents[i]) {
        return Err(Error::CameraOutsideScene(t));
    }
    let cam_to_world = pose.rotation.transpose();
    let anchor = scene.sphere_center(t);
    let (w, h) = (scene.width, scene.height);
    let rows: Vec<(Vec<f32>, Vec<f64>)> = (0..h)
        .into_par_iter()
        .map(|row| {
            let mut rgb = Vec::with_capacity(3 * w);
            let mut depth = Vec::with_capacity(w);
            for col in 0..w {
                let u = ErpCoord::from_pixel(col as f64, row as f64, w, h);
                let dir = cam_to_world * erp_to_dir(u).as_vec();
                let hit = scene.cast(&origin, &dir, t);
                rgb.extend_from_slice(&scene.shade(&hit, anchor));
                depth.push(hit.distance);
            }
            (rgb, depth)
        })
        .collect();
    let mut frame = RgbFrame::new(w, h);
    let mut depth = Vec::with_capacity(w * h);
    for (row, (rgb, d)) in rows.into_iter().enumerate() {
        frame.data[row * 3 * w..(row + 1) * 3 * w].copy_from_slice(&rgb);
        depth.extend(d);
    }
    Ok((frame, depth))
}

/// Every frame of the scene.
pub fn render_video(scene: &SceneSpec) -> Result<(ErpVideo, DepthVideo)> {
    scene.validate()?;
    let mut frames = Vec::with_capacity(scene.num_frames);
    let mut depths = Vec::with_capacity(scene.num_frames);
    for t in 0..scene.num_frames {
        let (f, d) = render_erp(scene, t)?;
        frames.push(f);
        depths.push(d);
    }
    let video = ErpVideo::new(frames, scene.fps)?;
    let depth = DepthVideo::from_frames(DepthUnit::Meters, scene.height, scene.width, depths)?;
    Ok((video, depth))
}
