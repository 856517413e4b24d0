use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::render::render_video;
use super::scene::SceneSpec;
use super::tracks::exact_tracks;
use crate::error::Result;
use crate::io;
use crate::metrics::ClipFiles;
use crate::pose::PoseSequence;
use crate::sphere::{DepthVideo, ErpVideo};
use crate::tracks::TrackSet;

pub const FRAMES_DIR: &str = "frames";
pub const DEPTH_FILE: &str = "depth.fdm";
pub const TRACKS_FILE: &str = "tracks.json";
pub const POSES_FILE: &str = "poses.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Rendered scene with its exact annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleClip {
    pub video: ErpVideo,
    /// Metric radial depth.
    pub depth: DepthVideo,
    pub tracks: TrackSet,
    pub poses: PoseSequence,
}

/// Sidecar written next to a generated clip. Paths are relative to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleManifest {
    pub paths: ClipFiles,
    pub num_frames: usize,
    pub num_tracks: usize,
    pub seed: u64,
    pub scene: SceneSpec,
}

pub fn render_clip(scene: &SceneSpec) -> Result<OracleClip> {
    let (video, depth) = render_video(scene)?;
    Ok(OracleClip {
        video,
        depth,
        tracks: exact_tracks(scene)?,
        poses: scene.poses(),
    })
}

/// Renders `scene` and writes frames, depth, tracks, poses and
/// `manifest.json` under `out`.
pub fn generate_clip(scene: &SceneSpec, out: &Path) -> Result<OracleClip> {
    let clip = render_clip(scene)?;
    write_clip(&clip, scene, out)?;
    Ok(clip)
}

pub fn write_clip(clip: &OracleClip, scene: &SceneSpec, out: &Path) -> Result<OracleManifest> {
    io::write_erp_video(&out.join(FRAMES_DIR), &clip.video)?;
    io::write_depth(&out.join(DEPTH_FILE), &clip.depth)?;
    io::write_tracks(&out.join(TRACKS_FILE), &clip.tracks)?;
    io::write_poses(&out.join(POSES_FILE), &clip.poses)?;
    let manifest = OracleManifest {
        paths: ClipFiles {
            frames_dir: PathBuf::from(FRAMES_DIR),
            depth_file: PathBuf::from(DEPTH_FILE),
            tracks_file: PathBuf::from(TRACKS_FILE),
            poses_file: Some(PathBuf::from(POSES_FILE)),
            embeddings: Default::default(),
            caption_embedding: None,
        },
        num_frames: clip.video.len(),
        num_tracks: clip.tracks.len(),
        seed: scene.seed,
        scene: scene.clone(),
    };
    io::write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
