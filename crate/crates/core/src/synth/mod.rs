//! Procedural oracle scenes: a checkerboard room with an optional moving
//! sphere, ray cast directly to ERP with exact depth, tracks and poses.

mod clip;
mod gradcheck;
mod render;
mod scene;
mod tracks;

pub use clip::{
    generate_clip, render_clip, write_clip, OracleClip, OracleManifest, DEPTH_FILE, FRAMES_DIR,
    MANIFEST_FILE, POSES_FILE, TRACKS_FILE,
};
pub use gradcheck::{oracle_gradcheck, random_scene, GradcheckSetup, OracleGradcheck};
pub use render::{render_erp, render_video};
pub use scene::{ray_sphere, Checker, Hit, SceneSpec, SpherePath, SphereSpec, Surface};
pub use tracks::{exact_tracks, exact_tracks_at, grid_queries};
