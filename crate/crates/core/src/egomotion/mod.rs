//! Camera ego-motion from tracked points with depth.
//!
//! Points seen in consecutive frames are lifted into each frame's camera
//! coordinates, aligned rigidly with RANSAC, and the pairwise motions are
//! chained into world-to-camera poses anchored at frame 0.

mod ransac;
mod rigid;
mod trajectory;
mod umeyama;

pub use ransac::{ransac, Consensus, RansacModel};
pub use rigid::{ransac_rigid, RansacParams, RigidFit};
pub use trajectory::{
    camera_point, compensate, estimate_trajectory, lift_point, pair_correspondences,
    DEPTH_EDGE_RATIO,
};
pub use umeyama::{umeyama, umeyama_with_scale, Correspondences};
