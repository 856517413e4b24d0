//! Equirectangular and spherical conventions, pinhole cropping and
//! compositing, and the ERP-specific adaptations (latitude-aware positions,
//! area weights, circular shifts).
//!
//! Axis convention: +z forward (`u = 0.5, v = 0.5`), +y up (`v = 0`), +x
//! right (`u = 0.75`). Pixel `(col, row)` of a `W × H` panorama sits at
//! `u = (col + ½)/W`, `v = (row + ½)/H`.

mod camera;
mod coords;
mod erp;
mod video;

pub use camera::{composite_to_erp, sample_perspective, FillPolicy, PerspectiveCamera};
pub use coords::{dir_to_erp, erp_to_dir, pitch_matrix, yaw_matrix, Direction3, ErpCoord, Vec3};
pub use erp::{
    area_weights, circular_shift, circular_shift_depth, circular_shift_frame, latitude_positions,
    masked_blend, resample_depth, resample_indices, resample_temporal, resample_video,
};
pub use video::{Bilinear, DepthUnit, DepthVideo, ErpVideo, MaskFrame, RgbFrame, VisibilityMask};
