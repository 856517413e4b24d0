//! Panorama-to-point-cloud lifting, planar cleanup, and z-buffered
//! novel-view rendering.

mod cloud;
mod paths;
mod planar;
mod ply;
mod render;

pub use cloud::{lift_pointcloud, CloudPoint, PointCloud};
pub use paths::CameraPath;
pub use planar::{planar_regularize, PlanarParams, Plane};
pub use ply::{decode_ply, encode_ply, export_ply, import_ply};
pub use render::{psnr, render_pointcloud, RenderedView, SplatConfig};
