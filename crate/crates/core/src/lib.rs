//! Geometry toolkit and evaluation harness for equirectangular (ERP) video.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod egomotion;
pub mod error;
pub mod io;
pub mod lift3d;
pub mod losses;
pub mod metrics;
pub mod numeric;
pub mod pose;
pub mod sphere;
pub mod synth;
pub mod tracks;

pub use error::{Error, Result};
pub use pose::{PoseSequence, RigidPose};
pub use tracks::{Track, TrackSet};

// Guide chapters, compiled as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sphere.md")]
    mod sphere {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/egomotion.md")]
    mod egomotion {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/lift3d.md")]
    mod lift3d {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
