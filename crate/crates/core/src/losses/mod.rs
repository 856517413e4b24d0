//! Training objectives as pure array operators with analytic gradients.

mod confidence;
mod depth;
mod flow;
mod gradcheck;
mod total;
mod track;

pub use confidence::{confidence, NoiseLevel, DEFAULT_SIGMA_MAX};
pub use depth::{depth_loss, DepthLossConfig};
pub use flow::{clean_estimate, sample_sigma, velocity_loss, LatentTriple};
pub use gradcheck::{check_gradient, GradCheckReport};
pub use total::{total_loss, LossReport, LossWeights};
pub use track::{
    augment_state, states_from_depth, states_from_tracks, track_loss, AugmentedState, StateVec,
    TemporalAlignment, TrackLossConfig, DEFAULT_ALPHA, DEFAULT_BETA,
};

/// Scalar loss and its gradient with respect to the predicted depth values.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWithGrad {
    pub value: f64,
    pub grad: Vec<f64>,
}
