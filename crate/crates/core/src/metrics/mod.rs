//! Evaluation panel: a Fréchet kernel over encoder embeddings, caption
//! alignment, and geometric self-consistency scores of re-annotated clips.

mod frechet;
mod geometry;
mod report;

pub use frechet::{frechet, gaussian_fit, sqrtm_psd, SYMMETRY_TOL};
pub use geometry::{clip_t, depth_sigma, smooth3d, track_life};
pub use report::{
    aggregate, aggregate_rows, evaluate_clip, evaluate_entry, format_table, load_bundle,
    parse_manifest, world_tracks, ClipBundle, ClipFiles, ClipMeans, EmbeddingPaths, Embeddings,
    EvalConfig, FidMode, ManifestEntry, MetricRow, MetricValue, SourceAggregate, DEFAULT_T_EVAL,
    SOURCES,
};
