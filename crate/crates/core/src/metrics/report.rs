use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::frechet::frechet;
use super::geometry::{clip_t, depth_sigma, smooth3d, track_life};
use crate::egomotion::{compensate, estimate_trajectory, RansacParams};
use crate::error::{Error, Result};
use crate::io;
use crate::numeric::fsum;
use crate::pose::PoseSequence;
use crate::sphere::{resample_depth, DepthVideo};
use crate::tracks::TrackSet;

pub const DEFAULT_T_EVAL: usize = 80;

/// Recognized clip sources.
pub const SOURCES: [&str; 3] = ["panogeo_heldout", "argus", "habitat"];

/// A metric that may have been skipped for lack of inputs. Serializes as a
/// number or the string `"not computed"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MetricValue {
    Value(f64),
    #[default]
    NotComputed,
}

const NOT_COMPUTED: &str = "not computed";

impl MetricValue {
    pub fn value(self) -> Option<f64> {
        match self {
            MetricValue::Value(v) => Some(v),
            MetricValue::NotComputed => None,
        }
    }
}

impl From<Option<f64>> for MetricValue {
    fn from(v: Option<f64>) -> Self {
        v.map_or(MetricValue::NotComputed, MetricValue::Value)
    }
}

impl Serialize for MetricValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MetricValue::Value(v) => s.serialize_f64(*v),
            MetricValue::NotComputed => s.serialize_str(NOT_COMPUTED),
        }
    }
}

impl<'de> Deserialize<'de> for MetricValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(MetricValue::Value(v)),
            Raw::Text(t) if t == NOT_COMPUTED => Ok(MetricValue::NotComputed),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "unexpected metric value {t:?}"
            ))),
        }
    }
}

/// How frame-level image features enter the FID fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidMode {
    /// Every frame is one sample; computed per clip.
    #[default]
    PerFrame,
    /// Frames are averaged per clip; the fit is pooled over the clips of a
    /// source, so per-clip rows carry the means instead of a value.
    ClipMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub t_eval: usize,
    pub fid_mode: FidMode,
    /// RANSAC settings for predicted clips that come without poses.
    pub ransac: RansacParams,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            t_eval: DEFAULT_T_EVAL,
            fid_mode: FidMode::PerFrame,
            ransac: RansacParams::default(),
        }
    }
}

/// Optional encoder outputs for one clip (rows are samples).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Embeddings {
    pub fvd: Option<DMatrix<f64>>,
    pub faed: Option<DMatrix<f64>>,
    pub fid: Option<DMatrix<f64>>,
    /// Per-frame image embeddings for CLIP-T.
    pub clip: Option<DMatrix<f64>>,
}

/// In-memory annotations of one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipBundle {
    pub num_frames: usize,
    pub depth: DepthVideo,
    pub tracks: TrackSet,
    pub poses: Option<PoseSequence>,
    pub embeddings: Embeddings,
    pub caption_embedding: Option<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMeans {
    pub pred: Vec<f64>,
    pub gt: Vec<f64>,
}

/// One report line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub id: String,
    pub source: String,
    pub fvd: MetricValue,
    pub faed: MetricValue,
    pub fid: MetricValue,
    pub clip_t: MetricValue,
    pub smooth3d: MetricValue,
    pub depth_sigma: MetricValue,
    pub tr_life: MetricValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fid_clip_means: Option<ClipMeans>,
}

fn pair_frechet(a: &Option<DMatrix<f64>>, b: &Option<DMatrix<f64>>) -> Result<MetricValue> {
    match (a, b) {
        (Some(a), Some(b)) if a.nrows() >= 2 && b.nrows() >= 2 => {
            frechet(a, b).map(MetricValue::Value)
        }
        (Some(a), Some(b)) if a.ncols() != b.ncols() => Err(Error::ShapeMismatch(format!(
            "embedding dimensions {} and {} differ",
            a.ncols(),
            b.ncols()
        ))),
        _ => Ok(MetricValue::NotComputed),
    }
}

fn not_computed_on_visibility(r: Result<f64>) -> Result<MetricValue> {
    match r {
        Ok(v) => Ok(MetricValue::Value(v)),
        Err(Error::InsufficientVisibility | Error::NoValidPixels) => Ok(MetricValue::NotComputed),
        Err(e) => Err(e),
    }
}

/// World-frame tracks of a bundle: taken as given when present, otherwise
/// lifted through its poses (estimated from tracks and depth if absent).
pub fn world_tracks(bundle: &ClipBundle, ransac: &RansacParams) -> Result<TrackSet> {
    if bundle.tracks.has_xyz() {
        return Ok(bundle.tracks.clone());
    }
    let poses = match &bundle.poses {
        Some(p) => p.clone(),
        None => estimate_trajectory(&bundle.tracks, &bundle.depth, ransac)?,
    };
    compensate(&bundle.tracks, &bundle.depth, &poses)
}

/// Metric row for `pred` against `gt`. Geometric scores are computed on the
/// predicted annotations after temporal resampling to `cfg.t_eval`.
pub fn evaluate_clip(
    id: &str,
    source: &str,
    pred: &ClipBundle,
    gt: &ClipBundle,
    cfg: &EvalConfig,
) -> Result<MetricRow> {
    let fid = match cfg.fid_mode {
        FidMode::PerFrame => pair_frechet(&pred.embeddings.fid, &gt.embeddings.fid)?,
        FidMode::ClipMean => MetricValue::NotComputed,
    };
    let fid_clip_means = match (cfg.fid_mode, &pred.embeddings.fid, &gt.embeddings.fid) {
        (FidMode::ClipMean, Some(p), Some(g)) if p.nrows() > 0 && g.nrows() > 0 => {
            Some(ClipMeans {
                pred: p.row_mean().iter().copied().collect(),
                gt: g.row_mean().iter().copied().collect(),
            })
        }
        _ => None,
    };
    let clip = match (&pred.embeddings.clip, &pred.caption_embedding) {
        (Some(f), Some(t)) => MetricValue::Value(clip_t(f, t)?),
        _ => MetricValue::NotComputed,
    };

    let tracks = world_tracks(pred, &cfg.ransac)?.resample(cfg.t_eval)?;
    let depth = resample_depth(&pred.depth, cfg.t_eval)?;
    Ok(MetricRow {
        id: id.to_string(),
        source: source.to_string(),
        fvd: pair_frechet(&pred.embeddings.fvd, &gt.embeddings.fvd)?,
        faed: pair_frechet(&pred.embeddings.faed, &gt.embeddings.faed)?,
        fid,
        clip_t: clip,
        smooth3d: not_computed_on_visibility(smooth3d(&tracks))?,
        depth_sigma: not_computed_on_visibility(depth_sigma(&depth))?,
        tr_life: if tracks.is_empty() {
            MetricValue::NotComputed
        } else {
            MetricValue::Value(track_life(&tracks))
        },
        fid_clip_means,
    })
}

/// Per-source summary: means of the computed per-clip values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceAggregate {
    pub clips: usize,
    pub fvd: MetricValue,
    pub faed: MetricValue,
    pub fid: MetricValue,
    pub clip_t: MetricValue,
    pub smooth3d: MetricValue,
    pub depth_sigma: MetricValue,
    pub tr_life: MetricValue,
}

fn mean_of<'a>(
    rows: impl Iterator<Item = &'a MetricRow>,
    f: impl Fn(&MetricRow) -> MetricValue,
) -> MetricValue {
    let values: Vec<f64> = rows.filter_map(|r| f(r).value()).collect();
    if values.is_empty() {
        MetricValue::NotComputed
    } else {
        MetricValue::Value(fsum(values.iter().copied()) / values.len() as f64)
    }
}

fn pooled_fid(rows: &[&MetricRow]) -> Result<MetricValue> {
    let means: Vec<&ClipMeans> = rows
        .iter()
        .filter_map(|r| r.fid_clip_means.as_ref())
        .collect();
    if means.len() < 2 {
        return Ok(MetricValue::NotComputed);
    }
    let d = means[0].pred.len();
    if means.iter().any(|m| m.pred.len() != d || m.gt.len() != d) {
        return Err(Error::ShapeMismatch(
            "FID embedding dimensions differ across clips".into(),
        ));
    }
    let stack = |pick: fn(&ClipMeans) -> &Vec<f64>| {
        DMatrix::from_row_iterator(
            means.len(),
            d,
            means.iter().flat_map(|m| pick(m).iter().copied()),
        )
    };
    frechet(&stack(|m| &m.pred), &stack(|m| &m.gt)).map(MetricValue::Value)
}

pub fn aggregate_rows(rows: &[&MetricRow]) -> Result<SourceAggregate> {
    let pooled = rows.iter().any(|r| r.fid_clip_means.is_some());
    Ok(SourceAggregate {
        clips: rows.len(),
        fvd: mean_of(rows.iter().copied(), |r| r.fvd),
        faed: mean_of(rows.iter().copied(), |r| r.faed),
        fid: if pooled {
            pooled_fid(rows)?
        } else {
            mean_of(rows.iter().copied(), |r| r.fid)
        },
        clip_t: mean_of(rows.iter().copied(), |r| r.clip_t),
        smooth3d: mean_of(rows.iter().copied(), |r| r.smooth3d),
        depth_sigma: mean_of(rows.iter().copied(), |r| r.depth_sigma),
        tr_life: mean_of(rows.iter().copied(), |r| r.tr_life),
    })
}

/// Aggregates keyed by source, plus `"all"` over every row.
pub fn aggregate(rows: &[MetricRow]) -> Result<BTreeMap<String, SourceAggregate>> {
    let mut by_source: BTreeMap<String, Vec<&MetricRow>> = BTreeMap::new();
    for r in rows {
        by_source.entry(r.source.clone()).or_default().push(r);
    }
    let mut out = BTreeMap::new();
    for (source, group) in &by_source {
        out.insert(source.clone(), aggregate_rows(group)?);
    }
    if !rows.is_empty() {
        let all: Vec<&MetricRow> = rows.iter().collect();
        out.insert("all".to_string(), aggregate_rows(&all)?);
    }
    Ok(out)
}

/// Plain-text table, one line per aggregate key.
pub fn format_table(aggregates: &BTreeMap<String, SourceAggregate>) -> String {
    let fmt = |v: MetricValue| match v {
        MetricValue::Value(x) => format!("{x:>10.4}"),
        MetricValue::NotComputed => format!("{:>10}", "-"),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "source", "clips", "FVD", "FAED", "FID", "CLIP-T", "3D-Sm", "D-σ", "T-Life"
    );
    for (source, a) in aggregates {
        let _ = writeln!(
            s,
            "{:<16} {:>6} {} {} {} {} {} {} {}",
            source,
            a.clips,
            fmt(a.fvd),
            fmt(a.faed),
            fmt(a.fid),
            fmt(a.clip_t),
            fmt(a.smooth3d),
            fmt(a.depth_sigma),
            fmt(a.tr_life)
        );
    }
    s
}

/// Encoder embedding files of one clip.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fvd: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faed: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fid: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<PathBuf>,
}

/// Files describing one clip. `poses_file` is optional for predictions,
/// whose poses are then estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipFiles {
    pub frames_dir: PathBuf,
    pub depth_file: PathBuf,
    pub tracks_file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poses_file: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: EmbeddingPaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_embedding: Option<PathBuf>,
}

/// One manifest entry: the ground-truth files inline and the prediction
/// under `pred`. Without `pred` the clip is compared against itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source: String,
    #[serde(flatten)]
    pub gt: ClipFiles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred: Option<ClipFiles>,
}

/// Parses a manifest (a JSON list of entries) and checks ids and sources.
pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<ManifestEntry>> {
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    let mut seen = std::collections::BTreeSet::new();
    for e in &entries {
        if !seen.insert(e.id.as_str()) {
            return Err(Error::format(path, format!("duplicate clip id {:?}", e.id)));
        }
        if !SOURCES.contains(&e.source.as_str()) {
            return Err(Error::format(
                path,
                format!(
                    "clip {}: unknown source {:?} (expected one of {SOURCES:?})",
                    e.id, e.source
                ),
            ));
        }
    }
    Ok(entries)
}

fn optional<T>(
    base: &Path,
    p: &Option<PathBuf>,
    read: impl Fn(&Path) -> Result<T>,
) -> Result<Option<T>> {
    p.as_ref()
        .map(|p| read(&io::join_relative(base, p)))
        .transpose()
}

/// Reads every file of a clip; relative paths resolve against `base`.
pub fn load_bundle(files: &ClipFiles, base: &Path) -> Result<ClipBundle> {
    let meta = io::check_video_dir(&io::join_relative(base, &files.frames_dir))?;
    let depth = io::read_depth(&io::join_relative(base, &files.depth_file))?;
    let tracks = io::read_tracks(&io::join_relative(base, &files.tracks_file))?;
    let poses = optional(base, &files.poses_file, io::read_poses)?;
    let (t, _, _) = depth.shape();
    if t != meta.num_frames || tracks.num_frames != meta.num_frames {
        return Err(Error::ShapeMismatch(format!(
            "{} frames, {} depth frames, {} track frames",
            meta.num_frames, t, tracks.num_frames
        )));
    }
    if let Some(p) = &poses {
        if p.len() != meta.num_frames {
            return Err(Error::ShapeMismatch(format!(
                "{} poses for {} frames",
                p.len(),
                meta.num_frames
            )));
        }
    }
    let e = &files.embeddings;
    let caption = optional(base, &files.caption_embedding, io::read_embeddings)?
        .map(|m| {
            if m.nrows() == 1 {
                Ok(m.row(0).transpose())
            } else {
                Err(Error::ShapeMismatch(format!(
                    "caption embedding has {} rows",
                    m.nrows()
                )))
            }
        })
        .transpose()?;
    Ok(ClipBundle {
        num_frames: meta.num_frames,
        depth,
        tracks,
        poses,
        embeddings: Embeddings {
            fvd: optional(base, &e.fvd, io::read_embeddings)?,
            faed: optional(base, &e.faed, io::read_embeddings)?,
            fid: optional(base, &e.fid, io::read_embeddings)?,
            clip: optional(base, &e.clip, io::read_embeddings)?,
        },
        caption_embedding: caption,
    })
}

/// Loads and evaluates one manifest entry.
pub fn evaluate_entry(entry: &ManifestEntry, base: &Path, cfg: &EvalConfig) -> Result<MetricRow> {
    let gt = load_bundle(&entry.gt, base)?;
    let pred = match &entry.pred {
        Some(p) => load_bundle(p, base)?,
        None => gt.clone(),
    };
    evaluate_clip(&entry.id, &entry.source, &pred, &gt, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, source: &str, s: Option<f64>) -> MetricRow {
        MetricRow {
            id: id.into(),
            source: source.into(),
            fvd: MetricValue::NotComputed,
            faed: MetricValue::NotComputed,
            fid: MetricValue::NotComputed,
            clip_t: MetricValue::NotComputed,
            smooth3d: s.into(),
            depth_sigma: MetricValue::Value(0.5),
            tr_life: MetricValue::Value(1.0),
            fid_clip_means: None,
        }
    }

    #[test]
    fn metric_value_json() {
        assert_eq!(
            serde_json::to_string(&MetricValue::Value(0.5)).unwrap(),
            "0.5"
        );
        assert_eq!(
            serde_json::to_string(&MetricValue::NotComputed).unwrap(),
            "\"not computed\""
        );
        let v: MetricValue = serde_json::from_str("\"not computed\"").unwrap();
        assert_eq!(v, MetricValue::NotComputed);
        assert!(serde_json::from_str::<MetricValue>("\"nope\"").is_err());
    }

    #[test]
    fn aggregates_are_means_of_rows() {
        let rows = vec![
            row("a", "argus", Some(1.0)),
            row("b", "argus", Some(3.0)),
            row("c", "habitat", None),
        ];
        let agg = aggregate(&rows).unwrap();
        assert_eq!(agg["argus"].smooth3d, MetricValue::Value(2.0));
        assert_eq!(agg["habitat"].smooth3d, MetricValue::NotComputed);
        assert_eq!(agg["all"].clips, 3);
        assert_eq!(agg["all"].smooth3d, MetricValue::Value(2.0));
        let table = format_table(&agg);
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().next().unwrap().contains("3D-Sm"));
    }

    #[test]
    fn manifest_checks() {
        let ok =
            r#"[{"id":"a","source":"argus","frames_dir":"f","depth_file":"d","tracks_file":"t"}]"#;
        let m = parse_manifest(ok, Path::new("m.json")).unwrap();
        assert_eq!(m[0].gt.poses_file, None);
        assert!(m[0].pred.is_none());
        let dup = r#"[{"id":"a","source":"argus","frames_dir":"f","depth_file":"d","tracks_file":"t"},
                      {"id":"a","source":"argus","frames_dir":"f","depth_file":"d","tracks_file":"t"}]"#;
        assert!(parse_manifest(dup, Path::new("m.json")).is_err());
        let bad = r#"[{"id":"a","source":"youtube","frames_dir":"f","depth_file":"d","tracks_file":"t"}]"#;
        assert!(parse_manifest(bad, Path::new("m.json")).is_err());
    }
}
