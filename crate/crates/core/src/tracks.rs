//! Point trajectories on the panorama.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{resample_indices, ErpCoord, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub uv: Vec<ErpCoord>,
    pub vis: Vec<bool>,
    /// World-frame position per frame; `None` where unknown (e.g. occluded).
    pub xyz_world: Option<Vec<Option<Vec3>>>,
}

impl Track {
    pub fn visible_fraction(&self) -> f64 {
        if self.vis.is_empty() {
            return 0.0;
        }
        self.vis.iter().filter(|&&v| v).count() as f64 / self.vis.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    pub num_frames: usize,
    pub tracks: Vec<Track>,
}

impl TrackSet {
    pub fn new(num_frames: usize, tracks: Vec<Track>) -> Result<Self> {
        let set = TrackSet { num_frames, tracks };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.tracks {
            let xyz_len = t.xyz_world.as_ref().map_or(self.num_frames, Vec::len);
            if t.uv.len() != self.num_frames
                || t.vis.len() != self.num_frames
                || xyz_len != self.num_frames
            {
                return Err(Error::ShapeMismatch(format!(
                    "track {} has {} uv / {} vis / {} xyz samples, expected {}",
                    t.id,
                    t.uv.len(),
                    t.vis.len(),
                    xyz_len,
                    self.num_frames
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn has_xyz(&self) -> bool {
        !self.tracks.is_empty() && self.tracks.iter().all(|t| t.xyz_world.is_some())
    }

    /// Nearest-index temporal resampling of every per-frame field.
    pub fn resample(&self, t_eval: usize) -> Result<TrackSet> {
        let idx = resample_indices(self.num_frames, t_eval)?;
        let tracks = self
            .tracks
            .iter()
            .map(|t| Track {
                id: t.id,
                uv: idx.iter().map(|&i| t.uv[i]).collect(),
                vis: idx.iter().map(|&i| t.vis[i]).collect(),
                xyz_world: t
                    .xyz_world
                    .as_ref()
                    .map(|x| idx.iter().map(|&i| x[i]).collect()),
            })
            .collect();
        Ok(TrackSet {
            num_frames: t_eval,
            tracks,
        })
    }

    /// Applies the column roll of [`crate::sphere::circular_shift`] to the
    /// `u` coordinates. 3D positions are untouched.
    pub fn shifted_columns(&self, offset: usize, width: usize) -> TrackSet {
        let mut out = self.clone();
        for t in &mut out.tracks {
            for c in &mut t.uv {
                *c = c.shifted_columns(offset, width);
            }
        }
        out
    }

    pub fn without_xyz(&self) -> TrackSet {
        let mut out = self.clone();
        for t in &mut out.tracks {
            t.xyz_world = None;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TrackFile {
            num_tracks: self.tracks.len(),
            num_frames: self.num_frames,
            tracks: self
                .tracks
                .iter()
                .map(|t| TrackJson {
                    id: t.id,
                    uv: t.uv.iter().map(|c| [c.u(), c.v()]).collect(),
                    vis: t.vis.iter().map(|&v| v as u8).collect(),
                    xyz_world: t
                        .xyz_world
                        .as_ref()
                        .map(|x| x.iter().map(|p| p.map(|p| [p.x, p.y, p.z])).collect()),
                })
                .collect(),
        };
        serde_json::to_string(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn from_json(text: &str) -> std::result::Result<TrackSet, String> {
        let doc: TrackFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.num_tracks != doc.tracks.len() {
            return Err(format!(
                "num_tracks is {} but {} tracks are listed",
                doc.num_tracks,
                doc.tracks.len()
            ));
        }
        let mut tracks = Vec::with_capacity(doc.tracks.len());
        for t in doc.tracks {
            if let Some(bad) = t.vis.iter().find(|&&v| v > 1) {
                return Err(format!(
                    "track {}: visibility value {bad} is not 0 or 1",
                    t.id
                ));
            }
            for [u, v] in &t.uv {
                if !(0.0..=1.0).contains(u) || !(0.0..=1.0).contains(v) {
                    return Err(format!("track {}: uv ({u}, {v}) outside [0, 1]", t.id));
                }
            }
            tracks.push(Track {
                id: t.id,
                uv: t.uv.into_iter().map(|[u, v]| ErpCoord::new(u, v)).collect(),
                vis: t.vis.into_iter().map(|v| v == 1).collect(),
                xyz_world: t.xyz_world.map(|x| {
                    x.into_iter()
                        .map(|p| p.map(|p| Vec3::new(p[0], p[1], p[2])))
                        .collect()
                }),
            });
        }
        let set = TrackSet {
            num_frames: doc.num_frames,
            tracks,
        };
        set.validate().map_err(|e| e.to_string())?;
        Ok(set)
    }
}

#[derive(Serialize, Deserialize)]
struct TrackFile {
    num_tracks: usize,
    num_frames: usize,
    tracks: Vec<TrackJson>,
}

#[derive(Serialize, Deserialize)]
struct TrackJson {
    id: u64,
    uv: Vec<[f64; 2]>,
    vis: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xyz_world: Option<Vec<Option<[f64; 3]>>>,
}
