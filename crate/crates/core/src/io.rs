//! On-disk formats: PNG frame directories with a JSON sidecar, `FDM1` depth
//! containers, `FEM1` embedding matrices, and the JSON track/pose files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::RigidPose;
use crate::sphere::{DepthUnit, DepthVideo, ErpVideo, MaskFrame, RgbFrame};
use crate::tracks::TrackSet;

pub const DEPTH_MAGIC: &[u8; 4] = b"FDM1";
pub const EMBEDDING_MAGIC: &[u8; 4] = b"FEM1";
pub const VIDEO_META: &str = "meta.json";

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.png")
}

pub fn mask_file_name(index: usize) -> String {
    format!("mask_{index:05}.png")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub fps: f64,
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
}

fn to_u8(x: f32) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn write_png_rgb(path: &Path, frame: &RgbFrame) -> Result<()> {
    let bytes: Vec<u8> = frame.data.iter().map(|&x| to_u8(x)).collect();
    let img = image::RgbImage::from_raw(frame.width as u32, frame.height as u32, bytes)
        .ok_or_else(|| Error::format(path, "frame buffer size mismatch"))?;
    let mut buf = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    write_bytes(path, &buf)
}

fn open_image(path: &Path) -> Result<image::DynamicImage> {
    let bytes = read_bytes(path)?;
    image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_png_rgb(path: &Path) -> Result<RgbFrame> {
    let img = open_image(path)?.to_rgb8();
    Ok(RgbFrame {
        width: img.width() as usize,
        height: img.height() as usize,
        data: img
            .into_raw()
            .into_iter()
            .map(|b| b as f32 / 255.0)
            .collect(),
    })
}

pub fn write_mask_png(path: &Path, mask: &MaskFrame) -> Result<()> {
    let bytes: Vec<u8> = mask
        .data
        .iter()
        .map(|&m| if m != 0 { 255 } else { 0 })
        .collect();
    let img = image::GrayImage::from_raw(mask.width as u32, mask.height as u32, bytes)
        .ok_or_else(|| Error::format(path, "mask buffer size mismatch"))?;
    let mut buf = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    write_bytes(path, &buf)
}

pub fn read_mask_png(path: &Path) -> Result<MaskFrame> {
    let img = open_image(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut data = Vec::with_capacity(w * h);
    for &b in img.as_raw() {
        match b {
            0 => data.push(0),
            255 => data.push(1),
            other => {
                return Err(Error::format(
                    path,
                    format!("mask value {other} is not 0 or 255"),
                ))
            }
        }
    }
    Ok(MaskFrame {
        width: w,
        height: h,
        data,
    })
}

/// Writes `frame_%05d.png` files plus the `meta.json` sidecar.
pub fn write_erp_video(dir: &Path, video: &ErpVideo) -> Result<()> {
    create_dir(dir)?;
    for (i, f) in video.frames.iter().enumerate() {
        write_png_rgb(&dir.join(frame_file_name(i)), f)?;
    }
    write_json(
        &dir.join(VIDEO_META),
        &VideoMeta {
            fps: video.fps,
            width: video.width(),
            height: video.height(),
            num_frames: video.len(),
        },
    )
}

pub fn read_video_meta(dir: &Path) -> Result<VideoMeta> {
    read_json(&dir.join(VIDEO_META))
}

/// Checks the sidecar against the frame files without decoding pixels.
pub fn check_video_dir(dir: &Path) -> Result<VideoMeta> {
    let meta = read_video_meta(dir)?;
    for i in 0..meta.num_frames {
        let p = dir.join(frame_file_name(i));
        if !p.is_file() {
            return Err(Error::format(dir, format!("missing {}", p.display())));
        }
    }
    Ok(meta)
}

pub fn read_erp_video(dir: &Path) -> Result<ErpVideo> {
    let meta = read_video_meta(dir)?;
    let mut frames = Vec::with_capacity(meta.num_frames);
    for i in 0..meta.num_frames {
        let path = dir.join(frame_file_name(i));
        let f = read_png_rgb(&path)?;
        if (f.width, f.height) != (meta.width, meta.height) {
            return Err(Error::format(
                &path,
                format!(
                    "frame is {}x{}, sidecar says {}x{}",
                    f.width, f.height, meta.width, meta.height
                ),
            ));
        }
        frames.push(f);
    }
    ErpVideo::new(frames, meta.fps)
}

pub fn write_masks(dir: &Path, masks: &[MaskFrame]) -> Result<()> {
    create_dir(dir)?;
    for (i, m) in masks.iter().enumerate() {
        write_mask_png(&dir.join(mask_file_name(i)), m)?;
    }
    Ok(())
}

pub fn encode_depth(depth: &DepthVideo) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 4 * depth.data.len());
    out.extend_from_slice(DEPTH_MAGIC);
    for n in [depth.frames, depth.height, depth.width] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.push(match depth.unit {
        DepthUnit::Normalized => 0,
        DepthUnit::Meters => 1,
    });
    out.extend_from_slice(&[0, 0, 0]);
    for &v in &depth.data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> usize {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
}

pub fn decode_depth(bytes: &[u8]) -> std::result::Result<DepthVideo, String> {
    if bytes.len() < 20 || &bytes[..4] != DEPTH_MAGIC {
        return Err("not an FDM1 depth file".into());
    }
    let (t, h, w) = (u32_at(bytes, 4), u32_at(bytes, 8), u32_at(bytes, 12));
    let unit = match bytes[16] {
        0 => DepthUnit::Normalized,
        1 => DepthUnit::Meters,
        u => return Err(format!("unknown depth unit {u}")),
    };
    let n = t
        .checked_mul(h)
        .and_then(|x| x.checked_mul(w))
        .ok_or("depth header overflows")?;
    if bytes.len() != 20 + 4 * n {
        return Err(format!(
            "payload has {} bytes, header implies {}",
            bytes.len() - 20,
            4 * n
        ));
    }
    let data = bytes[20..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    DepthVideo::new(t, h, w, unit, data).map_err(|e| e.to_string())
}

pub fn write_depth(path: &Path, depth: &DepthVideo) -> Result<()> {
    write_bytes(path, &encode_depth(depth))
}

pub fn read_depth(path: &Path) -> Result<DepthVideo> {
    decode_depth(&read_bytes(path)?).map_err(|m| Error::format(path, m))
}

pub fn encode_embeddings(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * m.len());
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&(m[(r, c)] as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_embeddings(bytes: &[u8]) -> std::result::Result<DMatrix<f64>, String> {
    if bytes.len() < 12 || &bytes[..4] != EMBEDDING_MAGIC {
        return Err("not an FEM1 embedding file".into());
    }
    let (n, d) = (u32_at(bytes, 4), u32_at(bytes, 8));
    let len = n.checked_mul(d).ok_or("embedding header overflows")?;
    if bytes.len() != 12 + 4 * len {
        return Err(format!(
            "payload has {} bytes, header implies {}",
            bytes.len() - 12,
            4 * len
        ));
    }
    let vals: Vec<f64> = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err("embedding contains non-finite values".into());
    }
    Ok(DMatrix::from_row_slice(n, d, &vals))
}

pub fn write_embeddings(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_bytes(path, &encode_embeddings(m))
}

pub fn read_embeddings(path: &Path) -> Result<DMatrix<f64>> {
    decode_embeddings(&read_bytes(path)?).map_err(|m| Error::format(path, m))
}

pub fn write_tracks(path: &Path, tracks: &TrackSet) -> Result<()> {
    let mut text = tracks.to_json()?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_tracks(path: &Path) -> Result<TrackSet> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::format(path, e.to_string()))?;
    TrackSet::from_json(&text).map_err(|m| Error::format(path, m))
}

pub fn write_poses(path: &Path, poses: &[RigidPose]) -> Result<()> {
    write_json(path, poses)
}

pub fn read_poses(path: &Path) -> Result<Vec<RigidPose>> {
    read_json(path)
}

/// Appends one line, creating the file if needed.
pub fn append_line(path: &Path, line: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    writeln!(f, "{line}").map_err(|e| Error::io(path, e))
}

pub fn join_relative(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn depth_header_layout() {
        let d = DepthVideo::new(
            2,
            1,
            3,
            DepthUnit::Meters,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, f64::INFINITY],
        )
        .unwrap();
        let b = encode_depth(&d);
        assert_eq!(&b[..4], b"FDM1");
        assert_eq!(&b[4..8], &2u32.to_le_bytes());
        assert_eq!(&b[12..16], &3u32.to_le_bytes());
        assert_eq!(&b[16..20], &[1, 0, 0, 0]);
        assert_eq!(&b[20..24], &1.0f32.to_le_bytes());
        assert_eq!(b.len(), 20 + 24);
        assert_eq!(decode_depth(&b).unwrap(), d);
    }

    #[test]
    fn depth_rejects_truncation_and_bad_magic() {
        let d = DepthVideo::filled(1, 2, 2, DepthUnit::Normalized, 0.5);
        let b = encode_depth(&d);
        assert!(decode_depth(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_depth(&bad).is_err());
        let mut bad = b;
        bad[16] = 7;
        assert!(decode_depth(&bad).is_err());
    }

    #[test]
    fn embedding_header_layout() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = encode_embeddings(&m);
        assert_eq!(&b[..4], b"FEM1");
        assert_eq!(&b[12..16], &1.0f32.to_le_bytes());
        assert_eq!(&b[16..20], &2.0f32.to_le_bytes());
        assert_eq!(decode_embeddings(&b).unwrap(), m);
    }

    #[test]
    fn png_video_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = RgbFrame::from_fn(6, 3, |c, r| [c as f32 / 5.0, r as f32 / 2.0, 0.5]);
        let v = ErpVideo::new(vec![f.clone(), f], 16.0).unwrap();
        write_erp_video(dir.path(), &v).unwrap();
        assert!(dir.path().join("frame_00001.png").is_file());
        let back = read_erp_video(dir.path()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.frames[0].data.iter().zip(&v.frames[0].data) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-6);
        }
        let meta = check_video_dir(dir.path()).unwrap();
        assert_eq!((meta.width, meta.height, meta.num_frames), (6, 3, 2));
    }

    #[test]
    fn mask_png_is_0_or_255() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = MaskFrame::new(4, 2);
        m.data[3] = 1;
        let p = dir.path().join("m.png");
        write_mask_png(&p, &m).unwrap();
        assert_eq!(read_mask_png(&p).unwrap(), m);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_depth(Path::new("/definitely/not/here.fdm")).unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/definitely/not/here.fdm"));
    }

    proptest! {
        #[test]
        fn depth_round_trip_at_f32(vals in proptest::collection::vec(-1e3f32..1e3, 12)) {
            let d = DepthVideo::new(1, 3, 4, DepthUnit::Meters, vals.iter().map(|&v| v as f64).collect()).unwrap();
            prop_assert_eq!(decode_depth(&encode_depth(&d)).unwrap(), d);
        }
    }
}
