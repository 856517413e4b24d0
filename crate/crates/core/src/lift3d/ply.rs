use std::fmt::Write as _;
use std::path::Path;

use super::cloud::{CloudPoint, PointCloud};
use crate::error::{Error, Result};
use crate::io::{read_bytes, write_bytes};
use crate::sphere::Vec3;

fn to_u8(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// ASCII PLY with float positions and 8-bit colors.
pub fn encode_ply(pc: &PointCloud) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", pc.len());
    s.push_str(
        "property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
    );
    for p in &pc.points {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            p.xyz.x as f32,
            p.xyz.y as f32,
            p.xyz.z as f32,
            to_u8(p.rgb[0]),
            to_u8(p.rgb[1]),
            to_u8(p.rgb[2])
        );
    }
    s
}

pub fn decode_ply(text: &str) -> std::result::Result<PointCloud, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err("missing ply magic".into());
    }
    let mut count = None;
    let mut props = Vec::new();
    loop {
        let line = lines.next().ok_or("unterminated header")?.trim();
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["end_header"] => break,
            ["format", fmt, _] if *fmt != "ascii" => {
                return Err(format!("unsupported format {fmt}"))
            }
            ["element", "vertex", n] => {
                count = Some(n.parse::<usize>().map_err(|e| e.to_string())?)
            }
            ["element", other, _] => return Err(format!("unsupported element {other}")),
            ["property", _, name] => props.push(name.to_string()),
            _ => {}
        }
    }
    let expected = ["x", "y", "z", "red", "green", "blue"];
    if props != expected {
        return Err(format!("expected properties {expected:?}, found {props:?}"));
    }
    let count = count.ok_or("no vertex element")?;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| format!("expected {count} vertices, found {i}"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(format!("vertex {i}: expected 6 fields, found {}", f.len()));
        }
        let coord = |k: usize| {
            f[k].parse::<f32>()
                .map(f64::from)
                .map_err(|e| format!("vertex {i}: {e}"))
        };
        let color = |k: usize| {
            f[k].parse::<u8>()
                .map(|c| f32::from(c) / 255.0)
                .map_err(|e| format!("vertex {i}: {e}"))
        };
        points.push(CloudPoint {
            xyz: Vec3::new(coord(0)?, coord(1)?, coord(2)?),
            rgb: [color(3)?, color(4)?, color(5)?],
            source: None,
        });
    }
    Ok(PointCloud { points })
}

pub fn export_ply(pc: &PointCloud, path: &Path) -> Result<()> {
    write_bytes(path, encode_ply(pc).as_bytes())
}

pub fn import_ply(path: &Path) -> Result<PointCloud> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::format(path, e.to_string()))?;
    decode_ply(&text).map_err(|m| Error::format(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cloud_is_a_valid_file() {
        let s = encode_ply(&PointCloud::default());
        assert!(s.contains("element vertex 0\n"));
        assert_eq!(decode_ply(&s).unwrap().len(), 0);
    }

    #[test]
    fn round_trip_at_file_precision() {
        let pc = PointCloud {
            points: vec![CloudPoint {
                xyz: Vec3::new(0.1, -2.5, 1e-7),
                rgb: [1.0, 0.5, 0.0],
                source: Some([0, 1, 2]),
            }],
        };
        let back = decode_ply(&encode_ply(&pc)).unwrap();
        let p = back.points[0];
        assert_eq!(p.xyz.x, 0.1f32 as f64);
        assert_eq!(p.xyz.z, 1e-7f32 as f64);
        assert_eq!(p.rgb, [1.0, 128.0 / 255.0, 0.0]);
        // a second trip is exact
        assert_eq!(decode_ply(&encode_ply(&back)).unwrap(), back);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(decode_ply("nope").is_err());
        let truncated = encode_ply(&PointCloud {
            points: vec![CloudPoint {
                xyz: Vec3::zeros(),
                rgb: [0.0; 3],
                source: None,
            }],
        })
        .replace("0 0 0 0 0 0\n", "");
        assert!(decode_ply(&truncated).is_err());
    }
}
