//! Resumable manifest evaluation.
//!
//! Layout under `--out`:
//! `clips/<id>.json` (one metric row per finished clip), `progress.log`
//! (finished ids), and once every clip is done `report.jsonl`,
//! `aggregate.json` and `table.txt`, all in id order.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use erpkit::io;
use erpkit::metrics::{
    aggregate, evaluate_entry, format_table, parse_manifest, ClipFiles, EvalConfig, FidMode,
    ManifestEntry, MetricRow,
};
use rayon::prelude::*;

use crate::commands::ransac_params;
use crate::{output_path, CliError, CliResult, EvalArgs, FidModeArg};

pub const PROGRESS_FILE: &str = "progress.log";
pub const CLIPS_DIR: &str = "clips";
pub const REPORT_FILE: &str = "report.jsonl";
pub const AGGREGATE_FILE: &str = "aggregate.json";
pub const TABLE_FILE: &str = "table.txt";

fn clip_path(out: &Path, id: &str) -> PathBuf {
    out.join(CLIPS_DIR).join(format!("{id}.json"))
}

fn referenced_paths(files: &ClipFiles) -> Vec<&Path> {
    let e = &files.embeddings;
    let mut v = vec![
        files.frames_dir.as_path(),
        files.depth_file.as_path(),
        files.tracks_file.as_path(),
    ];
    v.extend(
        [
            &files.poses_file,
            &e.fvd,
            &e.faed,
            &e.fid,
            &e.clip,
            &files.caption_embedding,
        ]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path),
    );
    v
}

/// One line per missing file, naming the clip.
fn missing_files(entries: &[ManifestEntry], base: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for e in entries {
        let files = std::iter::once(&e.gt).chain(e.pred.as_ref());
        for p in files.flat_map(referenced_paths) {
            let full = io::join_relative(base, p);
            if !full.exists() {
                out.push(format!("clip {}: missing {}", e.id, full.display()));
            }
        }
    }
    out
}

fn check_ids(entries: &[ManifestEntry]) -> CliResult<()> {
    let bad: Vec<String> = entries
        .iter()
        .filter(|e| e.id.is_empty() || e.id.contains(['/', '\\']) || e.id.starts_with('.'))
        .map(|e| format!("clip {:?}: id must be a plain file name", e.id))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(bad.join("\n")))
    }
}

/// Ids recorded as finished whose row file is readable.
fn finished(out: &Path) -> CliResult<BTreeSet<String>> {
    let path = out.join(PROGRESS_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeSet::new()),
        Err(e) => return Err(CliError::Io(format!("{}: {e}", path.display()))),
    };
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|id| !id.is_empty() && io::read_json::<MetricRow>(&clip_path(out, id)).is_ok())
        .map(String::from)
        .collect())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    Ok(io::write_bytes(path, text.as_bytes())?)
}

pub fn run(a: EvalArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = output_path(&a.out, "eval")?;
    if a.workers == 0 {
        return Err(CliError::Invalid("--workers must be at least 1".into()));
    }
    if a.t_eval < 3 {
        return Err(CliError::Invalid(format!(
            "--t-eval must be at least 3, got {}",
            a.t_eval
        )));
    }
    let text = fs::read_to_string(&a.manifest)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.manifest.display())))?;
    let mut entries = parse_manifest(&text, &a.manifest)?;
    check_ids(&entries)?;
    entries.sort_by(|x, y| x.id.cmp(&y.id));
    let base = a.manifest.parent().unwrap_or(Path::new("")).to_path_buf();
    let missing = missing_files(&entries, &base);
    if !missing.is_empty() {
        return Err(CliError::Io(missing.join("\n")));
    }
    let cfg = EvalConfig {
        t_eval: a.t_eval,
        fid_mode: match a.fid_mode {
            FidModeArg::PerFrame => FidMode::PerFrame,
            FidModeArg::ClipMean => FidMode::ClipMean,
        },
        ransac: ransac_params(&a.ransac, a.seed)?,
    };

    let done = finished(&out)?;
    let todo: Vec<&ManifestEntry> = entries.iter().filter(|e| !done.contains(&e.id)).collect();
    let skipped = entries.len() - todo.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers)
        .build()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let progress = std::sync::Mutex::new(());
    let results: Vec<(String, erpkit::Result<()>)> = pool.install(|| {
        todo.par_iter()
            .map(|e| {
                let r = evaluate_entry(e, &base, &cfg).and_then(|row| {
                    io::write_json(&clip_path(&out, &e.id), &row)?;
                    let _guard = progress.lock().unwrap();
                    io::append_line(&out.join(PROGRESS_FILE), &e.id)
                });
                (e.id.clone(), r)
            })
            .collect()
    });

    let failures: Vec<_> = results
        .iter()
        .filter_map(|(id, r)| r.as_ref().err().map(|e| (id, e)))
        .collect();
    writeln!(
        stdout,
        "{} clips: {skipped} skipped, {} evaluated, {} failed",
        entries.len(),
        todo.len() - failures.len(),
        failures.len()
    )?;
    if !failures.is_empty() {
        let msg = failures
            .iter()
            .map(|(id, e)| format!("clip {id}: {e}"))
            .collect::<Vec<_>>()
            .join("\n");
        return Err(if failures.iter().any(|(_, e)| e.is_io()) {
            CliError::Io(msg)
        } else {
            CliError::Invalid(msg)
        });
    }

    // completion order depends on scheduling; settle the log in id order
    let ids: String = entries.iter().map(|e| format!("{}\n", e.id)).collect();
    let tmp = out.join(format!("{PROGRESS_FILE}.tmp"));
    write_text(&tmp, &ids)?;
    fs::rename(&tmp, out.join(PROGRESS_FILE))
        .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;

    let rows = entries
        .iter()
        .map(|e| io::read_json::<MetricRow>(&clip_path(&out, &e.id)))
        .collect::<erpkit::Result<Vec<_>>>()?;
    let mut jsonl = String::new();
    for r in &rows {
        jsonl.push_str(&serde_json::to_string(r).map_err(|e| CliError::Invalid(e.to_string()))?);
        jsonl.push('\n');
    }
    write_text(&out.join(REPORT_FILE), &jsonl)?;
    let agg = aggregate(&rows)?;
    io::write_json(&out.join(AGGREGATE_FILE), &agg)?;
    let table = format_table(&agg);
    write_text(&out.join(TABLE_FILE), &table)?;
    write!(stdout, "{table}")?;
    Ok(())
}
