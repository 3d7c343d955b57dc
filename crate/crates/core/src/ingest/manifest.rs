//! Dataset manifests: one `path,condition,diameter,rpm` entry per line.
//!
//! `condition` is one of `healthy`, `ball`, `inner_race`, `outer_race`;
//! `diameter` is in inches and written `-` for healthy bearings. Blank lines
//! and lines starting with `#` are ignored. Relative paths resolve against the
//! manifest's directory.

use std::path::{Path, PathBuf};

use super::mat::{drive_end_channel, read_mat};
use super::text::{read_csv, read_raw_f64le};
use super::IngestError;
use crate::signal::{Condition, RecordMeta, SignalRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub meta: RecordMeta,
}

pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, IngestError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| IngestError::Manifest { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [path, condition, diameter, rpm] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let condition: Condition = condition.parse().map_err(err)?;
        let diameter = match diameter.to_ascii_lowercase().as_str() {
            "" | "-" | "nan" | "none" => None,
            d => Some(d.parse::<f64>().map_err(|e| err(format!("bad diameter '{d}': {e}")))?),
        };
        let rpm: u32 = rpm.parse().map_err(|e| err(format!("bad rpm '{rpm}': {e}")))?;
        let meta = RecordMeta::new(rpm, condition, diameter).map_err(|e| err(e.to_string()))?;
        let path = PathBuf::from(path);
        let path = if path.is_relative() { base_dir.join(path) } else { path };
        entries.push(ManifestEntry { path, meta });
    }
    Ok(entries)
}

/// Renders entries with paths relative to `base_dir` where possible.
pub fn write_manifest(entries: &[ManifestEntry], base_dir: &Path) -> String {
    let mut out = String::new();
    for e in entries {
        let path = e.path.strip_prefix(base_dir).unwrap_or(&e.path);
        let diameter = e
            .meta
            .fault_diameter_in
            .map_or_else(|| "-".to_string(), |d| format!("{d}"));
        out.push_str(&format!(
            "{},{},{},{}\n",
            path.display(),
            e.meta.condition,
            diameter,
            e.meta.rpm
        ));
    }
    out
}

/// Reads one data file, choosing the format by extension: `.mat` (drive-end
/// channel), `.csv`/`.txt`, anything else as raw little-endian f64.
pub fn read_record_file(path: &Path, meta: RecordMeta, sample_rate_hz: f64) -> Result<SignalRecord, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("mat") => {
            let vars = read_mat(&bytes)?;
            let channel =
                drive_end_channel(&vars).ok_or_else(|| IngestError::NoDriveEnd(path.display().to_string()))?;
            Ok(SignalRecord::new(channel.data.clone(), sample_rate_hz, meta)?)
        }
        Some("csv") | Some("txt") => read_csv(&bytes, sample_rate_hz, meta),
        _ => read_raw_f64le(&bytes, sample_rate_hz, meta),
    }
}

/// Loads every record listed in a manifest file.
pub fn load_manifest_records(manifest: &Path, sample_rate_hz: f64) -> Result<Vec<SignalRecord>, IngestError> {
    let text = std::fs::read_to_string(manifest).map_err(|source| IngestError::Io {
        path: manifest.display().to_string(),
        source,
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base)?
        .into_iter()
        .map(|e| read_record_file(&e.path, e.meta, sample_rate_hz))
        .collect()
}
