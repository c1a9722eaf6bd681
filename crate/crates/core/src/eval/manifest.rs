//! Ground-truth manifests: `filename,group_id,gt_angle_deg` per line, with
//! `#` comment lines.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub filename: String,
    pub group_id: String,
    pub gt_angle: f64,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Manifest {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() != 3 {
            return Err(Error::Manifest {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let gt_angle: f64 = row[2].parse().map_err(|_| Error::Manifest {
            line,
            message: format!("angle {:?} is not a decimal number", &row[2]),
        })?;
        if !gt_angle.is_finite() || row[0].is_empty() {
            return Err(Error::Manifest {
                line,
                message: "filename must be nonempty and angle finite".into(),
            });
        }
        entries.push(ManifestEntry {
            filename: row[0].to_string(),
            group_id: row[1].to_string(),
            gt_angle,
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("# filename,group_id,gt_angle_deg\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{:.6}\n",
            e.filename, e.group_id, e.gt_angle
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
