//! CSV dataset manifests: one row per face image with subject, pose and
//! the five landmark coordinates in source-image pixels (origin top-left).

use crate::error::{Error, Result};
use crate::face::{FaceSample, LandmarkSet, Point};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Required manifest columns, in canonical write order.
pub const MANIFEST_COLUMNS: [&str; 13] = [
    "image_path",
    "subject_id",
    "pose_deg",
    "lx_eye",
    "ly_eye",
    "rx_eye",
    "ry_eye",
    "x_nose",
    "y_nose",
    "lx_mouth",
    "ly_mouth",
    "rx_mouth",
    "ry_mouth",
];

/// One manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub image_path: String,
    pub subject_id: String,
    pub pose_deg: f64,
    pub landmarks: LandmarkSet,
}

/// Maps free-form subject labels to dense `u32` ids, in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct SubjectTable {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl SubjectTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Reads a manifest, verifying the header carries every required column.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::io(path.display().to_string(), std::io::Error::other(e)),
        _ => Error::Csv(e),
    })?;

    let headers = reader.headers()?.clone();
    let mut col = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        col.insert(h.trim().to_string(), i);
    }
    for required in MANIFEST_COLUMNS {
        if !col.contains_key(required) {
            return Err(Error::MissingColumn {
                column: required.into(),
            });
        }
    }

    let field = |record: &csv::StringRecord, name: &str, row: usize| -> Result<String> {
        record
            .get(col[name])
            .map(|s| s.trim().to_string())
            .ok_or_else(|| Error::BadManifestRow {
                row,
                reason: format!("missing field {name}"),
            })
    };
    let num = |record: &csv::StringRecord, name: &str, row: usize| -> Result<f64> {
        let raw = field(record, name, row)?;
        raw.parse::<f64>().map_err(|_| Error::BadManifestRow {
            row,
            reason: format!("field {name} is not a number: {raw:?}"),
        })
    };

    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 2; // header is line 1
        let landmarks = LandmarkSet::new(
            Point::new(num(&record, "lx_eye", row)?, num(&record, "ly_eye", row)?),
            Point::new(num(&record, "rx_eye", row)?, num(&record, "ry_eye", row)?),
            Point::new(num(&record, "x_nose", row)?, num(&record, "y_nose", row)?),
            Point::new(num(&record, "lx_mouth", row)?, num(&record, "ly_mouth", row)?),
            Point::new(num(&record, "rx_mouth", row)?, num(&record, "ry_mouth", row)?),
        );
        out.push(ManifestRecord {
            image_path: field(&record, "image_path", row)?,
            subject_id: field(&record, "subject_id", row)?,
            pose_deg: num(&record, "pose_deg", row)?,
            landmarks,
        });
    }
    Ok(out)
}

/// Writes a manifest with the canonical column order.
pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path.display().to_string(), std::io::Error::other(e)))?;
    writer.write_record(MANIFEST_COLUMNS)?;
    for r in records {
        let lm = &r.landmarks;
        let le = lm.get(crate::face::Landmark::LeftEye);
        let re = lm.get(crate::face::Landmark::RightEye);
        let no = lm.get(crate::face::Landmark::NoseTip);
        let lmo = lm.get(crate::face::Landmark::LeftMouthCorner);
        let rmo = lm.get(crate::face::Landmark::RightMouthCorner);
        writer.write_record([
            r.image_path.clone(),
            r.subject_id.clone(),
            format_num(r.pose_deg),
            format_num(le.x),
            format_num(le.y),
            format_num(re.x),
            format_num(re.y),
            format_num(no.x),
            format_num(no.y),
            format_num(lmo.x),
            format_num(lmo.y),
            format_num(rmo.x),
            format_num(rmo.y),
        ])?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

fn format_num(v: f64) -> String {
    // Shortest round-trip formatting keeps manifests byte-stable.
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Loads the face samples referenced by a manifest. Relative image paths
/// resolve against the manifest's directory; subject labels are interned
/// into dense ids in row order.
pub fn load_face_samples(
    manifest_path: impl AsRef<Path>,
) -> Result<(Vec<FaceSample>, SubjectTable)> {
    let manifest_path = manifest_path.as_ref();
    let records = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut table = SubjectTable::new();
    let mut samples = Vec::with_capacity(records.len());
    for r in &records {
        let img_path: PathBuf = {
            let p = Path::new(&r.image_path);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let dynamic = image::open(&img_path).map_err(|e| Error::Image {
            path: img_path.display().to_string(),
            source: e,
        })?;
        let gray = dynamic.into_luma8();
        let subject = table.intern(&r.subject_id);
        samples.push(FaceSample::new(gray, r.landmarks, subject, r.pose_deg)?);
    }
    Ok((samples, table))
}
