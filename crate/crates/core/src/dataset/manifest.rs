use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const MANIFEST_HEADER: [&str; 3] = ["path", "label", "specimen_id"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRecord {
    /// Image location relative to the manifest's directory.
    pub path: String,
    pub label: String,
    pub specimen_id: String,
}

impl SampleRecord {
    pub fn new(path: impl Into<String>, label: impl Into<String>, specimen_id: impl Into<String>) -> Self {
        SampleRecord {
            path: path.into(),
            label: label.into(),
            specimen_id: specimen_id.into(),
        }
    }
}

/// Labelled image list. Class indices follow the order in which labels first
/// appear, and that order is what checkpoints persist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    root: PathBuf,
    records: Vec<SampleRecord>,
    labels: Vec<String>,
}

impl DatasetManifest {
    pub fn new(root: impl Into<PathBuf>, records: Vec<SampleRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut labels: Vec<String> = Vec::new();
        for (line, r) in records.iter().enumerate() {
            if r.path.is_empty() {
                return Err(Error::Manifest(format!("record {} has an empty path", line + 1)));
            }
            if r.label.is_empty() {
                return Err(Error::Manifest(format!("{}: empty label", r.path)));
            }
            if !seen.insert(r.path.as_str()) {
                return Err(Error::Manifest(format!("duplicate path {}", r.path)));
            }
            if !labels.contains(&r.label) {
                labels.push(r.label.clone());
            }
        }
        Ok(DatasetManifest {
            root: root.into(),
            records,
            labels,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Class index of record `i`.
    pub fn class_of(&self, i: usize) -> usize {
        self.class_index(&self.records[i].label).expect("label registered at construction")
    }

    pub fn class_indices(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.class_of(i)).collect()
    }

    /// Absolute (or root-relative) location of record `i`'s image.
    pub fn image_path(&self, i: usize) -> PathBuf {
        self.root.join(&self.records[i].path)
    }

    /// Manifest over the selected records, keeping this manifest's label order
    /// so class indices stay comparable.
    pub fn select(&self, indices: &[usize]) -> DatasetManifest {
        DatasetManifest {
            root: self.root.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            labels: self.labels.clone(),
        }
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, root).map_err(|e| match e {
        Error::Manifest(m) => Error::Manifest(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_manifest(text: &str, root: impl Into<PathBuf>) -> Result<DatasetManifest> {
    if text.trim().is_empty() {
        return Err(Error::Manifest("empty file".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(MANIFEST_HEADER) {
        return Err(Error::Manifest(format!(
            "expected header {}, found {}",
            MANIFEST_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        records.push(SampleRecord::new(row[0].trim(), row[1].trim(), row[2].trim()));
    }
    DatasetManifest::new(root, records)
}

pub(crate) fn check_field(f: &str) -> Result<()> {
    if f.contains([',', '\n', '\r', '"']) {
        return Err(Error::Manifest(format!("field {f:?} contains a comma, quote or newline")));
    }
    Ok(())
}

pub fn manifest_to_string(m: &DatasetManifest) -> Result<String> {
    let mut out = MANIFEST_HEADER.join(",");
    out.push('\n');
    for r in m.records() {
        for f in [&r.path, &r.label, &r.specimen_id] {
            check_field(f)?;
        }
        out.push_str(&format!("{},{},{}\n", r.path, r.label, r.specimen_id));
    }
    Ok(out)
}

pub fn write_manifest(m: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, manifest_to_string(m)?).map_err(|e| Error::io(path, e))
}
