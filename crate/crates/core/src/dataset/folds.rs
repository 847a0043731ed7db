use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;

use super::manifest::{check_field, DatasetManifest};
use crate::error::{Error, Result};
use crate::rng::Streams;

pub const FOLD_HEADER: [&str; 2] = ["path", "fold"];

/// Fold index of every manifest record, aligned with the record order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn new(k: usize, folds: Vec<usize>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
        }
        if let Some(&f) = folds.iter().find(|&&f| f >= k) {
            return Err(Error::InvalidArgument(format!("fold {f} out of range for k={k}")));
        }
        Ok(FoldAssignment { k, folds })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn fold_of(&self, record: usize) -> usize {
        self.folds[record]
    }

    /// Record indices held out in `fold`.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    /// Record indices used for training when `fold` is held out.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }

    /// `counts[class][fold]` for the given per-record class indices.
    pub fn class_fold_counts(&self, classes: &[usize], num_classes: usize) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; self.k]; num_classes];
        for (&c, &f) in classes.iter().zip(&self.folds) {
            counts[c][f] += 1;
        }
        counts
    }
}

/// Shuffles each class with its own seeded stream and deals it round-robin
/// over the folds. Each class starts dealing where the previous one stopped,
/// which also keeps whole-fold sizes within one of each other.
pub fn stratified_kfold(m: &DatasetManifest, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let streams = Streams::new(seed, "folds");
    let classes = m.class_indices();
    let mut folds = vec![0; m.len()];
    let mut next = 0;
    for c in 0..m.num_classes() {
        let mut members: Vec<usize> = (0..m.len()).filter(|&i| classes[i] == c).collect();
        members.shuffle(&mut streams.stream(c as u64));
        for i in members {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    FoldAssignment::new(k, folds)
}

pub fn folds_to_string(m: &DatasetManifest, a: &FoldAssignment) -> Result<String> {
    if a.folds.len() != m.len() {
        return Err(Error::Manifest(format!(
            "{} fold entries for {} records",
            a.folds.len(),
            m.len()
        )));
    }
    let mut out = FOLD_HEADER.join(",");
    out.push('\n');
    for (r, f) in m.records().iter().zip(&a.folds) {
        check_field(&r.path)?;
        out.push_str(&format!("{},{f}\n", r.path));
    }
    Ok(out)
}

pub fn write_folds(m: &DatasetManifest, a: &FoldAssignment, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, folds_to_string(m, a)?).map_err(|e| Error::io(path, e))
}

/// Reads a fold file and aligns it with `m`. Every manifest path must appear
/// exactly once; `k` is one more than the largest fold index.
pub fn parse_folds(text: &str, m: &DatasetManifest) -> Result<FoldAssignment> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(FOLD_HEADER) {
        return Err(Error::Manifest(format!("expected fold header {}", FOLD_HEADER.join(","))));
    }
    let mut by_path: HashMap<String, usize> = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let path = row[0].trim().to_string();
        let fold: usize = row[1]
            .trim()
            .parse()
            .map_err(|_| Error::Manifest(format!("{path}: bad fold index {:?}", &row[1])))?;
        if by_path.insert(path.clone(), fold).is_some() {
            return Err(Error::Manifest(format!("{path} assigned twice")));
        }
    }
    let mut folds = Vec::with_capacity(m.len());
    for r in m.records() {
        folds.push(
            by_path
                .remove(&r.path)
                .ok_or_else(|| Error::Manifest(format!("{} has no fold", r.path)))?,
        );
    }
    if let Some(extra) = by_path.keys().min() {
        return Err(Error::Manifest(format!("fold file lists {extra}, which is not in the manifest")));
    }
    let k = folds.iter().max().map_or(0, |&f| f + 1);
    FoldAssignment::new(k.max(2), folds)
}

pub fn load_folds(path: impl AsRef<Path>, m: &DatasetManifest) -> Result<FoldAssignment> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_folds(&text, m)
}
