use std::io::Write;

use super::aggregate::Prediction;
use crate::error::{Error, Result};

pub const RECORD_HEADER: [&str; 5] = ["path", "mode", "predicted", "tally", "patch_argmax"];

/// Flat, comma-free rendering of one [`Prediction`].
///
/// `tally` lists `label=count` pairs in class order separated by `;`.
/// `patch_argmax` lists per-patch class indices, rows separated by `/` and
/// columns by spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionRecord {
    pub path: String,
    pub mode: String,
    pub predicted: String,
    pub tally: String,
    pub patch_argmax: String,
}

impl PredictionRecord {
    pub fn new(path: &str, p: &Prediction, labels: &[String]) -> Result<Self> {
        if labels.len() != p.vote_tally.len() {
            return Err(Error::Config(format!(
                "{} labels for a {}-class prediction",
                labels.len(),
                p.vote_tally.len()
            )));
        }
        let tally = labels
            .iter()
            .zip(&p.vote_tally)
            .map(|(l, n)| format!("{l}={n}"))
            .collect::<Vec<_>>()
            .join(";");
        let cols = p.per_patch.grid().cols();
        let patch_argmax = p
            .per_patch
            .argmax_grid()
            .chunks(cols)
            .map(|row| row.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("/");
        Ok(PredictionRecord {
            path: path.to_string(),
            mode: p.mode.to_string(),
            predicted: labels[p.predicted_class].clone(),
            tally,
            patch_argmax,
        })
    }

    pub fn fields(&self) -> [&str; 5] {
        [&self.path, &self.mode, &self.predicted, &self.tally, &self.patch_argmax]
    }
}

/// Writes a header and one CSV line per record.
pub fn write_records(out: &mut impl Write, records: &[PredictionRecord]) -> Result<()> {
    let io = |e| Error::io("<prediction output>", e);
    writeln!(out, "{}", RECORD_HEADER.join(",")).map_err(io)?;
    for r in records {
        if let Some(f) = r.fields().iter().find(|f| f.contains([',', '\n', '"'])) {
            return Err(Error::InvalidArgument(format!("field {f:?} cannot be written without quoting")));
        }
        writeln!(out, "{}", r.fields().join(",")).map_err(io)?;
    }
    Ok(())
}
