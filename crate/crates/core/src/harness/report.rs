use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::voting::{InferenceMode, PredictionRecord, RECORD_HEADER};

/// Cross-validated scores of one model/mode combination.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelResult {
    pub name: String,
    pub mode: InferenceMode,
    pub fold_correct: Vec<usize>,
    pub fold_total: Vec<usize>,
    /// `confusion[actual][predicted]`, summed over folds.
    pub confusion: Vec<Vec<usize>>,
}

impl ModelResult {
    pub fn new(name: impl Into<String>, mode: InferenceMode, k: usize, num_classes: usize) -> Self {
        ModelResult {
            name: name.into(),
            mode,
            fold_correct: vec![0; k],
            fold_total: vec![0; k],
            confusion: vec![vec![0; num_classes]; num_classes],
        }
    }

    pub fn record(&mut self, fold: usize, actual: usize, predicted: usize) {
        self.fold_total[fold] += 1;
        if actual == predicted {
            self.fold_correct[fold] += 1;
        }
        self.confusion[actual][predicted] += 1;
    }

    pub fn fold_accuracy(&self) -> Vec<f64> {
        self.fold_correct
            .iter()
            .zip(&self.fold_total)
            .map(|(&c, &t)| if t == 0 { f64::NAN } else { c as f64 / t as f64 })
            .collect()
    }

    /// Arithmetic mean of the fold accuracies.
    pub fn mean_accuracy(&self) -> f64 {
        let acc = self.fold_accuracy();
        acc.iter().sum::<f64>() / acc.len() as f64
    }

    pub fn misclassified(&self) -> usize {
        self.fold_total.iter().sum::<usize>() - self.fold_correct.iter().sum::<usize>()
    }
}

/// One evaluated image, kept for the predictions file.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageOutcome {
    pub model: String,
    pub fold: usize,
    pub actual: String,
    pub record: PredictionRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub labels: Vec<String>,
    pub k: usize,
    pub config: Vec<(String, String)>,
    pub rows: Vec<ModelResult>,
    pub outcomes: Vec<ImageOutcome>,
    /// `(label, fold)` pairs where the class has no held-out image.
    pub absent: Vec<(String, usize)>,
}

impl CvReport {
    /// Checks that fold counts, totals and confusion matrices agree.
    pub fn check_integrity(&self) -> Result<()> {
        for r in &self.rows {
            let total: usize = r.fold_total.iter().sum();
            let diag: usize = (0..r.confusion.len()).map(|c| r.confusion[c][c]).sum();
            let cells: usize = r.confusion.iter().flatten().sum();
            if diag != r.fold_correct.iter().sum::<usize>() || cells != total || r.fold_total.len() != self.k {
                return Err(Error::InvalidArgument(format!("inconsistent scores for {}", r.name)));
            }
        }
        Ok(())
    }
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

fn check_cell(s: &str) -> Result<&str> {
    if s.contains([',', '\n', '"']) {
        return Err(Error::InvalidArgument(format!("{s:?} cannot appear in a CSV cell")));
    }
    Ok(s)
}

/// `model,fold,accuracy,correct,total,misclassified`: one line per fold,
/// then a `mean` line, for every row.
pub fn accuracy_csv(rows: &[ModelResult]) -> Result<String> {
    let mut out = String::from("model,fold,accuracy,correct,total,misclassified\n");
    for r in rows {
        let name = check_cell(&r.name)?;
        for (f, acc) in r.fold_accuracy().iter().enumerate() {
            let (c, t) = (r.fold_correct[f], r.fold_total[f]);
            writeln!(out, "{name},{},{},{c},{t},{}", f + 1, fmt4(*acc), t - c).unwrap();
        }
        let (c, t) = (r.fold_correct.iter().sum::<usize>(), r.fold_total.iter().sum::<usize>());
        writeln!(out, "{name},mean,{},{c},{t},{}", fmt4(r.mean_accuracy()), t - c).unwrap();
    }
    Ok(out)
}

/// Wide layout: `Models,Fold 1,…,Fold k,Mean`, one line per row.
pub fn table_csv(rows: &[ModelResult]) -> Result<String> {
    let k = rows.first().map_or(0, |r| r.fold_total.len());
    let mut out = String::from("Models");
    for f in 1..=k {
        write!(out, ",Fold {f}").unwrap();
    }
    out.push_str(",Mean\n");
    for r in rows {
        if r.fold_total.len() != k {
            return Err(Error::InvalidArgument("rows with different fold counts".into()));
        }
        out.push_str(check_cell(&r.name)?);
        for a in r.fold_accuracy() {
            write!(out, ",{}", fmt4(a)).unwrap();
        }
        writeln!(out, ",{}", fmt4(r.mean_accuracy())).unwrap();
    }
    Ok(out)
}

/// `model,actual,<label…>` with one line per actual class and row.
pub fn confusion_csv(rows: &[ModelResult], labels: &[String]) -> Result<String> {
    let mut out = String::from("model,actual");
    for l in labels {
        write!(out, ",{}", check_cell(l)?).unwrap();
    }
    out.push('\n');
    for r in rows {
        for (a, counts) in r.confusion.iter().enumerate() {
            write!(out, "{},{}", check_cell(&r.name)?, labels[a]).unwrap();
            for n in counts {
                write!(out, ",{n}").unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn predictions_csv(outcomes: &[ImageOutcome]) -> Result<String> {
    let mut out = format!("model,fold,actual,{}\n", RECORD_HEADER.join(","));
    for o in outcomes {
        let mut cells = vec![check_cell(&o.model)?.to_string(), (o.fold + 1).to_string(), check_cell(&o.actual)?.to_string()];
        for f in o.record.fields() {
            cells.push(check_cell(f)?.to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn config_txt(report: &CvReport) -> String {
    let mut out = String::new();
    for (k, v) in &report.config {
        writeln!(out, "{k}={v}").unwrap();
    }
    for (label, fold) in &report.absent {
        writeln!(out, "# class {label} has no held-out image in fold {}", fold + 1).unwrap();
    }
    out
}

/// Writes `accuracy.csv`, `table.csv`, `confusion.csv`, `predictions.csv`
/// and `config.txt` into `dir`, creating it if needed.
pub fn write_report(report: &CvReport, dir: impl AsRef<Path>) -> Result<()> {
    report.check_integrity()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("accuracy.csv", accuracy_csv(&report.rows)?),
        ("table.csv", table_csv(&report.rows)?),
        ("confusion.csv", confusion_csv(&report.rows, &report.labels)?),
        ("predictions.csv", predictions_csv(&report.outcomes)?),
        ("config.txt", config_txt(report)),
    ];
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}
