use std::collections::HashSet;
use std::path::Path;

use super::config::ExperimentConfig;
use super::pipeline::{evaluate_indices, train_on_indices};
use super::report::{write_report, CvReport, ImageOutcome, ModelResult};
use crate::dataset::{load_folds, load_manifest, stratified_kfold, subsample_fraction, DatasetManifest, FoldAssignment};
use crate::error::{Error, Result};
use crate::model::{ensure_labels, TrainedModel};
use crate::voting::{InferenceMode, PredictionRecord};

/// File name of the checkpoint trained with `fold` held out.
pub fn fold_model_name(fold: usize) -> String {
    format!("fold-{fold}.pvw")
}

/// Manifest (optionally subsampled) and fold assignment for `cfg`.
pub fn prepare_split(cfg: &ExperimentConfig) -> Result<(DatasetManifest, FoldAssignment)> {
    let mut m = load_manifest(&cfg.manifest)?;
    if cfg.fraction < 1.0 {
        m = subsample_fraction(&m, cfg.fraction, cfg.seed)?;
    }
    let folds = match &cfg.folds {
        Some(p) => load_folds(p, &m)?,
        None => stratified_kfold(&m, cfg.k, cfg.seed)?,
    };
    if folds.k() != cfg.k {
        return Err(Error::Config(format!("fold file has {} folds, config says k={}", folds.k(), cfg.k)));
    }
    Ok((m, folds))
}

/// Scores held-out predictions for one fold into `rows` (one per mode).
fn score_fold(
    model: &TrainedModel,
    m: &DatasetManifest,
    test: &[usize],
    fold: usize,
    modes: &[InferenceMode],
    rows: &mut [ModelResult],
    outcomes: &mut Vec<ImageOutcome>,
) -> Result<()> {
    ensure_labels(model, m.labels())?;
    let preds = evaluate_indices(model, m, test, modes)?;
    for (row, per_mode) in rows.iter_mut().zip(&preds) {
        for (&i, p) in test.iter().zip(per_mode) {
            row.record(fold, m.class_of(i), p.predicted_class);
            outcomes.push(ImageOutcome {
                model: row.name.clone(),
                fold,
                actual: m.records()[i].label.clone(),
                record: PredictionRecord::new(&m.records()[i].path, p, m.labels())?,
            });
        }
    }
    Ok(())
}

fn absent_classes(m: &DatasetManifest, folds: &FoldAssignment) -> Vec<(String, usize)> {
    let counts = folds.class_fold_counts(&m.class_indices(), m.num_classes());
    let mut out = Vec::new();
    for (c, row) in counts.iter().enumerate() {
        for (f, &n) in row.iter().enumerate() {
            if n == 0 {
                out.push((m.labels()[c].clone(), f));
            }
        }
    }
    out
}

/// Trains one model per fold on the other folds and scores it on the held-out
/// one under every configured mode. Writes the report (and, if asked, the
/// checkpoints) into `cfg.out_dir`.
pub fn run_cv_experiment(cfg: &ExperimentConfig) -> Result<CvReport> {
    cfg.validate()?;
    let (m, folds) = prepare_split(cfg)?;
    let mut rows: Vec<ModelResult> = cfg
        .modes
        .iter()
        .map(|&mode| ModelResult::new(cfg.row_name(mode), mode, cfg.k, m.num_classes()))
        .collect();
    let mut outcomes = Vec::new();
    if cfg.save_models {
        std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    }
    for fold in 0..cfg.k {
        let (train, test) = (folds.train_indices(fold), folds.test_indices(fold));
        if test.is_empty() || train.is_empty() {
            return Err(Error::EmptyDataset(format!("fold {} has no training or no test images", fold + 1)));
        }
        let (model, sources) =
            train_on_indices(&m, &train, cfg.protocol, cfg.grid, cfg.input_size, &cfg.train, cfg.seed, fold)?;
        assert_disjoint(&sources, &test, fold)?;
        if model.grid != cfg.grid {
            return Err(Error::Config("training grid drifted from the configuration".into()));
        }
        if cfg.save_models {
            model.save(cfg.out_dir.join(fold_model_name(fold)))?;
        }
        score_fold(&model, &m, &test, fold, &cfg.modes, &mut rows, &mut outcomes)?;
    }
    let report = CvReport {
        labels: m.labels().to_vec(),
        k: cfg.k,
        config: cfg.echo(),
        rows,
        outcomes,
        absent: absent_classes(&m, &folds),
    };
    write_report(&report, &cfg.out_dir)?;
    Ok(report)
}

/// Fails unless no training sample came from a held-out image.
pub fn assert_disjoint(train_sources: &[usize], test: &[usize], fold: usize) -> Result<()> {
    let held_out: HashSet<usize> = test.iter().copied().collect();
    if let Some(i) = train_sources.iter().find(|i| held_out.contains(i)) {
        return Err(Error::InvalidArgument(format!(
            "record {i} is both trained on and held out in fold {}",
            fold + 1
        )));
    }
    Ok(())
}

/// Scores previously saved per-fold checkpoints (`fold-<i>.pvw` in
/// `model_dir`) without training.
pub fn evaluate_saved_models(
    m: &DatasetManifest,
    folds: &FoldAssignment,
    model_dir: &Path,
    modes: &[InferenceMode],
    name: &str,
) -> Result<CvReport> {
    let mut rows: Vec<ModelResult> = modes
        .iter()
        .map(|&mode| {
            let n = if modes.len() == 1 { name.to_string() } else { format!("{name} {mode}") };
            ModelResult::new(n, mode, folds.k(), m.num_classes())
        })
        .collect();
    let mut outcomes = Vec::new();
    let mut grid = None;
    for fold in 0..folds.k() {
        let model = TrainedModel::load(model_dir.join(fold_model_name(fold)))?;
        if *grid.get_or_insert(model.grid) != model.grid {
            return Err(Error::Config("fold checkpoints were trained with different grids".into()));
        }
        score_fold(&model, m, &folds.test_indices(fold), fold, modes, &mut rows, &mut outcomes)?;
    }
    let config = vec![
        ("model_dir".to_string(), model_dir.display().to_string()),
        ("grid".to_string(), grid.map(|g| g.to_string()).unwrap_or_default()),
        ("mode".to_string(), modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
        ("k".to_string(), folds.k().to_string()),
    ];
    Ok(CvReport {
        labels: m.labels().to_vec(),
        k: folds.k(),
        config,
        rows,
        outcomes,
        absent: absent_classes(m, folds),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{synth_generate, SynthSpec};
    use crate::model::TrainConfig;

    #[test]
    fn end_to_end_small_run_is_reproducible() {
        let data = tempfile::tempdir().unwrap();
        let spec = SynthSpec::fine_grained(2, 4, 32, 24, 1).unwrap();
        synth_generate(&spec, data.path()).unwrap();
        let mut cfg = ExperimentConfig::new(data.path().join("manifest.csv"), data.path().join("r1"));
        cfg.k = 2;
        cfg.grid = "2x2".parse().unwrap();
        cfg.input_size = 8;
        cfg.train = TrainConfig { epochs: 2, ..TrainConfig::default() };
        cfg.modes = vec![InferenceMode::Vote, InferenceMode::Central];
        cfg.save_models = true;
        let a = run_cv_experiment(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.rows[0].fold_total, vec![4, 4]);
        assert_eq!(a.outcomes.len(), 16);

        let mut cfg2 = cfg.clone();
        cfg2.out_dir = data.path().join("r2");
        let b = run_cv_experiment(&cfg2).unwrap();
        assert_eq!(a.rows, b.rows);
        for f in ["accuracy.csv", "table.csv", "confusion.csv", "predictions.csv"] {
            assert_eq!(
                std::fs::read(cfg.out_dir.join(f)).unwrap(),
                std::fs::read(cfg2.out_dir.join(f)).unwrap()
            );
        }
        for fold in 0..2 {
            let name = fold_model_name(fold);
            assert_eq!(std::fs::read(cfg.out_dir.join(&name)).unwrap(), std::fs::read(cfg2.out_dir.join(&name)).unwrap());
        }

        // re-scoring the saved checkpoints reproduces the vote row
        let (m, folds) = prepare_split(&cfg).unwrap();
        let re = evaluate_saved_models(&m, &folds, &cfg.out_dir, &[InferenceMode::Vote], "again").unwrap();
        assert_eq!(re.rows[0].fold_correct, a.rows[0].fold_correct);
    }

    #[test]
    fn leakage_is_detected() {
        assert!(assert_disjoint(&[1, 2, 3], &[4, 5], 0).is_ok());
        assert!(assert_disjoint(&[1, 2, 5], &[4, 5], 0).is_err());
    }
}
