use std::path::{Path, PathBuf};

use crate::augment::AugmentProtocol;
use crate::error::{Error, Result};
use crate::imagery::GridSpec;
use crate::model::{TrainConfig, MIN_INPUT_SIZE};
use crate::voting::InferenceMode;

/// Everything one cross-validation run depends on. Parsed from `key=value`
/// lines; blank lines and `#` comments are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub manifest: PathBuf,
    /// Precomputed fold file; when absent folds are stratified from `seed`.
    pub folds: Option<PathBuf>,
    pub grid: GridSpec,
    pub protocol: AugmentProtocol,
    /// Inference modes to score; the first one is the headline mode.
    pub modes: Vec<InferenceMode>,
    pub k: usize,
    pub input_size: usize,
    pub train: TrainConfig,
    /// Fraction of every class to keep before splitting; 1 keeps everything.
    pub fraction: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Row label in the wide table; derived from the protocol, grid and mode when absent.
    pub name: Option<String>,
    pub save_models: bool,
}

impl ExperimentConfig {
    pub fn new(manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            manifest: manifest.into(),
            folds: None,
            grid: GridSpec::new(6, 8).expect("default grid is valid"),
            protocol: AugmentProtocol::Tdli,
            modes: vec![InferenceMode::Vote],
            k: 5,
            input_size: 64,
            train: TrainConfig::default(),
            fraction: 1.0,
            out_dir: out_dir.into(),
            seed: 0,
            name: None,
            save_models: false,
        }
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut manifest = None;
        let mut out = None;
        let mut cfg = ExperimentConfig::new("", "");
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: invalid {key} {value:?} ({what})", n + 1));
            match key {
                "manifest" => manifest = Some(base.join(value)),
                "folds" => cfg.folds = Some(base.join(value)),
                "out" | "out_dir" => out = Some(base.join(value)),
                "grid" => cfg.grid = value.parse().map_err(|_| bad("expected RxC"))?,
                "augment" | "protocol" => cfg.protocol = value.parse().map_err(|_| bad("none, tdli, vl or tang"))?,
                "mode" | "modes" => {
                    cfg.modes = value
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<Vec<_>>>()
                        .map_err(|_| bad("vote, central or mean"))?
                }
                "k" => cfg.k = value.parse().map_err(|_| bad("integer"))?,
                "input_size" => cfg.input_size = value.parse().map_err(|_| bad("integer"))?,
                "epochs" => cfg.train.epochs = value.parse().map_err(|_| bad("integer"))?,
                "batch_size" => cfg.train.batch_size = value.parse().map_err(|_| bad("integer"))?,
                "learning_rate" => cfg.train.learning_rate = value.parse().map_err(|_| bad("number"))?,
                "momentum" => cfg.train.momentum = value.parse().map_err(|_| bad("number"))?,
                "fraction" => cfg.fraction = value.parse().map_err(|_| bad("number"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
                "name" => cfg.name = Some(value.to_string()),
                "save_models" => cfg.save_models = value.parse().map_err(|_| bad("true or false"))?,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", n + 1))),
            }
        }
        cfg.manifest = manifest.ok_or_else(|| Error::Config("missing key manifest".into()))?;
        cfg.out_dir = out.ok_or_else(|| Error::Config("missing key out".into()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    /// Rejects combinations that cannot be run as described.
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        if self.input_size < MIN_INPUT_SIZE {
            return Err(Error::Config(format!(
                "input_size {} below the minimum of {MIN_INPUT_SIZE}",
                self.input_size
            )));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Config(format!("fraction {} outside (0, 1]", self.fraction)));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("no inference mode given".into()));
        }
        if self.protocol.is_whole_image() {
            if self.grid != GridSpec::single() {
                return Err(Error::Config(format!(
                    "{} trains on whole images and needs grid 1x1, got {}",
                    self.protocol, self.grid
                )));
            }
            if self.modes.contains(&InferenceMode::Central) {
                return Err(Error::Config(format!(
                    "central mode needs grid-cell training patches, but {} trains on square whole-image crops",
                    self.protocol
                )));
            }
        }
        self.train.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Table row label for `mode`.
    pub fn row_name(&self, mode: InferenceMode) -> String {
        match &self.name {
            Some(n) if self.modes.len() == 1 => n.clone(),
            Some(n) => format!("{n} {mode}"),
            None => format!("{} {} {mode}", self.protocol, self.grid),
        }
    }

    /// `key=value` lines that [`ExperimentConfig::parse`] reads back.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("manifest".to_string(), self.manifest.display().to_string()),
            ("folds".to_string(), self.folds.as_ref().map_or(String::new(), |p| p.display().to_string())),
            ("grid".to_string(), self.grid.to_string()),
            ("augment".to_string(), self.protocol.to_string()),
            ("mode".to_string(), self.modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
            ("k".to_string(), self.k.to_string()),
            ("input_size".to_string(), self.input_size.to_string()),
            ("epochs".to_string(), self.train.epochs.to_string()),
            ("batch_size".to_string(), self.train.batch_size.to_string()),
            ("learning_rate".to_string(), self.train.learning_rate.to_string()),
            ("momentum".to_string(), self.train.momentum.to_string()),
            ("fraction".to_string(), self.fraction.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("out".to_string(), self.out_dir.display().to_string()),
            ("save_models".to_string(), self.save_models.to_string()),
        ];
        if self.folds.is_none() {
            v.retain(|(k, _)| k != "folds");
        }
        if let Some(n) = &self.name {
            v.push(("name".to_string(), n.clone()));
        }
        v
    }
}
