//! Cross-validates patch voting against the whole-image baseline on a
//! synthetic fine-grained suite.
//!
//! ```bash
//! cargo run --release --example synthetic_benchmark -- [per_class] [epochs] [seed]
//! ```

use patchvote::harness::{run_cv_experiment, synth_generate, table_csv, ExperimentConfig, SynthSpec};
use patchvote::imagery::GridSpec;
use patchvote::model::TrainConfig;
use patchvote::voting::InferenceMode;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> patchvote::Result<()> {
    let (per_class, epochs, seed) = (arg(1, 10usize), arg(2, 8usize), arg(3, 1u64));
    let dir = tempfile::tempdir().expect("temporary directory");
    synth_generate(&SynthSpec::fine_grained(8, per_class, 400, 300, seed)?, dir.path())?;

    let mut cfg = ExperimentConfig::new(dir.path().join("manifest.csv"), dir.path().join("patches"));
    cfg.input_size = 16;
    cfg.seed = seed;
    cfg.train = TrainConfig { epochs, learning_rate: 0.005, ..TrainConfig::default() };
    cfg.modes = vec![InferenceMode::Vote, InferenceMode::Central, InferenceMode::Mean];
    let mut rows = run_cv_experiment(&cfg)?.rows;

    let mut whole = cfg.clone();
    whole.grid = GridSpec::single();
    whole.modes = vec![InferenceMode::Vote];
    whole.name = Some("whole image".into());
    whole.out_dir = dir.path().join("whole");
    rows.extend(run_cv_experiment(&whole)?.rows);
    print!("{}", table_csv(&rows)?);
    Ok(())
}
