use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use patchvote::augment::AugmentProtocol;
use patchvote::dataset::{load_folds, load_manifest, stratified_kfold, write_folds};
use patchvote::harness::{
    evaluate_saved_models, run_cv_experiment, synth_generate, table_csv, train_on_indices, write_report,
    ExperimentConfig, SynthSpec,
};
use patchvote::imagery::{decode_image, GridSpec};
use patchvote::model::{TrainConfig, TrainedModel};
use patchvote::voting::{infer_with_model, write_records, InferenceMode, PredictionRecord};
use patchvote::{Error, Result};

#[derive(Parser)]
#[command(name = "patchvote", version, about = "Patch-grid texture classification with majority voting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic fine-grained texture suite with its manifest.
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a class-stratified k-fold assignment.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model with fold `fold-id` (0-based) held out.
    Train(TrainArgs),
    /// Classify one image and print its prediction record.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value = "6x8")]
        grid: GridSpec,
        #[arg(long, default_value = "vote")]
        mode: InferenceMode,
    },
    /// Score saved per-fold checkpoints (`fold-<i>.pvw`) and write a report.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        folds: PathBuf,
        #[arg(long)]
        model_dir: PathBuf,
        /// Comma-separated list of vote, central and mean.
        #[arg(long, default_value = "vote", value_delimiter = ',')]
        mode: Vec<InferenceMode>,
        /// Row label in the wide table.
        #[arg(long, default_value = "model")]
        name: String,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run a full cross-validation experiment described by a key=value file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    folds: PathBuf,
    #[arg(long)]
    fold_id: usize,
    /// Defaults to 6x8 for patch protocols and 1x1 for whole-image ones.
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long, default_value = "tdli")]
    augment: AugmentProtocol,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    input_size: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn train(a: &TrainArgs) -> Result<()> {
    let m = load_manifest(&a.manifest)?;
    let folds = load_folds(&a.folds, &m)?;
    if a.fold_id >= folds.k() {
        return Err(Error::InvalidArgument(format!("fold-id {} out of range for {} folds", a.fold_id, folds.k())));
    }
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.learning_rate,
        momentum: a.momentum,
        seed: a.seed,
    };
    cfg.validate()?;
    let grid = match a.grid {
        Some(g) => g,
        None if a.augment.is_whole_image() => GridSpec::single(),
        None => GridSpec::new(6, 8)?,
    };
    let train = folds.train_indices(a.fold_id);
    let (model, _) = train_on_indices(&m, &train, a.augment, grid, a.input_size, &cfg, a.seed, a.fold_id)?;
    model.save(&a.out)?;
    println!("trained on {} images, wrote {}", train.len(), a.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { classes, per_class, width, height, seed, out } => {
            let spec = SynthSpec::fine_grained(classes, per_class, width, height, seed)?;
            let m = synth_generate(&spec, &out)?;
            println!("wrote {} images in {} classes to {}", m.len(), m.num_classes(), out.display());
        }
        Command::Split { manifest, k, seed, out } => {
            let m = load_manifest(&manifest)?;
            let folds = stratified_kfold(&m, k, seed)?;
            write_folds(&m, &folds, &out)?;
            println!("wrote {k} folds over {} images to {}", m.len(), out.display());
        }
        Command::Train(a) => train(&a)?,
        Command::Infer { model, image, grid, mode } => {
            let model = TrainedModel::load(&model)?;
            let raster = decode_image(&image)?;
            let p = infer_with_model(&model, &raster, grid, mode)?;
            let record = PredictionRecord::new(&image.display().to_string(), &p, &model.labels)?;
            write_records(&mut std::io::stdout().lock(), &[record])?;
        }
        Command::Eval { manifest, folds, model_dir, mode, name, report } => {
            let m = load_manifest(&manifest)?;
            let folds = load_folds(&folds, &m)?;
            let r = evaluate_saved_models(&m, &folds, &model_dir, &mode, &name)?;
            write_report(&r, &report)?;
            print!("{}", table_csv(&r.rows)?);
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let r = run_cv_experiment(&cfg)?;
            print!("{}", table_csv(&r.rows)?);
        }
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let head = text.split("\n\n").next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(head));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
