use std::fs;
use std::path::PathBuf;

use anyhow::Context;

use pcfg_contacts::dataio::{load_dataset, Manifest};
use pcfg_contacts::estimation::EstimatorKind;
use pcfg_contacts::learner::{train, LearnerConfig};

use crate::util::{read_grammar, usage, write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// Dataset manifest (key=value lines).
    #[arg(long)]
    manifest: PathBuf,
    /// Base grammar defining the rule set to estimate.
    #[arg(long)]
    grammar: PathBuf,
    /// ml, ce-m or ce-x; overrides the config file.
    #[arg(long)]
    estimator: Option<EstimatorKind>,
    /// Learner configuration (TOML); missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the trained grammar.
    #[arg(long)]
    out: PathBuf,
    /// Training trace CSV (default: `<out>.trace.csv`).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Directory for checkpoint grammars, one file per checkpoint.
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let mut config: LearnerConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => LearnerConfig::default(),
    };
    if let Some(estimator) = args.estimator {
        config.estimator = estimator;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }

    let manifest = Manifest::from_file(&args.manifest)?;
    let dataset = load_dataset(&manifest)?;
    if config.estimator == EstimatorKind::CeM && dataset.shared_map.is_none() {
        return Err(usage(
            "estimator ce-m needs a shared contact map; add `contacts=` to the manifest",
        ));
    }
    let base = read_grammar(&args.grammar)?;

    let result = train(&dataset, &base, &config)?;

    write_file(&args.out, &result.grammar.to_text())?;
    let trace_path = args
        .trace
        .unwrap_or_else(|| PathBuf::from(format!("{}.trace.csv", args.out.display())));
    write_file(&trace_path, &result.trace.to_csv())?;
    if let Some(dir) = &args.checkpoint_dir {
        for cp in &result.checkpoints {
            write_file(
                &dir.join(format!("checkpoint_{:05}.grammar", cp.generation)),
                &cp.grammar.to_text(),
            )?;
        }
    }
    eprintln!(
        "best {} fitness {} after {} generations{}",
        config.estimator,
        result.best_fitness,
        result.trace.generations.len() - 1,
        if result.stopped_early {
            " (early stop)"
        } else {
            ""
        }
    );
    Ok(())
}
