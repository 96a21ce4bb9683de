use std::fs;
use std::path::PathBuf;

use anyhow::Context;

use pcfg_contacts::dataio::{load_dataset, Manifest};
use pcfg_contacts::estimation::EstimatorKind;
use pcfg_contacts::evaluation::{cross_validate, evaluate_grammar, CvConfig};
use pcfg_contacts::learner::LearnerConfig;

use crate::util::{read_grammar, resolve_null_model, usage, write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    manifest: PathBuf,
    /// Evaluate this fixed grammar (no training).
    #[arg(long, conflicts_with_all = ["base_grammar", "estimator", "config", "folds"])]
    grammar: Option<PathBuf>,
    /// Cross-validate: train from this base grammar per round.
    #[arg(long)]
    base_grammar: Option<PathBuf>,
    /// Estimator for cross-validated training (ml, ce-m, ce-x).
    #[arg(long)]
    estimator: Option<EstimatorKind>,
    /// Learner configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fold count k (test 1, validate 1, train k-2).
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Score test items on their map-constrained probability.
    #[arg(long)]
    with_map: bool,
    /// Leaf-distance threshold for descriptive metrics.
    #[arg(long, default_value_t = pcfg_contacts::DEFAULT_DELTA)]
    delta: usize,
    /// Null-model frequency file.
    #[arg(long)]
    null: Option<PathBuf>,
    /// Directory for `report.json` and recall-precision CSVs.
    #[arg(long)]
    out_dir: PathBuf,
}

fn rpc_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("recall,precision\n");
    for (r, p) in points {
        out.push_str(&format!("{r},{p}\n"));
    }
    out
}

pub fn run(args: Args) -> Result<(), CliError> {
    let manifest = Manifest::from_file(&args.manifest)?;
    let dataset = load_dataset(&manifest)?;
    let null = resolve_null_model(args.null.as_ref(), &dataset.alphabet)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    match (&args.grammar, &args.base_grammar) {
        (Some(path), None) => {
            let grammar = read_grammar(path)?;
            let eval =
                evaluate_grammar(&dataset, &grammar, &null, args.with_map, args.delta)?;
            let report = serde_json::json!({
                "mode": "fixed-grammar",
                "grammar": path.display().to_string(),
                "score_with_map": args.with_map,
                "ap": eval.ap,
                "descriptive": eval.descriptive,
                "no_parse": eval.no_parse,
                "items": eval.items,
            });
            write_file(
                &args.out_dir.join("report.json"),
                &format!("{:#}\n", report),
            )?;
            write_file(&args.out_dir.join("rpc.csv"), &rpc_csv(&eval.rpc))?;
        }
        (None, Some(path)) => {
            let base = read_grammar(path)?;
            let mut config: LearnerConfig = match &args.config {
                Some(p) => {
                    let text = fs::read_to_string(p)
                        .with_context(|| format!("reading config {}", p.display()))?;
                    toml::from_str(&text)
                        .with_context(|| format!("parsing config {}", p.display()))?
                }
                None => LearnerConfig::default(),
            };
            if let Some(estimator) = args.estimator {
                config.estimator = estimator;
            }
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if config.estimator == EstimatorKind::CeM && dataset.shared_map.is_none() {
                return Err(usage(
                    "estimator ce-m needs a shared contact map; add `contacts=` to the manifest",
                ));
            }
            let cv = CvConfig {
                k: args.folds.unwrap_or(3),
                score_with_map: args.with_map,
                delta: args.delta,
            };
            let report = cross_validate(&dataset, &base, &config, &null, &cv)?;
            for round in &report.rounds {
                write_file(
                    &args.out_dir.join(format!("rpc_round{}.csv", round.round)),
                    &rpc_csv(&round.rpc),
                )?;
            }
            let json = serde_json::to_string_pretty(&report).context("serializing report")?;
            write_file(&args.out_dir.join("report.json"), &format!("{json}\n"))?;
            eprintln!(
                "aggregate AP {:.4} over {} rounds",
                report.aggregate.ap, report.k
            );
        }
        _ => {
            return Err(usage(
                "pass exactly one of --grammar (fixed evaluation) or --base-grammar (cross-validation)",
            ))
        }
    }
    Ok(())
}
