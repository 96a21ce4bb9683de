//! Batch front end: train grammars on motif datasets, score and parse
//! sequences, predict contacts from Viterbi trees, run the evaluation
//! harness, and cut negative windows.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.

mod commands;
mod util;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{evaluate, gen_negatives, init_grammar, parse, predict_contacts, score, train};
use util::CliError;

#[derive(Parser)]
#[command(
    name = "pcfg-contacts",
    version,
    about = "Contact-map constrained probabilistic grammars for sequence motifs"
)]
struct Cli {
    /// Worker threads for parallel scoring and fitness evaluation
    /// (default: all cores). Results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a grammar with every allowed rule and uniform probabilities.
    InitGrammar(init_grammar::Args),
    /// Estimate rule probabilities on a dataset with a genetic algorithm.
    Train(train::Args),
    /// Score sequences as log-odds against a unigram null model.
    Score(score::Args),
    /// Write Viterbi parse trees in bracketed form.
    Parse(parse::Args),
    /// Predict contact pairs from Viterbi trees.
    PredictContacts(predict_contacts::Args),
    /// Evaluate a grammar, or cross-validate training, on a dataset.
    Evaluate(evaluate::Args),
    /// Cut long sequences into fixed-length negative windows.
    GenNegatives(gen_negatives::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore a second initialization (e.g. in tests); the pool can only
        // be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match cli.command {
        Command::InitGrammar(args) => init_grammar::run(args),
        Command::Train(args) => train::run(args),
        Command::Score(args) => score::run(args),
        Command::Parse(args) => parse::run(args),
        Command::PredictContacts(args) => predict_contacts::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::GenNegatives(args) => gen_negatives::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
