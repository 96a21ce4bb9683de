use std::fs;
use std::path::PathBuf;

use anyhow::Context;

use pcfg_contacts::contacts::ContactMap;
use pcfg_contacts::dataio::read_fasta;
use pcfg_contacts::evaluation::predict_contacts;
use pcfg_contacts::parser::{viterbi, viterbi_constrained};

use crate::util::{csv_field, read_grammar, write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    fasta: PathBuf,
    /// Leaf-distance threshold; pairs within it count as predicted.
    #[arg(long, default_value_t = pcfg_contacts::DEFAULT_DELTA)]
    delta: usize,
    /// Contact-pair file for constrained decoding (otherwise trees are
    /// derived from the sequence alone).
    #[arg(long)]
    contacts: Option<PathBuf>,
    /// Output CSV (`id,i,j`), one row per predicted pair.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let grammar = read_grammar(&args.grammar)?;
    let records = read_fasta(&args.fasta, grammar.alphabet())?;
    let map = match &args.contacts {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading contacts {}", path.display()))?;
            Some(ContactMap::from_text(&text)?)
        }
        None => None,
    };

    let mut out = String::from("id,i,j\n");
    for rec in &records {
        let seq = grammar.encode(&rec.seq)?;
        let best = match &map {
            Some(m) => viterbi_constrained(&grammar, &seq, m)?,
            None => viterbi(&grammar, &seq)?,
        };
        if let Some(parse) = best {
            for (i, j) in predict_contacts(&parse.tree, args.delta) {
                out.push_str(&format!("{},{i},{j}\n", csv_field(&rec.id)));
            }
        }
    }
    write_file(&args.out, &out)?;
    Ok(())
}
