use std::fs;
use std::path::PathBuf;

use anyhow::Context;

use pcfg_contacts::contacts::ContactMap;
use pcfg_contacts::dataio::read_fasta;
use pcfg_contacts::evaluation::score;

use crate::util::{csv_field, read_grammar, resolve_null_model, write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    fasta: PathBuf,
    /// Contact-pair file; when given, sequences are scored on their
    /// map-constrained probability.
    #[arg(long)]
    contacts: Option<PathBuf>,
    /// Null-model frequency file (default: $PCFG_CONTACTS_NULL_MODEL, then
    /// the built-in background).
    #[arg(long)]
    null: Option<PathBuf>,
    /// Output CSV (`id,log_odds`).
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
    let null = resolve_null_model(args.null.as_ref(), grammar.alphabet())?;

    let mut out = String::from("id,log_odds\n");
    for rec in &records {
        let seq = grammar.encode(&rec.seq)?;
        let s = score(&grammar, &seq, map.as_ref(), &null)?;
        out.push_str(&format!("{},{}\n", csv_field(&rec.id), s));
    }
    write_file(&args.out, &out)?;
    Ok(())
}
