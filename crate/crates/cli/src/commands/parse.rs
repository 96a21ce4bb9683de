use std::fs;
use std::path::PathBuf;

use anyhow::Context;

use pcfg_contacts::contacts::ContactMap;
use pcfg_contacts::dataio::read_fasta;
use pcfg_contacts::parser::{viterbi, viterbi_constrained};

use crate::util::{read_grammar, write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    fasta: PathBuf,
    /// Contact-pair file; when given, decoding is restricted to
    /// map-consistent trees.
    #[arg(long)]
    contacts: Option<PathBuf>,
    /// Output file: one bracketed tree per line, each preceded by a
    /// `# id=... log_prob=...` comment line.
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

    let mut out = String::new();
    for rec in &records {
        let seq = grammar.encode(&rec.seq)?;
        let best = match &map {
            Some(m) => viterbi_constrained(&grammar, &seq, m)?,
            None => viterbi(&grammar, &seq)?,
        };
        match best {
            Some(parse) => {
                out.push_str(&format!(
                    "# id={} log_prob={}\n{}\n",
                    rec.id,
                    parse.probability.ln(),
                    parse.tree.to_bracketed(&grammar)
                ));
            }
            None => out.push_str(&format!("# id={} no-parse\n", rec.id)),
        }
    }
    write_file(&args.out, &out)?;
    Ok(())
}
