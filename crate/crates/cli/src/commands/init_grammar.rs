use std::path::PathBuf;

use pcfg_contacts::grammar::{Alphabet, Grammar};

use crate::util::{write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// `protein` or a literal string of single-character symbols.
    #[arg(long, default_value = "protein")]
    alphabet: String,
    /// Number of lexical non-terminals.
    #[arg(long)]
    vt: usize,
    /// Number of non-lexical non-terminals.
    #[arg(long)]
    vn: usize,
    /// Leave the contact-rule set empty.
    #[arg(long)]
    no_contact_rules: bool,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let alphabet = if args.alphabet == "protein" {
        Alphabet::protein()
    } else {
        Alphabet::from_symbols_str(&args.alphabet)?
    };
    let grammar = Grammar::full(alphabet, args.vt, args.vn, !args.no_contact_rules)?;
    write_file(&args.out, &grammar.to_text())?;
    eprintln!(
        "wrote {} rules to {}",
        grammar.rules().len(),
        args.out.display()
    );
    Ok(())
}
