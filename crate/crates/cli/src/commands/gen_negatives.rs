use std::path::PathBuf;

use pcfg_contacts::dataio::{cut_negatives_stride, read_fasta, write_fasta};
use pcfg_contacts::grammar::Alphabet;

use crate::util::{usage, write_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// Long source sequences to cut.
    #[arg(long)]
    fasta: PathBuf,
    /// Window length (the positive motif length).
    #[arg(long)]
    window: usize,
    /// Step between window starts (default: the window length, i.e.
    /// non-overlapping cutting).
    #[arg(long)]
    stride: Option<usize>,
    /// `protein` or a literal string of symbols.
    #[arg(long, default_value = "protein")]
    alphabet: String,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    if args.window < 2 {
        return Err(usage("window must be at least 2"));
    }
    let stride = args.stride.unwrap_or(args.window);
    if stride == 0 {
        return Err(usage("stride must be at least 1"));
    }
    let alphabet = if args.alphabet == "protein" {
        Alphabet::protein()
    } else {
        Alphabet::from_symbols_str(&args.alphabet)?
    };
    let records = read_fasta(&args.fasta, &alphabet)?;
    let windows = cut_negatives_stride(&records, args.window, stride);
    write_file(&args.out, &write_fasta(&windows))?;
    eprintln!("cut {} windows from {} sequences", windows.len(), records.len());
    Ok(())
}
