//! Shared plumbing: error split for exit codes, null-model resolution, CSV
//! field escaping.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use pcfg_contacts::evaluation::NullModel;
use pcfg_contacts::grammar::{Alphabet, Grammar};

/// Environment variable naming a default null-model frequency file.
pub const NULL_MODEL_ENV: &str = "PCFG_CONTACTS_NULL_MODEL";

pub enum CliError {
    /// Bad invocation (exit 2): missing or contradictory arguments.
    Usage(String),
    /// Everything else (exit 1).
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(err: E) -> Self {
        CliError::Runtime(err.into())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn read_grammar(path: &Path) -> Result<Grammar, CliError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading grammar {}", path.display()))?;
    Ok(Grammar::from_text(&text)
        .with_context(|| format!("parsing grammar {}", path.display()))?)
}

/// Null model precedence: explicit flag, then $PCFG_CONTACTS_NULL_MODEL,
/// then the built-in protein background (uniform for other alphabets).
pub fn resolve_null_model(
    flag: Option<&PathBuf>,
    alphabet: &Alphabet,
) -> Result<NullModel, CliError> {
    let env_path = std::env::var_os(NULL_MODEL_ENV).map(PathBuf::from);
    let path = flag.cloned().or(env_path);
    match path {
        Some(p) => {
            let text = fs::read_to_string(&p)
                .with_context(|| format!("reading null model {}", p.display()))?;
            Ok(NullModel::from_text(alphabet.clone(), &text)
                .with_context(|| format!("parsing null model {}", p.display()))?)
        }
        None => {
            if *alphabet == Alphabet::protein() {
                Ok(NullModel::protein_default())
            } else {
                Ok(NullModel::uniform(alphabet.clone()))
            }
        }
    }
}

/// Quote a CSV field only when it needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
