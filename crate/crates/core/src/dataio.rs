//! Sequence and contact-data ingestion: FASTA records, contact-pair files,
//! flat key-value manifests, negative-window cutting and dataset assembly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::contacts::{ContactError, ContactMap, ContactSet};
use crate::grammar::{Alphabet, GrammarError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} record '{id}' position {position}: symbol '{symbol}' not in alphabet")]
    BadSymbol {
        path: PathBuf,
        id: String,
        position: usize,
        symbol: char,
    },
    #[error("{path} line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Contact(#[from] ContactError),
    #[error("{0}")]
    Grammar(#[from] GrammarError),
    #[error(
        "sequence '{id}' has length {got}, expected {expected} (shared contact map present)"
    )]
    LengthMismatch {
        id: String,
        got: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqRecord {
    pub id: String,
    pub seq: String,
}

/// Parse FASTA text. Sequences are uppercased and checked against the
/// alphabet, reporting the offending record and 1-based position.
pub fn parse_fasta(text: &str, alphabet: &Alphabet, path: &Path) -> Result<Vec<SeqRecord>, DataError> {
    let mut records: Vec<SeqRecord> = Vec::new();
    let mut current: Option<SeqRecord> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('>') {
            if let Some(rec) = current.take() {
                records.push(rec);
            }
            let id = rest.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(DataError::Malformed {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: "empty record id".into(),
                });
            }
            current = Some(SeqRecord { id, seq: String::new() });
        } else {
            match current.as_mut() {
                Some(rec) => {
                    // Uppercase only symbols the alphabet does not know
                    // as-is, so lowercase alphabets keep working.
                    for c in line.trim().chars() {
                        if alphabet.term(c).is_some() {
                            rec.seq.push(c);
                        } else {
                            rec.seq.push(c.to_ascii_uppercase());
                        }
                    }
                }
                None => {
                    return Err(DataError::Malformed {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        reason: "sequence data before any '>' header".into(),
                    })
                }
            }
        }
    }
    if let Some(rec) = current.take() {
        records.push(rec);
    }
    for rec in &records {
        for (i, c) in rec.seq.chars().enumerate() {
            if alphabet.term(c).is_none() {
                return Err(DataError::BadSymbol {
                    path: path.to_path_buf(),
                    id: rec.id.clone(),
                    position: i + 1,
                    symbol: c,
                });
            }
        }
    }
    Ok(records)
}

pub fn read_fasta(path: &Path, alphabet: &Alphabet) -> Result<Vec<SeqRecord>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_fasta(&text, alphabet, path)
}

pub fn write_fasta(records: &[SeqRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&format!(">{}\n{}\n", rec.id, rec.seq));
    }
    out
}

/// Consecutive windows of exactly `window` symbols per input sequence, at
/// the given stride; the trailing remainder is discarded. Window ids carry
/// the 1-based source span.
pub fn cut_negatives_stride(
    records: &[SeqRecord],
    window: usize,
    stride: usize,
) -> Vec<SeqRecord> {
    assert!(window >= 2, "window must be at least 2");
    assert!(stride >= 1, "stride must be at least 1");
    let mut out = Vec::new();
    for rec in records {
        let chars: Vec<char> = rec.seq.chars().collect();
        let mut start = 0;
        while start + window <= chars.len() {
            out.push(SeqRecord {
                id: format!("{}:{}-{}", rec.id, start + 1, start + window),
                seq: chars[start..start + window].iter().collect(),
            });
            start += stride;
        }
    }
    out
}

/// Non-overlapping cutting: stride equals the window length.
pub fn cut_negatives(records: &[SeqRecord], window: usize) -> Vec<SeqRecord> {
    cut_negatives_stride(records, window, window)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphabetChoice {
    Protein,
    Custom(String),
}

impl AlphabetChoice {
    pub fn build(&self) -> Result<Alphabet, GrammarError> {
        match self {
            AlphabetChoice::Protein => Ok(Alphabet::protein()),
            AlphabetChoice::Custom(s) => Alphabet::from_symbols_str(s),
        }
    }
}

/// Flat key-value description of a dataset on disk. Relative paths are
/// resolved against the manifest's own directory.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub positives: PathBuf,
    pub negatives: Option<PathBuf>,
    pub contacts: Option<PathBuf>,
    pub full_contacts: Option<PathBuf>,
    /// Directory of per-sequence contact files named `<id>.txt` with
    /// non-alphanumeric id characters replaced by `_`.
    pub per_item_contacts: Option<PathBuf>,
    pub alphabet: AlphabetChoice,
    pub length: Option<usize>,
    pub notes: Option<String>,
}

impl Manifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, DataError> {
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(DataError::Manifest(format!(
                "line {}: expected 'key=value'",
                idx + 1
            )))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        let resolve = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let positives = fields
            .get("positives")
            .ok_or(DataError::Manifest("missing 'positives' key".into()))?;
        let alphabet = match fields.get("alphabet").map(String::as_str) {
            None | Some("protein") => AlphabetChoice::Protein,
            Some(other) => AlphabetChoice::Custom(other.to_string()),
        };
        let length = match fields.get("length") {
            Some(v) => Some(v.parse().map_err(|_| {
                DataError::Manifest(format!("bad 'length' value '{v}'"))
            })?),
            None => None,
        };
        Ok(Manifest {
            positives: resolve(positives),
            negatives: fields.get("negatives").map(|v| resolve(v)),
            contacts: fields.get("contacts").map(|v| resolve(v)),
            full_contacts: fields.get("full_contacts").map(|v| resolve(v)),
            per_item_contacts: fields.get("per_item_contacts").map(|v| resolve(v)),
            alphabet,
            length,
            notes: fields.get("notes").cloned(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Manifest::parse(&text, base)
    }
}

/// Assembled, validated training/evaluation data.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub alphabet: Alphabet,
    pub positives: Vec<SeqRecord>,
    pub negatives: Vec<SeqRecord>,
    pub shared_map: Option<ContactMap>,
    pub full_map: Option<ContactSet>,
    /// Per-sequence maps, keyed by record id; takes precedence over the
    /// shared map for the sequences it names.
    pub per_item_maps: Option<BTreeMap<String, ContactMap>>,
    pub motif_length: Option<usize>,
    pub notes: Option<String>,
}

impl Dataset {
    /// The contact map in force for positive item `index`, if any.
    pub fn map_for(&self, index: usize) -> Option<&ContactMap> {
        let id = &self.positives[index].id;
        if let Some(maps) = &self.per_item_maps {
            if let Some(m) = maps.get(id) {
                return Some(m);
            }
        }
        self.shared_map.as_ref()
    }

    /// Same dataset restricted to the selected positive items.
    pub fn subset_positives(&self, indices: &[usize]) -> Dataset {
        Dataset {
            positives: indices.iter().map(|&i| self.positives[i].clone()).collect(),
            ..self.clone()
        }
    }

    /// Write the dataset under `dir` (FASTA files, contact files, per-item
    /// contact directory when present) and return the manifest describing
    /// it; `load_dataset` on that manifest reproduces the dataset.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Manifest, DataError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source: std::io::Error| DataError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let positives = dir.join("positives.fasta");
        fs::write(&positives, write_fasta(&self.positives)).map_err(io_err(&positives))?;
        let negatives = if self.negatives.is_empty() {
            None
        } else {
            let path = dir.join("negatives.fasta");
            fs::write(&path, write_fasta(&self.negatives)).map_err(io_err(&path))?;
            Some(path)
        };
        let contacts = match &self.shared_map {
            Some(map) => {
                let path = dir.join("contacts.txt");
                fs::write(&path, map.to_text()).map_err(io_err(&path))?;
                Some(path)
            }
            None => None,
        };
        let full_contacts = match &self.full_map {
            Some(set) => {
                let path = dir.join("full_contacts.txt");
                fs::write(&path, set.to_text()).map_err(io_err(&path))?;
                Some(path)
            }
            None => None,
        };
        let per_item_dir = match &self.per_item_maps {
            Some(maps) if !maps.is_empty() => {
                let sub = dir.join("per_item_contacts");
                fs::create_dir_all(&sub).map_err(io_err(&sub))?;
                let mut seen = BTreeMap::new();
                for (id, map) in maps {
                    let file = format!("{}.txt", sanitize_id(id));
                    if let Some(other) = seen.insert(file.clone(), id.clone()) {
                        return Err(DataError::Manifest(format!(
                            "ids '{other}' and '{id}' collide as file name {file}"
                        )));
                    }
                    let path = sub.join(file);
                    fs::write(&path, map.to_text()).map_err(io_err(&path))?;
                }
                Some(sub)
            }
            _ => None,
        };

        let alphabet_value = {
            let symbols: String = self.alphabet.symbols().iter().collect();
            if symbols == crate::grammar::PROTEIN_SYMBOLS {
                "protein".to_string()
            } else {
                symbols
            }
        };
        let mut text = format!("positives = positives.fasta\nalphabet = {alphabet_value}\n");
        if negatives.is_some() {
            text.push_str("negatives = negatives.fasta\n");
        }
        if contacts.is_some() {
            text.push_str("contacts = contacts.txt\n");
        }
        if full_contacts.is_some() {
            text.push_str("full_contacts = full_contacts.txt\n");
        }
        if per_item_dir.is_some() {
            text.push_str("per_item_contacts = per_item_contacts\n");
        }
        if let Some(n) = self.motif_length {
            text.push_str(&format!("length = {n}\n"));
        }
        if let Some(notes) = &self.notes {
            text.push_str(&format!("notes = {notes}\n"));
        }
        let manifest_path = dir.join("manifest.txt");
        fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
        Manifest::from_file(&manifest_path)
    }
}

fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn load_dataset(manifest: &Manifest) -> Result<Dataset, DataError> {
    let alphabet = manifest.alphabet.build()?;
    let positives = read_fasta(&manifest.positives, &alphabet)?;
    let negatives = match &manifest.negatives {
        Some(path) => read_fasta(path, &alphabet)?,
        None => Vec::new(),
    };
    let shared_map = match &manifest.contacts {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| DataError::Io {
                path: path.clone(),
                source,
            })?;
            Some(ContactMap::from_text(&text)?)
        }
        None => None,
    };
    let full_map = match &manifest.full_contacts {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| DataError::Io {
                path: path.clone(),
                source,
            })?;
            Some(ContactSet::from_text(&text)?)
        }
        None => None,
    };
    let per_item_maps = match &manifest.per_item_contacts {
        Some(dir) => {
            let mut maps = BTreeMap::new();
            for rec in &positives {
                let path = dir.join(format!("{}.txt", sanitize_id(&rec.id)));
                if path.exists() {
                    let text = fs::read_to_string(&path).map_err(|source| DataError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    let map = ContactMap::from_text(&text)?;
                    let len = rec.seq.chars().count();
                    if map.length() != len {
                        return Err(DataError::LengthMismatch {
                            id: rec.id.clone(),
                            got: len,
                            expected: map.length(),
                        });
                    }
                    maps.insert(rec.id.clone(), map);
                }
            }
            (!maps.is_empty()).then_some(maps)
        }
        None => None,
    };

    let motif_length = manifest
        .length
        .or(shared_map.as_ref().map(|m| m.length()))
        .or(positives.first().map(|r| r.seq.chars().count()));

    if let Some(map) = &shared_map {
        if let Some(expected) = manifest.length {
            if map.length() != expected {
                return Err(DataError::Manifest(format!(
                    "contact map length {} does not match manifest length {expected}",
                    map.length()
                )));
            }
        }
        for rec in &positives {
            let len = rec.seq.chars().count();
            if len != map.length() {
                return Err(DataError::LengthMismatch {
                    id: rec.id.clone(),
                    got: len,
                    expected: map.length(),
                });
            }
        }
    } else if let Some(expected) = manifest.length {
        for rec in &positives {
            let len = rec.seq.chars().count();
            if len != expected {
                return Err(DataError::LengthMismatch {
                    id: rec.id.clone(),
                    got: len,
                    expected,
                });
            }
        }
    }

    Ok(Dataset {
        alphabet,
        positives,
        negatives,
        shared_map,
        full_map,
        per_item_maps,
        motif_length,
        notes: manifest.notes.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fasta_basic_record() {
        let a = Alphabet::protein();
        let recs = parse_fasta(
            ">2kj3:A260-280\nTTNSVETVVGKGESRVLIGNE\n",
            &a,
            Path::new("test.fasta"),
        )
        .unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].id, "2kj3:A260-280");
        assert_eq!(recs[0].seq.len(), 21);
    }

    #[test]
    fn fasta_empty_file() {
        let a = Alphabet::protein();
        assert!(parse_fasta("", &a, Path::new("x")).unwrap().is_empty());
    }

    #[test]
    fn fasta_multiline_and_lowercase() {
        let a = Alphabet::protein();
        let recs = parse_fasta(">s desc here\nacd\nefg\n", &a, Path::new("x")).unwrap();
        assert_eq!(recs[0].id, "s");
        assert_eq!(recs[0].seq, "ACDEFG");
    }

    #[test]
    fn fasta_rejects_bad_symbol_with_position() {
        let a = Alphabet::protein();
        let err = parse_fasta(">s\nACXDE\n", &a, Path::new("x")).unwrap_err();
        match err {
            DataError::BadSymbol { position, symbol, .. } => {
                assert_eq!(position, 3);
                assert_eq!(symbol, 'X');
            }
            other => panic!("expected BadSymbol, got {other:?}"),
        }
    }

    #[test]
    fn window_counts() {
        let rec = |n: usize| SeqRecord {
            id: "r".into(),
            seq: "A".repeat(n),
        };
        assert_eq!(cut_negatives(&[rec(100)], 27).len(), 3);
        assert_eq!(cut_negatives(&[rec(27)], 27).len(), 1);
        assert_eq!(cut_negatives(&[rec(20)], 27).len(), 0);
        // Sum of per-sequence floors.
        assert_eq!(cut_negatives(&[rec(100), rec(54), rec(26)], 27).len(), 3 + 2);
    }

    #[test]
    fn window_concatenation_is_source_prefix() {
        let rec = SeqRecord {
            id: "r".into(),
            seq: "ACDEFGHIKLMNPQRSTVWY".into(),
        };
        let windows = cut_negatives(&[rec.clone()], 6);
        let joined: String = windows.iter().map(|w| w.seq.as_str()).collect();
        assert!(rec.seq.starts_with(&joined));
        assert_eq!(joined.len(), 18);
    }

    #[test]
    fn overlapping_stride() {
        let rec = SeqRecord {
            id: "r".into(),
            seq: "ACDEFG".into(),
        };
        let windows = cut_negatives_stride(&[rec], 4, 1);
        assert_eq!(windows.len(), 3);
        assert_eq!(windows[0].seq, "ACDE");
        assert_eq!(windows[1].seq, "CDEF");
        assert_eq!(windows[1].id, "r:2-5");
    }

    #[test]
    fn manifest_resolves_relative_paths() {
        let m = Manifest::parse(
            "positives = pos.fasta\nnegatives = sub/neg.fasta\nlength = 21\n# comment\n",
            Path::new("/data/run1"),
        )
        .unwrap();
        assert_eq!(m.positives, PathBuf::from("/data/run1/pos.fasta"));
        assert_eq!(m.negatives, Some(PathBuf::from("/data/run1/sub/neg.fasta")));
        assert_eq!(m.length, Some(21));
        assert_eq!(m.alphabet, AlphabetChoice::Protein);
    }

    #[test]
    fn manifest_requires_positives() {
        assert!(matches!(
            Manifest::parse("negatives = x\n", Path::new(".")),
            Err(DataError::Manifest(_))
        ));
    }

    #[test]
    fn dataset_loading_checks_map_length() {
        let dir = tempfile::tempdir().unwrap();
        let pos = dir.path().join("pos.fasta");
        fs::write(&pos, ">a\nACDEFGHIKLMNPQRSTVWYA\n>b\nACDEFGHIKLMNPQRSTVWYC\n").unwrap();
        let contacts = dir.path().join("contacts.txt");
        fs::write(&contacts, "length: 21\n3 18\n5 16\n17 21\n").unwrap();
        let manifest_path = dir.path().join("manifest.txt");
        fs::write(
            &manifest_path,
            "positives = pos.fasta\ncontacts = contacts.txt\nlength = 21\n",
        )
        .unwrap();
        // (17,21) crosses (3,18); the contact file itself must fail.
        let err = load_dataset(&Manifest::from_file(&manifest_path).unwrap());
        assert!(err.is_err());

        fs::write(&contacts, "length: 21\n3 18\n5 16\n").unwrap();
        let ds = load_dataset(&Manifest::from_file(&manifest_path).unwrap()).unwrap();
        assert_eq!(ds.positives.len(), 2);
        assert_eq!(ds.shared_map.as_ref().unwrap().pair_count(), 2);
        assert_eq!(ds.motif_length, Some(21));

        // Out-of-range pair against the motif length.
        fs::write(&contacts, "length: 27\n5 30\n").unwrap();
        let err = load_dataset(&Manifest::from_file(&manifest_path).unwrap());
        assert!(err.is_err());
    }

    #[test]
    fn dataset_round_trip_preserves_fields() {
        use crate::contacts::ContactSet;

        let dir = tempfile::tempdir().unwrap();
        let alphabet = Alphabet::from_symbols_str("ab").unwrap();
        let mut per_item = BTreeMap::new();
        per_item.insert(
            "p:2".to_string(),
            crate::contacts::ContactMap::new(6, vec![(2, 5)]).unwrap(),
        );
        let ds = Dataset {
            alphabet,
            positives: vec![
                SeqRecord { id: "p1".into(), seq: "abbaba".into() },
                SeqRecord { id: "p:2".into(), seq: "bbabab".into() },
            ],
            negatives: vec![SeqRecord { id: "n1".into(), seq: "aaabab".into() }],
            shared_map: Some(crate::contacts::ContactMap::new(6, vec![(1, 6)]).unwrap()),
            full_map: Some(ContactSet::new(6, vec![(1, 6), (2, 5), (1, 5)]).unwrap()),
            per_item_maps: Some(per_item),
            motif_length: Some(6),
            notes: Some("toy".into()),
        };
        let manifest = ds.write_to_dir(dir.path()).unwrap();
        let loaded = load_dataset(&manifest).unwrap();
        assert_eq!(loaded.positives, ds.positives);
        assert_eq!(loaded.negatives, ds.negatives);
        assert_eq!(loaded.shared_map, ds.shared_map);
        assert_eq!(loaded.full_map, ds.full_map);
        assert_eq!(loaded.per_item_maps, ds.per_item_maps);
        assert_eq!(loaded.motif_length, ds.motif_length);
        assert_eq!(loaded.notes, ds.notes);
        // The per-item map overrides the shared one for its sequence.
        assert_eq!(loaded.map_for(1).unwrap().pairs(), &[(2, 5)]);
        assert_eq!(loaded.map_for(0).unwrap().pairs(), &[(1, 6)]);
    }

    #[test]
    fn dataset_length_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let pos = dir.path().join("pos.fasta");
        fs::write(&pos, ">a\nACDE\n>b\nACDEF\n").unwrap();
        let contacts = dir.path().join("c.txt");
        fs::write(&contacts, "length: 4\n1 4\n").unwrap();
        let manifest_path = dir.path().join("m.txt");
        fs::write(&manifest_path, "positives = pos.fasta\ncontacts = c.txt\n").unwrap();
        let err = load_dataset(&Manifest::from_file(&manifest_path).unwrap()).unwrap_err();
        assert!(matches!(err, DataError::LengthMismatch { .. }));
    }
}
