#![allow(dead_code)]

//! Shared fixtures for the integration and acceptance suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcfg_contacts::contacts::{validate_pairs, ContactMap};
use pcfg_contacts::dataio::{cut_negatives, Dataset, SeqRecord};
use pcfg_contacts::grammar::{Alphabet, Grammar, TermId};

pub fn g1() -> Grammar {
    Grammar::from_text(
        "alphabet: a b\n\
         vt: T\n\
         vn: S\n\
         start: S\n\
         lexical T -> a : 0.6\n\
         lexical T -> b : 0.4\n\
         branching S -> T T : 0.7\n\
         branching S -> S T : 0.3\n",
    )
    .unwrap()
}

pub fn g2() -> Grammar {
    Grammar::from_text(
        "alphabet: a b\n\
         vt: T\n\
         vn: S\n\
         start: S\n\
         lexical T -> a : 0.6\n\
         lexical T -> b : 0.4\n\
         branching S -> T T : 0.5\n\
         branching S -> S T : 0.2\n\
         contact S -> T S T : 0.3\n",
    )
    .unwrap()
}

/// Full grammar over a 2-letter alphabet with random rule weights.
pub fn random_grammar(seed: u64, n_vt: usize, n_vn: usize, with_contacts: bool) -> Grammar {
    let base = Grammar::full(
        Alphabet::from_symbols_str("ab").unwrap(),
        n_vt,
        n_vn,
        with_contacts,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..base.rules().len())
        .map(|_| rng.random::<f64>() + 1e-3)
        .collect();
    base.with_weights(&weights).unwrap()
}

/// All sequences of the given length over the first `k` terminals.
pub fn all_sequences(k: usize, n: usize) -> Vec<Vec<TermId>> {
    let mut out = Vec::with_capacity(k.pow(n as u32));
    let mut current = vec![TermId(0); n];
    loop {
        out.push(current.clone());
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            if current[pos].0 + 1 < k {
                current[pos] = TermId(current[pos].0 + 1);
                break;
            }
            current[pos] = TermId(0);
            pos += 1;
        }
    }
}

/// Every CF-compatible non-empty map over sequences of length `n` with at
/// most `max_pairs` pairs, by subset enumeration of the candidate pairs.
pub fn valid_maps(n: usize, max_pairs: usize) -> Vec<ContactMap> {
    let mut candidates = Vec::new();
    for i in 1..=n {
        for j in (i + 3)..=n {
            candidates.push((i, j));
        }
    }
    let mut maps = Vec::new();
    for mask in 1u32..(1 << candidates.len()) {
        if (mask.count_ones() as usize) > max_pairs {
            continue;
        }
        let pairs: Vec<(usize, usize)> = candidates
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        if validate_pairs(n, &pairs).is_empty() {
            maps.push(ContactMap::new(n, pairs).unwrap());
        }
    }
    maps
}

pub const SYNTH_LEN: usize = 12;
pub const SYNTH_PAIRS: [(usize, usize); 2] = [(1, 12), (4, 9)];

/// Length-12 positives whose contact-pair endpoints are correlated (both
/// letters drawn from the same biased coin per pair) while every other
/// position is uniform, so unigram composition carries no signal; negatives
/// are windows cut from long uniform sequences.
pub struct SyntheticData {
    pub alphabet: Alphabet,
    pub map: ContactMap,
    pub positives: Vec<SeqRecord>,
    pub negatives: Vec<SeqRecord>,
}

pub fn synthetic_data(n_pos: usize, n_neg: usize, seed: u64) -> SyntheticData {
    synthetic_data_with_contrast(n_pos, n_neg, seed, 0.85)
}

pub fn synthetic_data_with_contrast(
    n_pos: usize,
    n_neg: usize,
    seed: u64,
    contrast: f64,
) -> SyntheticData {
    let alphabet = Alphabet::from_symbols_str("ab").unwrap();
    let map = ContactMap::new(SYNTH_LEN, SYNTH_PAIRS.to_vec()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut positives = Vec::with_capacity(n_pos);
    for idx in 0..n_pos {
        let mut chars = vec!['?'; SYNTH_LEN];
        for &(i, j) in &SYNTH_PAIRS {
            let p_a = if rng.random::<bool>() { contrast } else { 1.0 - contrast };
            chars[i - 1] = if rng.random::<f64>() < p_a { 'a' } else { 'b' };
            chars[j - 1] = if rng.random::<f64>() < p_a { 'a' } else { 'b' };
        }
        for c in chars.iter_mut() {
            if *c == '?' {
                *c = if rng.random::<bool>() { 'a' } else { 'b' };
            }
        }
        positives.push(SeqRecord {
            id: format!("pos{idx}"),
            seq: chars.into_iter().collect(),
        });
    }

    let mut long = Vec::new();
    let mut produced = 0usize;
    let mut idx = 0usize;
    while produced * SYNTH_LEN < n_neg * SYNTH_LEN {
        let len = SYNTH_LEN * 10;
        let seq: String = (0..len)
            .map(|_| if rng.random::<bool>() { 'a' } else { 'b' })
            .collect();
        long.push(SeqRecord {
            id: format!("neg_src{idx}"),
            seq,
        });
        produced += 10;
        idx += 1;
    }
    let mut negatives = cut_negatives(&long, SYNTH_LEN);
    negatives.truncate(n_neg);

    SyntheticData {
        alphabet,
        map,
        positives,
        negatives,
    }
}

impl SyntheticData {
    pub fn dataset(&self, with_map: bool) -> Dataset {
        Dataset {
            alphabet: self.alphabet.clone(),
            positives: self.positives.clone(),
            negatives: self.negatives.clone(),
            shared_map: with_map.then(|| self.map.clone()),
            full_map: None,
            per_item_maps: None,
            motif_length: Some(SYNTH_LEN),
            notes: None,
        }
    }
}
