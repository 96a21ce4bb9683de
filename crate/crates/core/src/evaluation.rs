//! Discriminative and descriptive performance measurement: log-odds scoring
//! against a unigram null model, recall-precision curves and average
//! precision, contact prediction from Viterbi trees, and the k-fold
//! cross-validation harness (k-2 folds train, one validates for checkpoint
//! selection, one tests).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::contacts::{leaf_distance_reports, ContactMap, ContactSet, MIN_SEPARATION};
use crate::dataio::Dataset;
use crate::estimation::EstimatorKind;
use crate::grammar::{Alphabet, Grammar, TermId};
use crate::learner::{train, LearnerConfig, LearnerError};
use crate::parser::{self, ParseTree, ParserError};

/// Swiss-Prot-style background frequencies (percent) shipped as editable
/// defaults; any other background can be loaded from a frequency file.
const PROTEIN_BACKGROUND: [(char, f64); 20] = [
    ('A', 8.25),
    ('C', 1.37),
    ('D', 5.45),
    ('E', 6.75),
    ('F', 3.86),
    ('G', 7.07),
    ('H', 2.27),
    ('I', 5.96),
    ('K', 5.84),
    ('L', 9.66),
    ('M', 2.42),
    ('N', 4.06),
    ('P', 4.74),
    ('Q', 3.93),
    ('R', 5.53),
    ('S', 6.56),
    ('T', 5.34),
    ('V', 6.87),
    ('W', 1.08),
    ('Y', 2.92),
];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Parser(#[from] ParserError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("null model: {0}")]
    NullModel(String),
    #[error("average precision needs at least one positive and one negative")]
    DegenerateLabels,
    #[error("descriptive metrics need a non-empty reference map")]
    EmptyReference,
    #[error("cross-validation: {0}")]
    CrossValidation(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Unigram background over the alphabet; frequencies are normalized on
/// construction and strictly positive.
#[derive(Debug, Clone)]
pub struct NullModel {
    alphabet: Alphabet,
    freq: Vec<f64>,
    log_freq: Vec<f64>,
}

impl NullModel {
    pub fn new(alphabet: Alphabet, frequencies: Vec<f64>) -> Result<Self, EvalError> {
        if frequencies.len() != alphabet.len() {
            return Err(EvalError::NullModel(format!(
                "{} frequencies for an alphabet of {} symbols",
                frequencies.len(),
                alphabet.len()
            )));
        }
        if let Some(bad) = frequencies.iter().find(|&&f| !(f > 0.0) || !f.is_finite()) {
            return Err(EvalError::NullModel(format!(
                "frequencies must be positive and finite, got {bad}"
            )));
        }
        let sum: f64 = frequencies.iter().sum();
        let freq: Vec<f64> = frequencies.iter().map(|f| f / sum).collect();
        let log_freq = freq.iter().map(|f| f.ln()).collect();
        Ok(NullModel {
            alphabet,
            freq,
            log_freq,
        })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        NullModel::new(alphabet, vec![1.0 / n as f64; n]).expect("uniform is valid")
    }

    /// Average amino-acid composition defaults for the protein alphabet.
    pub fn protein_default() -> Self {
        let alphabet = Alphabet::protein();
        let freqs = alphabet
            .symbols()
            .iter()
            .map(|c| {
                PROTEIN_BACKGROUND
                    .iter()
                    .find(|(s, _)| s == c)
                    .expect("background covers the alphabet")
                    .1
            })
            .collect();
        NullModel::new(alphabet, freqs).expect("builtin background is valid")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn frequency(&self, t: TermId) -> f64 {
        self.freq[t.0]
    }

    /// `sum_i log f(x_i)`.
    pub fn log_score(&self, x: &[TermId]) -> f64 {
        x.iter().map(|&t| self.log_freq[t.0]).sum()
    }

    /// One `symbol frequency` pair per line; `#` comments allowed. Every
    /// alphabet symbol must be covered exactly once.
    pub fn from_text(alphabet: Alphabet, text: &str) -> Result<Self, EvalError> {
        let mut freqs: Vec<Option<f64>> = vec![None; alphabet.len()];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |reason: String| EvalError::Parse { line, reason };
            let mut it = content.split_whitespace();
            let sym = it.next().unwrap();
            let val = it
                .next()
                .ok_or_else(|| err("expected 'symbol frequency'".into()))?;
            if it.next().is_some() {
                return Err(err("trailing tokens".into()));
            }
            if sym.chars().count() != 1 {
                return Err(err(format!("'{sym}' is not a single symbol")));
            }
            let c = sym.chars().next().unwrap();
            let t = alphabet
                .term(c)
                .ok_or_else(|| err(format!("symbol '{c}' not in alphabet")))?;
            let f: f64 = val
                .parse()
                .map_err(|_| err(format!("bad frequency '{val}'")))?;
            if freqs[t.0].replace(f).is_some() {
                return Err(err(format!("duplicate symbol '{c}'")));
            }
        }
        let mut out = Vec::with_capacity(alphabet.len());
        for (i, f) in freqs.iter().enumerate() {
            match f {
                Some(v) => out.push(*v),
                None => {
                    return Err(EvalError::NullModel(format!(
                        "no frequency for symbol '{}'",
                        alphabet.symbol(TermId(i))
                    )))
                }
            }
        }
        NullModel::new(alphabet, out)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, f) in self.freq.iter().enumerate() {
            out.push_str(&format!("{} {}\n", self.alphabet.symbol(TermId(i)), f));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredItem {
    pub id: String,
    pub label: Label,
    pub score: f64,
}

/// Log-odds of the sequence under the grammar against the unigram null.
/// With a map, the numerator is the map-constrained probability; the null
/// never sees the contacts. Zero grammar mass gives `-inf`.
pub fn score(
    grammar: &Grammar,
    x: &[TermId],
    map: Option<&ContactMap>,
    null: &NullModel,
) -> Result<f64, EvalError> {
    let p = match map {
        Some(m) if !m.is_empty() => parser::inside_constrained(grammar, x, m)?,
        _ => parser::inside(grammar, x)?,
    };
    Ok(p.ln() - null.log_score(x))
}

fn ranked(items: &[ScoredItem]) -> Vec<&ScoredItem> {
    let mut sorted: Vec<&ScoredItem> = items.iter().collect();
    // Descending score; on ties negatives first (pessimistic).
    sorted.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| match (a.label, b.label) {
                (Label::Negative, Label::Positive) => std::cmp::Ordering::Less,
                (Label::Positive, Label::Negative) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
    });
    sorted
}

/// Step-wise (non-interpolated) average precision with pessimistic tie
/// handling.
pub fn average_precision(items: &[ScoredItem]) -> Result<f64, EvalError> {
    let n_pos = items.iter().filter(|i| i.label == Label::Positive).count();
    let n_neg = items.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::DegenerateLabels);
    }
    let mut ap = 0.0;
    let mut pos_seen = 0usize;
    for (rank0, item) in ranked(items).iter().enumerate() {
        if item.label == Label::Positive {
            pos_seen += 1;
            ap += pos_seen as f64 / (rank0 + 1) as f64 / n_pos as f64;
        }
    }
    Ok(ap)
}

/// `(recall, precision)` after each rank of the pessimistically ranked
/// list, ready for plotting.
pub fn rpc_points(items: &[ScoredItem]) -> Result<Vec<(f64, f64)>, EvalError> {
    let n_pos = items.iter().filter(|i| i.label == Label::Positive).count();
    if n_pos == 0 || n_pos == items.len() {
        return Err(EvalError::DegenerateLabels);
    }
    let mut out = Vec::with_capacity(items.len());
    let mut pos_seen = 0usize;
    for (rank0, item) in ranked(items).iter().enumerate() {
        if item.label == Label::Positive {
            pos_seen += 1;
        }
        out.push((
            pos_seen as f64 / n_pos as f64,
            pos_seen as f64 / (rank0 + 1) as f64,
        ));
    }
    Ok(out)
}

/// All leaf pairs with separation >= 3 whose tree distance is within
/// `delta`. Pass `usize::MAX` for the unbounded variant.
pub fn predict_contacts(tree: &ParseTree, delta: usize) -> Vec<(usize, usize)> {
    leaf_distance_reports(tree, MIN_SEPARATION)
        .into_iter()
        .filter(|r| r.distance <= delta)
        .map(|r| r.pair)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptiveMetrics {
    /// Mean fraction of training-map pairs realized within distance 4,
    /// over all trees.
    pub recall_at_4: f64,
    /// Mean fraction of predicted pairs present in the reference set, over
    /// trees with a non-empty prediction; `None` when no tree predicted
    /// anything or no reference set was given.
    pub precision_at_4: Option<f64>,
    /// Trees whose prediction set was empty (excluded from the precision
    /// average).
    pub empty_predictions: usize,
    /// Mean over trees of the average precision of ranking all
    /// separation-3+ pairs by increasing tree distance against the
    /// reference set; `None` without a reference set.
    pub ap_over_delta: Option<f64>,
}

/// Contact-recovery quality of a batch of (Viterbi) trees, measured against
/// the training map (recall) and the full reference set (precision, AP over
/// distance thresholds).
pub fn descriptive_metrics(
    trees: &[ParseTree],
    training_map: &ContactMap,
    full_map: Option<&ContactSet>,
    delta: usize,
) -> Result<DescriptiveMetrics, EvalError> {
    if training_map.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    if let Some(full) = full_map {
        if full.pair_count() == 0 {
            return Err(EvalError::EmptyReference);
        }
    }
    if trees.is_empty() {
        return Err(EvalError::CrossValidation("no trees to evaluate".into()));
    }

    let mut recall_sum = 0.0;
    let mut precision_sum = 0.0;
    let mut precision_count = 0usize;
    let mut empty_predictions = 0usize;
    let mut ap_sum = 0.0;
    let mut ap_count = 0usize;

    for tree in trees {
        let predicted = predict_contacts(tree, delta);
        let hits = predicted
            .iter()
            .filter(|p| training_map.contains(**p))
            .count();
        recall_sum += hits as f64 / training_map.pair_count() as f64;

        if let Some(full) = full_map {
            if predicted.is_empty() {
                empty_predictions += 1;
            } else {
                let correct = predicted.iter().filter(|p| full.contains(**p)).count();
                precision_sum += correct as f64 / predicted.len() as f64;
                precision_count += 1;
            }
            // Rank every separation-3+ pair by tree distance.
            let items: Vec<ScoredItem> = leaf_distance_reports(tree, MIN_SEPARATION)
                .into_iter()
                .map(|r| ScoredItem {
                    id: format!("{}-{}", r.pair.0, r.pair.1),
                    label: if full.contains(r.pair) {
                        Label::Positive
                    } else {
                        Label::Negative
                    },
                    score: -(r.distance as f64),
                })
                .collect();
            // A reference covering none or all of the candidate pairs
            // leaves no ranking to judge; skip such trees like the
            // empty-prediction case above.
            let n_ref = items.iter().filter(|i| i.label == Label::Positive).count();
            if n_ref > 0 && n_ref < items.len() {
                ap_sum += average_precision(&items)?;
                ap_count += 1;
            }
        } else if predicted.is_empty() {
            empty_predictions += 1;
        }
    }

    Ok(DescriptiveMetrics {
        recall_at_4: recall_sum / trees.len() as f64,
        precision_at_4: (precision_count > 0).then(|| precision_sum / precision_count as f64),
        empty_predictions,
        ap_over_delta: (ap_count > 0).then(|| ap_sum / ap_count as f64),
    })
}

/// Assignment of positive items to `k` folds; round `r` tests on fold `r`,
/// validates on fold `(r+1) % k` and trains on the rest.
#[derive(Debug, Clone, Serialize)]
pub struct FoldPlan {
    pub k: usize,
    /// `assignment[i]` is the fold of positive item `i`.
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FoldRound {
    pub round: usize,
    pub test_fold: usize,
    pub validation_fold: usize,
}

impl FoldPlan {
    pub fn new(n_items: usize, k: usize, seed: u64) -> Result<Self, EvalError> {
        if k < 3 {
            return Err(EvalError::CrossValidation(format!(
                "k must be at least 3, got {k}"
            )));
        }
        if n_items < k {
            return Err(EvalError::CrossValidation(format!(
                "{n_items} positives cannot fill {k} folds"
            )));
        }
        let mut indices: Vec<usize> = (0..n_items).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        let mut assignment = vec![0usize; n_items];
        for (pos, &item) in indices.iter().enumerate() {
            assignment[item] = pos % k;
        }
        Ok(FoldPlan { k, assignment })
    }

    pub fn fold_items(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn rounds(&self) -> Vec<FoldRound> {
        (0..self.k)
            .map(|r| FoldRound {
                round: r,
                test_fold: r,
                validation_fold: (r + 1) % self.k,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CvConfig {
    pub k: usize,
    /// Score test and validation items against the shared contact map
    /// (the constrained test sample) rather than sequences alone.
    pub score_with_map: bool,
    /// Leaf-distance threshold for descriptive metrics.
    pub delta: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 3,
            score_with_map: false,
            delta: crate::contacts::DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub test_fold: usize,
    pub validation_fold: usize,
    pub selected_generation: usize,
    pub validation_ap: f64,
    pub ap: f64,
    pub descriptive: Option<DescriptiveMetrics>,
    /// Test positives with no (consistent) parse under the selected
    /// grammar; they score `-inf` and produce no tree.
    pub no_parse: usize,
    pub test_ids: Vec<String>,
    #[serde(skip)]
    pub rpc: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub ap: f64,
    pub recall_at_4: Option<f64>,
    pub precision_at_4: Option<f64>,
    pub ap_over_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub k: usize,
    pub estimator: EstimatorKind,
    pub score_with_map: bool,
    pub folds: FoldPlan,
    pub rounds: Vec<RoundReport>,
    pub aggregate: Aggregate,
}

fn mean_of<I: Iterator<Item = f64>>(iter: I) -> Option<f64> {
    let values: Vec<f64> = iter.collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4B009);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn score_records(
    grammar: &Grammar,
    records: &[(String, Label, Option<ContactMap>)],
    null: &NullModel,
    seqs: &[Vec<TermId>],
) -> Result<Vec<ScoredItem>, EvalError> {
    records
        .par_iter()
        .zip(seqs.par_iter())
        .map(|((id, label, map), seq)| {
            let s = score(grammar, seq, map.as_ref(), null)?;
            Ok(ScoredItem {
                id: id.clone(),
                label: *label,
                score: s,
            })
        })
        .collect()
}

/// Score a fixed grammar on a dataset's positives and negatives; returns
/// the ranked items, the AP, and descriptive metrics when a training map
/// is available.
pub struct GrammarEvaluation {
    pub items: Vec<ScoredItem>,
    pub ap: f64,
    pub rpc: Vec<(f64, f64)>,
    pub descriptive: Option<DescriptiveMetrics>,
    pub no_parse: usize,
}

pub fn evaluate_grammar(
    dataset: &Dataset,
    grammar: &Grammar,
    null: &NullModel,
    score_with_map: bool,
    delta: usize,
) -> Result<GrammarEvaluation, EvalError> {
    if dataset.negatives.is_empty() || dataset.positives.is_empty() {
        return Err(EvalError::CrossValidation(
            "scoring needs both positives and negatives".into(),
        ));
    }
    let mut records = Vec::new();
    let mut seqs = Vec::new();
    for (i, rec) in dataset.positives.iter().enumerate() {
        let map = score_with_map
            .then(|| dataset.map_for(i).cloned())
            .flatten();
        records.push((rec.id.clone(), Label::Positive, map));
        seqs.push(dataset.alphabet.encode(&rec.seq).map_err(LearnerError::from)?);
    }
    for rec in &dataset.negatives {
        let map = score_with_map
            .then(|| dataset.shared_map.clone())
            .flatten();
        records.push((rec.id.clone(), Label::Negative, map));
        seqs.push(dataset.alphabet.encode(&rec.seq).map_err(LearnerError::from)?);
    }
    let items = score_records(grammar, &records, null, &seqs)?;
    let ap = average_precision(&items)?;
    let rpc = rpc_points(&items)?;

    let (descriptive, no_parse) = match &dataset.shared_map {
        Some(map) if !map.is_empty() => {
            let mut trees = Vec::new();
            let mut no_parse = 0usize;
            for rec in &dataset.positives {
                let seq = dataset.alphabet.encode(&rec.seq).map_err(LearnerError::from)?;
                match parser::viterbi(grammar, &seq)? {
                    Some(v) => trees.push(v.tree),
                    None => no_parse += 1,
                }
            }
            if trees.is_empty() {
                (None, no_parse)
            } else {
                (
                    Some(descriptive_metrics(
                        &trees,
                        map,
                        dataset.full_map.as_ref(),
                        delta,
                    )?),
                    no_parse,
                )
            }
        }
        _ => (None, 0),
    };

    Ok(GrammarEvaluation {
        items,
        ap,
        rpc,
        descriptive,
        no_parse,
    })
}

/// The k-fold scheme: per round, train on k-2 folds, pick the checkpoint
/// with the best validation-fold AP, and report test-fold metrics with the
/// selected grammar. Negatives are never trained on; they enter only the
/// validation and test scoring.
pub fn cross_validate(
    dataset: &Dataset,
    base: &Grammar,
    learner_config: &LearnerConfig,
    null: &NullModel,
    cv: &CvConfig,
) -> Result<CvReport, EvalError> {
    if dataset.negatives.is_empty() {
        return Err(EvalError::CrossValidation(
            "cross-validation needs a negative set for AP".into(),
        ));
    }
    let folds = FoldPlan::new(dataset.positives.len(), cv.k, learner_config.seed)?;
    let mut rounds = Vec::with_capacity(cv.k);

    for plan in folds.rounds() {
        let test_items = folds.fold_items(plan.test_fold);
        let validation_items = folds.fold_items(plan.validation_fold);
        let train_items: Vec<usize> = (0..dataset.positives.len())
            .filter(|i| {
                folds.assignment[*i] != plan.test_fold
                    && folds.assignment[*i] != plan.validation_fold
            })
            .collect();
        if test_items.is_empty() || validation_items.is_empty() || train_items.is_empty() {
            return Err(EvalError::CrossValidation(format!(
                "round {} has an empty fold",
                plan.round
            )));
        }

        let train_set = dataset.subset_positives(&train_items);
        let mut round_config = learner_config.clone();
        round_config.seed = splitmix64(learner_config.seed ^ (plan.round as u64));
        let result = train(&train_set, base, &round_config)?;

        // Checkpoint selection by validation AP; earliest generation wins
        // ties so reruns are stable.
        let validation_set = dataset.subset_positives(&validation_items);
        let mut selected: Option<(usize, f64, &Grammar)> = None;
        for cp in &result.checkpoints {
            let eval =
                evaluate_grammar(&validation_set, &cp.grammar, null, cv.score_with_map, cv.delta)?;
            let better = match selected {
                None => true,
                Some((_, best_ap, _)) => eval.ap > best_ap,
            };
            if better {
                selected = Some((cp.generation, eval.ap, &cp.grammar));
            }
        }
        let (selected_generation, validation_ap, grammar) =
            selected.expect("train always returns at least one checkpoint");

        let test_set = dataset.subset_positives(&test_items);
        let eval = evaluate_grammar(&test_set, grammar, null, cv.score_with_map, cv.delta)?;

        rounds.push(RoundReport {
            round: plan.round,
            test_fold: plan.test_fold,
            validation_fold: plan.validation_fold,
            selected_generation,
            validation_ap,
            ap: eval.ap,
            descriptive: eval.descriptive,
            no_parse: eval.no_parse,
            test_ids: test_items
                .iter()
                .map(|&i| dataset.positives[i].id.clone())
                .collect(),
            rpc: eval.rpc,
        });
    }

    let aggregate = Aggregate {
        ap: mean_of(rounds.iter().map(|r| r.ap)).unwrap_or(f64::NAN),
        recall_at_4: mean_of(
            rounds
                .iter()
                .filter_map(|r| r.descriptive.as_ref().map(|d| d.recall_at_4)),
        ),
        precision_at_4: mean_of(
            rounds
                .iter()
                .filter_map(|r| r.descriptive.as_ref().and_then(|d| d.precision_at_4)),
        ),
        ap_over_delta: mean_of(
            rounds
                .iter()
                .filter_map(|r| r.descriptive.as_ref().and_then(|d| d.ap_over_delta)),
        ),
    };

    Ok(CvReport {
        k: cv.k,
        estimator: learner_config.estimator,
        score_with_map: cv.score_with_map,
        folds,
        rounds,
        aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contacts::ContactMap;
    use crate::grammar::Grammar;

    fn g1() -> Grammar {
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

    fn g2() -> Grammar {
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

    fn items(pairs: &[(Label, f64)]) -> Vec<ScoredItem> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, (label, score))| ScoredItem {
                id: format!("i{i}"),
                label: *label,
                score: *score,
            })
            .collect()
    }

    use Label::{Negative as N, Positive as P};

    #[test]
    fn score_fixture() {
        let g = g1();
        let null = NullModel::uniform(Alphabet::from_symbols_str("ab").unwrap());
        let x = g.encode("ab").unwrap();
        let s = score(&g, &x, None, &null).unwrap();
        assert!((s - 0.672f64.ln()).abs() < 1e-12, "s = {s}");
    }

    #[test]
    fn score_zero_mass_is_neg_infinity() {
        let g = g1(); // no contact rules
        let null = NullModel::uniform(Alphabet::from_symbols_str("ab").unwrap());
        let x = g.encode("abba").unwrap();
        let map = ContactMap::new(4, vec![(1, 4)]).unwrap();
        let s = score(&g, &x, Some(&map), &null).unwrap();
        assert_eq!(s, f64::NEG_INFINITY);
    }

    #[test]
    fn ap_hand_fixture() {
        let v = average_precision(&items(&[(P, 0.9), (N, 0.8), (P, 0.7)])).unwrap();
        assert!((v - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn ap_perfect_ranking_is_one() {
        let v = average_precision(&items(&[(P, 3.0), (P, 2.0), (N, 1.0), (N, 0.5)])).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn ap_interleaved_by_hand() {
        // Ranking: N P N P -> AP = 0.5*(1/2) + 0.5*(2/4) = 0.5
        let v = average_precision(&items(&[(N, 4.0), (P, 3.0), (N, 2.0), (P, 1.0)])).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ap_ties_are_pessimistic() {
        // Same score everywhere: negatives rank first.
        // Ranking: N N P P -> AP = 0.5*(1/3) + 0.5*(2/4) = 1/6 + 1/4
        let v = average_precision(&items(&[(P, 1.0), (N, 1.0), (P, 1.0), (N, 1.0)])).unwrap();
        assert!((v - (1.0 / 6.0 + 0.25)).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn ap_rejects_degenerate_labels() {
        assert!(average_precision(&items(&[(P, 1.0)])).is_err());
        assert!(average_precision(&items(&[(N, 1.0), (N, 0.2)])).is_err());
    }

    #[test]
    fn ap_invariant_under_monotone_transforms_and_shift() {
        let base = items(&[
            (P, 0.9),
            (N, 0.8),
            (P, 0.7),
            (N, 0.3),
            (P, 0.25),
            (N, 0.1),
            (N, 0.05),
        ]);
        let ap = average_precision(&base).unwrap();
        for transform in [
            |s: f64| 2.0 * s + 3.0,
            |s: f64| s * s * s,
            |s: f64| s + 100.0,
        ] {
            let mapped: Vec<ScoredItem> = base
                .iter()
                .map(|i| ScoredItem {
                    id: i.id.clone(),
                    label: i.label,
                    score: transform(i.score),
                })
                .collect();
            let v = average_precision(&mapped).unwrap();
            assert!((v - ap).abs() < 1e-12);
        }
    }

    #[test]
    fn rpc_points_trace_the_curve() {
        let pts = rpc_points(&items(&[(P, 0.9), (N, 0.8), (P, 0.7)])).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0], (0.5, 1.0));
        assert_eq!(pts[1], (0.5, 0.5));
        assert_eq!(pts[2], (1.0, 2.0 / 3.0));
    }

    #[test]
    fn predict_contacts_on_contact_tree() {
        let g = g2();
        let t = ParseTree::from_bracketed("(S (T a) (S (T b) (T b)) (T a))", &g).unwrap();
        assert_eq!(predict_contacts(&t, 4), vec![(1, 4)]);
        let branching = ParseTree::from_bracketed("(S (S (S (T a) (T b)) (T b)) (T a))", &g).unwrap();
        assert!(predict_contacts(&branching, 4).is_empty());
        // Unbounded threshold keeps every separation-3+ pair.
        assert_eq!(predict_contacts(&t, usize::MAX), vec![(1, 4)]);
        let longer =
            ParseTree::from_bracketed("(S (S (S (S (T a) (T b)) (T b)) (T a)) (T a))", &g).unwrap();
        assert_eq!(
            predict_contacts(&longer, usize::MAX),
            vec![(1, 4), (1, 5), (2, 5)]
        );
    }

    #[test]
    fn descriptive_metrics_exact_recovery() {
        let g = g2();
        let t = ParseTree::from_bracketed("(S (T a) (S (T b) (T b)) (T a))", &g).unwrap();
        let training = ContactMap::new(4, vec![(1, 4)]).unwrap();
        let full = ContactSet::new(4, vec![(1, 4)]).unwrap();
        let m = descriptive_metrics(&[t], &training, Some(&full), 4).unwrap();
        assert_eq!(m.recall_at_4, 1.0);
        assert_eq!(m.precision_at_4, Some(1.0));
        assert_eq!(m.empty_predictions, 0);
    }

    #[test]
    fn descriptive_ap_over_delta_hand_fixture() {
        // One tree over 8 leaves; reference has 3 pairs, one of which is
        // realized at distance 4. Compare against a hand-computed AP.
        let g = g2();
        let text = "(S (T a) (S (S (S (S (S (T b) (T b)) (T b)) (T b)) (T b)) (T b)) (T a))";
        let tree = ParseTree::from_bracketed(text, &g).unwrap();
        let training = ContactMap::new(8, vec![(1, 8)]).unwrap();
        let full = ContactSet::new(8, vec![(1, 8), (2, 5), (3, 7)]).unwrap();
        let m = descriptive_metrics(&[tree.clone()], &training, Some(&full), 4).unwrap();
        assert_eq!(m.recall_at_4, 1.0);
        assert_eq!(m.precision_at_4, Some(1.0));

        // Hand computation over the 15 separation-3+ pairs: (1,8) sits at
        // distance 4 (rank 1), (2,5) at distance 6 behind (1,7) and the
        // tied negative (1,6) (rank 4), (3,7) at distance 8 behind every
        // shorter pair and its three tied negatives (rank 13), giving a
        // step-wise AP of (1/1 + 2/4 + 3/13) / 3 = 15/26.
        let expected = 15.0 / 26.0;
        assert!(
            (m.ap_over_delta.unwrap() - expected).abs() < 1e-12,
            "ap_over_delta = {:?}",
            m.ap_over_delta
        );
    }

    #[test]
    fn descriptive_metrics_skip_empty_predictions() {
        let g = g2();
        let contact = ParseTree::from_bracketed("(S (T a) (S (T b) (T b)) (T a))", &g).unwrap();
        let branching =
            ParseTree::from_bracketed("(S (S (S (T a) (T b)) (T b)) (T a))", &g).unwrap();
        let training = ContactMap::new(4, vec![(1, 4)]).unwrap();
        let full = ContactSet::new(4, vec![(1, 4)]).unwrap();
        let m =
            descriptive_metrics(&[contact, branching], &training, Some(&full), 4).unwrap();
        assert_eq!(m.recall_at_4, 0.5);
        assert_eq!(m.precision_at_4, Some(1.0));
        assert_eq!(m.empty_predictions, 1);
    }

    #[test]
    fn null_model_normalizes_and_round_trips() {
        let a = Alphabet::from_symbols_str("ab").unwrap();
        let n = NullModel::new(a.clone(), vec![3.0, 1.0]).unwrap();
        assert!((n.frequency(TermId(0)) - 0.75).abs() < 1e-15);
        let parsed = NullModel::from_text(a, &n.to_text()).unwrap();
        assert_eq!(parsed.freq, n.freq);
        assert!(NullModel::new(Alphabet::from_symbols_str("ab").unwrap(), vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn protein_default_covers_alphabet() {
        let n = NullModel::protein_default();
        let total: f64 = (0..20).map(|i| n.frequency(TermId(i))).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(n.frequency(n.alphabet().term('L').unwrap()) > n.frequency(n.alphabet().term('W').unwrap()));
    }

    #[test]
    fn fold_plan_covers_and_balances() {
        let plan = FoldPlan::new(9, 3, 42).unwrap();
        let mut seen = vec![false; 9];
        for fold in 0..3 {
            let items = plan.fold_items(fold);
            assert_eq!(items.len(), 3);
            for i in items {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // Deterministic under the same seed.
        assert_eq!(plan.assignment, FoldPlan::new(9, 3, 42).unwrap().assignment);
        assert!(FoldPlan::new(9, 2, 0).is_err());
        assert!(FoldPlan::new(2, 3, 0).is_err());
    }

    #[test]
    fn rounds_never_train_on_their_test_fold() {
        let plan = FoldPlan::new(10, 5, 7).unwrap();
        for round in plan.rounds() {
            let test = plan.fold_items(round.test_fold);
            let validation = plan.fold_items(round.validation_fold);
            let train: Vec<usize> = (0..10)
                .filter(|&i| {
                    plan.assignment[i] != round.test_fold
                        && plan.assignment[i] != round.validation_fold
                })
                .collect();
            for i in &test {
                assert!(!train.contains(i));
                assert!(!validation.contains(i));
            }
            assert_eq!(test.len() + validation.len() + train.len(), 10);
        }
    }
}
