//! Inside probabilities, contact-constrained inside probabilities, Viterbi
//! parse trees, and the total probability mass of map-consistent skeletons.
//!
//! Probabilities are computed and returned in linear space; motif-length
//! inputs keep products far from underflow, and callers that want scores
//! take logarithms at the boundary.

mod chart;
pub mod tree;
mod viterbi;

pub use chart::ParseChart;
pub use tree::{ParseTree, TreeError, Ust};

use thiserror::Error;

use crate::contacts::ContactMap;
use crate::grammar::{Grammar, TermId};

#[derive(Debug, Error)]
pub enum ParserError {
    #[error("sequence length {0} is below the minimum of 2")]
    TooShort(usize),
    #[error("terminal id {id} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { id: usize, alphabet: usize },
    #[error("sequence length {sequence} does not match contact map length {map}")]
    LengthMismatch { sequence: usize, map: usize },
}

/// A best parse with its derivation probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiParse {
    pub tree: ParseTree,
    pub probability: f64,
}

fn check_sequence(grammar: &Grammar, x: &[TermId]) -> Result<(), ParserError> {
    if x.len() < 2 {
        return Err(ParserError::TooShort(x.len()));
    }
    let alphabet = grammar.alphabet().len();
    for &t in x {
        if t.0 >= alphabet {
            return Err(ParserError::SymbolOutOfRange { id: t.0, alphabet });
        }
    }
    Ok(())
}

fn check_map(x: &[TermId], map: &ContactMap) -> Result<(), ParserError> {
    if x.len() != map.length() {
        return Err(ParserError::LengthMismatch {
            sequence: x.len(),
            map: map.length(),
        });
    }
    Ok(())
}

/// `prob(x | G)`: total probability of all parse trees yielding `x`.
pub fn inside(grammar: &Grammar, x: &[TermId]) -> Result<f64, ParserError> {
    check_sequence(grammar, x)?;
    let map = ContactMap::empty(x.len());
    let chart = chart::fill_inside(grammar, x, &map, chart::LexicalMode::Rules);
    Ok(chart.sequence_probability(grammar))
}

/// Total probability of the parse trees of `x` consistent with `map`.
/// Zero when the grammar cannot realize the map (for example a grammar
/// without contact rules and a non-empty map).
pub fn inside_constrained(
    grammar: &Grammar,
    x: &[TermId],
    map: &ContactMap,
) -> Result<f64, ParserError> {
    check_sequence(grammar, x)?;
    check_map(x, map)?;
    let chart = chart::fill_inside(grammar, x, map, chart::LexicalMode::Rules);
    Ok(chart.sequence_probability(grammar))
}

/// The filled probability tables, for callers that want more than the root
/// cell.
pub fn inside_chart(
    grammar: &Grammar,
    x: &[TermId],
    map: &ContactMap,
) -> Result<ParseChart, ParserError> {
    check_sequence(grammar, x)?;
    check_map(x, map)?;
    Ok(chart::fill_inside(grammar, x, map, chart::LexicalMode::Rules))
}

/// Single maximum-probability parse tree, or `None` when no parse exists.
pub fn viterbi(grammar: &Grammar, x: &[TermId]) -> Result<Option<ViterbiParse>, ParserError> {
    check_sequence(grammar, x)?;
    let map = ContactMap::empty(x.len());
    Ok(viterbi::best_parse(grammar, x, &map).map(|(tree, probability)| ViterbiParse {
        tree,
        probability,
    }))
}

/// Maximum-probability parse tree among those consistent with `map`, or
/// `None` when no consistent parse exists.
pub fn viterbi_constrained(
    grammar: &Grammar,
    x: &[TermId],
    map: &ContactMap,
) -> Result<Option<ViterbiParse>, ParserError> {
    check_sequence(grammar, x)?;
    check_map(x, map)?;
    Ok(viterbi::best_parse(grammar, x, map).map(|(tree, probability)| ViterbiParse {
        tree,
        probability,
    }))
}

/// `prob(U_n^m | G)`: total structural-rule probability of the length-`n`
/// skeletons consistent with `map`. For a proper grammar the lexical
/// emissions sum out to 1, so the chart is seeded with unit lexical mass
/// and the input symbols never matter.
pub fn neighborhood_mass(
    grammar: &Grammar,
    map: &ContactMap,
    n: usize,
) -> Result<f64, ParserError> {
    if n < 2 {
        return Err(ParserError::TooShort(n));
    }
    if map.length() != n {
        return Err(ParserError::LengthMismatch {
            sequence: n,
            map: map.length(),
        });
    }
    let placeholder = vec![TermId(0); n];
    let chart = chart::fill_inside(grammar, &placeholder, map, chart::LexicalMode::AllOnes);
    Ok(chart.sequence_probability(grammar))
}

/// Skeleton of a parse tree: internal labels erased, shape and leaves kept.
pub fn ust_of(tree: &ParseTree) -> Ust {
    tree.ust()
}
