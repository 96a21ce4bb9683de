//! Training objectives: maximum likelihood over map-constrained parses and
//! the two contrastive ratios, all in the log domain where higher is better.
//!
//! Infeasible grammars yield `-inf` rather than errors so that a search can
//! rank them worst and move on; only structurally undefined quantities (a
//! grammar that cannot realize the shared map at all, or a zero
//! unconstrained denominator) are reported as errors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contacts::ContactMap;
use crate::grammar::{Grammar, TermId};
use crate::parser::{self, ParserError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Likelihood of the map-consistent parses.
    Ml,
    /// Constrained likelihood contrasted against the total mass of
    /// map-consistent skeletons; needs one shared map (and hence one
    /// sequence length) across the sample.
    CeM,
    /// Constrained likelihood contrasted against the unconstrained
    /// likelihood of each sequence.
    CeX,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Ml => write!(f, "ml"),
            EstimatorKind::CeM => write!(f, "ce-m"),
            EstimatorKind::CeX => write!(f, "ce-x"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ml" => Ok(EstimatorKind::Ml),
            "ce-m" => Ok(EstimatorKind::CeM),
            "ce-x" => Ok(EstimatorKind::CeX),
            other => Err(format!("unknown estimator '{other}', expected ml|ce-m|ce-x")),
        }
    }
}

/// A log-domain objective value tagged with the estimator that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub kind: EstimatorKind,
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Parser(#[from] ParserError),
    #[error("estimator ce-m requires a shared contact map")]
    MissingSharedMap,
    #[error("grammar cannot realize the shared map: neighborhood mass is zero")]
    ZeroNeighborhoodMass,
    #[error("unconstrained probability of item {index} is zero; ce-x is undefined")]
    ZeroUnconstrained { index: usize },
    #[error("sample is empty")]
    EmptySample,
}

/// One training item: an encoded sequence with its map, if any. A missing
/// or empty map means the unconstrained special case.
#[derive(Debug, Clone)]
pub struct SampleItem {
    pub seq: Vec<TermId>,
    pub map: Option<ContactMap>,
}

impl SampleItem {
    pub fn new(seq: Vec<TermId>, map: Option<ContactMap>) -> Self {
        SampleItem { seq, map }
    }

    fn constrained_inside(&self, grammar: &Grammar) -> Result<f64, ParserError> {
        match &self.map {
            Some(map) if !map.is_empty() => parser::inside_constrained(grammar, &self.seq, map),
            _ => parser::inside(grammar, &self.seq),
        }
    }
}

/// Positive sample with an optional shared map, as handed to the learner.
#[derive(Debug, Clone)]
pub struct Sample {
    pub items: Vec<SampleItem>,
    pub shared_map: Option<ContactMap>,
}

impl Sample {
    pub fn unconstrained(seqs: Vec<Vec<TermId>>) -> Self {
        Sample {
            items: seqs.into_iter().map(|s| SampleItem::new(s, None)).collect(),
            shared_map: None,
        }
    }

    pub fn with_shared_map(seqs: Vec<Vec<TermId>>, map: ContactMap) -> Self {
        Sample {
            items: seqs
                .into_iter()
                .map(|s| SampleItem::new(s, Some(map.clone())))
                .collect(),
            shared_map: Some(map),
        }
    }
}

/// `sum_i log prob(Y^m_x_i | G)`; `-inf` when some item has no consistent
/// mass. Items without a map contribute their unconstrained likelihood.
pub fn objective_ml(items: &[SampleItem], grammar: &Grammar) -> Result<f64, EstimationError> {
    if items.is_empty() {
        return Err(EstimationError::EmptySample);
    }
    let mut total = 0.0;
    for item in items {
        let p = item.constrained_inside(grammar)?;
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += p.ln();
    }
    Ok(total)
}

/// `sum_i log prob(Y^m_x_i | G) - |X| * log prob(U^m_n | G)`. The
/// denominator is computed once per call; it depends only on the map, the
/// length and the structural rule probabilities.
pub fn objective_ce_m(
    seqs: &[Vec<TermId>],
    shared_map: &ContactMap,
    grammar: &Grammar,
) -> Result<f64, EstimationError> {
    if seqs.is_empty() {
        return Err(EstimationError::EmptySample);
    }
    let mass = parser::neighborhood_mass(grammar, shared_map, shared_map.length())?;
    if mass == 0.0 {
        return Err(EstimationError::ZeroNeighborhoodMass);
    }
    let log_mass = mass.ln();
    let mut total = 0.0;
    for seq in seqs {
        let p = parser::inside_constrained(grammar, seq, shared_map)?;
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += p.ln() - log_mass;
    }
    Ok(total)
}

/// `sum_i [log prob(Y^m_x_i | G) - log prob(Y_x_i | G)]`; each term is at
/// most 0. Errors when some unconstrained probability is itself zero.
pub fn objective_ce_x(items: &[SampleItem], grammar: &Grammar) -> Result<f64, EstimationError> {
    if items.is_empty() {
        return Err(EstimationError::EmptySample);
    }
    let mut total = 0.0;
    for (index, item) in items.iter().enumerate() {
        let free = parser::inside(grammar, &item.seq)?;
        if free == 0.0 {
            return Err(EstimationError::ZeroUnconstrained { index });
        }
        let constrained = item.constrained_inside(grammar)?;
        if constrained == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += constrained.ln() - free.ln();
    }
    Ok(total)
}

/// Dispatch on the estimator kind.
pub fn objective(
    kind: EstimatorKind,
    sample: &Sample,
    grammar: &Grammar,
) -> Result<Objective, EstimationError> {
    let value = match kind {
        EstimatorKind::Ml => objective_ml(&sample.items, grammar)?,
        EstimatorKind::CeM => {
            let map = sample
                .shared_map
                .as_ref()
                .ok_or(EstimationError::MissingSharedMap)?;
            let seqs: Vec<Vec<TermId>> =
                sample.items.iter().map(|i| i.seq.clone()).collect();
            objective_ce_m(&seqs, map, grammar)?
        }
        EstimatorKind::CeX => objective_ce_x(&sample.items, grammar)?,
    };
    Ok(Objective { kind, value })
}
