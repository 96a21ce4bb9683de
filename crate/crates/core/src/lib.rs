//! Probabilistic context-free grammars for fixed-length sequence motifs,
//! with parsing constrained by residue contact maps.
//!
//! The grammar form has three rule kinds over a partitioned non-terminal set
//! `V = V_T ⊎ V_N`:
//!
//! - lexical rules `V_T -> terminal`,
//! - branching rules `V_N -> (V_T ∪ V_N) (V_T ∪ V_N)`,
//! - contact rules `V_N -> V_T V_N V_T`.
//!
//! A contact rule derives the two endpoints of a contact pair from one node,
//! which puts the paired leaves within path distance 4 of each other in the
//! parse tree. [`parser`] computes inside probabilities (optionally restricted
//! to trees consistent with a [`contacts::ContactMap`]) and Viterbi trees,
//! [`estimation`] turns those into ML and contrastive training objectives,
//! [`learner`] maximizes them with a genetic algorithm over rule weights, and
//! [`evaluation`] measures discriminative (average precision against a null
//! model) and descriptive (contact recovery from Viterbi trees) performance.

pub mod contacts;
pub mod dataio;
pub mod estimation;
pub mod evaluation;
pub mod grammar;
pub mod learner;
pub mod oracle;
pub mod parser;

pub use contacts::{ContactMap, ContactSet, DEFAULT_DELTA};
pub use grammar::{Alphabet, Grammar, NtId, Rule, RuleKind, RuleRhs, TermId};
pub use parser::{ParseTree, Ust};
