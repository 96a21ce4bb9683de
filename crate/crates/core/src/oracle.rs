//! Exhaustive enumeration of parse trees for small inputs, used as ground
//! truth for the chart parser and the estimators.
//!
//! The recursion is top-down over half-open spans and deliberately shares no
//! indexing logic with the bottom-up chart fill. Subtrees are reference-
//! counted internally so that enumerating a few hundred thousand trees stays
//! affordable; consistency filtering walks each enumerated tree and measures
//! leaf-path distances directly on it.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::contacts::ContactMap;
use crate::grammar::{Grammar, NtId, RuleRhs, TermId};
use crate::parser::tree::ParseTree;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_sequence_length: usize,
    pub max_tree_count: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_sequence_length: 8,
            max_tree_count: 500_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("sequence length {len} exceeds enumeration budget {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("enumeration exceeded the tree budget of {max}")]
    TreeBudgetExceeded { max: usize },
}

/// Shared-subtree representation private to the enumerator.
enum Shared {
    Leaf(TermId),
    Node {
        label: NtId,
        children: Vec<Rc<Shared>>,
    },
}

impl Shared {
    fn lexical(label: NtId, symbol: TermId) -> Rc<Self> {
        Rc::new(Shared::Node {
            label,
            children: vec![Rc::new(Shared::Leaf(symbol))],
        })
    }

    fn to_parse_tree(&self) -> ParseTree {
        match self {
            Shared::Leaf(t) => ParseTree::Leaf(*t),
            Shared::Node { label, children } => ParseTree::Node {
                label: *label,
                children: children.iter().map(|c| c.to_parse_tree()).collect(),
            },
        }
    }
}

/// Root paths of all leaves, as child-index strings; an independent
/// reimplementation of the leaf-distance definition for the enumerator's
/// own tree shape.
fn leaf_paths(tree: &Shared, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    match tree {
        Shared::Leaf(_) => out.push(prefix.clone()),
        Shared::Node { children, .. } => {
            for (k, c) in children.iter().enumerate() {
                prefix.push(k as u32);
                leaf_paths(c, prefix, out);
                prefix.pop();
            }
        }
    }
}

fn pair_distance(paths: &[Vec<u32>], i: usize, j: usize) -> usize {
    let a = &paths[i - 1];
    let b = &paths[j - 1];
    let common = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
    (a.len() - common) + (b.len() - common)
}

struct Enumerator<'g> {
    grammar: &'g Grammar,
    x: &'g [TermId],
    budget: EnumerationBudget,
    stored: usize,
    memo: HashMap<(usize, usize, usize), Rc<Vec<(Rc<Shared>, f64)>>>,
}

impl<'g> Enumerator<'g> {
    fn derive(
        &mut self,
        sym: NtId,
        lo: usize,
        hi: usize,
    ) -> Result<Rc<Vec<(Rc<Shared>, f64)>>, OracleError> {
        let key = (sym.0, lo, hi);
        if let Some(cached) = self.memo.get(&key) {
            return Ok(Rc::clone(cached));
        }
        let mut out: Vec<(Rc<Shared>, f64)> = Vec::new();
        if self.grammar.is_lexical(sym) {
            if hi - lo == 1 {
                for rule in self.grammar.rules() {
                    if rule.lhs == sym {
                        if let RuleRhs::Lexical(t) = rule.rhs {
                            if t == self.x[lo] {
                                out.push((Shared::lexical(sym, t), rule.prob));
                            }
                        }
                    }
                }
            }
        } else {
            for rule in self.grammar.rules() {
                if rule.lhs != sym {
                    continue;
                }
                match rule.rhs {
                    RuleRhs::Lexical(_) => {}
                    RuleRhs::Branching(a, b) => {
                        for mid in lo + 1..hi {
                            let lefts = self.derive(a, lo, mid)?;
                            if lefts.is_empty() {
                                continue;
                            }
                            let rights = self.derive(b, mid, hi)?;
                            for (lt, lp) in lefts.iter() {
                                for (rt, rp) in rights.iter() {
                                    out.push((
                                        Rc::new(Shared::Node {
                                            label: sym,
                                            children: vec![Rc::clone(lt), Rc::clone(rt)],
                                        }),
                                        rule.prob * lp * rp,
                                    ));
                                }
                            }
                        }
                    }
                    RuleRhs::Contact(a, m, b) => {
                        if hi - lo < 3 {
                            continue;
                        }
                        let lefts = self.derive(a, lo, lo + 1)?;
                        if lefts.is_empty() {
                            continue;
                        }
                        let rights = self.derive(b, hi - 1, hi)?;
                        if rights.is_empty() {
                            continue;
                        }
                        let mids = self.derive(m, lo + 1, hi - 1)?;
                        for (lt, lp) in lefts.iter() {
                            for (mt, mp) in mids.iter() {
                                for (rt, rp) in rights.iter() {
                                    out.push((
                                        Rc::new(Shared::Node {
                                            label: sym,
                                            children: vec![
                                                Rc::clone(lt),
                                                Rc::clone(mt),
                                                Rc::clone(rt),
                                            ],
                                        }),
                                        rule.prob * lp * mp * rp,
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        self.stored += out.len();
        if self.stored > self.budget.max_tree_count {
            return Err(OracleError::TreeBudgetExceeded {
                max: self.budget.max_tree_count,
            });
        }
        let out = Rc::new(out);
        self.memo.insert(key, Rc::clone(&out));
        Ok(out)
    }
}

fn enumerate_shared(
    grammar: &Grammar,
    x: &[TermId],
    budget: EnumerationBudget,
) -> Result<Rc<Vec<(Rc<Shared>, f64)>>, OracleError> {
    if x.len() > budget.max_sequence_length {
        return Err(OracleError::SequenceTooLong {
            len: x.len(),
            max: budget.max_sequence_length,
        });
    }
    if x.is_empty() {
        return Ok(Rc::new(Vec::new()));
    }
    let mut e = Enumerator {
        grammar,
        x,
        budget,
        stored: 0,
        memo: HashMap::new(),
    };
    e.derive(grammar.start(), 0, x.len())
}

/// All complete parse trees yielding `x`, each with its derivation-product
/// probability. No duplicates: a labeled tree corresponds to exactly one
/// derivation.
pub fn enumerate_trees(
    grammar: &Grammar,
    x: &[TermId],
    budget: EnumerationBudget,
) -> Result<Vec<(ParseTree, f64)>, OracleError> {
    Ok(enumerate_shared(grammar, x, budget)?
        .iter()
        .map(|(t, p)| (t.to_parse_tree(), *p))
        .collect())
}

/// Sum of tree probabilities over the exhaustive enumeration.
pub fn brute_inside(
    grammar: &Grammar,
    x: &[TermId],
    budget: EnumerationBudget,
) -> Result<f64, OracleError> {
    Ok(enumerate_shared(grammar, x, budget)?
        .iter()
        .map(|(_, p)| p)
        .sum())
}

/// Per-map sums of tree probabilities restricted to the trees in which every
/// map pair sits within `delta` leaf-path edges. One enumeration serves all
/// maps; each tree is walked once for its pair distances.
pub fn brute_inside_constrained_batch(
    grammar: &Grammar,
    x: &[TermId],
    maps: &[ContactMap],
    delta: usize,
    budget: EnumerationBudget,
) -> Result<Vec<f64>, OracleError> {
    let trees = enumerate_shared(grammar, x, budget)?;
    let mut totals = vec![0.0; maps.len()];
    let mut prefix = Vec::new();
    let mut paths: Vec<Vec<u32>> = Vec::new();
    for (tree, p) in trees.iter() {
        prefix.clear();
        paths.clear();
        leaf_paths(tree, &mut prefix, &mut paths);
        for (k, map) in maps.iter().enumerate() {
            let consistent = map
                .pairs()
                .iter()
                .all(|&(i, j)| pair_distance(&paths, i, j) <= delta);
            if consistent {
                totals[k] += p;
            }
        }
    }
    Ok(totals)
}

/// Sum of tree probabilities restricted to trees consistent with `map` at
/// the given leaf-distance threshold.
pub fn brute_inside_constrained(
    grammar: &Grammar,
    x: &[TermId],
    map: &ContactMap,
    delta: usize,
    budget: EnumerationBudget,
) -> Result<f64, OracleError> {
    Ok(brute_inside_constrained_batch(grammar, x, std::slice::from_ref(map), delta, budget)?[0])
}
