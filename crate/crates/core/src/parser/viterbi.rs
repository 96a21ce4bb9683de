//! Max-product chart with backpointers for single best parse trees.
//! Mirrors the inside fill, including the contact-table restriction; ties
//! break toward the earlier rule and smaller split, which keeps decoding
//! deterministic.

use crate::contacts::ContactMap;
use crate::grammar::{Grammar, RuleRhs, TermId};
use crate::parser::tree::ParseTree;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Back {
    None,
    /// Lexical rule index.
    Lexical(u32),
    /// Rule index and split offset of the left child.
    Branching(u32, u32),
    /// Contact rule index. Whether the outer terminals came from the span-1
    /// layer or from a contact matrix does not change the tree: the lexical
    /// rule below each outer symbol is fixed by the input.
    Contact(u32),
}

struct MaxChart {
    n: usize,
    n_syms: usize,
    n_vt: usize,
    best: Vec<f64>,
    back: Vec<Back>,
    c: Vec<f64>,
}

impl MaxChart {
    #[inline]
    fn idx(&self, span: usize, start: usize, sym: usize) -> usize {
        ((span - 1) * self.n + start) * self.n_syms + sym
    }

    #[inline]
    fn c_idx(&self, pair: usize, pos: usize, vt: usize) -> usize {
        (pair * self.n + pos) * self.n_vt + vt
    }
}

pub(crate) fn best_parse(
    grammar: &Grammar,
    x: &[TermId],
    map: &ContactMap,
) -> Option<(ParseTree, f64)> {
    let n = x.len();
    let n_syms = grammar.nt_count();
    let n_vt = grammar.vt_count();
    let n_pairs = map.pair_count();
    let mut chart = MaxChart {
        n,
        n_syms,
        n_vt,
        best: vec![0.0; n * n * n_syms],
        back: vec![Back::None; n * n * n_syms],
        c: vec![0.0; n_pairs * n * n_vt],
    };

    for (ri, rule) in grammar.rules().iter().enumerate() {
        if let RuleRhs::Lexical(t) = rule.rhs {
            for (pos, &sym) in x.iter().enumerate() {
                if t == sym {
                    let idx = chart.idx(1, pos, rule.lhs.0);
                    if rule.prob > chart.best[idx] {
                        chart.best[idx] = rule.prob;
                        chart.back[idx] = Back::Lexical(ri as u32);
                    }
                }
            }
        }
    }
    for (pair, &(i, j)) in map.pairs().iter().enumerate() {
        for pos in [i - 1, j - 1] {
            for vt in 0..n_vt {
                let idx = chart.idx(1, pos, vt);
                let cidx = chart.c_idx(pair, pos, vt);
                chart.c[cidx] = chart.best[idx];
                chart.best[idx] = 0.0;
                chart.back[idx] = Back::None;
            }
        }
    }

    for span in 2..=n {
        for start in 0..=(n - span) {
            for (ri, rule) in grammar.rules().iter().enumerate() {
                match rule.rhs {
                    RuleRhs::Lexical(_) => {}
                    RuleRhs::Branching(r1, r2) => {
                        for split in 1..span {
                            let left = chart.best[chart.idx(split, start, r1.0)];
                            if left == 0.0 {
                                continue;
                            }
                            let right =
                                chart.best[chart.idx(span - split, start + split, r2.0)];
                            if right == 0.0 {
                                continue;
                            }
                            let cand = rule.prob * left * right;
                            let idx = chart.idx(span, start, rule.lhs.0);
                            if cand > chart.best[idx] {
                                chart.best[idx] = cand;
                                chart.back[idx] = Back::Branching(ri as u32, split as u32);
                            }
                        }
                    }
                    RuleRhs::Contact(t1, m, t2) if span >= 3 => {
                        let last = start + span - 1;
                        let mid = chart.best[chart.idx(span - 2, start + 1, m.0)];
                        if mid == 0.0 {
                            continue;
                        }
                        let mut outer = chart.best[chart.idx(1, start, t1.0)]
                            * chart.best[chart.idx(1, last, t2.0)];
                        for pair in 0..n_pairs {
                            let paired = chart.c[chart.c_idx(pair, start, t1.0)]
                                * chart.c[chart.c_idx(pair, last, t2.0)];
                            if paired > outer {
                                outer = paired;
                            }
                        }
                        if outer == 0.0 {
                            continue;
                        }
                        let cand = rule.prob * mid * outer;
                        let idx = chart.idx(span, start, rule.lhs.0);
                        if cand > chart.best[idx] {
                            chart.best[idx] = cand;
                            chart.back[idx] = Back::Contact(ri as u32);
                        }
                    }
                    RuleRhs::Contact(..) => {}
                }
            }
        }
    }

    let root = chart.idx(n, 0, grammar.start().0);
    let prob = chart.best[root];
    if prob == 0.0 {
        return None;
    }
    let tree = rebuild(grammar, x, &chart, n, 0, grammar.start().0);
    Some((tree, prob))
}

fn rebuild(
    grammar: &Grammar,
    x: &[TermId],
    chart: &MaxChart,
    span: usize,
    start: usize,
    sym: usize,
) -> ParseTree {
    let idx = chart.idx(span, start, sym);
    match chart.back[idx] {
        Back::None => unreachable!("rebuild reached an empty cell"),
        Back::Lexical(ri) => {
            let rule = &grammar.rules()[ri as usize];
            ParseTree::lexical(rule.lhs, x[start])
        }
        Back::Branching(ri, split) => {
            let rule = &grammar.rules()[ri as usize];
            let (r1, r2) = match rule.rhs {
                RuleRhs::Branching(a, b) => (a, b),
                _ => unreachable!(),
            };
            let split = split as usize;
            ParseTree::Node {
                label: rule.lhs,
                children: vec![
                    rebuild(grammar, x, chart, split, start, r1.0),
                    rebuild(grammar, x, chart, span - split, start + split, r2.0),
                ],
            }
        }
        Back::Contact(ri) => {
            let rule = &grammar.rules()[ri as usize];
            let (t1, m, t2) = match rule.rhs {
                RuleRhs::Contact(a, m, b) => (a, m, b),
                _ => unreachable!(),
            };
            let last = start + span - 1;
            ParseTree::Node {
                label: rule.lhs,
                children: vec![
                    ParseTree::lexical(t1, x[start]),
                    rebuild(grammar, x, chart, span - 2, start + 1, m.0),
                    ParseTree::lexical(t2, x[last]),
                ],
            }
        }
    }
}
