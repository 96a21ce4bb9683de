//! Bottom-up chart fill for inside probabilities, with the contact table
//! that restricts parses to map-consistent trees.
//!
//! Lexical mass at positions participating in a contact pair `p` is moved
//! from the span-1 layer of `P` into the matrix `C_p`, which only contact
//! rules spanning exactly that pair can consume; the two outer terminals of
//! a contact rule come either both from `P` or both from the same `C_p`,
//! never mixed. Pair matching is implicit: `C_p` is zero away from the two
//! endpoint positions, so mismatched products vanish on their own.

use crate::contacts::ContactMap;
use crate::grammar::{Grammar, NtId, RuleRhs, TermId};

/// How the span-1 layer is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LexicalMode {
    /// Lexical rule probabilities for the actual input symbols.
    Rules,
    /// Every lexical non-terminal gets mass 1 at every position. Summing a
    /// proper grammar's emissions over all length-n inputs gives exactly
    /// this seeding, which is what the skeleton-mass computation uses.
    AllOnes,
}

/// Probability tables `P[span][start][symbol]` and `C[pair][pos][vt]`.
/// `start` and `pos` are 0-based here; spans are 1-based lengths.
pub struct ParseChart {
    n: usize,
    n_syms: usize,
    n_vt: usize,
    n_pairs: usize,
    p: Vec<f64>,
    c: Vec<f64>,
}

impl ParseChart {
    fn zeroed(n: usize, n_syms: usize, n_vt: usize, n_pairs: usize) -> Self {
        ParseChart {
            n,
            n_syms,
            n_vt,
            n_pairs,
            p: vec![0.0; n * n * n_syms],
            c: vec![0.0; n_pairs * n * n_vt],
        }
    }

    #[inline]
    fn p_idx(&self, span: usize, start: usize, sym: usize) -> usize {
        debug_assert!(span >= 1 && span <= self.n);
        debug_assert!(start + span <= self.n);
        ((span - 1) * self.n + start) * self.n_syms + sym
    }

    #[inline]
    fn c_idx(&self, pair: usize, pos: usize, vt: usize) -> usize {
        debug_assert!(pair < self.n_pairs && pos < self.n && vt < self.n_vt);
        (pair * self.n + pos) * self.n_vt + vt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn pair_count(&self) -> usize {
        self.n_pairs
    }

    /// `prob(sym =>* x[start .. start+span])`, restricted to the consistent
    /// derivations when the chart was filled under a non-empty map.
    pub fn p(&self, span: usize, start: usize, sym: NtId) -> f64 {
        self.p[self.p_idx(span, start, sym.0)]
    }

    /// Lexical mass parked for contact pair `pair` at position `pos`,
    /// indexed by lexical non-terminal.
    pub fn c(&self, pair: usize, pos: usize, vt_index: usize) -> f64 {
        self.c[self.c_idx(pair, pos, vt_index)]
    }

    /// Total probability of the (map-consistent) parses of the input.
    pub fn sequence_probability(&self, grammar: &Grammar) -> f64 {
        self.p(self.n, 0, grammar.start())
    }
}

pub(crate) fn fill_inside(
    grammar: &Grammar,
    x: &[TermId],
    map: &ContactMap,
    mode: LexicalMode,
) -> ParseChart {
    let n = x.len();
    let n_syms = grammar.nt_count();
    let n_vt = grammar.vt_count();
    let mut chart = ParseChart::zeroed(n, n_syms, n_vt, map.pair_count());

    let mut lexical = Vec::new();
    let mut branching = Vec::new();
    let mut contact = Vec::new();
    for rule in grammar.rules() {
        match rule.rhs {
            RuleRhs::Lexical(t) => lexical.push((rule.lhs.0, t.0, rule.prob)),
            RuleRhs::Branching(a, b) => branching.push((rule.lhs.0, a.0, b.0, rule.prob)),
            RuleRhs::Contact(a, m, b) => contact.push((rule.lhs.0, a.0, m.0, b.0, rule.prob)),
        }
    }

    // Span-1 layer.
    match mode {
        LexicalMode::Rules => {
            for (pos, &sym) in x.iter().enumerate() {
                for &(lhs, term, prob) in &lexical {
                    if term == sym.0 {
                        let idx = chart.p_idx(1, pos, lhs);
                        chart.p[idx] += prob;
                    }
                }
            }
        }
        LexicalMode::AllOnes => {
            for pos in 0..n {
                for vt in 0..n_vt {
                    let idx = chart.p_idx(1, pos, vt);
                    chart.p[idx] = 1.0;
                }
            }
        }
    }

    // Move contact-position mass from P1 into the per-pair matrices.
    for (pair, &(i, j)) in map.pairs().iter().enumerate() {
        for pos in [i - 1, j - 1] {
            for vt in 0..n_vt {
                let p_idx = chart.p_idx(1, pos, vt);
                let c_idx = chart.c_idx(pair, pos, vt);
                chart.c[c_idx] = chart.p[p_idx];
                chart.p[p_idx] = 0.0;
            }
        }
    }

    for span in 2..=n {
        for start in 0..=(n - span) {
            for split in 1..span {
                let right_start = start + split;
                let right_span = span - split;
                for &(lhs, r1, r2, prob) in &branching {
                    let left = chart.p[chart.p_idx(split, start, r1)];
                    if left == 0.0 {
                        continue;
                    }
                    let right = chart.p[chart.p_idx(right_span, right_start, r2)];
                    if right == 0.0 {
                        continue;
                    }
                    let idx = chart.p_idx(span, start, lhs);
                    chart.p[idx] += prob * left * right;
                }
            }
            if span >= 3 {
                let last = start + span - 1;
                for &(lhs, t1, m, t2, prob) in &contact {
                    let mid = chart.p[chart.p_idx(span - 2, start + 1, m)];
                    if mid == 0.0 {
                        continue;
                    }
                    // Both outer terminals from the plain span-1 layer.
                    let free = chart.p[chart.p_idx(1, start, t1)]
                        * chart.p[chart.p_idx(1, last, t2)];
                    if free != 0.0 {
                        let idx = chart.p_idx(span, start, lhs);
                        chart.p[idx] += prob * mid * free;
                    }
                    // Both outer terminals from the same contact matrix.
                    for pair in 0..chart.n_pairs {
                        let paired = chart.c[chart.c_idx(pair, start, t1)]
                            * chart.c[chart.c_idx(pair, last, t2)];
                        if paired != 0.0 {
                            let idx = chart.p_idx(span, start, lhs);
                            chart.p[idx] += prob * mid * paired;
                        }
                    }
                }
            }
        }
    }
    chart
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Grammar;

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

    #[test]
    fn constrained_fill_zeroes_contact_positions_in_p1() {
        let g = g2();
        let x = g.encode("abba").unwrap();
        let map = ContactMap::new(4, vec![(1, 4)]).unwrap();
        let chart = fill_inside(&g, &x, &map, LexicalMode::Rules);
        for sym in 0..g.nt_count() {
            assert_eq!(chart.p(1, 0, NtId(sym)), 0.0);
            assert_eq!(chart.p(1, 3, NtId(sym)), 0.0);
        }
        // Mass parked in C for the single pair, T -> a at both endpoints.
        assert_eq!(chart.c(0, 0, 0), 0.6);
        assert_eq!(chart.c(0, 3, 0), 0.6);
        // Interior positions untouched.
        assert_eq!(chart.p(1, 1, NtId(0)), 0.4);
    }

    #[test]
    fn chart_entries_stay_in_unit_interval() {
        let g = g2();
        let x = g.encode("abbaab").unwrap();
        let map = ContactMap::new(6, vec![(2, 5)]).unwrap();
        let chart = fill_inside(&g, &x, &map, LexicalMode::Rules);
        for span in 1..=6 {
            for start in 0..=(6 - span) {
                for sym in 0..g.nt_count() {
                    let v = chart.p(span, start, NtId(sym));
                    assert!((0.0..=1.0).contains(&v), "P[{span},{start},{sym}] = {v}");
                }
            }
        }
    }
}
