//! Property tests: chart parser against the enumeration oracle, grammar
//! normalization and serialization invariants, Viterbi bounds.

mod common;

use proptest::prelude::*;

use pcfg_contacts::contacts::{is_consistent, ContactMap, DEFAULT_DELTA};
use pcfg_contacts::grammar::{Alphabet, Grammar, PROPERNESS_TOLERANCE};
use pcfg_contacts::oracle::{brute_inside, brute_inside_constrained, EnumerationBudget};
use pcfg_contacts::parser::{inside, inside_constrained, viterbi, viterbi_constrained};

use common::valid_maps;

fn base_grammar() -> Grammar {
    Grammar::full(Alphabet::from_symbols_str("ab").unwrap(), 2, 2, true).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

prop_compose! {
    fn weights(n: usize)(w in proptest::collection::vec(0.01f64..1.0, n)) -> Vec<f64> {
        w
    }
}

prop_compose! {
    fn sequence()(n in 2usize..=7, bits in proptest::collection::vec(0usize..2, 7))
        -> Vec<pcfg_contacts::TermId>
    {
        bits[..n].iter().map(|&b| pcfg_contacts::TermId(b)).collect()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chart_matches_oracle(w in weights(52), x in sequence(), map_pick in 0usize..64) {
        let g = base_grammar().with_weights(&w).unwrap();
        let budget = EnumerationBudget { max_sequence_length: 7, max_tree_count: 2_000_000 };

        let chart = inside(&g, &x).unwrap();
        let brute = brute_inside(&g, &x, budget).unwrap();
        prop_assert!(rel_close(chart, brute, 1e-10), "{chart} vs {brute}");

        let maps = valid_maps(x.len(), 2);
        if !maps.is_empty() {
            let map = &maps[map_pick % maps.len()];
            let constrained = inside_constrained(&g, &x, map).unwrap();
            let brute_c = brute_inside_constrained(&g, &x, map, DEFAULT_DELTA, budget).unwrap();
            prop_assert!(rel_close(constrained, brute_c, 1e-10), "{constrained} vs {brute_c}");
            prop_assert!(constrained <= chart * (1.0 + 1e-12));
        }
    }

    #[test]
    fn viterbi_is_bounded_and_rescorable(w in weights(52), x in sequence()) {
        let g = base_grammar().with_weights(&w).unwrap();
        let total = inside(&g, &x).unwrap();
        if let Some(best) = viterbi(&g, &x).unwrap() {
            prop_assert!(best.probability <= total * (1.0 + 1e-12));
            let rescored = best.tree.probability(&g).unwrap();
            prop_assert!(rel_close(rescored, best.probability, 1e-12));
            prop_assert_eq!(best.tree.yield_len(), x.len());
        }
    }

    #[test]
    fn constrained_viterbi_trees_are_consistent(w in weights(52), x in sequence(), map_pick in 0usize..64) {
        let g = base_grammar().with_weights(&w).unwrap();
        let maps = valid_maps(x.len(), 2);
        if !maps.is_empty() {
            let map = &maps[map_pick % maps.len()];
            if let Some(best) = viterbi_constrained(&g, &x, map).unwrap() {
                prop_assert!(is_consistent(&best.tree, map, DEFAULT_DELTA).unwrap());
                let constrained = inside_constrained(&g, &x, map).unwrap();
                prop_assert!(best.probability <= constrained * (1.0 + 1e-12));
            } else {
                prop_assert_eq!(inside_constrained(&g, &x, map).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn adding_pairs_never_raises_constrained_mass(w in weights(52), x in sequence()) {
        let g = base_grammar().with_weights(&w).unwrap();
        let n = x.len();
        if n >= 6 {
            let small = ContactMap::new(n, vec![(2, 5)]).unwrap();
            let big = ContactMap::new(n, vec![(1, n), (2, 5)]).unwrap();
            let p_small = inside_constrained(&g, &x, &small).unwrap();
            let p_big = inside_constrained(&g, &x, &big).unwrap();
            prop_assert!(p_big <= p_small * (1.0 + 1e-12));
        }
    }

    #[test]
    fn normalization_is_proper_and_round_trips(w in weights(52)) {
        let g = base_grammar().with_weights(&w).unwrap();
        let mut sums = vec![0.0; g.nt_count()];
        for r in g.rules() {
            sums[r.lhs.0] += r.prob;
        }
        for s in sums {
            prop_assert!((s - 1.0).abs() <= PROPERNESS_TOLERANCE);
        }
        let round = Grammar::from_text(&g.to_text()).unwrap();
        prop_assert_eq!(g, round);
    }
}
