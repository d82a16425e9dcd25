mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use sparselaw::logic::{
    atom, eq, eval_fo, eval_set, exists, forall, lfp_stages, parse, pebble_equivalent, Assignment, Formula,
};
use sparselaw::relstruct::{read_structure, write_structure, Node, RelationalStructure};

fn asg(x: Node, y: Node) -> Assignment {
    Assignment::from([("x".to_string(), x), ("y".to_string(), y)])
}

#[test]
fn battery_matches_naive_evaluator() {
    let vocab = loop_vocab();
    let formulas: Vec<Formula> = BATTERY.iter().chain(LFP_BATTERY.iter()).map(|s| parse(s, &vocab).unwrap()).collect();
    let mut r = rng(11);
    for trial in 0..60 {
        let n = 1 + trial % 4;
        let g = random_digraph_loops(n, 0.35, &mut r);
        for f in &formulas {
            for x in 1..=n {
                for y in 1..=n {
                    let a = asg(x, y);
                    assert_eq!(
                        eval_fo(&g, f, &a).unwrap(),
                        naive_eval(&g, f, &a, &RelVars::new()),
                        "{f} at x={x}, y={y} on\n{g}"
                    );
                }
            }
        }
    }
}

#[test]
fn transitive_closure_is_reachability() {
    let tc = parse(TC, &loop_vocab()).unwrap();
    let mut r = rng(5);
    for _ in 0..100 {
        let n = r.random_range(1..=5);
        let g = random_digraph_loops(n, 0.3, &mut r);
        let set = eval_set(&g, &tc, &["x", "y"]).unwrap();
        for x in 1..=n {
            for y in 1..=n {
                assert_eq!(set.contains(&vec![x, y]), bfs_reachable(&g, "R2", x, y));
            }
        }
    }
}

#[test]
fn lfp_stages_increase_to_the_fixpoint() {
    let g = RelationalStructure::digraph(4, &[], &[(1, 2), (2, 3), (3, 4)]).unwrap();
    let Formula::Lfp(l) = parse(TC, g.vocab()).unwrap() else { unreachable!() };
    let stages = lfp_stages(&g, &l, &Assignment::new()).unwrap();
    let sizes: Vec<usize> = stages.iter().map(|s| s.len()).collect();
    assert_eq!(sizes, vec![0, 3, 5, 6, 6]);
    assert!(stages.windows(2).all(|w| w[0].is_subset(&w[1])));
}

#[test]
fn complete_graphs_need_four_pebbles() {
    let (k3, k4) = (complete_graph(3), complete_graph(4));
    assert!(pebble_equivalent(&k3, &k4, 3).unwrap().equivalent);
    assert!(!pebble_equivalent(&k3, &k4, 4).unwrap().equivalent);
    assert!(game_equivalent(&k3, &k4, 3));
    assert!(!game_equivalent(&k3, &k4, 4));
}

#[test]
fn pebble_engine_matches_game_oracle_on_small_corpus() {
    let mut r = rng(21);
    let corpus: Vec<RelationalStructure> = (0..8).map(|i| random_graph(2 + i % 3, 0.5, &mut r)).collect();
    for (i, a) in corpus.iter().enumerate() {
        for b in &corpus[i..] {
            for k in 1..=3 {
                assert_eq!(pebble_equivalent(a, b, k).unwrap().equivalent, game_equivalent(a, b, k), "k={k}\n{a}\n{b}");
            }
        }
    }
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let vars = prop::sample::select(vec!["x", "y", "z"]);
    let leaf = prop_oneof![
        (prop::sample::select(vec!["R1", "R2"]), vars.clone(), vars.clone()).prop_map(|(p, a, b)| atom(p, [a, b])),
        (vars.clone(), vars.clone()).prop_map(|(a, b)| eq(a, b)),
        Just(Formula::True),
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::negate),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::Or),
            (vars.clone(), inner.clone()).prop_map(|(v, f)| exists(v, f)),
            (vars.clone(), inner).prop_map(|(v, f)| forall(v, f)),
        ]
    })
}

fn structure_strategy() -> impl Strategy<Value = RelationalStructure> {
    (1u32..=4, any::<u64>()).prop_map(|(n, seed)| random_digraph_loops(n, 0.4, &mut rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_formulas_match_naive(f in formula_strategy(), g in structure_strategy(), vals in prop::array::uniform3(1u32..=4)) {
        let vals = vals.map(|v| (v - 1) % g.n() + 1);
        let a = BTreeMap::from([("x".to_string(), vals[0]), ("y".to_string(), vals[1]), ("z".to_string(), vals[2])]);
        prop_assert_eq!(eval_fo(&g, &f, &a).unwrap(), naive_eval(&g, &f, &a, &RelVars::new()));
    }

    #[test]
    fn printed_formulas_reparse(f in formula_strategy()) {
        let back = parse(&f.to_string(), &loop_vocab()).unwrap();
        let g = random_digraph_loops(3, 0.5, &mut rng(f.size() as u64));
        let a = BTreeMap::from([("x".to_string(), 1), ("y".to_string(), 2), ("z".to_string(), 3)]);
        prop_assert_eq!(eval_fo(&g, &f, &a).unwrap(), eval_fo(&g, &back, &a).unwrap());
    }

    #[test]
    fn text_format_round_trips(g in structure_strategy()) {
        prop_assert_eq!(read_structure(&write_structure(&g)).unwrap(), g);
    }
}
