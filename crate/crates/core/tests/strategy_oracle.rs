//! The verifier folds relabelings into orbit counts. These tests rebuild the
//! symmetrized strategy by playing the tree under every permutation of the
//! boxes and compare the two.

use std::collections::{BTreeMap, HashMap};

use caching_core::game::k_subsets;
use caching_core::rational::{ratio, Rational};
use caching_core::solver::{best_response_value, solve, SearcherPlan};
use caching_core::strategies::*;
use caching_core::{Error, GameSpec, Query, Step, Variant};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn fresh_boxes(history: &[Step], q: &Query) -> Vec<usize> {
    q.boxes()
        .iter()
        .copied()
        .filter(|&b| history.iter().all(|s| !s.query.contains(b)))
        .collect()
}

type Weights = HashMap<(Vec<Step>, Query), Rational>;

/// `label` maps tree labels to actual boxes. A reveal from an untouched box is
/// followed by swapping labels so that the tree's branch applies.
fn play(node: &Node, label: &[usize], actual: &mut Vec<Step>, canon: &mut Vec<Step>, w: &Rational, out: &mut Weights) {
    let Node::Mix(choices) = node else {
        return;
    };
    for c in choices {
        let w2 = w * &c.p;
        let aq = Query::new(c.query.boxes().iter().map(|&b| label[b]).collect()).unwrap();
        *out.entry((actual.clone(), aq.clone())).or_insert_with(Rational::zero) += &w2;
        let fresh = fresh_boxes(canon, &c.query);
        for &r in aq.boxes() {
            let t = label.iter().position(|&x| x == r).unwrap();
            let mut relabeled = label.to_vec();
            let key = if fresh.contains(&t) {
                let f = fresh[0];
                relabeled.swap(t, f);
                f
            } else {
                t
            };
            if let Some(child) = c.branches.get(&key) {
                actual.push(Step {
                    query: aq.clone(),
                    revealed: r,
                });
                canon.push(Step {
                    query: c.query.clone(),
                    revealed: key,
                });
                play(child, &relabeled, actual, canon, &w2, out);
                actual.pop();
                canon.pop();
            }
        }
    }
}

fn symmetrized_by_enumeration(t: &StrategyTree) -> Weights {
    let perms = permutations(t.n);
    let w = Rational::one() / Rational::from_integer((perms.len() as i64).into());
    let mut out = HashMap::new();
    for p in perms {
        play(&t.root, &p, &mut Vec::new(), &mut Vec::new(), &w, &mut out);
    }
    out
}

struct Explicit(Weights);

impl SearcherPlan for Explicit {
    fn weight(&self, history: &[Step], query: &Query) -> Rational {
        self.0
            .get(&(history.to_vec(), query.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

fn check_against_enumeration(t: &StrategyTree) {
    let folded = t.plan().unwrap();
    let explicit = symmetrized_by_enumeration(t);
    for ((h, q), w) in &explicit {
        assert_eq!(&folded.plan.weight(h, q), w, "weight of {h:?} then {q}");
    }
    for v in [Variant::Adversary, Variant::Random] {
        let s = GameSpec::new(t.n, t.d, t.k, v).unwrap();
        let by_orbits = verify(&s, t).unwrap();
        let by_labels = best_response_value(&s, &Explicit(explicit.clone()), folded.relaxed).unwrap().value;
        assert_eq!(by_orbits, by_labels, "{s}\n{t}");
    }
}

#[test]
fn builtins_match_enumeration() {
    for t in [
        fig432(),
        fig542(),
        family_d2(2).unwrap(),
        family_d2(3).unwrap(),
        family_d3(3).unwrap(),
        family_332(Variant::Adversary).0,
        family_332(Variant::Random).0,
        family_332(Variant::Cooperative).0,
        family_infinite_d(4, 3, 2).unwrap(),
    ] {
        check_against_enumeration(&t);
    }
}

/// Deterministic tree from a byte stream: queries, weights and which
/// branches exist all come from the bytes.
fn random_tree(n: usize, d: usize, k: usize, bytes: &[u8]) -> StrategyTree {
    struct Src<'a>(&'a [u8], usize);
    impl Src<'_> {
        fn next(&mut self) -> usize {
            let b = self.0[self.1 % self.0.len()];
            self.1 += 1;
            b as usize
        }
    }
    fn node(n: usize, d: usize, k: usize, src: &mut Src, history: &mut Vec<Step>) -> Node {
        let subsets: Vec<Query> = (1..=k).flat_map(|s| k_subsets(n, s)).filter(|q| q.len() == k || src.0[0].is_multiple_of(5)).collect();
        let count = 1 + src.next() % 2;
        let raw: Vec<(usize, Query)> = (0..count)
            .map(|_| (1 + src.next() % 4, subsets[src.next() % subsets.len()].clone()))
            .collect();
        let total: usize = raw.iter().map(|(w, _)| w).sum();
        let mut choices = Vec::new();
        for (w, q) in raw {
            let fresh = fresh_boxes(history, &q);
            let mut branches = BTreeMap::new();
            if history.len() + 1 < d {
                for &b in q.boxes() {
                    if (fresh.contains(&b) && b != fresh[0]) || src.next() % 4 == 0 {
                        continue;
                    }
                    history.push(Step {
                        query: q.clone(),
                        revealed: b,
                    });
                    branches.insert(b, node(n, d, k, src, history));
                    history.pop();
                }
            }
            choices.push(Choice {
                p: ratio(w as i64, total as i64),
                query: q,
                branches,
            });
        }
        Node::Mix(choices)
    }
    let mut src = Src(bytes, 0);
    StrategyTree {
        n,
        d,
        k,
        root: node(n, d, k, &mut src, &mut Vec::new()),
    }
}

fn delete_branch(node: &mut Node, target: &mut usize) -> bool {
    let Node::Mix(choices) = node else {
        return false;
    };
    for c in choices {
        let keys: Vec<usize> = c.branches.keys().copied().collect();
        for b in keys {
            if *target == 0 {
                c.branches.remove(&b);
                return true;
            }
            *target -= 1;
            if delete_branch(c.branches.get_mut(&b).unwrap(), target) {
                return true;
            }
        }
    }
    false
}

fn shape() -> impl Strategy<Value = (usize, usize, usize)> {
    prop_oneof![Just((3, 3, 2)), Just((4, 2, 2)), Just((4, 3, 2)), Just((3, 2, 1)), Just((4, 3, 3))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_trees_match_enumeration((n, d, k) in shape(), bytes in proptest::collection::vec(any::<u8>(), 1..64)) {
        let t = random_tree(n, d, k, &bytes);
        check_against_enumeration(&t);
    }

    #[test]
    fn random_trees_stay_below_the_value((n, d, k) in shape(), bytes in proptest::collection::vec(any::<u8>(), 1..64)) {
        let t = random_tree(n, d, k, &bytes);
        for v in [Variant::Adversary, Variant::Random] {
            let s = GameSpec::new(n, d, k, v).unwrap();
            let relaxed = t.plan().unwrap().relaxed;
            let value = caching_core::solver::solve_with(&s, caching_core::solver::SolveOptions { relaxed, ..Default::default() }).unwrap().value;
            prop_assert!(verify(&s, &t).unwrap() <= value);
        }
    }

    #[test]
    fn deleting_a_branch_never_helps((n, d, k) in shape(), bytes in proptest::collection::vec(any::<u8>(), 1..64), pick in any::<usize>()) {
        let t = random_tree(n, d, k, &bytes);
        let mut pruned = t.clone();
        let branches = {
            let mut count = usize::MAX;
            let mut probe = t.clone();
            delete_branch(&mut probe.root, &mut count);
            usize::MAX - count
        };
        prop_assume!(branches > 0);
        let mut target = pick % branches;
        prop_assert!(delete_branch(&mut pruned.root, &mut target));
        for v in [Variant::Adversary, Variant::Random] {
            let s = GameSpec::new(n, d, k, v).unwrap();
            prop_assert!(verify(&s, &pruned).unwrap() <= verify(&s, &t).unwrap());
        }
    }

    #[test]
    fn json_round_trips((n, d, k) in shape(), bytes in proptest::collection::vec(any::<u8>(), 1..64)) {
        let t = random_tree(n, d, k, &bytes);
        let text = t.to_json();
        prop_assert_eq!(StrategyTree::from_json(&text).unwrap(), t.clone());
        let via_serde: StrategyTree = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(via_serde, t);
    }
}

#[test]
fn builtins_round_trip_through_json() {
    for t in [fig432(), fig542(), family_d3(3).unwrap(), family_332(Variant::Random).0] {
        assert_eq!(StrategyTree::from_json(&t.to_json()).unwrap(), t);
    }
}

fn malformed_path(text: &str) -> String {
    match StrategyTree::from_json(text).and_then(|t| t.validate()) {
        Err(Error::MalformedStrategy { path, .. }) => path,
        other => panic!("expected a malformed-strategy error, got {other:?}"),
    }
}

#[test]
fn malformed_trees_name_the_node() {
    let sum = r#"{"n":3,"d":2,"k":2,"root":{"mix":[{"p":"1/2","query":[0,1],"branches":{}}]}}"#;
    assert_eq!(malformed_path(sum), "root");
    let outside = r#"{"n":3,"d":2,"k":2,"root":{"mix":[{"p":"1","query":[0,1],"branches":{"0":{"mix":[{"p":"1","query":[0,2],"branches":{"1":"end"}}]}}}]}}"#;
    assert_eq!(malformed_path(outside), "root.mix[0].branches.0.mix[0]");
    let not_lowest = r#"{"n":3,"d":2,"k":2,"root":{"mix":[{"p":"1","query":[0,1],"branches":{"1":"end"}}]}}"#;
    assert_eq!(malformed_path(not_lowest), "root.mix[0]");
    let too_deep = r#"{"n":3,"d":1,"k":2,"root":{"mix":[{"p":"1","query":[0,1],"branches":{"0":{"mix":[{"p":"1","query":[0,1]}]}}}]}}"#;
    assert_eq!(malformed_path(too_deep), "root.mix[0].branches.0");
    let big_query = r#"{"n":3,"d":1,"k":2,"root":{"mix":[{"p":"1","query":[0,1,2]}]}}"#;
    assert_eq!(malformed_path(big_query), "root.mix[0]");
    let bad_p = r#"{"n":3,"d":1,"k":2,"root":{"mix":[{"p":"x","query":[0,1]}]}}"#;
    assert_eq!(malformed_path(bad_p), "root.mix[0]");
    let negative = r#"{"n":3,"d":1,"k":2,"root":{"mix":[{"p":"-1","query":[0,1]},{"p":"2","query":[0,2]}]}}"#;
    assert_eq!(malformed_path(negative), "root.mix[0]");
    assert_eq!(malformed_path("{not json"), "$");
    assert_eq!(malformed_path(r#"{"n":3,"d":1,"k":2,"root":{"mix":[]}}"#), "root");
}

#[test]
fn missing_branches_mean_giving_up() {
    let t = StrategyTree::from_json(r#"{"n":3,"d":2,"k":2,"root":{"mix":[{"p":"1","query":[0,1]}]}}"#).unwrap();
    let s = GameSpec::new(3, 2, 2, Variant::Adversary).unwrap();
    assert_eq!(verify(&s, &t).unwrap(), Rational::zero());
    let full = family_d2(2).unwrap();
    assert_eq!(verify(&s, &full).unwrap(), solve(&s).unwrap().value);
}
