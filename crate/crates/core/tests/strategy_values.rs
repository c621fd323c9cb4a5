use caching_core::game::{lower_bound_infinite_d, upper_bound_combinatorial, upper_bound_first_query};
use caching_core::rational::{binomial_r, ratio, Rational};
use caching_core::solver::solve;
use caching_core::strategies::*;
use caching_core::{Error, GameSpec, Query, Variant};
use std::collections::BTreeMap;

fn spec(n: usize, d: usize, k: usize, v: Variant) -> GameSpec {
    GameSpec::new(n, d, k, v).unwrap()
}

fn both(t: &StrategyTree) -> (Rational, Rational) {
    (
        verify(&spec(t.n, t.d, t.k, Variant::Adversary), t).unwrap(),
        verify(&spec(t.n, t.d, t.k, Variant::Random), t).unwrap(),
    )
}

fn cube_over_binomial(k: usize, d: u32) -> Rational {
    Rational::from_integer((k.pow(d) as i64).into()) / binomial_r((d as usize * k) as u64, d as u64)
}

#[test]
fn fig432_reaches_two_fifths() {
    let t = fig432();
    assert_eq!(both(&t), (ratio(2, 5), ratio(2, 5)));
    assert_eq!(t, family_d3(2).unwrap());
}

#[test]
fn d2_family_meets_the_bound() {
    for k in 1..=4 {
        let t = family_d2(k).unwrap();
        let (adv, rnd) = both(&t);
        assert_eq!(adv, cube_over_binomial(k, 2), "k = {k}");
        assert_eq!(adv, rnd, "k = {k}");
        assert_eq!(adv, upper_bound_first_query(t.n, k));
    }
    assert_eq!(verify(&spec(3, 2, 2, Variant::Adversary), &family_d2(2).unwrap()).unwrap(), ratio(2, 3));
    assert_eq!(verify(&spec(5, 2, 3, Variant::Adversary), &family_d2(3).unwrap()).unwrap(), ratio(3, 5));
}

#[test]
fn d3_family_meets_the_bound() {
    for (k, want) in [(2, ratio(2, 5)), (3, ratio(9, 28)), (4, ratio(16, 55))] {
        let t = family_d3(k).unwrap();
        let (adv, rnd) = both(&t);
        assert_eq!(adv, want, "k = {k}");
        assert_eq!(adv, cube_over_binomial(k, 3), "k = {k}");
        assert_eq!(adv, upper_bound_combinatorial(t.n, 3, k));
        assert_eq!(adv, rnd, "k = {k}");
    }
}

#[test]
fn fig542_reaches_the_bound() {
    let t = fig542();
    let v = verify(&spec(5, 4, 2, Variant::Adversary), &t).unwrap();
    assert_eq!(v, ratio(8, 35));
    assert_eq!(v, upper_bound_combinatorial(5, 4, 2));
}

#[test]
fn three_three_two_trio() {
    let (adv, _) = family_332(Variant::Adversary);
    assert_eq!(verify(&spec(3, 3, 2, Variant::Adversary), &adv).unwrap(), ratio(3, 5));
    let (rnd, _) = family_332(Variant::Random);
    assert_eq!(verify(&spec(3, 3, 2, Variant::Random), &rnd).unwrap(), ratio(12, 19));
    let (coop, rule) = family_332(Variant::Cooperative);
    let rule = rule.expect("cooperative tree carries its rule");
    assert_eq!(
        joint_verify_cooperative(&spec(3, 3, 2, Variant::Cooperative), &coop, &rule).unwrap(),
        ratio(2, 3)
    );
}

#[test]
fn builtin_values_never_beat_the_game_value() {
    for (t, v) in [
        (fig432(), Variant::Adversary),
        (family_d2(2).unwrap(), Variant::Random),
        (family_d3(2).unwrap(), Variant::Random),
        (family_332(Variant::Adversary).0, Variant::Adversary),
        (family_332(Variant::Random).0, Variant::Random),
        (family_332(Variant::Adversary).0, Variant::Random),
        (family_infinite_d(3, 3, 2).unwrap(), Variant::Adversary),
    ] {
        let s = spec(t.n, t.d, t.k, v);
        assert!(verify(&s, &t).unwrap() <= solve(&s).unwrap().value, "{s}");
    }
}

#[test]
fn single_query_finds_k_over_n() {
    for (n, k) in [(3, 2), (5, 2), (6, 4), (1, 1)] {
        let root = Node::Mix(vec![Choice {
            p: Rational::from_integer(1.into()),
            query: Query::new((0..k).collect()).unwrap(),
            branches: BTreeMap::new(),
        }]);
        let t = StrategyTree { n, d: 1, k, root };
        assert_eq!(both(&t), (ratio(k as i64, n as i64), ratio(k as i64, n as i64)));
    }
}

#[test]
fn following_the_last_treasure_keeps_a_floor() {
    let floor = lower_bound_infinite_d(3, 2).unwrap();
    for d in 1..=5 {
        let t = family_infinite_d(3, d, 2).unwrap();
        let v = verify(&spec(3, d, 2, Variant::Adversary), &t).unwrap();
        assert!(v >= floor, "d = {d}: {v}");
        if d == 1 {
            assert_eq!(v, ratio(2, 3));
        }
    }
    let t = family_infinite_d(4, 3, 2).unwrap();
    let v = verify(&spec(4, 3, 2, Variant::Adversary), &t).unwrap();
    assert!(v >= lower_bound_infinite_d(4, 2).unwrap());
    assert!(matches!(
        family_infinite_d_with_budget(5, 6, 3, 100),
        Err(Error::BudgetExceeded { .. })
    ));
    assert!(family_infinite_d(3, 2, 1).is_err());
}

#[test]
fn revealed_boxes_only_families_ignore_the_revealer() {
    let trees = [
        fig432(),
        fig542(),
        family_d2(2).unwrap(),
        family_d2(3).unwrap(),
        family_d3(2).unwrap(),
        family_d3(3).unwrap(),
    ];
    for t in &trees {
        assert!(t.never_requeries_unrevealed(), "{t}");
        let (adv, rnd) = both(t);
        assert_eq!(adv, rnd, "{t}");
    }
    assert!(!family_332(Variant::Adversary).0.never_requeries_unrevealed());
}

#[test]
fn cooperative_rule_checks() {
    // One treasure: reveals never matter.
    let root = Node::Mix(vec![Choice {
        p: Rational::from_integer(1.into()),
        query: Query::new(vec![0, 1]).unwrap(),
        branches: BTreeMap::new(),
    }]);
    let t = StrategyTree { n: 3, d: 1, k: 2, root };
    let s = spec(3, 1, 2, Variant::Cooperative);
    assert_eq!(joint_verify_cooperative(&s, &t, &LeastTreasures).unwrap(), ratio(2, 3));
    assert_eq!(joint_verify_cooperative(&s, &t, &lowest_box).unwrap(), ratio(2, 3));

    // Without re-queries the revealer's choice is irrelevant.
    let t = fig432();
    let s = spec(4, 3, 2, Variant::Cooperative);
    assert_eq!(joint_verify_cooperative(&s, &t, &lowest_box).unwrap(), ratio(2, 5));

    // A rule naming an empty box is rejected.
    let bad = |_: &caching_core::GameState, q: &Query| q.boxes()[0];
    let err = joint_verify_cooperative(&spec(3, 3, 2, Variant::Cooperative), &family_332(Variant::Cooperative).0, &bad);
    assert!(matches!(err, Err(Error::IllegalMove(_))));
}

#[test]
fn builtins_are_reachable_by_name() {
    assert_eq!(builtin("fig432", None, None, None).unwrap(), fig432());
    assert_eq!(builtin("d3", None, None, Some(3)).unwrap(), family_d3(3).unwrap());
    assert!(builtin("d3", None, None, None).is_err());
    assert!(builtin("nope", None, None, None).is_err());
    for f in families() {
        let t = match f.name {
            "d2" | "d3" => f.build(None, None, Some(2)),
            "infinite-d" => f.build(Some(3), Some(2), Some(2)),
            _ => f.build(None, None, None),
        }
        .unwrap();
        t.validate().unwrap();
    }
}

#[test]
fn mismatched_game_is_rejected() {
    assert!(matches!(
        verify(&spec(4, 2, 2, Variant::Adversary), &fig432()),
        Err(Error::StrategyMismatch(_))
    ));
}
