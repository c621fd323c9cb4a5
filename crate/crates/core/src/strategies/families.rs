//! Built-in strategy trees.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{untouched, Choice, Node, StrategyTree};
use crate::error::{Error, Result};
use crate::game::{k_subsets, GameState, Query, Step, Variant};
use crate::rational::{binomial_r, ratio, Rational};
use crate::solver::{RevealRule, DEFAULT_BUDGET};

fn q(boxes: impl IntoIterator<Item = usize>) -> Query {
    Query::new(boxes.into_iter().collect()).expect("distinct boxes")
}

fn choice(p: Rational, query: Query, branches: Vec<(usize, Node)>) -> Choice {
    Choice {
        p,
        query,
        branches: branches.into_iter().collect::<BTreeMap<_, _>>(),
    }
}

fn pure(query: Query, branches: Vec<(usize, Node)>) -> Node {
    Node::Mix(vec![choice(Rational::one(), query, branches)])
}

/// A last query; what follows it does not matter.
fn last(query: Query) -> Node {
    pure(query, Vec::new())
}

fn mix(choices: Vec<Choice>) -> Node {
    Node::Mix(choices.into_iter().filter(|c| !c.p.is_zero()).collect())
}

fn tree(n: usize, d: usize, k: usize, root: Node) -> StrategyTree {
    StrategyTree { n, d, k, root }
}

fn domain(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSpec(what.to_string()))
    }
}

/// The (4,3,2) strategy; the k = 2 case of [`family_d3`] written out.
pub fn fig432() -> StrategyTree {
    let second = mix(vec![
        choice(ratio(4, 5), q([0, 2]), vec![(0, last(q([0, 3]))), (2, last(q([2, 3])))]),
        choice(ratio(1, 5), q([2, 3]), vec![(2, last(q([0, 2])))]),
    ]);
    tree(4, 3, 2, pure(q([0, 1]), vec![(0, second)]))
}

/// d = 2 on n = 2k - 1 boxes.
pub fn family_d2(k: usize) -> Result<StrategyTree> {
    domain(k >= 1, "family d2 needs k >= 1")?;
    let n = 2 * k - 1;
    let second = last(q(std::iter::once(0).chain(k..n)));
    Ok(tree(n, 2, k, pure(q(0..k), vec![(0, second)])))
}

/// d = 3 on n = 3k - 2 boxes.
pub fn family_d3(k: usize) -> Result<StrategyTree> {
    domain(k >= 1, "family d3 needs k >= 1")?;
    let n = 3 * k - 2;
    let p = Rational::from_integer((n * k * k).into()) / binomial_r(n as u64 + 2, 3);
    let tail = 2 * k - 1..n;
    let again = choice(
        p.clone(),
        q(std::iter::once(0).chain(k..2 * k - 1)),
        vec![
            (0, last(q(std::iter::once(0).chain(tail.clone())))),
            (k, last(q(std::iter::once(k).chain(tail)))),
        ],
    );
    let fresh = choice(
        Rational::one() - p,
        q(k..(2 * k).min(n)),
        vec![(k, last(q([0, k].into_iter().chain(2 * k..n))))],
    );
    Ok(tree(n, 3, k, pure(q(0..k), vec![(0, mix(vec![again, fresh]))])))
}

/// The (5,4,2) strategy.
pub fn fig542() -> StrategyTree {
    let third = ratio(1, 3);
    let after_revisit = vec![
        (0, pure(q([0, 3]), vec![(0, last(q([0, 4]))), (3, last(q([3, 4])))])),
        (2, pure(q([2, 3]), vec![(2, last(q([2, 4]))), (3, last(q([3, 4])))])),
    ];
    let after_fresh = mix(vec![
        choice(third.clone(), q([2, 4]), vec![(2, last(q([0, 2]))), (4, last(q([0, 4])))]),
        choice(third.clone(), q([0, 4]), vec![(0, last(q([0, 2]))), (4, last(q([2, 4])))]),
        choice(third, q([0, 2]), vec![(0, last(q([0, 4]))), (2, last(q([2, 4])))]),
    ]);
    let second = mix(vec![
        choice(ratio(4, 7), q([0, 2]), after_revisit),
        choice(ratio(3, 7), q([2, 3]), vec![(2, after_fresh)]),
    ]);
    tree(5, 4, 2, pure(q([0, 1]), vec![(0, second)]))
}

/// Reveal rule of the cooperative (3,3,2) strategy: the queried box with the
/// fewest remaining treasures, lowest index on ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeastTreasures;

impl RevealRule for LeastTreasures {
    fn choose(&self, state: &GameState, query: &Query) -> usize {
        let counts = &state.remaining.counts;
        query
            .boxes()
            .iter()
            .copied()
            .filter(|&b| counts[b] > 0)
            .min_by_key(|&b| (counts[b], b))
            .unwrap_or(query.boxes()[0])
    }
}

/// The (3,3,2) strategies; the cooperative one comes with its reveal rule.
pub fn family_332(variant: Variant) -> (StrategyTree, Option<LeastTreasures>) {
    let half = ratio(1, 2);
    match variant {
        Variant::Adversary => {
            let second = mix(vec![
                choice(
                    ratio(3, 10),
                    q([0, 1]),
                    vec![(0, last(q([0, 2]))), (1, last(q([1, 2])))],
                ),
                choice(
                    ratio(6, 10),
                    q([0, 2]),
                    vec![
                        (0, mix(vec![choice(half.clone(), q([0, 1]), vec![]), choice(half.clone(), q([0, 2]), vec![])])),
                        (2, mix(vec![choice(half.clone(), q([0, 2]), vec![]), choice(half, q([1, 2]), vec![])])),
                    ],
                ),
                choice(
                    ratio(1, 10),
                    q([1, 2]),
                    vec![(1, last(q([0, 1]))), (2, last(q([0, 2])))],
                ),
            ]);
            (tree(3, 3, 2, pure(q([0, 1]), vec![(0, second)])), None)
        }
        Variant::Random => {
            let second = mix(vec![
                choice(
                    ratio(18, 19),
                    q([0, 2]),
                    vec![
                        (0, last(q([0, 1]))),
                        (
                            2,
                            mix(vec![
                                choice(ratio(1, 3), q([0, 2]), vec![]),
                                choice(ratio(2, 3), q([1, 2]), vec![]),
                            ]),
                        ),
                    ],
                ),
                choice(
                    ratio(1, 19),
                    q([1, 2]),
                    vec![(1, last(q([0, 1]))), (2, last(q([0, 2])))],
                ),
            ]);
            (tree(3, 3, 2, pure(q([0, 1]), vec![(0, second)])), None)
        }
        Variant::Cooperative => {
            let second = pure(q([0, 1]), vec![(0, last(q([0, 2]))), (1, last(q([1, 2])))]);
            (tree(3, 3, 2, pure(q([0, 1]), vec![(0, second)])), Some(LeastTreasures))
        }
    }
}

/// Keep querying the box the last treasure came from, together with k - 1
/// other boxes chosen uniformly.
pub fn family_infinite_d(n: usize, d: usize, k: usize) -> Result<StrategyTree> {
    family_infinite_d_with_budget(n, d, k, DEFAULT_BUDGET)
}

pub fn family_infinite_d_with_budget(n: usize, d: usize, k: usize, budget: u64) -> Result<StrategyTree> {
    domain(k >= 2 && k <= n, "family infinite-d needs 2 <= k <= n")?;
    let companions = k_subsets(n - 1, k - 1);
    let p = Rational::one() / Rational::from_integer((companions.len() as i64).into());
    let mut built = 0u64;
    fn node(
        d: usize,
        companions: &[Query],
        p: &Rational,
        history: &mut Vec<Step>,
        built: &mut u64,
        budget: u64,
    ) -> Result<Node> {
        if history.len() == d {
            return Ok(Node::End);
        }
        let queries: Vec<(Rational, Query)> = match history.last() {
            None => vec![(Rational::one(), q(0..companions[0].len() + 1))],
            Some(step) => {
                let r = step.revealed;
                companions
                    .iter()
                    .map(|c| (p.clone(), q(std::iter::once(r).chain(c.boxes().iter().map(|&b| if b >= r { b + 1 } else { b })))))
                    .collect()
            }
        };
        let mut choices = Vec::with_capacity(queries.len());
        for (prob, query) in queries {
            *built += 1;
            if *built > budget {
                return Err(Error::BudgetExceeded { budget, explored: *built });
            }
            let fresh = untouched(history, &query);
            let mut branches = BTreeMap::new();
            if history.len() + 1 < d {
                for &b in query.boxes() {
                    if fresh.contains(&b) && b != fresh[0] {
                        continue;
                    }
                    history.push(Step {
                        query: query.clone(),
                        revealed: b,
                    });
                    let child = node(d, companions, p, history, built, budget);
                    history.pop();
                    branches.insert(b, child?);
                }
            }
            choices.push(Choice { p: prob, query, branches });
        }
        Ok(Node::Mix(choices))
    }
    let root = node(d, &companions, &p, &mut Vec::new(), &mut built, budget)?;
    Ok(tree(n, d, k, root))
}

/// A named constructor exposed to the command line.
pub struct StrategyFamily {
    pub name: &'static str,
    /// Which of n, d, k the caller supplies, and the constraint on them.
    pub domain: &'static str,
    build: fn(Option<usize>, Option<usize>, Option<usize>) -> Result<StrategyTree>,
}

impl StrategyFamily {
    pub fn build(&self, n: Option<usize>, d: Option<usize>, k: Option<usize>) -> Result<StrategyTree> {
        (self.build)(n, d, k)
    }
}

fn need(x: Option<usize>, name: &str, family: &str) -> Result<usize> {
    x.ok_or_else(|| Error::InvalidSpec(format!("family {family} needs --{name}")))
}

static FAMILIES: [StrategyFamily; 8] = [
    StrategyFamily {
        name: "fig432",
        domain: "fixed (4,3,2)",
        build: |_, _, _| Ok(fig432()),
    },
    StrategyFamily {
        name: "d2",
        domain: "k >= 1; n = 2k-1, d = 2",
        build: |_, _, k| family_d2(need(k, "k", "d2")?),
    },
    StrategyFamily {
        name: "d3",
        domain: "k >= 1; n = 3k-2, d = 3",
        build: |_, _, k| family_d3(need(k, "k", "d3")?),
    },
    StrategyFamily {
        name: "fig542",
        domain: "fixed (5,4,2)",
        build: |_, _, _| Ok(fig542()),
    },
    StrategyFamily {
        name: "adversary332",
        domain: "fixed (3,3,2)",
        build: |_, _, _| Ok(family_332(Variant::Adversary).0),
    },
    StrategyFamily {
        name: "random332",
        domain: "fixed (3,3,2)",
        build: |_, _, _| Ok(family_332(Variant::Random).0),
    },
    StrategyFamily {
        name: "cooperative332",
        domain: "fixed (3,3,2), reveals by the fewest-treasures rule",
        build: |_, _, _| Ok(family_332(Variant::Cooperative).0),
    },
    StrategyFamily {
        name: "infinite-d",
        domain: "n, d, k with 2 <= k <= n",
        build: |n, d, k| family_infinite_d(need(n, "n", "infinite-d")?, need(d, "d", "infinite-d")?, need(k, "k", "infinite-d")?),
    },
];

pub fn families() -> &'static [StrategyFamily] {
    &FAMILIES
}

pub fn builtin(name: &str, n: Option<usize>, d: Option<usize>, k: Option<usize>) -> Result<StrategyTree> {
    FAMILIES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| {
            let names: Vec<&str> = FAMILIES.iter().map(|f| f.name).collect();
            Error::InvalidSpec(format!("unknown family {name:?}; known: {}", names.join(", ")))
        })?
        .build(n, d, k)
}
