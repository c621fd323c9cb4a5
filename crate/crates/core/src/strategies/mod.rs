//! Explicit searcher strategies written as trees, and their exact values.
//!
//! A tree is written in canonical labels: whenever a treasure comes out of a
//! box that no earlier query touched, the branch is keyed by the lowest such
//! box of the query. The verifier plays the tree after a uniformly random
//! relabeling of the boxes, so a tree stands for a symmetric mixed strategy.
//! A reveal without a branch means the searcher gives up on that line.

mod families;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{GameSpec, GameState, Query, Step};
use crate::rational::{self, Rational};
use crate::solver::{best_response_value, cooperative_value, BestResponse, OrbitPlan, RevealRule, SearcherPlan};
use crate::symmetry::{canonicalize, Mode};

pub use families::{
    builtin, families, family_332, family_d2, family_d3, family_infinite_d, family_infinite_d_with_budget, fig432, fig542, LeastTreasures,
    StrategyFamily,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyTree {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub root: Node,
}

/// A decision point: either the plan stops, or the searcher mixes over queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    End,
    Mix(Vec<Choice>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Choice {
    #[serde(with = "rational::serde_pq")]
    pub p: Rational,
    pub query: Query,
    /// Continuation keyed by the box the treasure came from.
    pub branches: BTreeMap<usize, Node>,
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Node::End => s.serialize_str("end"),
            Node::Mix(choices) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("mix", choices)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        node_from_value(&v, "root").map_err(D::Error::custom)
    }
}

fn malformed(path: &str, reason: impl Into<String>) -> Error {
    Error::MalformedStrategy {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn node_from_value(v: &Value, path: &str) -> Result<Node> {
    match v {
        Value::String(s) if s == "end" => Ok(Node::End),
        Value::Object(obj) => {
            if let Some(key) = obj.keys().find(|k| *k != "mix") {
                return Err(malformed(path, format!("unexpected field \"{key}\"")));
            }
            let Some(Value::Array(items)) = obj.get("mix") else {
                return Err(malformed(path, "expected a \"mix\" array"));
            };
            items
                .iter()
                .enumerate()
                .map(|(i, item)| choice_from_value(item, &format!("{path}.mix[{i}]")))
                .collect::<Result<Vec<_>>>()
                .map(Node::Mix)
        }
        _ => Err(malformed(path, "expected \"end\" or an object with a \"mix\" array")),
    }
}

fn choice_from_value(v: &Value, path: &str) -> Result<Choice> {
    let Value::Object(obj) = v else {
        return Err(malformed(path, "expected an object"));
    };
    if let Some(key) = obj.keys().find(|k| !["p", "query", "branches"].contains(&k.as_str())) {
        return Err(malformed(path, format!("unexpected field \"{key}\"")));
    }
    let p = match obj.get("p") {
        Some(Value::String(s)) => rational::parse(s).map_err(|e| malformed(path, format!("bad probability: {e}")))?,
        Some(Value::Number(x)) if x.is_u64() => Rational::from_integer(x.as_u64().unwrap().into()),
        _ => return Err(malformed(path, "\"p\" must be a \"p/q\" string")),
    };
    let boxes = match obj.get("query") {
        Some(Value::Array(xs)) => xs
            .iter()
            .map(|x| x.as_u64().map(|b| b as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| malformed(path, "query entries must be box indices"))?,
        _ => return Err(malformed(path, "missing \"query\" array")),
    };
    let query = Query::new(boxes).map_err(|e| malformed(path, e.to_string()))?;
    let mut branches = BTreeMap::new();
    match obj.get("branches") {
        None => {}
        Some(Value::Object(map)) => {
            for (key, child) in map {
                let b: usize = key
                    .parse()
                    .map_err(|_| malformed(path, format!("branch key \"{key}\" is not a box index")))?;
                branches.insert(b, node_from_value(child, &format!("{path}.branches.{b}"))?);
            }
        }
        Some(_) => return Err(malformed(path, "\"branches\" must be an object")),
    }
    Ok(Choice { p, query, branches })
}

impl StrategyTree {
    pub fn from_json(text: &str) -> Result<StrategyTree> {
        let v: Value = serde_json::from_str(text).map_err(|e| malformed("$", e.to_string()))?;
        let field = |name: &str| -> Result<usize> {
            v.get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| malformed("$", format!("missing integer field \"{name}\"")))
        };
        let (n, d, k) = (field("n")?, field("d")?, field("k")?);
        let root = node_from_value(v.get("root").ok_or_else(|| malformed("$", "missing \"root\""))?, "root")?;
        Ok(StrategyTree { n, d, k, root })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy trees serialize")
    }

    /// Checks every node and returns the symmetrized plan.
    pub fn plan(&self) -> Result<TreePlan> {
        let mut walk = PlanWalk {
            tree: self,
            weights: HashMap::new(),
            relaxed: false,
        };
        walk.node(&self.root, &mut Vec::new(), &Rational::one(), &Rational::one(), "root")?;
        Ok(TreePlan {
            plan: OrbitPlan {
                n: self.n,
                mode: Mode::Orbits,
                weights: walk.weights,
                per_stabilizer: true,
            },
            relaxed: walk.relaxed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ())
    }

    /// True when no path queries a box that was queried before without a
    /// treasure coming out of it.
    pub fn never_requeries_unrevealed(&self) -> bool {
        fn go(node: &Node, history: &mut Vec<Step>) -> bool {
            let Node::Mix(choices) = node else {
                return true;
            };
            choices.iter().all(|c| {
                let bad = c.query.boxes().iter().any(|&b| {
                    history.iter().any(|s| s.query.contains(b)) && !history.iter().any(|s| s.revealed == b)
                });
                !bad && c.branches.iter().all(|(&r, child)| {
                    history.push(Step {
                        query: c.query.clone(),
                        revealed: r,
                    });
                    let ok = go(child, history);
                    history.pop();
                    ok
                })
            })
        }
        go(&self.root, &mut Vec::new())
    }

    /// Number of query choices in the tree.
    pub fn size(&self) -> usize {
        fn go(node: &Node) -> usize {
            match node {
                Node::End => 0,
                Node::Mix(cs) => cs.iter().map(|c| 1 + c.branches.values().map(go).sum::<usize>()).sum(),
            }
        }
        go(&self.root)
    }
}

impl fmt::Display for StrategyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(node: &Node, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let Node::Mix(cs) = node else {
                return Ok(());
            };
            for c in cs {
                writeln!(f, "{:indent$}{} {}", "", rational::Pq(&c.p), c.query, indent = 4 * depth)?;
                for (b, child) in &c.branches {
                    writeln!(f, "{:indent$}-> {b}", "", indent = 4 * depth + 2)?;
                    go(child, depth + 1, f)?;
                }
            }
            Ok(())
        }
        writeln!(f, "({},{},{})", self.n, self.d, self.k)?;
        go(&self.root, 0, f)
    }
}

/// Boxes of `q` that no earlier query touched.
fn untouched(history: &[Step], q: &Query) -> Vec<usize> {
    q.boxes()
        .iter()
        .copied()
        .filter(|&b| !history.iter().any(|s| s.query.contains(b)))
        .collect()
}

struct PlanWalk<'a> {
    tree: &'a StrategyTree,
    weights: HashMap<Vec<u8>, Rational>,
    relaxed: bool,
}

impl PlanWalk<'_> {
    /// `weight` is the probability of reaching the node in the tree, `mult`
    /// the number of relabeled reveal sequences folded onto it.
    fn node(&mut self, node: &Node, history: &mut Vec<Step>, weight: &Rational, mult: &Rational, path: &str) -> Result<()> {
        let Node::Mix(choices) = node else {
            return Ok(());
        };
        let t = self.tree;
        if history.len() >= t.d {
            return Err(malformed(path, format!("plan continues past the {} allowed queries", t.d)));
        }
        if choices.is_empty() {
            return Err(malformed(path, "empty mix; use \"end\" to stop"));
        }
        let mut total = Rational::zero();
        for (i, c) in choices.iter().enumerate() {
            let here = format!("{path}.mix[{i}]");
            if c.p.is_negative() {
                return Err(malformed(&here, format!("negative probability {}", rational::Pq(&c.p))));
            }
            c.query
                .check_legal(t.n, t.k, true)
                .map_err(|e| malformed(&here, e.to_string()))?;
            self.relaxed |= c.query.len() < t.k;
            total += &c.p;
            let w = weight * &c.p;
            let key = canonicalize(t.n, None, history, Some(&c.query), Mode::Orbits).key;
            *self.weights.entry(key).or_insert_with(Rational::zero) += &w * mult;
            let fresh = untouched(history, &c.query);
            for (&b, child) in &c.branches {
                if !c.query.contains(b) {
                    return Err(malformed(&here, format!("branch {b} is not in query {}", c.query)));
                }
                let m = if fresh.contains(&b) {
                    if b != fresh[0] {
                        return Err(malformed(
                            &here,
                            format!("branch {b} opens an untouched box; use the lowest such box {}", fresh[0]),
                        ));
                    }
                    Rational::from_integer((fresh.len() as i64).into())
                } else {
                    Rational::one()
                };
                history.push(Step {
                    query: c.query.clone(),
                    revealed: b,
                });
                let r = self.node(child, history, &w, &(mult * m), &format!("{here}.branches.{b}"));
                history.pop();
                r?;
            }
        }
        if !total.is_one() {
            return Err(malformed(path, format!("probabilities sum to {}", rational::Pq(&total))));
        }
        Ok(())
    }
}

/// A tree turned into realization weights over actual sequences.
#[derive(Debug, Clone)]
pub struct TreePlan {
    pub plan: OrbitPlan,
    /// Some query is smaller than k.
    pub relaxed: bool,
}

/// Hides the symmetry of a plan so that every allocation is evaluated; needed
/// when the reveal rule itself depends on box labels.
struct AllAllocations<'a>(&'a dyn SearcherPlan);

impl SearcherPlan for AllAllocations<'_> {
    fn weight(&self, history: &[Step], query: &Query) -> Rational {
        self.0.weight(history, query)
    }
}

fn check_spec(spec: &GameSpec, s: &StrategyTree) -> Result<()> {
    if (spec.n, spec.d, spec.k) != (s.n, s.d, s.k) {
        return Err(Error::StrategyMismatch(format!(
            "strategy is for ({},{},{}), game is {spec}",
            s.n, s.d, s.k
        )));
    }
    Ok(())
}

/// Worst case over hider pure strategies, with the witness.
pub fn verify_detailed(spec: &GameSpec, s: &StrategyTree) -> Result<BestResponse> {
    check_spec(spec, s)?;
    let tp = s.plan()?;
    best_response_value(spec, &tp.plan, tp.relaxed)
}

/// Exact worst-case win probability of the symmetrized tree.
pub fn verify(spec: &GameSpec, s: &StrategyTree) -> Result<Rational> {
    verify_detailed(spec, s).map(|r| r.value)
}

/// Minimum over allocations when reveals follow `rule`.
pub fn joint_verify_cooperative(spec: &GameSpec, s: &StrategyTree, rule: &dyn RevealRule) -> Result<Rational> {
    joint_verify_cooperative_detailed(spec, s, rule).map(|r| r.value)
}

pub fn joint_verify_cooperative_detailed(spec: &GameSpec, s: &StrategyTree, rule: &dyn RevealRule) -> Result<BestResponse> {
    check_spec(spec, s)?;
    let tp = s.plan()?;
    cooperative_value(spec, &AllAllocations(&tp.plan), tp.relaxed, rule)
}

/// Reveal rule taking the lowest-index box holding treasure.
pub fn lowest_box(state: &GameState, q: &Query) -> usize {
    q.boxes()
        .iter()
        .copied()
        .find(|&b| state.remaining.counts[b] > 0)
        .unwrap_or(q.boxes()[0])
}
