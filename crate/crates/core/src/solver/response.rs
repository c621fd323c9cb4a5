//! Best responses against fixed strategies.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{representative_allocations, SearcherPlan, SolveResult};
use crate::error::{Error, Result};
use crate::game::{apply_move, enumerate_allocations, legal_queries, legal_reveals, Allocation, GameSpec, GameState, Query, Step, Variant};
use crate::rational::{self, Rational};
use crate::symmetry::{canonicalize, Mode};

/// A cooperative revealer: picks the box to reveal from.
pub trait RevealRule {
    fn choose(&self, state: &GameState, query: &Query) -> usize;
}

impl<F: Fn(&GameState, &Query) -> usize> RevealRule for F {
    fn choose(&self, state: &GameState, query: &Query) -> usize {
        self(state, query)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealChoice {
    pub history: Vec<Step>,
    pub query: Query,
    pub revealed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponse {
    #[serde(with = "rational::serde_pq")]
    pub value: Rational,
    /// A minimizing allocation.
    pub allocation: Allocation,
    /// The adversary's reveal choices against it (empty unless adversarial).
    pub reveals: Vec<RevealChoice>,
    /// Searcher win probability per allocation; one entry per orbit when the
    /// plan is symmetric.
    pub per_allocation: Vec<AllocationValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationValue {
    pub allocation: Allocation,
    #[serde(with = "rational::serde_pq")]
    pub value: Rational,
}

enum Revealer<'a> {
    Adversary,
    Random,
    Rule(&'a dyn RevealRule),
}

struct Evaluator<'a> {
    d: usize,
    plan: &'a dyn SearcherPlan,
    queries: Vec<Query>,
    revealer: Revealer<'a>,
}

impl Evaluator<'_> {
    /// Searcher win probability from `state`, carried by realization weights.
    fn value(&self, state: &GameState, record: &mut Option<Vec<RevealChoice>>) -> Result<Rational> {
        let mut total = Rational::zero();
        if state.history.len() >= self.d {
            return Ok(total);
        }
        for q in &self.queries {
            let x = self.plan.weight(&state.history, q);
            if x.is_zero() {
                continue;
            }
            let reveals = legal_reveals(state, q, Variant::Random);
            if reveals.is_empty() {
                continue;
            }
            let outcome = |b: usize, record: &mut Option<Vec<RevealChoice>>| -> Result<Rational> {
                let next = apply_move(state, q, b)?;
                if next.is_won() {
                    Ok(x.clone())
                } else {
                    self.value(&next, record)
                }
            };
            let v = match &self.revealer {
                Revealer::Random => {
                    let mut acc = Rational::zero();
                    for (b, w) in &reveals {
                        acc += w * outcome(*b, record)?;
                    }
                    acc
                }
                Revealer::Rule(rule) => {
                    let b = rule.choose(state, q);
                    if !reveals.iter().any(|(r, _)| *r == b) {
                        return Err(Error::IllegalMove(format!(
                            "reveal rule chose box {b}, which has no treasure in query {q}"
                        )));
                    }
                    outcome(b, record)?
                }
                Revealer::Adversary => {
                    let mut best: Option<(usize, Rational)> = None;
                    for (b, _) in &reveals {
                        let v = outcome(*b, &mut None)?;
                        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                            best = Some((*b, v));
                        }
                    }
                    let (b, v) = best.expect("non-empty reveals");
                    if record.is_some() {
                        if reveals.len() > 1 {
                            record.as_mut().unwrap().push(RevealChoice {
                                history: state.history.clone(),
                                query: q.clone(),
                                revealed: b,
                            });
                        }
                        outcome(b, record)?;
                    }
                    v
                }
            };
            total += v;
        }
        Ok(total)
    }
}

fn run(spec: &GameSpec, plan: &dyn SearcherPlan, relaxed: bool, revealer: Revealer<'_>) -> Result<BestResponse> {
    let eval = Evaluator {
        d: spec.d,
        plan,
        queries: legal_queries(spec.n, spec.k, relaxed),
        revealer,
    };
    let allocations = if plan.is_symmetric() {
        representative_allocations(spec.n, spec.d as u32, Mode::Orbits)
    } else {
        enumerate_allocations(spec.n, spec.d as u32)
    };
    let mut per_allocation: Vec<AllocationValue> = Vec::with_capacity(allocations.len());
    let mut best: Option<usize> = None;
    for a in allocations {
        let v = if spec.d == 0 {
            Rational::one()
        } else {
            eval.value(&GameState::initial(a.clone()), &mut None)?
        };
        if best.is_none_or(|i| v < per_allocation[i].value) {
            best = Some(per_allocation.len());
        }
        per_allocation.push(AllocationValue { allocation: a, value: v });
    }
    let AllocationValue { allocation, value } = per_allocation[best.expect("at least one allocation")].clone();
    let mut record = Some(Vec::new());
    if spec.d > 0 {
        eval.value(&GameState::initial(allocation.clone()), &mut record)?;
    }
    Ok(BestResponse {
        value,
        allocation,
        reveals: record.unwrap_or_default(),
        per_allocation,
    })
}

/// Minimum over hider pure strategies of the searcher's win probability.
///
/// The adversary picks allocation and reveals; against the random revealer
/// only the allocation is chosen and reveals are averaged.
pub fn best_response_value(spec: &GameSpec, plan: &dyn SearcherPlan, relaxed: bool) -> Result<BestResponse> {
    let revealer = match spec.variant {
        Variant::Adversary => Revealer::Adversary,
        Variant::Random => Revealer::Random,
        Variant::Cooperative => {
            return Err(Error::Precondition("the cooperative variant needs a reveal rule".into()));
        }
    };
    run(spec, plan, relaxed, revealer)
}

/// Minimum over allocations when reveals follow `rule`.
pub fn cooperative_value(spec: &GameSpec, plan: &dyn SearcherPlan, relaxed: bool, rule: &dyn RevealRule) -> Result<BestResponse> {
    run(spec, plan, relaxed, Revealer::Rule(rule))
}

/// How the hider answers a query holding treasure in several boxes.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum RevealPolicy {
    /// Uniform over the boxes holding treasure.
    Uniform,
    /// The four-parameter policy for three boxes and queries of size two.
    /// Boxes are named by their role: `b1` is the first revealed box, `y` the
    /// other box of the first query, `z` the box outside it.
    ///
    /// * `q1`: allocation `b1=2, z=1`; second query `{b1, z}`; reveal `b1`.
    /// * `q2`: first query holds counts 1 and 2; reveal from the 1-box.
    /// * `q3`: allocation `b1=2, y=1`; second query `{b1, y}`; reveal `b1`.
    /// * `q4`: allocation `(1,1,1)`; second query `{y, z}`; reveal `y`.
    ///
    /// Every other choice is uniform.
    FourParameter { q1: Rational, q2: Rational, q3: Rational, q4: Rational },
    /// Realization weights per hider sequence key, as produced by the LP.
    Plan { mode: Mode, weights: HashMap<Vec<u8>, Rational> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiderStrategy {
    pub allocations: Vec<(Allocation, Rational)>,
    pub policy: RevealPolicy,
}

fn pair(p: Rational, first: usize, second: usize) -> Vec<(usize, Rational)> {
    let rest = Rational::one() - &p;
    vec![(first, p), (second, rest)]
}

impl RevealPolicy {
    fn distribution(&self, n: usize, initial: &Allocation, state: &GameState, q: &Query) -> Vec<(usize, Rational)> {
        let boxes: Vec<usize> = q.boxes().iter().copied().filter(|&b| state.remaining.counts[b] > 0).collect();
        let uniform = || {
            let w = rational::ratio(1, boxes.len() as i64);
            boxes.iter().map(|&b| (b, w.clone())).collect::<Vec<_>>()
        };
        match self {
            RevealPolicy::Uniform => uniform(),
            RevealPolicy::FourParameter { q1, q2, q3, q4 } => {
                if n != 3 || boxes.len() != 2 || q.len() != 2 {
                    return uniform();
                }
                let a = &initial.counts;
                let h = &state.history;
                if h.is_empty() {
                    let (x, y) = (boxes[0], boxes[1]);
                    return match (a[x], a[y]) {
                        (1, 2) => pair(q2.clone(), x, y),
                        (2, 1) => pair(q2.clone(), y, x),
                        _ => uniform(),
                    };
                }
                if h.len() != 1 || h[0].query.len() != 2 {
                    return uniform();
                }
                let b1 = h[0].revealed;
                let y = *h[0].query.boxes().iter().find(|&&b| b != b1).expect("two boxes");
                let z = 3 - b1 - y;
                let asked = |u: usize, v: usize| q.contains(u) && q.contains(v);
                if a[b1] == 2 && a[y] == 1 && asked(b1, y) {
                    pair(q3.clone(), b1, y)
                } else if a[b1] == 2 && a[z] == 1 && asked(b1, z) {
                    pair(q1.clone(), b1, z)
                } else if a.iter().all(|&c| c == 1) && asked(y, z) {
                    pair(q4.clone(), y, z)
                } else {
                    uniform()
                }
            }
            RevealPolicy::Plan { mode, weights } => {
                let ys: Vec<Rational> = boxes
                    .iter()
                    .map(|&b| {
                        let mut hist = state.history.clone();
                        hist.push(Step {
                            query: q.clone(),
                            revealed: b,
                        });
                        let key = canonicalize(n, Some(&initial.counts), &hist, None, *mode).key;
                        weights.get(&key).cloned().unwrap_or_else(Rational::zero)
                    })
                    .collect();
                let total: Rational = ys.iter().sum();
                if total.is_zero() {
                    uniform()
                } else {
                    boxes.iter().zip(ys).map(|(&b, y)| (b, y / &total)).collect()
                }
            }
        }
    }
}

impl HiderStrategy {
    /// Spreads each class weight uniformly over the allocations whose sorted
    /// counts equal the class profile.
    pub fn from_profiles(n: usize, d: u32, classes: &[(Vec<u32>, Rational)], policy: RevealPolicy) -> Result<Self> {
        let all = enumerate_allocations(n, d);
        let mut allocations = Vec::new();
        for (profile, w) in classes {
            let mut p = profile.clone();
            p.resize(n, 0);
            p.sort_unstable_by(|a, b| b.cmp(a));
            let members: Vec<&Allocation> = all.iter().filter(|a| a.profile() == p).collect();
            if members.is_empty() {
                return Err(Error::InvalidHiderStrategy(format!("no allocation has profile {profile:?}")));
            }
            let each = w / rational::int(members.len() as i64);
            allocations.extend(members.into_iter().map(|a| (a.clone(), each.clone())));
        }
        Ok(HiderStrategy { allocations, policy })
    }

    /// The uniform distribution over all allocations.
    pub fn uniform(n: usize, d: u32) -> Self {
        let all = enumerate_allocations(n, d);
        let w = rational::ratio(1, all.len() as i64);
        HiderStrategy {
            allocations: all.into_iter().map(|a| (a, w.clone())).collect(),
            policy: RevealPolicy::Uniform,
        }
    }

    /// The hider's optimal strategy read off the LP duals.
    pub fn from_solve(result: &SolveResult) -> Self {
        let mode = result.mode();
        let weights: HashMap<Vec<u8>, Rational> = result
            .hider_plan
            .iter()
            .map(|e| (canonicalize(result.n, Some(&e.allocation.counts), &e.history, None, mode).key, e.weight.clone()))
            .collect();
        let allocations = enumerate_allocations(result.n, result.d as u32)
            .into_iter()
            .map(|a| {
                let key = canonicalize(result.n, Some(&a.counts), &[], None, mode).key;
                let w = weights.get(&key).cloned().unwrap_or_else(Rational::zero);
                (a, w)
            })
            .filter(|(_, w)| !w.is_zero())
            .collect();
        HiderStrategy {
            allocations,
            policy: RevealPolicy::Plan { mode, weights },
        }
    }

    fn validate(&self, spec: &GameSpec) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHiderStrategy(m));
        let mut total = Rational::zero();
        let mut seen = std::collections::HashSet::new();
        for (a, w) in &self.allocations {
            if a.n() != spec.n || a.total() as usize != spec.d {
                return bad(format!("allocation {a} does not place {} treasures in {} boxes", spec.d, spec.n));
            }
            if w.is_negative() {
                return bad(format!("negative weight {w} on {a}"));
            }
            if !seen.insert(a.clone()) {
                return bad(format!("allocation {a} listed twice"));
            }
            total += w;
        }
        if !total.is_one() {
            return bad(format!("allocation weights sum to {total}"));
        }
        if let RevealPolicy::FourParameter { q1, q2, q3, q4 } = &self.policy {
            for q in [q1, q2, q3, q4] {
                if q.is_negative() || *q > Rational::one() {
                    return bad(format!("reveal parameter {q} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiderValue {
    #[serde(with = "rational::serde_pq")]
    pub value: Rational,
    /// A best pure searcher reply: the query chosen after each reachable history.
    pub searcher: Vec<(Vec<Step>, Query)>,
}

struct Particle {
    initial: usize,
    state: GameState,
    mass: Rational,
}

struct HiderEval<'a> {
    spec: &'a GameSpec,
    hider: &'a HiderStrategy,
    queries: Vec<Query>,
}

/// Searcher sequences, each a history and the query made after it.
type Line = Vec<(Vec<Step>, Query)>;

impl HiderEval<'_> {
    fn best(&self, history: &[Step], particles: &[Particle]) -> Result<(Rational, Line)> {
        let mut best: Option<(Rational, Query, Line)> = None;
        for q in &self.queries {
            let mut won = Rational::zero();
            let mut groups: BTreeMap<usize, Vec<Particle>> = BTreeMap::new();
            for p in particles {
                let reveals = legal_reveals(&p.state, q, self.spec.variant);
                if reveals.is_empty() {
                    continue;
                }
                let dist = match self.spec.variant {
                    Variant::Random => reveals,
                    _ if reveals.len() == 1 => vec![(reveals[0].0, Rational::one())],
                    _ => {
                        let initial = &self.hider.allocations[p.initial].0;
                        let dist = self.hider.policy.distribution(self.spec.n, initial, &p.state, q);
                        check_distribution(&dist, &p.state, q)?;
                        dist
                    }
                };
                for (b, w) in dist {
                    if w.is_zero() {
                        continue;
                    }
                    let next = apply_move(&p.state, q, b)?;
                    let mass = &p.mass * w;
                    if next.is_won() {
                        won += mass;
                    } else {
                        groups.entry(b).or_default().push(Particle {
                            initial: p.initial,
                            state: next,
                            mass,
                        });
                    }
                }
            }
            let mut total = won;
            let mut plan = Vec::new();
            for (b, group) in groups {
                let mut h = history.to_vec();
                h.push(Step {
                    query: q.clone(),
                    revealed: b,
                });
                let (v, sub) = self.best(&h, &group)?;
                total += v;
                plan.extend(sub);
            }
            if best.as_ref().is_none_or(|(bv, _, _)| total > *bv) {
                best = Some((total, q.clone(), plan));
            }
        }
        let (v, q, mut plan) = best.expect("at least one query");
        plan.insert(0, (history.to_vec(), q));
        Ok((v, plan))
    }
}

fn check_distribution(dist: &[(usize, Rational)], state: &GameState, q: &Query) -> Result<()> {
    let total: Rational = dist.iter().map(|(_, w)| w).sum();
    let ok = total.is_one()
        && dist
            .iter()
            .all(|(b, w)| !w.is_negative() && q.contains(*b) && state.remaining.counts[*b] > 0);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidHiderStrategy(format!(
            "reveal distribution {dist:?} is not a distribution over the loaded boxes of {q}"
        )))
    }
}

/// Maximum over searcher pure strategies of the win probability against a
/// fixed hider strategy: an upper bound on the game value.
pub fn hider_strategy_value(spec: &GameSpec, hider: &HiderStrategy, relaxed: bool) -> Result<HiderValue> {
    if spec.variant == Variant::Cooperative {
        return Err(Error::Precondition("a hider strategy does not control cooperative reveals".into()));
    }
    hider.validate(spec)?;
    if spec.d == 0 {
        return Ok(HiderValue {
            value: Rational::one(),
            searcher: Vec::new(),
        });
    }
    let eval = HiderEval {
        spec,
        hider,
        queries: legal_queries(spec.n, spec.k, relaxed),
    };
    let particles: Vec<Particle> = hider
        .allocations
        .iter()
        .enumerate()
        .filter(|(_, (_, w))| !w.is_zero())
        .map(|(i, (a, w))| Particle {
            initial: i,
            state: GameState::initial(a.clone()),
            mass: w.clone(),
        })
        .collect();
    let (value, searcher) = eval.best(&[], &particles)?;
    Ok(HiderValue { value, searcher })
}
