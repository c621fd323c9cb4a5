//! Exact game values through the sequence-form linear program.
//!
//! The searcher observes only the public history (queries and revealed
//! boxes); the hider additionally knows the allocation. Both have perfect
//! recall, so the zero-sum game is solved by one LP over realization weights:
//!
//! ```text
//! maximize  u0
//! s.t.      u(I(h)) - sum_{I' below h} u(I') - sum_s A[s,h] x(s) <= 0   for every hider sequence h
//!           sum_{q} x(H,q) = x(parent(H))                               for every searcher history H
//!           x >= 0
//! ```
//!
//! where `A[s,h]` is the chance weight of the winning leaves reached by the
//! searcher sequence `s` and the hider sequence `h`. With symmetry reduction
//! every variable and row stands for an orbit under relabeling of the boxes.

mod response;

use std::collections::HashMap;
use std::time::Instant;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    apply_move, enumerate_allocations, legal_queries, legal_reveals, upper_bound_combinatorial, Allocation,
    GameSpec, GameState, Query, Step, Variant,
};
use crate::lp::{certify, solve_lp, LinearProgram, LpStatus, OptSense, RowSense, VarBound};
use crate::rational::{self, Rational};
use crate::symmetry::{canonicalize, group_order, Mode};

pub use response::{
    best_response_value, cooperative_value, AllocationValue, hider_strategy_value, BestResponse, HiderStrategy, HiderValue,
    RevealChoice, RevealPolicy, RevealRule,
};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub symmetry: bool,
    pub relaxed: bool,
    pub budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            symmetry: true,
            relaxed: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl SolveOptions {
    pub fn mode(&self) -> Mode {
        if self.symmetry {
            Mode::Orbits
        } else {
            Mode::Literal
        }
    }
}

/// What happens when a query is answered in a given state.
#[derive(Debug, Clone, PartialEq)]
pub enum RevealNode {
    /// No treasure in the query: the searcher loses.
    Loss,
    /// Exactly one queried box holds treasure.
    Forced(usize),
    /// Random revealer: boxes with their probabilities.
    Chance(Vec<(usize, Rational)>),
    /// An agent (hider or cooperative rule) picks one of these boxes.
    Choice(Vec<usize>),
}

pub fn expand_reveals(state: &GameState, q: &Query, variant: Variant) -> RevealNode {
    let reveals = legal_reveals(state, q, variant);
    match reveals.len() {
        0 => RevealNode::Loss,
        1 => RevealNode::Forced(reveals[0].0),
        _ => match variant {
            Variant::Random => RevealNode::Chance(reveals),
            Variant::Adversary | Variant::Cooperative => RevealNode::Choice(reveals.into_iter().map(|(b, _)| b).collect()),
        },
    }
}

/// A searcher sequence: the query `query` played after `history`.
#[derive(Debug, Clone)]
pub struct SearcherSeq {
    pub history: Vec<Step>,
    pub query: Query,
    pub orbit: u128,
}

/// A searcher information set: the public history after which she moves.
#[derive(Debug, Clone)]
pub struct SearcherInfoset {
    pub history: Vec<Step>,
    /// Sequence leading here; `None` at the root.
    pub parent: Option<usize>,
    /// Sequence orbits available here, with the number of actual queries in each.
    pub actions: Vec<(usize, u64)>,
}

#[derive(Debug, Clone)]
pub struct HiderSeq {
    pub allocation: Allocation,
    pub history: Vec<Step>,
    pub orbit: u128,
    /// Information set this sequence chooses at; `None` for the allocation choice.
    pub infoset: Option<usize>,
    /// Hider information sets reached next, with multiplicity.
    pub children: Vec<(usize, u64)>,
    /// Winning-leaf weight per searcher sequence.
    pub payoff: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone)]
pub struct HiderInfoset {
    pub allocation: Allocation,
    pub history: Vec<Step>,
    pub query: Query,
    pub orbit: u128,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub nodes: u64,
    pub searcher_sequences: usize,
    pub searcher_infosets: usize,
    pub hider_sequences: usize,
    pub hider_infosets: usize,
    pub win_leaves: u64,
    pub loss_leaves: u64,
}

/// The sequence-form data of one game, reduced by symmetry when requested.
#[derive(Debug, Clone)]
pub struct GameTree {
    pub spec: GameSpec,
    pub options: SolveOptions,
    pub searcher_seqs: Vec<SearcherSeq>,
    pub searcher_infosets: Vec<SearcherInfoset>,
    pub hider_seqs: Vec<HiderSeq>,
    pub hider_infosets: Vec<HiderInfoset>,
    pub stats: TreeStats,
    seq_index: HashMap<Vec<u8>, usize>,
}

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::BudgetExceeded {
                budget: self.limit,
                explored: self.used,
            });
        }
        Ok(())
    }
}

fn bump<T: PartialEq + Copy>(list: &mut Vec<(T, u64)>, item: T) {
    match list.iter_mut().find(|(i, _)| *i == item) {
        Some((_, m)) => *m += 1,
        None => list.push((item, 1)),
    }
}

/// One allocation per orbit (counts sorted in decreasing order), or every
/// allocation in literal mode.
pub fn representative_allocations(n: usize, d: u32, mode: Mode) -> Vec<Allocation> {
    let all = enumerate_allocations(n, d);
    match mode {
        Mode::Literal => all,
        Mode::Orbits => all
            .into_iter()
            .filter(|a| a.counts.windows(2).all(|w| w[0] >= w[1]))
            .collect(),
    }
}

fn check_buildable(spec: &GameSpec) -> Result<()> {
    if spec.variant == Variant::Cooperative {
        return Err(Error::Precondition(
            "the cooperative variant is evaluated by the verifier only; it has no LP formulation".into(),
        ));
    }
    if spec.n > 64 {
        return Err(Error::InvalidSpec("at most 64 boxes are supported".into()));
    }
    Ok(())
}

impl GameTree {
    pub fn mode(&self) -> Mode {
        self.options.mode()
    }

    pub fn searcher_seq_index(&self, history: &[Step], query: &Query) -> Option<usize> {
        let key = canonicalize(self.spec.n, None, history, Some(query), self.mode()).key;
        self.seq_index.get(&key).copied()
    }

    /// Number of actual allocations covered by the hider's root sequences.
    pub fn allocation_count(&self) -> u128 {
        self.hider_seqs
            .iter()
            .filter(|h| h.infoset.is_none())
            .map(|h| h.orbit)
            .sum()
    }
}

/// Builds the (reduced) sequence-form tree.
pub fn build_tree(spec: &GameSpec, options: SolveOptions) -> Result<GameTree> {
    check_buildable(spec)?;
    let mode = options.mode();
    let queries = legal_queries(spec.n, spec.k, options.relaxed);
    let mut budget = Budget {
        limit: options.budget,
        used: 0,
    };
    let mut tree = GameTree {
        spec: *spec,
        options,
        searcher_seqs: Vec::new(),
        searcher_infosets: Vec::new(),
        hider_seqs: Vec::new(),
        hider_infosets: Vec::new(),
        stats: TreeStats::default(),
        seq_index: HashMap::new(),
    };
    if spec.d == 0 {
        return Ok(tree);
    }

    // Searcher side: every public history with fewer than d reveals.
    let mut infoset_seen: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut stack: Vec<(Vec<Step>, Option<usize>)> = vec![(Vec::new(), None)];
    infoset_seen.insert(canonicalize(spec.n, None, &[], None, mode).key, 0);
    while let Some((history, parent)) = stack.pop() {
        budget.tick()?;
        let mut actions = Vec::new();
        for q in &queries {
            let c = canonicalize(spec.n, None, &history, Some(q), mode);
            let (idx, fresh) = match tree.seq_index.get(&c.key) {
                Some(&i) => (i, false),
                None => {
                    let i = tree.searcher_seqs.len();
                    tree.searcher_seqs.push(SearcherSeq {
                        history: history.clone(),
                        query: q.clone(),
                        orbit: c.orbit,
                    });
                    tree.seq_index.insert(c.key, i);
                    (i, true)
                }
            };
            bump(&mut actions, idx);
            if !fresh || history.len() + 1 >= spec.d {
                continue;
            }
            for &b in q.boxes() {
                let mut next = history.clone();
                next.push(Step {
                    query: q.clone(),
                    revealed: b,
                });
                let key = canonicalize(spec.n, None, &next, None, mode).key;
                if !infoset_seen.contains_key(&key) {
                    infoset_seen.insert(key, infoset_seen.len());
                    stack.push((next, Some(idx)));
                }
            }
        }
        tree.searcher_infosets.push(SearcherInfoset {
            history,
            parent,
            actions,
        });
    }

    // Hider side.
    let mut hseq_seen: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut hinfo_seen: HashMap<Vec<u8>, usize> = HashMap::new();
    for a in representative_allocations(spec.n, spec.d as u32, mode) {
        let c = canonicalize(spec.n, Some(&a.counts), &[], None, mode);
        let h = tree.hider_seqs.len();
        hseq_seen.insert(c.key, h);
        tree.hider_seqs.push(HiderSeq {
            allocation: a.clone(),
            history: Vec::new(),
            orbit: c.orbit,
            infoset: None,
            children: Vec::new(),
            payoff: Vec::new(),
        });
        let mut payoff: HashMap<usize, Rational> = HashMap::new();
        let mut ctx = HiderWalk {
            spec,
            mode,
            queries: &queries,
            allocation: &a,
            budget: &mut budget,
            hseq_seen: &mut hseq_seen,
            hinfo_seen: &mut hinfo_seen,
            pending_payoffs: HashMap::new(),
        };
        ctx.walk(&mut tree, &GameState::initial(a.clone()), h, &Rational::one(), &mut payoff)?;
        let mut pending = std::mem::take(&mut ctx.pending_payoffs);
        pending.insert(h, payoff);
        for (hid, map) in pending {
            let mut v: Vec<(usize, Rational)> = map.into_iter().collect();
            v.sort_by_key(|(s, _)| *s);
            tree.hider_seqs[hid].payoff = v;
        }
    }

    tree.stats.nodes = budget.used;
    tree.stats.searcher_sequences = tree.searcher_seqs.len();
    tree.stats.searcher_infosets = tree.searcher_infosets.len();
    tree.stats.hider_sequences = tree.hider_seqs.len();
    tree.stats.hider_infosets = tree.hider_infosets.len();
    Ok(tree)
}

struct HiderWalk<'a> {
    spec: &'a GameSpec,
    mode: Mode,
    queries: &'a [Query],
    allocation: &'a Allocation,
    budget: &'a mut Budget,
    hseq_seen: &'a mut HashMap<Vec<u8>, usize>,
    hinfo_seen: &'a mut HashMap<Vec<u8>, usize>,
    pending_payoffs: HashMap<usize, HashMap<usize, Rational>>,
}

impl HiderWalk<'_> {
    fn walk(
        &mut self,
        tree: &mut GameTree,
        state: &GameState,
        h: usize,
        chance: &Rational,
        payoff: &mut HashMap<usize, Rational>,
    ) -> Result<()> {
        self.budget.tick()?;
        let n = self.spec.n;
        for q in self.queries {
            let s_key = canonicalize(n, None, &state.history, Some(q), self.mode).key;
            let s = *tree
                .seq_index
                .get(&s_key)
                .ok_or_else(|| Error::Internal("hider walk reached an unknown searcher sequence".into()))?;
            match expand_reveals(state, q, self.spec.variant) {
                RevealNode::Loss => tree.stats.loss_leaves += 1,
                RevealNode::Choice(boxes) => {
                    let ic = canonicalize(n, Some(&self.allocation.counts), &state.history, Some(q), self.mode);
                    let info = match self.hinfo_seen.get(&ic.key) {
                        Some(&i) => i,
                        None => {
                            let i = tree.hider_infosets.len();
                            tree.hider_infosets.push(HiderInfoset {
                                allocation: self.allocation.clone(),
                                history: state.history.clone(),
                                query: q.clone(),
                                orbit: ic.orbit,
                            });
                            self.hinfo_seen.insert(ic.key, i);
                            i
                        }
                    };
                    bump(&mut tree.hider_seqs[h].children, info);
                    for b in boxes {
                        let next = apply_move(state, q, b)?;
                        let hc = canonicalize(n, Some(&self.allocation.counts), &next.history, None, self.mode);
                        if self.hseq_seen.contains_key(&hc.key) {
                            continue;
                        }
                        let h2 = tree.hider_seqs.len();
                        self.hseq_seen.insert(hc.key, h2);
                        tree.hider_seqs.push(HiderSeq {
                            allocation: self.allocation.clone(),
                            history: next.history.clone(),
                            orbit: hc.orbit,
                            infoset: Some(info),
                            children: Vec::new(),
                            payoff: Vec::new(),
                        });
                        let mut sub = HashMap::new();
                        if next.is_won() {
                            tree.stats.win_leaves += 1;
                            sub.insert(s, chance.clone());
                        } else {
                            self.walk(tree, &next, h2, chance, &mut sub)?;
                        }
                        self.pending_payoffs.insert(h2, sub);
                    }
                }
                RevealNode::Forced(b) => {
                    self.advance(tree, state, q, b, s, h, chance.clone(), payoff)?;
                }
                RevealNode::Chance(list) => {
                    for (b, w) in list {
                        self.advance(tree, state, q, b, s, h, chance * w, payoff)?;
                    }
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        tree: &mut GameTree,
        state: &GameState,
        q: &Query,
        b: usize,
        s: usize,
        h: usize,
        weight: Rational,
        payoff: &mut HashMap<usize, Rational>,
    ) -> Result<()> {
        let next = apply_move(state, q, b)?;
        if next.is_won() {
            tree.stats.win_leaves += 1;
            *payoff.entry(s).or_insert_with(Rational::zero) += weight;
            Ok(())
        } else {
            self.walk(tree, &next, h, &weight, payoff)
        }
    }
}

/// Column layout of the sequence-form LP built from a [`GameTree`].
#[derive(Debug, Clone)]
pub struct SequenceLp {
    pub lp: LinearProgram,
    /// Column of `x` for searcher sequence `i` is `i`.
    pub num_x: usize,
    /// Column of the root value `u0`.
    pub u0: usize,
    /// Column of `u` for hider information set `i` is `u_base + i`.
    pub u_base: usize,
    /// Row of hider sequence `i` is `i`; searcher information set `j` is `hider_rows + j`.
    pub hider_rows: usize,
}

pub fn sequence_lp(tree: &GameTree) -> SequenceLp {
    let num_x = tree.searcher_seqs.len();
    let u0 = num_x;
    let u_base = num_x + 1;
    let nvars = u_base + tree.hider_infosets.len();
    let mut lp = LinearProgram::new(nvars);
    for j in num_x..nvars {
        lp.bounds[j] = VarBound::free();
    }
    lp.objective[u0] = Rational::one();
    for h in &tree.hider_seqs {
        let mut row = Vec::with_capacity(1 + h.children.len() + h.payoff.len());
        row.push((h.infoset.map_or(u0, |i| u_base + i), Rational::one()));
        for (i, m) in &h.children {
            row.push((u_base + i, -rational::int(*m as i64)));
        }
        for (s, w) in &h.payoff {
            row.push((*s, -w.clone()));
        }
        lp.add_row(row, RowSense::Le, Rational::zero());
    }
    for info in &tree.searcher_infosets {
        let mut row: Vec<(usize, Rational)> = info
            .actions
            .iter()
            .map(|(s, m)| (*s, rational::int(*m as i64)))
            .collect();
        let rhs = match info.parent {
            Some(p) => {
                row.push((p, -Rational::one()));
                Rational::zero()
            }
            None => Rational::one(),
        };
        lp.add_row(row, RowSense::Eq, rhs);
    }
    SequenceLp {
        lp,
        num_x,
        u0,
        u_base,
        hider_rows: tree.hider_seqs.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearcherPlanEntry {
    pub history: Vec<Step>,
    pub query: Query,
    pub orbit_size: u64,
    /// Realization weight of each sequence in the orbit.
    #[serde(with = "rational::serde_pq")]
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiderPlanEntry {
    pub allocation: Allocation,
    pub history: Vec<Step>,
    pub orbit_size: u64,
    /// Realization weight of each sequence in the orbit.
    #[serde(with = "rational::serde_pq")]
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub symmetry: bool,
    pub relaxed: bool,
    #[serde(flatten)]
    pub tree: TreeStats,
    pub lp_rows: usize,
    pub lp_cols: usize,
    pub pivots: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub variant: Variant,
    #[serde(with = "rational::serde_pq")]
    pub value: Rational,
    pub searcher_plan: Vec<SearcherPlanEntry>,
    pub hider_plan: Vec<HiderPlanEntry>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn spec(&self) -> GameSpec {
        GameSpec {
            n: self.n,
            d: self.d,
            k: self.k,
            variant: self.variant,
        }
    }

    pub fn mode(&self) -> Mode {
        if self.stats.symmetry {
            Mode::Orbits
        } else {
            Mode::Literal
        }
    }
}

pub fn solve(spec: &GameSpec) -> Result<SolveResult> {
    solve_with(spec, SolveOptions::default())
}

pub fn solve_with(spec: &GameSpec, options: SolveOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let tree = build_tree(spec, options)?;
    let mut result = SolveResult {
        n: spec.n,
        d: spec.d,
        k: spec.k,
        variant: spec.variant,
        value: Rational::one(),
        searcher_plan: Vec::new(),
        hider_plan: Vec::new(),
        stats: SolveStats {
            symmetry: options.symmetry,
            relaxed: options.relaxed,
            tree: tree.stats.clone(),
            lp_rows: 0,
            lp_cols: 0,
            pivots: 0,
            elapsed_ms: 0,
        },
    };
    if spec.d == 0 {
        result.hider_plan.push(HiderPlanEntry {
            allocation: Allocation::empty(spec.n),
            history: Vec::new(),
            orbit_size: 1,
            weight: Rational::one(),
        });
        result.stats.elapsed_ms = start.elapsed().as_millis() as u64;
        return Ok(result);
    }
    let slp = sequence_lp(&tree);
    let sol = solve_lp(&slp.lp, OptSense::Maximize)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("sequence-form LP ended {:?}", sol.status)));
    }
    certify(&slp.lp, OptSense::Maximize, &sol).map_err(|e| Error::Internal(format!("LP certificate rejected: {e}")))?;

    result.value = sol.objective_value.clone();
    for (i, s) in tree.searcher_seqs.iter().enumerate() {
        let w = &sol.primal[i];
        if !w.is_zero() {
            result.searcher_plan.push(SearcherPlanEntry {
                history: s.history.clone(),
                query: s.query.clone(),
                orbit_size: s.orbit as u64,
                weight: w.clone(),
            });
        }
    }
    for (i, h) in tree.hider_seqs.iter().enumerate() {
        let w = &sol.dual[i];
        if !w.is_zero() {
            result.hider_plan.push(HiderPlanEntry {
                allocation: h.allocation.clone(),
                history: h.history.clone(),
                orbit_size: h.orbit as u64,
                weight: w / rational::int(h.orbit as i64),
            });
        }
    }
    result.stats.lp_rows = slp.lp.num_rows();
    result.stats.lp_cols = slp.lp.num_vars();
    result.stats.pivots = sol.pivots;
    result.stats.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

/// Realization weights of a (possibly randomized) searcher strategy over
/// actual sequences.
pub trait SearcherPlan {
    fn weight(&self, history: &[Step], query: &Query) -> Rational;

    /// True when the plan is invariant under relabeling of the boxes, so that
    /// one allocation per orbit suffices for a best response.
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// A plan stored per orbit key of the searcher sequences.
///
/// With `per_stabilizer` set the stored number `w` of an orbit is turned into
/// the weight `w * |Stab(s)| / n!` of each member `s`; otherwise every member
/// gets `w`.
#[derive(Debug, Clone)]
pub struct OrbitPlan {
    pub n: usize,
    pub mode: Mode,
    pub weights: HashMap<Vec<u8>, Rational>,
    pub per_stabilizer: bool,
}

impl OrbitPlan {
    pub fn from_solve(result: &SolveResult) -> Self {
        let mode = result.mode();
        let weights = result
            .searcher_plan
            .iter()
            .map(|e| (canonicalize(result.n, None, &e.history, Some(&e.query), mode).key, e.weight.clone()))
            .collect();
        OrbitPlan {
            n: result.n,
            mode,
            weights,
            per_stabilizer: false,
        }
    }
}

impl SearcherPlan for OrbitPlan {
    fn weight(&self, history: &[Step], query: &Query) -> Rational {
        let c = canonicalize(self.n, None, history, Some(query), self.mode);
        match self.weights.get(&c.key) {
            None => Rational::zero(),
            Some(w) if self.per_stabilizer => {
                w * Rational::from_integer(c.stabilizer.into()) / Rational::from_integer(group_order(self.n).into())
            }
            Some(w) => w.clone(),
        }
    }

    fn is_symmetric(&self) -> bool {
        self.mode == Mode::Orbits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Accuracy {
    Accurate,
    NotAccurate {
        #[serde(with = "rational::serde_pq")]
        value: Rational,
    },
}

/// Compares the adversary value with `k^d / C(n+d-1, d)`.
pub fn check_accuracy(n: usize, d: usize, k: usize, options: SolveOptions) -> Result<Accuracy> {
    let spec = GameSpec::new(n, d, k, Variant::Adversary)?;
    let value = solve_with(&spec, options)?.value;
    Ok(if value == upper_bound_combinatorial(n, d, k) {
        Accuracy::Accurate
    } else {
        Accuracy::NotAccurate { value }
    })
}
