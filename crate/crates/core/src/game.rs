//! Rules of the multiple caching game.
//!
//! A hider places `d` indistinguishable treasures into `n` boxes. The searcher
//! repeatedly opens `k` boxes at once; if any of them still holds a treasure,
//! exactly one treasure is revealed and removed, otherwise the searcher loses.
//! She wins once all `d` treasures have been removed. The three variants only
//! differ in who picks the revealed treasure when several queried boxes are
//! non-empty.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The hider picks the revealed treasure, playing to win.
    Adversary,
    /// The revealed treasure is uniform over the treasures inside the query.
    Random,
    /// The revealed treasure follows a rule agreed with the searcher.
    Cooperative,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Adversary => "adversary",
            Variant::Random => "random",
            Variant::Cooperative => "cooperative",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adversary" => Ok(Variant::Adversary),
            "random" => Ok(Variant::Random),
            "cooperative" => Ok(Variant::Cooperative),
            other => Err(Error::InvalidSpec(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub variant: Variant,
}

impl GameSpec {
    /// `d = 0` is accepted as the degenerate game the searcher always wins.
    pub fn new(n: usize, d: usize, k: usize, variant: Variant) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        Ok(GameSpec { n, d, k, variant })
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        GameSpec { variant, ..self }
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{}) {}", self.n, self.d, self.k, self.variant)
    }
}

/// Treasure counts per box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    pub counts: Vec<u32>,
}

impl Allocation {
    pub fn new(counts: Vec<u32>) -> Self {
        Allocation { counts }
    }

    pub fn empty(n: usize) -> Self {
        Allocation { counts: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn in_query(&self, q: &Query) -> u32 {
        q.boxes.iter().map(|&b| self.counts[b]).sum()
    }

    /// Counts sorted in decreasing order: the orbit of the allocation under
    /// box relabeling.
    pub fn profile(&self) -> Vec<u32> {
        let mut p = self.counts.clone();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A set of boxes opened in one step, kept strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Query {
    boxes: Vec<usize>,
}

impl Query {
    pub fn new(mut boxes: Vec<usize>) -> Result<Self> {
        boxes.sort_unstable();
        if boxes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::IllegalMove(format!("query repeats a box: {boxes:?}")));
        }
        Ok(Query { boxes })
    }

    pub fn boxes(&self) -> &[usize] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, b: usize) -> bool {
        self.boxes.binary_search(&b).is_ok()
    }

    pub fn check_legal(&self, n: usize, k: usize, relaxed: bool) -> Result<()> {
        if self.boxes.last().is_some_and(|&b| b >= n) {
            return Err(Error::IllegalMove(format!("query {self} names a box outside 0..{n}")));
        }
        let ok = if relaxed {
            !self.boxes.is_empty() && self.boxes.len() <= k
        } else {
            self.boxes.len() == k
        };
        if !ok {
            return Err(Error::IllegalMove(format!(
                "query {self} has {} boxes, k = {k}{}",
                self.boxes.len(),
                if relaxed { " (relaxed)" } else { "" }
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Query {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Query::new(v)
    }
}

impl From<Query> for Vec<usize> {
    fn from(q: Query) -> Self {
        q.boxes
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.boxes.iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// One completed step: the query and the box a treasure came out of.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub query: Query,
    pub revealed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    pub remaining: Allocation,
    pub history: Vec<Step>,
    pub found: u32,
}

impl GameState {
    pub fn initial(allocation: Allocation) -> Self {
        GameState {
            remaining: allocation,
            history: Vec::new(),
            found: 0,
        }
    }

    pub fn is_won(&self) -> bool {
        self.remaining.total() == 0
    }
}

/// Every allocation of `d` treasures into `n` boxes in lexicographic order of
/// the count vectors. `d = 0` yields the single empty allocation.
pub fn enumerate_allocations(n: usize, d: u32) -> Vec<Allocation> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Allocation>) {
        let n = cur.len();
        if pos + 1 == n {
            cur[pos] = left;
            out.push(Allocation::new(cur.clone()));
            return;
        }
        for c in 0..=left {
            cur[pos] = c;
            rec(pos + 1, left - c, cur, out);
        }
    }
    assert!(n >= 1, "at least one box is required");
    let mut out = Vec::new();
    rec(0, d, &mut vec![0; n], &mut out);
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Query> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Query>) {
        if cur.len() == k {
            out.push(Query { boxes: cur.clone() });
            return;
        }
        for b in start..n {
            if n - b < k - cur.len() {
                break;
            }
            cur.push(b);
            rec(b + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The queries the searcher may choose from: exactly `k` boxes, or any
/// non-empty set of at most `k` boxes under the relaxed rules.
pub fn legal_queries(n: usize, k: usize, relaxed: bool) -> Vec<Query> {
    if relaxed {
        (1..=k).flat_map(|s| k_subsets(n, s)).collect()
    } else {
        k_subsets(n, k)
    }
}

/// Possible reveals for `q` in `state`. For the random revealer the weights
/// are uniform over the treasures inside the query (not over boxes); for the
/// other variants the weight is a placeholder `1` because an agent chooses.
/// An empty list means the query misses and the searcher has lost.
pub fn legal_reveals(state: &GameState, q: &Query, variant: Variant) -> Vec<(usize, Rational)> {
    let inside = state.remaining.in_query(q);
    if inside == 0 {
        return Vec::new();
    }
    q.boxes()
        .iter()
        .filter(|&&b| state.remaining.counts[b] > 0)
        .map(|&b| {
            let w = match variant {
                Variant::Random => rational::ratio(state.remaining.counts[b] as i64, inside as i64),
                Variant::Adversary | Variant::Cooperative => rational::int(1),
            };
            (b, w)
        })
        .collect()
}

/// Removes one treasure from `revealed`; the input state is untouched.
pub fn apply_move(state: &GameState, q: &Query, revealed: usize) -> Result<GameState> {
    if !q.contains(revealed) {
        return Err(Error::IllegalMove(format!("box {revealed} is not in query {q}")));
    }
    if state.remaining.counts.get(revealed).copied().unwrap_or(0) == 0 {
        return Err(Error::IllegalMove(format!("box {revealed} holds no treasure")));
    }
    let mut next = state.clone();
    next.remaining.counts[revealed] -= 1;
    next.found += 1;
    next.history.push(Step {
        query: q.clone(),
        revealed,
    });
    Ok(next)
}

/// `k^d / C(n+d-1, d)`: the uniform hider caps every searcher at this value.
pub fn upper_bound_combinatorial(n: usize, d: usize, k: usize) -> Rational {
    let num = num_traits::pow(BigInt::from(k), d);
    Rational::new(num, rational::binomial((n + d - 1) as u64, d as u64))
}

/// `k/n`: hiding everything in one box.
pub fn upper_bound_first_query(n: usize, k: usize) -> Rational {
    rational::ratio(k as i64, n as i64)
}

/// The guarantee `c(n,k)` of the "stay on the last box" strategy, which does
/// not depend on `d`:
/// `(k/n) * prod_{i=k}^{n-1} (1 - C(i-1,k-1)/C(n-1,k-1))`.
pub fn lower_bound_infinite_d(n: usize, k: usize) -> Result<Rational> {
    if k < 2 || k > n {
        return Err(Error::InvalidSpec(format!("need 2 <= k <= n, got n={n}, k={k}")));
    }
    let denom = rational::binomial_r((n - 1) as u64, (k - 1) as u64);
    let mut acc = upper_bound_first_query(n, k);
    for i in k..n {
        let lose = rational::binomial_r((i - 1) as u64, (k - 1) as u64) / &denom;
        acc *= rational::int(1) - lose;
    }
    Ok(acc)
}
