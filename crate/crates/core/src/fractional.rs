//! Non-integer query sizes and the single-box Young-diagram strategy.
//!
//! With one box per query the searcher draws a guess `mu` uniformly from all
//! allocations and empties its boxes from fullest to emptiest. The discovered
//! treasures, counted per box in discovery order, form a weakly decreasing
//! sequence `lambda`. [`p_lambda`] is the chance, seen from outside, that the
//! next query returns to the current box.
//!
//! For a fractional `k` the searcher mixes `floor(k)` and `ceil(k)` sized
//! queries so that the expected size is `k`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::enumerate_allocations;
use crate::rational::{self, ceil, floor, Rational};

/// Discovered counts per box, current box last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YoungState {
    pub n: usize,
    pub d: usize,
    pub lambda: Vec<u32>,
}

impl YoungState {
    pub fn new(n: usize, d: usize, lambda: Vec<u32>) -> Result<Self> {
        let s = YoungState { n, d, lambda };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidSpec(why));
        if self.lambda.is_empty() {
            return bad("lambda is empty, so there is no current box".into());
        }
        if self.lambda.contains(&0) {
            return bad(format!("lambda {:?} has a zero part", self.lambda));
        }
        if self.lambda.windows(2).any(|w| w[0] < w[1]) {
            return bad(format!("lambda {:?} is not weakly decreasing", self.lambda));
        }
        if self.lambda.len() > self.n {
            return bad(format!("lambda {:?} has more parts than n = {}", self.lambda, self.n));
        }
        if self.found() > self.d as u32 {
            return bad(format!("lambda {:?} holds more than d = {} treasures", self.lambda, self.d));
        }
        Ok(())
    }

    pub fn found(&self) -> u32 {
        self.lambda.iter().sum()
    }
}

/// Probability that the next single-box query repeats the current box.
pub fn p_lambda(state: &YoungState) -> Result<Rational> {
    state.validate()?;
    if state.found() as usize == state.d {
        return Ok(Rational::zero());
    }
    let lam = &state.lambda;
    let m = lam.len() - 1;
    let (mut consistent, mut repeat) = (0u64, 0u64);
    for mu in enumerate_allocations(state.n, state.d as u32) {
        let mut profile = mu.counts.clone();
        profile.sort_unstable_by(|a, b| b.cmp(a));
        if profile[..m] != lam[..m] || profile[m] < lam[m] {
            continue;
        }
        consistent += 1;
        if profile[m] > lam[m] {
            repeat += 1;
        }
    }
    if consistent == 0 {
        return Err(Error::InvalidSpec(format!("lambda {lam:?} cannot occur for n = {}, d = {}", state.n, state.d)));
    }
    Ok(Rational::new((repeat as i64).into(), (consistent as i64).into()))
}

/// `s * p_lambda`, the repeat probability with `s`-box queries.
pub fn scaled_repeat_probability(state: &YoungState, s: u32) -> Result<Rational> {
    let v = p_lambda(state)? * Rational::from_integer(s.into());
    if v > Rational::one() {
        return Err(Error::Precondition(format!(
            "{s} * p_lambda = {} exceeds 1; n is too small for this construction",
            rational::Pq(&v)
        )));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalSpec {
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational::serde_pq")]
    pub k: Rational,
    /// Weight on queries of size `floor(k)`.
    #[serde(with = "rational::serde_pq")]
    pub p: Rational,
}

impl FractionalSpec {
    pub fn new(n: usize, d: usize, k: Rational) -> Result<Self> {
        if k < Rational::one() || k > Rational::from_integer((n as i64).into()) {
            return Err(Error::InvalidSpec(format!("k = {} must lie in [1, n]", rational::Pq(&k))));
        }
        let p = if k.is_integer() {
            Rational::one()
        } else {
            Rational::from_integer(ceil(&k)) - &k
        };
        Ok(FractionalSpec { n, d, k, p })
    }

    pub fn floor_k(&self) -> u32 {
        u32::try_from(floor(&self.k)).expect("k <= n fits in u32")
    }

    pub fn ceil_k(&self) -> u32 {
        u32::try_from(ceil(&self.k)).expect("k <= n fits in u32")
    }
}

/// One branch of the mixed next query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepBranch {
    /// The query includes the box the last treasure came from.
    pub repeat: bool,
    /// Number of untouched boxes in the query.
    pub fresh: u32,
    #[serde(with = "rational::serde_pq")]
    pub weight: Rational,
}

fn check_preconditions(spec: &FractionalSpec, state: &YoungState) -> Result<Rational> {
    if (spec.n, spec.d) != (state.n, state.d) {
        return Err(Error::InvalidSpec("state and spec disagree on n or d".into()));
    }
    let c = spec.ceil_k();
    if spec.n < spec.d * c as usize {
        return Err(Error::Precondition(format!(
            "n >= d * ceil(k) fails: {} < {} * {c}",
            spec.n, spec.d
        )));
    }
    let pl = p_lambda(state)?;
    let top = &pl * Rational::from_integer(c.into());
    if top > Rational::one() {
        return Err(Error::Precondition(format!(
            "p_lambda(n, d, ceil(k)) <= 1 fails: {} * {} = {}",
            c,
            rational::Pq(&pl),
            rational::Pq(&top)
        )));
    }
    Ok(pl)
}

/// The mixed next query. Branches weighted by a zero mixing factor (the
/// `ceil(k)` half when k is an integer) are left out.
pub fn fractional_step_distribution(spec: &FractionalSpec, state: &YoungState) -> Result<Vec<StepBranch>> {
    let pl = check_preconditions(spec, state)?;
    let mut out = Vec::with_capacity(4);
    for (mixing, size) in [(spec.p.clone(), spec.floor_k()), (Rational::one() - &spec.p, spec.ceil_k())] {
        if mixing.is_zero() {
            continue;
        }
        let again = &pl * Rational::from_integer(size.into());
        out.push(StepBranch {
            repeat: true,
            fresh: size - 1,
            weight: &mixing * &again,
        });
        out.push(StepBranch {
            repeat: false,
            fresh: size,
            weight: &mixing * (Rational::one() - again),
        });
    }
    debug_assert!(out.iter().all(|b| !b.weight.is_negative()));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    CurrentBox,
    FreshBox,
}

/// Both sides of the per-step identity: chance that the next query reaches
/// the target, against `k` times the single-box chance.
pub fn per_step_discovery_check(spec: &FractionalSpec, state: &YoungState, target: Target) -> Result<(Rational, Rational)> {
    let pl = p_lambda(state)?;
    let branches = fractional_step_distribution(spec, state)?;
    Ok(match target {
        Target::CurrentBox => (
            branches.iter().filter(|b| b.repeat).map(|b| b.weight.clone()).sum(),
            &spec.k * pl,
        ),
        Target::FreshBox => (
            branches
                .iter()
                .map(|b| &b.weight * Rational::from_integer(b.fresh.into()))
                .sum(),
            &spec.k * (Rational::one() - pl),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn st(n: usize, d: usize, l: &[u32]) -> YoungState {
        YoungState::new(n, d, l.to_vec()).unwrap()
    }

    #[test]
    fn terminal_states_never_repeat() {
        assert_eq!(p_lambda(&st(5, 3, &[3])).unwrap(), Rational::zero());
        assert_eq!(p_lambda(&st(4, 3, &[2, 1])).unwrap(), Rational::zero());
    }

    #[test]
    fn two_boxes_two_treasures() {
        assert_eq!(p_lambda(&st(2, 2, &[1])).unwrap(), ratio(2, 3));
    }

    #[test]
    fn malformed_states_are_rejected() {
        assert!(YoungState::new(3, 3, vec![]).is_err());
        assert!(YoungState::new(3, 3, vec![1, 2]).is_err());
        assert!(YoungState::new(3, 2, vec![2, 1]).is_err());
        assert!(YoungState::new(1, 3, vec![1, 1]).is_err());
        assert!(YoungState::new(3, 3, vec![1, 0]).is_err());
    }

    #[test]
    fn mixing_weight() {
        let s = FractionalSpec::new(10, 2, ratio(3, 2)).unwrap();
        assert_eq!(s.p, ratio(1, 2));
        let s = FractionalSpec::new(10, 2, ratio(7, 3)).unwrap();
        assert_eq!(s.p, ratio(2, 3));
        assert_eq!(FractionalSpec::new(10, 2, ratio(2, 1)).unwrap().p, Rational::one());
        assert!(FractionalSpec::new(3, 2, ratio(1, 2)).is_err());
        assert!(FractionalSpec::new(3, 2, ratio(7, 2)).is_err());
    }

    #[test]
    fn scaling_is_checked() {
        let s = st(2, 2, &[1]);
        assert_eq!(scaled_repeat_probability(&s, 1).unwrap(), ratio(2, 3));
        assert!(matches!(scaled_repeat_probability(&s, 2), Err(Error::Precondition(_))));
        assert_eq!(scaled_repeat_probability(&st(4, 2, &[2]), 7).unwrap(), Rational::zero());
    }

    #[test]
    fn integral_k_has_two_branches() {
        let spec = FractionalSpec::new(20, 2, ratio(2, 1)).unwrap();
        let b = fractional_step_distribution(&spec, &st(20, 2, &[1])).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|x| x.fresh + u32::from(x.repeat) == 2));
    }

    #[test]
    fn preconditions_name_the_failure() {
        let spec = FractionalSpec::new(5, 3, ratio(5, 2)).unwrap();
        let err = fractional_step_distribution(&spec, &st(5, 3, &[1])).unwrap_err();
        assert!(err.to_string().contains("n >= d * ceil(k)"), "{err}");
        let spec = FractionalSpec::new(6, 3, ratio(2, 1)).unwrap();
        let err = fractional_step_distribution(&spec, &st(6, 3, &[1])).unwrap_err();
        assert!(err.to_string().contains("p_lambda"), "{err}");
    }
}
