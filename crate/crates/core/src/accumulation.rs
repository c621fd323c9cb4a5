//! One-turn accumulation game with divisible gold.
//!
//! The hider spreads `d` units of gold over `n` boxes; the searcher opens `k`
//! boxes at once and wins when they hold at least one unit together.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::k_subsets;
use crate::lp::{check_feasible, ConstraintSense, Feasibility, FeasibilityProblem};
use crate::rational::{self, binomial, Rational};

/// Largest `n` accepted by [`max_losing_subsets_exact`].
pub const EXACT_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulationSpec {
    pub n: usize,
    pub k: usize,
    #[serde(with = "rational::serde_pq")]
    pub d: Rational,
}

impl AccumulationSpec {
    pub fn new(n: usize, k: usize, d: Rational) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
        }
        if !d.is_positive() {
            return Err(Error::InvalidSpec(format!("gold total {} must be positive", rational::Pq(&d))));
        }
        Ok(AccumulationSpec { n, k, d })
    }

    pub fn subsets(&self) -> u64 {
        u64::try_from(binomial(self.n as u64, self.k as u64)).expect("C(n,k) fits in u64")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoldDistribution {
    #[serde(with = "rational::serde_pq_vec")]
    pub amounts: Vec<Rational>,
}

impl GoldDistribution {
    pub fn new(amounts: Vec<Rational>) -> Result<Self> {
        if let Some(a) = amounts.iter().find(|a| a.is_negative()) {
            return Err(Error::InvalidSpec(format!("negative amount {}", rational::Pq(a))));
        }
        Ok(GoldDistribution { amounts })
    }

    pub fn total(&self) -> Rational {
        self.amounts.iter().sum()
    }

    /// `r` boxes holding `d / r` each, the rest empty.
    pub fn ruckle(n: usize, d: &Rational, r: usize) -> Self {
        let share = d / Rational::from_integer((r as i64).into());
        let amounts = (0..n).map(|i| if i < r { share.clone() } else { Rational::zero() }).collect();
        GoldDistribution { amounts }
    }

    /// Checks the distribution against a spec.
    pub fn check(&self, spec: &AccumulationSpec) -> Result<()> {
        if self.amounts.len() != spec.n {
            return Err(Error::InvalidSpec(format!("{} amounts for n = {}", self.amounts.len(), spec.n)));
        }
        if self.total() != spec.d {
            return Err(Error::InvalidSpec(format!(
                "amounts sum to {}, expected d = {}",
                rational::Pq(&self.total()),
                rational::Pq(&spec.d)
            )));
        }
        Ok(())
    }
}

/// Number of `k`-subsets holding at least one unit.
pub fn count_winning_subsets(g: &GoldDistribution, k: usize) -> u64 {
    k_subsets(g.amounts.len(), k)
        .iter()
        .filter(|q| q.boxes().iter().map(|&b| &g.amounts[b]).sum::<Rational>() >= Rational::one())
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuckleResult {
    pub r: usize,
    pub winning: u64,
    pub distribution: GoldDistribution,
}

/// The best distribution of the form "`d / r` in `r` boxes"; ties go to the
/// smallest `r`.
pub fn best_ruckle_distribution(spec: &AccumulationSpec) -> RuckleResult {
    (1..=spec.n)
        .map(|r| {
            let distribution = GoldDistribution::ruckle(spec.n, &spec.d, r);
            RuckleResult {
                r,
                winning: count_winning_subsets(&distribution, spec.k),
                distribution,
            }
        })
        .min_by_key(|res| (res.winning, res.r))
        .expect("n >= 1")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactResult {
    /// Most `k`-subsets that can hold less than one unit.
    pub losing: u64,
    pub total: u64,
    /// Amounts in decreasing order attaining `losing`.
    pub witness: GoldDistribution,
    /// Winning families passed to the feasibility check.
    pub families_checked: u64,
}

/// Exact maximum number of losing `k`-subsets over all distributions of `d`.
///
/// Amounts are taken in decreasing order, so the winning subsets form an
/// up-set in the componentwise order of sorted index tuples. Up-sets are
/// generated by size, smallest first, and each is tested with an exact
/// feasibility program; the first feasible size gives the answer.
pub fn max_losing_subsets_exact(spec: &AccumulationSpec) -> Result<ExactResult> {
    if spec.n > EXACT_MAX_N {
        return Err(Error::Precondition(format!(
            "exact search is limited to n <= {EXACT_MAX_N}, got n = {}",
            spec.n
        )));
    }
    let sets = k_subsets(spec.n, spec.k);
    let m = sets.len();
    // above[i]: sets that dominate set i (every sorted index no larger).
    let above: Vec<u128> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i && sets[j].boxes().iter().zip(sets[i].boxes()).all(|(a, b)| a <= b))
                .fold(0u128, |acc, j| acc | 1 << j)
        })
        .collect();
    let mut level: Vec<u128> = vec![0];
    let mut checked = 0u64;
    for size in 0..=m {
        for &family in &level {
            checked += 1;
            if let Some(witness) = realize(spec, &sets, family)? {
                return Ok(ExactResult {
                    losing: (m - size) as u64,
                    total: m as u64,
                    witness,
                    families_checked: checked,
                });
            }
        }
        let mut next: HashSet<u128> = HashSet::new();
        for &family in &level {
            for (i, &needs) in above.iter().enumerate() {
                if family & (1 << i) == 0 && needs & !family == 0 {
                    next.insert(family | 1 << i);
                }
            }
        }
        level = next.into_iter().collect();
        level.sort_unstable();
    }
    Err(Error::Internal("the full family must be realizable".into()))
}

/// A decreasing distribution of `d` whose winning sets are exactly `family`.
fn realize(spec: &AccumulationSpec, sets: &[crate::game::Query], family: u128) -> Result<Option<GoldDistribution>> {
    let n = spec.n;
    let one = Rational::one();
    let mut p = FeasibilityProblem::new(n);
    p.push((0..n).map(|i| (i, one.clone())).collect(), ConstraintSense::Eq, spec.d.clone());
    for i in 1..n {
        p.push(vec![(i - 1, one.clone()), (i, -one.clone())], ConstraintSense::Ge, Rational::zero());
    }
    for (j, q) in sets.iter().enumerate() {
        let sense = if family & (1 << j) != 0 {
            ConstraintSense::Ge
        } else {
            ConstraintSense::Lt
        };
        p.push(q.boxes().iter().map(|&b| (b, one.clone())).collect(), sense, one.clone());
    }
    Ok(match check_feasible(&p)? {
        Feasibility::Feasible(x) => {
            if !p.satisfied_by(&x) {
                return Err(Error::Internal("feasibility witness violates its system".into()));
            }
            Some(GoldDistribution { amounts: x })
        }
        Feasibility::Infeasible(y) => {
            if !p.certificate_is_valid(&y) {
                return Err(Error::Internal("infeasibility certificate does not check".into()));
            }
            None
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilityCheck {
    pub losing: u64,
    /// `(1 - k/n) * C(n,k)`.
    #[serde(with = "rational::serde_pq")]
    pub bound: Rational,
    pub holds: bool,
    pub witness: GoldDistribution,
}

/// When `k | n` and `d >= n/k`, at most a `1 - k/n` share of the `k`-subsets
/// can lose. Checked by exact optimization.
pub fn verify_divisibility_bound(n: usize, k: usize, d: Rational) -> Result<DivisibilityCheck> {
    let spec = AccumulationSpec::new(n, k, d)?;
    if !n.is_multiple_of(k) {
        return Err(Error::Precondition(format!("k = {k} does not divide n = {n}")));
    }
    if spec.d < Rational::new((n as i64).into(), (k as i64).into()) {
        return Err(Error::Precondition(format!("d = {} is below n/k", rational::Pq(&spec.d))));
    }
    let exact = max_losing_subsets_exact(&spec)?;
    let bound = (Rational::one() - Rational::new((k as i64).into(), (n as i64).into()))
        * Rational::from_integer((exact.total as i64).into());
    Ok(DivisibilityCheck {
        losing: exact.losing,
        holds: Rational::from_integer((exact.losing as i64).into()) <= bound,
        bound,
        witness: exact.witness,
    })
}

/// Share of `k`-subsets whose sum is strictly below `k/n` of the total.
pub fn mms_probability(a: &[Rational], k: usize) -> Result<Rational> {
    let n = a.len();
    if k == 0 || k > n {
        return Err(Error::InvalidSpec(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    let threshold = Rational::new((k as i64).into(), (n as i64).into()) * a.iter().sum::<Rational>();
    let sets = k_subsets(n, k);
    let below = sets
        .iter()
        .filter(|q| q.boxes().iter().map(|&b| &a[b]).sum::<Rational>() < threshold)
        .count();
    Ok(Rational::new((below as i64).into(), (sets.len() as i64).into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn g(v: &[Rational]) -> GoldDistribution {
        GoldDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn counting() {
        let z = int(0);
        assert_eq!(count_winning_subsets(&g(&[int(2), z.clone(), z.clone(), z.clone(), z.clone()]), 3), 6);
        let fifth = ratio(1, 5);
        assert_eq!(count_winning_subsets(&g(&vec![fifth; 5]), 3), 0);
        let l = ratio(5, 9);
        assert_eq!(count_winning_subsets(&g(&[l.clone(), l.clone(), l, z.clone(), z]), 3), 7);
    }

    #[test]
    fn mms_examples() {
        let z = int(0);
        assert_eq!(mms_probability(&[int(1), z.clone(), z.clone(), z.clone(), z], 3).unwrap(), ratio(2, 5));
        assert_eq!(mms_probability(&vec![ratio(3, 7); 6], 2).unwrap(), int(0));
        let mut a = vec![int(0); 7];
        a[0] = int(1);
        assert_eq!(mms_probability(&a, 1).unwrap(), ratio(6, 7));
    }

    #[test]
    fn guard_and_spec_checks() {
        assert!(AccumulationSpec::new(5, 0, int(1)).is_err());
        assert!(AccumulationSpec::new(5, 3, int(0)).is_err());
        let big = AccumulationSpec::new(9, 3, int(2)).unwrap();
        assert!(matches!(max_losing_subsets_exact(&big), Err(Error::Precondition(_))));
        assert!(verify_divisibility_bound(5, 2, int(3)).is_err());
        assert!(verify_divisibility_bound(4, 2, int(1)).is_err());
        let spec = AccumulationSpec::new(3, 1, int(2)).unwrap();
        assert!(g(&[int(1), int(1)]).check(&spec).is_err());
        assert!(g(&[int(1), int(0), int(0)]).check(&spec).is_err());
        assert!(GoldDistribution::new(vec![int(-1)]).is_err());
    }
}
