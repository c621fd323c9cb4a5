//! Orbit keys for play histories under relabeling of the boxes.
//!
//! Two (allocation, history) pairs that differ only by a permutation of the
//! boxes get the same key. The key is produced by ordered partition
//! refinement: boxes start in one cell, and every step splits each cell into
//! the revealed box, the other queried boxes and the unqueried boxes, in that
//! order. Boxes left in a common cell behave identically along the whole
//! history, so the stabilizer of the history is the product of the cell
//! factorials and no permutation is ever enumerated.

use crate::game::{Query, Step};

const SEP: u8 = u8::MAX;

/// Canonical form of one object plus the size of its stabilizer subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Canonical {
    pub key: Vec<u8>,
    pub stabilizer: u128,
    /// Number of objects identified with this one; 1 in literal mode.
    pub orbit: u128,
}

/// Whether objects are identified up to relabeling or taken literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Orbits,
    Literal,
}

fn factorial(m: usize) -> u128 {
    (1..=m as u128).product()
}

pub fn group_order(n: usize) -> u128 {
    factorial(n)
}

fn split_cells(cells: Vec<Vec<usize>>, rank: impl Fn(usize) -> u32) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(cells.len() + 2);
    for cell in cells {
        if cell.len() == 1 {
            out.push(cell);
            continue;
        }
        let mut ranked: Vec<(u32, usize)> = cell.iter().map(|&b| (rank(b), b)).collect();
        ranked.sort_unstable();
        let mut start = 0;
        for i in 1..=ranked.len() {
            if i == ranked.len() || ranked[i].0 != ranked[start].0 {
                out.push(ranked[start..i].iter().map(|&(_, b)| b).collect());
                start = i;
            }
        }
    }
    out
}

/// Canonical key of an optional allocation, a history and an optional pending
/// query (a query that has been asked but not yet answered).
pub fn canonicalize(
    n: usize,
    allocation: Option<&[u32]>,
    history: &[Step],
    pending: Option<&Query>,
    mode: Mode,
) -> Canonical {
    let mut label = vec![0u8; n];
    let mut stabilizer = 1u128;
    match mode {
        Mode::Literal => {
            for (b, l) in label.iter_mut().enumerate() {
                *l = b as u8;
            }
        }
        Mode::Orbits => {
            let mut cells = vec![(0..n).collect::<Vec<_>>()];
            for step in history {
                cells = split_cells(cells, |b| {
                    if b == step.revealed {
                        0
                    } else if step.query.contains(b) {
                        1
                    } else {
                        2
                    }
                });
            }
            if let Some(q) = pending {
                cells = split_cells(cells, |b| u32::from(!q.contains(b)));
            }
            if let Some(a) = allocation {
                cells = split_cells(cells, |b| u32::MAX - a[b]);
            }
            let mut next = 0u8;
            for cell in &cells {
                stabilizer *= factorial(cell.len());
                for &b in cell {
                    label[b] = next;
                    next += 1;
                }
            }
        }
    }

    let mut key = Vec::with_capacity(n + history.len() * 6 + 4);
    if let Some(a) = allocation {
        let mut relabeled = vec![0u32; n];
        for (b, &c) in a.iter().enumerate() {
            relabeled[label[b] as usize] = c;
        }
        for c in relabeled {
            key.push(c.min(SEP as u32 - 1) as u8);
        }
    }
    key.push(SEP);
    let push_query = |key: &mut Vec<u8>, q: &Query| {
        let mut ls: Vec<u8> = q.boxes().iter().map(|&b| label[b]).collect();
        ls.sort_unstable();
        key.extend_from_slice(&ls);
        key.push(SEP);
    };
    for step in history {
        push_query(&mut key, &step.query);
        key.push(label[step.revealed]);
    }
    key.push(SEP);
    if let Some(q) = pending {
        push_query(&mut key, q);
    }
    let orbit = match mode {
        Mode::Orbits => group_order(n) / stabilizer,
        Mode::Literal => 1,
    };
    Canonical {
        key,
        stabilizer,
        orbit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(b: &[usize]) -> Query {
        Query::new(b.to_vec()).unwrap()
    }

    fn step(b: &[usize], r: usize) -> Step {
        Step {
            query: q(b),
            revealed: r,
        }
    }

    fn permute_step(s: &Step, p: &[usize]) -> Step {
        Step {
            query: Query::new(s.query.boxes().iter().map(|&b| p[b]).collect()).unwrap(),
            revealed: p[s.revealed],
        }
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == used.len() {
                out.push(cur.clone());
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    rec(cur, used, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    #[test]
    fn first_queries_form_one_orbit() {
        let keys: std::collections::HashSet<_> = crate::game::k_subsets(4, 2)
            .iter()
            .map(|qq| canonicalize(4, None, &[], Some(qq), Mode::Orbits).key)
            .collect();
        assert_eq!(keys.len(), 1);
        let c = canonicalize(4, None, &[], Some(&q(&[1, 3])), Mode::Orbits);
        assert_eq!(c.orbit, 6);
    }

    #[test]
    fn key_is_invariant_and_stabilizer_is_exact() {
        // Brute-force oracle over S_5: the key must be constant on the orbit,
        // and the stabilizer must count permutations fixing the object.
        let n = 5;
        let alloc = [2u32, 0, 1, 1, 0];
        let hist = vec![step(&[0, 1], 0), step(&[0, 2, 3], 2)];
        let pending = q(&[3, 4]);
        let base = canonicalize(n, Some(&alloc), &hist, Some(&pending), Mode::Orbits);
        let mut fixing = 0u128;
        let mut orbit = std::collections::HashSet::new();
        for p in all_perms(n) {
            let mut a2 = [0u32; 5];
            for b in 0..n {
                a2[p[b]] = alloc[b];
            }
            let h2: Vec<Step> = hist.iter().map(|s| permute_step(s, &p)).collect();
            let q2 = Query::new(pending.boxes().iter().map(|&b| p[b]).collect()).unwrap();
            let c = canonicalize(n, Some(&a2), &h2, Some(&q2), Mode::Orbits);
            assert_eq!(c.key, base.key);
            if a2 == alloc && h2 == hist && q2 == pending {
                fixing += 1;
            }
            orbit.insert((a2, h2, q2));
        }
        assert_eq!(fixing, base.stabilizer);
        assert_eq!(orbit.len() as u128, base.orbit);
    }

    #[test]
    fn different_orbits_get_different_keys() {
        let a = canonicalize(4, None, &[step(&[0, 1], 0)], Some(&q(&[0, 2])), Mode::Orbits);
        let b = canonicalize(4, None, &[step(&[0, 1], 0)], Some(&q(&[1, 2])), Mode::Orbits);
        let c = canonicalize(4, None, &[step(&[0, 1], 0)], Some(&q(&[2, 3])), Mode::Orbits);
        assert_ne!(a.key, b.key);
        assert_ne!(a.key, c.key);
        assert_ne!(b.key, c.key);
    }

    #[test]
    fn literal_mode_separates_everything() {
        let a = canonicalize(3, None, &[], Some(&q(&[0, 1])), Mode::Literal);
        let b = canonicalize(3, None, &[], Some(&q(&[0, 2])), Mode::Literal);
        assert_ne!(a.key, b.key);
        assert_eq!(a.stabilizer, 1);
        assert_eq!(a.orbit, 1);
    }
}
