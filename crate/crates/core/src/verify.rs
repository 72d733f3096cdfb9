//! Weak-stability verification.
//!
//! Two independent routes decide whether a matching admits a strongly blocking
//! family: a scan over every family, and a bounded cycle search in the graph
//! whose edges point from each agent to every agent it prefers to its
//! partner. A family blocks exactly when its members form a `k`-cycle there.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{Family, Instance, Matching, NONE};
use crate::par;

/// `k * n^k` above which [`Method::Auto`] switches to the cycle search.
pub const DEFAULT_AUTO_THRESHOLD: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Naive,
    Cycle,
    Auto,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Method::Naive),
            "cycle" => Ok(Method::Cycle),
            "auto" => Ok(Method::Auto),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub witness: Option<Family>,
}

impl StabilityVerdict {
    fn from_witness(witness: Option<Family>) -> Self {
        StabilityVerdict {
            stable: witness.is_none(),
            witness,
        }
    }
}

#[inline]
fn partner_rank(inst: &Instance, m: &Matching, flat: usize) -> u32 {
    match m.partner_index(flat) {
        Some(p) => inst.rank_flat(flat, p),
        None => NONE,
    }
}

pub fn is_strongly_blocking(inst: &Instance, m: &Matching, f: &Family) -> Result<bool> {
    if !m.matches_dims(inst) {
        return Err(Error::Dimension(format!(
            "matching is {}x{}, instance is {}x{}",
            m.k(),
            m.n(),
            inst.k(),
            inst.n()
        )));
    }
    if !inst.is_family(f.members()) {
        return Err(Error::InvalidMatching(vec![
            crate::model::MatchingViolation::Unacceptable {
                family: f.clone(),
                t: 0,
            },
        ]));
    }
    Ok(blocks(inst, m, f.members()))
}

/// Assumes `members` is a family of `inst`.
#[inline]
pub(crate) fn blocks(inst: &Instance, m: &Matching, members: &[usize]) -> bool {
    let (k, n) = (inst.k(), inst.n());
    (0..k).all(|t| {
        let flat = t * n + members[t];
        inst.improves(flat, members[(t + 1) % k], partner_rank(inst, m, flat))
    })
}

/// Lexicographically smallest strongly blocking family, by scanning every
/// family of the instance.
pub fn find_blocking_naive(inst: &Instance, m: &Matching) -> Option<Family> {
    let (k, n) = (inst.k(), inst.n());
    if n == 0 {
        return None;
    }
    let sorted: Vec<Vec<u32>> = (0..k * n)
        .map(|f| {
            let mut l = inst.list_flat(f).to_vec();
            l.sort_unstable();
            l
        })
        .collect();
    par::find_map_first(0..n, |i0| {
        let mut members = vec![0usize; k];
        members[0] = i0;
        scan_from(inst, m, &sorted, &mut members, 1).then(|| Family::new(members))
    })
}

fn scan_from(
    inst: &Instance,
    m: &Matching,
    sorted: &[Vec<u32>],
    members: &mut Vec<usize>,
    t: usize,
) -> bool {
    let k = inst.k();
    let prev = (t - 1) * inst.n() + members[t - 1];
    if t == k {
        return inst.rank_flat(prev, members[0]) != NONE && blocks(inst, m, members);
    }
    for &b in &sorted[prev] {
        members[t] = b as usize;
        if scan_from(inst, m, sorted, members, t + 1) {
            return true;
        }
    }
    false
}

/// Finds a blocking family as a cycle of length `k` in the improvement graph,
/// by breadth-first search truncated at depth `k`.
///
/// Every cycle visits each type once per lap, so searching from the type-0
/// vertices in index order finds one whenever any exists.
pub fn find_blocking_cycle(inst: &Instance, m: &Matching) -> Option<Family> {
    let (k, n) = (inst.k(), inst.n());
    let agents = k * n;
    if n == 0 {
        return None;
    }
    let adj: Vec<Vec<u32>> = (0..agents)
        .map(|flat| {
            let t = flat / n;
            let base = ((t + 1) % k) * n;
            let pr = partner_rank(inst, m, flat);
            let list = inst.list_flat(flat);
            let stop = (pr as usize).min(list.len());
            list[..stop].iter().map(|&b| (base + b as usize) as u32).collect()
        })
        .collect();

    let mut depth = vec![NONE; agents];
    let mut parent = vec![NONE; agents];
    let mut stamp = vec![NONE; agents];
    let mut queue = VecDeque::new();
    for start in 0..n {
        queue.clear();
        stamp[start] = start as u32;
        depth[start] = 0;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let d = depth[v];
            for &w in &adj[v] {
                let w = w as usize;
                if w == start {
                    let len = d as usize + 1;
                    // Edges advance the type by one, so closed walks have length divisible by k.
                    assert_eq!(len % k, 0, "cycle of length {len} with k={k}");
                    return Some(trace(&parent, start, v, n, k));
                }
                if stamp[w] != start as u32 && (d as usize) + 1 < k {
                    stamp[w] = start as u32;
                    depth[w] = d + 1;
                    parent[w] = v as u32;
                    queue.push_back(w);
                }
            }
        }
    }
    None
}

fn trace(parent: &[u32], start: usize, last: usize, n: usize, k: usize) -> Family {
    let mut members = vec![0usize; k];
    let mut v = last;
    loop {
        members[v / n] = v % n;
        if v == start {
            break;
        }
        v = parent[v] as usize;
    }
    Family::new(members)
}

pub fn is_weakly_stable(inst: &Instance, m: &Matching, method: Method) -> StabilityVerdict {
    is_weakly_stable_with(inst, m, method, DEFAULT_AUTO_THRESHOLD)
}

pub fn is_weakly_stable_with(
    inst: &Instance,
    m: &Matching,
    method: Method,
    auto_threshold: f64,
) -> StabilityVerdict {
    let method = match method {
        Method::Auto => {
            let work = inst.k() as f64 * (inst.n() as f64).powi(inst.k() as i32);
            if work > auto_threshold {
                Method::Cycle
            } else {
                Method::Naive
            }
        }
        other => other,
    };
    let witness = match method {
        Method::Naive => find_blocking_naive(inst, m),
        _ => find_blocking_cycle(inst, m),
    };
    StabilityVerdict::from_witness(witness)
}
