//! Brute-force reference implementations. They read preference lists only
//! through `Instance::list` and share no code with the library's verifier or
//! solver.

#![allow(dead_code)]

use kdsm::{AgentRef, Family, Instance, Matching};

fn position(inst: &Instance, a: AgentRef, b: usize) -> Option<usize> {
    inst.list(a).iter().position(|&x| x as usize == b)
}

/// Every family, by testing all `n^k` tuples.
pub fn families(inst: &Instance) -> Vec<Vec<usize>> {
    let (k, n) = (inst.k(), inst.n());
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let total = n.pow(k as u32);
    for code in 0..total {
        let mut tuple = vec![0; k];
        let mut rest = code;
        for t in (0..k).rev() {
            tuple[t] = rest % n;
            rest /= n;
        }
        let ok = (0..k).all(|t| position(inst, AgentRef::new(t, tuple[t]), tuple[(t + 1) % k]).is_some());
        if ok {
            out.push(tuple);
        }
    }
    out
}

/// Partner identifier of every agent (`None` when unmatched), by flat id.
fn partners(k: usize, n: usize, matching: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut p = vec![None; k * n];
    for f in matching {
        for t in 0..k {
            p[t * n + f[t]] = Some(f[(t + 1) % k]);
        }
    }
    p
}

fn improves(inst: &Instance, a: AgentRef, b: usize, partner: Option<usize>) -> bool {
    let Some(pb) = position(inst, a, b) else {
        return false;
    };
    match partner {
        None => true,
        Some(p) => pb < position(inst, a, p).expect("partner is acceptable"),
    }
}

/// First blocking family in lexicographic order.
pub fn blocking(inst: &Instance, matching: &[Vec<usize>]) -> Option<Vec<usize>> {
    let (k, n) = (inst.k(), inst.n());
    let p = partners(k, n, matching);
    families(inst).into_iter().find(|f| {
        (0..k).all(|t| improves(inst, AgentRef::new(t, f[t]), f[(t + 1) % k], p[t * n + f[t]]))
    })
}

pub fn blocks(inst: &Instance, m: &Matching, f: &Family) -> bool {
    let (k, n) = (inst.k(), inst.n());
    let fams: Vec<Vec<usize>> = m.families().iter().map(|f| f.members().to_vec()).collect();
    let p = partners(k, n, &fams);
    let f = f.members();
    (0..k).all(|t| improves(inst, AgentRef::new(t, f[t]), f[(t + 1) % k], p[t * n + f[t]]))
}

/// Every matching, as sorted family lists. Exponential; keep instances tiny.
pub fn matchings(inst: &Instance) -> Vec<Vec<Vec<usize>>> {
    let (k, n) = (inst.k(), inst.n());
    let fams = families(inst);
    let mut out = Vec::new();
    let mut used = vec![false; k * n];
    let mut current = Vec::new();
    fn go(
        idx: usize,
        fams: &[Vec<usize>],
        k: usize,
        n: usize,
        used: &mut [bool],
        current: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if idx == fams.len() {
            out.push(current.clone());
            return;
        }
        go(idx + 1, fams, k, n, used, current, out);
        let f = &fams[idx];
        if (0..k).all(|t| !used[t * n + f[t]]) {
            (0..k).for_each(|t| used[t * n + f[t]] = true);
            current.push(f.clone());
            go(idx + 1, fams, k, n, used, current, out);
            current.pop();
            (0..k).for_each(|t| used[t * n + f[t]] = false);
        }
    }
    go(0, &fams, k, n, &mut used, &mut current, &mut out);
    out
}

pub fn to_matching(inst: &Instance, fams: &[Vec<usize>]) -> Matching {
    Matching::new(inst.k(), inst.n(), fams.iter().map(|f| Family::new(f.clone())).collect()).unwrap()
}

/// All weakly stable matchings, sorted in the library's canonical order.
pub fn stable_matchings(inst: &Instance) -> Vec<Matching> {
    let mut out: Vec<Matching> = matchings(inst)
        .into_iter()
        .filter(|m| blocking(inst, m).is_none())
        .map(|m| to_matching(inst, &m))
        .collect();
    out.sort();
    out
}

/// Weakly stable perfect matchings of a complete 3-dimensional instance,
/// found by trying all `(n!)^2` pairs of permutations.
pub fn stable_perfect_count_3(inst: &Instance) -> usize {
    assert_eq!(inst.k(), 3);
    assert!(inst.is_complete());
    let n = inst.n();
    let perms = permutations(n);
    let mut count = 0;
    for p in &perms {
        for q in &perms {
            let fams: Vec<Vec<usize>> = (0..n).map(|i| vec![i, p[i], q[i]]).collect();
            if blocking(inst, &fams).is_none() {
                count += 1;
            }
        }
    }
    count
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}
