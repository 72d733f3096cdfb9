//! Exhaustive and budgeted search for weakly stable matchings.
//!
//! The search decides the type-0 agents in index order. Each is either put in
//! a family with currently free agents of the other types or left unmatched.
//! An agent is *final* once its partner can no longer change in the branch: a
//! decided type-0 agent, or any matched agent. A family whose members are all
//! final and which blocks will block every completion, so the branch is cut.
//! Such a family is a `k`-cycle among final agents in the improvement graph,
//! found by a depth-`k` walk from the agent that was just finalized.
//!
//! On complete instances only perfect matchings are explored: a matching of a
//! complete instance that leaves one agent of every type free is blocked by
//! those agents, and equal type sizes mean an imperfect matching does leave
//! one free agent per type.

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{Family, Instance, Matching, NONE};
use crate::par::{self, Exec};
use crate::verify::{self, Method};

/// Default cap on candidate families for exhaustive enumeration.
pub const DEFAULT_FAMILY_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        Budget {
            max_nodes: Some(max_nodes),
            max_time: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Found,
    ExhaustedNone,
    BudgetExceeded,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Found => "FOUND",
            SolveStatus::ExhaustedNone => "EXHAUSTED-NONE",
            SolveStatus::BudgetExceeded => "BUDGET-EXCEEDED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub matching: Option<Matching>,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub family_limit: u128,
    pub exec: Exec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            family_limit: DEFAULT_FAMILY_LIMIT,
            exec: Exec::Parallel,
        }
    }
}

impl SolveOptions {
    pub fn sequential() -> Self {
        SolveOptions {
            exec: Exec::Sequential,
            ..SolveOptions::default()
        }
    }
}

/// Order in which a type-0 agent's candidate families are tried.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    /// Identifier order; leaves come out in canonical matching order.
    Lexicographic,
    /// Each member's list order; tends to reach stable matchings sooner.
    Preference,
}

struct Search<'a> {
    inst: &'a Instance,
    k: usize,
    n: usize,
    order: Order,
    perfect_only: bool,
    used: Vec<bool>,
    partner_rank: Vec<u32>,
    /// `chosen[i * k + t]`: type-`t` member of type-0 agent `i`'s family.
    chosen: Vec<usize>,
    matched0: Vec<bool>,
    decided: usize,
    at_leaf: bool,
    nodes: u64,
    budget: Budget,
    started: Instant,
    exhausted_budget: bool,
}

enum Stop {
    Done,
    Budget,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, order: Order, budget: Budget) -> Self {
        let (k, n) = (inst.k(), inst.n());
        Search {
            inst,
            k,
            n,
            order,
            perfect_only: inst.is_complete(),
            used: vec![false; k * n],
            partner_rank: vec![NONE; k * n],
            chosen: vec![0; k * n],
            matched0: vec![false; n],
            decided: 0,
            at_leaf: false,
            nodes: 0,
            budget,
            started: Instant::now(),
            exhausted_budget: false,
        }
    }

    #[inline]
    fn is_final(&self, flat: usize) -> bool {
        self.at_leaf || self.used[flat] || flat < self.decided
    }

    /// Whether some blocking family made of final agents passes through
    /// `start`.
    fn blocked_through(&self, start: usize) -> bool {
        self.walk(start, start, 0)
    }

    fn walk(&self, start: usize, v: usize, depth: usize) -> bool {
        let pr = self.partner_rank[v];
        if depth + 1 == self.k {
            return self.inst.rank_flat(v, start % self.n) < pr;
        }
        let base = ((v / self.n + 1) % self.k) * self.n;
        let list = self.inst.list_flat(v);
        let stop = (pr as usize).min(list.len());
        list[..stop].iter().any(|&b| {
            let w = base + b as usize;
            self.is_final(w) && self.walk(start, w, depth + 1)
        })
    }

    fn tick(&mut self) -> ControlFlow<Stop> {
        self.nodes += 1;
        if let Some(max) = self.budget.max_nodes {
            if self.nodes > max {
                self.exhausted_budget = true;
                return ControlFlow::Break(Stop::Budget);
            }
        }
        if let Some(max) = self.budget.max_time {
            if self.nodes.is_multiple_of(1024) && self.started.elapsed() > max {
                self.exhausted_budget = true;
                return ControlFlow::Break(Stop::Budget);
            }
        }
        ControlFlow::Continue(())
    }

    fn run(&mut self, first: Option<Option<&[usize]>>, leaf: &mut dyn FnMut(&Search) -> ControlFlow<Stop>) -> ControlFlow<Stop> {
        match first {
            None => self.decide(0, leaf),
            Some(choice) => {
                if self.n == 0 {
                    return self.decide(0, leaf);
                }
                match choice {
                    Some(members) => {
                        self.chosen[..self.k].copy_from_slice(members);
                        self.try_family(0, leaf)
                    }
                    None => self.try_unmatched(0, leaf),
                }
            }
        }
    }

    fn decide(&mut self, i: usize, leaf: &mut dyn FnMut(&Search) -> ControlFlow<Stop>) -> ControlFlow<Stop> {
        if i == self.n {
            return self.finish(leaf);
        }
        self.chosen[i * self.k] = i;
        self.extend(i, 1, leaf)?;
        if !self.perfect_only {
            self.try_unmatched(i, leaf)?;
        }
        ControlFlow::Continue(())
    }

    fn extend(&mut self, i: usize, t: usize, leaf: &mut dyn FnMut(&Search) -> ControlFlow<Stop>) -> ControlFlow<Stop> {
        let (k, n) = (self.k, self.n);
        let prev = (t - 1) * n + self.chosen[i * k + t - 1];
        if t == k {
            if self.inst.rank_flat(prev, i) != NONE {
                return self.try_family(i, leaf);
            }
            return ControlFlow::Continue(());
        }
        let base = t * n;
        match self.order {
            Order::Preference => {
                let inst = self.inst;
                for &b in inst.list_flat(prev) {
                    let b = b as usize;
                    if !self.used[base + b] {
                        self.chosen[i * k + t] = b;
                        self.extend(i, t + 1, leaf)?;
                    }
                }
            }
            Order::Lexicographic => {
                for b in 0..n {
                    if !self.used[base + b] && self.inst.rank_flat(prev, b) != NONE {
                        self.chosen[i * k + t] = b;
                        self.extend(i, t + 1, leaf)?;
                    }
                }
            }
        }
        ControlFlow::Continue(())
    }

    fn try_family(&mut self, i: usize, leaf: &mut dyn FnMut(&Search) -> ControlFlow<Stop>) -> ControlFlow<Stop> {
        self.tick()?;
        let (k, n) = (self.k, self.n);
        for t in 0..k {
            let flat = t * n + self.chosen[i * k + t];
            let next = self.chosen[i * k + (t + 1) % k];
            self.used[flat] = true;
            self.partner_rank[flat] = self.inst.rank_flat(flat, next);
        }
        self.matched0[i] = true;
        self.decided = i + 1;
        let blocked = (0..k).any(|t| self.blocked_through(t * n + self.chosen[i * k + t]));
        let flow = if blocked {
            ControlFlow::Continue(())
        } else {
            self.decide(i + 1, leaf)
        };
        for t in 0..k {
            let flat = t * n + self.chosen[i * k + t];
            self.used[flat] = false;
            self.partner_rank[flat] = NONE;
        }
        self.matched0[i] = false;
        self.decided = i;
        flow
    }

    fn try_unmatched(&mut self, i: usize, leaf: &mut dyn FnMut(&Search) -> ControlFlow<Stop>) -> ControlFlow<Stop> {
        self.tick()?;
        self.decided = i + 1;
        let flow = if self.blocked_through(i) {
            ControlFlow::Continue(())
        } else {
            self.decide(i + 1, leaf)
        };
        self.decided = i;
        flow
    }

    fn finish(&mut self, leaf: &mut dyn FnMut(&Search) -> ControlFlow<Stop>) -> ControlFlow<Stop> {
        self.at_leaf = true;
        let blocked = (self.n..self.k * self.n).any(|flat| !self.used[flat] && self.blocked_through(flat));
        let flow = if blocked { ControlFlow::Continue(()) } else { leaf(self) };
        self.at_leaf = false;
        flow
    }

    fn matching(&self) -> Matching {
        let families = (0..self.n)
            .filter(|&i| self.matched0[i])
            .map(|i| Family::new(self.chosen[i * self.k..(i + 1) * self.k].to_vec()))
            .collect();
        Matching::new(self.k, self.n, families).expect("search keeps families disjoint")
    }
}

/// Decisions available to type-0 agent 0, in lexicographic search order.
fn first_choices(inst: &Instance) -> Vec<Option<Vec<usize>>> {
    let mut out: Vec<Option<Vec<usize>>> = inst
        .families()
        .into_iter()
        .take_while(|f| f.members()[0] == 0)
        .map(|f| Some(f.members().to_vec()))
        .collect();
    if !inst.is_complete() {
        out.push(None);
    }
    out
}

fn check_space(inst: &Instance, opts: &SolveOptions) -> Result<()> {
    let bound = inst.family_count(u128::MAX);
    if bound > opts.family_limit {
        return Err(Error::SpaceTooLarge {
            bound,
            limit: opts.family_limit,
        });
    }
    Ok(())
}

/// Runs `visit` on every weakly stable matching in canonical order, split
/// across the type-0 agent 0's choices. Each branch stops after `limit`.
fn for_each_branch<R: Send>(
    inst: &Instance,
    opts: &SolveOptions,
    init: impl Fn() -> R + Sync + Send,
    visit: impl Fn(&mut R, &Search) -> bool + Sync + Send,
) -> Vec<R> {
    if inst.n() == 0 {
        let mut acc = init();
        let mut search = Search::new(inst, Order::Lexicographic, Budget::unlimited());
        let _ = search.run(None, &mut |s| {
            visit(&mut acc, s);
            ControlFlow::Continue(())
        });
        return vec![acc];
    }
    let choices = first_choices(inst);
    par::map_range_with(opts.exec, 0..choices.len(), |c| {
        let mut acc = init();
        let mut search = Search::new(inst, Order::Lexicographic, Budget::unlimited());
        let _ = search.run(Some(choices[c].as_deref()), &mut |s| {
            if visit(&mut acc, s) {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break(Stop::Done)
            }
        });
        acc
    })
}

/// All weakly stable matchings (at most `limit`), in canonical order.
pub fn enumerate_weakly_stable(inst: &Instance, limit: Option<usize>) -> Result<Vec<Matching>> {
    enumerate_weakly_stable_with(inst, limit, &SolveOptions::default())
}

pub fn enumerate_weakly_stable_with(
    inst: &Instance,
    limit: Option<usize>,
    opts: &SolveOptions,
) -> Result<Vec<Matching>> {
    check_space(inst, opts)?;
    let cap = limit.unwrap_or(usize::MAX);
    if cap == 0 {
        return Ok(Vec::new());
    }
    let branches = for_each_branch(inst, opts, Vec::new, |acc: &mut Vec<Matching>, s| {
        acc.push(s.matching());
        acc.len() < cap
    });
    let mut out: Vec<Matching> = branches.into_iter().flatten().collect();
    out.truncate(cap);
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

pub fn count_weakly_stable(inst: &Instance) -> Result<u64> {
    count_weakly_stable_with(inst, &SolveOptions::default())
}

pub fn count_weakly_stable_with(inst: &Instance, opts: &SolveOptions) -> Result<u64> {
    check_space(inst, opts)?;
    let counts = for_each_branch(inst, opts, || 0u64, |acc, _| {
        *acc += 1;
        true
    });
    Ok(counts.into_iter().sum())
}

/// Depth-first search for one weakly stable matching, trying partners in
/// preference order. Sequential, so node counts are reproducible.
pub fn find_weakly_stable(inst: &Instance, budget: Budget) -> SolveOutcome {
    let started = Instant::now();
    let mut search = Search::new(inst, Order::Preference, budget);
    let mut found = None;
    let _ = search.run(None, &mut |s| {
        found = Some(s.matching());
        ControlFlow::Break(Stop::Done)
    });
    let status = match (&found, search.exhausted_budget) {
        (Some(m), _) => {
            let verdict = verify::is_weakly_stable(inst, m, Method::Auto);
            assert!(verdict.stable, "search produced a blocked matching: {:?}", verdict.witness);
            SolveStatus::Found
        }
        (None, true) => SolveStatus::BudgetExceeded,
        (None, false) => SolveStatus::ExhaustedNone,
    };
    SolveOutcome {
        status,
        matching: found,
        nodes_explored: search.nodes,
        elapsed: started.elapsed(),
    }
}
