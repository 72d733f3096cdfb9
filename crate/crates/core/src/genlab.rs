//! Instance generators, exhaustive enumeration of small instances, and the
//! scripted experiments.
//!
//! Random instances come from [`crate::rng`]: for each agent in flat order,
//! each candidate `0..n` is kept with probability `density`
//! (`Rng::random_bool`), then the kept ones are Fisher-Yates shuffled
//! (`SliceRandom::shuffle`). Sample `s` of an experiment seeded with `seed`
//! draws from stream `s` of that seed, so reports do not depend on thread
//! count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::format;
use crate::model::{Family, Instance, Matching, NONE};
use crate::par::{self, Exec};
use crate::reduce::{self, Direction};
use crate::rng::{self, Rng};
use crate::solve::{self, Budget, SolveOptions, SolveStatus};
use crate::verify;

/// Largest instance space [`enumerate_instances`] will walk.
pub const DEFAULT_INSTANCE_LIMIT: u64 = 100_000_000;

/// Per-instance records kept in a report; aggregates cover every instance.
pub const RESULT_CAP: usize = 1000;

const MIXED_DENSITIES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

pub fn random_instance(seed: u64, k: usize, n: usize, density: f64) -> Instance {
    random_instance_from(&mut rng::stream(seed, 0), k, n, density)
}

/// # Panics
/// If `density` is NaN.
pub fn random_instance_from(rng: &mut Rng, k: usize, n: usize, density: f64) -> Instance {
    let density = density.clamp(0.0, 1.0);
    let mut lists = Vec::with_capacity(k * n);
    for _ in 0..k * n {
        let mut list: Vec<u32> = (0..n as u32).filter(|_| rng.random_bool(density)).collect();
        list.shuffle(rng);
        lists.push(list);
    }
    Instance::from_raw_u32(k, n, lists.iter().map(|l| l.as_slice()))
}

/// A random matching: type-0 agents in random order each try, with
/// probability 3/4, to grow a family by random walk over free acceptable
/// agents.
pub fn random_matching(rng: &mut Rng, inst: &Instance) -> Matching {
    let (k, n) = (inst.k(), inst.n());
    let mut used = vec![false; k * n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut families = Vec::new();
    'agents: for i in order {
        if !rng.random_bool(0.75) {
            continue;
        }
        let mut members = vec![i];
        for t in 1..k {
            let prev = (t - 1) * n + members[t - 1];
            let free: Vec<usize> = inst
                .list_flat(prev)
                .iter()
                .map(|&b| b as usize)
                .filter(|&b| !used[t * n + b])
                .collect();
            match free.choose(rng) {
                Some(&b) => members.push(b),
                None => continue 'agents,
            }
        }
        if inst.rank_flat((k - 1) * n + members[k - 1], i) == NONE {
            continue;
        }
        for (t, &b) in members.iter().enumerate() {
            used[t * n + b] = true;
        }
        families.push(Family::new(members));
    }
    Matching::new(k, n, families).expect("families are disjoint")
}

/// Every instance of one shape, addressable by index in canonical order:
/// agent lists vary like digits of a mixed-radix number with agent `(0, 0)`
/// most significant. Complete lists run through permutations in
/// lexicographic order; incomplete lists through ordered sublists by length,
/// then lexicographically.
#[derive(Clone, Debug)]
pub struct InstanceSpace {
    k: usize,
    n: usize,
    choices: Vec<Vec<u32>>,
    len: u64,
}

pub fn enumerate_instances(k: usize, n: usize, complete: bool) -> Result<InstanceSpace> {
    enumerate_instances_with_limit(k, n, complete, DEFAULT_INSTANCE_LIMIT)
}

pub fn enumerate_instances_with_limit(k: usize, n: usize, complete: bool, limit: u64) -> Result<InstanceSpace> {
    if k < 2 {
        return Err(Error::Dimension(format!("k must be at least 2, got {k}")));
    }
    let per_agent = list_choice_count(n, complete);
    let bound = per_agent.checked_pow((k * n) as u32).unwrap_or(u128::MAX);
    if bound > limit as u128 {
        return Err(Error::SpaceTooLarge {
            bound,
            limit: limit as u128,
        });
    }
    let choices = if complete { permutations(n) } else { sublists(n) };
    Ok(InstanceSpace {
        k,
        n,
        choices,
        len: bound as u64,
    })
}

/// `n!` for complete lists, else the number of ordered sublists of `0..n`.
fn list_choice_count(n: usize, complete: bool) -> u128 {
    let mut total: u128 = 1;
    let mut falling: u128 = 1;
    for r in 1..=n as u128 {
        falling = falling.saturating_mul(n as u128 - r + 1);
        total = total.saturating_add(falling);
    }
    if complete {
        falling
    } else {
        total
    }
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(n: usize, current: &mut Vec<u32>, used: &mut [bool], out: &mut Vec<Vec<u32>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for b in 0..n {
            if !used[b] {
                used[b] = true;
                current.push(b as u32);
                go(n, current, used, out);
                current.pop();
                used[b] = false;
            }
        }
    }
    go(n, &mut current, &mut used, &mut out);
    out
}

fn sublists(n: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for list in &frontier {
            for b in 0..n as u32 {
                if !list.contains(&b) {
                    let mut l = list.clone();
                    l.push(b);
                    next.push(l);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl InstanceSpace {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// # Panics
    /// If `idx >= self.len()`.
    pub fn instance_at(&self, idx: u64) -> Instance {
        assert!(idx < self.len, "index {idx} out of range for {} instances", self.len);
        let agents = self.k * self.n;
        let radix = self.choices.len() as u64;
        let mut digits = vec![0usize; agents];
        let mut rest = idx;
        for d in digits.iter_mut().rev() {
            *d = (rest % radix) as usize;
            rest /= radix;
        }
        Instance::from_raw_u32(self.k, self.n, digits.iter().map(|&d| self.choices[d].as_slice()))
    }

    pub fn iter(&self) -> impl Iterator<Item = Instance> + '_ {
        (0..self.len).map(|idx| self.instance_at(idx))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Random instances tried at each `n` too large to scan exhaustively.
    pub samples_per_n: u64,
    pub seed: u64,
    /// Largest instance space scanned exhaustively.
    pub exhaustive_limit: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            samples_per_n: 200_000,
            seed: 0,
            exhaustive_limit: 1_000_000,
        }
    }
}

/// Evidence that an instance has no weakly stable matching: a complete
/// backtracking search that finished without a leaf, cross-checked by a
/// counting run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub n: usize,
    /// Canonical index when the scan at this `n` was exhaustive, else the
    /// sample number.
    pub index: u64,
    pub exhaustive_scan: bool,
    pub instances_scanned: u64,
    pub families: u128,
    pub search_nodes: u64,
    pub stable_count: u64,
}

/// First 3-DSMI-CYC instance, by increasing `n`, with no weakly stable
/// matching.
pub fn search_counterexample(max_n: usize, budget: &SearchBudget) -> Option<(Instance, Certificate)> {
    let mut scanned = 0u64;
    for n in 1..=max_n {
        let (exhaustive, count) = match enumerate_instances_with_limit(3, n, false, budget.exhaustive_limit) {
            Ok(space) => (Some(space), 0),
            Err(_) => (None, budget.samples_per_n),
        };
        let total = exhaustive.as_ref().map_or(count, |s| s.len());
        let make = |idx: u64| match &exhaustive {
            Some(space) => space.instance_at(idx),
            None => {
                let mut rng = rng::stream(budget.seed, ((n as u64) << 40) | idx);
                let density = *MIXED_DENSITIES[1..].choose(&mut rng).unwrap();
                random_instance_from(&mut rng, 3, n, density)
            }
        };
        const CHUNK: u64 = 1 << 14;
        let mut start = 0;
        while start < total {
            let end = (start + CHUNK).min(total);
            let hit = par::find_map_first(0..(end - start) as usize, |off| {
                let idx = start + off as u64;
                let inst = make(idx);
                let out = solve::find_weakly_stable(&inst, Budget::unlimited());
                (out.status == SolveStatus::ExhaustedNone).then_some((idx, inst, out.nodes_explored))
            });
            if let Some((idx, inst, nodes)) = hit {
                let stable_count = solve::count_weakly_stable_with(&inst, &SolveOptions::sequential())
                    .expect("small instance");
                assert_eq!(stable_count, 0, "search and count disagree");
                let cert = Certificate {
                    n,
                    index: idx,
                    exhaustive_scan: exhaustive.is_some(),
                    instances_scanned: scanned + idx + 1,
                    families: inst.family_count(u128::MAX),
                    search_nodes: nodes,
                    stable_count,
                };
                return Some((inst, cert));
            }
            start = end;
        }
        scanned += total;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentId {
    BorosBound,
    ErikssonBound,
    PpTwoMatchings,
    VerifierEquivalence,
    Lift3kEquivalence,
    CompletePositive,
    CompleteNegative,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::BorosBound,
        ExperimentId::ErikssonBound,
        ExperimentId::PpTwoMatchings,
        ExperimentId::VerifierEquivalence,
        ExperimentId::Lift3kEquivalence,
        ExperimentId::CompletePositive,
        ExperimentId::CompleteNegative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::BorosBound => "boros-bound",
            ExperimentId::ErikssonBound => "eriksson-bound",
            ExperimentId::PpTwoMatchings => "pp-two-matchings",
            ExperimentId::VerifierEquivalence => "verifier-equivalence",
            ExperimentId::Lift3kEquivalence => "lift-3k-equivalence",
            ExperimentId::CompletePositive => "complete-positive",
            ExperimentId::CompleteNegative => "complete-negative",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Knobs shared by all experiments. `None` picks the experiment's default.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExperimentParams {
    pub k: Option<usize>,
    pub n: Option<usize>,
    /// Random samples; `None` means exhaustive where the experiment supports
    /// it.
    pub samples: Option<u64>,
    pub seed: u64,
    /// Node budget for each search.
    pub budget: Option<u64>,
    pub exec: Exec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceResult {
    pub index: u64,
    pub hash: u64,
    pub verdict: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub index: u64,
    pub hash: u64,
    pub message: String,
    pub instance: Instance,
    pub matching: Option<Matching>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    pub params: Vec<(String, String)>,
    /// The first [`RESULT_CAP`] instances in index order.
    pub results: Vec<InstanceResult>,
    pub instances: u64,
    /// Instances per verdict.
    pub verdicts: BTreeMap<String, u64>,
    pub headline: String,
    pub failures: Vec<Failure>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// What one instance of an experiment produced.
struct Outcome {
    instance: Instance,
    verdict: &'static str,
    detail: String,
    /// Set on failure.
    problem: Option<(String, Option<Matching>)>,
}

impl Outcome {
    fn ok(instance: Instance, verdict: &'static str, detail: String) -> Self {
        Outcome {
            instance,
            verdict,
            detail,
            problem: None,
        }
    }

    fn fail(instance: Instance, verdict: &'static str, message: String, matching: Option<Matching>) -> Self {
        Outcome {
            instance,
            verdict,
            detail: String::new(),
            problem: Some((message, matching)),
        }
    }
}

struct Tally {
    results: Vec<InstanceResult>,
    verdicts: BTreeMap<String, u64>,
    failures: Vec<Failure>,
}

/// Runs `each` over `0..total` in chunks, keeping capped records.
fn sweep(total: u64, exec: Exec, each: impl Fn(u64) -> Outcome + Sync + Send) -> Tally {
    const CHUNK: u64 = 1 << 16;
    let mut tally = Tally {
        results: Vec::new(),
        verdicts: BTreeMap::new(),
        failures: Vec::new(),
    };
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let chunk = par::map_range_with(exec, 0..(end - start) as usize, |off| {
            let idx = start + off as u64;
            let out = each(idx);
            let keep = (idx as usize) < RESULT_CAP || out.problem.is_some();
            let hash = if keep { format::instance_hash(&out.instance) } else { 0 };
            (idx, hash, out)
        });
        for (idx, hash, out) in chunk {
            *tally.verdicts.entry(out.verdict.to_string()).or_insert(0) += 1;
            if (idx as usize) < RESULT_CAP {
                tally.results.push(InstanceResult {
                    index: idx,
                    hash,
                    verdict: out.verdict.to_string(),
                    detail: out.detail,
                });
            }
            if let Some((message, matching)) = out.problem {
                tally.failures.push(Failure {
                    index: idx,
                    hash,
                    message,
                    instance: out.instance,
                    matching,
                });
            }
        }
        start = end;
    }
    tally
}

fn mixed_density(rng: &mut Rng) -> f64 {
    *MIXED_DENSITIES.choose(rng).unwrap()
}

fn families_text(m: &Matching) -> String {
    if m.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = m.families().iter().map(|f| f.to_string()).collect();
    format!("{{{}}}", parts.join("; "))
}

pub fn run_experiment(id: ExperimentId, params: &ExperimentParams) -> Result<ExperimentReport> {
    match id {
        ExperimentId::BorosBound => existence(id, params, 3, 2, None),
        ExperimentId::ErikssonBound => existence(id, params, 3, 4, Some(10_000)),
        ExperimentId::PpTwoMatchings => two_matchings(id, params),
        ExperimentId::VerifierEquivalence => verifier_equivalence(id, params),
        ExperimentId::Lift3kEquivalence => lift_equivalence(id, params),
        ExperimentId::CompletePositive => complete_positive(id, params),
        ExperimentId::CompleteNegative => complete_negative(id, params),
    }
}

fn report(
    id: ExperimentId,
    params: Vec<(&str, String)>,
    total: u64,
    tally: Tally,
    headline: impl FnOnce(&BTreeMap<String, u64>) -> String,
) -> ExperimentReport {
    ExperimentReport {
        id,
        params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        results: tally.results,
        instances: total,
        headline: headline(&tally.verdicts),
        verdicts: tally.verdicts,
        failures: tally.failures,
    }
}

fn verdict_count(verdicts: &BTreeMap<String, u64>, v: &str) -> u64 {
    verdicts.get(v).copied().unwrap_or(0)
}

fn samples_text(samples: Option<u64>) -> String {
    samples.map_or_else(|| "exhaustive".to_string(), |s| s.to_string())
}

fn budget_of(params: &ExperimentParams) -> Budget {
    Budget {
        max_nodes: params.budget,
        max_time: None,
    }
}

/// Every complete instance of the shape (or a sample) has a weakly stable
/// matching.
fn existence(
    id: ExperimentId,
    params: &ExperimentParams,
    default_k: usize,
    default_n: usize,
    default_samples: Option<u64>,
) -> Result<ExperimentReport> {
    let k = params.k.unwrap_or(default_k);
    let n = params.n.unwrap_or(default_n);
    let samples = params.samples.or(default_samples);
    let space = match samples {
        None => Some(enumerate_instances(k, n, true)?),
        Some(_) => None,
    };
    let total = space.as_ref().map_or_else(|| samples.unwrap(), |s| s.len());
    let budget = budget_of(params);
    let tally = sweep(total, params.exec, |idx| {
        let inst = match &space {
            Some(space) => space.instance_at(idx),
            None => random_instance_from(&mut rng::stream(params.seed, idx), k, n, 1.0),
        };
        let out = solve::find_weakly_stable(&inst, budget);
        match out.status {
            SolveStatus::Found => {
                let m = out.matching.unwrap();
                Outcome::ok(inst, "stable", families_text(&m))
            }
            SolveStatus::ExhaustedNone => {
                Outcome::fail(inst, "none", "no weakly stable matching".to_string(), None)
            }
            SolveStatus::BudgetExceeded => Outcome::fail(
                inst,
                "undecided",
                format!("budget exceeded after {} nodes", out.nodes_explored),
                None,
            ),
        }
    });
    Ok(report(
        id,
        vec![
            ("k", k.to_string()),
            ("n", n.to_string()),
            ("samples", samples_text(samples)),
            ("seed", params.seed.to_string()),
        ],
        total,
        tally,
        |v| format!("{}/{} stable", verdict_count(v, "stable"), total),
    ))
}

fn two_matchings(id: ExperimentId, params: &ExperimentParams) -> Result<ExperimentReport> {
    let k = params.k.unwrap_or(3);
    let n = params.n.unwrap_or(5);
    let total = params.samples.unwrap_or(200);
    let opts = SolveOptions::sequential();
    let families = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if families > opts.family_limit {
        return Err(Error::SpaceTooLarge {
            bound: families,
            limit: opts.family_limit,
        });
    }
    let tally = sweep(total, params.exec, |idx| {
        let inst = random_instance_from(&mut rng::stream(params.seed, idx), k, n, 1.0);
        let count = solve::count_weakly_stable_with(&inst, &opts).expect("checked above");
        if count >= 2 {
            Outcome::ok(inst, "two-or-more", format!("count={count}"))
        } else {
            Outcome::fail(inst, "fewer", format!("only {count} weakly stable matchings"), None)
        }
    });
    Ok(report(
        id,
        vec![
            ("k", k.to_string()),
            ("n", n.to_string()),
            ("samples", total.to_string()),
            ("seed", params.seed.to_string()),
        ],
        total,
        tally,
        |v| format!("{}/{} with at least 2 stable", verdict_count(v, "two-or-more"), total),
    ))
}

/// Random shapes with `k` in 3..=5 and `n <= max_n`; a quarter of the
/// matchings come from the solver so stable cases are well represented.
fn verifier_equivalence(id: ExperimentId, params: &ExperimentParams) -> Result<ExperimentReport> {
    let max_n = params.n.unwrap_or(6);
    let total = params.samples.unwrap_or(1000);
    let tally = sweep(total, params.exec, |idx| {
        let mut rng = rng::stream(params.seed, idx);
        let k = rng.random_range(3..=5);
        let n = rng.random_range(0..=max_n);
        let density = mixed_density(&mut rng);
        let inst = random_instance_from(&mut rng, k, n, density);
        let m = if rng.random_bool(0.25) {
            solve::find_weakly_stable(&inst, Budget::nodes(100_000))
                .matching
                .unwrap_or_else(|| random_matching(&mut rng, &inst))
        } else {
            random_matching(&mut rng, &inst)
        };
        let naive = verify::find_blocking_naive(&inst, &m);
        let cycle = verify::find_blocking_cycle(&inst, &m);
        let sound = |w: &Option<Family>| {
            w.as_ref()
                .is_none_or(|f| verify::is_strongly_blocking(&inst, &m, f).unwrap_or(false))
        };
        let detail = format!("k={k} n={n}");
        if naive.is_some() != cycle.is_some() {
            let msg = format!("naive {:?} vs cycle {:?} on {}", naive, cycle, families_text(&m));
            return Outcome::fail(inst, "disagree", msg, Some(m));
        }
        if !sound(&naive) || !sound(&cycle) {
            let msg = format!("witness does not block {}", families_text(&m));
            return Outcome::fail(inst, "bad-witness", msg, Some(m));
        }
        Outcome::ok(inst, if naive.is_some() { "unstable" } else { "stable" }, detail)
    });
    Ok(report(
        id,
        vec![
            ("k", "3..5".to_string()),
            ("n", format!("0..{max_n}")),
            ("samples", total.to_string()),
            ("seed", params.seed.to_string()),
        ],
        total,
        tally,
        |v| {
            let agree = verdict_count(v, "stable") + verdict_count(v, "unstable");
            format!("{agree}/{total} agree")
        },
    ))
}

/// The lift maps the weakly stable matchings of a 3-dimensional instance
/// one-to-one onto those of the lifted instance.
fn lift_equivalence(id: ExperimentId, params: &ExperimentParams) -> Result<ExperimentReport> {
    let target_k = params.k.unwrap_or(5);
    let n = params.n.unwrap_or(2);
    reduce::CorrMap3K::new(n, target_k)?;
    let space = match params.samples {
        None => Some(enumerate_instances(3, n, false)?),
        Some(_) => None,
    };
    let total = space.as_ref().map_or_else(|| params.samples.unwrap(), |s| s.len());
    let opts = SolveOptions::sequential();
    let tally = sweep(total, params.exec, |idx| {
        let inst = match &space {
            Some(space) => space.instance_at(idx),
            None => {
                let mut rng = rng::stream(params.seed, idx);
                let density = mixed_density(&mut rng);
                random_instance_from(&mut rng, 3, n, density)
            }
        };
        let (lifted, map) = reduce::lift_3_to_k(&inst, target_k).expect("checked shape");
        let below = solve::enumerate_weakly_stable_with(&inst, None, &opts);
        let above = solve::enumerate_weakly_stable_with(&lifted, None, &opts);
        let (below, above) = match (below, above) {
            (Ok(b), Ok(a)) => (b, a),
            (Err(e), _) | (_, Err(e)) => return Outcome::fail(inst, "error", e.to_string(), None),
        };
        if below.is_empty() != above.is_empty() {
            let msg = format!("{} stable below, {} above", below.len(), above.len());
            return Outcome::fail(inst, "mismatch", msg, None);
        }
        let mut images = Vec::with_capacity(below.len());
        for m in &below {
            let up = reduce::transport_matching_3k(&map, m, Direction::Up);
            let back = up.as_ref().ok().map(|u| reduce::transport_matching_3k(&map, u, Direction::Down));
            match (up, back) {
                (Ok(u), Some(Ok(d))) if &d == m => images.push(u),
                _ => {
                    let msg = format!("round trip changed {}", families_text(m));
                    return Outcome::fail(inst, "round-trip", msg, Some(m.clone()));
                }
            }
        }
        images.sort();
        if images != above {
            let msg = format!("images of {} stable matchings differ from the {} above", below.len(), above.len());
            return Outcome::fail(inst, "mismatch", msg, None);
        }
        let verdict = if below.is_empty() { "both-none" } else { "both-some" };
        Outcome::ok(inst, verdict, format!("count={}", below.len()))
    });
    Ok(report(
        id,
        vec![
            ("k", "3".to_string()),
            ("target_k", target_k.to_string()),
            ("n", n.to_string()),
            ("samples", samples_text(params.samples)),
            ("seed", params.seed.to_string()),
        ],
        total,
        tally,
        |v| {
            let ok = verdict_count(v, "both-none") + verdict_count(v, "both-some");
            format!("{ok}/{total} equivalent")
        },
    ))
}

/// A random instance of type count `k` with `1 <= n <= max_n`, drawn from
/// stream `(idx, attempt)`.
fn draw(params: &ExperimentParams, idx: u64, attempt: u64, k: usize, max_n: usize) -> (Rng, Instance) {
    let mut rng = rng::stream(params.seed, (idx << 16) | attempt);
    let n = rng.random_range(1..=max_n.max(1));
    let density = mixed_density(&mut rng);
    let inst = random_instance_from(&mut rng, k, n, density);
    (rng, inst)
}

const MAX_ATTEMPTS: u64 = 1 << 16;

/// Runs every structural check on `hat_mu = induce_up(mu)`; `None` when
/// clean.
fn structural_problems(out: &Instance, map: &reduce::GadgetMap, hat_mu: &Matching, mu: &Matching) -> Option<String> {
    let down = match reduce::induce_down(map, hat_mu) {
        Ok(d) => d,
        Err(e) => return Some(e.to_string()),
    };
    if &down != mu {
        return Some(format!("induce_down gave {}", families_text(&down)));
    }
    let mut reports = vec![
        ("confinement", reduce::check_gadget_confinement(map, hat_mu)),
        ("correspondence", reduce::check_correspondence(map, hat_mu, &down)),
        ("preference", reduce::check_preference(out, map, hat_mu, mu)),
    ];
    for alpha in map.input().agents() {
        reports.push(("admirer", reduce::check_admirer(map, hat_mu, alpha, alpha.t)));
    }
    reports
        .into_iter()
        .find(|(_, r)| !r.is_clean())
        .map(|(name, r)| format!("{name}: {}", r.violations[0]))
}

fn complete_positive(id: ExperimentId, params: &ExperimentParams) -> Result<ExperimentReport> {
    let k = params.k.unwrap_or(3);
    let max_n = params.n.unwrap_or(3);
    reduce::GadgetMap::new(&Instance::from_fn(k, 0, |_| vec![])?)?;
    let total = params.samples.unwrap_or(500);
    let opts = SolveOptions::sequential();
    let tally = sweep(total, params.exec, |idx| {
        let mut last = None;
        for attempt in 0..MAX_ATTEMPTS {
            let (mut rng, inst) = draw(params, idx, attempt, k, max_n);
            let stable = match solve::enumerate_weakly_stable_with(&inst, None, &opts) {
                Ok(s) => s,
                Err(e) => return Outcome::fail(inst, "error", e.to_string(), None),
            };
            let Some(mu) = stable.choose(&mut rng).cloned() else {
                last = Some(inst);
                continue;
            };
            let (out, map) = reduce::complete_instance(&inst, None).expect("k checked");
            let hat_mu = reduce::induce_up(&map, &mu).expect("dimensions match");
            if let Some(w) = verify::find_blocking_cycle(&out, &hat_mu) {
                let msg = format!("induced matching blocked by ({w})");
                return Outcome::fail(inst, "blocked", msg, Some(mu));
            }
            if let Some(msg) = structural_problems(&out, &map, &hat_mu, &mu) {
                return Outcome::fail(inst, "check", msg, Some(mu));
            }
            return Outcome::ok(inst, "stable", format!("mu={}", families_text(&mu)));
        }
        Outcome::fail(last.unwrap(), "no-sample", "no instance with a stable matching".to_string(), None)
    });
    Ok(report(
        id,
        vec![
            ("k", k.to_string()),
            ("n", format!("1..{max_n}")),
            ("samples", total.to_string()),
            ("seed", params.seed.to_string()),
        ],
        total,
        tally,
        |v| format!("{}/{} induced matchings stable", verdict_count(v, "stable"), total),
    ))
}

fn complete_negative(id: ExperimentId, params: &ExperimentParams) -> Result<ExperimentReport> {
    let k = params.k.unwrap_or(3);
    let max_n = params.n.unwrap_or(3);
    reduce::GadgetMap::new(&Instance::from_fn(k, 0, |_| vec![])?)?;
    let total = params.samples.unwrap_or(500);
    let tally = sweep(total, params.exec, |idx| {
        let mut last = None;
        for attempt in 0..MAX_ATTEMPTS {
            let (mut rng, inst) = draw(params, idx, attempt, k, max_n);
            let mu = random_matching(&mut rng, &inst);
            let Some(f) = verify::find_blocking_naive(&inst, &mu) else {
                last = Some(inst);
                continue;
            };
            let (out, map) = reduce::complete_instance(&inst, None).expect("k checked");
            let hat_mu = reduce::induce_up(&map, &mu).expect("dimensions match");
            let image = Family::new((0..k).map(|t| map.non_dummy(f.member(t)).i).collect());
            if !verify::is_strongly_blocking(&out, &hat_mu, &image).unwrap_or(false) {
                let msg = format!("image ({image}) of blocking family ({f}) does not block");
                return Outcome::fail(inst, "not-blocking", msg, Some(mu));
            }
            if let Some(msg) = structural_problems(&out, &map, &hat_mu, &mu) {
                return Outcome::fail(inst, "check", msg, Some(mu));
            }
            return Outcome::ok(inst, "transported", format!("f={f}"));
        }
        Outcome::fail(last.unwrap(), "no-sample", "no unstable matching drawn".to_string(), None)
    });
    Ok(report(
        id,
        vec![
            ("k", k.to_string()),
            ("n", format!("1..{max_n}")),
            ("samples", total.to_string()),
            ("seed", params.seed.to_string()),
        ],
        total,
        tally,
        |v| format!("{}/{} blocking families transported", verdict_count(v, "transported"), total),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_extremes() {
        assert!(random_instance(7, 3, 4, 1.0).is_complete());
        let empty = random_instance(7, 3, 4, 0.0);
        assert!(empty.families().is_empty());
        assert_eq!(solve::enumerate_weakly_stable(&empty, None).unwrap(), vec![Matching::empty(3, 4)]);
        assert_eq!(random_instance(3, 4, 3, 0.5), random_instance(3, 4, 3, 0.5));
    }

    #[test]
    fn space_sizes() {
        assert_eq!(enumerate_instances(3, 1, true).unwrap().len(), 1);
        assert_eq!(enumerate_instances(3, 2, true).unwrap().len(), 64);
        assert_eq!(enumerate_instances(3, 2, false).unwrap().len(), 15625);
        assert_eq!(enumerate_instances(3, 3, true).unwrap().len(), 6u64.pow(9));
        match enumerate_instances(3, 4, true) {
            Err(Error::SpaceTooLarge { bound, .. }) => assert_eq!(bound, 24u128.pow(12)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn incomplete_choices_in_canonical_order() {
        assert_eq!(sublists(2), vec![vec![], vec![0], vec![1], vec![0, 1], vec![1, 0]]);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn space_is_exhaustive_and_ordered() {
        let space = enumerate_instances(3, 2, true).unwrap();
        let all: Vec<String> = space.iter().map(|i| format::write_instance(&i)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 64);
        let last = space.instance_at(63);
        assert!(last.agents().all(|a| last.list(a) == [1, 0]));
        let second = space.instance_at(1);
        assert_eq!(second.list(crate::AgentRef::new(2, 1)), [1, 0]);
        assert_eq!(second.list(crate::AgentRef::new(2, 0)), [0, 1]);
    }

    #[test]
    fn n1_never_counterexample() {
        let budget = SearchBudget::default();
        assert!(search_counterexample(1, &budget).is_none());
    }

    #[test]
    fn random_matchings_are_valid() {
        for s in 0..50 {
            let mut rng = rng::stream(5, s);
            let inst = random_instance_from(&mut rng, 4, 5, 0.6);
            let m = random_matching(&mut rng, &inst);
            assert!(crate::model::validate_matching(&inst, m.families()).is_empty());
        }
    }

    #[test]
    fn unknown_id() {
        assert!(matches!("nope".parse::<ExperimentId>(), Err(Error::UnknownExperiment(_))));
        for id in ExperimentId::ALL {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
    }

    #[test]
    fn boros_small_is_64_of_64() {
        let r = run_experiment(ExperimentId::BorosBound, &ExperimentParams::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.headline, "64/64 stable");
    }

    #[test]
    fn reports_are_reproducible() {
        let params = ExperimentParams {
            samples: Some(20),
            seed: 9,
            ..ExperimentParams::default()
        };
        let seq = ExperimentParams {
            exec: Exec::Sequential,
            ..params
        };
        for id in [ExperimentId::VerifierEquivalence, ExperimentId::CompleteNegative] {
            let a = run_experiment(id, &params).unwrap();
            let b = run_experiment(id, &seq).unwrap();
            assert_eq!(a, b);
            assert!(a.passed(), "{:?}", a.failures);
        }
    }
}
