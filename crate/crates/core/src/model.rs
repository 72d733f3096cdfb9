//! Instances, families and matchings of the cyclic k-dimensional model.
//!
//! Agents are addressed by `(t, i)`: type `t` in `0..k` and identifier `i` in
//! `0..n`. An agent of type `t` ranks a subset of the agents of type
//! `(t + 1) mod k`. An instance whose lists all have length `n` is complete.
//!
//! Internally every agent also has a flat id `t * n + i`, which orders agents
//! the same way as `AgentRef`'s derived `Ord`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentRef {
    pub t: usize,
    pub i: usize,
}

impl AgentRef {
    pub fn new(t: usize, i: usize) -> Self {
        AgentRef { t, i }
    }
}

impl fmt::Display for AgentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.t, self.i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceViolation {
    Duplicate { agent: AgentRef, entry: usize },
    OutOfRange { agent: AgentRef, entry: usize },
    ListCount { expected: usize, found: usize },
    BadDimension { k: usize },
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceViolation::Duplicate { agent, entry } => {
                write!(f, "duplicate entry {entry} in list of {agent}")
            }
            InstanceViolation::OutOfRange { agent, entry } => {
                write!(f, "entry {entry} out of range in list of {agent}")
            }
            InstanceViolation::ListCount { expected, found } => {
                write!(f, "expected {expected} preference lists, found {found}")
            }
            InstanceViolation::BadDimension { k } => write!(f, "dimension k={k} is below 2"),
        }
    }
}

/// Diagnostics for a set of raw preference lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceReport {
    pub violations: Vec<InstanceViolation>,
    pub complete: bool,
}

impl InstanceReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks raw lists (indexed by flat id `t * n + i`) for duplicates and
/// out-of-range entries, and reports whether every list has length `n`.
pub fn validate_instance(k: usize, n: usize, lists: &[Vec<usize>]) -> InstanceReport {
    let mut violations = Vec::new();
    if k < 2 {
        violations.push(InstanceViolation::BadDimension { k });
    }
    if lists.len() != k * n {
        violations.push(InstanceViolation::ListCount {
            expected: k * n,
            found: lists.len(),
        });
    }
    let mut seen = vec![false; n];
    for (flat, list) in lists.iter().enumerate() {
        let agent = AgentRef::new(flat / n.max(1), flat % n.max(1));
        seen.iter_mut().for_each(|s| *s = false);
        for &entry in list {
            if entry >= n {
                violations.push(InstanceViolation::OutOfRange { agent, entry });
            } else if seen[entry] {
                violations.push(InstanceViolation::Duplicate { agent, entry });
            } else {
                seen[entry] = true;
            }
        }
    }
    let complete = lists.len() == k * n && lists.iter().all(|l| l.len() == n);
    InstanceReport {
        violations,
        complete,
    }
}

/// An instance with strict, possibly incomplete, preference lists.
///
/// Immutable once built. Each list carries a precomputed rank table so that
/// preference comparisons are constant time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    k: usize,
    n: usize,
    offsets: Vec<u32>,
    entries: Vec<u32>,
    rank: Vec<u32>,
}

impl Instance {
    /// Builds an instance from lists indexed by flat id `t * n + i`.
    pub fn new(k: usize, n: usize, lists: Vec<Vec<usize>>) -> Result<Self> {
        let report = validate_instance(k, n, &lists);
        if !report.is_ok() {
            return Err(Error::InvalidInstance(report.violations));
        }
        Ok(Self::build(k, n, lists.iter().map(|l| l.as_slice())))
    }

    pub fn from_fn(k: usize, n: usize, mut f: impl FnMut(AgentRef) -> Vec<usize>) -> Result<Self> {
        let lists = (0..k * n).map(|flat| f(AgentRef::new(flat / n, flat % n))).collect();
        Self::new(k, n, lists)
    }

    /// Builds an instance whose types may have different sizes. Smaller types
    /// are padded with agents whose lists are empty.
    pub fn padded(per_type: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let k = per_type.len();
        let n = per_type.iter().map(|lists| lists.len()).max().unwrap_or(0);
        let mut lists = Vec::with_capacity(k * n);
        for mut type_lists in per_type {
            type_lists.resize(n, Vec::new());
            lists.extend(type_lists);
        }
        Self::new(k, n, lists)
    }

    /// Assumes the lists are valid.
    pub(crate) fn build<'a>(k: usize, n: usize, lists: impl Iterator<Item = &'a [usize]>) -> Self {
        let agents = k * n;
        let mut offsets = Vec::with_capacity(agents + 1);
        let mut entries = Vec::new();
        let mut rank = vec![NONE; agents * n];
        offsets.push(0);
        for (flat, list) in lists.enumerate() {
            for (pos, &b) in list.iter().enumerate() {
                entries.push(b as u32);
                rank[flat * n + b] = pos as u32;
            }
            offsets.push(entries.len() as u32);
        }
        debug_assert_eq!(offsets.len(), agents + 1);
        Instance {
            k,
            n,
            offsets,
            entries,
            rank,
        }
    }

    pub(crate) fn from_raw_u32<'a>(k: usize, n: usize, lists: impl IntoIterator<Item = &'a [u32]>) -> Self {
        let agents = k * n;
        let mut offsets = Vec::with_capacity(agents + 1);
        let mut entries = Vec::new();
        let mut rank = vec![NONE; agents * n];
        offsets.push(0);
        for (flat, list) in lists.into_iter().enumerate() {
            for (pos, &b) in list.iter().enumerate() {
                debug_assert_eq!(rank[flat * n + b as usize], NONE);
                entries.push(b);
                rank[flat * n + b as usize] = pos as u32;
            }
            offsets.push(entries.len() as u32);
        }
        Instance {
            k,
            n,
            offsets,
            entries,
            rank,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agent_count(&self) -> usize {
        self.k * self.n
    }

    pub fn next_type(&self, t: usize) -> usize {
        (t + 1) % self.k
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentRef> + '_ {
        (0..self.agent_count()).map(move |f| self.agent(f))
    }

    #[inline]
    pub(crate) fn flat(&self, a: AgentRef) -> usize {
        a.t * self.n + a.i
    }

    #[inline]
    pub(crate) fn agent(&self, flat: usize) -> AgentRef {
        AgentRef::new(flat / self.n, flat % self.n)
    }

    pub fn contains(&self, a: AgentRef) -> bool {
        a.t < self.k && a.i < self.n
    }

    /// Preference list of `a`; entries are identifiers of type `a.t + 1`.
    pub fn list(&self, a: AgentRef) -> &[u32] {
        self.list_flat(self.flat(a))
    }

    #[inline]
    pub(crate) fn list_flat(&self, flat: usize) -> &[u32] {
        &self.entries[self.offsets[flat] as usize..self.offsets[flat + 1] as usize]
    }

    /// Position of identifier `b` in `a`'s list.
    pub fn rank(&self, a: AgentRef, b: usize) -> Option<usize> {
        match self.rank_flat(self.flat(a), b) {
            NONE => None,
            r => Some(r as usize),
        }
    }

    /// Position of `b` in the list of flat agent `flat`, or `NONE`.
    #[inline]
    pub(crate) fn rank_flat(&self, flat: usize, b: usize) -> u32 {
        self.rank[flat * self.n + b]
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == self.agent_count() * self.n
    }

    pub fn validate(&self) -> InstanceReport {
        InstanceReport {
            violations: Vec::new(),
            complete: self.is_complete(),
        }
    }

    /// Whether `a` prefers `b` to `c`. Here `c` is either an agent of the next
    /// type or `a` itself, standing for "unmatched".
    pub fn prefers(&self, a: AgentRef, b: AgentRef, c: AgentRef) -> Result<bool> {
        let next = self.next_type(a.t);
        if b.t != next {
            return Err(Error::TypeMismatch {
                agent: b,
                expected: next,
                found: b.t,
            });
        }
        if c != a && c.t != next {
            return Err(Error::TypeMismatch {
                agent: c,
                expected: next,
                found: c.t,
            });
        }
        let fa = self.flat(a);
        let rb = self.rank_flat(fa, b.i);
        let rc = if c == a { NONE } else { self.rank_flat(fa, c.i) };
        Ok(rb != NONE && rb < rc)
    }

    /// `a` prefers identifier `b` to its partner whose rank is `partner_rank`
    /// (`NONE` when unmatched).
    #[inline]
    pub(crate) fn improves(&self, flat: usize, b: usize, partner_rank: u32) -> bool {
        self.rank_flat(flat, b) < partner_rank
    }

    /// Whether `members` forms a family: one identifier per type, each
    /// acceptable to its predecessor.
    pub fn is_family(&self, members: &[usize]) -> bool {
        members.len() == self.k
            && members.iter().all(|&i| i < self.n)
            && (0..self.k).all(|t| {
                self.rank_flat(t * self.n + members[t], members[(t + 1) % self.k]) != NONE
            })
    }

    /// Number of families, capped at `cap + 1` once it exceeds `cap`.
    pub fn family_count(&self, cap: u128) -> u128 {
        if self.n == 0 {
            return 0;
        }
        if self.is_complete() {
            return (self.n as u128).checked_pow(self.k as u32).unwrap_or(u128::MAX).min(cap.saturating_add(1));
        }
        let n = self.n;
        let mut total: u128 = 0;
        let mut ways = vec![0u128; n];
        let mut next = vec![0u128; n];
        for start in 0..n {
            ways.iter_mut().for_each(|w| *w = 0);
            ways[start] = 1;
            for t in 0..self.k - 1 {
                next.iter_mut().for_each(|w| *w = 0);
                for (i, &w) in ways.iter().enumerate() {
                    if w == 0 {
                        continue;
                    }
                    for &b in self.list_flat(t * n + i) {
                        next[b as usize] = next[b as usize].saturating_add(w);
                    }
                }
                std::mem::swap(&mut ways, &mut next);
            }
            let last = self.k - 1;
            for (i, &w) in ways.iter().enumerate() {
                if w != 0 && self.rank_flat(last * n + i, start) != NONE {
                    total = total.saturating_add(w);
                }
            }
            if total > cap {
                return cap.saturating_add(1);
            }
        }
        total
    }

    /// All families in increasing lexicographic order of their members.
    pub fn families(&self) -> Vec<Family> {
        let mut out = Vec::new();
        let mut members = vec![0usize; self.k];
        let mut sorted: Vec<Vec<u32>> = (0..self.agent_count())
            .map(|f| self.list_flat(f).to_vec())
            .collect();
        sorted.iter_mut().for_each(|l| l.sort_unstable());
        for i0 in 0..self.n {
            members[0] = i0;
            self.extend_families(&sorted, &mut members, 1, &mut out);
        }
        out
    }

    fn extend_families(
        &self,
        sorted: &[Vec<u32>],
        members: &mut Vec<usize>,
        t: usize,
        out: &mut Vec<Family>,
    ) {
        let prev = (t - 1) * self.n + members[t - 1];
        if t == self.k {
            if self.rank_flat(prev, members[0]) != NONE {
                out.push(Family::new(members.clone()));
            }
            return;
        }
        for &b in &sorted[prev] {
            members[t] = b as usize;
            self.extend_families(sorted, members, t + 1, out);
        }
    }
}

/// A tuple of identifiers, `members[t]` being the type-`t` agent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Family {
    members: Vec<usize>,
}

impl Family {
    pub fn new(members: Vec<usize>) -> Self {
        Family { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn member(&self, t: usize) -> AgentRef {
        AgentRef::new(t, self.members[t])
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }
}

impl From<Vec<usize>> for Family {
    fn from(members: Vec<usize>) -> Self {
        Family::new(members)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, m) in self.members.iter().enumerate() {
            if t > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingViolation {
    Arity { family: Family, expected: usize },
    OutOfRange { family: Family },
    Unacceptable { family: Family, t: usize },
    Overlap { agent: AgentRef },
}

impl fmt::Display for MatchingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingViolation::Arity { family, expected } => {
                write!(f, "family ({family}) has {} members, expected {expected}", family.k())
            }
            MatchingViolation::OutOfRange { family } => {
                write!(f, "family ({family}) has an identifier out of range")
            }
            MatchingViolation::Unacceptable { family, t } => write!(
                f,
                "family ({family}): type-{} member not in list of type-{t} member",
                (t + 1) % family.k()
            ),
            MatchingViolation::Overlap { agent } => {
                write!(f, "agent {agent} appears in more than one family")
            }
        }
    }
}

/// Checks arity, ranges, acceptability chains and agent-disjointness.
pub fn validate_matching(inst: &Instance, families: &[Family]) -> Vec<MatchingViolation> {
    let (k, n) = (inst.k(), inst.n());
    let mut violations = Vec::new();
    let mut used = vec![false; k * n];
    for family in families {
        if family.k() != k {
            violations.push(MatchingViolation::Arity {
                family: family.clone(),
                expected: k,
            });
            continue;
        }
        if family.members().iter().any(|&i| i >= n) {
            violations.push(MatchingViolation::OutOfRange {
                family: family.clone(),
            });
            continue;
        }
        for t in 0..k {
            let a = family.member(t);
            if inst.rank(a, family.members()[(t + 1) % k]).is_none() {
                violations.push(MatchingViolation::Unacceptable {
                    family: family.clone(),
                    t,
                });
            }
        }
        for t in 0..k {
            let flat = t * n + family.members()[t];
            if used[flat] {
                violations.push(MatchingViolation::Overlap {
                    agent: family.member(t),
                });
            }
            used[flat] = true;
        }
    }
    violations
}

/// A set of agent-disjoint families with constant-time partner lookup.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    k: usize,
    n: usize,
    families: Vec<Family>,
    slot: Vec<u32>,
}

impl Matching {
    pub fn empty(k: usize, n: usize) -> Self {
        Matching {
            k,
            n,
            families: Vec::new(),
            slot: vec![NONE; k * n],
        }
    }

    /// Checks ranges and disjointness only; see [`Matching::checked`] for the
    /// acceptability chain.
    pub fn new(k: usize, n: usize, mut families: Vec<Family>) -> Result<Self> {
        families.sort_unstable();
        let mut slot = vec![NONE; k * n];
        let mut violations = Vec::new();
        for (idx, family) in families.iter().enumerate() {
            if family.k() != k {
                violations.push(MatchingViolation::Arity {
                    family: family.clone(),
                    expected: k,
                });
                continue;
            }
            if family.members().iter().any(|&i| i >= n) {
                violations.push(MatchingViolation::OutOfRange {
                    family: family.clone(),
                });
                continue;
            }
            for t in 0..k {
                let flat = t * n + family.members()[t];
                if slot[flat] != NONE {
                    violations.push(MatchingViolation::Overlap {
                        agent: family.member(t),
                    });
                }
                slot[flat] = idx as u32;
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidMatching(violations));
        }
        Ok(Matching {
            k,
            n,
            families,
            slot,
        })
    }

    pub fn checked(inst: &Instance, families: Vec<Family>) -> Result<Self> {
        let violations = validate_matching(inst, &families);
        if !violations.is_empty() {
            return Err(Error::InvalidMatching(violations));
        }
        Self::new(inst.k(), inst.n(), families)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Families sorted by their type-0 member.
    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn is_perfect(&self) -> bool {
        self.families.len() == self.n
    }

    pub fn family_of(&self, a: AgentRef) -> Option<&Family> {
        match self.slot[a.t * self.n + a.i] {
            NONE => None,
            idx => Some(&self.families[idx as usize]),
        }
    }

    pub fn is_matched(&self, a: AgentRef) -> bool {
        self.slot[a.t * self.n + a.i] != NONE
    }

    /// The next-type member of `a`'s family, or `a` itself when unmatched.
    pub fn partner(&self, a: AgentRef) -> AgentRef {
        match self.family_of(a) {
            Some(f) => f.member((a.t + 1) % self.k),
            None => a,
        }
    }

    /// Partner identifier of flat agent `flat`, or `None`.
    #[inline]
    pub(crate) fn partner_index(&self, flat: usize) -> Option<usize> {
        match self.slot[flat] {
            NONE => None,
            idx => {
                let t = flat / self.n;
                Some(self.families[idx as usize].members[(t + 1) % self.k])
            }
        }
    }

    pub fn matches_dims(&self, inst: &Instance) -> bool {
        self.k == inst.k() && self.n == inst.n()
    }
}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: compare the type-0 agents in index order; a matched agent
/// sorts before an unmatched one, two matched agents compare their families.
impl Ord for Matching {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.k, self.n).cmp(&(other.k, other.n)).then_with(|| {
            for i in 0..self.n {
                let ord = match (self.family_of(AgentRef::new(0, i)), other.family_of(AgentRef::new(0, i))) {
                    (Some(a), Some(b)) => a.cmp(b),
                    (Some(_), None) => Ordering::Less,
                    (None, Some(_)) => Ordering::Greater,
                    (None, None) => Ordering::Equal,
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        })
    }
}
