//! Line-oriented text formats (UTF-8, LF line endings).
//!
//! Instance:
//! ```text
//! KDSM 1
//! k <k>
//! n <n>
//! pref <t> <i> : <i1> <i2> ...
//! ```
//! with one `pref` line per agent in increasing `(t, i)` order. The parser
//! also accepts lines in any order and treats missing agents as having empty
//! lists.
//!
//! Matching:
//! ```text
//! KDSM-MATCHING 1
//! family <i0> <i1> ... <i(k-1)>
//! ```
//! sorted by the type-0 member.
//!
//! Agent maps, one line per output agent sorted by flat id `t * n + i`:
//! `<flat-id> <j> <input-agent-t> <input-agent-i> <t>` for the completion and
//! `<flat-id> <i> <j> <t>` for the lift.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Family, Instance, Matching};
use crate::reduce::{CorrMap3K, GadgetMap};

pub const INSTANCE_MAGIC: &str = "KDSM 1";
pub const MATCHING_MAGIC: &str = "KDSM-MATCHING 1";

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::with_capacity(16 + inst.agent_count() * (8 + 3 * inst.n()));
    let _ = writeln!(out, "{INSTANCE_MAGIC}");
    let _ = writeln!(out, "k {}", inst.k());
    let _ = writeln!(out, "n {}", inst.n());
    for a in inst.agents() {
        let _ = write!(out, "pref {} {} :", a.t, a.i);
        for b in inst.list(a) {
            let _ = write!(out, " {b}");
        }
        out.push('\n');
    }
    out
}

fn numbers(line_no: usize, fields: &[&str]) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("expected a number, found `{f}`")))
        })
        .collect()
}

fn header_value(lines: &mut std::iter::Enumerate<std::str::Lines<'_>>, key: &str) -> Result<usize> {
    let (idx, line) = lines
        .next()
        .ok_or_else(|| Error::parse(0, format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => v
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad value for `{key}`"))),
        _ => Err(Error::parse(idx + 1, format!("expected `{key} <value>`"))),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == INSTANCE_MAGIC => {}
        _ => return Err(Error::parse(1, format!("expected `{INSTANCE_MAGIC}`"))),
    }
    let k = header_value(&mut lines, "k")?;
    let n = header_value(&mut lines, "n")?;
    if k < 2 {
        return Err(Error::parse(2, "k must be at least 2"));
    }
    let mut lists: Vec<Option<Vec<usize>>> = vec![None; k * n];
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, "expected `pref <t> <i> : ...`"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        if head.len() != 3 || head[0] != "pref" {
            return Err(Error::parse(line_no, "expected `pref <t> <i> : ...`"));
        }
        let ti = numbers(line_no, &head[1..])?;
        let (t, i) = (ti[0], ti[1]);
        if t >= k || i >= n {
            return Err(Error::parse(line_no, format!("agent ({t},{i}) out of range")));
        }
        let entries = numbers(line_no, &tail.split_whitespace().collect::<Vec<_>>())?;
        let slot = &mut lists[t * n + i];
        if slot.is_some() {
            return Err(Error::parse(line_no, format!("second list for agent ({t},{i})")));
        }
        *slot = Some(entries);
    }
    Instance::new(k, n, lists.into_iter().map(Option::unwrap_or_default).collect())
}

pub fn write_matching(m: &Matching) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MATCHING_MAGIC}");
    for f in m.families() {
        let _ = writeln!(out, "family {f}");
    }
    out
}

/// Parses the family lines; dimensions and disjointness are checked when the
/// families are turned into a [`Matching`].
pub fn parse_families(text: &str) -> Result<Vec<Family>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == MATCHING_MAGIC => {}
        _ => return Err(Error::parse(1, format!("expected `{MATCHING_MAGIC}`"))),
    }
    let mut families = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] != "family" {
            return Err(Error::parse(idx + 1, "expected `family <i0> ...`"));
        }
        families.push(Family::new(numbers(idx + 1, &fields[1..])?));
    }
    Ok(families)
}

/// Parses a matching against an instance and checks it fully.
pub fn parse_matching(text: &str, inst: &Instance) -> Result<Matching> {
    Matching::checked(inst, parse_families(text)?)
}

pub fn write_gadget_map(map: &GadgetMap) -> String {
    let mut out = String::new();
    for (a, g) in map.entries() {
        let flat = a.t * map.output_n() + a.i;
        let _ = writeln!(out, "{flat} {} {} {} {}", g.j, g.source.t, g.source.i, g.t);
    }
    out
}

pub fn write_corr_map(map: &CorrMap3K) -> String {
    let mut out = String::new();
    for (a, c) in map.entries() {
        let flat = a.t * map.output_n() + a.i;
        let _ = writeln!(out, "{flat} {} {} {}", c.i, c.j, c.t);
    }
    out
}

/// Shape of a parsed map file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// Completion map: dimension `k` and input identifiers per type `n`.
    Gadget { k: usize, n: usize },
    /// Lift map: target dimension and input identifiers per type.
    Lift { target_k: usize, n: usize },
}

/// Reads a map file and recovers the reduction's dimensions. Every line must
/// agree with the arithmetic encoding for those dimensions.
pub fn parse_map(text: &str) -> Result<MapKind> {
    let rows: Vec<(usize, Vec<usize>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| Ok((idx + 1, numbers(idx + 1, &l.split_whitespace().collect::<Vec<_>>())?)))
        .collect::<Result<_>>()?;
    let Some((_, first)) = rows.first() else {
        return Err(Error::parse(1, "empty map file"));
    };
    let width = first.len();
    if rows.iter().any(|(_, r)| r.len() != width) {
        return Err(Error::parse(1, "map lines have differing column counts"));
    }
    let kind = match width {
        5 => {
            let k = rows.iter().map(|(_, r)| r[4]).max().unwrap_or(0) + 1;
            let n = rows.iter().map(|(_, r)| r[3]).max().unwrap_or(0) + 1;
            MapKind::Gadget { k, n }
        }
        4 => {
            let target_k = rows.iter().map(|(_, r)| r[3]).max().unwrap_or(0) + 1;
            let n = rows.iter().map(|(_, r)| r[1].max(r[2])).max().unwrap_or(0) + 1;
            MapKind::Lift { target_k, n }
        }
        _ => return Err(Error::parse(1, format!("unrecognized map with {width} columns"))),
    };
    let expected = match kind {
        MapKind::Gadget { k, n } => {
            let cols = (k - 1) * (k - 1) + 1;
            let out_n = cols * k * n;
            let mut all = Vec::with_capacity(k * out_n);
            for t in 0..k {
                for id in 0..out_n {
                    let rest = id % (k * n);
                    all.push(vec![t * out_n + id, id / (k * n), rest / n, rest % n, t]);
                }
            }
            all
        }
        MapKind::Lift { target_k, n } => {
            let out_n = n * n;
            let mut all = Vec::with_capacity(target_k * out_n);
            for t in 0..target_k {
                for id in 0..out_n {
                    all.push(vec![t * out_n + id, id / n, id % n, t]);
                }
            }
            all
        }
    };
    if expected.len() != rows.len() {
        return Err(Error::parse(1, format!("expected {} map lines, found {}", expected.len(), rows.len())));
    }
    for ((line_no, row), want) in rows.iter().zip(&expected) {
        if row != want {
            return Err(Error::parse(*line_no, "map line does not match the encoding"));
        }
    }
    Ok(kind)
}

/// 64-bit FNV-1a over the bytes of the canonical instance text.
pub fn instance_hash(inst: &Instance) -> u64 {
    fnv1a(write_instance(inst).as_bytes())
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}
