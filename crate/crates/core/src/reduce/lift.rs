//! Lifting a 3-dimensional instance with incomplete lists to `k` dimensions.
//!
//! Output agents are triples `(i, j, t)` over `I x I x {0..k}`, stored under
//! identifier `i * n + j`. The diagonal agents of types 0..3 stand for the
//! input agents; the agents of types `3..k` form chains `(i, j, 3) -> ... ->
//! (i, j, k-1) -> (j, j, 0)` which exist only when `(j, 0)` is acceptable to
//! `(i, 2)`. Every output family therefore has the form
//! `((a,a,0), (b,b,1), (c,c,2), (c,a,3), ..., (c,a,k-1))` for an input family
//! `(a, b, c)`.

use crate::error::{Error, Result};
use crate::model::{AgentRef, Family, Instance, Matching};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiftAgent {
    pub i: usize,
    pub j: usize,
    pub t: usize,
}

/// Correspondence between the agents of a 3-dimensional instance and its
/// lifted image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrMap3K {
    n: usize,
    target_k: usize,
}

impl CorrMap3K {
    pub fn new(n: usize, target_k: usize) -> Result<Self> {
        if target_k < 4 {
            return Err(Error::Dimension(format!("target k must be at least 4, got {target_k}")));
        }
        Ok(CorrMap3K { n, target_k })
    }

    pub fn input_n(&self) -> usize {
        self.n
    }

    pub fn target_k(&self) -> usize {
        self.target_k
    }

    pub fn output_n(&self) -> usize {
        self.n * self.n
    }

    pub fn encode(&self, a: LiftAgent) -> AgentRef {
        AgentRef::new(a.t, a.i * self.n + a.j)
    }

    pub fn decode(&self, a: AgentRef) -> LiftAgent {
        LiftAgent {
            i: a.i / self.n,
            j: a.i % self.n,
            t: a.t,
        }
    }

    pub fn is_non_dummy(&self, a: LiftAgent) -> bool {
        a.t < 3 && a.i == a.j
    }

    /// Non-dummy output agent standing for input agent `a`.
    pub fn non_dummy(&self, a: AgentRef) -> AgentRef {
        self.encode(LiftAgent { i: a.i, j: a.i, t: a.t })
    }

    /// Every output agent in identifier order, with its triple.
    pub fn entries(&self) -> impl Iterator<Item = (AgentRef, LiftAgent)> + '_ {
        (0..self.target_k).flat_map(move |t| {
            (0..self.output_n()).map(move |id| {
                let a = AgentRef::new(t, id);
                (a, self.decode(a))
            })
        })
    }

    /// Output family of input family `(a, b, c)`.
    pub fn lift_family(&self, f: &Family) -> Family {
        let m = f.members();
        let (a, b, c) = (m[0], m[1], m[2]);
        let n = self.n;
        let mut out = vec![a * n + a, b * n + b, c * n + c];
        out.extend(std::iter::repeat_n(c * n + a, self.target_k - 3));
        Family::new(out)
    }

    /// Inverse of [`CorrMap3K::lift_family`].
    pub fn lower_family(&self, f: &Family) -> Result<Family> {
        let m = f.members();
        let n = self.n;
        let bad = || Error::NotCanonical(f.to_string());
        if m.len() != self.target_k || m.iter().any(|&x| x >= n * n) {
            return Err(bad());
        }
        let diag = |x: usize| (x / n == x % n).then_some(x / n);
        let a = diag(m[0]).ok_or_else(bad)?;
        let b = diag(m[1]).ok_or_else(bad)?;
        let c = diag(m[2]).ok_or_else(bad)?;
        if m[3..].iter().any(|&x| x != c * n + a) {
            return Err(bad());
        }
        Ok(Family::new(vec![a, b, c]))
    }
}

/// Builds the lifted instance following the five list rules for diagonal,
/// off-diagonal and chain agents.
pub fn lift_3_to_k(x: &Instance, target_k: usize) -> Result<(Instance, CorrMap3K)> {
    if x.k() != 3 {
        return Err(Error::Dimension(format!("lift expects a k=3 instance, got k={}", x.k())));
    }
    let map = CorrMap3K::new(x.n(), target_k)?;
    let n = x.n();
    let k = target_k;
    let out_n = n * n;
    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(k * out_n);
    for t in 0..k {
        for id in 0..out_n {
            let (i, j) = (id / n, id % n);
            let list: Vec<u32> = match t {
                0 | 1 if i == j => x
                    .list(AgentRef::new(t, i))
                    .iter()
                    .map(|&b| (b as usize * n + b as usize) as u32)
                    .collect(),
                2 if i == j => x
                    .list(AgentRef::new(2, i))
                    .iter()
                    .map(|&j2| (i * n + j2 as usize) as u32)
                    .collect(),
                0..=2 => Vec::new(),
                _ if x.rank(AgentRef::new(2, i), j).is_none() => Vec::new(),
                _ if t == k - 1 => vec![(j * n + j) as u32],
                _ => vec![id as u32],
            };
            lists.push(list);
        }
    }
    Ok((Instance::from_raw_u32(k, out_n, lists.iter().map(|l| l.as_slice())), map))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

/// Moves a matching across the lift. `Up` expects a matching of the
/// 3-dimensional instance; `Down` expects one of the lifted instance whose
/// families all have the canonical lifted form.
pub fn transport_matching_3k(map: &CorrMap3K, m: &Matching, direction: Direction) -> Result<Matching> {
    match direction {
        Direction::Up => {
            if m.k() != 3 || m.n() != map.input_n() {
                return Err(Error::Dimension(format!(
                    "expected a 3x{} matching, got {}x{}",
                    map.input_n(),
                    m.k(),
                    m.n()
                )));
            }
            let families = m.families().iter().map(|f| map.lift_family(f)).collect();
            Matching::new(map.target_k(), map.output_n(), families)
        }
        Direction::Down => {
            if m.k() != map.target_k() || m.n() != map.output_n() {
                return Err(Error::Dimension(format!(
                    "expected a {}x{} matching, got {}x{}",
                    map.target_k(),
                    map.output_n(),
                    m.k(),
                    m.n()
                )));
            }
            let families = m
                .families()
                .iter()
                .map(|f| map.lower_family(f))
                .collect::<Result<Vec<_>>>()?;
            Matching::new(3, map.input_n(), families)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Instance {
        // dog 0 ranks men [1, 0], dog 1 ranks only man 0
        Instance::new(
            3,
            2,
            vec![vec![1, 0], vec![0], vec![0, 1], vec![1], vec![1, 0], vec![0]],
        )
        .unwrap()
    }

    #[test]
    fn sizes() {
        let (out, map) = lift_3_to_k(&sample(), 5).unwrap();
        assert_eq!(out.k(), 5);
        assert_eq!(out.n(), 4);
        assert_eq!(out.agent_count(), 20);
        assert_eq!(map.output_n(), 4);
    }

    #[test]
    fn type_two_list_points_into_chains_in_input_order() {
        let (out, map) = lift_3_to_k(&sample(), 5).unwrap();
        // (0,2) has list [(1,0), (0,0)]
        let dog = map.non_dummy(AgentRef::new(2, 0));
        let expected: Vec<u32> = [LiftAgent { i: 0, j: 1, t: 3 }, LiftAgent { i: 0, j: 0, t: 3 }]
            .iter()
            .map(|&a| map.encode(a).i as u32)
            .collect();
        assert_eq!(out.list(dog), expected.as_slice());
    }

    #[test]
    fn broken_chains_are_empty_and_live_chains_close() {
        let (out, map) = lift_3_to_k(&sample(), 5).unwrap();
        // (1,2) lists only (0,0), so chain (1,1,.) is broken.
        for t in 3..5 {
            assert!(out.list(map.encode(LiftAgent { i: 1, j: 1, t })).is_empty());
        }
        assert_eq!(
            out.list(map.encode(LiftAgent { i: 1, j: 0, t: 3 })),
            &[map.encode(LiftAgent { i: 1, j: 0, t: 4 }).i as u32]
        );
        assert_eq!(
            out.list(map.encode(LiftAgent { i: 1, j: 0, t: 4 })),
            &[map.encode(LiftAgent { i: 0, j: 0, t: 0 }).i as u32]
        );
        // off-diagonal agents of input types are inert
        assert!(out.list(map.encode(LiftAgent { i: 0, j: 1, t: 1 })).is_empty());
    }

    #[test]
    fn family_form() {
        let map = CorrMap3K::new(2, 5).unwrap();
        let lifted = map.lift_family(&Family::new(vec![0, 1, 0]));
        let expected: Vec<usize> = [(0, 0, 0), (1, 1, 1), (0, 0, 2), (0, 0, 3), (0, 0, 4)]
            .iter()
            .map(|&(i, j, t)| map.encode(LiftAgent { i, j, t }).i)
            .collect();
        assert_eq!(lifted.members(), expected.as_slice());
        assert_eq!(map.lower_family(&lifted).unwrap(), Family::new(vec![0, 1, 0]));
    }

    #[test]
    fn lifted_families_are_exactly_the_images() {
        let x = sample();
        let (out, map) = lift_3_to_k(&x, 6).unwrap();
        let mut images: Vec<Family> = x.families().iter().map(|f| map.lift_family(f)).collect();
        images.sort();
        assert_eq!(out.families(), images);
    }

    #[test]
    fn down_rejects_non_canonical() {
        let map = CorrMap3K::new(2, 4).unwrap();
        let m = Matching::new(4, 4, vec![Family::new(vec![1, 0, 0, 0])]).unwrap();
        assert!(matches!(
            transport_matching_3k(&map, &m, Direction::Down),
            Err(Error::NotCanonical(_))
        ));
        let empty = Matching::empty(4, 4);
        assert!(transport_matching_3k(&map, &empty, Direction::Down).unwrap().is_empty());
    }

    #[test]
    fn wrong_dimension() {
        let x = Instance::from_fn(4, 1, |_| vec![0]).unwrap();
        assert!(lift_3_to_k(&x, 5).is_err());
        assert!(lift_3_to_k(&sample(), 3).is_err());
    }
}
