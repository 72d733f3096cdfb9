//! Completing an instance with incomplete lists.
//!
//! Each input agent `alpha` gets a gadget: a grid of output agents
//! `(j, alpha, t)` with `j` in `0..=(k-1)^2` and `t` in `0..k`. Column
//! `(k-1)^2` is the boundary. The agent `(0, alpha, alpha.t)` is the non-dummy
//! copy of `alpha`; its list opens with the images of `alpha`'s list.
//!
//! Output identifier of `(j, alpha, t)` is `j * k*n + alpha.t * n + alpha.i`,
//! so identifier order is the lexicographic order of `(j, alpha)` with agents
//! of `A` ordered by `(type, index)`.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::model::{AgentRef, Family, Instance, Matching};
use crate::{par, rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GadgetAgent {
    pub j: usize,
    pub source: AgentRef,
    pub t: usize,
}

/// Agent correspondence of the completion, plus the input lists it needs to
/// answer prefix queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetMap {
    input: Instance,
}

impl GadgetMap {
    pub fn new(input: &Instance) -> Result<Self> {
        if input.k() < 3 {
            return Err(Error::Dimension(format!(
                "completion needs k >= 3, got k={}",
                input.k()
            )));
        }
        Ok(GadgetMap {
            input: input.clone(),
        })
    }

    pub fn input(&self) -> &Instance {
        &self.input
    }

    pub fn k(&self) -> usize {
        self.input.k()
    }

    pub fn input_n(&self) -> usize {
        self.input.n()
    }

    /// `|J| = (k-1)^2 + 1`.
    pub fn columns(&self) -> usize {
        self.boundary_column() + 1
    }

    pub fn boundary_column(&self) -> usize {
        (self.k() - 1) * (self.k() - 1)
    }

    /// `|A| = k * n`.
    pub fn input_agents(&self) -> usize {
        self.input.agent_count()
    }

    pub fn output_n(&self) -> usize {
        self.columns() * self.input_agents()
    }

    pub fn encode(&self, g: GadgetAgent) -> AgentRef {
        AgentRef::new(
            g.t,
            g.j * self.input_agents() + g.source.t * self.input_n() + g.source.i,
        )
    }

    pub fn decode(&self, a: AgentRef) -> GadgetAgent {
        let width = self.input_agents();
        let rest = a.i % width;
        GadgetAgent {
            j: a.i / width,
            source: AgentRef::new(rest / self.input_n(), rest % self.input_n()),
            t: a.t,
        }
    }

    pub fn non_dummy(&self, alpha: AgentRef) -> AgentRef {
        self.encode(GadgetAgent {
            j: 0,
            source: alpha,
            t: alpha.t,
        })
    }

    pub fn is_non_dummy(&self, g: GadgetAgent) -> bool {
        g.j == 0 && g.source.t == g.t
    }

    pub fn is_boundary(&self, g: GadgetAgent) -> bool {
        g.j == self.boundary_column()
    }

    /// Every output agent in identifier order, with its coordinates.
    pub fn entries(&self) -> impl Iterator<Item = (AgentRef, GadgetAgent)> + '_ {
        (0..self.k()).flat_map(move |t| {
            (0..self.output_n()).map(move |id| {
                let a = AgentRef::new(t, id);
                (a, self.decode(a))
            })
        })
    }

    /// Whether output agent `b` lies in the prefix `hatP'` of input agent
    /// `alpha`.
    pub fn in_hat_p_prime(&self, alpha: AgentRef, b: AgentRef) -> bool {
        let next = (alpha.t + 1) % self.k();
        if b.t != next {
            return false;
        }
        let g = self.decode(b);
        g.j == 0 && g.source.t == next && self.input.rank(alpha, g.source.i).is_some()
    }
}

/// The prefix `hatP'` of `alpha`: its list with every entry replaced by the
/// corresponding non-dummy output agent.
pub fn hat_p_prime(map: &GadgetMap, alpha: AgentRef) -> Vec<AgentRef> {
    let next = (alpha.t + 1) % map.k();
    map.input()
        .list(alpha)
        .iter()
        .map(|&b| map.non_dummy(AgentRef::new(next, b as usize)))
        .collect()
}

/// Builds the complete instance. Lists end with "every remaining agent" in
/// identifier order, or in a seeded shuffle when `tail_seed` is given.
pub fn complete_instance(x: &Instance, tail_seed: Option<u64>) -> Result<(Instance, GadgetMap)> {
    let map = GadgetMap::new(x)?;
    let k = map.k();
    let out_n = map.output_n();
    let lists = par::map_range(0..k * out_n, |flat| {
        let agent = AgentRef::new(flat / out_n.max(1), flat % out_n.max(1));
        build_list(&map, agent, tail_seed, flat as u64)
    });
    Ok((Instance::from_raw_u32(k, out_n, lists.iter().map(|l| l.as_slice())), map))
}

fn build_list(map: &GadgetMap, agent: AgentRef, tail_seed: Option<u64>, stream: u64) -> Vec<u32> {
    let g = map.decode(agent);
    let width = map.input_agents();
    let out_n = map.output_n();
    let boundary = map.boundary_column();
    let own = g.source.t * map.input_n() + g.source.i;
    let mut list: Vec<u32> = Vec::with_capacity(out_n);

    if map.is_non_dummy(g) {
        list.extend(hat_p_prime(map, g.source).iter().map(|a| a.i as u32));
        list.extend((0..map.columns()).map(|j| (j * width + own) as u32));
    } else if map.is_boundary(g) {
        list.extend((0..boundary).map(|j| (j * width + own) as u32));
        list.extend((0..width).map(|a| (boundary * width + a) as u32));
    } else {
        list.extend((0..map.columns()).map(|j| (j * width + own) as u32));
    }
    debug_assert!(list.iter().all(|&b| (b as usize) < out_n));

    let mut listed = vec![false; out_n];
    for &b in &list {
        listed[b as usize] = true;
    }
    let head = list.len();
    list.extend((0..out_n as u32).filter(|&b| !listed[b as usize]));
    if let Some(seed) = tail_seed {
        list[head..].shuffle(&mut rng::stream(seed, stream));
    }
    list
}

/// Reads input families off families made entirely of non-dummy agents.
pub fn induce_down(map: &GadgetMap, hat_mu: &Matching) -> Result<Matching> {
    let k = map.k();
    if hat_mu.k() != k || hat_mu.n() != map.output_n() {
        return Err(Error::Dimension(format!(
            "expected a {k}x{} matching, got {}x{}",
            map.output_n(),
            hat_mu.k(),
            hat_mu.n()
        )));
    }
    let mut families = Vec::new();
    for f in hat_mu.families() {
        let mut members = Vec::with_capacity(k);
        for t in 0..k {
            let g = map.decode(f.member(t));
            if !map.is_non_dummy(g) {
                break;
            }
            members.push(g.source.i);
        }
        if members.len() == k && map.input().is_family(&members) {
            families.push(Family::new(members));
        }
    }
    Matching::new(k, map.input_n(), families)
}

/// 1 when `alpha` is matched and has type `t`, else 0.
pub fn delta(mu: &Matching, alpha: AgentRef, t: usize) -> usize {
    usize::from(mu.is_matched(alpha) && alpha.t == t)
}

/// For each type `t`, the boundary agents `((k-1)^2, alpha, t)` with
/// `delta_t(alpha) = 0`, in identifier order.
pub fn boundary_lists(map: &GadgetMap, mu: &Matching) -> Vec<Vec<AgentRef>> {
    let (k, n) = (map.k(), map.input_n());
    (0..k)
        .map(|t| {
            (0..map.input_agents())
                .map(|a| AgentRef::new(a / n, a % n))
                .filter(|&alpha| delta(mu, alpha, t) == 0)
                .map(|alpha| {
                    map.encode(GadgetAgent {
                        j: map.boundary_column(),
                        source: alpha,
                        t,
                    })
                })
                .collect()
        })
        .collect()
}

/// Perfect matching of the completed instance induced by a matching of the
/// input: non-dummy images of `mu`'s families, each gadget row matched
/// straight across (shifted by one column in the row of a matched agent), and
/// the leftover boundary agents zipped together in order.
pub fn induce_up(map: &GadgetMap, mu: &Matching) -> Result<Matching> {
    let (k, n) = (map.k(), map.input_n());
    if mu.k() != k || mu.n() != n {
        return Err(Error::Dimension(format!(
            "expected a {k}x{n} matching, got {}x{}",
            mu.k(),
            mu.n()
        )));
    }
    let width = map.input_agents();
    let mut families = Vec::with_capacity(map.output_n());
    for f in mu.families() {
        families.push(Family::new(
            (0..k).map(|t| map.non_dummy(f.member(t)).i).collect(),
        ));
    }
    for a in 0..width {
        let alpha = AgentRef::new(a / n, a % n);
        for j in 0..map.boundary_column() {
            families.push(Family::new(
                (0..k).map(|t| (j + delta(mu, alpha, t)) * width + a).collect(),
            ));
        }
    }
    let rows = boundary_lists(map, mu);
    let len = width - mu.len();
    debug_assert!(rows.iter().all(|r| r.len() == len));
    for s in 0..len {
        families.push(Family::new(rows.iter().map(|r| r[s].i).collect()));
    }
    Matching::new(k, map.output_n(), families)
}
