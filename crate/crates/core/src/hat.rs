//! Popular matchings with ties (and HA as the tie-free case).
//!
//! A matching `M` of an instance with last resorts is popular iff
//!
//! 1. `M ∩ E1` is a maximum matching of the first-choice graph `G1`, and
//! 2. every agent is matched within `f(a) ∪ s(a)`,
//!
//! where `f(a)` is the first rank group and `s(a)` the best rank group of `a`
//! that meets the Even houses of the Gallai-Edmonds decomposition of `G1`,
//! restricted to those Even houses.

use alloc::vec;
use alloc::vec::Vec;

use crate::bipartite::{self, BipartiteGraph, BipartiteMatching, GeDecomposition, Parity};
use crate::instance::{AgentId, HouseId, Instance, Kind, Matching};
use crate::{Error, Result};

/// Class of an Even house by whether it is an f-house and/or an s-house.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvenClass {
    /// f-house, not an s-house.
    F,
    /// Both.
    FS,
    /// s-house, not an f-house.
    S,
    /// Neither; never used by a popular matching.
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HatLabels {
    pub first: Vec<Vec<HouseId>>,
    pub first_of_house: Vec<Vec<AgentId>>,
    pub second: Vec<Vec<HouseId>>,
    pub decomposition: GeDecomposition,
    /// `Some` exactly for Even houses.
    pub even_class: Vec<Option<EvenClass>>,
    first_choice: BipartiteGraph,
}

impl HatLabels {
    pub fn agent_parity(&self, a: AgentId) -> Parity {
        self.decomposition.left[a.0]
    }

    pub fn house_parity(&self, h: HouseId) -> Parity {
        self.decomposition.right[h.0]
    }

    pub fn is_first(&self, a: AgentId, h: HouseId) -> bool {
        self.first[a.0].contains(&h)
    }

    pub fn is_second(&self, a: AgentId, h: HouseId) -> bool {
        self.second[a.0].contains(&h)
    }

    pub fn first_choice_graph(&self) -> &BipartiteGraph {
        &self.first_choice
    }

    /// Size of a maximum matching of `G1`.
    pub fn first_choice_maximum(&self) -> usize {
        self.decomposition.matching.size()
    }
}

fn require_hat(inst: &Instance) -> Result<()> {
    if !inst.last_resorts_added() {
        return Err(Error::LastResortsMissing);
    }
    match inst.kind() {
        Kind::Ha | Kind::Hat => Ok(()),
        Kind::Cha if inst.has_unit_capacities() => Ok(()),
        found => Err(Error::WrongKind {
            expected: "HA or HAT",
            found,
        }),
    }
}

pub fn compute_fs_hat(inst: &Instance) -> Result<HatLabels> {
    require_hat(inst)?;
    let g1 = bipartite::first_choice_graph(inst);
    let m1 = bipartite::max_matching(&g1);
    let decomposition = bipartite::gallai_edmonds(&g1, &m1)?;

    let first: Vec<Vec<HouseId>> = inst.agent_ids().map(|a| inst.prefs(a).first_group().to_vec()).collect();
    let mut first_of_house = vec![Vec::new(); inst.num_houses()];
    for a in inst.agent_ids() {
        for h in &first[a.0] {
            first_of_house[h.0].push(a);
        }
    }
    let is_even = |h: &HouseId| decomposition.right[h.0] == Parity::Even;
    let second: Vec<Vec<HouseId>> = inst
        .agent_ids()
        .map(|a| {
            inst.prefs(a)
                .groups()
                .iter()
                .find(|g| g.iter().any(is_even))
                .map(|g| g.iter().copied().filter(is_even).collect())
                .unwrap_or_default()
        })
        .collect();

    let mut is_s = vec![false; inst.num_houses()];
    for s in &second {
        for h in s {
            is_s[h.0] = true;
        }
    }
    let even_class = inst
        .house_ids()
        .map(|h| {
            if !is_even(&h) {
                return None;
            }
            let f = !first_of_house[h.0].is_empty();
            Some(match (f, is_s[h.0]) {
                (true, false) => EvenClass::F,
                (true, true) => EvenClass::FS,
                (false, true) => EvenClass::S,
                (false, false) => EvenClass::Star,
            })
        })
        .collect();

    Ok(HatLabels {
        first,
        first_of_house,
        second,
        decomposition,
        even_class,
        first_choice: g1,
    })
}

/// Which vertex of the first-choice graph a witness refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    Agent(AgentId),
    House(HouseId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HatViolation {
    /// The agent is unmatched, so the matching is not agent-complete.
    Unmatched(AgentId),
    /// `M ∩ E1` is smaller than a maximum matching of `G1`. The witness is an
    /// Odd or Unreachable vertex left uncovered by `M ∩ E1`, or else an edge
    /// of `M ∩ E1` that no maximum matching uses.
    FirstChoiceNotMaximum {
        size: usize,
        maximum: usize,
        uncovered: Option<Vertex>,
        wasted_edge: Option<(AgentId, HouseId)>,
    },
    /// The agent's house lies outside `f(a) ∪ s(a)`.
    OutsideFirstAndSecond { agent: AgentId, house: HouseId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HatVerdict {
    Popular,
    NotPopular(HatViolation),
}

impl HatVerdict {
    pub fn is_popular(&self) -> bool {
        matches!(self, HatVerdict::Popular)
    }
}

pub fn is_popular_hat(inst: &Instance, m: &Matching) -> Result<HatVerdict> {
    let labels = compute_fs_hat(inst)?;
    is_popular_hat_with(inst, &labels, m)
}

/// As [`is_popular_hat`], reusing precomputed labels.
pub fn is_popular_hat_with(inst: &Instance, labels: &HatLabels, m: &Matching) -> Result<HatVerdict> {
    inst.validate_matching(m)?;
    if let Some(a) = inst.agent_ids().find(|&a| m.house_of(a).is_none()) {
        return Ok(HatVerdict::NotPopular(HatViolation::Unmatched(a)));
    }

    let first_edges: Vec<(AgentId, HouseId)> = m.pairs().filter(|&(a, h)| labels.is_first(a, h)).collect();
    let maximum = labels.first_choice_maximum();
    if first_edges.len() < maximum {
        let d = &labels.decomposition;
        let mut covered_agent = vec![false; inst.num_agents()];
        let mut covered_house = vec![false; inst.num_houses()];
        for &(a, h) in &first_edges {
            covered_agent[a.0] = true;
            covered_house[h.0] = true;
        }
        let must = |p: Parity| p != Parity::Even;
        let uncovered = inst
            .agent_ids()
            .find(|a| must(d.left[a.0]) && !covered_agent[a.0])
            .map(Vertex::Agent)
            .or_else(|| {
                inst.house_ids()
                    .find(|h| must(d.right[h.0]) && !covered_house[h.0])
                    .map(Vertex::House)
            });
        let wasted_edge = first_edges.iter().copied().find(|&(a, h)| {
            let (pa, ph) = (d.left[a.0], d.right[h.0]);
            (pa == Parity::Odd && must(ph)) || (ph == Parity::Odd && must(pa))
        });
        return Ok(HatVerdict::NotPopular(HatViolation::FirstChoiceNotMaximum {
            size: first_edges.len(),
            maximum,
            uncovered,
            wasted_edge,
        }));
    }

    for (a, h) in m.pairs() {
        if !labels.is_first(a, h) && !labels.is_second(a, h) {
            return Ok(HatVerdict::NotPopular(HatViolation::OutsideFirstAndSecond {
                agent: a,
                house: h,
            }));
        }
    }
    Ok(HatVerdict::Popular)
}

/// Finds a popular matching, or `None` when the instance admits none.
///
/// Works on the graph of edges a popular matching may use: Unreachable agents
/// to their Unreachable first choices, Odd agents to their Even first choices,
/// Even agents to their (necessarily Odd) first choices and to `s(a)`. A
/// maximum matching of `G1` seeds the search; augmenting from it never
/// uncovers an Odd or Unreachable vertex.
pub fn find_popular_hat(inst: &Instance) -> Result<Option<Matching>> {
    let labels = compute_fs_hat(inst)?;
    let d = &labels.decomposition;
    let mut edges = Vec::new();
    for a in inst.agent_ids() {
        let pa = d.left[a.0];
        for &h in &labels.first[a.0] {
            let ph = d.right[h.0];
            let usable = matches!(
                (pa, ph),
                (Parity::Unreachable, Parity::Unreachable) | (Parity::Odd, Parity::Even) | (Parity::Even, Parity::Odd)
            );
            if usable {
                edges.push((a.0, h.0));
            }
        }
        if pa == Parity::Even {
            for &h in &labels.second[a.0] {
                edges.push((a.0, h.0));
            }
        }
    }
    let restricted = BipartiteGraph::new(inst.num_agents(), inst.num_houses(), edges)?;
    let seed = BipartiteMatching::from_pairs(&restricted, d.matching.pairs())?;
    let full = bipartite::max_matching_from(&restricted, seed)?;
    if full.size() < inst.num_agents() {
        return Ok(None);
    }
    let mut m = Matching::empty(inst.num_agents());
    for (a, h) in full.pairs() {
        m.assign(AgentId(a), HouseId(h));
    }
    match is_popular_hat_with(inst, &labels, &m)? {
        HatVerdict::Popular => Ok(Some(m)),
        HatVerdict::NotPopular(v) => Err(Error::Internal(alloc::format!(
            "constructed matching failed the popularity check: {v:?}"
        ))),
    }
}
