//! From bipartite graphs to capacitated instances with as many popular
//! matchings as the graph has matchings.
//!
//! Every left vertex `u` becomes a house `u` of capacity `deg(u)` plus a
//! unit house `u'`; every right vertex `v` a unit house. A copy agent
//! `x_u` ranks `u` then `u'` and starts on `u'`; an edge agent `y_u_v`
//! ranks `u` then `v` and starts on `u`. In the switching graph of that
//! starting matching the only switching paths are `u' -> u -> v`, one per
//! edge, and a set of them is a switching set iff its edges form a matching.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::bipartite::BipartiteGraph;
use crate::instance::{AgentId, HouseId, Instance, Kind, Matching};
use crate::oracle::Oracle;
use crate::switching::{self, SwitchingEdge, SwitchingGraph, Weight};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    /// Capacitated instance, without last resorts.
    pub instance: Instance,
    pub base_matching: Matching,
    pub switching_graph: SwitchingGraph,
    /// Left vertices kept (0-based indices into the input graph).
    pub left_kept: Vec<usize>,
    pub right_kept: Vec<usize>,
    /// Isolated vertices dropped before the construction.
    pub stripped_left: Vec<usize>,
    pub stripped_right: Vec<usize>,
    /// Agent of every graph edge, in the graph's edge order.
    pub edge_agents: Vec<((usize, usize), AgentId)>,
}

impl ReductionOutput {
    /// The popular matching that switches exactly the given graph edges.
    pub fn lift(&self, edges: &[(usize, usize)]) -> Result<Matching> {
        let mut m = self.base_matching.clone();
        let inst = &self.instance;
        for &(u, v) in edges {
            let agent = self
                .edge_agents
                .iter()
                .find(|(e, _)| *e == (u, v))
                .map(|&(_, a)| a)
                .ok_or_else(|| Error::InvalidMatching(format!("({u}, {v}) is not an edge")))?;
            let copy = inst.agent_by_label(&copy_agent(u)).expect("copy agent exists");
            m.assign(copy, house(inst, &left_house(u)));
            m.assign(agent, house(inst, &right_house(v)));
        }
        inst.validate_matching(&m)?;
        Ok(m)
    }
}

fn left_copy(u: usize) -> String {
    format!("u{}'", u + 1)
}

fn left_house(u: usize) -> String {
    format!("u{}", u + 1)
}

fn right_house(v: usize) -> String {
    format!("v{}", v + 1)
}

fn copy_agent(u: usize) -> String {
    format!("x_u{}", u + 1)
}

fn edge_agent(u: usize, v: usize) -> String {
    format!("y_u{}_v{}", u + 1, v + 1)
}

fn house(inst: &Instance, label: &str) -> HouseId {
    inst.house_by_label(label).expect("house built by the reduction")
}

/// Builds the instance, its starting matching and switching graph.
///
/// Houses are `u'` for every kept left vertex, then `u`, then `v`; labels
/// keep the 1-based indices of the input graph.
pub fn reduce_matching_to_cha(g: &BipartiteGraph) -> Result<ReductionOutput> {
    let right_deg = g.right_degrees();
    let (left_kept, stripped_left): (Vec<usize>, Vec<usize>) = (0..g.left()).partition(|&u| g.left_degree(u) > 0);
    let (right_kept, stripped_right): (Vec<usize>, Vec<usize>) = (0..g.right()).partition(|&v| right_deg[v] > 0);
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }

    let mut houses: Vec<(String, u32)> = Vec::new();
    houses.extend(left_kept.iter().map(|&u| (left_copy(u), 1)));
    houses.extend(left_kept.iter().map(|&u| (left_house(u), g.left_degree(u) as u32)));
    houses.extend(right_kept.iter().map(|&v| (right_house(v), 1)));

    let mut agents = Vec::new();
    let mut prefs = Vec::new();
    for &u in &left_kept {
        agents.push(copy_agent(u));
        prefs.push(vec![vec![left_house(u)], vec![left_copy(u)]]);
    }
    for (u, v) in g.edges() {
        agents.push(edge_agent(u, v));
        prefs.push(vec![vec![left_house(u)], vec![right_house(v)]]);
    }
    let instance = Instance::new(Kind::Cha, agents, houses.clone(), prefs)?;

    let mut base_matching = Matching::empty(instance.num_agents());
    let mut edges = Vec::with_capacity(instance.num_agents());
    let mut edge_agents = Vec::new();
    for (i, &u) in left_kept.iter().enumerate() {
        let (from, to) = (house(&instance, &left_copy(u)), house(&instance, &left_house(u)));
        base_matching.assign(AgentId(i), from);
        edges.push(SwitchingEdge {
            agent: AgentId(i),
            from,
            to,
            weight: Weight::Plus,
        });
    }
    for (k, (u, v)) in g.edges().enumerate() {
        let a = AgentId(left_kept.len() + k);
        let (from, to) = (house(&instance, &left_house(u)), house(&instance, &right_house(v)));
        base_matching.assign(a, from);
        edges.push(SwitchingEdge {
            agent: a,
            from,
            to,
            weight: Weight::Minus,
        });
        edge_agents.push(((u, v), a));
    }
    let switching_graph = SwitchingGraph::new(instance.agents().to_vec(), houses, edges)?;
    Ok(ReductionOutput {
        instance,
        base_matching,
        switching_graph,
        left_kept,
        right_kept,
        stripped_left,
        stripped_right,
        edge_agents,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheckReport {
    /// Matchings of the graph, the empty one included.
    pub matchings: BigUint,
    /// Popular matchings of the reduced instance (with last resorts), by
    /// switching-set enumeration and by the oracle. `None` when the graph has
    /// no edges and nothing was reduced.
    pub switching: Option<BigUint>,
    pub oracle: Option<BigUint>,
    pub stripped_vertices: usize,
}

impl CrossCheckReport {
    pub fn is_degenerate(&self) -> bool {
        self.switching.is_none()
    }

    pub fn is_consistent(&self) -> bool {
        match (&self.switching, &self.oracle) {
            (Some(s), Some(o)) => *s == self.matchings && *o == self.matchings,
            _ => self.matchings == BigUint::from(1u32),
        }
    }
}

/// Counts matchings of `g` and popular matchings of its reduction both ways.
pub fn cross_check(g: &BipartiteGraph, oracle: &Oracle) -> Result<CrossCheckReport> {
    let matchings = oracle.count_graph_matchings(g)?;
    let out = match reduce_matching_to_cha(g) {
        Ok(out) => out,
        Err(Error::EmptyGraph) => {
            return Ok(CrossCheckReport {
                matchings,
                switching: None,
                oracle: None,
                stripped_vertices: g.left() + g.right(),
            })
        }
        Err(e) => return Err(e),
    };
    let inst = out.instance.add_last_resorts()?;
    let switching = switching::count_popular_cha(&inst)?;
    let by_oracle = oracle.count_popular(&inst)?;
    Ok(CrossCheckReport {
        matchings,
        switching: Some(switching),
        oracle: Some(by_oracle),
        stripped_vertices: out.stripped_left.len() + out.stripped_right.len(),
    })
}
