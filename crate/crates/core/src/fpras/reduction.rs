use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bipartite::{BipartiteGraph, BipartiteMatching, Parity};
use crate::hat::{self, EvenClass, HatLabels};
use crate::instance::{AgentId, HouseId, Instance, Matching};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeftBlock {
    Unreachable,
    Odd,
    Even,
    Dummy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RightBlock {
    Unreachable,
    Odd,
    EvenF,
    EvenFS,
    EvenS,
}

/// Perfect-matching instance whose perfect matchings are the popular
/// matchings, each extended by every bijection of the dummies onto the
/// houses left free.
///
/// Left vertices `0..num_agents` are the agents (same indices as the
/// instance), followed by the dummies. Right vertex `j` is `right_house[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedInstance {
    pub graph: BipartiteGraph,
    pub dummy_count: usize,
    pub left_block: Vec<LeftBlock>,
    pub right_block: Vec<RightBlock>,
    pub right_house: Vec<HouseId>,
    pub removed_houses: Vec<HouseId>,
    pub num_agents: usize,
}

impl ReducedInstance {
    pub fn left_label(&self, inst: &Instance, i: usize) -> String {
        if i < self.num_agents {
            inst.agent_label(AgentId(i)).into()
        } else {
            format!("d{}", i - self.num_agents + 1)
        }
    }

    pub fn right_label<'a>(&self, inst: &'a Instance, j: usize) -> &'a str {
        inst.house_label(self.right_house[j])
    }

    /// Drops the dummy edges of a perfect matching of the reduced graph.
    pub fn restrict(&self, pm: &BipartiteMatching) -> Matching {
        let mut m = Matching::empty(self.num_agents);
        for (u, v) in pm.pairs() {
            if u < self.num_agents {
                m.assign(AgentId(u), self.right_house[v]);
            }
        }
        m
    }

    /// Completes a matching of the instance with dummies on the free right
    /// vertices (in index order), if every agent edge exists in the graph.
    pub fn extend(&self, m: &Matching) -> Option<BipartiteMatching> {
        let mut index = vec![usize::MAX; self.right_house.iter().map(|h| h.0 + 1).max().unwrap_or(0)];
        for (j, h) in self.right_house.iter().enumerate() {
            index[h.0] = j;
        }
        let mut pairs = Vec::new();
        let mut used = vec![false; self.right_house.len()];
        for (a, h) in m.pairs() {
            let j = *index.get(h.0)?;
            if j == usize::MAX || used[j] {
                return None;
            }
            used[j] = true;
            pairs.push((a.0, j));
        }
        let free: Vec<usize> = (0..used.len()).filter(|&j| !used[j]).collect();
        if free.len() != self.dummy_count || m.size() != self.num_agents {
            return None;
        }
        pairs.extend(free.into_iter().enumerate().map(|(k, j)| (self.num_agents + k, j)));
        BipartiteMatching::from_pairs(&self.graph, pairs).ok()
    }
}

/// Every agent must rank every ordinary house.
pub fn check_complete_lists(inst: &Instance) -> Result<()> {
    for a in inst.agent_ids() {
        for h in inst.house_ids() {
            if !inst.house(h).is_last_resort && !inst.lists(a, h) {
                return Err(Error::IncompleteLists {
                    agent: inst.agent_label(a).into(),
                    house: inst.house_label(h).into(),
                });
            }
        }
    }
    Ok(())
}

/// Builds the perfect-matching instance of a HA/HAT instance with last resorts
/// and complete lists.
///
/// Fails with [`Error::Unbalanced`] when fewer usable houses than agents
/// remain; no popular matching exists then, since every popular matching
/// places all agents on distinct usable houses.
pub fn build_reduction(inst: &Instance) -> Result<ReducedInstance> {
    let labels = hat::compute_fs_hat(inst)?;
    check_complete_lists(inst)?;
    build_from_labels(inst, &labels)
}

pub(crate) fn build_from_labels(inst: &Instance, labels: &HatLabels) -> Result<ReducedInstance> {
    let d = &labels.decomposition;
    let mut right_house = Vec::new();
    let mut right_block = Vec::new();
    let mut removed_houses = Vec::new();
    let mut right_index = vec![usize::MAX; inst.num_houses()];
    for h in inst.house_ids() {
        let block = match (d.right[h.0], labels.even_class[h.0]) {
            (Parity::Unreachable, _) => RightBlock::Unreachable,
            (Parity::Odd, _) => RightBlock::Odd,
            (Parity::Even, Some(EvenClass::F)) => RightBlock::EvenF,
            (Parity::Even, Some(EvenClass::FS)) => RightBlock::EvenFS,
            (Parity::Even, Some(EvenClass::S)) => RightBlock::EvenS,
            (Parity::Even, _) => {
                removed_houses.push(h);
                continue;
            }
        };
        right_index[h.0] = right_house.len();
        right_house.push(h);
        right_block.push(block);
    }

    let n = inst.num_agents();
    if right_house.len() < n {
        return Err(Error::Unbalanced {
            agents: n,
            houses: right_house.len(),
        });
    }
    let dummy_count = right_house.len() - n;

    let mut edges = Vec::new();
    let mut left_block = Vec::with_capacity(n + dummy_count);
    for a in inst.agent_ids() {
        let pa = d.left[a.0];
        left_block.push(match pa {
            Parity::Unreachable => LeftBlock::Unreachable,
            Parity::Odd => LeftBlock::Odd,
            Parity::Even => LeftBlock::Even,
        });
        for &h in &labels.first[a.0] {
            let keep = matches!(
                (pa, d.right[h.0]),
                (Parity::Unreachable, Parity::Unreachable) | (Parity::Odd, Parity::Even) | (Parity::Even, Parity::Odd)
            );
            if keep {
                edges.push((a.0, right_index[h.0]));
            }
        }
        if pa == Parity::Even {
            for &h in &labels.second[a.0] {
                edges.push((a.0, right_index[h.0]));
            }
        }
    }
    for k in 0..dummy_count {
        left_block.push(LeftBlock::Dummy);
        for (j, b) in right_block.iter().enumerate() {
            if matches!(b, RightBlock::EvenF | RightBlock::EvenFS | RightBlock::EvenS) {
                edges.push((n + k, j));
            }
        }
    }
    let graph = BipartiteGraph::new(n + dummy_count, right_house.len(), edges)?;
    Ok(ReducedInstance {
        graph,
        dummy_count,
        left_block,
        right_block,
        right_house,
        removed_houses,
        num_agents: n,
    })
}
