//! Instances, matchings and the popularity comparison.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Prefix reserved for generated last-resort house labels.
pub const LAST_RESORT_PREFIX: &str = "l(";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HouseId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// Strict lists, unit capacities.
    Ha,
    /// Ties allowed, unit capacities.
    Hat,
    /// Strict lists, arbitrary capacities.
    Cha,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Ha => "HA",
            Kind::Hat => "HAT",
            Kind::Cha => "CHA",
        }
    }

    pub fn allows_ties(self) -> bool {
        self == Kind::Hat
    }

    pub fn allows_capacities(self) -> bool {
        self == Kind::Cha
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s {
            "HA" => Ok(Kind::Ha),
            "HAT" => Ok(Kind::Hat),
            "CHA" => Ok(Kind::Cha),
            other => Err(format!("unknown instance kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct House {
    pub label: String,
    pub capacity: u32,
    pub is_last_resort: bool,
}

/// Rank groups of one agent, best first. A group with more than one house is a tie.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PreferenceList {
    groups: Vec<Vec<HouseId>>,
}

impl PreferenceList {
    pub fn new(groups: Vec<Vec<HouseId>>) -> Self {
        PreferenceList { groups }
    }

    pub fn groups(&self) -> &[Vec<HouseId>] {
        &self.groups
    }

    pub fn first_group(&self) -> &[HouseId] {
        self.groups.first().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn houses(&self) -> impl Iterator<Item = HouseId> + '_ {
        self.groups.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn is_strict(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }
}

/// Sentinel rank for houses an agent does not list.
pub const UNRANKED: u32 = u32::MAX;

/// A validated HA / HAT / CHA instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    kind: Kind,
    agents: Vec<String>,
    houses: Vec<House>,
    prefs: Vec<PreferenceList>,
    last_resorts_added: bool,
    // rank[a][h] = index of the group holding h in a's list, or UNRANKED
    rank: Vec<Vec<u32>>,
}

impl Instance {
    /// Builds an instance from labels. `prefs[i]` holds the rank groups of `agents[i]`.
    pub fn new(
        kind: Kind,
        agents: Vec<String>,
        houses: Vec<(String, u32)>,
        prefs: Vec<Vec<Vec<String>>>,
    ) -> Result<Self> {
        if prefs.len() != agents.len() {
            return Err(Error::Internal(format!(
                "{} preference lists for {} agents",
                prefs.len(),
                agents.len()
            )));
        }
        let mut agent_seen = BTreeMap::new();
        for (i, a) in agents.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if agent_seen.insert(a.as_str(), i).is_some() {
                return Err(Error::DuplicateAgent(a.clone()));
            }
        }
        let mut house_index = BTreeMap::new();
        let mut house_vec = Vec::with_capacity(houses.len());
        for (i, (label, capacity)) in houses.into_iter().enumerate() {
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if label.starts_with(LAST_RESORT_PREFIX) {
                return Err(Error::ReservedLabel(label));
            }
            if capacity < 1 {
                return Err(Error::BadCapacity { house: label, capacity });
            }
            if house_index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateHouse(label));
            }
            house_vec.push(House {
                label,
                capacity,
                is_last_resort: false,
            });
        }
        let mut lists = Vec::with_capacity(agents.len());
        for (a, groups) in agents.iter().zip(prefs) {
            let mut out = Vec::with_capacity(groups.len());
            for group in groups {
                let mut ids = Vec::with_capacity(group.len());
                for h in group {
                    match house_index.get(&h) {
                        Some(&i) => ids.push(HouseId(i)),
                        None => {
                            return Err(Error::UnknownHouse {
                                agent: a.clone(),
                                house: h,
                            })
                        }
                    }
                }
                out.push(ids);
            }
            lists.push(PreferenceList::new(out));
        }
        Self::from_parts(kind, agents, house_vec, lists, false)
    }

    /// Assembles and validates an instance from already-resolved parts.
    pub(crate) fn from_parts(
        kind: Kind,
        agents: Vec<String>,
        houses: Vec<House>,
        prefs: Vec<PreferenceList>,
        last_resorts_added: bool,
    ) -> Result<Self> {
        let mut rank = vec![vec![UNRANKED; houses.len()]; agents.len()];
        for (ai, list) in prefs.iter().enumerate() {
            let agent = &agents[ai];
            for (gi, group) in list.groups().iter().enumerate() {
                if group.is_empty() {
                    return Err(Error::EmptyGroup { agent: agent.clone() });
                }
                if group.len() > 1 && !kind.allows_ties() {
                    return Err(Error::TieNotAllowed {
                        agent: agent.clone(),
                        kind,
                    });
                }
                for &h in group {
                    if h.0 >= houses.len() {
                        return Err(Error::UnknownHouse {
                            agent: agent.clone(),
                            house: format!("#{}", h.0),
                        });
                    }
                    if rank[ai][h.0] != UNRANKED {
                        return Err(Error::DuplicateInList {
                            agent: agent.clone(),
                            house: houses[h.0].label.clone(),
                        });
                    }
                    rank[ai][h.0] = gi as u32;
                }
            }
        }
        for h in &houses {
            if h.capacity < 1 {
                return Err(Error::BadCapacity {
                    house: h.label.clone(),
                    capacity: h.capacity,
                });
            }
            if (h.capacity != 1 && !kind.allows_capacities()) || (h.is_last_resort && h.capacity != 1) {
                return Err(Error::CapacityNotAllowed {
                    house: h.label.clone(),
                    capacity: h.capacity,
                    kind,
                });
            }
        }
        Ok(Instance {
            kind,
            agents,
            houses,
            prefs,
            last_resorts_added,
            rank,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn houses(&self) -> &[House] {
        &self.houses
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_houses(&self) -> usize {
        self.houses.len()
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn house_ids(&self) -> impl Iterator<Item = HouseId> {
        (0..self.houses.len()).map(HouseId)
    }

    pub fn agent_label(&self, a: AgentId) -> &str {
        &self.agents[a.0]
    }

    pub fn house_label(&self, h: HouseId) -> &str {
        &self.houses[h.0].label
    }

    pub fn house(&self, h: HouseId) -> &House {
        &self.houses[h.0]
    }

    pub fn capacity(&self, h: HouseId) -> u32 {
        self.houses[h.0].capacity
    }

    pub fn prefs(&self, a: AgentId) -> &PreferenceList {
        &self.prefs[a.0]
    }

    pub fn last_resorts_added(&self) -> bool {
        self.last_resorts_added
    }

    pub fn agent_by_label(&self, label: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a == label).map(AgentId)
    }

    pub fn house_by_label(&self, label: &str) -> Option<HouseId> {
        self.houses.iter().position(|h| h.label == label).map(HouseId)
    }

    /// Group index of `h` in `a`'s list, `None` if unlisted.
    pub fn rank(&self, a: AgentId, h: HouseId) -> Option<u32> {
        match self.rank[a.0][h.0] {
            UNRANKED => None,
            r => Some(r),
        }
    }

    pub fn lists(&self, a: AgentId, h: HouseId) -> bool {
        self.rank[a.0][h.0] != UNRANKED
    }

    /// True when no agent has a tie.
    pub fn is_strict(&self) -> bool {
        self.prefs.iter().all(PreferenceList::is_strict)
    }

    pub fn has_unit_capacities(&self) -> bool {
        self.houses.iter().all(|h| h.capacity == 1)
    }

    pub fn total_capacity(&self) -> u64 {
        self.houses.iter().map(|h| u64::from(h.capacity)).sum()
    }

    /// The same instance reinterpreted under another kind, re-validated.
    pub fn with_kind(&self, kind: Kind) -> Result<Self> {
        Self::from_parts(
            kind,
            self.agents.clone(),
            self.houses.clone(),
            self.prefs.clone(),
            self.last_resorts_added,
        )
    }

    /// Label of the last-resort house generated for an agent.
    pub fn last_resort_label(agent: &str) -> String {
        format!("{LAST_RESORT_PREFIX}{agent})")
    }

    /// Appends one private, lowest-ranked, unit-capacity house `l(a)` to every agent's list.
    pub fn add_last_resorts(&self) -> Result<Self> {
        if self.last_resorts_added {
            return Err(Error::LastResortsAlreadyAdded);
        }
        let mut houses = self.houses.clone();
        let mut prefs = self.prefs.clone();
        for (i, agent) in self.agents.iter().enumerate() {
            let id = HouseId(houses.len());
            houses.push(House {
                label: Self::last_resort_label(agent),
                capacity: 1,
                is_last_resort: true,
            });
            prefs[i].groups.push(vec![id]);
        }
        Self::from_parts(self.kind, self.agents.clone(), houses, prefs, true)
    }

    /// Adds last resorts unless they are already present.
    pub fn ensure_last_resorts(&self) -> Self {
        if self.last_resorts_added {
            self.clone()
        } else {
            // cannot fail: the only error is "already added"
            self.add_last_resorts().expect("last resorts not yet added")
        }
    }

    /// Last-resort house of an agent, when present.
    pub fn last_resort_of(&self, a: AgentId) -> Option<HouseId> {
        if !self.last_resorts_added {
            return None;
        }
        self.prefs[a.0].groups.last().and_then(|g| g.first().copied())
    }

    pub fn validate_matching(&self, m: &Matching) -> Result<()> {
        if m.num_agents() != self.agents.len() {
            return Err(Error::InvalidMatching(format!(
                "matching covers {} agents, instance has {}",
                m.num_agents(),
                self.agents.len()
            )));
        }
        let mut load = vec![0u32; self.houses.len()];
        for (a, h) in m.pairs() {
            if h.0 >= self.houses.len() {
                return Err(Error::InvalidMatching(format!("unknown house #{}", h.0)));
            }
            if !self.lists(a, h) {
                return Err(Error::InvalidMatching(format!(
                    "agent `{}` does not list house `{}`",
                    self.agent_label(a),
                    self.house_label(h)
                )));
            }
            load[h.0] += 1;
            if load[h.0] > self.houses[h.0].capacity {
                return Err(Error::InvalidMatching(format!(
                    "house `{}` over capacity {}",
                    self.house_label(h),
                    self.houses[h.0].capacity
                )));
            }
        }
        Ok(())
    }

    /// Whether agent `a` strictly prefers its house in `m` over its house in `other`.
    pub fn prefers(&self, a: AgentId, m: &Matching, other: &Matching) -> bool {
        match (m.house_of(a), other.house_of(a)) {
            (Some(_), None) => true,
            (Some(h), Some(h2)) => self.rank[a.0][h.0] < self.rank[a.0][h2.0],
            _ => false,
        }
    }

    /// `(phi(m, other), phi(other, m))`: how many agents prefer each side.
    pub fn phi(&self, m: &Matching, other: &Matching) -> Result<(usize, usize)> {
        self.validate_matching(m)?;
        self.validate_matching(other)?;
        let mut forward = 0;
        let mut backward = 0;
        for a in self.agent_ids() {
            if self.prefers(a, m, other) {
                forward += 1;
            } else if self.prefers(a, other, m) {
                backward += 1;
            }
        }
        Ok((forward, backward))
    }

    pub fn more_popular(&self, m: &Matching, other: &Matching) -> Result<Popularity> {
        let (f, b) = self.phi(m, other)?;
        Ok(match f.cmp(&b) {
            core::cmp::Ordering::Greater => Popularity::First,
            core::cmp::Ordering::Less => Popularity::Second,
            core::cmp::Ordering::Equal => Popularity::Neither,
        })
    }

    /// Splits every house of capacity `c` into `c` unit houses tied together.
    pub fn split_cha_to_hat(&self) -> Result<(Instance, HouseCopies)> {
        if self.kind != Kind::Cha {
            return Err(Error::WrongKind {
                expected: "CHA",
                found: self.kind,
            });
        }
        let mut houses = Vec::new();
        let mut copies = Vec::with_capacity(self.houses.len());
        for h in &self.houses {
            let ids: Vec<HouseId> = if h.capacity == 1 {
                houses.push(h.clone());
                vec![HouseId(houses.len() - 1)]
            } else {
                (1..=h.capacity)
                    .map(|k| {
                        houses.push(House {
                            label: format!("{}^{}", h.label, k),
                            capacity: 1,
                            is_last_resort: h.is_last_resort,
                        });
                        HouseId(houses.len() - 1)
                    })
                    .collect()
            };
            copies.push(ids);
        }
        let mut seen = BTreeMap::new();
        for h in &houses {
            if seen.insert(h.label.as_str(), ()).is_some() {
                return Err(Error::DuplicateHouse(h.label.clone()));
            }
        }
        let prefs = self
            .prefs
            .iter()
            .map(|list| {
                PreferenceList::new(
                    list.groups()
                        .iter()
                        .map(|g| g.iter().flat_map(|h| copies[h.0].iter().copied()).collect())
                        .collect(),
                )
            })
            .collect();
        let image = Self::from_parts(Kind::Hat, self.agents.clone(), houses, prefs, self.last_resorts_added)?;
        Ok((image, HouseCopies { copies }))
    }
}

/// Maps each house of a capacitated instance to its unit copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HouseCopies {
    copies: Vec<Vec<HouseId>>,
}

impl HouseCopies {
    pub fn copies_of(&self, h: HouseId) -> &[HouseId] {
        &self.copies[h.0]
    }

    /// Translates a matching of the capacitated instance: the agents of each
    /// house take its copies in agent order.
    pub fn translate(&self, m: &Matching) -> Matching {
        let mut used = vec![0usize; self.copies.len()];
        let mut out = Matching::empty(m.num_agents());
        for (a, h) in m.pairs() {
            let k = used[h.0];
            used[h.0] += 1;
            out.assign(a, self.copies[h.0][k.min(self.copies[h.0].len() - 1)]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Popularity {
    First,
    Second,
    Neither,
}

/// Partial assignment of agents to houses, stored agent-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assignment: Vec<Option<HouseId>>,
}

impl Matching {
    pub fn empty(num_agents: usize) -> Self {
        Matching {
            assignment: vec![None; num_agents],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<HouseId>>) -> Self {
        Matching { assignment }
    }

    /// Builds a matching from `(agent, house)` label pairs.
    pub fn from_labels(inst: &Instance, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut m = Matching::empty(inst.num_agents());
        for &(a, h) in pairs {
            let ai = inst
                .agent_by_label(a)
                .ok_or_else(|| Error::InvalidMatching(format!("unknown agent `{a}`")))?;
            let hi = inst
                .house_by_label(h)
                .ok_or_else(|| Error::InvalidMatching(format!("unknown house `{h}`")))?;
            if m.house_of(ai).is_some() {
                return Err(Error::InvalidMatching(format!("agent `{a}` matched twice")));
            }
            m.assign(ai, hi);
        }
        inst.validate_matching(&m)?;
        Ok(m)
    }

    pub fn num_agents(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[Option<HouseId>] {
        &self.assignment
    }

    pub fn house_of(&self, a: AgentId) -> Option<HouseId> {
        self.assignment[a.0]
    }

    pub fn assign(&mut self, a: AgentId, h: HouseId) {
        self.assignment[a.0] = Some(h);
    }

    pub fn unassign(&mut self, a: AgentId) {
        self.assignment[a.0] = None;
    }

    pub fn pairs(&self) -> impl Iterator<Item = (AgentId, HouseId)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(a, h)| h.map(|h| (AgentId(a), h)))
    }

    /// Number of matched agents.
    pub fn size(&self) -> usize {
        self.assignment.iter().filter(|h| h.is_some()).count()
    }

    pub fn is_agent_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    /// House-major view: number of agents per house.
    pub fn loads(&self, num_houses: usize) -> Vec<u32> {
        let mut load = vec![0u32; num_houses];
        for (_, h) in self.pairs() {
            load[h.0] += 1;
        }
        load
    }

    /// House-major view: the agents matched to each house.
    pub fn occupants(&self, num_houses: usize) -> Vec<Vec<AgentId>> {
        let mut occ = vec![Vec::new(); num_houses];
        for (a, h) in self.pairs() {
            occ[h.0].push(a);
        }
        occ
    }

    /// Pairs as labels, sorted by agent label.
    pub fn labelled_pairs<'a>(&self, inst: &'a Instance) -> Vec<(&'a str, &'a str)> {
        let mut v: Vec<_> = self
            .pairs()
            .map(|(a, h)| (inst.agent_label(a), inst.house_label(h)))
            .collect();
        v.sort();
        v
    }

    pub fn describe(&self, inst: &Instance) -> String {
        let parts: Vec<String> = self
            .labelled_pairs(inst)
            .into_iter()
            .map(|(a, h)| format!("({a},{h})"))
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// Small helper for building instances in code: `(agent, [[group], ...])`.
pub fn instance_from_lists(kind: Kind, houses: &[(&str, u32)], lists: &[(&str, &[&[&str]])]) -> Result<Instance> {
    Instance::new(
        kind,
        lists.iter().map(|(a, _)| a.to_string()).collect(),
        houses.iter().map(|(h, c)| (h.to_string(), *c)).collect(),
        lists
            .iter()
            .map(|(_, groups)| {
                groups
                    .iter()
                    .map(|g| g.iter().map(|h| h.to_string()).collect())
                    .collect()
            })
            .collect(),
    )
}
