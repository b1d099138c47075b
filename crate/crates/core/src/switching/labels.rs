use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{AgentId, HouseId, Instance, Matching};
use crate::{Error, Result};

/// First and second choices of a capacitated instance with strict lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaLabels {
    pub first: Vec<HouseId>,
    pub first_of_house: Vec<Vec<AgentId>>,
    /// `None` only when the agent's list has no admissible fallback, which
    /// cannot happen once last resorts are present.
    pub second: Vec<Option<HouseId>>,
}

impl ChaLabels {
    pub fn is_f_house(&self, h: HouseId) -> bool {
        !self.first_of_house[h.0].is_empty()
    }

    /// Seats an s-agent may take at `h`: all of them at a non-f-house,
    /// the spare ones at an undersubscribed f-house.
    fn spare_for_second(&self, inst: &Instance, h: HouseId) -> u32 {
        let f = self.first_of_house[h.0].len() as u32;
        inst.capacity(h).saturating_sub(f)
    }
}

/// Labels every agent with `f(a)` and `s(a)`.
///
/// `s(a)` is the best house on `a`'s list that is either not an f-house, or an
/// f-house other than `f(a)` with fewer first-choice agents than capacity.
pub fn compute_fs_cha(inst: &Instance) -> Result<ChaLabels> {
    if !inst.is_strict() {
        return Err(Error::TiesPresent);
    }
    let mut first = Vec::with_capacity(inst.num_agents());
    let mut first_of_house = vec![Vec::new(); inst.num_houses()];
    for a in inst.agent_ids() {
        let h = *inst
            .prefs(a)
            .first_group()
            .first()
            .ok_or_else(|| Error::EmptyPreferenceList(inst.agent_label(a).into()))?;
        first.push(h);
        first_of_house[h.0].push(a);
    }
    let second = inst
        .agent_ids()
        .map(|a| {
            inst.prefs(a).houses().find(|&h| {
                let f = first_of_house[h.0].len();
                f == 0 || (h != first[a.0] && (f as u32) < inst.capacity(h))
            })
        })
        .collect();
    Ok(ChaLabels {
        first,
        first_of_house,
        second,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChaViolation {
    Unmatched(AgentId),
    /// An f-house holds the wrong number of its first-choice agents.
    FirstChoiceQuota {
        house: HouseId,
        expected: u32,
        found: u32,
    },
    OutsideFirstAndSecond {
        agent: AgentId,
        house: HouseId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChaVerdict {
    Popular,
    NotPopular(ChaViolation),
}

impl ChaVerdict {
    pub fn is_popular(&self) -> bool {
        matches!(self, ChaVerdict::Popular)
    }
}

pub fn is_popular_cha(inst: &Instance, m: &Matching) -> Result<ChaVerdict> {
    let labels = compute_fs_cha(inst)?;
    is_popular_cha_with(inst, &labels, m)
}

/// Checks, in order: agent-completeness, the f-house quotas, and that every
/// agent sits on `f(a)` or `s(a)`.
pub fn is_popular_cha_with(inst: &Instance, labels: &ChaLabels, m: &Matching) -> Result<ChaVerdict> {
    inst.validate_matching(m)?;
    if let Some(a) = inst.agent_ids().find(|&a| m.house_of(a).is_none()) {
        return Ok(ChaVerdict::NotPopular(ChaViolation::Unmatched(a)));
    }
    for h in inst.house_ids() {
        let fh = &labels.first_of_house[h.0];
        if fh.is_empty() {
            continue;
        }
        let expected = inst.capacity(h).min(fh.len() as u32);
        let found = fh.iter().filter(|&&a| m.house_of(a) == Some(h)).count() as u32;
        if found != expected {
            return Ok(ChaVerdict::NotPopular(ChaViolation::FirstChoiceQuota {
                house: h,
                expected,
                found,
            }));
        }
    }
    for (a, h) in m.pairs() {
        if h != labels.first[a.0] && Some(h) != labels.second[a.0] {
            return Ok(ChaVerdict::NotPopular(ChaViolation::OutsideFirstAndSecond {
                agent: a,
                house: h,
            }));
        }
    }
    Ok(ChaVerdict::Popular)
}

/// Finds a popular matching, or `None` when there is none.
///
/// Agents of f-houses with spare room stay there. Each oversubscribed f-house
/// `h` must shed `|f(h)| - c(h)` agents to their s-houses; which ones is
/// decided by a max-flow from the oversubscribed houses, through their
/// agents, into the seats left at s-houses.
pub fn find_popular_cha(inst: &Instance) -> Result<Option<Matching>> {
    let labels = compute_fs_cha(inst)?;
    let n = inst.num_agents();
    let nh = inst.num_houses();
    // nodes: source, sink, houses as sources of losers, agents, houses as seats
    let (src, sink) = (0, 1);
    let over = |h: usize| 2 + h;
    let agent = |a: usize| 2 + nh + a;
    let seat = |h: usize| 2 + nh + n + h;
    let mut net = FlowNet::new(2 + 2 * nh + n);
    let mut need = 0u32;
    for h in inst.house_ids() {
        let f = labels.first_of_house[h.0].len() as u32;
        if f > inst.capacity(h) {
            let k = f - inst.capacity(h);
            need += k;
            net.add(src, over(h.0), k);
            for &a in &labels.first_of_house[h.0] {
                if let Some(s) = labels.second[a.0] {
                    net.add(over(h.0), agent(a.0), 1);
                    net.add(agent(a.0), seat(s.0), 1);
                }
            }
        }
    }
    for h in inst.house_ids() {
        let spare = labels.spare_for_second(inst, h);
        if spare > 0 {
            net.add(seat(h.0), sink, spare);
        }
    }
    if net.max_flow(src, sink) < need {
        return Ok(None);
    }

    let mut m = Matching::empty(n);
    for a in inst.agent_ids() {
        let loser = net.flow_out(agent(a.0)) > 0;
        let h = if loser {
            labels.second[a.0].expect("losers have an s-house")
        } else {
            labels.first[a.0]
        };
        m.assign(a, h);
    }
    match is_popular_cha_with(inst, &labels, &m)? {
        ChaVerdict::Popular => Ok(Some(m)),
        ChaVerdict::NotPopular(v) => Err(Error::Internal(format!(
            "constructed matching {} fails the check: {v:?}",
            m.describe(inst)
        ))),
    }
}

/// Edmonds-Karp on a small network with integer capacities.
struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
    flow: Vec<u32>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            flow: Vec::new(),
        }
    }

    fn add(&mut self, u: usize, v: usize, c: u32) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.flow.push(0);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
        self.flow.push(0);
    }

    fn residual(&self, e: usize) -> u32 {
        // reverse arcs (odd index) carry the forward flow as residual
        if e.is_multiple_of(2) {
            self.cap[e] - self.flow[e]
        } else {
            self.flow[e ^ 1]
        }
    }

    fn push(&mut self, e: usize, x: u32) {
        if e.is_multiple_of(2) {
            self.flow[e] += x;
        } else {
            self.flow[e ^ 1] -= x;
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u32 {
        let mut total = 0;
        loop {
            let mut prev = vec![usize::MAX; self.head.len()];
            let mut seen = vec![false; self.head.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if !seen[v] && self.residual(e) > 0 {
                        seen[v] = true;
                        prev[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut x = u32::MAX;
            let mut v = t;
            while v != s {
                let e = prev[v];
                x = x.min(self.residual(e));
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.push(e, x);
                v = self.to[e ^ 1];
            }
            total += x;
        }
    }

    fn flow_out(&self, u: usize) -> u32 {
        self.head[u]
            .iter()
            .filter(|&&e| e % 2 == 0)
            .map(|&e| self.flow[e])
            .sum()
    }
}
