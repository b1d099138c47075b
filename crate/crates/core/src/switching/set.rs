use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::graph::{same_underlying, SwitchingGraph, Weight};
use crate::instance::{AgentId, HouseId, Matching};
use crate::{Error, Result};

/// Alternating path, as the agents of its edges in order. Starts with a `+1`
/// edge and ends with a `-1` edge at an unsaturated house.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwitchingPath {
    pub edges: Vec<AgentId>,
}

/// Closed alternating trail of even length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwitchingCycle {
    pub edges: Vec<AgentId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SwitchingSet {
    pub paths: Vec<SwitchingPath>,
    pub cycles: Vec<SwitchingCycle>,
}

impl SwitchingSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty() && self.cycles.is_empty()
    }

    /// Agents of all edges, cycles first.
    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.cycles
            .iter()
            .flat_map(|c| c.edges.iter())
            .chain(self.paths.iter().flat_map(|p| p.edges.iter()))
            .copied()
    }

    pub fn num_edges(&self) -> usize {
        self.agents().count()
    }

    /// Checks the shape of every path and cycle, edge-disjointness, and that
    /// no house receives more path ends than it has free seats.
    pub fn validate(&self, sg: &SwitchingGraph) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidSwitchingSet(msg));
        let mut used = vec![false; sg.num_agents()];
        for a in self.agents() {
            if a.0 >= sg.num_agents() {
                return bad(format!("unknown agent #{}", a.0));
            }
            if used[a.0] {
                return bad(format!("edge of `{}` used twice", sg.agent_label(a)));
            }
            used[a.0] = true;
        }
        let mut ends = vec![0u32; sg.num_houses()];
        for p in &self.paths {
            let (Some(&first), Some(&last)) = (p.edges.first(), p.edges.last()) else {
                return bad("empty path".into());
            };
            check_chain(sg, &p.edges)?;
            if sg.edge(first).weight != Weight::Plus {
                return bad(format!("path starts with the -1 edge of `{}`", sg.agent_label(first)));
            }
            let end = sg.edge(last);
            if end.weight != Weight::Minus {
                return bad(format!("path ends with the +1 edge of `{}`", sg.agent_label(last)));
            }
            ends[end.to.0] += 1;
        }
        for h in (0..sg.num_houses()).map(HouseId) {
            if ends[h.0] > sg.unsat(h) {
                return bad(format!(
                    "{} paths end at `{}`, which has {} free seats",
                    ends[h.0],
                    sg.house_label(h),
                    sg.unsat(h)
                ));
            }
        }
        for c in &self.cycles {
            if c.edges.is_empty() || c.edges.len() % 2 == 1 {
                return bad("cycle of odd or zero length".into());
            }
            check_chain(sg, &c.edges)?;
            let (first, last) = (sg.edge(c.edges[0]), sg.edge(c.edges[c.edges.len() - 1]));
            if last.to != first.from || last.weight == first.weight {
                return bad("cycle does not close alternately".into());
            }
        }
        Ok(())
    }
}

fn check_chain(sg: &SwitchingGraph, edges: &[AgentId]) -> Result<()> {
    for w in edges.windows(2) {
        let (x, y) = (sg.edge(w[0]), sg.edge(w[1]));
        if x.to != y.from || x.weight == y.weight {
            return Err(Error::InvalidSwitchingSet(format!(
                "edges of `{}` and `{}` do not alternate head to tail",
                sg.agent_label(x.agent),
                sg.agent_label(y.agent)
            )));
        }
    }
    Ok(())
}

/// Reverses and flips every edge of a valid switching set.
pub fn apply_switching_move(sg: &SwitchingGraph, set: &SwitchingSet) -> Result<(SwitchingGraph, Matching)> {
    set.validate(sg)?;
    let mut edges = sg.edges().to_vec();
    for a in set.agents() {
        edges[a.0] = edges[a.0].reversed();
    }
    let next = sg.with_edges(edges);
    let m = next.matching();
    Ok((next, m))
}

/// Whether reversing exactly the marked edges yields another popular
/// matching: at every house, `+1` in-edges balance `-1` out-edges, and the
/// net inflow fits the free seats.
pub fn is_switching_edge_set(sg: &SwitchingGraph, marked: &[bool]) -> bool {
    let n = sg.num_houses();
    let mut balance = vec![0i64; n];
    let mut inflow = vec![0i64; n];
    for e in sg.edges().iter().filter(|e| marked[e.agent.0]) {
        inflow[e.to.0] += 1;
        inflow[e.from.0] -= 1;
        match e.weight {
            Weight::Plus => balance[e.to.0] += 1,
            Weight::Minus => balance[e.from.0] -= 1,
        }
    }
    (0..n).all(|h| balance[h] == 0 && inflow[h] <= sg.unsat(HouseId(h)) as i64)
}

fn label_cmp(sg: &SwitchingGraph, a: &[AgentId], b: &[AgentId]) -> Ordering {
    a.iter()
        .map(|&x| sg.agent_label(x))
        .cmp(b.iter().map(|&x| sg.agent_label(x)))
}

/// Splits a set of edges into switching cycles and paths: closed alternating
/// trails are peeled off first, then the longest alternating trail is taken
/// repeatedly. Ties go to the least sequence of agent labels.
pub fn decompose_edge_set(sg: &SwitchingGraph, agents: &[AgentId]) -> Result<SwitchingSet> {
    let mut left = vec![false; sg.num_agents()];
    for &a in agents {
        if a.0 >= sg.num_agents() || left[a.0] {
            return Err(Error::InvalidSwitchingSet(format!("bad or repeated agent #{}", a.0)));
        }
        left[a.0] = true;
    }
    let order = sg.agents_by_label();
    let mut set = SwitchingSet::empty();
    while let Some(c) = closed_trail(sg, &order, &left) {
        for a in &c {
            left[a.0] = false;
        }
        set.cycles.push(SwitchingCycle { edges: c });
    }
    while left.iter().any(|&x| x) {
        let p = longest_trail(sg, &order, &left)?;
        for a in &p {
            left[a.0] = false;
        }
        set.paths.push(SwitchingPath { edges: p });
    }
    set.validate(sg)?;
    Ok(set)
}

/// First closed alternating trail found by depth-first search from edges in
/// label order.
fn closed_trail(sg: &SwitchingGraph, order: &[AgentId], avail: &[bool]) -> Option<Vec<AgentId>> {
    fn extend(
        sg: &SwitchingGraph,
        order: &[AgentId],
        avail: &[bool],
        used: &mut [bool],
        trail: &mut Vec<AgentId>,
    ) -> bool {
        let (start, last) = (sg.edge(trail[0]), sg.edge(trail[trail.len() - 1]));
        if trail.len() >= 2 && last.to == start.from && last.weight != start.weight {
            return true;
        }
        for &b in order {
            let e = sg.edge(b);
            if avail[b.0] && !used[b.0] && e.from == last.to && e.weight != last.weight {
                used[b.0] = true;
                trail.push(b);
                if extend(sg, order, avail, used, trail) {
                    return true;
                }
                trail.pop();
                used[b.0] = false;
            }
        }
        false
    }
    let mut used = vec![false; avail.len()];
    for &a in order {
        if avail[a.0] {
            let mut trail = vec![a];
            used[a.0] = true;
            if extend(sg, order, avail, &mut used, &mut trail) {
                return Some(trail);
            }
            used[a.0] = false;
        }
    }
    None
}

/// Longest alternating trail among the available edges. Without closed
/// alternating trails, "edge `e` may be followed by `e'`" is acyclic, so
/// this is a longest path in a DAG.
fn longest_trail(sg: &SwitchingGraph, order: &[AgentId], avail: &[bool]) -> Result<Vec<AgentId>> {
    #[derive(Clone)]
    enum Memo {
        Todo,
        Active,
        Done(Vec<AgentId>),
    }
    fn best_from(
        sg: &SwitchingGraph,
        order: &[AgentId],
        avail: &[bool],
        memo: &mut [Memo],
        a: AgentId,
    ) -> Result<Vec<AgentId>> {
        match &memo[a.0] {
            Memo::Done(v) => return Ok(v.clone()),
            Memo::Active => return Err(Error::Internal("alternating cycle left after peeling".into())),
            Memo::Todo => {}
        }
        memo[a.0] = Memo::Active;
        let e = sg.edge(a);
        let mut best: Vec<AgentId> = Vec::new();
        for &b in order {
            let n = sg.edge(b);
            if avail[b.0] && n.from == e.to && n.weight != e.weight {
                let tail = best_from(sg, order, avail, memo, b)?;
                if better(sg, &tail, &best) {
                    best = tail;
                }
            }
        }
        best.insert(0, a);
        memo[a.0] = Memo::Done(best.clone());
        Ok(best)
    }
    fn better(sg: &SwitchingGraph, x: &[AgentId], y: &[AgentId]) -> bool {
        x.len() > y.len() || (x.len() == y.len() && label_cmp(sg, x, y) == Ordering::Less)
    }
    let mut memo = vec![Memo::Todo; avail.len()];
    let mut best: Vec<AgentId> = Vec::new();
    for &a in order {
        if avail[a.0] {
            let t = best_from(sg, order, avail, &mut memo, a)?;
            if better(sg, &t, &best) {
                best = t;
            }
        }
    }
    Ok(best)
}

/// The switching set that turns the matching of `from` into that of `to`.
pub fn decompose_difference(from: &SwitchingGraph, to: &SwitchingGraph) -> Result<SwitchingSet> {
    same_underlying(from, to)?;
    let diff: Vec<AgentId> = from
        .edges()
        .iter()
        .zip(to.edges())
        .filter(|(x, y)| x.from != y.from)
        .map(|(x, _)| x.agent)
        .collect();
    decompose_edge_set(from, &diff)
}

/// Every edge set whose reversal is a switching move, each as its agents in
/// label order, sorted lexicographically by labels. The empty set comes first.
pub fn switching_edge_sets(sg: &SwitchingGraph) -> Vec<Vec<AgentId>> {
    struct Search<'a> {
        sg: &'a SwitchingGraph,
        order: Vec<AgentId>,
        marked: Vec<bool>,
        // in+ minus out-, which must end at zero
        balance: Vec<i64>,
        // in- minus out+, which must end at most unsat
        inflow: Vec<i64>,
        rem_in_plus: Vec<i64>,
        rem_out_minus: Vec<i64>,
        rem_out_plus: Vec<i64>,
        out: Vec<Vec<AgentId>>,
    }
    impl Search<'_> {
        fn feasible(&self, h: HouseId) -> bool {
            let b = self.balance[h.0];
            -self.rem_in_plus[h.0] <= b
                && b <= self.rem_out_minus[h.0]
                && self.inflow[h.0] - self.rem_out_plus[h.0] <= self.sg.unsat(h) as i64
        }

        fn apply(&mut self, a: AgentId, sign: i64) {
            let e = self.sg.edge(a);
            match e.weight {
                Weight::Plus => {
                    self.balance[e.to.0] += sign;
                    self.inflow[e.from.0] -= sign;
                }
                Weight::Minus => {
                    self.balance[e.from.0] -= sign;
                    self.inflow[e.to.0] += sign;
                }
            }
        }

        fn retire(&mut self, a: AgentId, sign: i64) {
            let e = self.sg.edge(a);
            match e.weight {
                Weight::Plus => {
                    self.rem_in_plus[e.to.0] -= sign;
                    self.rem_out_plus[e.from.0] -= sign;
                }
                Weight::Minus => self.rem_out_minus[e.from.0] -= sign,
            }
        }

        fn rec(&mut self, i: usize) {
            if i == self.order.len() {
                if is_switching_edge_set(self.sg, &self.marked) {
                    self.out
                        .push(self.order.iter().copied().filter(|a| self.marked[a.0]).collect());
                }
                return;
            }
            let a = self.order[i];
            let e = self.sg.edge(a);
            self.retire(a, 1);
            for take in [false, true] {
                if take {
                    self.marked[a.0] = true;
                    self.apply(a, 1);
                }
                if self.feasible(e.from) && self.feasible(e.to) {
                    self.rec(i + 1);
                }
                if take {
                    self.apply(a, -1);
                    self.marked[a.0] = false;
                }
            }
            self.retire(a, -1);
        }
    }
    let n = sg.num_houses();
    let mut s = Search {
        sg,
        order: sg.agents_by_label(),
        marked: vec![false; sg.num_agents()],
        balance: vec![0; n],
        inflow: vec![0; n],
        rem_in_plus: vec![0; n],
        rem_out_minus: vec![0; n],
        rem_out_plus: vec![0; n],
        out: Vec::new(),
    };
    for e in sg.edges() {
        match e.weight {
            Weight::Plus => {
                s.rem_in_plus[e.to.0] += 1;
                s.rem_out_plus[e.from.0] += 1;
            }
            Weight::Minus => s.rem_out_minus[e.from.0] += 1,
        }
    }
    s.rec(0);
    let mut sets = s.out;
    sets.sort_by(|x, y| label_cmp(sg, x, y));
    sets
}

/// All switching sets of a graph in a fixed order, each in its canonical
/// decomposition. The empty set is included.
pub fn enumerate_switching_sets(sg: &SwitchingGraph) -> Result<Vec<SwitchingSet>> {
    switching_edge_sets(sg)
        .iter()
        .map(|edges| decompose_edge_set(sg, edges))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::graph::build_switching_graph;
    use super::*;
    use crate::instance::fixtures::*;
    use crate::instance::{Instance, Kind};

    fn fix_a_cha() -> Instance {
        fix_a().with_kind(Kind::Cha).unwrap().add_last_resorts().unwrap()
    }

    fn agents(inst: &Instance, labels: &[&str]) -> Vec<AgentId> {
        labels.iter().map(|l| inst.agent_by_label(l).unwrap()).collect()
    }

    #[test]
    fn fix_a_has_one_cycle() {
        let a = fix_a_cha();
        let m1 = m(&a, &[("a1", "h1"), ("a2", "h2")]);
        let sg = build_switching_graph(&a, &m1).unwrap();
        let sets = enumerate_switching_sets(&sg).unwrap();
        assert_eq!(sets.len(), 2);
        assert!(sets[0].is_empty());
        assert!(sets[1].paths.is_empty());
        assert_eq!(sets[1].cycles.len(), 1);
        assert_eq!(sets[1].cycles[0].edges.len(), 2);

        let (next, m2) = apply_switching_move(&sg, &sets[1]).unwrap();
        assert_eq!(m2, m(&a, &[("a1", "h2"), ("a2", "h1")]));
        assert_eq!(next, build_switching_graph(&a, &m2).unwrap());
        let d = decompose_difference(&sg, &next).unwrap();
        assert_eq!(d, sets[1]);
        assert!(decompose_difference(&sg, &sg).unwrap().is_empty());
    }

    #[test]
    fn only_empty_set_without_plus_edges() {
        let c = fix_c().add_last_resorts().unwrap();
        let sg = build_switching_graph(&c, &m(&c, &[("a1", "h1"), ("a2", "h1")])).unwrap();
        assert_eq!(enumerate_switching_sets(&sg).unwrap(), [SwitchingSet::empty()]);
        let e = fix_e().add_last_resorts().unwrap();
        let sg = build_switching_graph(&e, &m(&e, &[("a1", "h1")])).unwrap();
        assert_eq!(enumerate_switching_sets(&sg).unwrap(), [SwitchingSet::empty()]);
        let (same, mm) = apply_switching_move(&sg, &SwitchingSet::empty()).unwrap();
        assert_eq!(same, sg);
        assert_eq!(mm, m(&e, &[("a1", "h1")]));
    }

    #[test]
    fn invalid_sets_are_rejected() {
        let a = fix_a_cha();
        let sg = build_switching_graph(&a, &m(&a, &[("a1", "h1"), ("a2", "h2")])).unwrap();
        let [a1, a2] = agents(&a, &["a1", "a2"])[..] else {
            unreachable!()
        };
        let odd = SwitchingSet {
            paths: vec![],
            cycles: vec![SwitchingCycle { edges: vec![a1] }],
        };
        assert!(apply_switching_move(&sg, &odd).is_err());
        // +1 then -1 back to h2, which is full
        let path = SwitchingSet {
            paths: vec![SwitchingPath { edges: vec![a2, a1] }],
            cycles: vec![],
        };
        assert!(apply_switching_move(&sg, &path).is_err());
        let twice = SwitchingSet {
            paths: vec![],
            cycles: vec![
                SwitchingCycle { edges: vec![a2, a1] },
                SwitchingCycle { edges: vec![a2, a1] },
            ],
        };
        assert!(matches!(twice.validate(&sg), Err(Error::InvalidSwitchingSet(_))));
    }

    #[test]
    fn path_through_a_saturated_house() {
        // x1 sits on its second choice u' and may move to u, pushing y1 on to v.
        let inst = crate::instance::instance_from_lists(
            Kind::Cha,
            &[("u'", 1), ("u", 1), ("v", 1)],
            &[("x", &[&["u"], &["u'"]]), ("y", &[&["u"], &["v"]])],
        )
        .unwrap()
        .add_last_resorts()
        .unwrap();
        let base = m(&inst, &[("x", "u'"), ("y", "u")]);
        let sg = build_switching_graph(&inst, &base).unwrap();
        let sets = enumerate_switching_sets(&sg).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(
            sets[1].paths,
            [SwitchingPath {
                edges: agents(&inst, &["x", "y"])
            }]
        );
        let (_, moved) = apply_switching_move(&sg, &sets[1]).unwrap();
        assert_eq!(moved, m(&inst, &[("x", "u"), ("y", "v")]));
    }
}
