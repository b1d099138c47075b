//! Brute-force ground truth.
//!
//! Everything here works by exhaustive enumeration and is meant for small
//! instances only. Popularity is decided against *all* valid matchings, not
//! just agent-complete ones. Pruning is used only where a concrete more
//! popular matching is guaranteed to exist for every pruned candidate.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::bipartite::BipartiteGraph;
use crate::instance::{AgentId, HouseId, Instance, Matching};
use crate::{Error, Result};

pub const DEFAULT_STATE_LIMIT: u64 = 10_000_000;

/// Largest side accepted by [`Oracle::count_perfect`].
pub const PERFECT_SIDE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    pub state_limit: u64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }
}

impl Oracle {
    pub fn new(state_limit: u64) -> Self {
        Oracle { state_limit }
    }

    /// Size of the raw choice space: each agent picks a listed house or nothing.
    pub fn states(inst: &Instance) -> u128 {
        inst.agent_ids()
            .map(|a| inst.prefs(a).len() as u128 + 1)
            .fold(1u128, |acc, k| acc.saturating_mul(k))
    }

    fn check(&self, states: u128) -> Result<()> {
        if states > self.state_limit as u128 {
            return Err(Error::OracleLimit {
                states,
                limit: self.state_limit,
            });
        }
        Ok(())
    }

    /// Every valid matching, the empty one first.
    ///
    /// Agents are assigned in index order; each tries "unmatched" and then its
    /// listed houses in preference order.
    pub fn enumerate_matchings(&self, inst: &Instance) -> Result<Vec<Matching>> {
        self.check(Self::states(inst))?;
        let options = house_options(inst);
        let mut out = Vec::new();
        let mut load = vec![0u32; inst.num_houses()];
        let mut current = Matching::empty(inst.num_agents());
        enumerate_rec(inst, &options, 0, &mut load, &mut current, &mut |m| out.push(m.clone()));
        Ok(out)
    }

    /// A matching strictly more popular than `m`, if one exists.
    pub fn popularity_witness(&self, inst: &Instance, m: &Matching) -> Result<Option<Matching>> {
        inst.validate_matching(m)?;
        self.check(Self::states(inst))?;
        Ok(WitnessSearch::new(inst, m).run())
    }

    pub fn is_popular(&self, inst: &Instance, m: &Matching) -> Result<bool> {
        Ok(self.popularity_witness(inst, m)?.is_none())
    }

    /// All popular matchings, in enumeration order.
    pub fn popular_matchings(&self, inst: &Instance) -> Result<Vec<Matching>> {
        self.check(Self::states(inst))?;
        let options = candidate_options(inst);
        let mut candidates = Vec::new();
        let mut load = vec![0u32; inst.num_houses()];
        let mut current = Matching::empty(inst.num_agents());
        enumerate_rec(inst, &options, 0, &mut load, &mut current, &mut |m| {
            if !has_single_move(inst, m) {
                candidates.push(m.clone());
            }
        });
        Ok(candidates
            .into_iter()
            .filter(|m| WitnessSearch::new(inst, m).run().is_none())
            .collect())
    }

    pub fn count_popular(&self, inst: &Instance) -> Result<BigUint> {
        Ok(BigUint::from(self.popular_matchings(inst)?.len()))
    }

    /// Perfect matchings of a square bipartite graph by backtracking.
    pub fn count_perfect(&self, g: &BipartiteGraph) -> Result<BigUint> {
        if g.left() != g.right() {
            return Err(Error::NotSquare {
                left: g.left(),
                right: g.right(),
            });
        }
        if g.left() > PERFECT_SIDE_LIMIT {
            return Err(Error::SizeLimit {
                size: g.left(),
                limit: PERFECT_SIDE_LIMIT,
            });
        }
        fn rec(g: &BipartiteGraph, u: usize, used: &mut [bool]) -> u64 {
            if u == g.left() {
                return 1;
            }
            let mut total = 0;
            for &v in g.neighbors(u) {
                if !used[v] {
                    used[v] = true;
                    total += rec(g, u + 1, used);
                    used[v] = false;
                }
            }
            total
        }
        let mut used = vec![false; g.right()];
        Ok(BigUint::from(rec(g, 0, &mut used)))
    }

    /// All matchings of a bipartite graph, the empty one included.
    pub fn count_graph_matchings(&self, g: &BipartiteGraph) -> Result<BigUint> {
        let states = (0..g.left())
            .map(|u| g.left_degree(u) as u128 + 1)
            .fold(1u128, |acc, k| acc.saturating_mul(k));
        self.check(states)?;
        fn rec(g: &BipartiteGraph, u: usize, used: &mut [bool]) -> u64 {
            if u == g.left() {
                return 1;
            }
            let mut total = rec(g, u + 1, used);
            for &v in g.neighbors(u) {
                if !used[v] {
                    used[v] = true;
                    total += rec(g, u + 1, used);
                    used[v] = false;
                }
            }
            total
        }
        let mut used = vec![false; g.right()];
        Ok(BigUint::from(rec(g, 0, &mut used)))
    }
}

fn house_options(inst: &Instance) -> Vec<Vec<Option<HouseId>>> {
    inst.agent_ids()
        .map(|a| core::iter::once(None).chain(inst.prefs(a).houses().map(Some)).collect())
        .collect()
}

/// Houses nobody else lists. An agent unmatched, or matched worse than such a
/// house, can move there alone and be strictly better off.
fn exclusive_best_rank(inst: &Instance) -> Vec<Option<u32>> {
    let mut listers = vec![0usize; inst.num_houses()];
    for a in inst.agent_ids() {
        for h in inst.prefs(a).houses() {
            listers[h.0] += 1;
        }
    }
    inst.agent_ids()
        .map(|a| {
            inst.prefs(a)
                .houses()
                .filter(|h| listers[h.0] == 1)
                .filter_map(|h| inst.rank(a, h))
                .min()
        })
        .collect()
}

fn candidate_options(inst: &Instance) -> Vec<Vec<Option<HouseId>>> {
    let best = exclusive_best_rank(inst);
    inst.agent_ids()
        .map(|a| {
            let mut opts: Vec<Option<HouseId>> = Vec::new();
            if best[a.0].is_none() {
                opts.push(None);
            }
            let bound = best[a.0].unwrap_or(u32::MAX);
            opts.extend(
                inst.prefs(a)
                    .houses()
                    .filter(|&h| inst.rank(a, h).unwrap() <= bound)
                    .map(Some),
            );
            opts
        })
        .collect()
}

fn enumerate_rec(
    inst: &Instance,
    options: &[Vec<Option<HouseId>>],
    i: usize,
    load: &mut [u32],
    current: &mut Matching,
    visit: &mut impl FnMut(&Matching),
) {
    if i == options.len() {
        visit(current);
        return;
    }
    let a = AgentId(i);
    for &opt in &options[i] {
        match opt {
            None => {
                current.unassign(a);
                enumerate_rec(inst, options, i + 1, load, current, visit);
            }
            Some(h) => {
                if load[h.0] < inst.capacity(h) {
                    load[h.0] += 1;
                    current.assign(a, h);
                    enumerate_rec(inst, options, i + 1, load, current, visit);
                    current.unassign(a);
                    load[h.0] -= 1;
                }
            }
        }
    }
}

/// Some agent can move alone to a strictly better house with spare room.
fn has_single_move(inst: &Instance, m: &Matching) -> bool {
    let load = m.loads(inst.num_houses());
    inst.agent_ids().any(|a| {
        let current = m.house_of(a).and_then(|h| inst.rank(a, h)).unwrap_or(u32::MAX);
        inst.prefs(a)
            .houses()
            .any(|h| load[h.0] < inst.capacity(h) && inst.rank(a, h).unwrap() < current)
    })
}

/// A choice for one agent (a house or nothing) with its score.
type ScoredOption = (Option<HouseId>, i32);

/// Depth-first search over all matchings `M'` for one with
/// `phi(M', M) > phi(M, M')`, cutting branches whose best possible final
/// margin is not positive.
struct WitnessSearch<'a> {
    inst: &'a Instance,
    order: Vec<AgentId>,
    // options per position in `order`, best first, with their score
    options: Vec<Vec<ScoredOption>>,
    // max gain achievable by positions i..
    suffix_gain: Vec<i32>,
    load: Vec<u32>,
    current: Matching,
}

impl<'a> WitnessSearch<'a> {
    fn new(inst: &'a Instance, base: &Matching) -> Self {
        let score = |a: AgentId, h: Option<HouseId>| -> i32 {
            let r = |h: Option<HouseId>| h.and_then(|h| inst.rank(a, h)).map_or(i64::MAX, |r| r as i64);
            match r(h).cmp(&r(base.house_of(a))) {
                core::cmp::Ordering::Less => 1,
                core::cmp::Ordering::Equal => 0,
                core::cmp::Ordering::Greater => -1,
            }
        };
        let mut per_agent: Vec<(AgentId, Vec<ScoredOption>)> = inst
            .agent_ids()
            .map(|a| {
                let mut opts: Vec<ScoredOption> =
                    inst.prefs(a).houses().map(|h| (Some(h), score(a, Some(h)))).collect();
                opts.push((None, score(a, None)));
                opts.sort_by_key(|&(_, s)| -s);
                (a, opts)
            })
            .collect();
        // agents able to gain first, so the bound tightens early
        per_agent.sort_by_key(|(a, opts)| (-opts[0].1, a.0));
        let order: Vec<AgentId> = per_agent.iter().map(|(a, _)| *a).collect();
        let options: Vec<_> = per_agent.into_iter().map(|(_, o)| o).collect();
        let mut suffix_gain = vec![0; options.len() + 1];
        for i in (0..options.len()).rev() {
            suffix_gain[i] = suffix_gain[i + 1] + options[i][0].1.max(0);
        }
        WitnessSearch {
            inst,
            order,
            options,
            suffix_gain,
            load: vec![0; inst.num_houses()],
            current: Matching::empty(inst.num_agents()),
        }
    }

    fn run(mut self) -> Option<Matching> {
        if self.rec(0, 0) {
            Some(self.current)
        } else {
            None
        }
    }

    fn rec(&mut self, i: usize, margin: i32) -> bool {
        if margin + self.suffix_gain[i] <= 0 {
            return false;
        }
        if i == self.order.len() {
            return true;
        }
        let a = self.order[i];
        for k in 0..self.options[i].len() {
            let (opt, s) = self.options[i][k];
            match opt {
                None => {
                    self.current.unassign(a);
                    if self.rec(i + 1, margin + s) {
                        return true;
                    }
                }
                Some(h) => {
                    if self.load[h.0] < self.inst.capacity(h) {
                        self.load[h.0] += 1;
                        self.current.assign(a, h);
                        if self.rec(i + 1, margin + s) {
                            return true;
                        }
                        self.current.unassign(a);
                        self.load[h.0] -= 1;
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::instance::{instance_from_lists, Kind, Popularity};
    use alloc::string::String;
    use proptest::prelude::*;

    fn oracle() -> Oracle {
        Oracle::default()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(oracle().enumerate_matchings(&fix_e()).unwrap().len(), 2);
        let all = oracle().enumerate_matchings(&fix_a()).unwrap();
        assert_eq!(all.len(), 7);
        assert_eq!(all[0].size(), 0);
    }

    #[test]
    fn enumeration_agrees_with_house_major_count() {
        // houses in turn pick a subset of their listers, up to capacity
        fn count(inst: &Instance, h: usize, taken: &mut Vec<bool>) -> usize {
            if h == inst.num_houses() {
                return 1;
            }
            let listers: Vec<usize> = inst
                .agent_ids()
                .filter(|&a| !taken[a.0] && inst.lists(a, HouseId(h)))
                .map(|a| a.0)
                .collect();
            let mut total = 0;
            for mask in 0u32..(1 << listers.len()) {
                if mask.count_ones() > inst.capacity(HouseId(h)) {
                    continue;
                }
                let chosen: Vec<usize> = (0..listers.len())
                    .filter(|&k| mask & (1 << k) != 0)
                    .map(|k| listers[k])
                    .collect();
                for &a in &chosen {
                    taken[a] = true;
                }
                total += count(inst, h + 1, taken);
                for &a in &chosen {
                    taken[a] = false;
                }
            }
            total
        }
        for inst in [fix_a(), fix_b(), fix_c(), fix_e(), fix_c().add_last_resorts().unwrap()] {
            let n = oracle().enumerate_matchings(&inst).unwrap().len();
            assert_eq!(n, count(&inst, 0, &mut vec![false; inst.num_agents()]));
        }
    }

    #[test]
    fn popularity_examples() {
        let a = fix_a().add_last_resorts().unwrap();
        assert!(oracle().is_popular(&a, &m(&a, &[("a1", "h1"), ("a2", "h2")])).unwrap());
        let bad = m(&a, &[("a1", "h2"), ("a2", "l(a2)")]);
        let w = oracle().popularity_witness(&a, &bad).unwrap().unwrap();
        assert_eq!(a.more_popular(&w, &bad).unwrap(), Popularity::First);
        let e = fix_e();
        let w = oracle().popularity_witness(&e, &Matching::empty(1)).unwrap().unwrap();
        assert_eq!(w, m(&e, &[("a1", "h1")]));
    }

    #[test]
    fn popular_counts() {
        for (inst, n) in [(fix_a(), 2u32), (fix_b(), 2), (fix_c(), 1), (fix_e(), 1)] {
            let inst = inst.add_last_resorts().unwrap();
            assert_eq!(oracle().count_popular(&inst).unwrap(), n.into(), "{inst:?}");
        }
        let c = fix_c().add_last_resorts().unwrap();
        assert_eq!(
            oracle().popular_matchings(&c).unwrap(),
            [m(&c, &[("a1", "h1"), ("a2", "h1")])]
        );
    }

    #[test]
    fn perfect_counts() {
        assert_eq!(
            oracle().count_perfect(&BipartiteGraph::complete(3, 3)).unwrap(),
            6u32.into()
        );
        let d = BipartiteGraph::new(1, 1, [(0, 0)]).unwrap();
        assert_eq!(oracle().count_perfect(&d).unwrap(), 1u32.into());
        let g = BipartiteGraph::new(
            4,
            4,
            (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j))),
        )
        .unwrap();
        assert_eq!(oracle().count_perfect(&g).unwrap(), 9u32.into());
        assert!(matches!(
            oracle().count_perfect(&BipartiteGraph::complete(13, 13)),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn graph_matchings() {
        assert_eq!(
            oracle().count_graph_matchings(&BipartiteGraph::complete(2, 2)).unwrap(),
            7u32.into()
        );
        assert_eq!(
            oracle()
                .count_graph_matchings(&BipartiteGraph::new(1, 1, [(0, 0)]).unwrap())
                .unwrap(),
            2u32.into()
        );
        assert_eq!(
            oracle().count_graph_matchings(&BipartiteGraph::complete(0, 0)).unwrap(),
            1u32.into()
        );
    }

    #[test]
    fn state_limit_is_enforced() {
        let tiny = Oracle::new(3);
        assert!(matches!(
            tiny.enumerate_matchings(&fix_a()),
            Err(Error::OracleLimit { states: 9, limit: 3 })
        ));
    }

    fn arb_instance() -> impl Strategy<Value = (Instance, Vec<usize>, Vec<usize>)> {
        (1usize..=3, 1usize..=3)
            .prop_flat_map(|(na, nh)| {
                let list = (Just((0..nh).collect::<Vec<_>>()).prop_shuffle(), 1..=nh)
                    .prop_map(|(hs, keep)| hs[..keep].to_vec());
                let lists = proptest::collection::vec(list, na);
                let caps = proptest::collection::vec(1u32..=2, nh);
                let pa = Just((0..na).collect::<Vec<_>>()).prop_shuffle();
                let ph = Just((0..nh).collect::<Vec<_>>()).prop_shuffle();
                (lists, caps, pa, ph)
            })
            .prop_map(|(lists, caps, pa, ph)| {
                let agents: Vec<String> = (0..lists.len()).map(|i| alloc::format!("a{i}")).collect();
                let houses: Vec<(String, u32)> = caps
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| (alloc::format!("h{j}"), c))
                    .collect();
                let prefs = lists
                    .iter()
                    .map(|l| l.iter().map(|&j| vec![alloc::format!("h{j}")]).collect())
                    .collect();
                (Instance::new(Kind::Cha, agents, houses, prefs).unwrap(), pa, ph)
            })
    }

    /// Same instance with agents and houses renamed and reordered.
    fn relabel(inst: &Instance, pa: &[usize], ph: &[usize]) -> (Instance, impl Fn(&Matching) -> Matching) {
        let agent_name = |i: usize| alloc::format!("x{}", pa[i]);
        let house_name = |j: usize| alloc::format!("y{}", ph[j]);
        let mut agents_new: Vec<(usize, String)> = (0..inst.num_agents()).map(|i| (pa[i], agent_name(i))).collect();
        agents_new.sort();
        let mut houses_new: Vec<(usize, (String, u32))> = (0..inst.num_houses())
            .map(|j| (ph[j], (house_name(j), inst.capacity(HouseId(j)))))
            .collect();
        houses_new.sort();
        let mut prefs_new: Vec<(usize, Vec<Vec<String>>)> = inst
            .agent_ids()
            .map(|a| {
                let groups = inst
                    .prefs(a)
                    .groups()
                    .iter()
                    .map(|g| g.iter().map(|h| house_name(h.0)).collect())
                    .collect();
                (pa[a.0], groups)
            })
            .collect();
        prefs_new.sort();
        let out = Instance::new(
            inst.kind(),
            agents_new.into_iter().map(|(_, s)| s).collect(),
            houses_new.into_iter().map(|(_, h)| h).collect(),
            prefs_new.into_iter().map(|(_, p)| p).collect(),
        )
        .unwrap();
        let pa = pa.to_vec();
        let ph = ph.to_vec();
        let translate = move |m: &Matching| {
            let mut t = Matching::empty(m.num_agents());
            for (a, h) in m.pairs() {
                t.assign(AgentId(pa[a.0]), HouseId(ph[h.0]));
            }
            t
        };
        (out, translate)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn popularity_is_invariant_under_relabelling((inst, pa, ph) in arb_instance()) {
            let (other, translate) = relabel(&inst, &pa, &ph);
            let o = oracle();
            for mm in o.enumerate_matchings(&inst).unwrap() {
                let t = translate(&mm);
                prop_assert_eq!(o.is_popular(&inst, &mm).unwrap(), o.is_popular(&other, &t).unwrap());
            }
            prop_assert_eq!(o.count_popular(&inst).unwrap(), o.count_popular(&other).unwrap());
        }

        #[test]
        fn witnesses_are_strictly_more_popular((inst, _pa, _ph) in arb_instance()) {
            let o = oracle();
            let all = o.enumerate_matchings(&inst).unwrap();
            for mm in &all {
                let w = o.popularity_witness(&inst, mm).unwrap();
                if let Some(w) = &w {
                    let (f, b) = inst.phi(w, mm).unwrap();
                    prop_assert!(f > b);
                }
                // plain pairwise scan agrees
                let beaten = all.iter().any(|x| inst.more_popular(x, mm).unwrap() == Popularity::First);
                prop_assert_eq!(w.is_some(), beaten);
            }
            let fast: Vec<Matching> = o.popular_matchings(&inst).unwrap();
            let slow: Vec<Matching> =
                all.iter().filter(|mm| o.is_popular(&inst, mm).unwrap()).cloned().collect();
            prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn identical_lists_have_no_popular_matching() {
        let l: &[&[&str]] = &[&["h1"], &["h2"], &["h3"]];
        let inst = instance_from_lists(
            Kind::Ha,
            &[("h1", 1), ("h2", 1), ("h3", 1)],
            &[("a1", l), ("a2", l), ("a3", l)],
        )
        .unwrap()
        .add_last_resorts()
        .unwrap();
        assert_eq!(oracle().count_popular(&inst).unwrap(), 0u32.into());
    }
}
