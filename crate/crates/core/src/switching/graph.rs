use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::labels::{compute_fs_cha, is_popular_cha_with, ChaVerdict};
use crate::instance::{AgentId, HouseId, Instance, Matching};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weight {
    /// The agent sits on its first choice.
    Minus,
    Plus,
}

impl Weight {
    pub fn value(self) -> i8 {
        match self {
            Weight::Minus => -1,
            Weight::Plus => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Weight::Minus => Weight::Plus,
            Weight::Plus => Weight::Minus,
        }
    }
}

/// The edge of one agent: from its current house to its other option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchingEdge {
    pub agent: AgentId,
    pub from: HouseId,
    pub to: HouseId,
    pub weight: Weight,
}

impl SwitchingEdge {
    pub fn reversed(self) -> Self {
        SwitchingEdge {
            agent: self.agent,
            from: self.to,
            to: self.from,
            weight: self.weight.flip(),
        }
    }
}

/// Directed multigraph on houses with one edge per agent.
///
/// `edges[i]` belongs to agent `i`. Labels are carried along so graphs can be
/// compared, exported and enumerated in label order on their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingGraph {
    agents: Vec<String>,
    houses: Vec<String>,
    capacity: Vec<u32>,
    edges: Vec<SwitchingEdge>,
}

impl SwitchingGraph {
    pub fn new(agents: Vec<String>, houses: Vec<(String, u32)>, edges: Vec<SwitchingEdge>) -> Result<Self> {
        if edges.len() != agents.len() {
            return Err(Error::GraphMismatch(format!(
                "{} edges for {} agents",
                edges.len(),
                agents.len()
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.agent.0 != i {
                return Err(Error::GraphMismatch(format!(
                    "edge {i} belongs to agent #{}",
                    e.agent.0
                )));
            }
            for h in [e.from, e.to] {
                if h.0 >= houses.len() {
                    return Err(Error::VertexOutOfRange {
                        index: h.0,
                        bound: houses.len(),
                    });
                }
            }
            if e.from == e.to {
                return Err(Error::GraphMismatch(format!("loop at `{}`", houses[e.from.0].0)));
            }
        }
        let (houses, capacity) = houses.into_iter().unzip();
        Ok(SwitchingGraph {
            agents,
            houses,
            capacity,
            edges,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_houses(&self) -> usize {
        self.houses.len()
    }

    pub fn agent_label(&self, a: AgentId) -> &str {
        &self.agents[a.0]
    }

    pub fn house_label(&self, h: HouseId) -> &str {
        &self.houses[h.0]
    }

    pub fn capacity(&self, h: HouseId) -> u32 {
        self.capacity[h.0]
    }

    pub fn edges(&self) -> &[SwitchingEdge] {
        &self.edges
    }

    pub fn edge(&self, a: AgentId) -> SwitchingEdge {
        self.edges[a.0]
    }

    pub fn out_degree(&self, h: HouseId) -> usize {
        self.edges.iter().filter(|e| e.from == h).count()
    }

    /// `c(h) - |M(h)|`; zero when the house is over capacity.
    pub fn unsat(&self, h: HouseId) -> u32 {
        self.capacity[h.0].saturating_sub(self.out_degree(h) as u32)
    }

    pub fn is_saturated(&self, h: HouseId) -> bool {
        self.unsat(h) == 0
    }

    pub fn out_edges(&self, h: HouseId) -> impl Iterator<Item = &SwitchingEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == h)
    }

    pub fn in_edges(&self, h: HouseId) -> impl Iterator<Item = &SwitchingEdge> + '_ {
        self.edges.iter().filter(move |e| e.to == h)
    }

    /// The matching encoded by the graph: every agent sits at the tail of its edge.
    pub fn matching(&self) -> Matching {
        Matching::from_assignment(self.edges.iter().map(|e| Some(e.from)).collect())
    }

    /// Agents sorted by label.
    pub fn agents_by_label(&self) -> Vec<AgentId> {
        let mut order: Vec<AgentId> = (0..self.agents.len()).map(AgentId).collect();
        order.sort_by(|a, b| self.agents[a.0].cmp(&self.agents[b.0]));
        order
    }

    pub(crate) fn with_edges(&self, edges: Vec<SwitchingEdge>) -> Self {
        SwitchingGraph {
            agents: self.agents.clone(),
            houses: self.houses.clone(),
            capacity: self.capacity.clone(),
            edges,
        }
    }
}

/// Builds the switching graph of a popular matching.
pub fn build_switching_graph(inst: &Instance, m: &Matching) -> Result<SwitchingGraph> {
    let labels = compute_fs_cha(inst)?;
    if let ChaVerdict::NotPopular(v) = is_popular_cha_with(inst, &labels, m)? {
        return Err(Error::NotPopular(format!("{}: {v:?}", m.describe(inst))));
    }
    let mut edges = Vec::with_capacity(inst.num_agents());
    for a in inst.agent_ids() {
        let at = m.house_of(a).expect("popular matchings are agent-complete");
        let f = labels.first[a.0];
        let s = labels.second[a.0].ok_or_else(|| Error::MissingSecondChoice(inst.agent_label(a).into()))?;
        let (to, weight) = if at == f { (s, Weight::Minus) } else { (f, Weight::Plus) };
        edges.push(SwitchingEdge {
            agent: a,
            from: at,
            to,
            weight,
        });
    }
    SwitchingGraph::new(
        inst.agents().to_vec(),
        inst.houses().iter().map(|h| (h.label.clone(), h.capacity)).collect(),
        edges,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    /// Out-degree at most the capacity.
    P1,
    /// No `+1` edge into an unsaturated house.
    P3,
    /// A saturated house whose out-edges are all `-1` has no `-1` in-edge.
    P4,
    /// A house with a `+1` in-edge has only `-1` out-edges and no `-1` in-edge.
    P5,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyViolation {
    pub property: Property,
    pub house: HouseId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub violations: Vec<PropertyViolation>,
}

impl PropertyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn holds(&self, p: Property) -> bool {
        !self.violations.iter().any(|v| v.property == p)
    }
}

pub fn validate_switching_properties(sg: &SwitchingGraph) -> PropertyReport {
    let mut violations = Vec::new();
    for h in (0..sg.num_houses()).map(HouseId) {
        let mut flag = |property| violations.push(PropertyViolation { property, house: h });
        let out: Vec<Weight> = sg.out_edges(h).map(|e| e.weight).collect();
        let inc: Vec<Weight> = sg.in_edges(h).map(|e| e.weight).collect();
        let saturated = sg.is_saturated(h);
        if out.len() > sg.capacity(h) as usize {
            flag(Property::P1);
        }
        if !saturated && inc.contains(&Weight::Plus) {
            flag(Property::P3);
        }
        if saturated && out.iter().all(|&w| w == Weight::Minus) && inc.contains(&Weight::Minus) {
            flag(Property::P4);
        }
        if inc.contains(&Weight::Plus) && (out.contains(&Weight::Plus) || inc.contains(&Weight::Minus)) {
            flag(Property::P5);
        }
    }
    PropertyReport { violations }
}

/// Houses whose number of `-1` out-edges or `+1` in-edges differs between
/// two switching graphs of the same instance.
pub fn compare_property_two(a: &SwitchingGraph, b: &SwitchingGraph) -> Result<Vec<HouseId>> {
    if a.houses != b.houses || a.capacity != b.capacity {
        return Err(Error::GraphMismatch("graphs have different houses".into()));
    }
    let counts = |g: &SwitchingGraph, h: HouseId| {
        (
            g.out_edges(h).filter(|e| e.weight == Weight::Minus).count(),
            g.in_edges(h).filter(|e| e.weight == Weight::Plus).count(),
        )
    };
    Ok((0..a.num_houses())
        .map(HouseId)
        .filter(|&h| counts(a, h) != counts(b, h))
        .collect())
}

/// Edge lists of two graphs agree up to orientation.
pub(crate) fn same_underlying(a: &SwitchingGraph, b: &SwitchingGraph) -> Result<()> {
    if a.agents != b.agents || a.houses != b.houses || a.capacity != b.capacity {
        return Err(Error::GraphMismatch("graphs have different agents or houses".into()));
    }
    for (x, y) in a.edges.iter().zip(&b.edges) {
        let same = (x.from, x.to) == (y.from, y.to) || (x.from, x.to) == (y.to, y.from);
        if !same {
            return Err(Error::GraphMismatch(format!(
                "edge of agent `{}` differs",
                a.agents[x.agent.0]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::instance::Kind;

    fn fix_a_cha() -> Instance {
        fix_a().with_kind(Kind::Cha).unwrap().add_last_resorts().unwrap()
    }

    fn described(sg: &SwitchingGraph) -> Vec<(String, String, i8, String)> {
        sg.edges()
            .iter()
            .map(|e| {
                (
                    sg.house_label(e.from).into(),
                    sg.house_label(e.to).into(),
                    e.weight.value(),
                    sg.agent_label(e.agent).into(),
                )
            })
            .collect()
    }

    fn t(a: &str, b: &str, w: i8, x: &str) -> (String, String, i8, String) {
        (a.into(), b.into(), w, x.into())
    }

    #[test]
    fn graph_of_fix_c() {
        let c = fix_c().add_last_resorts().unwrap();
        let sg = build_switching_graph(&c, &m(&c, &[("a1", "h1"), ("a2", "h1")])).unwrap();
        assert_eq!(described(&sg), [t("h1", "h2", -1, "a1"), t("h1", "h2", -1, "a2")]);
        assert_eq!(sg.unsat(c.house_by_label("h2").unwrap()), 1);
        assert_eq!(sg.unsat(c.house_by_label("h1").unwrap()), 0);
        assert!(validate_switching_properties(&sg).is_ok());
        assert_eq!(sg.matching(), m(&c, &[("a1", "h1"), ("a2", "h1")]));
    }

    #[test]
    fn graphs_of_fix_a() {
        let a = fix_a_cha();
        let g1 = build_switching_graph(&a, &m(&a, &[("a1", "h1"), ("a2", "h2")])).unwrap();
        assert_eq!(described(&g1), [t("h1", "h2", -1, "a1"), t("h2", "h1", 1, "a2")]);
        let g2 = build_switching_graph(&a, &m(&a, &[("a1", "h2"), ("a2", "h1")])).unwrap();
        assert!(validate_switching_properties(&g1).is_ok());
        assert!(validate_switching_properties(&g2).is_ok());
        assert_eq!(compare_property_two(&g1, &g2).unwrap(), []);
        assert!(same_underlying(&g1, &g2).is_ok());
    }

    #[test]
    fn graph_of_fix_e() {
        let e = fix_e().add_last_resorts().unwrap();
        let sg = build_switching_graph(&e, &m(&e, &[("a1", "h1")])).unwrap();
        assert_eq!(described(&sg), [t("h1", "l(a1)", -1, "a1")]);
        assert_eq!(sg.unsat(e.house_by_label("l(a1)").unwrap()), 1);
    }

    #[test]
    fn rejects_unpopular_matchings() {
        let c = fix_c().add_last_resorts().unwrap();
        let r = build_switching_graph(&c, &m(&c, &[("a1", "h1"), ("a2", "h2")]));
        assert!(matches!(r, Err(Error::NotPopular(_))));
    }

    #[test]
    fn hand_built_violations() {
        let houses = vec![("x".into(), 1), ("y".into(), 2)];
        let plus_into_free = SwitchingEdge {
            agent: AgentId(0),
            from: HouseId(0),
            to: HouseId(1),
            weight: Weight::Plus,
        };
        let sg = SwitchingGraph::new(vec!["a".into()], houses.clone(), vec![plus_into_free]).unwrap();
        let report = validate_switching_properties(&sg);
        assert_eq!(
            report.violations,
            [PropertyViolation {
                property: Property::P3,
                house: HouseId(1)
            }]
        );

        let e = |i, f, t, w| SwitchingEdge {
            agent: AgentId(i),
            from: HouseId(f),
            to: HouseId(t),
            weight: w,
        };
        let crowded = SwitchingGraph::new(
            vec!["a".into(), "b".into()],
            houses,
            vec![e(0, 0, 1, Weight::Minus), e(1, 0, 1, Weight::Minus)],
        )
        .unwrap();
        assert!(!validate_switching_properties(&crowded).holds(Property::P1));
        assert!(SwitchingGraph::new(vec!["a".into()], vec![("x".into(), 1)], vec![e(0, 0, 0, Weight::Plus)]).is_err());
    }

    #[test]
    fn comparator_flags_differences() {
        let a = fix_a_cha();
        let g1 = build_switching_graph(&a, &m(&a, &[("a1", "h1"), ("a2", "h2")])).unwrap();
        let mut edges = g1.edges().to_vec();
        edges[1] = edges[1].reversed();
        let g2 = g1.with_edges(edges);
        assert!(!compare_property_two(&g1, &g2).unwrap().is_empty());
    }
}
