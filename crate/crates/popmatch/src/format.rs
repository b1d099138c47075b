//! Text formats: JSON instances, `agent house` matchings, edge-list graphs and
//! switching-graph listings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use popmatch_core::switching::SwitchingGraph;
use popmatch_core::{BipartiteGraph, HouseId, Instance, Kind, Matching};
use serde::{Deserialize, Serialize};

use crate::error::FormatError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: String,
    agents: Vec<String>,
    houses: Vec<HouseEntry>,
    #[serde(default)]
    preferences: BTreeMap<String, Vec<Group>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    last_resorts: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HouseEntry {
    id: String,
    capacity: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Group {
    One(String),
    Tie(Vec<String>),
}

/// Parses an instance file. `"last_resorts": true` asks for the last-resort
/// houses to be generated; they are never written out explicitly.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(FormatError::from_json)?;
    let kind: Kind = file
        .kind
        .parse()
        .map_err(|_| FormatError::Schema(format!("unknown kind `{}`", file.kind)))?;
    let mut prefs = file.preferences;
    let lists = file
        .agents
        .iter()
        .map(|a| {
            prefs
                .remove(a)
                .unwrap_or_default()
                .into_iter()
                .map(|g| match g {
                    Group::One(h) => vec![h],
                    Group::Tie(hs) => hs,
                })
                .collect()
        })
        .collect();
    if let Some(stray) = prefs.into_keys().next() {
        return Err(popmatch_core::Error::UnknownAgent(stray).into());
    }
    let houses = file.houses.into_iter().map(|h| (h.id, h.capacity)).collect();
    let inst = Instance::new(kind, file.agents, houses, lists)?;
    Ok(if file.last_resorts {
        inst.add_last_resorts()?
    } else {
        inst
    })
}

pub fn write_instance(inst: &Instance) -> String {
    let keep = |h: &HouseId| !inst.house(*h).is_last_resort;
    let preferences = inst
        .agent_ids()
        .map(|a| {
            let groups = inst
                .prefs(a)
                .groups()
                .iter()
                .filter_map(|g| {
                    let hs: Vec<String> = g
                        .iter()
                        .filter(|h| keep(h))
                        .map(|&h| inst.house_label(h).to_string())
                        .collect();
                    match hs.len() {
                        0 => None,
                        1 => Some(Group::One(hs.into_iter().next().unwrap())),
                        _ => Some(Group::Tie(hs)),
                    }
                })
                .collect();
            (inst.agent_label(a).to_string(), groups)
        })
        .collect();
    let file = InstanceFile {
        kind: inst.kind().as_str().to_string(),
        agents: inst.agents().to_vec(),
        houses: inst
            .houses()
            .iter()
            .filter(|h| !h.is_last_resort)
            .map(|h| HouseEntry {
                id: h.label.clone(),
                capacity: h.capacity,
            })
            .collect(),
        preferences,
        last_resorts: inst.last_resorts_added(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// One `agent house` pair per line; `#` starts a comment.
pub fn parse_matching(inst: &Instance, text: &str) -> Result<Matching, FormatError> {
    let mut m = Matching::empty(inst.num_agents());
    for (line, content) in content_lines(text) {
        let at = |message: String| FormatError::Line { line, message };
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [agent, house] = fields[..] else {
            return Err(at(format!("expected `agent house`, found `{content}`")));
        };
        let a = inst
            .agent_by_label(agent)
            .ok_or_else(|| at(format!("unknown agent `{agent}`")))?;
        let h = inst
            .house_by_label(house)
            .ok_or_else(|| at(format!("unknown house `{house}`")))?;
        if m.house_of(a).is_some() {
            return Err(at(format!("agent `{agent}` matched twice")));
        }
        m.assign(a, h);
    }
    inst.validate_matching(&m)?;
    Ok(m)
}

pub fn write_matching(inst: &Instance, m: &Matching) -> String {
    m.labelled_pairs(inst)
        .into_iter()
        .map(|(a, h)| format!("{a} {h}\n"))
        .collect()
}

/// `n1 n2 m` header, then `m` lines `u v` with 1-based vertex indices.
pub fn parse_graph(text: &str) -> Result<BipartiteGraph, FormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(FormatError::Line {
        line: 1,
        message: "missing header".into(),
    })?;
    let nums = |line: usize, s: &str, want: usize| -> Result<Vec<usize>, FormatError> {
        let v: Result<Vec<usize>, _> = s.split_whitespace().map(str::parse).collect();
        match v {
            Ok(v) if v.len() == want => Ok(v),
            _ => Err(FormatError::Line {
                line,
                message: format!("expected {want} non-negative integers, found `{s}`"),
            }),
        }
    };
    let h = nums(line, header, 3)?;
    let (n1, n2, m) = (h[0], h[1], h[2]);
    let mut edges = Vec::with_capacity(m);
    for (line, content) in lines.by_ref().take(m) {
        let e = nums(line, content, 2)?;
        let (u, v) = (e[0], e[1]);
        if u == 0 || u > n1 || v == 0 || v > n2 {
            return Err(FormatError::Line {
                line,
                message: format!("edge ({u}, {v}) outside 1..={n1} x 1..={n2}"),
            });
        }
        edges.push((u - 1, v - 1));
    }
    if edges.len() < m {
        return Err(FormatError::Line {
            line: text.lines().count(),
            message: format!("expected {m} edges, found {}", edges.len()),
        });
    }
    if let Some((line, _)) = lines.next() {
        return Err(FormatError::Line {
            line,
            message: "more edges than the header announces".into(),
        });
    }
    Ok(BipartiteGraph::new(n1, n2, edges)?)
}

pub fn write_graph(g: &BipartiteGraph) -> String {
    let mut s = format!("{} {} {}\n", g.left(), g.right(), g.num_edges());
    for (u, v) in g.edges() {
        writeln!(s, "{} {}", u + 1, v + 1).unwrap();
    }
    s
}

/// `src dst weight agent` per edge in agent order, then `unsat house k` per house.
pub fn write_switching(sg: &SwitchingGraph) -> String {
    let mut s = String::from("# src dst weight agent\n");
    for e in sg.edges() {
        writeln!(
            s,
            "{} {} {:+} {}",
            sg.house_label(e.from),
            sg.house_label(e.to),
            e.weight.value(),
            sg.agent_label(e.agent)
        )
        .unwrap();
    }
    s.push_str("# unsat house free\n");
    for h in (0..sg.num_houses()).map(HouseId) {
        writeln!(s, "unsat {} {}", sg.house_label(h), sg.unsat(h)).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use popmatch_core::instance::instance_from_lists;
    use proptest::prelude::*;

    const FIX_A: &str = r#"{
        "kind": "HA",
        "agents": ["a1", "a2"],
        "houses": [{"id": "h1", "capacity": 1}, {"id": "h2", "capacity": 1}],
        "preferences": {"a1": ["h1", "h2"], "a2": ["h1", "h2"]}
    }"#;

    const FIX_C: &str = r#"{
        "kind": "CHA",
        "agents": ["a1", "a2"],
        "houses": [{"id": "h1", "capacity": 2}, {"id": "h2", "capacity": 1}],
        "preferences": {"a1": ["h1", "h2"], "a2": ["h1", "h2"]}
    }"#;

    #[test]
    fn parses_fixtures() {
        let a = parse_instance(FIX_A).unwrap();
        assert_eq!((a.num_agents(), a.num_houses(), a.kind()), (2, 2, Kind::Ha));
        let c = parse_instance(FIX_C).unwrap();
        let caps: Vec<(&str, u32)> = c.houses().iter().map(|h| (h.label.as_str(), h.capacity)).collect();
        assert_eq!(caps, [("h1", 2), ("h2", 1)]);
        assert_eq!(parse_instance(&write_instance(&c)).unwrap(), c);
    }

    #[test]
    fn ties_and_last_resorts() {
        let text = r#"{"kind": "HAT", "agents": ["a1"], "houses": [{"id": "h1", "capacity": 1}, {"id": "h2", "capacity": 1}],
                       "preferences": {"a1": [["h1", "h2"]]}, "last_resorts": true}"#;
        let inst = parse_instance(text).unwrap();
        assert!(inst.last_resorts_added());
        assert_eq!(inst.num_houses(), 3);
        let out = write_instance(&inst);
        assert!(!out.contains("l(a1)"));
        assert_eq!(parse_instance(&out).unwrap(), inst);
    }

    #[test]
    fn reports_errors() {
        let dup = FIX_A.replace(r#""a1": ["h1", "h2"]"#, r#""a1": ["h1", "h1"]"#);
        assert!(matches!(
            parse_instance(&dup),
            Err(FormatError::Core(popmatch_core::Error::DuplicateInList { .. }))
        ));
        match parse_instance("{\n  \"kind\": \"HA\",\n  \"agents\": [,]\n}") {
            Err(FormatError::Json { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let tie = FIX_A.replace(r#""a1": ["h1", "h2"]"#, r#""a1": [["h1", "h2"]]"#);
        assert!(matches!(
            parse_instance(&tie),
            Err(FormatError::Core(popmatch_core::Error::TieNotAllowed { .. }))
        ));
        let zero = FIX_C.replace(r#""capacity": 2"#, r#""capacity": 0"#);
        assert!(parse_instance(&zero).is_err());
        let unknown = FIX_A.replace(r#""a2": ["h1", "h2"]"#, r#""a2": ["h3"]"#);
        assert!(matches!(
            parse_instance(&unknown),
            Err(FormatError::Core(popmatch_core::Error::UnknownHouse { .. }))
        ));
        let stray = FIX_A.replace(r#""a2": ["h1", "h2"]"#, r#""a9": ["h1"]"#);
        assert!(parse_instance(&stray).is_err());
        let reserved = FIX_A.replace(r#"{"id": "h2""#, r#"{"id": "l(x)""#);
        assert!(matches!(
            parse_instance(&reserved),
            Err(FormatError::Core(popmatch_core::Error::ReservedLabel(_)))
        ));
    }

    #[test]
    fn matchings_round_trip() {
        let inst = parse_instance(FIX_A).unwrap().add_last_resorts().unwrap();
        let m = parse_matching(&inst, "# comment\na2 h2\n\na1 h1\n").unwrap();
        assert_eq!(write_matching(&inst, &m), "a1 h1\na2 h2\n");
        let lr = parse_matching(&inst, "a1 l(a1)").unwrap();
        assert_eq!(write_matching(&inst, &lr), "a1 l(a1)\n");
        assert!(matches!(
            parse_matching(&inst, "a1 h1\na2 h1\n"),
            Err(FormatError::Core(_))
        ));
        assert!(matches!(
            parse_matching(&inst, "a1\n"),
            Err(FormatError::Line { line: 1, .. })
        ));
        assert!(matches!(
            parse_matching(&inst, "a1 h1\na1 h2\n"),
            Err(FormatError::Line { line: 2, .. })
        ));
    }

    #[test]
    fn graphs_round_trip() {
        let g = parse_graph("# K2,2\n2 2 4\n1 1\n1 2\n2 1\n2 2\n").unwrap();
        assert_eq!(g, BipartiteGraph::complete(2, 2));
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        assert!(matches!(
            parse_graph("1 1 1\n2 1\n"),
            Err(FormatError::Line { line: 2, .. })
        ));
        assert!(parse_graph("1 1 2\n1 1\n").is_err());
        assert!(parse_graph("1 1 1\n1 1\n1 1\n").is_err());
        assert!(parse_graph("1 1 2\n1 1\n1 1\n").is_err());
        assert_eq!(parse_graph("1 0 0\n").unwrap().left(), 1);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (1usize..=4, 1usize..=4, 0usize..3, any::<bool>()).prop_flat_map(|(na, nh, kind, lr)| {
            let kind = [Kind::Ha, Kind::Hat, Kind::Cha][kind];
            let list = (
                Just((0..nh).collect::<Vec<_>>()).prop_shuffle(),
                0..=nh,
                proptest::collection::vec(any::<bool>(), nh),
            )
                .prop_map(move |(order, keep, cuts)| {
                    let mut groups: Vec<Vec<String>> = Vec::new();
                    for (k, &h) in order[..keep].iter().enumerate() {
                        let tie = kind.allows_ties() && cuts[k] && !groups.is_empty();
                        if tie {
                            groups.last_mut().unwrap().push(format!("h{h}"));
                        } else {
                            groups.push(vec![format!("h{h}")]);
                        }
                    }
                    groups
                });
            let caps = proptest::collection::vec(1u32..=3, nh);
            (proptest::collection::vec(list, na), caps).prop_map(move |(lists, caps)| {
                let houses: Vec<(String, u32)> = caps
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| (format!("h{j}"), if kind.allows_capacities() { c } else { 1 }))
                    .collect();
                let agents = (0..lists.len()).map(|i| format!("a{i}")).collect();
                let inst = Instance::new(kind, agents, houses, lists).unwrap();
                if lr {
                    inst.add_last_resorts().unwrap()
                } else {
                    inst
                }
            })
        })
    }

    proptest! {
        #[test]
        fn instance_round_trip(inst in arb_instance()) {
            prop_assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn switching_listing() {
        let inst = instance_from_lists(Kind::Ha, &[("h1", 1)], &[("a1", &[&["h1"]])])
            .unwrap()
            .add_last_resorts()
            .unwrap();
        let m = parse_matching(&inst, "a1 h1").unwrap();
        let sg = popmatch_core::switching::build_switching_graph(&inst, &m).unwrap();
        assert_eq!(
            write_switching(&sg),
            "# src dst weight agent\nh1 l(a1) -1 a1\n# unsat house free\nunsat h1 0\nunsat l(a1) 1\n"
        );
    }
}
