//! Bipartite graphs, maximum matchings and the Gallai-Edmonds decomposition.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::Instance;
use crate::{Error, Result};

/// Bipartite graph with vertices `0..left` and `0..right`; adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    right: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); left];
        for (u, v) in edges {
            if u >= left {
                return Err(Error::VertexOutOfRange { index: u, bound: left });
            }
            if v >= right {
                return Err(Error::VertexOutOfRange { index: v, bound: right });
            }
            adj[u].push(v);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(u, w[0]));
            }
        }
        Ok(BipartiteGraph { right, adj })
    }

    pub fn complete(left: usize, right: usize) -> Self {
        BipartiteGraph {
            right,
            adj: vec![(0..right).collect(); left],
        }
    }

    pub fn left(&self) -> usize {
        self.adj.len()
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn left_degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.right];
        for (_, v) in self.edges() {
            d[v] += 1;
        }
        d
    }

    /// Right-to-left adjacency.
    pub fn transpose_adjacency(&self) -> Vec<Vec<usize>> {
        let mut t = vec![Vec::new(); self.right];
        for (u, v) in self.edges() {
            t[v].push(u);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMatching {
    mate_left: Vec<Option<usize>>,
    mate_right: Vec<Option<usize>>,
}

impl BipartiteMatching {
    pub fn empty(left: usize, right: usize) -> Self {
        BipartiteMatching {
            mate_left: vec![None; left],
            mate_right: vec![None; right],
        }
    }

    /// Builds a matching from pairs, checking it against `g`.
    pub fn from_pairs(g: &BipartiteGraph, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Self::empty(g.left(), g.right());
        for (u, v) in pairs {
            if u >= g.left() || v >= g.right() || !g.has_edge(u, v) {
                return Err(Error::InvalidMatching(alloc::format!("({u}, {v}) is not an edge")));
            }
            if m.mate_left[u].is_some() || m.mate_right[v].is_some() {
                return Err(Error::InvalidMatching(alloc::format!(
                    "vertex of ({u}, {v}) matched twice"
                )));
            }
            m.mate_left[u] = Some(v);
            m.mate_right[v] = Some(u);
        }
        Ok(m)
    }

    pub fn mate_of_left(&self, u: usize) -> Option<usize> {
        self.mate_left[u]
    }

    pub fn mate_of_right(&self, v: usize) -> Option<usize> {
        self.mate_right[v]
    }

    pub fn size(&self) -> usize {
        self.mate_left.iter().filter(|m| m.is_some()).count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mate_left.iter().enumerate().filter_map(|(u, v)| v.map(|v| (u, v)))
    }

    pub fn is_perfect(&self) -> bool {
        self.mate_left.len() == self.mate_right.len() && self.mate_left.iter().all(Option::is_some)
    }

    fn check_in(&self, g: &BipartiteGraph) -> Result<()> {
        if self.mate_left.len() != g.left() || self.mate_right.len() != g.right() {
            return Err(Error::InvalidMatching("matching and graph sizes differ".into()));
        }
        for (u, v) in self.pairs() {
            if !g.has_edge(u, v) || self.mate_right[v] != Some(u) {
                return Err(Error::InvalidMatching(alloc::format!(
                    "({u}, {v}) is not a matched edge"
                )));
            }
        }
        Ok(())
    }
}

/// Maximum-cardinality matching (Hopcroft-Karp). Deterministic: adjacency is sorted.
pub fn max_matching(g: &BipartiteGraph) -> BipartiteMatching {
    let mut m = BipartiteMatching::empty(g.left(), g.right());
    augment_to_maximum(g, &mut m);
    m
}

/// Augments `seed` to a maximum matching. Augmenting paths never unmatch a
/// vertex, so every vertex covered by `seed` stays covered.
pub fn max_matching_from(g: &BipartiteGraph, seed: BipartiteMatching) -> Result<BipartiteMatching> {
    seed.check_in(g)?;
    let mut m = seed;
    augment_to_maximum(g, &mut m);
    Ok(m)
}

const INF: usize = usize::MAX;

fn augment_to_maximum(g: &BipartiteGraph, m: &mut BipartiteMatching) {
    let n = g.left();
    let mut dist = vec![INF; n];
    loop {
        // layered BFS from free left vertices
        let mut queue = VecDeque::new();
        for (u, d) in dist.iter_mut().enumerate() {
            if m.mate_left[u].is_none() {
                *d = 0;
                queue.push_back(u);
            } else {
                *d = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                match m.mate_right[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            return;
        }
        let mut next = vec![0usize; n];
        for u in 0..n {
            if m.mate_left[u].is_none() {
                augment_dfs(g, m, &mut dist, &mut next, u);
            }
        }
    }
}

fn augment_dfs(
    g: &BipartiteGraph,
    m: &mut BipartiteMatching,
    dist: &mut [usize],
    next: &mut [usize],
    u: usize,
) -> bool {
    while next[u] < g.neighbors(u).len() {
        let v = g.neighbors(u)[next[u]];
        next[u] += 1;
        let ok = match m.mate_right[v] {
            None => true,
            Some(w) => dist[w] == dist[u].wrapping_add(1) && augment_dfs(g, m, dist, next, w),
        };
        if ok {
            m.mate_left[u] = Some(v);
            m.mate_right[v] = Some(u);
            return true;
        }
    }
    dist[u] = INF;
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeDecomposition {
    pub left: Vec<Parity>,
    pub right: Vec<Parity>,
    pub matching: BipartiteMatching,
}

impl GeDecomposition {
    pub fn count(&self, p: Parity) -> usize {
        self.left.iter().chain(&self.right).filter(|&&x| x == p).count()
    }
}

/// Even / Odd / Unreachable labels from alternating-path reachability out of
/// every unmatched vertex. Fails with [`Error::NotMaximum`] if `m` admits an
/// augmenting path.
pub fn gallai_edmonds(g: &BipartiteGraph, m: &BipartiteMatching) -> Result<GeDecomposition> {
    m.check_in(g)?;
    let rev = g.transpose_adjacency();
    let mut left = vec![Parity::Unreachable; g.left()];
    let mut right = vec![Parity::Unreachable; g.right()];

    // From free left vertices: left side Even, right side Odd.
    let mut queue: VecDeque<usize> = (0..g.left()).filter(|&u| m.mate_left[u].is_none()).collect();
    for &u in &queue {
        left[u] = Parity::Even;
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if m.mate_left[u] == Some(v) || right[v] == Parity::Odd {
                continue;
            }
            match m.mate_right[v] {
                None => return Err(Error::NotMaximum),
                Some(w) => {
                    right[v] = Parity::Odd;
                    if left[w] != Parity::Even {
                        left[w] = Parity::Even;
                        queue.push_back(w);
                    }
                }
            }
        }
    }

    // From free right vertices: right side Even, left side Odd.
    let mut queue: VecDeque<usize> = (0..g.right()).filter(|&v| m.mate_right[v].is_none()).collect();
    for &v in &queue {
        if right[v] != Parity::Unreachable {
            return Err(Error::NotMaximum);
        }
        right[v] = Parity::Even;
    }
    while let Some(v) = queue.pop_front() {
        for &u in &rev[v] {
            if m.mate_right[v] == Some(u) || left[u] == Parity::Odd {
                continue;
            }
            if left[u] == Parity::Even {
                // reached from both sides: the two alternating paths join into an augmenting one
                return Err(Error::NotMaximum);
            }
            left[u] = Parity::Odd;
            let w = m.mate_left[u].ok_or(Error::NotMaximum)?;
            if right[w] == Parity::Odd {
                return Err(Error::NotMaximum);
            }
            if right[w] != Parity::Even {
                right[w] = Parity::Even;
                queue.push_back(w);
            }
        }
    }
    Ok(GeDecomposition {
        left,
        right,
        matching: m.clone(),
    })
}

/// Agents on the left, every house on the right, edges from each agent to its
/// first rank group.
pub fn first_choice_graph(inst: &Instance) -> BipartiteGraph {
    let edges = inst
        .agent_ids()
        .flat_map(|a| inst.prefs(a).first_group().iter().map(move |h| (a.0, h.0)));
    BipartiteGraph::new(inst.num_agents(), inst.num_houses(), edges.collect::<Vec<_>>())
        .expect("preference lists reference known houses without repeats")
}
