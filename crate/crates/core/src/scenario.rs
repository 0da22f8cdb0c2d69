//! Contextuality scenarios, joint measurability structures and the
//! combinatorial searches defined directly on them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest scenario accepted by the KS-colouring search.
pub const MAX_COLORING_VERTICES: usize = 30;
/// Largest structure accepted by the minimal-incompatible-subset scan.
pub const MAX_JMS_SCAN_VERTICES: usize = 20;
/// Largest single compatible set expanded during downward closure.
pub const MAX_CLOSURE_SET: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("hyperedge {edge} is empty")]
    EmptyHyperedge { edge: usize },
    #[error("hyperedge {edge} names unknown vertex `{vertex}`")]
    UnknownVertex { edge: usize, vertex: String },
    #[error("vertex `{vertex}` appears in no hyperedge")]
    OrphanVertex { vertex: String },
    #[error("vertex `{vertex}` is listed twice")]
    DuplicateVertex { vertex: String },
    #[error("vertex `{vertex}` appears twice in hyperedge {edge}")]
    DuplicateInHyperedge { edge: usize, vertex: String },
    #[error("structure has {actual} elements, limit is {limit}")]
    TooLarge { actual: usize, limit: usize },
    #[error("structure has no incompatible subset")]
    TrivialStructure,
    #[error("edge {a}-{b} references a vertex outside the graph")]
    BadEdge { a: usize, b: usize },
    #[error("weight for vertex {vertex} is negative or not finite")]
    BadWeight { vertex: usize },
    #[error("expected {expected} weights, got {actual}")]
    WeightCount { expected: usize, actual: usize },
}

/// Scenario as it appears on disk: `{"vertices": [...], "hyperedges": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub vertices: Vec<String>,
    pub hyperedges: Vec<Vec<String>>,
}

impl RawScenario {
    pub fn new<S: AsRef<str>>(vertices: &[S], hyperedges: &[&[S]]) -> Self {
        RawScenario {
            vertices: vertices.iter().map(|v| v.as_ref().to_string()).collect(),
            hyperedges: hyperedges
                .iter()
                .map(|e| e.iter().map(|v| v.as_ref().to_string()).collect())
                .collect(),
        }
    }
}

/// A validated contextuality scenario.
///
/// Vertices are kept in lexicographic order. Hyperedges keep the order in
/// which they were listed, and so does the membership of each hyperedge: the
/// position of a vertex inside its hyperedge is the outcome label used by
/// prepare-and-measure data tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextualityScenario {
    vertices: Vec<String>,
    index: BTreeMap<String, usize>,
    hyperedges: Vec<Vec<usize>>,
}

impl ContextualityScenario {
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.hyperedges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_hyperedges(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Hyperedges (by position) that contain vertex `v`.
    pub fn edges_containing(&self, v: usize) -> Vec<usize> {
        self.hyperedges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(&v))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_raw(&self) -> RawScenario {
        RawScenario {
            vertices: self.vertices.clone(),
            hyperedges: self
                .hyperedges
                .iter()
                .map(|e| e.iter().map(|&v| self.vertices[v].clone()).collect())
                .collect(),
        }
    }

    /// Adjacency of the orthogonality graph as plain boolean rows.
    pub(crate) fn exclusivity(&self) -> Vec<Vec<bool>> {
        let n = self.num_vertices();
        let mut adj = vec![vec![false; n]; n];
        for e in &self.hyperedges {
            for (i, &a) in e.iter().enumerate() {
                for &b in &e[i + 1..] {
                    adj[a][b] = true;
                    adj[b][a] = true;
                }
            }
        }
        adj
    }
}

pub fn validate_scenario(raw: &RawScenario) -> Result<ContextualityScenario, ScenarioError> {
    let mut vertices = raw.vertices.clone();
    vertices.sort();
    for w in vertices.windows(2) {
        if w[0] == w[1] {
            return Err(ScenarioError::DuplicateVertex { vertex: w[0].clone() });
        }
    }
    let index: BTreeMap<String, usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();

    let mut hyperedges = Vec::with_capacity(raw.hyperedges.len());
    let mut covered = vec![false; vertices.len()];
    for (ei, edge) in raw.hyperedges.iter().enumerate() {
        if edge.is_empty() {
            return Err(ScenarioError::EmptyHyperedge { edge: ei });
        }
        let mut members = Vec::with_capacity(edge.len());
        for name in edge {
            let &v = index.get(name).ok_or_else(|| ScenarioError::UnknownVertex {
                edge: ei,
                vertex: name.clone(),
            })?;
            if members.contains(&v) {
                return Err(ScenarioError::DuplicateInHyperedge {
                    edge: ei,
                    vertex: name.clone(),
                });
            }
            covered[v] = true;
            members.push(v);
        }
        hyperedges.push(members);
    }
    if let Some(v) = covered.iter().position(|c| !c) {
        return Err(ScenarioError::OrphanVertex { vertex: vertices[v].clone() });
    }
    Ok(ContextualityScenario { vertices, index, hyperedges })
}

/// Simple undirected graph with nonnegative vertex weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
    weights: Vec<f64>,
    #[serde(skip)]
    adjacency: Vec<Vec<bool>>,
}

impl WeightedGraph {
    pub fn new(
        vertices: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        weights: Vec<f64>,
    ) -> Result<Self, ScenarioError> {
        let n = vertices.len();
        if weights.len() != n {
            return Err(ScenarioError::WeightCount { expected: n, actual: weights.len() });
        }
        if let Some(v) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(ScenarioError::BadWeight { vertex: v });
        }
        let mut set = BTreeSet::new();
        let mut adjacency = vec![vec![false; n]; n];
        for (a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(ScenarioError::BadEdge { a, b });
            }
            let key = (a.min(b), a.max(b));
            set.insert(key);
            adjacency[a][b] = true;
            adjacency[b][a] = true;
        }
        Ok(WeightedGraph { vertices, edges: set, weights, adjacency })
    }

    /// Unweighted (all weights 1) graph on vertices `0..n` named by index.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, ScenarioError> {
        let names = (0..n).map(|i| i.to_string()).collect();
        Self::new(names, edges.iter().copied(), vec![1.0; n])
    }

    /// Cycle graph C_n with unit weights.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::unweighted(n, &edges).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::unweighted(n, &edges).expect("complete graph edges are valid")
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self, ScenarioError> {
        Self::new(self.vertices.clone(), self.edges.iter().copied(), weights)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    /// Neighbourhood bitmasks; only valid for graphs with at most 64 vertices.
    pub(crate) fn neighbour_masks(&self) -> Vec<u64> {
        debug_assert!(self.num_vertices() <= 64);
        self.adjacency
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .fold(0u64, |m, (j, _)| m | (1u64 << j))
            })
            .collect()
    }

    /// All maximal cliques (Bron–Kerbosch with pivoting), each sorted,
    /// returned in lexicographic order.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut out = Vec::new();
        let mut r = Vec::new();
        let p: Vec<usize> = (0..n).collect();
        self.bron_kerbosch(&mut r, p, Vec::new(), &mut out);
        for c in out.iter_mut() {
            c.sort_unstable();
        }
        out.sort();
        out
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        p: Vec<usize>,
        x: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&v| self.adjacency[u][v]).count())
            .expect("p or x is nonempty");
        let candidates: Vec<usize> =
            p.iter().copied().filter(|&v| !self.adjacency[pivot][v]).collect();
        let mut p = p;
        let mut x = x;
        for v in candidates {
            let np = p.iter().copied().filter(|&u| self.adjacency[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| self.adjacency[v][u]).collect();
            r.push(v);
            self.bron_kerbosch(r, np, nx, out);
            r.pop();
            p.retain(|&u| u != v);
            x.push(v);
        }
    }
}

/// Orthogonality (exclusivity) graph O(H): vertices of `h`, with an edge
/// between every pair sharing a hyperedge. `weights` defaults to all ones.
pub fn orthogonality_graph(
    h: &ContextualityScenario,
    weights: Option<&[f64]>,
) -> Result<WeightedGraph, ScenarioError> {
    let n = h.num_vertices();
    let weights = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; n],
    };
    let adj = h.exclusivity();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if adj[a][b] {
                edges.push((a, b));
            }
        }
    }
    WeightedGraph::new(h.vertices().to_vec(), edges, weights)
}

/// A {0,1} assignment with exactly one 1 in each hyperedge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KsColoring {
    pub assignment: Vec<u8>,
}

impl KsColoring {
    pub fn ones<'a>(&'a self, h: &'a ContextualityScenario) -> impl Iterator<Item = &'a str> + 'a {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(move |(i, _)| h.vertices()[i].as_str())
    }

    pub fn is_valid_for(&self, h: &ContextualityScenario) -> bool {
        self.assignment.len() == h.num_vertices()
            && self.assignment.iter().all(|&b| b <= 1)
            && h.hyperedges()
                .iter()
                .all(|e| e.iter().filter(|&&v| self.assignment[v] == 1).count() == 1)
    }
}

/// Enumerates KS-colourings by exact-cover style depth-first search.
///
/// At most `limit` colourings are collected (`None` for all); the result is
/// sorted. An empty result certifies that no KS-colouring exists.
pub fn enumerate_ks_colorings(
    h: &ContextualityScenario,
    limit: Option<usize>,
) -> Result<Vec<KsColoring>, ScenarioError> {
    let n = h.num_vertices();
    if n > MAX_COLORING_VERTICES {
        return Err(ScenarioError::TooLarge { actual: n, limit: MAX_COLORING_VERTICES });
    }
    let adj = h.exclusivity();
    let mut search = ColoringSearch {
        edges: h.hyperedges(),
        adj: &adj,
        state: vec![Cell::Free; n],
        covered: vec![false; h.num_hyperedges()],
        limit: limit.unwrap_or(usize::MAX),
        found: Vec::new(),
    };
    if search.limit > 0 {
        search.run();
    }
    let mut found = search.found;
    found.sort();
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Free,
    Zero,
    One,
}

struct ColoringSearch<'a> {
    edges: &'a [Vec<usize>],
    adj: &'a [Vec<bool>],
    state: Vec<Cell>,
    covered: Vec<bool>,
    limit: usize,
    found: Vec<KsColoring>,
}

impl ColoringSearch<'_> {
    fn run(&mut self) {
        // most constrained uncovered edge
        let mut best: Option<(usize, usize)> = None;
        for (ei, e) in self.edges.iter().enumerate() {
            if self.covered[ei] {
                continue;
            }
            let free = e.iter().filter(|&&v| self.state[v] == Cell::Free).count();
            if free == 0 {
                return;
            }
            if best.is_none_or(|(_, f)| free < f) {
                best = Some((ei, free));
            }
        }
        let Some((ei, _)) = best else {
            let assignment = self
                .state
                .iter()
                .map(|c| u8::from(*c == Cell::One))
                .collect();
            self.found.push(KsColoring { assignment });
            return;
        };

        let candidates: Vec<usize> = self.edges[ei]
            .iter()
            .copied()
            .filter(|&v| self.state[v] == Cell::Free)
            .collect();
        let mut excluded = Vec::new();
        for v in candidates {
            let saved_state = self.state.clone();
            let saved_cov = self.covered.clone();
            self.state[v] = Cell::One;
            for (u, row) in self.adj[v].iter().enumerate() {
                if *row {
                    self.state[u] = Cell::Zero;
                }
            }
            for (ej, e) in self.edges.iter().enumerate() {
                if e.contains(&v) {
                    self.covered[ej] = true;
                }
            }
            self.run();
            self.state = saved_state;
            self.covered = saved_cov;
            if self.found.len() >= self.limit {
                return;
            }
            // later branches exclude v as this edge's 1
            self.state[v] = Cell::Zero;
            excluded.push(v);
        }
        for v in excluded {
            self.state[v] = Cell::Free;
        }
    }
}

/// Joint measurability structure as it appears on disk:
/// `{"vertices": [...], "compatible": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawJms {
    pub vertices: Vec<String>,
    pub compatible: Vec<Vec<String>>,
}

/// Downward-closed family of compatible measurement subsets, stored as
/// bitmasks over the (sorted) vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointMeasurabilityStructure {
    vertices: Vec<String>,
    compatible: BTreeSet<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JmsValidation {
    pub structure: JointMeasurabilityStructure,
    /// Number of sets the downward closure added to the listed ones.
    pub closure_added: usize,
}

pub fn validate_jms(raw: &RawJms) -> Result<JmsValidation, ScenarioError> {
    let mut vertices = raw.vertices.clone();
    vertices.sort();
    for w in vertices.windows(2) {
        if w[0] == w[1] {
            return Err(ScenarioError::DuplicateVertex { vertex: w[0].clone() });
        }
    }
    if vertices.len() > 64 {
        return Err(ScenarioError::TooLarge { actual: vertices.len(), limit: 64 });
    }
    let index: BTreeMap<&str, usize> =
        vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();

    let mut listed = BTreeSet::new();
    for (ei, set) in raw.compatible.iter().enumerate() {
        let mut mask = 0u64;
        for name in set {
            let &v = index.get(name.as_str()).ok_or_else(|| ScenarioError::UnknownVertex {
                edge: ei,
                vertex: name.clone(),
            })?;
            mask |= 1 << v;
        }
        if mask != 0 {
            listed.insert(mask);
        }
    }

    let mut compatible: BTreeSet<u64> = (0..vertices.len()).map(|v| 1u64 << v).collect();
    for &mask in &listed {
        if mask.count_ones() as usize > MAX_CLOSURE_SET {
            return Err(ScenarioError::TooLarge {
                actual: mask.count_ones() as usize,
                limit: MAX_CLOSURE_SET,
            });
        }
        // every nonempty submask
        let mut sub = mask;
        while sub != 0 {
            compatible.insert(sub);
            sub = (sub - 1) & mask;
        }
    }
    let closure_added = compatible.difference(&listed).count();
    Ok(JmsValidation {
        structure: JointMeasurabilityStructure { vertices, compatible },
        closure_added,
    })
}

impl JointMeasurabilityStructure {
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn is_compatible_mask(&self, mask: u64) -> bool {
        mask == 0 || self.compatible.contains(&mask)
    }

    pub fn is_compatible(&self, names: &[&str]) -> bool {
        let mut mask = 0u64;
        for n in names {
            match self.vertices.iter().position(|v| v == n) {
                Some(i) => mask |= 1 << i,
                None => return false,
            }
        }
        self.is_compatible_mask(mask)
    }

    pub fn compatible_masks(&self) -> &BTreeSet<u64> {
        &self.compatible
    }

    /// Compatible sets as sorted name lists, ordered by size then bitmask.
    pub fn compatible_sets(&self) -> Vec<Vec<String>> {
        let mut masks: Vec<u64> = self.compatible.iter().copied().collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks.into_iter().map(|m| self.names(m)).collect()
    }

    pub fn names(&self, mask: u64) -> Vec<String> {
        (0..self.vertices.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.vertices[i].clone())
            .collect()
    }

    pub fn full_mask(&self) -> u64 {
        if self.vertices.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.vertices.len()) - 1
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.is_compatible_mask(self.full_mask())
    }

    pub fn to_raw(&self) -> RawJms {
        RawJms { vertices: self.vertices.clone(), compatible: self.compatible_sets() }
    }

    /// Builds a structure from a compatibility predicate evaluated on every
    /// subset (used to certify constructed measurement families).
    pub fn from_predicate(
        vertices: Vec<String>,
        mut compatible: impl FnMut(u64) -> bool,
    ) -> Result<Self, ScenarioError> {
        let n = vertices.len();
        if n > MAX_JMS_SCAN_VERTICES {
            return Err(ScenarioError::TooLarge { actual: n, limit: MAX_JMS_SCAN_VERTICES });
        }
        let set = (1u64..(1u64 << n)).filter(|&m| compatible(m)).collect();
        Ok(JointMeasurabilityStructure { vertices, compatible: set })
    }
}

/// Inclusion-minimal incompatible subsets, ordered by size then bitmask.
/// Each one is an N-Specker scenario on its own vertices.
pub fn specker_decomposition(
    j: &JointMeasurabilityStructure,
) -> Result<Vec<Vec<String>>, ScenarioError> {
    let n = j.vertices.len();
    if n > MAX_JMS_SCAN_VERTICES {
        return Err(ScenarioError::TooLarge { actual: n, limit: MAX_JMS_SCAN_VERTICES });
    }
    let mut minimal: Vec<u64> = Vec::new();
    for mask in 1u64..(1u64 << n) {
        if j.is_compatible_mask(mask) {
            continue;
        }
        // downward closure makes the (|S|-1)-subsets sufficient
        let all_faces_ok = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .all(|i| j.is_compatible_mask(mask & !(1 << i)));
        if all_faces_ok {
            minimal.push(mask);
        }
    }
    if minimal.is_empty() {
        return Err(ScenarioError::TrivialStructure);
    }
    minimal.sort_by_key(|m| (m.count_ones(), *m));
    Ok(minimal.into_iter().map(|m| j.names(m)).collect())
}

/// Raw description of the 18-vertex scenario of Cabello, Estebaranz and
/// García-Alcaine (vertices `v1`..`v18`, nine hyperedges of size four).
pub fn gamma18() -> RawScenario {
    const EDGES: [[usize; 4]; 9] = [
        [1, 2, 3, 4],
        [4, 5, 6, 7],
        [7, 8, 9, 10],
        [10, 11, 12, 13],
        [13, 14, 15, 16],
        [16, 17, 18, 1],
        [18, 2, 9, 11],
        [3, 5, 12, 14],
        [6, 8, 15, 17],
    ];
    RawScenario {
        vertices: (1..=18).map(|i| format!("v{i}")).collect(),
        hyperedges: EDGES
            .iter()
            .map(|e| e.iter().map(|i| format!("v{i}")).collect())
            .collect(),
    }
}

/// Raw description of the KCBS scenario: hyperedges {v_i, u_i, v_{i+1}}.
pub fn gamma5() -> RawScenario {
    let mut vertices = Vec::new();
    for i in 1..=5 {
        vertices.push(format!("v{i}"));
        vertices.push(format!("u{i}"));
    }
    let hyperedges = (1..=5)
        .map(|i| vec![format!("v{i}"), format!("u{i}"), format!("v{}", i % 5 + 1)])
        .collect();
    RawScenario { vertices, hyperedges }
}
