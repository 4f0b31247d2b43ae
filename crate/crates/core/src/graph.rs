//! MaxCut instances: unweighted simple graphs, cut arithmetic, a brute-force
//! optimum and a seeded random regular graph generator.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::mix_seed;

/// Largest node count accepted by [`max_cut_bruteforce`].
pub const BRUTE_FORCE_CAP: usize = 24;

const MAX_PAIRING_ATTEMPTS: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("assignment has {got} bits but the graph has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("brute force limited to {cap} nodes, graph has {nodes}")]
    CapExceeded { nodes: usize, cap: usize },
    #[error("optimal cut must be positive")]
    ZeroOptimum,
    #[error("cut {cut} outside 0..={optimal}")]
    CutOutOfRange { cut: usize, optimal: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no simple {degree}-regular graph on {nodes} nodes found after {attempts} pairings")]
    GenerationFailed {
        nodes: usize,
        degree: usize,
        attempts: u64,
    },
}

/// Undirected, unweighted simple graph.
///
/// Edges are stored normalized as `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        Graph::new(raw.num_nodes, raw.edges)
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            num_nodes: g.num_nodes,
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if num_nodes == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(GraphError::NodeOutOfRange(a, b, num_nodes));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            num_nodes,
            edges,
            adjacency,
        })
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::new(n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::Parameter(format!("cycle needs n >= 3, got {n}")));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        Graph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Complete bipartite graph with left side `0..a` and right side `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self, GraphError> {
        let edges = (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j)));
        Graph::new(a + b, edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_nodes && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Two-colorability check by BFS.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.num_nodes];
        for start in 0..self.num_nodes {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adjacency[v] {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        queue.push_back(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Edge-list text: header `n m`, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.num_nodes, self.edges.len());
        for (i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    /// Parses the edge-list text format. Blank lines are ignored; errors carry
    /// 1-based line numbers.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing `n m` header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, body) in lines {
            let (i, j) = parse_pair(line, body)?;
            if i >= n || j >= n {
                return Err(GraphError::Parse {
                    line,
                    message: format!("node index out of range for {n} nodes"),
                });
            }
            edges.push((line, (i, j)));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: hline,
                message: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        let mut seen = BTreeSet::new();
        for &(line, (i, j)) in &edges {
            if i == j {
                return Err(GraphError::Parse {
                    line,
                    message: format!("self-loop on node {i}"),
                });
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(GraphError::Parse {
                    line,
                    message: format!("duplicate edge {i} {j}"),
                });
            }
        }
        Graph::new(n, edges.into_iter().map(|(_, e)| e))
    }
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize), GraphError> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(GraphError::Parse {
            line,
            message: format!("expected two integers, got `{body}`"),
        });
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| GraphError::Parse {
            line,
            message: format!("`{s}` is not a non-negative integer"),
        })
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

/// A configuration `m ∈ {0,1}^|V|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitAssignment(Vec<u8>);

impl BitAssignment {
    pub fn new(bits: Vec<u8>) -> Result<Self, GraphError> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(GraphError::Parameter(format!("bit value {b} is not 0 or 1")));
        }
        Ok(BitAssignment(bits))
    }

    pub fn zeros(n: usize) -> Self {
        BitAssignment(vec![0; n])
    }

    /// Bit `i` of the result is bit `i` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        BitAssignment((0..n).map(|i| ((mask >> i) & 1) as u8).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn complement(&self) -> Self {
        BitAssignment(self.0.iter().map(|b| 1 - b).collect())
    }

    pub fn parse(s: &str) -> Result<Self, GraphError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(GraphError::Parameter(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitAssignment)
    }
}

impl fmt::Display for BitAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for BitAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitAssignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitAssignment::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    pub cut: usize,
    pub ratio: f64,
}

impl CutResult {
    pub fn new(cut: usize, optimal: usize) -> Result<Self, GraphError> {
        Ok(CutResult {
            cut,
            ratio: approximation_ratio(cut, optimal)?,
        })
    }
}

/// Number of edges whose endpoints carry different bits.
pub fn cut_value(g: &Graph, m: &BitAssignment) -> Result<usize, GraphError> {
    if m.len() != g.num_nodes() {
        return Err(GraphError::LengthMismatch {
            expected: g.num_nodes(),
            got: m.len(),
        });
    }
    let bits = m.bits();
    Ok(g.edges().iter().filter(|&&(i, j)| bits[i] != bits[j]).count())
}

fn cut_of_mask(edges: &[(usize, usize)], mask: u64) -> usize {
    edges
        .iter()
        .map(|&(i, j)| (((mask >> i) ^ (mask >> j)) & 1) as usize)
        .sum()
}

pub fn max_cut_bruteforce(g: &Graph) -> Result<(BitAssignment, usize), GraphError> {
    max_cut_bruteforce_with_cap(g, BRUTE_FORCE_CAP)
}

/// Exhaustive MaxCut with bit 0 pinned to 0. Among maximizers the
/// lexicographically smallest bit vector is returned.
pub fn max_cut_bruteforce_with_cap(
    g: &Graph,
    cap: usize,
) -> Result<(BitAssignment, usize), GraphError> {
    let n = g.num_nodes();
    if n > cap || n > 63 {
        return Err(GraphError::CapExceeded { nodes: n, cap });
    }
    let free = n - 1;
    let mut best_mask = 0u64;
    let mut best = 0usize;
    // k enumerates m_1..m_{n-1} with m_1 as the most significant bit, so the
    // first strict improvement found is the lexicographically smallest.
    for k in 0..(1u64 << free) {
        let mut mask = 0u64;
        for i in 1..n {
            mask |= ((k >> (free - i)) & 1) << i;
        }
        let c = cut_of_mask(g.edges(), mask);
        if c > best {
            best = c;
            best_mask = mask;
        }
    }
    Ok((BitAssignment::from_mask(best_mask, n), best))
}

pub fn approximation_ratio(cut: usize, optimal: usize) -> Result<f64, GraphError> {
    if optimal == 0 {
        return Err(GraphError::ZeroOptimum);
    }
    if cut > optimal {
        return Err(GraphError::CutOutOfRange { cut, optimal });
    }
    Ok(cut as f64 / optimal as f64)
}

/// Uniform-ish random `d`-regular simple graph via the pairing model.
///
/// Stubs are shuffled and paired; pairings with a self-loop or a repeated
/// edge are rejected and redrawn from a seed derived from `(seed, attempt)`.
pub fn generate_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if n * d % 2 != 0 {
        return Err(GraphError::Parameter(format!(
            "n*d must be even, got n={n}, d={d}"
        )));
    }
    if n <= d {
        return Err(GraphError::Parameter(format!("need n > d, got n={n}, d={d}")));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    'attempts: for attempt in 0..MAX_PAIRING_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, attempt]));
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue 'attempts;
            }
        }
        return Graph::new(n, seen);
    }
    Err(GraphError::GenerationFailed {
        nodes: n,
        degree: d,
        attempts: MAX_PAIRING_ATTEMPTS,
    })
}
