//! Finite undirected graphs: random regular generation, expander
//! statistics, simple random walks and the walk energies of vertex maps.

mod energy;
mod generate;
mod stats;

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

pub use energy::{
    check_energy_inequality, graph_energy, graph_walk, EnergyInequalityReport, WalkTable,
    ENERGY_SLACK,
};
pub use generate::{random_regular, random_regular_with_girth, DEFAULT_ATTEMPTS, DEFAULT_SWITCHES};
pub use stats::{stats, ExpanderStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no admissible graph after {0} attempts")]
    RejectionCap(usize),
    #[error("girth {target} not reached after {switches} switches (best {best})")]
    GirthUnreachable {
        target: usize,
        best: usize,
        switches: usize,
    },
}

/// Undirected multigraph without self-loops. Edge `i` joins `edges[i].0`
/// and `edges[i].1`; `adj[u]` lists `(neighbour, edge id)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, count: n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        Ok(Graph { n, edges, adj })
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).expect("n >= 3")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(n, edges).expect("simple")
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        Graph::new(10, edges).expect("simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// `(neighbour, edge id)` pairs at `u`, one per incident edge.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adj[u]
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges
            .iter()
            .all(|&(u, v)| seen.insert((u.min(v), u.max(v))))
    }

    pub fn is_regular(&self, k: usize) -> bool {
        (0..self.n).all(|u| self.degree(u) == k)
    }

    /// `ν(u) = deg(u) / 2#E`.
    pub fn stationary(&self) -> Vec<f64> {
        let total = 2.0 * self.edges.len() as f64;
        (0..self.n).map(|u| self.degree(u) as f64 / total).collect()
    }

    /// Breadth-first distances from `root`; `usize::MAX` marks unreachable.
    pub fn bfs(&self, root: usize) -> Vec<usize> {
        self.bfs_tree(root).0
    }

    /// Distances and the edge used to reach each vertex (`None` at the root
    /// and at unreachable vertices). Neighbours are scanned in adjacency
    /// order, so the tree is deterministic.
    pub fn bfs_tree(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut dist = vec![usize::MAX; self.n];
        let mut parent = vec![None; self.n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &self.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = Some(e);
                    queue.push_back(y);
                }
            }
        }
        (dist, parent)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// Reads `u v` pairs, one per line, 0-indexed. `#` starts a comment; a
    /// `# vertices N` line fixes the vertex count, otherwise it is one more
    /// than the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("vertices") {
                    let n = parts.next().and_then(|s| s.parse().ok()).ok_or(GraphError::Parse {
                        line,
                        message: "expected `# vertices N`".into(),
                    })?;
                    declared = Some(n);
                }
                continue;
            }
            let content = trimmed.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected two vertex indices, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| GraphError::Parse {
                    line,
                    message: format!("`{s}` is not a vertex index"),
                })
            };
            edges.push((parse(fields[0])?, parse(fields[1])?));
        }
        let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        Graph::new(declared.unwrap_or(inferred), edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# vertices {}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors() {
        let p = Graph::petersen();
        assert_eq!(p.edge_count(), 15);
        assert!(p.is_regular(3) && p.is_simple() && p.is_connected());
        assert!(Graph::complete(4).is_regular(3));
        assert!(Graph::cycle(5).is_regular(2));
    }

    #[test]
    fn rejects_loops_and_range() {
        assert_eq!(Graph::new(2, vec![(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert!(matches!(
            Graph::new(2, vec![(0, 2)]),
            Err(GraphError::VertexOutOfRange { vertex: 2, .. })
        ));
        let multi = Graph::new(2, vec![(0, 1), (1, 0)]).unwrap();
        assert!(!multi.is_simple());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::petersen();
        let back = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(back, g);
        let g = Graph::parse_edge_list("# a comment\n0 1\n\n1 2 # trailing\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        let g = Graph::parse_edge_list("# vertices 5\n0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert!(!g.is_connected());
        let err = Graph::parse_edge_list("0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
        assert!(Graph::parse_edge_list("0 1 2\n").is_err());
    }
}
