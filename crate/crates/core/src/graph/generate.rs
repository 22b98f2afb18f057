use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, GraphError};
use crate::rng::{derive_seed, seeded_rng};

/// Pairings tried before [`random_regular`] gives up.
pub const DEFAULT_ATTEMPTS: usize = 100_000;
/// Edge switches tried before [`random_regular_with_girth`] gives up.
pub const DEFAULT_SWITCHES: usize = 200_000;

/// Uniform simple connected `k`-regular graph on `v` vertices, by the
/// pairing model: match the `v k` half-edges uniformly at random and reject
/// matchings with loops, parallel edges, or more than one component.
pub fn random_regular(v: usize, k: usize, seed: u64) -> Result<Graph, GraphError> {
    if k < 3 {
        return Err(GraphError::InvalidParameter(format!("degree must be at least 3, got {k}")));
    }
    if (v * k) % 2 != 0 {
        return Err(GraphError::InvalidParameter(format!(
            "V*k must be even, got V={v}, k={k}"
        )));
    }
    if k >= v {
        return Err(GraphError::InvalidParameter(format!(
            "a simple {k}-regular graph needs more than {k} vertices, got {v}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut points: Vec<usize> = (0..v * k).map(|p| p / k).collect();
    'attempt: for _ in 0..DEFAULT_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(v * k / 2);
        let mut edges = Vec::with_capacity(v * k / 2);
        for pair in points.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            edges.push((a, b));
        }
        edges.sort_unstable();
        let g = Graph::new(v, edges).expect("indices in range, no loops");
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::RejectionCap(DEFAULT_ATTEMPTS))
}

/// Length of the shortest cycle through edge `id`, looking no further than
/// `limit`; `None` when every such cycle is longer.
fn cycle_through_edge(g: &Graph, id: usize, limit: usize) -> Option<usize> {
    let (u, v) = g.edge(id);
    let mut dist = vec![usize::MAX; g.vertex_count()];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        if dist[x] + 2 > limit {
            break;
        }
        for &(y, e) in g.neighbors(x) {
            if e == id || dist[y] != usize::MAX {
                continue;
            }
            dist[y] = dist[x] + 1;
            if y == v {
                return Some(dist[y] + 1);
            }
            queue.push_back(y);
        }
    }
    None
}

/// Sum over edges of how far their shortest cycle falls below `girth`.
fn deficit(g: &Graph, girth: usize) -> (usize, Vec<usize>) {
    let mut total = 0;
    let mut short = Vec::new();
    for id in 0..g.edge_count() {
        if let Some(c) = cycle_through_edge(g, id, girth - 1) {
            total += girth - c;
            short.push(id);
        }
    }
    (total, short)
}

/// A connected simple `k`-regular graph with girth at least `girth`.
///
/// Starts from [`random_regular`] and applies double-edge switches
/// `{a,b},{c,d} -> {a,c},{b,d}` that pick one edge on a short cycle, keep
/// the graph simple and connected, and do not increase the total cycle
/// deficit. The result is deterministic under `seed` but not uniform.
pub fn random_regular_with_girth(
    v: usize,
    k: usize,
    girth: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    if girth < 3 {
        return Err(GraphError::InvalidParameter(format!("girth must be at least 3, got {girth}")));
    }
    let mut g = random_regular(v, k, seed)?;
    let mut rng = seeded_rng(derive_seed(seed, 1));
    let (mut score, mut short) = deficit(&g, girth);
    let mut switches = 0;
    while score > 0 {
        if switches == DEFAULT_SWITCHES {
            return Err(GraphError::GirthUnreachable {
                target: girth,
                best: g.girth().unwrap_or(usize::MAX),
                switches,
            });
        }
        switches += 1;
        let e1 = short[rng.gen_range(0..short.len())];
        let e2 = rng.gen_range(0..g.edge_count());
        if e1 == e2 {
            continue;
        }
        let (a, b) = g.edge(e1);
        let (mut c, mut d) = g.edge(e2);
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        if a == c || b == d {
            continue;
        }
        let present = |x: usize, y: usize| g.neighbors(x).iter().any(|&(z, _)| z == y);
        if present(a, c) || present(b, d) {
            continue;
        }
        let mut edges = g.edges().to_vec();
        edges[e1] = (a.min(c), a.max(c));
        edges[e2] = (b.min(d), b.max(d));
        let candidate = Graph::new(v, edges).expect("switch keeps indices valid");
        if !candidate.is_connected() {
            continue;
        }
        let (new_score, new_short) = deficit(&candidate, girth);
        // Sideways moves are allowed sometimes, to leave plateaus.
        if new_score < score || (new_score == score && rng.gen_bool(0.2)) {
            g = candidate;
            score = new_score;
            short = new_short;
        }
    }
    let mut edges = g.edges().to_vec();
    edges.sort_unstable();
    Graph::new(v, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_vertices_three_regular_is_k4() {
        let g = random_regular(4, 3, 7).unwrap();
        assert_eq!(g, Graph::complete(4));
    }

    #[test]
    fn parity_and_degree_checked() {
        assert!(matches!(random_regular(5, 3, 0), Err(GraphError::InvalidParameter(_))));
        assert!(random_regular(10, 2, 0).is_err());
        assert!(random_regular(3, 3, 0).is_err());
    }

    #[test]
    fn generated_graphs_are_simple_regular_connected() {
        for seed in 0..5 {
            let g = random_regular(10, 3, seed).unwrap();
            assert!(g.is_simple() && g.is_regular(3) && g.is_connected());
            assert!(g.girth().unwrap() >= 3);
        }
        assert_eq!(random_regular(30, 4, 11).unwrap(), random_regular(30, 4, 11).unwrap());
    }

    #[test]
    fn cycle_through_edge_oracle() {
        let g = Graph::petersen();
        for id in 0..g.edge_count() {
            assert_eq!(cycle_through_edge(&g, id, 10), Some(5));
            assert_eq!(cycle_through_edge(&g, id, 4), None);
        }
    }

    #[test]
    fn girth_raising_reaches_target() {
        let g = random_regular_with_girth(50, 4, 6, 3).unwrap();
        assert!(g.is_simple() && g.is_regular(4) && g.is_connected());
        assert!(g.girth().unwrap() >= 6);
    }
}
