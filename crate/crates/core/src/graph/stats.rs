use rayon::prelude::*;
use serde::Serialize;

use super::{Graph, GraphError};
use crate::linalg::{self, Matrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpanderStats {
    pub vertices: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    /// Second-smallest eigenvalue of `I - D^{-1/2} A D^{-1/2}`.
    pub lambda1: f64,
    /// Largest eigenvalue; equal to 2 exactly for bipartite graphs.
    pub lambda_max: f64,
    /// `None` for forests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub girth: Option<usize>,
    pub diameter: usize,
}

impl Graph {
    /// `I - D^{-1/2} A D^{-1/2}` with multi-edges counted by multiplicity.
    pub fn normalized_laplacian(&self) -> Matrix {
        let n = self.vertex_count();
        let inv_sqrt: Vec<f64> = (0..n)
            .map(|u| match self.degree(u) {
                0 => 0.0,
                d => 1.0 / (d as f64).sqrt(),
            })
            .collect();
        let mut l = Matrix::identity(n, n);
        for &(u, v) in self.edges() {
            let w = inv_sqrt[u] * inv_sqrt[v];
            l[(u, v)] -= w;
            l[(v, u)] -= w;
        }
        l
    }

    /// Shortest cycle length; parallel edges form 2-cycles.
    pub fn girth(&self) -> Option<usize> {
        (0..self.vertex_count())
            .into_par_iter()
            .filter_map(|root| self.shortest_cycle_through_tree(root))
            .min()
    }

    fn shortest_cycle_through_tree(&self, root: usize) -> Option<usize> {
        let (dist, parent) = self.bfs_tree(root);
        let mut best: Option<usize> = None;
        for (id, &(u, v)) in self.edges().iter().enumerate() {
            if dist[u] == usize::MAX || parent[u] == Some(id) || parent[v] == Some(id) {
                continue;
            }
            let len = dist[u] + dist[v] + 1;
            best = Some(best.map_or(len, |b| b.min(len)));
        }
        best
    }

    pub fn diameter(&self) -> Result<usize, GraphError> {
        let eccentricities: Vec<usize> = (0..self.vertex_count())
            .into_par_iter()
            .map(|u| self.bfs(u).into_iter().max().unwrap_or(0))
            .collect();
        let d = eccentricities.into_iter().max().unwrap_or(0);
        if d == usize::MAX {
            Err(GraphError::Disconnected)
        } else {
            Ok(d)
        }
    }
}

pub fn stats(g: &Graph) -> Result<ExpanderStats, GraphError> {
    if g.vertex_count() < 2 {
        return Err(GraphError::InvalidParameter(
            "expander statistics need at least two vertices".into(),
        ));
    }
    let diameter = g.diameter()?;
    let ev = linalg::symmetric_eigenvalues(&g.normalized_laplacian());
    let degrees = (0..g.vertex_count()).map(|u| g.degree(u));
    Ok(ExpanderStats {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        min_degree: degrees.clone().min().unwrap_or(0),
        max_degree: degrees.max().unwrap_or(0),
        lambda1: ev[1],
        lambda_max: ev[ev.len() - 1],
        girth: g.girth(),
        diameter,
    })
}
