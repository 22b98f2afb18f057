use serde::Serialize;

use super::{Graph, GraphError};
use crate::linalg::{Matrix, Vector};

/// Relative slack on `E_{mu^n} <= (2/λ₁) E_mu`, scaled by `max(1, rhs)`.
pub const ENERGY_SLACK: f64 = 1e-10;

/// One step of the simple random walk: `p'(w) = sum_v p(v) #edges(v,w) / deg(v)`.
fn walk_step(g: &Graph, p: &[f64]) -> Vec<f64> {
    let mut next = vec![0.0; p.len()];
    for (v, &mass) in p.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let share = mass / g.degree(v) as f64;
        for &(w, _) in g.neighbors(v) {
            next[w] += share;
        }
    }
    next
}

/// `mu_G^n(u -> .)`.
pub fn graph_walk(g: &Graph, u: usize, n: usize) -> Result<Vec<f64>, GraphError> {
    if u >= g.vertex_count() {
        return Err(GraphError::VertexOutOfRange {
            vertex: u,
            count: g.vertex_count(),
        });
    }
    if (0..g.vertex_count()).any(|v| g.degree(v) == 0) {
        return Err(GraphError::InvalidParameter("isolated vertex".into()));
    }
    let mut p = vec![0.0; g.vertex_count()];
    p[u] = 1.0;
    for _ in 0..n {
        p = walk_step(g, &p);
    }
    Ok(p)
}

/// All walk distributions `mu_G^t(u -> v)` for `t <= n_max`, so that many
/// maps can be evaluated on the same graph.
#[derive(Clone, Debug)]
pub struct WalkTable {
    nu: Vec<f64>,
    /// `powers[t][(u, v)] = mu^t(u -> v)`.
    powers: Vec<Matrix>,
}

impl WalkTable {
    pub fn new(g: &Graph, n_max: usize) -> Result<Self, GraphError> {
        let n = g.vertex_count();
        if (0..n).any(|v| g.degree(v) == 0) {
            return Err(GraphError::InvalidParameter("isolated vertex".into()));
        }
        let mut powers = vec![Matrix::zeros(n, n); n_max + 1];
        for u in 0..n {
            let mut p = vec![0.0; n];
            p[u] = 1.0;
            for (t, power) in powers.iter_mut().enumerate() {
                if t > 0 {
                    p = walk_step(g, &p);
                }
                power.row_mut(u).iter_mut().zip(&p).for_each(|(dst, &src)| *dst = src);
            }
        }
        Ok(WalkTable {
            nu: g.stationary(),
            powers,
        })
    }

    pub fn n_max(&self) -> usize {
        self.powers.len() - 1
    }

    pub fn row(&self, t: usize, u: usize) -> Vec<f64> {
        self.powers[t].row(u).iter().copied().collect()
    }

    /// `E_{mu^t}(phi)` for every `t <= n_max`.
    pub fn energies(&self, phi: &[Vector]) -> Result<Vec<f64>, GraphError> {
        let n = self.nu.len();
        check_map(phi, n)?;
        let mut sq = Matrix::zeros(n, n);
        for u in 0..n {
            for v in u + 1..n {
                let d = (&phi[u] - &phi[v]).norm_squared();
                sq[(u, v)] = d;
                sq[(v, u)] = d;
            }
        }
        Ok(self
            .powers
            .iter()
            .map(|pt| {
                let mut total = 0.0;
                for u in 0..n {
                    let row: f64 = pt.row(u).iter().zip(sq.row(u).iter()).map(|(a, b)| a * b).sum();
                    total += self.nu[u] * row;
                }
                0.5 * total
            })
            .collect())
    }
}

fn check_map(phi: &[Vector], n: usize) -> Result<(), GraphError> {
    if phi.len() != n {
        return Err(GraphError::InvalidParameter(format!(
            "map has {} values for {n} vertices",
            phi.len()
        )));
    }
    if let Some(first) = phi.first() {
        if phi.iter().any(|p| p.len() != first.len()) {
            return Err(GraphError::InvalidParameter("map values differ in dimension".into()));
        }
        if phi.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(GraphError::InvalidParameter("map has non-finite entries".into()));
        }
    }
    Ok(())
}

/// `E_{mu^n}(phi) = 1/2 sum_u ν(u) sum_v ||phi(u) - phi(v)||^2 mu^n(u -> v)`.
pub fn graph_energy(g: &Graph, phi: &[Vector], n: usize) -> Result<f64, GraphError> {
    check_map(phi, g.vertex_count())?;
    let nu = g.stationary();
    let mut total = 0.0;
    for u in 0..g.vertex_count() {
        let p = graph_walk(g, u, n)?;
        let inner: f64 = p
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(v, &m)| m * (&phi[u] - &phi[v]).norm_squared())
            .sum();
        total += nu[u] * inner;
    }
    Ok(0.5 * total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyInequalityReport {
    pub n: usize,
    pub lambda1: f64,
    /// `E_{mu^n}(phi)`.
    pub lhs: f64,
    /// `(2/λ₁) E_mu(phi)`.
    pub rhs: f64,
    pub pass: bool,
}

impl EnergyInequalityReport {
    pub fn from_energies(n: usize, lambda1: f64, e_n: f64, e_1: f64) -> Self {
        let rhs = 2.0 / lambda1 * e_1;
        EnergyInequalityReport {
            n,
            lambda1,
            lhs: e_n,
            rhs,
            pass: e_n <= rhs + ENERGY_SLACK * rhs.max(1.0),
        }
    }
}

/// Evaluates both sides of `E_{mu^n}(phi) <= (2/λ₁) E_mu(phi)`.
pub fn check_energy_inequality(
    g: &Graph,
    phi: &[Vector],
    n: usize,
) -> Result<EnergyInequalityReport, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let lambda1 = super::stats(g)?.lambda1;
    let e_n = graph_energy(g, phi, n)?;
    let e_1 = graph_energy(g, phi, 1)?;
    Ok(EnergyInequalityReport::from_energies(n, lambda1, e_n, e_1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> (Graph, Vec<Vector>) {
        let g = Graph::cycle(4);
        let phi = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&(x, y)| Vector::from_vec(vec![x, y]))
            .collect();
        (g, phi)
    }

    #[test]
    fn walk_rows_are_distributions() {
        let g = Graph::petersen();
        for n in 0..6 {
            let p = graph_walk(&g, 3, n).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let p = graph_walk(&g, 0, 1).unwrap();
        assert_relative_eq!(p[1], 1.0 / 3.0);
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn square_energies() {
        let (g, phi) = square();
        assert_eq!(graph_energy(&g, &phi, 0).unwrap(), 0.0);
        assert_relative_eq!(graph_energy(&g, &phi, 1).unwrap(), 0.5, epsilon = 1e-15);
        // Two steps land on the start or the opposite corner (distance^2 = 2)
        // with probability 1/2 each: E = 1/2 * 1/2 * 2 = 1/2.
        assert_relative_eq!(graph_energy(&g, &phi, 2).unwrap(), 0.5, epsilon = 1e-15);
        let rep = check_energy_inequality(&g, &phi, 2).unwrap();
        assert!(rep.pass && rep.lhs < rep.rhs);
        assert_relative_eq!(rep.rhs, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_map_has_zero_energy() {
        let g = Graph::petersen();
        let phi = vec![Vector::from_vec(vec![1.0, -2.0]); 10];
        for n in 0..5 {
            assert_eq!(graph_energy(&g, &phi, n).unwrap(), 0.0);
        }
        let rep = check_energy_inequality(&g, &phi, 3).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.lhs, 0.0);
    }

    #[test]
    fn table_matches_direct_sum() {
        let g = Graph::petersen();
        let phi: Vec<Vector> = (0..10)
            .map(|i| Vector::from_vec(vec![(i as f64).sin(), (i * i) as f64 / 7.0]))
            .collect();
        let table = WalkTable::new(&g, 6).unwrap();
        let energies = table.energies(&phi).unwrap();
        for (n, e) in energies.iter().enumerate() {
            assert_relative_eq!(*e, graph_energy(&g, &phi, n).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn map_shape_checked() {
        let g = Graph::cycle(4);
        assert!(graph_energy(&g, &[Vector::zeros(1)], 1).is_err());
    }
}
