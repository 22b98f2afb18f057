//! Link graphs of symmetric generating sets, the 2-Poincaré constant `κ₂`,
//! and the fixed-point criteria built from it.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gmodel::Presentation;
use crate::group::{GroupContext, GroupError, Token, Word};
use crate::linalg::{self, Matrix};

/// Guard band on `C κ₂ < √2`.
pub const CRITERION_GUARD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("generating set is empty")]
    EmptyGenerators,
    #[error("link graph is disconnected")]
    Disconnected,
    #[error("link graph needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("weights: {0}")]
    Weights(String),
}

/// `weights.json`: `{"edges": [["g0", "g1", 2.0], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub edges: Vec<(String, String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    File,
}

/// `ℒ(S)`: vertices are the tokens of `S`, `s ~ t` when `s⁻¹t ∈ S`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkGraph {
    pub vertices: Vec<String>,
    /// Unordered edges `(s, t, m(s,t))` with `s < t`.
    pub edges: Vec<(usize, usize, f64)>,
    pub weighting: Weighting,
}

impl LinkGraph {
    fn from_adjacency(vertices: Vec<String>, adjacent: impl Fn(usize, usize) -> bool) -> Result<Self, SpectralError> {
        if vertices.is_empty() {
            return Err(SpectralError::EmptyGenerators);
        }
        let n = vertices.len();
        let mut edges = Vec::new();
        for s in 0..n {
            for t in s + 1..n {
                if adjacent(s, t) {
                    edges.push((s, t, 1.0));
                }
            }
        }
        Ok(LinkGraph {
            vertices,
            edges,
            weighting: Weighting::Uniform,
        })
    }

    /// A link given directly by weighted edges between named vertices.
    pub fn from_edges(
        vertices: Vec<String>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Self, SpectralError> {
        if vertices.is_empty() {
            return Err(SpectralError::EmptyGenerators);
        }
        let n = vertices.len();
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (s, t, w) in edges {
            if s >= n || t >= n || s == t {
                return Err(SpectralError::Weights(format!("invalid edge {s}-{t}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(SpectralError::Weights(format!("weight of {s}-{t} must be positive, got {w}")));
            }
            let (a, b) = (s.min(t), s.max(t));
            if !seen.insert((a, b)) {
                return Err(SpectralError::Weights(format!("edge {s}-{t} listed twice")));
            }
            out.push((a, b, w));
        }
        out.sort_by_key(|&(a, b, _)| (a, b));
        let uniform = out.iter().all(|e| e.2 == 1.0);
        Ok(LinkGraph {
            vertices,
            edges: out,
            weighting: if uniform { Weighting::Uniform } else { Weighting::File },
        })
    }

    /// Link of the generating set of a finite group, read off its table.
    pub fn from_group(ctx: &GroupContext) -> Result<Self, SpectralError> {
        let table = ctx.finite_table().ok_or_else(|| {
            GroupError::InvalidGenerator(
                "a free group needs a presentation to decide s^-1 t in S".into(),
            )
        })?;
        let gens = ctx.generators();
        let tokens: Vec<Token> = gens.tokens().collect();
        let elems: Vec<u32> = tokens.iter().map(|&t| table.token_element(t)).collect();
        let in_s: HashSet<u32> = elems.iter().copied().collect();
        let names = tokens.iter().map(|&t| gens.name(t).to_string()).collect();
        LinkGraph::from_adjacency(names, |s, t| {
            in_s.contains(&table.mul(table.inv(elems[s]), elems[t]))
        })
    }

    /// Link of `S = {g_k^±1}` in `<S | R>`. A pair `s ~ t` is detected
    /// through a length-3 relator: `s⁻¹ t u⁻¹` equal, up to cyclic rotation
    /// and inversion, to some relator for a token `u`. Longer relators can
    /// also force `s⁻¹t ∈ S` and are not searched.
    pub fn from_presentation(p: &Presentation) -> Result<Self, SpectralError> {
        let ctx = p.context()?;
        let gens = ctx.generators();
        let mut triples: HashSet<Vec<Token>> = HashSet::new();
        for r in p.relator_words()? {
            let r = r.cyclic_reduction(gens);
            if r.len() != 3 {
                continue;
            }
            for w in [r.clone(), r.inverse(gens)] {
                let l = w.letters();
                for k in 0..3 {
                    triples.insert(vec![l[k], l[(k + 1) % 3], l[(k + 2) % 3]]);
                }
            }
        }
        let tokens: Vec<Token> = gens.tokens().collect();
        let names = tokens.iter().map(|&t| gens.name(t).to_string()).collect();
        LinkGraph::from_adjacency(names, |s, t| {
            let (s, t) = (tokens[s], tokens[t]);
            let st = Word::from_letters([gens.inv(s), t], gens);
            st.len() == 2
                && tokens
                    .iter()
                    .any(|&u| triples.contains(&vec![gens.inv(s), t, gens.inv(u)]))
        })
    }

    /// Replaces the uniform weights with those of `file`. Every link edge
    /// must be listed once, and nothing else.
    pub fn with_weights(mut self, file: &WeightsFile) -> Result<Self, SpectralError> {
        let index: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut given: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (s, t, w) in &file.edges {
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| SpectralError::Weights(format!("unknown vertex `{name}`")))
            };
            let (a, b) = (lookup(s)?, lookup(t)?);
            if !(w.is_finite() && *w > 0.0) {
                return Err(SpectralError::Weights(format!("weight of {s}-{t} must be positive, got {w}")));
            }
            if given.insert((a.min(b), a.max(b)), *w).is_some() {
                return Err(SpectralError::Weights(format!("edge {s}-{t} listed twice")));
            }
        }
        for e in &mut self.edges {
            e.2 = given.remove(&(e.0, e.1)).ok_or_else(|| {
                SpectralError::Weights(format!(
                    "missing weight for link edge {}-{}",
                    self.vertices[e.0], self.vertices[e.1]
                ))
            })?;
        }
        if let Some(&(a, b)) = given.keys().next() {
            return Err(SpectralError::Weights(format!(
                "{}-{} is not an edge of the link",
                self.vertices[a], self.vertices[b]
            )));
        }
        self.weighting = Weighting::File;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// `m(s) = sum_{t ~ s} m(s,t)`.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertices.len()];
        for &(s, t, w) in &self.edges {
            m[s] += w;
            m[t] += w;
        }
        m
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(s, t, _) in &self.edges {
            adj[s].push(t);
            adj[t].push(s);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// `I - M^{-1/2} W M^{-1/2}`.
    pub fn normalized_laplacian(&self) -> Matrix {
        let m = self.vertex_weights();
        let n = m.len();
        let inv_sqrt: Vec<f64> = m.iter().map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 }).collect();
        let mut l = Matrix::identity(n, n);
        for &(s, t, w) in &self.edges {
            let v = w * inv_sqrt[s] * inv_sqrt[t];
            l[(s, t)] -= v;
            l[(t, s)] -= v;
        }
        l
    }

    /// `sum_s m(s) (f(s) - f̄)^2 / sum_{s~t} m(s,t) (f(s) - f(t))^2` over
    /// unordered edges; `None` for constant `f`.
    pub fn rayleigh_quotient(&self, f: &[f64]) -> Option<f64> {
        let m = self.vertex_weights();
        let mean = m.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / m.iter().sum::<f64>();
        let num: f64 = m.iter().zip(f).map(|(a, b)| a * (b - mean).powi(2)).sum();
        let den: f64 = self.edges.iter().map(|&(s, t, w)| w * (f[s] - f[t]).powi(2)).sum();
        (den > 0.0).then(|| num / den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub vertices: usize,
    pub edges: usize,
    pub connected: bool,
    pub weighting: Weighting,
    pub lambda1: f64,
    pub kappa2: f64,
}

/// `κ₂ = 1/√λ₁` of the weighted normalized link Laplacian.
pub fn poincare_k2(link: &LinkGraph) -> Result<PoincareReport, SpectralError> {
    if link.vertex_count() < 2 {
        return Err(SpectralError::TooFewVertices(link.vertex_count()));
    }
    if !link.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    let ev = linalg::symmetric_eigenvalues(&link.normalized_laplacian());
    let lambda1 = ev[1];
    Ok(PoincareReport {
        vertices: link.vertex_count(),
        edges: link.edges.len(),
        connected: true,
        weighting: link.weighting,
        lambda1,
        kappa2: 1.0 / lambda1.sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NowakVerdict {
    pub c: f64,
    pub kappa2: f64,
    /// `C κ₂`.
    pub product: f64,
    /// `C κ₂ < √2`, with a guard band.
    pub fixed_point_certified: bool,
    /// `2^{-1/2} κ₂ < 1`.
    pub hilbert_condition: bool,
}

pub fn nowak_criterion(report: &PoincareReport, c: f64) -> NowakVerdict {
    let product = c * report.kappa2;
    NowakVerdict {
        c,
        kappa2: report.kappa2,
        product,
        fixed_point_certified: product < std::f64::consts::SQRT_2 - CRITERION_GUARD,
        hilbert_condition: report.kappa2 / std::f64::consts::SQRT_2 < 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic_table, product_cyclic_table};
    use approx::assert_relative_eq;

    fn complete(k: usize) -> LinkGraph {
        LinkGraph::from_adjacency((0..k).map(|i| format!("s{i}")).collect(), |_, _| true).unwrap()
    }

    #[test]
    fn klein_four_link_is_a_triangle() {
        let ctx = GroupContext::finite(&product_cyclic_table(2, 2), &[1, 2, 3]).unwrap();
        let link = LinkGraph::from_group(&ctx).unwrap();
        assert_eq!(link.vertex_count(), 3);
        assert_eq!(link.edges.len(), 3);
        let rep = poincare_k2(&link).unwrap();
        assert_relative_eq!(rep.kappa2, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn free_presentation_link_is_edgeless() {
        let p = Presentation {
            m: 2,
            generators: vec![],
            relators: vec![],
        };
        let link = LinkGraph::from_presentation(&p).unwrap();
        assert!(link.edges.is_empty());
        assert_eq!(poincare_k2(&link), Err(SpectralError::Disconnected));
    }

    #[test]
    fn triangle_relator_gives_link_edges() {
        // g0 g1 g2 = e.
        let p = Presentation {
            m: 3,
            generators: vec![],
            relators: vec!["g0 g1 g2".into()],
        };
        let link = LinkGraph::from_presentation(&p).unwrap();
        // Each rotation and its inverse rotation name the same unordered pair.
        assert_eq!(link.edges.len(), 3);
        let names: Vec<(String, String)> = link
            .edges
            .iter()
            .map(|&(s, t, _)| (link.vertices[s].clone(), link.vertices[t].clone()))
            .collect();
        // s^-1 t u^-1 = g0 g1 g2 with s = g0^-1, t = g1.
        assert!(names.contains(&("g0^-1".into(), "g1".into())));
    }

    #[test]
    fn cyclic_group_link() {
        // Z/5 with S = {1, 4}: 1^-1 * 4 = 3 is not in S, so the link is edgeless.
        let ctx = GroupContext::finite(&cyclic_table(5), &[1, 4]).unwrap();
        let link = LinkGraph::from_group(&ctx).unwrap();
        assert!(link.edges.is_empty());
        // Z/3 with S = {1, 2}: 1^-1 * 2 = 1 is in S.
        let ctx = GroupContext::finite(&cyclic_table(3), &[1, 2]).unwrap();
        assert_eq!(LinkGraph::from_group(&ctx).unwrap().edges.len(), 1);
    }

    #[test]
    fn complete_links() {
        for k in 2..=8 {
            let rep = poincare_k2(&complete(k)).unwrap();
            assert_relative_eq!(rep.lambda1, k as f64 / (k as f64 - 1.0), epsilon = 1e-12);
            assert_relative_eq!(rep.kappa2, ((k as f64 - 1.0) / k as f64).sqrt(), epsilon = 1e-12);
        }
        assert_relative_eq!(poincare_k2(&complete(2)).unwrap().kappa2, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn weights_are_echoed_and_scale_free() {
        let base = complete(4);
        let file = WeightsFile {
            edges: base
                .edges
                .iter()
                .map(|&(s, t, _)| (format!("s{s}"), format!("s{t}"), 1.0 + (s * 4 + t) as f64))
                .collect(),
        };
        let a = base.clone().with_weights(&file).unwrap();
        for (e, f) in a.edges.iter().zip(&file.edges) {
            assert_eq!(e.2, f.2);
        }
        let scaled = WeightsFile {
            edges: file.edges.iter().map(|(s, t, w)| (s.clone(), t.clone(), 3.5 * w)).collect(),
        };
        let b = base.clone().with_weights(&scaled).unwrap();
        assert_relative_eq!(
            poincare_k2(&a).unwrap().kappa2,
            poincare_k2(&b).unwrap().kappa2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn weight_file_errors() {
        let base = complete(3);
        let missing = WeightsFile {
            edges: vec![("s0".into(), "s1".into(), 1.0)],
        };
        assert!(matches!(base.clone().with_weights(&missing), Err(SpectralError::Weights(_))));
        let bad = WeightsFile {
            edges: vec![("s0".into(), "s9".into(), 1.0)],
        };
        assert!(base.clone().with_weights(&bad).is_err());
        let negative = WeightsFile {
            edges: vec![
                ("s0".into(), "s1".into(), -1.0),
                ("s0".into(), "s2".into(), 1.0),
                ("s1".into(), "s2".into(), 1.0),
            ],
        };
        assert!(base.with_weights(&negative).is_err());
    }

    #[test]
    fn criterion_arithmetic() {
        let rep = poincare_k2(&complete(2)).unwrap();
        assert!(nowak_criterion(&rep, 1.0).fixed_point_certified);
        let near = PoincareReport {
            kappa2: 0.99,
            ..rep.clone()
        };
        let v = nowak_criterion(&near, std::f64::consts::SQRT_2);
        assert!(v.product < std::f64::consts::SQRT_2 && v.fixed_point_certified);
        let at = PoincareReport { kappa2: 1.0, ..rep };
        assert!(!nowak_criterion(&at, std::f64::consts::SQRT_2).fixed_point_certified);
        assert!(nowak_criterion(&at, 1.4).fixed_point_certified);
    }

    #[test]
    fn rayleigh_never_exceeds_kappa_squared() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(2);
        let link = complete(5);
        let k2 = poincare_k2(&link).unwrap().kappa2.powi(2);
        for _ in 0..1000 {
            let f: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(link.rayleigh_quotient(&f).unwrap() <= k2 + 1e-9);
        }
    }
}
