//! Random groups in the graph model: S-labellings of a finite graph, the
//! induced morphisms `β_{u->x}` into the Cayley graph of `F_m`, pushforward
//! random walks, cycle relators, and Monte-Carlo expectations of the
//! pushforward walks.

mod mixture;
mod transplant;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::ActionError;
use crate::graph::{graph_walk, Graph, GraphError};
use crate::group::{Element, GeneratorSet, GroupContext, GroupError, Token, WalkMeasure, Word};
use crate::harmonic::HarmonicError;
use crate::rng::seeded_rng;

pub use mixture::{
    concentration_experiment, fit_mixture, simplex_least_squares, ConcentrationReport, MixtureFit,
    DEGENERATE_FIT_TV,
};
pub use transplant::{
    check_transplant_inequality, transplanted_energy, TransplantReport, TRANSPLANT_SLACK,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error("walk length {n} needs girth above {}, graph girth is {girth}", 2 * n)]
    GirthBound { n: usize, girth: usize },
    #[error("vertex at distance {dist} is outside the injectivity radius for girth {girth}")]
    DistanceBound { dist: usize, girth: usize },
    #[error("labelling has {labels} labels for {edges} edges")]
    LabellingMismatch { edges: usize, labels: usize },
    #[error("growth bound fails at radius {radius}: worst ratio {ratio}")]
    GrowthUnverified { radius: usize, ratio: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// `α`: edge `i`, oriented as `graph.edge(i)`, carries `labels[i]`; the
/// reverse orientation carries its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SLabelling {
    gens: GeneratorSet,
    labels: Vec<Token>,
}

impl SLabelling {
    pub fn new(m: usize, labels: Vec<Token>) -> Result<Self, GModelError> {
        if m == 0 {
            return Err(GroupError::ZeroRank.into());
        }
        let gens = GeneratorSet::free(m);
        if let Some(t) = labels.iter().find(|t| !gens.contains(**t)) {
            return Err(GroupError::UnknownToken(t.to_string()).into());
        }
        Ok(SLabelling { gens, labels })
    }

    pub fn rank(&self) -> usize {
        self.gens.len() / 2
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn labels(&self) -> &[Token] {
        &self.labels
    }

    /// `α((from, to))` along edge `id`.
    pub fn oriented(&self, g: &Graph, id: usize, from: usize) -> Token {
        let t = self.labels[id];
        if g.edge(id).0 == from {
            t
        } else {
            self.gens.inv(t)
        }
    }

    pub fn to_spec(&self) -> LabellingSpec {
        LabellingSpec {
            m: self.rank(),
            labels: self.labels.iter().map(|&t| self.gens.name(t).to_string()).collect(),
        }
    }
}

/// `labelling.json`: `{"m": 2, "labels": ["g0", "g1^-1", ...]}`, one label
/// per line of the edge list, for the orientation `u -> v` as written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabellingSpec {
    pub m: usize,
    pub labels: Vec<String>,
}

impl LabellingSpec {
    pub fn build(&self) -> Result<SLabelling, GModelError> {
        if self.m == 0 {
            return Err(GroupError::ZeroRank.into());
        }
        let gens = GeneratorSet::free(self.m);
        let labels = self
            .labels
            .iter()
            .map(|s| gens.token(s).ok_or_else(|| GroupError::UnknownToken(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        SLabelling::new(self.m, labels)
    }
}

/// Independent uniform token on every edge.
pub fn sample_labelling(g: &Graph, m: usize, seed: u64) -> Result<SLabelling, GModelError> {
    if m == 0 {
        return Err(GroupError::ZeroRank.into());
    }
    let mut rng = seeded_rng(seed);
    let labels = (0..g.edge_count())
        .map(|_| Token(rng.gen_range(0..2 * m) as u16))
        .collect();
    SLabelling::new(m, labels)
}

/// A labelled graph with its girth cached; `girth` is `usize::MAX` for a
/// forest.
#[derive(Clone, Debug)]
pub struct LabelledGraph<'a> {
    graph: &'a Graph,
    alpha: &'a SLabelling,
    girth: usize,
}

impl<'a> LabelledGraph<'a> {
    pub fn new(graph: &'a Graph, alpha: &'a SLabelling) -> Result<Self, GModelError> {
        if alpha.labels.len() != graph.edge_count() {
            return Err(GModelError::LabellingMismatch {
                edges: graph.edge_count(),
                labels: alpha.labels.len(),
            });
        }
        Ok(LabelledGraph {
            graph,
            alpha,
            girth: graph.girth().unwrap_or(usize::MAX),
        })
    }

    pub(crate) fn with_girth(graph: &'a Graph, alpha: &'a SLabelling, girth: usize) -> Self {
        LabelledGraph { graph, alpha, girth }
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn labelling(&self) -> &'a SLabelling {
        self.alpha
    }

    pub fn girth(&self) -> usize {
        self.girth
    }

    /// The free group the labels live in.
    pub fn context(&self) -> GroupContext {
        GroupContext::free(self.alpha.rank()).expect("rank >= 1")
    }

    fn check_walk_length(&self, n: usize) -> Result<(), GModelError> {
        if 2 * n >= self.girth {
            return Err(GModelError::GirthBound {
                n,
                girth: self.girth,
            });
        }
        Ok(())
    }

    /// Reduced label of a walk given by its start and successive edge ids.
    pub fn walk_label(&self, start: usize, edges: &[usize]) -> Word {
        let gens = self.alpha.generators();
        let mut w = Word::identity();
        let mut at = start;
        for &id in edges {
            w.push(self.alpha.oriented(self.graph, id, at), gens);
            let (a, b) = self.graph.edge(id);
            at = if a == at { b } else { a };
        }
        w
    }

    /// Labels of the BFS-tree geodesics from `u` to every vertex within
    /// distance `< girth/2`; `None` beyond.
    fn geodesic_labels(&self, u: usize) -> Vec<Option<Word>> {
        let (dist, parent) = self.graph.bfs_tree(u);
        let gens = self.alpha.generators();
        let n = self.graph.vertex_count();
        let mut order: Vec<usize> = (0..n).filter(|&v| dist[v] != usize::MAX).collect();
        order.sort_by_key(|&v| dist[v]);
        let mut out: Vec<Option<Word>> = vec![None; n];
        for v in order {
            if 2 * dist[v] >= self.girth {
                continue;
            }
            out[v] = Some(match parent[v] {
                None => Word::identity(),
                Some(id) => {
                    let (a, b) = self.graph.edge(id);
                    let prev = if a == v { b } else { a };
                    let mut w = out[prev].clone().expect("closer vertices come first");
                    w.push(self.alpha.oriented(self.graph, id, prev), gens);
                    w
                }
            });
        }
        out
    }

    /// `β_{u->x}(v) = x α(p)` for a geodesic `p` from `u` to `v`.
    pub fn beta(&self, u: usize, x: &Word, v: usize) -> Result<Word, GModelError> {
        let n = self.graph.vertex_count();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { vertex: w, count: n }.into());
            }
        }
        let dist = self.graph.bfs(u)[v];
        if dist == usize::MAX {
            return Err(GraphError::Disconnected.into());
        }
        if 2 * dist >= self.girth {
            return Err(GModelError::DistanceBound {
                dist,
                girth: self.girth,
            });
        }
        let label = self.geodesic_labels(u)[v].clone().expect("within radius");
        Ok(x.mul(&label, self.alpha.generators()))
    }

    /// `mu_{G,α}^n(x -> .) = sum_u ν(u) (β_{u->x})_* mu_G^n(u -> .)`.
    pub fn pushforward_walk(&self, x: &Word, n: usize) -> Result<WalkMeasure, GModelError> {
        self.check_walk_length(n)?;
        let gens = self.alpha.generators();
        let nu = self.graph.stationary();
        let mut masses: BTreeMap<Element, f64> = BTreeMap::new();
        for u in 0..self.graph.vertex_count() {
            let p = graph_walk(self.graph, u, n)?;
            let labels = self.geodesic_labels(u);
            for (v, &mass) in p.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let label = labels[v].as_ref().expect("walk stays within n < girth/2");
                *masses.entry(Element::Word(x.mul(label, gens))).or_insert(0.0) += nu[u] * mass;
            }
        }
        Ok(WalkMeasure::from_masses(Element::Word(x.clone()), masses))
    }

    /// Fundamental-cycle relators of the BFS tree rooted at `root`, one per
    /// non-tree edge, reduced and cyclically reduced.
    pub fn extract_relators(&self, root: usize) -> Result<Vec<Word>, GModelError> {
        let n = self.graph.vertex_count();
        if root >= n {
            return Err(GraphError::VertexOutOfRange { vertex: root, count: n }.into());
        }
        if !self.graph.is_connected() {
            return Err(GraphError::Disconnected.into());
        }
        let gens = self.alpha.generators();
        let (dist, parent) = self.graph.bfs_tree(root);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| dist[v]);
        let mut to_root: Vec<Word> = vec![Word::identity(); n];
        for v in order {
            if let Some(id) = parent[v] {
                let (a, b) = self.graph.edge(id);
                let prev = if a == v { b } else { a };
                let mut w = to_root[prev].clone();
                w.push(self.alpha.oriented(self.graph, id, prev), gens);
                to_root[v] = w;
            }
        }
        let tree: Vec<bool> = {
            let mut t = vec![false; self.graph.edge_count()];
            for id in parent.iter().flatten() {
                t[*id] = true;
            }
            t
        };
        let mut out = Vec::new();
        for (id, &(a, b)) in self.graph.edges().iter().enumerate() {
            if tree[id] {
                continue;
            }
            let cycle = to_root[a]
                .mul(&Word::letter(self.alpha.oriented(self.graph, id, a)), gens)
                .mul(&to_root[b].inverse(gens), gens);
            out.push(cycle.cyclic_reduction(gens));
        }
        Ok(out)
    }

    pub fn presentation(&self, root: usize) -> Result<Presentation, GModelError> {
        let gens = self.alpha.generators();
        Ok(Presentation {
            m: self.alpha.rank(),
            generators: gens
                .representatives()
                .iter()
                .map(|&t| gens.name(t).to_string())
                .collect(),
            relators: self
                .extract_relators(root)?
                .iter()
                .map(|w| w.format(gens))
                .collect(),
        })
    }
}

/// `presentation.json`: `{"m": 2, "generators": ["g0", "g1"], "relators": ["g0 g0 g0", ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presentation {
    pub m: usize,
    #[serde(default)]
    pub generators: Vec<String>,
    pub relators: Vec<String>,
}

impl Presentation {
    pub fn context(&self) -> Result<GroupContext, GroupError> {
        GroupContext::free(self.m)
    }

    /// Relators parsed as reduced words over `F_m`.
    pub fn relator_words(&self) -> Result<Vec<Word>, GroupError> {
        let ctx = self.context()?;
        let expected: Vec<String> = ctx
            .generators()
            .representatives()
            .iter()
            .map(|&t| ctx.generators().name(t).to_string())
            .collect();
        if !self.generators.is_empty() && self.generators != expected {
            return Err(GroupError::InvalidGenerator(format!(
                "generators {:?} do not match rank {} (expected {:?})",
                self.generators, self.m, expected
            )));
        }
        self.relators
            .iter()
            .map(|r| {
                ctx.parse_element(r)
                    .map(|g| g.as_word().cloned().expect("free backend"))
            })
            .collect()
    }
}
