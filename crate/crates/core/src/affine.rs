//! Affine actions `rho(g) v = A(g) v + b(g)` on `R^d`.
//!
//! Only one generator of every inverse pair is supplied; the inverse is
//! derived from `rho(s) rho(s^-1) = id`, i.e. `A(s^-1) = A(s)^-1` and
//! `b(s^-1) = -A(s)^-1 b(s)`. The action on a general element is the
//! composition of generator maps along a word, which realises the cocycle
//! rules `A(gh) = A(g)A(h)` and `b(gh) = b(g) + A(g)b(h)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Element, GroupContext, GroupError, Token};
use crate::linalg::{self, Matrix, Vector};

pub use crate::linalg::operator_norm;

/// Generator matrices with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Tolerance for relators of a finite group mapping to the identity.
pub const RELATOR_TOL: f64 = 1e-8;
/// Slack on the growth ratio before a check fails.
pub const GROWTH_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("generator {0} has non-finite entries")]
    NonFinite(String),
    #[error("linear part of generator {token} is not invertible (condition number {condition:e})")]
    Singular { token: String, condition: f64 },
    #[error("no data for generator {0}")]
    MissingGenerator(String),
    #[error("unexpected generator key {0}: only one generator per inverse pair is read")]
    UnexpectedGenerator(String),
    #[error("relation {relation} is violated by {deviation:e}")]
    RelationViolated { relation: String, deviation: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// An affine self-map `v -> linear v + translation`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix,
    pub translation: Vector,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        AffineMap {
            linear: Matrix::identity(dim, dim),
            translation: Vector::zeros(dim),
        }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.linear * v + &self.translation
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &other.linear,
            translation: &self.translation + &self.linear * &other.translation,
        }
    }

    /// Max-entry distance to another map.
    pub fn distance(&self, other: &AffineMap) -> f64 {
        let dl = (&self.linear - &other.linear).amax();
        let dt = (&self.translation - &other.translation).amax();
        dl.max(dt)
    }
}

/// Which length function bounds `||A(g)||`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `||A(g)|| <= C l(g)^sigma`.
    WordLength,
    /// `||A(g)|| <= C l_conj([g])^sigma`.
    Conjugacy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub radius: usize,
    pub bound: BoundKind,
    pub c: f64,
    pub sigma: f64,
    /// `max ||A(g)|| / (C L(g)^sigma)` over the ball, with `L = 0` read as `||A(g)|| / C`.
    pub worst_ratio: f64,
    pub worst_element: Element,
    pub pass: bool,
    /// Set only when the check fails.
    pub witness: Option<Element>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenormEstimate {
    pub radius: usize,
    pub value: f64,
    pub maximiser: Element,
}

/// An affine action of a [`GroupContext`] on `R^dim`, with declared growth
/// parameters `C > 0`, `sigma >= 0`.
#[derive(Clone, Debug)]
pub struct AffineAction {
    dim: usize,
    c: f64,
    sigma: f64,
    /// Indexed by token.
    maps: Vec<AffineMap>,
}

impl AffineAction {
    /// Builds an action from one `(A, b)` per inverse-pair representative,
    /// in the order of `ctx.generators().representatives()`.
    pub fn new(
        ctx: &GroupContext,
        dim: usize,
        data: Vec<(Matrix, Vector)>,
        c: f64,
        sigma: f64,
    ) -> Result<Self, ActionError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ActionError::InvalidParameter(format!("C must be positive, got {c}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ActionError::InvalidParameter(format!(
                "sigma must be nonnegative, got {sigma}"
            )));
        }
        let gens = ctx.generators();
        let reps = gens.representatives();
        if data.len() != reps.len() {
            return Err(ActionError::DimensionMismatch {
                expected: reps.len(),
                got: data.len(),
            });
        }
        let mut maps: Vec<Option<AffineMap>> = vec![None; gens.len()];
        for (&t, (a, b)) in reps.iter().zip(data) {
            let name = gens.name(t).to_string();
            if a.nrows() != dim || a.ncols() != dim {
                return Err(ActionError::DimensionMismatch {
                    expected: dim,
                    got: if a.nrows() != dim { a.nrows() } else { a.ncols() },
                });
            }
            if b.len() != dim {
                return Err(ActionError::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
                return Err(ActionError::NonFinite(name));
            }
            let condition = linalg::condition_number(&a);
            if !(condition <= MAX_CONDITION) {
                return Err(ActionError::Singular {
                    token: name,
                    condition,
                });
            }
            let a_inv = a.clone().try_inverse().ok_or(ActionError::Singular {
                token: name.clone(),
                condition,
            })?;
            let inv = gens.inv(t);
            let forward = AffineMap {
                linear: a,
                translation: b,
            };
            if inv == t {
                // s = s^-1 forces rho(s)^2 = id.
                let square = forward.compose(&forward);
                let deviation = square.distance(&AffineMap::identity(dim));
                if deviation > RELATOR_TOL {
                    return Err(ActionError::RelationViolated {
                        relation: format!("{name}^2"),
                        deviation,
                    });
                }
            } else {
                let back_t = -(&a_inv * &forward.translation);
                maps[inv.index()] = Some(AffineMap {
                    linear: a_inv,
                    translation: back_t,
                });
            }
            maps[t.index()] = Some(forward);
        }
        let action = AffineAction {
            dim,
            c,
            sigma,
            maps: maps.into_iter().map(|m| m.expect("every token covered")).collect(),
        };
        if ctx.finite_table().is_some() {
            action.check_finite_relations(ctx)?;
        }
        Ok(action)
    }

    /// For a finite group, checks `rho(w_g) rho(s) = rho(w_{gs})` for every
    /// element `g` and token `s`, where `w_x` is the stored geodesic word.
    /// These relators present the group, so passing them makes `rho` a
    /// homomorphism.
    fn check_finite_relations(&self, ctx: &GroupContext) -> Result<(), ActionError> {
        let table = ctx.finite_table().expect("finite backend");
        let maps: Vec<AffineMap> = (0..table.order() as u32)
            .map(|a| self.compose_word(table.geodesic(a)))
            .collect();
        for a in 0..table.order() as u32 {
            for t in ctx.generators().tokens() {
                let b = table.mul(a, table.token_element(t));
                let lhs = maps[a as usize].compose(&self.maps[t.index()]);
                let deviation = lhs.distance(&maps[b as usize]);
                if deviation > RELATOR_TOL {
                    return Err(ActionError::RelationViolated {
                        relation: format!("{a}*{} = {b}", ctx.generators().name(t)),
                        deviation,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_growth(mut self, c: f64, sigma: f64) -> Self {
        self.c = c;
        self.sigma = sigma;
        self
    }

    pub fn generator_map(&self, t: Token) -> &AffineMap {
        &self.maps[t.index()]
    }

    pub fn generator_maps(&self) -> &[AffineMap] {
        &self.maps
    }

    fn compose_word(&self, letters: &[Token]) -> AffineMap {
        letters
            .iter()
            .fold(AffineMap::identity(self.dim), |acc, t| acc.compose(&self.maps[t.index()]))
    }

    /// `rho(g)` as a single affine map.
    pub fn element_map(&self, ctx: &GroupContext, g: &Element) -> Result<AffineMap, ActionError> {
        Ok(self.compose_word(&ctx.letters(g)?))
    }

    fn check_dim(&self, v: &Vector) -> Result<(), ActionError> {
        if v.len() != self.dim {
            return Err(ActionError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `rho(g) v`, applying the generator maps of the word right to left.
    pub fn apply(&self, ctx: &GroupContext, g: &Element, v: &Vector) -> Result<Vector, ActionError> {
        self.check_dim(v)?;
        let letters = ctx.letters(g)?;
        Ok(letters.iter().rev().fold(v.clone(), |acc, t| self.maps[t.index()].apply(&acc)))
    }

    /// `rho(s) v` for a generator token.
    pub fn apply_token(&self, t: Token, v: &Vector) -> Vector {
        self.maps[t.index()].apply(v)
    }

    /// `A(g)`.
    pub fn linear_part(&self, ctx: &GroupContext, g: &Element) -> Result<Matrix, ActionError> {
        let letters = ctx.letters(g)?;
        Ok(letters.iter().fold(Matrix::identity(self.dim, self.dim), |acc, t| {
            acc * &self.maps[t.index()].linear
        }))
    }

    /// Whether every generator's linear part is orthogonal within `tol`.
    pub fn is_isometric(&self, tol: f64) -> bool {
        let id = Matrix::identity(self.dim, self.dim);
        self.maps
            .iter()
            .all(|m| (m.linear.transpose() * &m.linear - &id).amax() <= tol)
    }

    /// `(1/#S) sum_s A(s)` and `(1/#S) sum_s b(s)`.
    pub fn mean_map(&self) -> AffineMap {
        let k = self.maps.len() as f64;
        let mut out = AffineMap {
            linear: Matrix::zeros(self.dim, self.dim),
            translation: Vector::zeros(self.dim),
        };
        for m in &self.maps {
            out.linear += &m.linear;
            out.translation += &m.translation;
        }
        out.linear /= k;
        out.translation /= k;
        out
    }

    /// Exhaustive check of `||A(g)|| <= C L(g)^sigma` over `ball(radius)`.
    pub fn verify_growth(
        &self,
        ctx: &GroupContext,
        radius: usize,
        bound: BoundKind,
    ) -> Result<GrowthReport, ActionError> {
        let ball = ctx.ball(radius)?;
        let mut worst_ratio = -1.0;
        let mut worst_element = ctx.identity();
        for g in ball {
            let norm = operator_norm(&self.linear_part(ctx, &g)?);
            let len = match bound {
                BoundKind::WordLength => ctx.word_length(&g)?,
                BoundKind::Conjugacy => ctx.conjugacy_length(&g)?,
            };
            let ratio = if len == 0 {
                norm / self.c
            } else {
                norm / (self.c * (len as f64).powf(self.sigma))
            };
            // Ties go to the later (longer) element.
            if ratio >= worst_ratio {
                worst_ratio = ratio;
                worst_element = g;
            }
        }
        let pass = worst_ratio <= 1.0 + GROWTH_SLACK;
        Ok(GrowthReport {
            radius,
            bound,
            c: self.c,
            sigma: self.sigma,
            worst_ratio,
            witness: (!pass).then(|| worst_element.clone()),
            worst_element,
            pass,
        })
    }

    /// Lower bound `max_{g in ball(R)} ||A(g) v||` for the renormed `|||v|||`.
    pub fn renorm_estimate(
        &self,
        ctx: &GroupContext,
        v: &Vector,
        radius: usize,
    ) -> Result<RenormEstimate, ActionError> {
        self.check_dim(v)?;
        let mut best = RenormEstimate {
            radius,
            value: v.norm(),
            maximiser: ctx.identity(),
        };
        for g in ctx.ball(radius)? {
            let value = (self.linear_part(ctx, &g)? * v).norm();
            if value > best.value {
                best.value = value;
                best.maximiser = g;
            }
        }
        Ok(best)
    }

    pub fn to_spec(&self, ctx: &GroupContext) -> ActionSpec {
        let gens = ctx.generators();
        let generators = gens
            .representatives()
            .iter()
            .map(|&t| {
                let m = &self.maps[t.index()];
                let a = (0..self.dim)
                    .map(|i| (0..self.dim).map(|j| m.linear[(i, j)]).collect())
                    .collect();
                (
                    gens.name(t).to_string(),
                    GeneratorData {
                        a,
                        b: m.translation.iter().copied().collect(),
                    },
                )
            })
            .collect();
        ActionSpec {
            dim: self.dim,
            c: self.c,
            sigma: self.sigma,
            generators,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorData {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// `action.json`: `{"dim":d,"C":..,"sigma":..,"generators":{"g0":{"A":[[..]],"b":[..]}}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub dim: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub sigma: f64,
    pub generators: BTreeMap<String, GeneratorData>,
}

impl ActionSpec {
    pub fn build(&self, ctx: &GroupContext) -> Result<AffineAction, ActionError> {
        let gens = ctx.generators();
        for key in self.generators.keys() {
            match gens.token(key) {
                Some(t) if gens.representatives().contains(&t) => {}
                _ => return Err(ActionError::UnexpectedGenerator(key.clone())),
            }
        }
        let mut data = Vec::new();
        for &t in gens.representatives() {
            let name = gens.name(t);
            let g = self
                .generators
                .get(name)
                .ok_or_else(|| ActionError::MissingGenerator(name.to_string()))?;
            if g.a.len() != self.dim || g.a.iter().any(|r| r.len() != self.dim) {
                return Err(ActionError::DimensionMismatch {
                    expected: self.dim,
                    got: g.a.iter().map(Vec::len).find(|&l| l != self.dim).unwrap_or(g.a.len()),
                });
            }
            let a = Matrix::from_fn(self.dim, self.dim, |i, j| g.a[i][j]);
            data.push((a, Vector::from_vec(g.b.clone())));
        }
        AffineAction::new(ctx, self.dim, data, self.c, self.sigma)
    }
}
