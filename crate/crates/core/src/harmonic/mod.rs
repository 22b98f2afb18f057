//! Equivariant maps, energies, the averaging operator `H` and Laplacian
//! `Δ = 1 - H`, the tension-contracting flow, and linear solvers for
//! harmonic maps and fixed points.
//!
//! An equivariant map is stored as `v = f(e)`; everything else is
//! `f(g) = rho(g) v`. Under this identification `H` becomes the affine map
//! `T(v) = (v + (1/#S) sum_s rho(s) v) / 2` and `Δf(x) = A(x)(v - T(v))`.

mod delta;
mod flow;
mod solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{ActionError, AffineAction};
use crate::group::{Element, GroupContext, GroupError};
use crate::linalg::{Matrix, Vector};

pub use delta::{delta, near_critical_search, SearchResult};
pub use flow::{
    run_flow, FlowConfig, FlowTrace, MonotonicityViolation, RigidityCheck, StabilityVerdict,
    CONTRACTION_MARGIN, DEFAULT_FLOW_CAP, DEFAULT_FLOW_RADIUS, HARMONIC_TOL, MONOTONE_SLACK,
};
pub use solve::{
    find_fixed_point, min_energy_vector, solve_harmonic, HarmonicSolution, MinEnergy,
    SOLVE_TOL,
};

/// Tolerance on the total weight passed to [`barycenter`].
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("barycenter of an empty measure")]
    EmptyMeasure,
    #[error("weights must be nonnegative and sum to 1, got sum {0}")]
    BadWeights(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("search made {moves} halving moves without stopping (delta = {delta:e})")]
    CapReached { moves: usize, delta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// How [`EquivariantMap::n_step_energy_with`] evaluates the walk expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMethod {
    /// Sum over the exact support of `mu^n`; bounded by the group's cap.
    #[default]
    Convolution,
    /// Closed recursion for the first two moments of `rho(X_n) v`.
    Moments,
}

/// Weighted mean `sum t_i v_i`.
pub fn barycenter(points: &[(f64, Vector)]) -> Result<Vector, HarmonicError> {
    let (_, first) = points.first().ok_or(HarmonicError::EmptyMeasure)?;
    let dim = first.len();
    let mut total = 0.0;
    let mut out = Vector::zeros(dim);
    for (w, p) in points {
        if p.len() != dim {
            return Err(HarmonicError::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        if !(*w >= 0.0) {
            return Err(HarmonicError::BadWeights(*w));
        }
        total += w;
        out += p * *w;
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(HarmonicError::BadWeights(total));
    }
    Ok(out)
}

/// A `rho`-equivariant map `f`, determined by `f(e)`.
#[derive(Clone, Debug)]
pub struct EquivariantMap<'a> {
    action: &'a AffineAction,
    base: Vector,
}

impl<'a> EquivariantMap<'a> {
    pub fn new(action: &'a AffineAction, base: Vector) -> Result<Self, HarmonicError> {
        if base.len() != action.dim() {
            return Err(HarmonicError::DimensionMismatch {
                expected: action.dim(),
                got: base.len(),
            });
        }
        Ok(EquivariantMap { action, base })
    }

    pub fn action(&self) -> &'a AffineAction {
        self.action
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    /// `f(g) = rho(g) f(e)`.
    pub fn evaluate(&self, ctx: &GroupContext, g: &Element) -> Result<Vector, HarmonicError> {
        Ok(self.action.apply(ctx, g, &self.base)?)
    }

    /// Whether `f(e)` is fixed by every generator within `tol`.
    pub fn is_constant(&self, tol: f64) -> bool {
        delta(self.action, &self.base) <= tol
    }

    /// `E(f)(x) = (1/(2#S)) sum_s ||f(x) - f(xs)||^2`.
    pub fn local_energy(&self, ctx: &GroupContext, x: &Element) -> Result<f64, HarmonicError> {
        let fx = self.evaluate(ctx, x)?;
        let mut sum = 0.0;
        for t in ctx.generators().tokens() {
            let fxs = self.evaluate(ctx, &ctx.mul_token(x, t))?;
            sum += (&fx - fxs).norm_squared();
        }
        Ok(sum / (2.0 * ctx.degree() as f64))
    }

    /// `E^(n)(f)(x) = 1/2 sum ||f(x) - f(x')||^2 mu^n(x -> x')`, summed over
    /// the exact support of `mu^n`.
    pub fn n_step_energy(
        &self,
        ctx: &GroupContext,
        x: &Element,
        n: usize,
    ) -> Result<f64, HarmonicError> {
        self.n_step_energy_with(ctx, x, n, EnergyMethod::Convolution)
    }

    pub fn n_step_energy_with(
        &self,
        ctx: &GroupContext,
        x: &Element,
        n: usize,
        method: EnergyMethod,
    ) -> Result<f64, HarmonicError> {
        match method {
            EnergyMethod::Convolution => {
                let walk = ctx.walk_convolution(n)?.translate(ctx, x)?;
                let fx = self.evaluate(ctx, x)?;
                let mut sum = 0.0;
                for (g, p) in walk.iter() {
                    sum += p * (&fx - self.evaluate(ctx, g)?).norm_squared();
                }
                Ok(0.5 * sum)
            }
            EnergyMethod::Moments => self.n_step_energy_moments(ctx, x, n),
        }
    }

    /// Moment recursion for `X_n = s_1 ... s_n` with uniform independent steps:
    /// `rho(X_n) v = A(s_1) rho(X') v + b(s_1)` gives
    /// `m_n = M m_{n-1} + c` and
    /// `Q_n = (1/#S) sum_s (A Q A^T + A m b^T + b m^T A^T + b b^T)`, and then
    /// `E^(n)(f)(x) = 1/2 tr(A(x)^T A(x) (Q - m v^T - v m^T + v v^T))`.
    fn n_step_energy_moments(
        &self,
        ctx: &GroupContext,
        x: &Element,
        n: usize,
    ) -> Result<f64, HarmonicError> {
        let ax = self.action.linear_part(ctx, x)?;
        let v = &self.base;
        let k = ctx.degree() as f64;
        let mut m = v.clone();
        let mut q = v * v.transpose();
        for _ in 0..n {
            let mut m_next = Vector::zeros(v.len());
            let mut q_next = Matrix::zeros(v.len(), v.len());
            for map in self.action.generator_maps() {
                let a = &map.linear;
                let b = &map.translation;
                let am = a * &m;
                m_next += &am + b;
                q_next += a * &q * a.transpose() + &am * b.transpose() + b * am.transpose()
                    + b * b.transpose();
            }
            m = m_next / k;
            q = q_next / k;
        }
        let centred = &q - &m * v.transpose() - v * m.transpose() + v * v.transpose();
        let gram = ax.transpose() * &ax;
        Ok(0.5 * (gram.component_mul(&centred)).sum().max(0.0))
    }

    /// `T(v)`, the base vector of `Hf`.
    pub fn averaged_base(&self) -> Vector {
        averaged(self.action, &self.base)
    }

    /// `Hf`.
    pub fn averaging(&self) -> EquivariantMap<'a> {
        EquivariantMap {
            action: self.action,
            base: self.averaged_base(),
        }
    }

    /// `Δf(e) = v - T(v)`.
    pub fn laplacian_at_identity(&self) -> Vector {
        &self.base - self.averaged_base()
    }

    /// `Δf(x) = A(x) Δf(e)`.
    pub fn laplacian(&self, ctx: &GroupContext, x: &Element) -> Result<Vector, HarmonicError> {
        Ok(self.action.linear_part(ctx, x)? * self.laplacian_at_identity())
    }

    /// `Δf(x) = (1/(2#S)) sum_s (f(x) - f(xs))` summed directly.
    pub fn laplacian_direct(
        &self,
        ctx: &GroupContext,
        x: &Element,
    ) -> Result<Vector, HarmonicError> {
        let fx = self.evaluate(ctx, x)?;
        let mut out = Vector::zeros(fx.len());
        for t in ctx.generators().tokens() {
            out += &fx - self.evaluate(ctx, &ctx.mul_token(x, t))?;
        }
        Ok(out / (2.0 * ctx.degree() as f64))
    }
}

/// `T(v) = (v + (1/#S) sum_s rho(s) v) / 2`.
pub(crate) fn averaged(action: &AffineAction, v: &Vector) -> Vector {
    let maps = action.generator_maps();
    let mut mean = Vector::zeros(v.len());
    for m in maps {
        mean += m.apply(v);
    }
    mean /= maps.len() as f64;
    (v + mean) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn barycenter_examples() {
        let p = barycenter(&[(1.0, Vector::from_vec(vec![2.0, 3.0]))]).unwrap();
        assert_eq!(p, Vector::from_vec(vec![2.0, 3.0]));
        let p = barycenter(&[
            (0.5, Vector::from_vec(vec![0.0, 0.0])),
            (0.5, Vector::from_vec(vec![2.0, 0.0])),
        ])
        .unwrap();
        assert_eq!(p, Vector::from_vec(vec![1.0, 0.0]));
        let p = barycenter(&[(0.25, v1(1.0)), (0.25, v1(3.0)), (0.5, v1(0.0))]).unwrap();
        assert_relative_eq!(p[0], 1.0);
        assert_eq!(barycenter(&[]), Err(HarmonicError::EmptyMeasure));
        assert!(matches!(
            barycenter(&[(0.5, v1(1.0))]),
            Err(HarmonicError::BadWeights(_))
        ));
        assert!(barycenter(&[(1.5, v1(1.0)), (-0.5, v1(0.0))]).is_err());
    }

    #[test]
    fn local_energy_of_translation() {
        let (ctx, act) = fixtures::z_translation();
        let f = EquivariantMap::new(&act, v1(0.0)).unwrap();
        assert_relative_eq!(f.local_energy(&ctx, &ctx.identity()).unwrap(), 0.5);
        let a = ctx.parse_element("g0").unwrap();
        assert_relative_eq!(f.local_energy(&ctx, &a).unwrap(), 0.5);
    }

    #[test]
    fn constant_map_has_zero_energy() {
        let (ctx, act) = fixtures::rotation_quarter();
        let f = EquivariantMap::new(&act, Vector::from_vec(vec![0.5, 0.5])).unwrap();
        assert!(f.is_constant(1e-12));
        assert!(f.local_energy(&ctx, &ctx.identity()).unwrap() < 1e-30);
        assert!(f.n_step_energy(&ctx, &ctx.identity(), 4).unwrap() < 1e-30);
    }

    #[test]
    fn n_step_energy_of_translation_is_half_variance() {
        let (ctx, act) = fixtures::z_translation();
        let f = EquivariantMap::new(&act, v1(0.0)).unwrap();
        let e = ctx.identity();
        assert_eq!(f.n_step_energy(&ctx, &e, 0).unwrap(), 0.0);
        assert_eq!(
            f.n_step_energy(&ctx, &e, 1).unwrap(),
            f.local_energy(&ctx, &e).unwrap()
        );
        for n in 1..=20 {
            let e_n = f.n_step_energy(&ctx, &e, n).unwrap();
            assert!((e_n - n as f64 / 2.0).abs() <= 1e-9, "n={n}: {e_n}");
        }
    }

    #[test]
    fn moment_route_matches_convolution() {
        let (ctx, act) = fixtures::nonisometric();
        let f = EquivariantMap::new(&act, v1(0.3)).unwrap();
        for x in ["e", "g0", "g1^-1 g0"] {
            let x = ctx.parse_element(x).unwrap();
            for n in 0..6 {
                let a = f.n_step_energy_with(&ctx, &x, n, EnergyMethod::Convolution).unwrap();
                let b = f.n_step_energy_with(&ctx, &x, n, EnergyMethod::Moments).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn averaging_examples() {
        let (_, act) = fixtures::z_translation();
        let f = EquivariantMap::new(&act, v1(0.0)).unwrap();
        assert_relative_eq!(f.averaged_base()[0], 0.0);

        let ctx = GroupContext::free(1).unwrap();
        let act = AffineAction::new(&ctx, 1, vec![(Matrix::identity(1, 1), v1(2.0))], 1.0, 0.0)
            .unwrap();
        let f = EquivariantMap::new(&act, v1(0.7)).unwrap();
        assert_relative_eq!(f.averaged_base()[0], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn laplacian_examples() {
        let ctx = GroupContext::free(1).unwrap();
        let act = AffineAction::new(&ctx, 1, vec![(Matrix::from_element(1, 1, 2.0), v1(0.0))], 1.0, 0.0)
            .unwrap();
        let f = EquivariantMap::new(&act, v1(1.0)).unwrap();
        let e = ctx.identity();
        assert_relative_eq!(f.laplacian(&ctx, &e).unwrap()[0], -0.125, epsilon = 1e-15);
        for x in ["e", "g0", "g0 g0", "g0^-1"] {
            let x = ctx.parse_element(x).unwrap();
            let a = f.laplacian(&ctx, &x).unwrap();
            let b = f.laplacian_direct(&ctx, &x).unwrap();
            assert!((a - b).amax() < 1e-12);
        }

        let (ctx, act) = fixtures::z_translation();
        let f = EquivariantMap::new(&act, v1(0.0)).unwrap();
        for x in ["e", "g0", "g0^-1 g0^-1"] {
            let x = ctx.parse_element(x).unwrap();
            assert_eq!(f.laplacian_direct(&ctx, &x).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn dimension_checked() {
        let (_, act) = fixtures::z_translation();
        assert!(EquivariantMap::new(&act, Vector::zeros(2)).is_err());
    }
}
