use super::{averaged, HarmonicError};
use crate::affine::AffineAction;
use crate::group::{Element, GroupContext};
use crate::linalg::{self, Matrix, Vector};

/// Residual threshold for accepting a linear solve.
pub const SOLVE_TOL: f64 = 1e-8;

/// Solutions of `v = T(v)`, i.e. `(I - M) v = c` with `M`, `c` the generator
/// means of `A` and `b`.
#[derive(Clone, Debug, PartialEq)]
pub enum HarmonicSolution {
    Unique(Vector),
    /// `particular + span(kernel)`.
    Family {
        particular: Vector,
        kernel: Vec<Vector>,
    },
    NoSolution {
        residual: f64,
    },
}

impl HarmonicSolution {
    pub fn particular(&self) -> Option<&Vector> {
        match self {
            HarmonicSolution::Unique(v) => Some(v),
            HarmonicSolution::Family { particular, .. } => Some(particular),
            HarmonicSolution::NoSolution { .. } => None,
        }
    }

    /// Whether `v` lies in the solution set, up to `tol` per coordinate.
    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        match self {
            HarmonicSolution::Unique(p) => (v - p).amax() <= tol,
            HarmonicSolution::Family { particular, kernel } => {
                let mut r = v - particular;
                for k in kernel {
                    let c = r.dot(k);
                    r -= k * c;
                }
                r.amax() <= tol
            }
            HarmonicSolution::NoSolution { .. } => false,
        }
    }
}

pub fn solve_harmonic(action: &AffineAction, _ctx: &GroupContext) -> HarmonicSolution {
    let mean = action.mean_map();
    let d = action.dim();
    let lhs = Matrix::identity(d, d) - &mean.linear;
    let v = linalg::lstsq(&lhs, &mean.translation);
    let residual = linalg::max_abs(&(&lhs * &v - &mean.translation));
    if !(residual <= SOLVE_TOL) {
        return HarmonicSolution::NoSolution { residual };
    }
    let kernel = linalg::null_space(&lhs);
    if kernel.is_empty() {
        HarmonicSolution::Unique(v)
    } else {
        HarmonicSolution::Family {
            particular: v,
            kernel,
        }
    }
}

/// A common fixed point of all generator maps, from the stacked system
/// `(A(s) - I) v = -b(s)`.
pub fn find_fixed_point(action: &AffineAction, _ctx: &GroupContext) -> Option<Vector> {
    let d = action.dim();
    let maps = action.generator_maps();
    let mut a = Matrix::zeros(d * maps.len(), d);
    let mut b = Vector::zeros(d * maps.len());
    for (k, m) in maps.iter().enumerate() {
        a.view_mut((k * d, 0), (d, d))
            .copy_from(&(&m.linear - Matrix::identity(d, d)));
        b.rows_mut(k * d, d).copy_from(&(-&m.translation));
    }
    let v = linalg::lstsq(&a, &b);
    let residual = linalg::max_abs(&(&a * &v - &b));
    (residual <= SOLVE_TOL).then_some(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinEnergy {
    pub v: Vector,
    /// `E(f_v)(x)` at the minimiser.
    pub energy: f64,
    /// `||Δf_v(e)||`.
    pub harmonic_residual: f64,
}

/// Minimises the convex quadratic `v -> E(f_v)(x)`, where
/// `f_v(xs) - f_v(x) = A(x)((A(s) - I) v + b(s))`; the minimum-norm
/// minimiser is returned when the Hessian is singular.
pub fn min_energy_vector(
    action: &AffineAction,
    ctx: &GroupContext,
    x: &Element,
) -> Result<MinEnergy, HarmonicError> {
    let d = action.dim();
    let ax = action.linear_part(ctx, x)?;
    let maps = action.generator_maps();
    let mut a = Matrix::zeros(d * maps.len(), d);
    let mut b = Vector::zeros(d * maps.len());
    for (k, m) in maps.iter().enumerate() {
        a.view_mut((k * d, 0), (d, d))
            .copy_from(&(&ax * (&m.linear - Matrix::identity(d, d))));
        b.rows_mut(k * d, d).copy_from(&(-(&ax * &m.translation)));
    }
    let v = linalg::lstsq(&a, &b);
    let energy = (&a * &v - &b).norm_squared() / (2.0 * maps.len() as f64);
    let harmonic_residual = (&v - averaged(action, &v)).norm();
    Ok(MinEnergy {
        v,
        energy,
        harmonic_residual,
    })
}
