//! Stored example actions and random action generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::affine::{ActionError, AffineAction};
use crate::group::GroupContext;
use crate::linalg::{Matrix, Vector};

fn scalar(x: f64) -> Matrix {
    Matrix::from_element(1, 1, x)
}

/// `Z = F_1` acting on `R` by `v -> v + 1`.
pub fn z_translation() -> (GroupContext, AffineAction) {
    let ctx = GroupContext::free(1).expect("rank 1");
    let act = AffineAction::new(&ctx, 1, vec![(scalar(1.0), Vector::from_element(1, 1.0))], 1.0, 0.0)
        .expect("valid fixture");
    (ctx, act)
}

/// `F_1` acting on `R^2` by a quarter turn followed by the shift `(1, 0)`;
/// the unique fixed point is `(1/2, 1/2)`.
pub fn rotation_quarter() -> (GroupContext, AffineAction) {
    let ctx = GroupContext::free(1).expect("rank 1");
    let r = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let act = AffineAction::new(&ctx, 2, vec![(r, Vector::from_vec(vec![1.0, 0.0]))], 1.0, 0.0)
        .expect("valid fixture");
    (ctx, act)
}

/// `F_2` acting on `R` by `a: v -> 3v + 1`, `b: v -> v/2 + 1`. The energy
/// minimiser at `e` is not harmonic.
pub fn nonisometric() -> (GroupContext, AffineAction) {
    let ctx = GroupContext::free(2).expect("rank 2");
    let act = AffineAction::new(
        &ctx,
        1,
        vec![
            (scalar(3.0), Vector::from_element(1, 1.0)),
            (scalar(0.5), Vector::from_element(1, 1.0)),
        ],
        1.0,
        1.0,
    )
    .expect("valid fixture");
    (ctx, act)
}

/// `F_2` acting on `R^2` by the unit translations along the two axes.
pub fn f2_translations() -> (GroupContext, AffineAction) {
    let ctx = GroupContext::free(2).expect("rank 2");
    let id = Matrix::identity(2, 2);
    let act = AffineAction::new(
        &ctx,
        2,
        vec![
            (id.clone(), Vector::from_vec(vec![1.0, 0.0])),
            (id, Vector::from_vec(vec![0.0, 1.0])),
        ],
        1.0,
        0.0,
    )
    .expect("valid fixture");
    (ctx, act)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    Matrix::from_fn(d, d, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR with sign-corrected diagonal).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let qr = gaussian_matrix(rng, d).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `U diag(s) V^T` with singular values log-uniform in
/// `[cond^{-1/2}, cond^{1/2}]`, so the condition number is at most `cond`.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, d: usize, cond: f64) -> Matrix {
    let u = random_orthogonal(rng, d);
    let v = random_orthogonal(rng, d);
    let half = 0.5 * cond.ln();
    let s = Vector::from_fn(d, |_, _| rng.gen_range(-half..=half).exp());
    u * Matrix::from_diagonal(&s) * v.transpose()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearKind {
    Orthogonal,
    /// Condition number at most the given bound.
    Invertible(u32),
}

/// A random action of a free group on `R^d`. With `fixed_point` set, the
/// translations are `b(s) = v0 - A(s) v0` for a random `v0`, which every
/// generator then fixes.
pub fn random_action<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &GroupContext,
    d: usize,
    kind: LinearKind,
    fixed_point: bool,
) -> Result<AffineAction, ActionError> {
    if !ctx.is_free() {
        return Err(ActionError::InvalidParameter(
            "random actions are only generated for free groups".into(),
        ));
    }
    let v0 = gaussian_vector(rng, d);
    let data = ctx
        .generators()
        .representatives()
        .iter()
        .map(|_| {
            let a = match kind {
                LinearKind::Orthogonal => random_orthogonal(rng, d),
                LinearKind::Invertible(c) => random_invertible(rng, d, c as f64),
            };
            let b = if fixed_point {
                &v0 - &a * &v0
            } else {
                gaussian_vector(rng, d)
            };
            (a, b)
        })
        .collect();
    let c = match kind {
        LinearKind::Orthogonal => 1.0,
        LinearKind::Invertible(c) => (c as f64).sqrt(),
    };
    AffineAction::new(ctx, d, data, c, 0.0)
}
