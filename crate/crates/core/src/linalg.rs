//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative threshold below which a singular value counts as zero.
pub const RANK_RTOL: f64 = 1e-12;

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

/// Ratio of extreme singular values; infinite for singular input.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &Matrix, b: &Vector) -> Vector {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let eps = (smax * RANK_RTOL).max(f64::MIN_POSITIVE);
    svd.solve(b, eps)
        .expect("both factors were requested")
}

/// Orthonormal basis of the kernel of `a` (columns count = `a.ncols()`).
pub fn null_space(a: &Matrix) -> Vec<Vector> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad to at least n rows so the thin SVD exposes all of V.
    let padded = if a.nrows() < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let tol = (smax * 1e-10).max(1e-12);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect()
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn max_abs(v: &Vector) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

pub fn is_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn operator_norm_examples() {
        assert_relative_eq!(operator_norm(&Matrix::identity(3, 3)), 1.0, max_relative = 1e-12);
        let d = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]);
        assert_relative_eq!(operator_norm(&d), 3.0, max_relative = 1e-12);
        // M^T M = diag(0, 4) so the singular values are 2 and 0.
        let n = Matrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert_relative_eq!(operator_norm(&n), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn lstsq_gives_min_norm_solution() {
        let a = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = lstsq(&a, &Vector::from_vec(vec![2.0]));
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let k = null_space(&a);
        assert_eq!(k.len(), 1);
        assert!((&a * &k[0]).norm() < 1e-12);
        assert!(null_space(&Matrix::identity(2, 2)).is_empty());
        assert_eq!(null_space(&Matrix::zeros(1, 3)).len(), 3);
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let ev = symmetric_eigenvalues(&m);
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-12);
    }
}
