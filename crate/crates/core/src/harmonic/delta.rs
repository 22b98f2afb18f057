use super::HarmonicError;
use crate::affine::AffineAction;
use crate::linalg::{self, Matrix, Vector};

/// `δ(v) = max_s ||rho(s) v - v||`.
pub fn delta(action: &AffineAction, v: &Vector) -> f64 {
    action
        .generator_maps()
        .iter()
        .map(|m| (m.apply(v) - v).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// The terminal point: no candidate within `j δ(v)` halves `δ`.
    pub v: Vector,
    pub delta: f64,
    pub moves: usize,
    /// `δ` after each accepted move, starting with `δ(v0)`.
    pub history: Vec<f64>,
}

/// Looks for a `j`-near-critical point: starting at `v0`, repeatedly moves to
/// some `w` with `||w - v|| <= j δ(v)` and `δ(w) < δ(v)/2`, and stops when no
/// candidate qualifies. Candidates are the least-squares minimiser of the
/// total displacement clipped to the allowed radius, points along that
/// segment, and coordinate probes.
pub fn near_critical_search(
    action: &AffineAction,
    v0: &Vector,
    j: f64,
    cap: usize,
) -> Result<SearchResult, HarmonicError> {
    if !(j >= 1.0) {
        return Err(HarmonicError::InvalidParameter(format!("j must be at least 1, got {j}")));
    }
    if v0.len() != action.dim() {
        return Err(HarmonicError::DimensionMismatch {
            expected: action.dim(),
            got: v0.len(),
        });
    }
    let target = displacement_minimiser(action);
    let mut v = v0.clone();
    let mut dv = delta(action, &v);
    let mut history = vec![dv];
    let mut moves = 0;
    while dv > 0.0 {
        let radius = j * dv;
        let mut best: Option<(f64, Vector)> = None;
        for w in candidates(&v, &target, radius) {
            let dw = delta(action, &w);
            if dw < dv / 2.0 && best.as_ref().map_or(true, |(b, _)| dw < *b) {
                best = Some((dw, w));
            }
        }
        let Some((dw, w)) = best else { break };
        if moves == cap {
            return Err(HarmonicError::CapReached { moves, delta: dv });
        }
        moves += 1;
        v = w;
        dv = dw;
        history.push(dv);
    }
    Ok(SearchResult {
        v,
        delta: dv,
        moves,
        history,
    })
}

/// Minimiser of `sum_s ||(A(s) - I) w + b(s)||^2`.
fn displacement_minimiser(action: &AffineAction) -> Vector {
    let d = action.dim();
    let maps = action.generator_maps();
    let mut a = Matrix::zeros(d * maps.len(), d);
    let mut b = Vector::zeros(d * maps.len());
    for (k, m) in maps.iter().enumerate() {
        a.view_mut((k * d, 0), (d, d))
            .copy_from(&(&m.linear - Matrix::identity(d, d)));
        b.rows_mut(k * d, d).copy_from(&(-&m.translation));
    }
    linalg::lstsq(&a, &b)
}

fn candidates(v: &Vector, target: &Vector, radius: f64) -> Vec<Vector> {
    let mut out = Vec::new();
    let step = target - v;
    let len = step.norm();
    if len > 0.0 {
        let clip = (radius / len).min(1.0);
        for frac in [1.0, 0.5, 0.25, 0.125] {
            out.push(v + &step * (clip * frac));
        }
    }
    for k in 0..v.len() {
        for scale in [1.0, -1.0, 0.5, -0.5] {
            let mut w = v.clone();
            w[k] += scale * radius;
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::GroupContext;

    fn scalar_action(a: f64, b: f64) -> AffineAction {
        let ctx = GroupContext::free(1).unwrap();
        AffineAction::new(
            &ctx,
            1,
            vec![(Matrix::from_element(1, 1, a), Vector::from_element(1, b))],
            1.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn fixed_point_stops_immediately() {
        let (_, act) = fixtures::rotation_quarter();
        let v = Vector::from_vec(vec![0.5, 0.5]);
        assert!(delta(&act, &v) < 1e-15);
        let r = near_critical_search(&act, &v, 2.0, 10).unwrap();
        assert_eq!(r.moves, 0);
    }

    #[test]
    fn translation_has_constant_delta() {
        let act = scalar_action(1.0, 1.0);
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(delta(&act, &Vector::from_element(1, x)), 1.0);
        }
        let v0 = Vector::from_element(1, 4.0);
        let r = near_critical_search(&act, &v0, 3.0, 10).unwrap();
        assert_eq!(r.moves, 0);
        assert_eq!(r.v, v0);
    }

    #[test]
    fn contraction_reaches_the_fixed_point() {
        let act = scalar_action(0.5, 0.0);
        // δ(v) = max(|v/2 - v|, |2v - v|) = |v|.
        assert_eq!(delta(&act, &Vector::from_element(1, 8.0)), 8.0);
        let r = near_critical_search(&act, &Vector::from_element(1, 8.0), 4.0, 5).unwrap();
        assert!(r.v[0].abs() <= 8.0 / 32.0);
        assert!(r.history.windows(2).all(|w| w[1] < w[0] / 2.0));
    }

    #[test]
    fn radius_limits_each_move() {
        // With j = 1 the radius equals |v|, so 0 is still reachable; with
        // j < 1 the search is rejected up front.
        let act = scalar_action(0.5, 0.0);
        let r = near_critical_search(&act, &Vector::from_element(1, 8.0), 1.0, 5).unwrap();
        assert!(r.delta < 8.0);
        assert!(near_critical_search(&act, &Vector::from_element(1, 8.0), 0.5, 5).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        // A move is available from 10, so a zero cap must error.
        let act = scalar_action(0.5, 1.0);
        let err = near_critical_search(&act, &Vector::from_element(1, 10.0), 1.0, 0).unwrap_err();
        assert!(matches!(err, HarmonicError::CapReached { moves: 0, .. }));
    }
}
