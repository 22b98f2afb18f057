use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{sample_labelling, GModelError, LabelledGraph};
use crate::graph::Graph;
use crate::group::{Element, GroupContext, WalkMeasure, Word};
use crate::rng::derive_seed;

/// Fits with a total-variation residual above this are flagged degenerate.
pub const DEGENERATE_FIT_TV: f64 = 0.05;

const FISTA_MAX_ITER: usize = 200_000;
const FISTA_STEP_TOL: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct MixtureFit {
    pub n: usize,
    pub samples: usize,
    /// `w_l` for `0 <= l <= n`.
    pub weights: Vec<f64>,
    /// TV distance between `sum_l w_l mu_X^l` and the Monte-Carlo expectation.
    pub residual_tv: f64,
    /// `sum_{sqrt(n) < l <= n} w_l`.
    pub tail_mass: f64,
    pub degenerate: bool,
    /// Monte-Carlo estimate of the expected pushforward walk at `e`.
    pub expectation: WalkMeasure,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub samples: usize,
    /// Fraction of labellings with `mu_α <= 2 mu_bar` pointwise.
    pub fraction_upper: f64,
    /// Fraction with `mu_α^n >= mu_bar^n / 2` on the support of `mu_bar^n`.
    pub fraction_lower: f64,
    pub fraction_both: f64,
    /// `max mu_α / (2 mu_bar)`; the upper bound holds when this is `<= 1`.
    pub worst_upper_ratio: f64,
    /// `min mu_α^n / (mu_bar^n / 2)`; the lower bound holds when this is `>= 1`.
    pub worst_lower_ratio: f64,
}

/// Pushforward walks at `e` for the labellings `derive_seed(seed, i)`, in
/// index order, one per requested length.
fn sampled_walks(
    g: &Graph,
    m: usize,
    lengths: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<WalkMeasure>>, GModelError> {
    if m == 0 {
        return Err(crate::group::GroupError::ZeroRank.into());
    }
    if samples == 0 {
        return Err(GModelError::InvalidParameter("samples must be at least 1".into()));
    }
    if !g.is_connected() {
        return Err(crate::graph::GraphError::Disconnected.into());
    }
    let girth = g.girth().unwrap_or(usize::MAX);
    if let Some(&n) = lengths.iter().find(|&&n| 2 * n >= girth) {
        return Err(GModelError::GirthBound { n, girth });
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let alpha = sample_labelling(g, m, derive_seed(seed, i as u64))?;
            let lg = LabelledGraph::with_girth(g, &alpha, girth);
            lengths
                .iter()
                .map(|&n| lg.pushforward_walk(&Word::identity(), n))
                .collect()
        })
        .collect()
}

fn average(walks: &[&WalkMeasure], basepoint: Element) -> WalkMeasure {
    let mut masses: BTreeMap<Element, f64> = BTreeMap::new();
    for w in walks {
        for (g, p) in w.iter() {
            *masses.entry(g.clone()).or_insert(0.0) += p;
        }
    }
    let k = walks.len() as f64;
    masses.values_mut().for_each(|p| *p /= k);
    WalkMeasure::from_masses(basepoint, masses)
}

/// Euclidean projection onto `{w >= 0, sum w = 1}`.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// `argmin_{w in simplex} || sum_l w_l columns[l] - target ||^2`, by
/// accelerated projected gradient on the normal equations.
pub fn simplex_least_squares(columns: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let k = columns.len();
    assert!(k > 0, "at least one column");
    let gram: Vec<Vec<f64>> = columns
        .iter()
        .map(|a| columns.iter().map(|b| dot(a, b)).collect())
        .collect();
    let rhs: Vec<f64> = columns.iter().map(|a| dot(a, target)).collect();
    let lipschitz = {
        let m = nalgebra::DMatrix::from_fn(k, k, |i, j| gram[i][j]);
        nalgebra::SymmetricEigen::new(m).eigenvalues.max().max(f64::MIN_POSITIVE)
    };
    let grad = |w: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| dot(&gram[i], w) - rhs[i])
            .collect()
    };
    let mut w = vec![1.0 / k as f64; k];
    let mut y = w.clone();
    let mut t = 1.0f64;
    for _ in 0..FISTA_MAX_ITER {
        let g = grad(&y);
        let next = project_simplex(&y.iter().zip(&g).map(|(a, b)| a - b / lipschitz).collect::<Vec<_>>());
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let step: f64 = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        y = next
            .iter()
            .zip(&w)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        w = next;
        t = t_next;
        if step < FISTA_STEP_TOL {
            break;
        }
    }
    w
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits the expected pushforward walk `mu_bar^n` at `e`, estimated from
/// `samples` uniform labellings, as a convex combination of the free-group
/// walks `mu_X^l`, `0 <= l <= n`.
pub fn fit_mixture(
    g: &Graph,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<MixtureFit, GModelError> {
    let walks = sampled_walks(g, m, &[n], samples, seed)?;
    let ctx = GroupContext::free(m)?;
    let refs: Vec<&WalkMeasure> = walks.iter().map(|w| &w[0]).collect();
    let expectation = average(&refs, ctx.identity());

    let basis: Vec<WalkMeasure> = (0..=n)
        .map(|l| ctx.walk_convolution(l))
        .collect::<Result<_, _>>()?;
    let mut support: Vec<&Element> = expectation.masses().keys().collect();
    for b in &basis {
        support.extend(b.masses().keys());
    }
    support.sort();
    support.dedup();
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| support.iter().map(|g| b.mass(g)).collect())
        .collect();
    let target: Vec<f64> = support.iter().map(|g| expectation.mass(g)).collect();
    let weights = simplex_least_squares(&columns, &target);

    let residual_tv = 0.5
        * (0..support.len())
            .map(|i| {
                let fitted: f64 = weights.iter().zip(&columns).map(|(w, c)| w * c[i]).sum();
                (fitted - target[i]).abs()
            })
            .sum::<f64>();
    let root = (n as f64).sqrt();
    let tail_mass = weights
        .iter()
        .enumerate()
        .filter(|&(l, _)| l as f64 > root)
        .map(|(_, w)| w)
        .sum();
    Ok(MixtureFit {
        n,
        samples,
        weights,
        residual_tv,
        tail_mass,
        degenerate: residual_tv > DEGENERATE_FIT_TV,
        expectation,
    })
}

/// For each sampled labelling, checks `mu_α <= 2 mu_bar` and
/// `mu_α^n >= mu_bar^n / 2` against the Monte-Carlo expectations over the
/// same samples. With `n = 0` both checks use the zero-step walk.
pub fn concentration_experiment(
    g: &Graph,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationReport, GModelError> {
    let one = n.min(1);
    let walks = sampled_walks(g, m, &[one, n], samples, seed)?;
    let ctx = GroupContext::free(m)?;
    let upper_refs: Vec<&WalkMeasure> = walks.iter().map(|w| &w[0]).collect();
    let lower_refs: Vec<&WalkMeasure> = walks.iter().map(|w| &w[1]).collect();
    let mean_one = average(&upper_refs, ctx.identity());
    let mean_n = average(&lower_refs, ctx.identity());

    let mut upper_ok = 0usize;
    let mut lower_ok = 0usize;
    let mut both_ok = 0usize;
    let mut worst_upper = 0.0f64;
    let mut worst_lower = f64::INFINITY;
    for w in &walks {
        let upper = w[0]
            .iter()
            .map(|(x, p)| p / (2.0 * mean_one.mass(x)))
            .fold(0.0, f64::max);
        let lower = mean_n
            .iter()
            .map(|(x, p)| w[1].mass(x) / (0.5 * p))
            .fold(f64::INFINITY, f64::min);
        worst_upper = worst_upper.max(upper);
        worst_lower = worst_lower.min(lower);
        let (u, l) = (upper <= 1.0, lower >= 1.0);
        upper_ok += u as usize;
        lower_ok += l as usize;
        both_ok += (u && l) as usize;
    }
    let k = samples as f64;
    Ok(ConcentrationReport {
        n,
        samples,
        fraction_upper: upper_ok as f64 / k,
        fraction_lower: lower_ok as f64 / k,
        fraction_both: both_ok as f64 / k,
        worst_upper_ratio: worst_upper,
        worst_lower_ratio: worst_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_regular_with_girth;

    /// Exact weights: the label of a geodesic of length `d` is `d`
    /// independent uniform tokens, i.e. a `d`-step walk on `F_m`, so `w_l`
    /// is the probability that the graph walk ends at distance `l`.
    fn distance_weights(g: &Graph, n: usize) -> Vec<f64> {
        let nu = g.stationary();
        let mut w = vec![0.0; n + 1];
        for u in 0..g.vertex_count() {
            let dist = g.bfs(u);
            let p = crate::graph::graph_walk(g, u, n).unwrap();
            for (v, &mass) in p.iter().enumerate() {
                if mass > 0.0 {
                    w[dist[v]] += nu[u] * mass;
                }
            }
        }
        w
    }

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn simplex_fit_recovers_exact_mixture() {
        let cols = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.5], vec![0.2, 0.3, 0.5]];
        let target: Vec<f64> = (0..3).map(|i| 0.1 * cols[0][i] + 0.6 * cols[1][i] + 0.3 * cols[2][i]).collect();
        let w = simplex_least_squares(&cols, &target);
        for (a, b) in w.iter().zip([0.1, 0.6, 0.3]) {
            assert!((a - b).abs() < 1e-9, "{w:?}");
        }
    }

    #[test]
    fn small_step_fits() {
        let g = random_regular_with_girth(50, 4, 6, 9).unwrap();
        let zero = fit_mixture(&g, 2, 0, 10, 1).unwrap();
        assert!((zero.weights[0] - 1.0).abs() < 1e-12);
        let one = fit_mixture(&g, 2, 1, 200, 1).unwrap();
        assert!((one.weights[1] - 1.0).abs() < 1e-9, "{:?}", one.weights);
        assert!(one.residual_tv < 0.01);
        assert!(!one.degenerate);
        assert_eq!(one.tail_mass, 0.0);
    }

    #[test]
    fn two_step_fit_matches_distance_oracle() {
        let g = random_regular_with_girth(50, 4, 6, 9).unwrap();
        let fit = fit_mixture(&g, 2, 2, 2000, 7).unwrap();
        let exact = distance_weights(&g, 2);
        assert!((exact[0] - 0.25).abs() < 1e-12 && exact[1] == 0.0);
        for (w, e) in fit.weights.iter().zip(&exact) {
            assert!((w - e).abs() < 0.02, "{:?} vs {exact:?}", fit.weights);
        }
        assert!((fit.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(fit.residual_tv < DEGENERATE_FIT_TV);
        assert_eq!(fit.tail_mass, fit.weights[2]);
        assert!(fit.expectation.is_probability(1e-12));
    }

    #[test]
    fn mixture_is_deterministic() {
        let g = random_regular_with_girth(50, 4, 6, 9).unwrap();
        let a = fit_mixture(&g, 2, 2, 50, 3).unwrap();
        let b = fit_mixture(&g, 2, 2, 50, 3).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.expectation, b.expectation);
    }

    #[test]
    fn concentration_reports() {
        let g = random_regular_with_girth(50, 4, 6, 9).unwrap();
        let zero = concentration_experiment(&g, 2, 0, 20, 1).unwrap();
        assert_eq!(zero.fraction_both, 1.0);
        let two = concentration_experiment(&g, 2, 2, 100, 1).unwrap();
        assert!((0.0..=1.0).contains(&two.fraction_both));
        assert!(two.fraction_both <= two.fraction_upper.min(two.fraction_lower));
        assert!(two.worst_upper_ratio.is_finite() && two.worst_lower_ratio.is_finite());
        assert!(matches!(
            concentration_experiment(&g, 2, 3, 10, 1),
            Err(GModelError::GirthBound { .. })
        ));
    }
}
