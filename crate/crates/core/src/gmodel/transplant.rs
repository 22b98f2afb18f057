use serde::Serialize;

use super::{GModelError, LabelledGraph};
use crate::affine::BoundKind;
use crate::group::{Element, Word};
use crate::harmonic::EquivariantMap;

/// Relative slack on the transplanted inequality, scaled by `max(1, rhs)`.
pub const TRANSPLANT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransplantReport {
    pub n: usize,
    pub x: String,
    /// `l(x)`.
    pub length: usize,
    pub lambda1: f64,
    /// Graph diameter.
    pub diameter: usize,
    pub c: f64,
    pub sigma: f64,
    /// `E_{mu_{G,α}^n}(f)(x)`.
    pub lhs: f64,
    /// `E_{mu_{G,α}}(f)(x)`.
    pub base: f64,
    /// `2 C^12 D^{4σ} l(x)^{8σ} / λ₁`.
    pub factor: f64,
    pub rhs: f64,
    pub pass: bool,
    /// Radius at which the growth bound was verified.
    pub growth_radius: usize,
    pub growth_ratio: f64,
}

fn check_action(f: &EquivariantMap, lg: &LabelledGraph) -> Result<(), GModelError> {
    let expected = 2 * lg.labelling().rank();
    let got = f.action().generator_maps().len();
    if got != expected {
        return Err(GModelError::InvalidParameter(format!(
            "action has {got} generator maps, the labelling needs F_{} with {expected}",
            lg.labelling().rank()
        )));
    }
    Ok(())
}

/// `1/2 sum ||f(x) - f(x')||^2 mu_{G,α}^n(x -> x')`.
pub fn transplanted_energy(
    f: &EquivariantMap,
    lg: &LabelledGraph,
    x: &Word,
    n: usize,
) -> Result<f64, GModelError> {
    check_action(f, lg)?;
    let ctx = lg.context();
    let walk = lg.pushforward_walk(x, n)?;
    let fx = f.evaluate(&ctx, &Element::Word(x.clone()))?;
    let mut total = 0.0;
    for (y, p) in walk.iter() {
        total += p * (&fx - f.evaluate(&ctx, y)?).norm_squared();
    }
    Ok(0.5 * total)
}

/// Evaluates both sides of
/// `E_{mu^n_{G,α}}(f)(x) <= 2 C^12 D^{4σ} l(x)^{8σ} / λ₁ E_{mu_{G,α}}(f)(x)`
/// after verifying `||A(g)|| <= C l(g)^σ` on the ball of radius
/// `max(l(x), D)`, which contains every element the bound is applied to.
/// Lengths below 1 are read as 1 in the power factors.
pub fn check_transplant_inequality(
    f: &EquivariantMap,
    lg: &LabelledGraph,
    x: &Word,
    n: usize,
) -> Result<TransplantReport, GModelError> {
    check_action(f, lg)?;
    let stats = crate::graph::stats(lg.graph())?;
    let action = f.action();
    let length = x.len();
    let radius = length.max(stats.diameter);
    let growth = action.verify_growth(&lg.context(), radius, BoundKind::WordLength)?;
    if !growth.pass {
        return Err(GModelError::GrowthUnverified {
            radius,
            ratio: growth.worst_ratio,
        });
    }
    let lhs = transplanted_energy(f, lg, x, n)?;
    let base = transplanted_energy(f, lg, x, 1)?;
    let (c, sigma) = (action.c(), action.sigma());
    let d = stats.diameter.max(1) as f64;
    let l = length.max(1) as f64;
    let factor = 2.0 * c.powi(12) * d.powf(4.0 * sigma) * l.powf(8.0 * sigma) / stats.lambda1;
    let rhs = factor * base;
    Ok(TransplantReport {
        n,
        x: x.format(lg.labelling().generators()),
        length,
        lambda1: stats.lambda1,
        diameter: stats.diameter,
        c,
        sigma,
        lhs,
        base,
        factor,
        rhs,
        pass: lhs <= rhs + TRANSPLANT_SLACK * rhs.max(1.0),
        growth_radius: radius,
        growth_ratio: growth.worst_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineAction;
    use crate::fixtures::{random_action, LinearKind};
    use crate::gmodel::{sample_labelling, SLabelling};
    use crate::graph::{check_energy_inequality, random_regular_with_girth, Graph};
    use crate::group::{GroupContext, Token};
    use crate::linalg::{Matrix, Vector};
    use crate::rng::seeded_rng;

    /// Rotation by `2π/p` with a translation: a `Z/p` action lifted to `F_1`.
    fn cyclic_rotation(p: usize, b: (f64, f64)) -> AffineAction {
        let ctx = GroupContext::free(1).unwrap();
        let th = 2.0 * std::f64::consts::PI / p as f64;
        let a = Matrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        AffineAction::new(&ctx, 2, vec![(a, Vector::from_vec(vec![b.0, b.1]))], 1.0, 0.0).unwrap()
    }

    #[test]
    fn constant_map_has_zero_energy() {
        let g = Graph::cycle(11);
        let alpha = SLabelling::new(1, vec![Token(0); 11]).unwrap();
        let lg = LabelledGraph::new(&g, &alpha).unwrap();
        // Rotation about the origin fixes it.
        let action = cyclic_rotation(11, (0.0, 0.0));
        let f = EquivariantMap::new(&action, Vector::zeros(2)).unwrap();
        let rep = check_transplant_inequality(&f, &lg, &Word::identity(), 3).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
        assert!(rep.pass);
    }

    #[test]
    fn cayley_cycle_matches_graph_inequality() {
        // C_p labelled by the generator is the Cayley graph of Z/p, so the
        // action factors through the quotient and f∘β is a map on vertices.
        let p = 11;
        let g = Graph::cycle(p);
        let alpha = SLabelling::new(1, vec![Token(0); p]).unwrap();
        let lg = LabelledGraph::new(&g, &alpha).unwrap();
        let action = cyclic_rotation(p, (1.0, 0.3));
        let f = EquivariantMap::new(&action, Vector::from_vec(vec![0.4, -0.2])).unwrap();
        let ctx = lg.context();
        let phi: Vec<Vector> = (0..p)
            .map(|v| f.evaluate(&ctx, &ctx.word(&vec![Token(0); v]).unwrap()).unwrap())
            .collect();
        let x = Word::from_letters([Token(1), Token(1)], alpha.generators());
        for n in 1..=5 {
            let rep = check_transplant_inequality(&f, &lg, &x, n).unwrap();
            let direct = check_energy_inequality(&g, &phi, n).unwrap();
            assert!((rep.lhs - direct.lhs).abs() < 1e-12, "n={n}");
            assert!((rep.rhs - direct.rhs).abs() < 1e-12);
            assert!(rep.pass);
        }
    }

    #[test]
    fn isometric_random_instances_pass() {
        let g = random_regular_with_girth(50, 4, 6, 9).unwrap();
        let ctx = GroupContext::free(2).unwrap();
        let mut rng = seeded_rng(12);
        for i in 0..20 {
            let alpha = sample_labelling(&g, 2, i).unwrap();
            let lg = LabelledGraph::new(&g, &alpha).unwrap();
            let action = random_action(&mut rng, &ctx, 3, LinearKind::Orthogonal, false).unwrap();
            let f = EquivariantMap::new(&action, Vector::from_vec(vec![0.1, 0.2, 0.3])).unwrap();
            let x = Word::from_letters([Token(0), Token(3)], alpha.generators());
            for n in 1..3 {
                let rep = check_transplant_inequality(&f, &lg, &x, n).unwrap();
                assert!(rep.pass, "{rep:?}");
                assert_eq!(rep.factor, 2.0 / rep.lambda1);
            }
        }
    }

    #[test]
    fn growth_must_hold() {
        let g = Graph::cycle(7);
        let alpha = SLabelling::new(1, vec![Token(0); 7]).unwrap();
        let lg = LabelledGraph::new(&g, &alpha).unwrap();
        let ctx = GroupContext::free(1).unwrap();
        let action = AffineAction::new(
            &ctx,
            1,
            vec![(Matrix::from_element(1, 1, 2.0), Vector::zeros(1))],
            1.0,
            0.0,
        )
        .unwrap();
        let f = EquivariantMap::new(&action, Vector::from_element(1, 1.0)).unwrap();
        assert!(matches!(
            check_transplant_inequality(&f, &lg, &Word::identity(), 1),
            Err(GModelError::GrowthUnverified { .. })
        ));
    }
}
