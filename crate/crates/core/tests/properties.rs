use hfl_core::affine::{operator_norm, AffineAction};
use hfl_core::fixtures::{random_action, LinearKind};
use hfl_core::gmodel::{
    check_transplant_inequality, sample_labelling, simplex_least_squares, LabelledGraph,
};
use hfl_core::graph::{self, graph_walk, random_regular, random_regular_with_girth, WalkTable};
use hfl_core::group::Word;
use hfl_core::harmonic::{run_flow, FlowConfig};
use hfl_core::rng::seeded_rng;
use hfl_core::spectral::{poincare_k2, LinkGraph};
use hfl_core::suite::random_weighted_link;
use hfl_core::{Element, EquivariantMap, GroupContext, Token, Vector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn letters(m: usize, max_len: usize) -> impl Strategy<Value = Vec<Token>> {
    prop::collection::vec((0..2 * m as u16).prop_map(Token), 0..=max_len)
}

fn f2() -> GroupContext {
    GroupContext::free(2).unwrap()
}

fn action(seed: u64, ctx: &GroupContext, d: usize, kind: LinearKind) -> AffineAction {
    random_action(&mut seeded_rng(seed), ctx, d, kind, false).unwrap()
}

fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
    (a - b).amax() <= tol * (1.0 + a.amax().max(b.amax()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_a_homomorphism(
        seed in any::<u64>(),
        g in letters(2, 6),
        h in letters(2, 6),
        v in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let ctx = f2();
        let act = action(seed, &ctx, 3, LinearKind::Invertible(20));
        let (g, h) = (ctx.word(&g).unwrap(), ctx.word(&h).unwrap());
        let gh = ctx.multiply(&g, &h).unwrap();
        let v = Vector::from_vec(v);
        let lhs = act.apply(&ctx, &gh, &v).unwrap();
        let rhs = act.apply(&ctx, &g, &act.apply(&ctx, &h, &v).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-9), "{lhs} vs {rhs}");
        let inv = ctx.inverse(&g).unwrap();
        let back = act.apply(&ctx, &inv, &act.apply(&ctx, &g, &v).unwrap()).unwrap();
        prop_assert!(close(&back, &v, 1e-8));
    }

    #[test]
    fn operator_norm_is_submultiplicative(
        seed in any::<u64>(),
        g in letters(2, 5),
        h in letters(2, 5),
    ) {
        let ctx = f2();
        let act = action(seed, &ctx, 4, LinearKind::Invertible(50));
        let (g, h) = (ctx.word(&g).unwrap(), ctx.word(&h).unwrap());
        let gh = ctx.multiply(&g, &h).unwrap();
        let n = |x: &Element| operator_norm(&act.linear_part(&ctx, x).unwrap());
        prop_assert!(n(&gh) <= n(&g) * n(&h) * (1.0 + 1e-10));
    }

    #[test]
    fn renorm_estimate_grows_with_radius(seed in any::<u64>(), v in prop::collection::vec(-3.0..3.0f64, 2)) {
        let ctx = f2();
        let act = action(seed, &ctx, 2, LinearKind::Invertible(5));
        let v = Vector::from_vec(v);
        let mut last = v.norm();
        for r in 0..=3 {
            let est = act.renorm_estimate(&ctx, &v, r).unwrap();
            prop_assert!(est.value >= last);
            last = est.value;
        }
    }

    #[test]
    fn conjugacy_length_at_most_word_length(g in letters(2, 10)) {
        let ctx = f2();
        let g = ctx.word(&g).unwrap();
        let l = ctx.word_length(&g).unwrap();
        let c = ctx.conjugacy_length(&g).unwrap();
        prop_assert!(c <= l);
        let w = g.as_word().unwrap();
        if w.is_cyclically_reduced(ctx.generators()) {
            prop_assert_eq!(c, l);
        }
        // Conjugation does not change it.
        let x = ctx.word(&[Token(1), Token(2)]).unwrap();
        let conj = ctx
            .multiply(&ctx.multiply(&x, &g).unwrap(), &ctx.inverse(&x).unwrap())
            .unwrap();
        prop_assert_eq!(ctx.conjugacy_length(&conj).unwrap(), c);
    }

    #[test]
    fn reduced_words_multiply_associatively(a in letters(2, 6), b in letters(2, 6), c in letters(2, 6)) {
        let ctx = f2();
        let gens = ctx.generators();
        let (a, b, c) = (
            Word::from_letters(a, gens),
            Word::from_letters(b, gens),
            Word::from_letters(c, gens),
        );
        prop_assert!(a.is_reduced(gens));
        prop_assert_eq!(a.mul(&b, gens).mul(&c, gens), a.mul(&b.mul(&c, gens), gens));
        prop_assert!(a.mul(&a.inverse(gens), gens).is_identity());
    }

    #[test]
    fn walk_convolution_is_a_probability(m in 1usize..=3, n in 0usize..=4) {
        let ctx = GroupContext::free(m).unwrap();
        let walk = ctx.walk_convolution(n).unwrap();
        prop_assert!((walk.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(walk.radius(&ctx).unwrap() <= n);
        // Symmetric generating set: mu^n(g) = mu^n(g^-1).
        for (g, p) in walk.iter() {
            prop_assert!((walk.mass(&ctx.inverse(g).unwrap()) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn graph_walk_preserves_stationary_measure(seed in any::<u64>(), n in 0usize..6) {
        let g = random_regular(20, 3, seed).unwrap();
        let nu = g.stationary();
        let mut pushed = vec![0.0; g.vertex_count()];
        for u in 0..g.vertex_count() {
            let row = graph_walk(&g, u, n).unwrap();
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (v, p) in row.iter().enumerate() {
                pushed[v] += nu[u] * p;
            }
        }
        for (a, b) in pushed.iter().zip(&nu) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn isometric_flow_is_monotone(seed in any::<u64>(), v0 in prop::collection::vec(-2.0..2.0f64, 3)) {
        let ctx = f2();
        let act = action(seed, &ctx, 3, LinearKind::Orthogonal);
        let config = FlowConfig { radius: 2, cap: 200, ..FlowConfig::default() };
        let trace = run_flow(&act, &ctx, &Vector::from_vec(v0), config).unwrap();
        prop_assert!(trace.violations.is_empty(), "{:?}", trace.violations.first());
        prop_assert!(trace.max_excess <= 1e-10);
    }

    #[test]
    fn graph_energy_inequality_holds(seed in any::<u64>(), d in 1usize..=3) {
        let g = random_regular(30, 4, seed).unwrap();
        prop_assume!(g.is_connected());
        let lambda1 = graph::stats(&g).unwrap().lambda1;
        let mut rng = seeded_rng(seed ^ 0x5a5a);
        let phi: Vec<Vector> = (0..30)
            .map(|_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let energies = WalkTable::new(&g, 8).unwrap().energies(&phi).unwrap();
        for e in &energies[1..] {
            prop_assert!(*e <= 2.0 / lambda1 * energies[1] * (1.0 + 1e-10));
        }
    }

    #[test]
    fn beta_reverses_along_geodesics(seed in any::<u64>(), u in 0usize..50, v in 0usize..50) {
        let g = random_regular_with_girth(50, 3, 7, 17).unwrap();
        let alpha = sample_labelling(&g, 2, seed).unwrap();
        let lg = LabelledGraph::new(&g, &alpha).unwrap();
        let e = Word::identity();
        let dist = g.bfs(u)[v];
        prop_assume!(2 * dist < lg.girth());
        let forward = lg.beta(u, &e, v).unwrap();
        let backward = lg.beta(v, &e, u).unwrap();
        prop_assert_eq!(forward.inverse(alpha.generators()), backward);
        prop_assert!(forward.len() <= dist);
    }

    #[test]
    fn pushforward_is_a_probability(seed in any::<u64>(), n in 0usize..=2) {
        let g = random_regular_with_girth(40, 3, 6, 5).unwrap();
        let alpha = sample_labelling(&g, 2, seed).unwrap();
        let lg = LabelledGraph::new(&g, &alpha).unwrap();
        let x = Word::from_letters([Token(0)], alpha.generators());
        let walk = lg.pushforward_walk(&x, n).unwrap();
        prop_assert!((walk.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(walk.iter().all(|(_, p)| p >= 0.0));
    }

    #[test]
    fn simplex_fit_returns_weights(seed in any::<u64>(), k in 1usize..6, len in 2usize..12) {
        let mut rng = seeded_rng(seed);
        let columns: Vec<Vec<f64>> = (0..k).map(|_| (0..len).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let target: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w = simplex_least_squares(&columns, &target);
        prop_assert_eq!(w.len(), k);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // No vertex of the simplex does better.
        let resid = |w: &[f64]| -> f64 {
            (0..len)
                .map(|i| {
                    let fit: f64 = columns.iter().zip(w).map(|(c, x)| c[i] * x).sum();
                    (fit - target[i]).powi(2)
                })
                .sum()
        };
        let best = resid(&w);
        for j in 0..k {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            prop_assert!(best <= resid(&e) + 1e-9);
        }
    }

    #[test]
    fn kappa2_ignores_scale_and_labels(seed in any::<u64>(), n in 3usize..9, scale in 0.01..100.0f64) {
        let mut rng = seeded_rng(seed);
        let link = random_weighted_link(&mut rng, n);
        let k2 = poincare_k2(&link).unwrap().kappa2;
        let scaled = LinkGraph::from_edges(
            link.vertices.clone(),
            link.edges.iter().map(|&(s, t, w)| (s, t, w * scale)).collect(),
        )
        .unwrap();
        prop_assert!((poincare_k2(&scaled).unwrap().kappa2 - k2).abs() < 1e-9 * k2);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let relabelled = LinkGraph::from_edges(
            (0..n).map(|i| format!("v{i}")).collect(),
            link.edges.iter().map(|&(s, t, w)| (perm[s], perm[t], w)).collect(),
        )
        .unwrap();
        prop_assert!((poincare_k2(&relabelled).unwrap().kappa2 - k2).abs() < 1e-9 * k2);
    }

    #[test]
    fn vector_rayleigh_quotients_bounded_by_kappa2(seed in any::<u64>(), n in 3usize..9, d in 1usize..=4) {
        let mut rng = seeded_rng(seed);
        let link = random_weighted_link(&mut rng, n);
        let k2 = poincare_k2(&link).unwrap().kappa2;
        let f: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let m = link.vertex_weights();
        let total: f64 = m.iter().sum();
        let mut num = 0.0;
        for c in 0..d {
            let mean: f64 = (0..n).map(|s| m[s] * f[s][c]).sum::<f64>() / total;
            num += (0..n).map(|s| m[s] * (f[s][c] - mean).powi(2)).sum::<f64>();
        }
        let den: f64 = link
            .edges
            .iter()
            .map(|&(s, t, w)| w * (0..d).map(|c| (f[s][c] - f[t][c]).powi(2)).sum::<f64>())
            .sum();
        prop_assert!(num / den <= k2 * k2 * (1.0 + 1e-9));
        let scalar: Vec<f64> = f.iter().map(|x| x[0]).collect();
        if let Some(q) = link.rayleigh_quotient(&scalar) {
            prop_assert!(q <= k2 * k2 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn transplant_holds_for_isometric_actions(seed in any::<u64>(), n in 1usize..=2, x in letters(2, 2)) {
        let g = random_regular_with_girth(40, 4, 6, 21).unwrap();
        let alpha = sample_labelling(&g, 2, seed).unwrap();
        let lg = LabelledGraph::new(&g, &alpha).unwrap();
        let ctx = lg.context();
        let act = action(seed, &ctx, 2, LinearKind::Orthogonal);
        let f = EquivariantMap::new(&act, Vector::from_vec(vec![0.5, -0.25])).unwrap();
        let x = Word::from_letters(x, alpha.generators());
        let rep = check_transplant_inequality(&f, &lg, &x, n).unwrap();
        prop_assert!(rep.pass, "{rep:?}");
    }
}
