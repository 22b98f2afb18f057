//! The acceptance battery. Each criterion draws its randomness from
//! `derive_seed(seed, id)` and reports metrics next to its verdict.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use crate::fixtures::{gaussian_vector, nonisometric, random_action, z_translation, LinearKind};
use crate::gmodel::{fit_mixture, sample_labelling, GModelError, LabelledGraph};
use crate::graph::{random_regular, random_regular_with_girth, stats, Graph, WalkTable};
use crate::group::{GroupContext, Token, Word};
use crate::harmonic::{
    delta, find_fixed_point, min_energy_vector, run_flow, solve_harmonic, EquivariantMap,
    FlowConfig, HarmonicSolution, StabilityVerdict, HARMONIC_TOL,
};
use crate::linalg::{self, Matrix, Vector};
use crate::rng::{derive_seed, item_rng};
use crate::spectral::{nowak_criterion, poincare_k2, LinkGraph};
use crate::{AffineAction, Error};

/// Failure messages kept per criterion.
const MAX_FAILURES: usize = 10;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "z-translation oracle"),
    (2, "monotonicity suite"),
    (3, "spectral energy inequality"),
    (4, "isometric minimizer harmonicity"),
    (5, "fixed-point and flow consistency"),
    (6, "pushforward soundness"),
    (7, "mixture fit"),
    (8, "kappa2 correctness"),
    (9, "conjugacy-length oracle"),
    (10, "determinism"),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub params: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl CriterionResult {
    fn new(id: u8) -> Self {
        let name = CRITERIA[id as usize - 1].1.to_string();
        CriterionResult {
            id,
            name,
            pass: true,
            params: BTreeMap::new(),
            metrics: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        self.params
            .insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    fn fail(&mut self, message: String) {
        self.pass = false;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(message);
        }
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.fail(message());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionResult, Error> {
    let s = derive_seed(seed, id as u64);
    match id {
        1 => z_translation_oracle(),
        2 => monotonicity_suite(s),
        3 => spectral_energy_inequality(s),
        4 => isometric_minimizers(s),
        5 => fixed_point_flow_consistency(s),
        6 => pushforward_soundness(s),
        7 => mixture_fit(s),
        8 => kappa2_correctness(s),
        9 => conjugacy_oracle(s),
        10 => determinism(seed),
        _ => Err(crate::GModelError::InvalidParameter(format!("no criterion {id}")).into()),
    }
}

/// Criteria 1 to 9.
pub fn run_suite(seed: u64) -> Result<SuiteReport, Error> {
    let criteria = (1..=9)
        .map(|id| run_criterion(id, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport {
        seed,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    })
}

/// Criteria 1 to 9 twice, with criterion 10 comparing the two reports.
pub fn run_full_suite(seed: u64) -> Result<SuiteReport, Error> {
    let first = run_suite(seed)?;
    let second = run_suite(seed)?;
    let mut report = first.clone();
    report.criteria.push(compare_runs(&first, &second));
    report.pass = report.criteria.iter().all(|c| c.pass);
    Ok(report)
}

fn compare_runs(a: &SuiteReport, b: &SuiteReport) -> CriterionResult {
    let mut r = CriterionResult::new(10);
    let (ja, jb) = (a.to_json(), b.to_json());
    r.param("seed", a.seed);
    r.metric("report_bytes", ja.len() as f64);
    r.check(ja == jb, || {
        let at = ja.bytes().zip(jb.bytes()).position(|(x, y)| x != y).unwrap_or(ja.len().min(jb.len()));
        format!("reports differ at byte {at}")
    });
    r
}

fn determinism(seed: u64) -> Result<CriterionResult, Error> {
    Ok(compare_runs(&run_suite(seed)?, &run_suite(seed)?))
}

fn z_translation_oracle() -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(1);
    let (ctx, action) = z_translation();
    // f(a^k) = k.
    let f = EquivariantMap::new(&action, Vector::zeros(1))?;
    let e = ctx.identity();
    let lap = f.laplacian_at_identity().norm();
    let local = f.local_energy(&ctx, &e)?;
    let mut worst = 0.0f64;
    for n in 1..=20 {
        let en = f.n_step_energy(&ctx, &e, n)?;
        let err = (en - n as f64 * local).abs();
        worst = worst.max(err);
        r.check(err <= 1e-9, || format!("n={n}: E^(n) = {en}, n E = {}", n as f64 * local));
    }
    r.check(lap <= 1e-12, || format!("|Δf(e)| = {lap}"));
    r.param("n_max", 20);
    r.metric("laplacian_norm", lap);
    r.metric("local_energy", local);
    r.metric("max_abs_error", worst);
    Ok(r)
}

fn monotonicity_suite(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(2);
    let config = FlowConfig {
        radius: 4,
        cap: 20,
        tol: HARMONIC_TOL,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut flagged = 0usize;
    let mut checks = 0usize;
    for i in 0..100u64 {
        let mut rng = item_rng(seed, i);
        let ctx = GroupContext::free(2 + (i % 2) as usize)?;
        let d = rng.gen_range(1..=8);
        let kind = if i % 3 == 0 {
            LinearKind::Orthogonal
        } else {
            LinearKind::Invertible(4)
        };
        let action = random_action(&mut rng, &ctx, d, kind, i % 4 == 0)?;
        let v0 = gaussian_vector(&mut rng, d);
        let trace = run_flow(&action, &ctx, &v0, config)?;
        checks += trace.steps();
        flagged += trace.violations.len();
        worst = worst.max(trace.max_excess);
        r.check(trace.max_excess <= 1e-10, || {
            format!("instance {i}: max(lhs - rhs) = {:e}", trace.max_excess)
        });
    }
    r.param("instances", 100);
    r.param("radius", config.radius);
    r.param("steps", config.cap);
    r.metric("max_excess", worst);
    r.metric("flagged_points", flagged as f64);
    r.metric("flow_steps", checks as f64);
    Ok(r)
}

fn spectral_energy_inequality(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(3);
    let n_max = 10;
    let outcomes: Vec<Result<(f64, f64, Vec<String>), Error>> = {
        use rayon::prelude::*;
        (0..100u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = item_rng(seed, i);
                let v = rng.gen_range(50..=200);
                let g = random_regular(v, 4, rng.gen())?;
                let lambda1 = stats(&g)?.lambda1;
                let table = WalkTable::new(&g, n_max)?;
                let mut worst = 0.0f64;
                let mut fails = Vec::new();
                for j in 0..10 {
                    let phi: Vec<Vector> = (0..v).map(|_| gaussian_vector(&mut rng, 3)).collect();
                    let e = table.energies(&phi)?;
                    let rhs = 2.0 / lambda1 * e[1];
                    for (n, &lhs) in e.iter().enumerate().skip(1) {
                        worst = worst.max(lhs / rhs);
                        if lhs > rhs + 1e-10 * rhs.max(1.0) {
                            fails.push(format!("graph {i} (V={v}) map {j} n={n}: {lhs} > {rhs}"));
                        }
                    }
                }
                Ok((worst, lambda1, fails))
            })
            .collect()
    };
    let mut worst = 0.0f64;
    let mut min_lambda = f64::INFINITY;
    for o in outcomes {
        let (w, l, fails) = o?;
        worst = worst.max(w);
        min_lambda = min_lambda.min(l);
        for f in fails {
            r.fail(f);
        }
    }
    r.param("graphs", 100);
    r.param("maps_per_graph", 10);
    r.param("n_max", n_max);
    r.metric("max_lhs_over_rhs", worst);
    r.metric("min_lambda1", min_lambda);
    Ok(r)
}

fn isometric_minimizers(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(4);
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let mut rng = item_rng(seed, i);
        let ctx = GroupContext::free(2 + (i % 2) as usize)?;
        let d = 1 + (i % 6) as usize;
        let action = random_action(&mut rng, &ctx, d, LinearKind::Orthogonal, false)?;
        let m = min_energy_vector(&action, &ctx, &ctx.identity())?;
        worst = worst.max(m.harmonic_residual);
        r.check(m.harmonic_residual <= 1e-8, || {
            format!("instance {i}: residual {:e}", m.harmonic_residual)
        });
    }
    let (ctx, action) = nonisometric();
    let fixture = min_energy_vector(&action, &ctx, &ctx.identity())?.harmonic_residual;
    r.check(fixture > 0.01, || format!("non-isometric fixture residual {fixture}"));
    r.param("instances", 50);
    r.param("max_dim", 6);
    r.metric("max_isometric_residual", worst);
    r.metric("nonisometric_residual", fixture);
    Ok(r)
}

/// Whether some harmonic `v` is fixed by every generator, i.e. whether a
/// constant equivariant map is harmonic.
fn constant_map_is_harmonic(action: &AffineAction, sol: &HarmonicSolution) -> bool {
    match sol {
        HarmonicSolution::NoSolution { .. } => false,
        HarmonicSolution::Unique(v) => delta(action, v) <= 1e-8 * v.amax().max(1.0),
        HarmonicSolution::Family { particular, kernel } => {
            // Minimise the displacement over particular + span(kernel).
            let d = action.dim();
            let maps = action.generator_maps();
            let mut a = Matrix::zeros(d * maps.len(), kernel.len());
            let mut rhs = Vector::zeros(d * maps.len());
            for (k, m) in maps.iter().enumerate() {
                let shifted = &m.linear - Matrix::identity(d, d);
                for (j, kv) in kernel.iter().enumerate() {
                    a.view_mut((k * d, j), (d, 1)).copy_from(&(&shifted * kv));
                }
                rhs.rows_mut(k * d, d)
                    .copy_from(&(-(&shifted * particular) - &m.translation));
            }
            let c = linalg::lstsq(&a, &rhs);
            let mut v = particular.clone();
            for (j, kv) in kernel.iter().enumerate() {
                v += kv * c[j];
            }
            delta(action, &v) <= 1e-8 * v.amax().max(1.0)
        }
    }
}

fn fixed_point_flow_consistency(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(5);
    let mut with_fixed = 0usize;
    let mut flows = 0usize;
    for i in 0..50u64 {
        let mut rng = item_rng(seed, i);
        let ctx = GroupContext::free(2)?;
        let d = rng.gen_range(1..=4);
        let kind = if i % 2 == 0 {
            LinearKind::Orthogonal
        } else {
            LinearKind::Invertible(4)
        };
        let action = random_action(&mut rng, &ctx, d, kind, i % 4 < 2)?;
        let fixed = find_fixed_point(&action, &ctx);
        let sol = solve_harmonic(&action, &ctx);
        let constant = constant_map_is_harmonic(&action, &sol);
        with_fixed += fixed.is_some() as usize;
        r.check(fixed.is_some() == constant, || {
            format!("instance {i}: fixed point {} but constant harmonic map {}", fixed.is_some(), constant)
        });
        if let Some(v) = sol.particular() {
            flows += 1;
            let trace = run_flow(
                &action,
                &ctx,
                v,
                FlowConfig {
                    radius: 2,
                    cap: 5,
                    tol: HARMONIC_TOL,
                },
            )?;
            r.check(trace.verdict == StabilityVerdict::Harmonic { i0: 0 }, || {
                format!("instance {i}: flow from the solution gave {}", trace.verdict.name())
            });
        }
    }
    r.param("instances", 50);
    r.metric("with_fixed_point", with_fixed as f64);
    r.metric("flows_from_solution", flows as f64);
    Ok(r)
}

/// The fixed labelled graph shared by criteria 6 and 7.
fn girth_six_graph(seed: u64) -> Result<Graph, Error> {
    Ok(random_regular_with_girth(50, 4, 6, seed)?)
}

fn pushforward_soundness(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(6);
    let g = girth_six_graph(derive_seed(seed, 0))?;
    let alpha = sample_labelling(&g, 2, derive_seed(seed, 1))?;
    let lg = LabelledGraph::new(&g, &alpha)?;
    let girth = lg.girth();
    let ctx = lg.context();
    let mut worst_mass = 0.0f64;
    for n in 1..=2 {
        let w = lg.pushforward_walk(&Word::identity(), n)?;
        let err = (w.total_mass() - 1.0).abs();
        worst_mass = worst_mass.max(err);
        let negative = w.iter().any(|(_, p)| p < 0.0);
        let radius = w.radius(&ctx)?;
        r.check(err <= 1e-12 && !negative, || format!("n={n}: mass error {err:e}"));
        r.check(radius <= n, || format!("n={n}: support radius {radius}"));
    }
    let n_bad = girth.div_ceil(2);
    let refused = matches!(
        lg.pushforward_walk(&Word::identity(), n_bad),
        Err(GModelError::GirthBound { .. })
    );
    r.check(refused, || format!("n={n_bad} with girth {girth} was not refused"));

    let max_n = (girth - 1) / 2;
    let mut rng = item_rng(seed, 2);
    let mut mismatches = 0usize;
    for k in 0..1000 {
        let start = rng.gen_range(0..g.vertex_count());
        let n = rng.gen_range(1..=max_n);
        let mut at = start;
        let mut path = Vec::with_capacity(n);
        for _ in 0..n {
            let &(next, id) = g.neighbors(at).choose(&mut rng).expect("regular graph");
            path.push(id);
            at = next;
        }
        if lg.walk_label(start, &path) != lg.beta(start, &Word::identity(), at)? {
            mismatches += 1;
            r.fail(format!("walk {k} from {start}: label differs from geodesic label"));
        }
    }
    r.param("vertices", 50);
    r.param("degree", 4);
    r.param("walks", 1000);
    r.metric("girth", girth as f64);
    r.metric("max_mass_error", worst_mass);
    r.metric("label_mismatches", mismatches as f64);
    Ok(r)
}

fn mixture_fit(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(7);
    let g = girth_six_graph(derive_seed(seed, 0))?;
    let samples = 2000;
    let one = fit_mixture(&g, 2, 1, samples, derive_seed(seed, 1))?;
    let two = fit_mixture(&g, 2, 2, samples, derive_seed(seed, 2))?;
    r.check((one.weights[1] - 1.0).abs() <= 1e-9, || format!("n=1 weights {:?}", one.weights));
    r.check(one.residual_tv < 0.02, || format!("n=1 residual {}", one.residual_tv));
    r.check(two.residual_tv < 0.05, || format!("n=2 residual {}", two.residual_tv));
    r.check(two.weights[1] < 0.02, || format!("n=2 odd weight {}", two.weights[1]));
    r.param("samples", samples);
    r.param("vertices", 50);
    r.metric("n1_w1", one.weights[1]);
    r.metric("n1_residual_tv", one.residual_tv);
    r.metric("n2_w0", two.weights[0]);
    r.metric("n2_w1", two.weights[1]);
    r.metric("n2_w2", two.weights[2]);
    r.metric("n2_residual_tv", two.residual_tv);
    r.metric("n2_tail_mass", two.tail_mass);
    Ok(r)
}

/// `max_f R(f)` for the link Rayleigh quotient, found without an
/// eigensolver: steepest ascent where each step maximises `R` exactly over
/// the plane spanned by `f` and the gradient (a dense angle scan refined
/// by golden-section search), from several random starts.
pub fn rayleigh_search<R: Rng + ?Sized>(link: &LinkGraph, rng: &mut R, restarts: usize) -> f64 {
    let n = link.vertex_count();
    let m = link.vertex_weights();
    let total: f64 = m.iter().sum();
    let center = |f: &[f64]| -> Vec<f64> {
        let mean = m.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / total;
        f.iter().map(|x| x - mean).collect()
    };
    let quotient = |f: &[f64]| link.rayleigh_quotient(f).unwrap_or(0.0);
    let gradient = |f: &[f64]| -> Vec<f64> {
        let num: f64 = (0..n).map(|i| m[i] * f[i] * f[i]).sum();
        let mut dnum: Vec<f64> = (0..n).map(|i| 2.0 * m[i] * f[i]).collect();
        let mut dden = vec![0.0; n];
        let mut den = 0.0;
        for &(s, t, w) in &link.edges {
            let diff = f[s] - f[t];
            den += w * diff * diff;
            dden[s] += 2.0 * w * diff;
            dden[t] -= 2.0 * w * diff;
        }
        for i in 0..n {
            dnum[i] = (dnum[i] * den - num * dden[i]) / (den * den);
        }
        dnum
    };
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let mut f = center(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let mut value = quotient(&f);
        for _ in 0..2000 {
            let g = gradient(&f);
            let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let fnorm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            if gn == 0.0 || fnorm == 0.0 {
                break;
            }
            let dir: Vec<f64> = g.iter().map(|x| x / gn * fnorm).collect();
            let at = |theta: f64| -> Vec<f64> {
                (0..n).map(|i| theta.cos() * f[i] + theta.sin() * dir[i]).collect()
            };
            let score = |theta: f64| quotient(&at(theta));
            let grid = 64;
            let step = std::f64::consts::PI / grid as f64;
            let k = (0..grid)
                .max_by(|&a, &b| score(a as f64 * step).total_cmp(&score(b as f64 * step)))
                .expect("nonempty");
            let (mut lo, mut hi) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let a = hi - phi * (hi - lo);
                let b = lo + phi * (hi - lo);
                if score(a) < score(b) {
                    lo = a;
                } else {
                    hi = b;
                }
            }
            let next = center(&at(0.5 * (lo + hi)));
            let next_value = quotient(&next);
            if next_value <= value * (1.0 + 1e-15) {
                break;
            }
            f = next;
            value = next_value;
        }
        best = best.max(value);
    }
    best
}

/// A connected link on `n` vertices: a random spanning tree plus each
/// remaining pair with probability 1/2, weights log-uniform in `[0.1, 10]`.
pub fn random_weighted_link<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinkGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = order[rng.gen_range(0..i)];
        let (a, b) = (order[i].min(j), order[i].max(j));
        pairs.insert((a, b));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                pairs.insert((a, b));
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(a, b)| (a, b, 10f64.powf(rng.gen_range(-1.0..=1.0))))
        .collect();
    LinkGraph::from_edges((0..n).map(|i| format!("s{i}")).collect(), edges).expect("valid edges")
}

fn kappa2_correctness(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(8);
    let mut worst_complete = 0.0f64;
    for k in 3..=8usize {
        let edges = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b, 1.0))).collect();
        let link = LinkGraph::from_edges((0..k).map(|i| format!("s{i}")).collect(), edges)?;
        let kappa = poincare_k2(&link)?.kappa2;
        let expected = ((k as f64 - 1.0) / k as f64).sqrt();
        let err = (kappa - expected).abs();
        worst_complete = worst_complete.max(err);
        r.check(err <= 1e-8, || format!("complete link k={k}: κ₂ = {kappa}, expected {expected}"));
    }
    let mut rng = item_rng(seed, 0);
    let mut worst_search = 0.0f64;
    let mut checked = 0usize;
    let mut agree = 0usize;
    for i in 0..20 {
        let n = rng.gen_range(3..=8);
        let link = random_weighted_link(&mut rng, n);
        let report = poincare_k2(&link)?;
        let searched = rayleigh_search(&link, &mut rng, 8).sqrt();
        let err = (searched - report.kappa2).abs();
        worst_search = worst_search.max(err);
        r.check(err <= 1e-6, || {
            format!("link {i} (n={n}): search {searched} vs eigensolver {}", report.kappa2)
        });
        for j in 0..=60 {
            let c = 0.5 + 0.025 * j as f64;
            let product = c * report.kappa2;
            if (product - std::f64::consts::SQRT_2).abs() <= 1e-12 {
                continue;
            }
            checked += 1;
            let certified = nowak_criterion(&report, c).fixed_point_certified;
            if certified == (product < std::f64::consts::SQRT_2) {
                agree += 1;
            } else {
                r.fail(format!("link {i}, C={c}: verdict {certified} for C κ₂ = {product}"));
            }
        }
    }
    r.param("complete_k", [3, 8]);
    r.param("random_links", 20);
    r.metric("max_complete_error", worst_complete);
    r.metric("max_search_error", worst_search);
    r.metric("criterion_checks", checked as f64);
    r.metric("criterion_agreements", agree as f64);
    Ok(r)
}

fn conjugacy_oracle(seed: u64) -> Result<CriterionResult, Error> {
    let mut r = CriterionResult::new(9);
    let ctx = GroupContext::free(2)?;
    let conjugators = ctx.ball(3)?;
    let mut rng = item_rng(seed, 0);
    let mut mismatches = 0usize;
    for k in 0..500 {
        let len = rng.gen_range(0..=6);
        let letters: Vec<Token> = (0..len).map(|_| Token(rng.gen_range(0..4))).collect();
        let g = ctx.word(&letters)?;
        let fast = ctx.conjugacy_length(&g)?;
        let mut brute = usize::MAX;
        for c in &conjugators {
            let conj = ctx.multiply(&ctx.multiply(c, &g)?, &ctx.inverse(c)?)?;
            brute = brute.min(ctx.word_length(&conj)?);
        }
        if fast != brute {
            mismatches += 1;
            r.fail(format!("word {k} {}: {fast} vs brute force {brute}", ctx.format_element(&g)));
        }
    }
    r.param("words", 500);
    r.param("max_word_length", 6);
    r.param("conjugator_radius", 3);
    r.metric("mismatches", mismatches as f64);
    Ok(r)
}
