use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hfl_core::gmodel::{
    self, check_transplant_inequality, concentration_experiment, fit_mixture, LabellingSpec,
    Presentation,
};
use hfl_core::graph::{self, check_energy_inequality, EnergyInequalityReport, WalkTable};
use hfl_core::group::{GroupSpec, Word};
use hfl_core::harmonic::{
    self, find_fixed_point, near_critical_search, run_flow, solve_harmonic, EnergyMethod,
    FlowConfig, HarmonicSolution, StabilityVerdict,
};
use hfl_core::input::{self, InputError};
use hfl_core::report::{ExperimentConfig, ReportCache, Table, Verdict};
use hfl_core::spectral::{nowak_criterion, poincare_k2, LinkGraph, WeightsFile};
use hfl_core::{
    affine::ActionSpec, rng, suite, AffineAction, Element, EquivariantMap, Error, Graph,
    GraphError, GroupContext, HarmonicError, LabelledGraph, RunReport, SLabelling, Vector,
    WalkMeasure,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::*;

/// Reported violations and failures are truncated to this many entries.
const MAX_LISTED: usize = 10;

pub struct Session {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub cache: Option<ReportCache>,
}

pub struct Outcome {
    pub report: RunReport,
    pub key: String,
    pub cached: bool,
}

impl Session {
    fn config(&self, kind: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(kind, self.seed);
        cfg.jobs = self.jobs;
        cfg.out = self.out.clone();
        cfg
    }

    /// Serves the report from the cache when present, otherwise fills a
    /// fresh one with `fill`.
    fn compute(
        &self,
        cfg: ExperimentConfig,
        fill: impl FnOnce(&mut RunReport) -> Result<(), Error>,
    ) -> Result<Outcome, Error> {
        let key = cfg.cache_key();
        let hit = self
            .cache
            .as_ref()
            .and_then(|c| c.load(&key))
            .and_then(|json| serde_json::from_str::<RunReport>(&json).ok());
        if let Some(mut report) = hit {
            report.config = cfg;
            return Ok(Outcome {
                report,
                key,
                cached: true,
            });
        }
        let mut report = RunReport::new(cfg);
        fill(&mut report)?;
        Ok(Outcome {
            report,
            key,
            cached: false,
        })
    }
}

pub fn dispatch(s: &Session, cmd: &Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Flow(FlowCmd::Run(a)) => flow_run(s, a),
        Command::Flow(FlowCmd::Solve(a)) => flow_solve(s, a),
        Command::Energy(EnergyCmd::Local(a)) => energy_local(s, a),
        Command::Energy(EnergyCmd::Nstep(a)) => energy_nstep(s, a),
        Command::Fixedpoint(a) => fixedpoint(s, a),
        Command::Delta(DeltaCmd::Search(a)) => delta_search(s, a),
        Command::Graph(GraphCmd::Gen(a)) => graph_gen(s, a),
        Command::Graph(GraphCmd::Stats(a)) => graph_stats(s, a),
        Command::Graph(GraphCmd::EnergyIneq(a)) => graph_energy_ineq(s, a),
        Command::Gmodel(GmodelCmd::Sample(a)) => gmodel_sample(s, a),
        Command::Gmodel(GmodelCmd::Pushforward(a)) => gmodel_pushforward(s, a),
        Command::Gmodel(GmodelCmd::FitMixture(a)) => gmodel_fit(s, a),
        Command::Gmodel(GmodelCmd::Concentration(a)) => gmodel_concentration(s, a),
        Command::Gmodel(GmodelCmd::Relators(a)) => gmodel_relators(s, a),
        Command::Gmodel(GmodelCmd::Transplant(a)) => gmodel_transplant(s, a),
        Command::Criterion(CriterionCmd::Link(a)) => criterion_link(s, a),
        Command::Criterion(CriterionCmd::K2(a)) => criterion_k2(s, a),
        Command::Criterion(CriterionCmd::Check(a)) => criterion_check(s, a),
        Command::Suite(a) => run_suite(s, a),
    }
}

fn load<T: DeserializeOwned>(cfg: &mut ExperimentConfig, name: &str, path: &Path) -> Result<T, Error> {
    let text = cfg.add_input(name, path)?;
    Ok(input::parse_json(path, &text)?)
}

fn load_action(cfg: &mut ExperimentConfig, a: &ActionArgs) -> Result<(GroupContext, AffineAction), Error> {
    let ctx = load::<GroupSpec>(cfg, "group", &a.group)?.build()?;
    let action = load::<ActionSpec>(cfg, "action", &a.action)?.build(&ctx)?;
    Ok((ctx, action))
}

fn load_graph(cfg: &mut ExperimentConfig, path: &Path) -> Result<Graph, Error> {
    let text = cfg.add_input("graph", path)?;
    Graph::parse_edge_list(&text).map_err(|e| match e {
        GraphError::Parse { line, message } => {
            InputError::malformed(path, format!("line {line}"), message).into()
        }
        other => other.into(),
    })
}

fn load_labelling(cfg: &mut ExperimentConfig, path: &Path) -> Result<SLabelling, Error> {
    Ok(load::<LabellingSpec>(cfg, "labelling", path)?.build()?)
}

fn base_vector(v0: &Option<Vec<f64>>, dim: usize) -> Result<Vector, Error> {
    let Some(v) = v0 else {
        return Ok(Vector::zeros(dim));
    };
    if v.len() != dim {
        return Err(HarmonicError::DimensionMismatch {
            expected: dim,
            got: v.len(),
        }
        .into());
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(HarmonicError::InvalidParameter("v0 has non-finite entries".into()).into());
    }
    Ok(Vector::from_vec(v.clone()))
}

fn parse_word(ctx: &GroupContext, text: &str) -> Result<Word, Error> {
    let g = ctx.parse_element(text)?;
    Ok(g.as_word().cloned().expect("free group"))
}

fn vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn measure(ctx: &GroupContext, walk: &WalkMeasure) -> BTreeMap<String, f64> {
    walk.iter().map(|(g, p)| (ctx.format_element(g), p)).collect()
}

fn energy_table(
    f: &EquivariantMap,
    ctx: &GroupContext,
    x: &Element,
    n_max: usize,
    method: EnergyMethod,
) -> Result<(Vec<f64>, Table), Error> {
    let base = f.local_energy(ctx, x)?;
    let mut table = Table::new(&["n", "energy", "ratio"]);
    let mut energies = Vec::new();
    for n in 1..=n_max {
        let e = f.n_step_energy_with(ctx, x, n, method)?;
        let ratio = if base > 0.0 { e / base } else { 0.0 };
        table.push(vec![n.into(), e.into(), ratio.into()]);
        energies.push(e);
    }
    Ok((energies, table))
}

fn flow_run(s: &Session, a: &FlowRunArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("flow run");
    let (ctx, action) = load_action(&mut cfg, &a.map.action)?;
    let v0 = base_vector(&a.map.v0, action.dim())?;
    let method = EnergyMethod::from(a.method);
    cfg.param("v0", vec(&v0))
        .param("R", a.radius)
        .param("cap", a.cap)
        .param("tol", a.tol)
        .param("n_max", a.n_max)
        .param("method", method);
    s.compute(cfg, |r| {
        let config = FlowConfig {
            radius: a.radius,
            cap: a.cap,
            tol: a.tol,
        };
        let trace = run_flow(&action, &ctx, &v0, config)?;
        let last = trace.iterates.last().cloned().unwrap_or_else(|| v0.clone());

        let mut flow = Table::new(&["i", "laplacian_norm_e", "laplacian_max_ball"]);
        for (i, (at_e, max)) in trace.laplacian_at_identity.iter().zip(&trace.laplacian_max).enumerate() {
            flow.push(vec![i.into(), (*at_e).into(), (*max).into()]);
        }
        r.table("flow", flow);

        if !trace.diverged {
            let f = EquivariantMap::new(&action, last.clone())?;
            let (_, growth) = energy_table(&f, &ctx, &ctx.identity(), a.n_max, method)?;
            r.table("energy_growth", growth);
        }

        let violations: Vec<_> = trace
            .violations
            .iter()
            .take(MAX_LISTED)
            .map(|v| {
                serde_json::json!({
                    "iteration": v.iteration,
                    "point": ctx.format_element(&v.point),
                    "lhs": v.lhs,
                    "rhs": v.rhs,
                })
            })
            .collect();
        r.result("steps", trace.steps())?
            .result("final", vec(&last))?
            .result("diverged", trace.diverged)?
            .result("violation_count", trace.violations.len())?
            .result("violations", violations)?
            .result("rigidity_checks", trace.rigidity.len())?
            .result("rigidity_constant", trace.rigidity.iter().all(|c| c.constant))?;
        if trace.max_excess.is_finite() {
            r.result("max_excess", trace.max_excess)?;
        }

        let base = Verdict::new("stability", trace.verdict.name())
            .with("R", a.radius)
            .with("cap", a.cap)
            .with("tol", a.tol);
        let verdict = match &trace.verdict {
            StabilityVerdict::Harmonic { i0 } => base.with("i0", i0),
            StabilityVerdict::Stable { lambda, i0 } => base.with("lambda", lambda).with("i0", i0),
            StabilityVerdict::Unstable {
                iteration,
                point,
                ratio,
            } => base
                .with("iteration", iteration)
                .with("point", ctx.format_element(point))
                .with("ratio", if ratio.is_finite() { *ratio } else { f64::MAX }),
            StabilityVerdict::Undecided { reason } => base.with("reason", reason),
        };
        r.verdict(verdict);
        r.verdict(
            Verdict::new(
                "monotonicity",
                if trace.violations.is_empty() { "holds" } else { "violated" },
            )
            .with("R", a.radius)
            .with("steps", trace.steps()),
        );
        Ok(())
    })
}

fn flow_solve(s: &Session, a: &ActionArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("flow solve");
    let (ctx, action) = load_action(&mut cfg, a)?;
    s.compute(cfg, |r| {
        let outcome = match solve_harmonic(&action, &ctx) {
            HarmonicSolution::Unique(v) => {
                r.result("particular", vec(&v))?;
                "unique"
            }
            HarmonicSolution::Family { particular, kernel } => {
                r.result("particular", vec(&particular))?
                    .result("kernel", kernel.iter().map(vec).collect::<Vec<_>>())?;
                "family"
            }
            HarmonicSolution::NoSolution { residual } => {
                r.result("residual", residual)?;
                "none"
            }
        };
        r.verdict(Verdict::new("harmonic_solution", outcome).with("tol", harmonic::SOLVE_TOL));
        Ok(())
    })
}

fn energy_local(s: &Session, a: &EnergyArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("energy local");
    let (ctx, action) = load_action(&mut cfg, &a.map.action)?;
    let v0 = base_vector(&a.map.v0, action.dim())?;
    let x = ctx.parse_element(&a.x)?;
    cfg.param("v0", vec(&v0)).param("x", ctx.format_element(&x));
    s.compute(cfg, |r| {
        let f = EquivariantMap::new(&action, v0.clone())?;
        r.result("energy", f.local_energy(&ctx, &x)?)?
            .result("laplacian", vec(&f.laplacian(&ctx, &x)?))?;
        Ok(())
    })
}

fn energy_nstep(s: &Session, a: &NstepArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("energy nstep");
    let e = &a.energy;
    let (ctx, action) = load_action(&mut cfg, &e.map.action)?;
    let v0 = base_vector(&e.map.v0, action.dim())?;
    let x = ctx.parse_element(&e.x)?;
    let method = EnergyMethod::from(a.method);
    cfg.param("v0", vec(&v0))
        .param("x", ctx.format_element(&x))
        .param("n", a.n)
        .param("method", method);
    s.compute(cfg, |r| {
        let f = EquivariantMap::new(&action, v0.clone())?;
        let (energies, table) = energy_table(&f, &ctx, &x, a.n, method)?;
        r.result("energy", f.local_energy(&ctx, &x)?)?
            .result("n_step_energies", energies)?;
        r.table("energy_growth", table);
        Ok(())
    })
}

fn fixedpoint(s: &Session, a: &ActionArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("fixedpoint");
    let (ctx, action) = load_action(&mut cfg, a)?;
    s.compute(cfg, |r| {
        let found = find_fixed_point(&action, &ctx);
        if let Some(v) = &found {
            r.result("fixed_point", vec(v))?;
        }
        r.result("isometric", action.is_isometric(1e-9))?;
        r.verdict(
            Verdict::new("fixed_point", if found.is_some() { "found" } else { "none" })
                .with("tol", harmonic::SOLVE_TOL),
        );
        Ok(())
    })
}

fn delta_search(s: &Session, a: &DeltaArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("delta search");
    let (_, action) = load_action(&mut cfg, &a.map.action)?;
    let v0 = base_vector(&a.map.v0, action.dim())?;
    cfg.param("v0", vec(&v0)).param("j", a.j).param("cap", a.cap);
    s.compute(cfg, |r| {
        let res = near_critical_search(&action, &v0, a.j, a.cap)?;
        let mut history = Table::new(&["move", "delta"]);
        for (i, d) in res.history.iter().enumerate() {
            history.push(vec![i.into(), (*d).into()]);
        }
        r.table("delta", history);
        r.result("v", vec(&res.v))?
            .result("delta", res.delta)?
            .result("moves", res.moves)?;
        r.verdict(
            Verdict::new("near_critical", "found")
                .with("j", a.j)
                .with("cap", a.cap),
        );
        Ok(())
    })
}

fn graph_gen(s: &Session, a: &GraphGenArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("graph gen");
    cfg.param("vertices", a.vertices).param("degree", a.degree);
    if let Some(g) = a.girth {
        cfg.param("girth", g);
    }
    s.compute(cfg, |r| {
        let g = match a.girth {
            Some(girth) => graph::random_regular_with_girth(a.vertices, a.degree, girth, s.seed)?,
            None => graph::random_regular(a.vertices, a.degree, s.seed)?,
        };
        r.result("edge_list", g.to_edge_list())?
            .result("stats", graph::stats(&g)?)?;
        Ok(())
    })
}

fn graph_stats(s: &Session, a: &GraphArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("graph stats");
    let g = load_graph(&mut cfg, &a.graph)?;
    s.compute(cfg, |r| {
        r.result("stats", graph::stats(&g)?)?;
        Ok(())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    values: Vec<Vec<f64>>,
}

fn graph_energy_ineq(s: &Session, a: &EnergyIneqArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("graph energy-ineq");
    let g = load_graph(&mut cfg, &a.graph.graph)?;
    let given = match &a.map {
        Some(path) => {
            let file: MapFile = load(&mut cfg, "map", path)?;
            Some(file.values.into_iter().map(Vector::from_vec).collect::<Vec<_>>())
        }
        None => {
            cfg.param("maps", a.maps).param("dim", a.dim);
            None
        }
    };
    cfg.param("n", a.n);
    s.compute(cfg, |r| {
        if !g.is_connected() {
            return Err(GraphError::Disconnected.into());
        }
        let maps = match given {
            Some(phi) => vec![phi],
            None => (0..a.maps)
                .map(|i| {
                    let mut rng = rng::item_rng(s.seed, i as u64);
                    (0..g.vertex_count())
                        .map(|_| hfl_core::fixtures::gaussian_vector(&mut rng, a.dim))
                        .collect()
                })
                .collect(),
        };
        let lambda1 = graph::stats(&g)?.lambda1;
        let table = WalkTable::new(&g, a.n)?;
        let mut rows = Table::new(&["map", "n", "lhs", "rhs", "ratio"]);
        let mut failures = Vec::new();
        let mut worst: f64 = 0.0;
        for (i, phi) in maps.iter().enumerate() {
            let energies = table.energies(phi)?;
            for n in 1..=a.n {
                let rep = EnergyInequalityReport::from_energies(n, lambda1, energies[n], energies[1]);
                let ratio = if rep.rhs > 0.0 { rep.lhs / rep.rhs } else { 0.0 };
                worst = worst.max(ratio);
                rows.push(vec![i.into(), n.into(), rep.lhs.into(), rep.rhs.into(), ratio.into()]);
                if !rep.pass && failures.len() < MAX_LISTED {
                    failures.push(serde_json::json!({"map": i, "n": n, "lhs": rep.lhs, "rhs": rep.rhs}));
                }
            }
        }
        r.table("energy_ineq", rows);
        r.result("lambda1", lambda1)?
            .result("worst_ratio", worst)?
            .result("failures", &failures)?;
        // The single-map check goes through the direct evaluation as well.
        if maps.len() == 1 && a.n >= 1 {
            let direct = check_energy_inequality(&g, &maps[0], a.n)?;
            r.result("direct", direct)?;
        }
        r.verdict(
            Verdict::new("energy_inequality", if failures.is_empty() { "holds" } else { "violated" })
                .with("n", a.n)
                .with("maps", maps.len()),
        );
        Ok(())
    })
}

fn gmodel_sample(s: &Session, a: &SampleArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("gmodel sample");
    let g = load_graph(&mut cfg, &a.graph.graph)?;
    cfg.param("m", a.m);
    s.compute(cfg, |r| {
        let alpha = gmodel::sample_labelling(&g, a.m, s.seed)?;
        r.result("labelling", alpha.to_spec())?;
        Ok(())
    })
}

fn gmodel_pushforward(s: &Session, a: &PushforwardArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("gmodel pushforward");
    let g = load_graph(&mut cfg, &a.labelled.graph.graph)?;
    let alpha = load_labelling(&mut cfg, &a.labelled.labelling)?;
    let lg = LabelledGraph::new(&g, &alpha)?;
    let ctx = lg.context();
    let x = parse_word(&ctx, &a.x)?;
    cfg.param("n", a.n).param("x", x.format(ctx.generators()));
    s.compute(cfg, |r| {
        let walk = lg.pushforward_walk(&x, a.n)?;
        let mut by_length = BTreeMap::new();
        for (y, p) in walk.iter() {
            *by_length.entry(ctx.word_length(y)?).or_insert(0.0) += p;
        }
        let mut hist = Table::new(&["length", "mass"]);
        for (l, p) in &by_length {
            hist.push(vec![(*l).into(), (*p).into()]);
        }
        r.table("length", hist);
        r.result("measure", measure(&ctx, &walk))?
            .result("support", walk.support_len())?
            .result("total_mass", walk.total_mass())?;
        if lg.girth() != usize::MAX {
            r.result("girth", lg.girth())?;
        }
        r.verdict(Verdict::new("pushforward", "exact").with("n", a.n));
        Ok(())
    })
}

fn gmodel_fit(s: &Session, a: &MonteCarloArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("gmodel fit-mixture");
    let g = load_graph(&mut cfg, &a.graph.graph)?;
    cfg.param("m", a.m).param("n", a.n).param("samples", a.samples);
    s.compute(cfg, |r| {
        let fit = fit_mixture(&g, a.m, a.n, a.samples, s.seed)?;
        let ctx = GroupContext::free(a.m)?;
        let mut table = Table::new(&["l", "w"]);
        for (l, w) in fit.weights.iter().enumerate() {
            table.push(vec![l.into(), (*w).into()]);
        }
        r.table("mixture", table);
        r.result("weights", &fit.weights)?
            .result("residual_tv", fit.residual_tv)?
            .result("tail_mass", fit.tail_mass)?
            .result("expectation", measure(&ctx, &fit.expectation))?;
        r.verdict(
            Verdict::new("mixture_fit", if fit.degenerate { "degenerate" } else { "fit" })
                .with("n", a.n)
                .with("samples", a.samples)
                .with("threshold_tv", gmodel::DEGENERATE_FIT_TV),
        );
        Ok(())
    })
}

fn gmodel_concentration(s: &Session, a: &MonteCarloArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("gmodel concentration");
    let g = load_graph(&mut cfg, &a.graph.graph)?;
    cfg.param("m", a.m).param("n", a.n).param("samples", a.samples);
    s.compute(cfg, |r| {
        let rep = concentration_experiment(&g, a.m, a.n, a.samples, s.seed)?;
        r.verdict(
            Verdict::new("concentration", format!("{:.4}", rep.fraction_both))
                .with("n", a.n)
                .with("samples", a.samples),
        );
        r.result("concentration", rep)?;
        Ok(())
    })
}

fn gmodel_relators(s: &Session, a: &RelatorsArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("gmodel relators");
    let g = load_graph(&mut cfg, &a.labelled.graph.graph)?;
    let alpha = load_labelling(&mut cfg, &a.labelled.labelling)?;
    cfg.param("root", a.root);
    s.compute(cfg, |r| {
        let lg = LabelledGraph::new(&g, &alpha)?;
        let p: Presentation = lg.presentation(a.root)?;
        r.result("relator_count", p.relators.len())?
            .result("presentation", p)?;
        Ok(())
    })
}

fn gmodel_transplant(s: &Session, a: &TransplantArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("gmodel transplant");
    let g = load_graph(&mut cfg, &a.labelled.graph.graph)?;
    let alpha = load_labelling(&mut cfg, &a.labelled.labelling)?;
    let lg = LabelledGraph::new(&g, &alpha)?;
    let ctx = lg.context();
    let action = load::<ActionSpec>(&mut cfg, "action", &a.action)?.build(&ctx)?;
    let v0 = base_vector(&a.v0, action.dim())?;
    let x = parse_word(&ctx, &a.x)?;
    cfg.param("v0", vec(&v0))
        .param("x", x.format(ctx.generators()))
        .param("n", a.n);
    s.compute(cfg, |r| {
        let f = EquivariantMap::new(&action, v0.clone())?;
        let rep = check_transplant_inequality(&f, &lg, &x, a.n)?;
        r.verdict(
            Verdict::new("transplant_inequality", if rep.pass { "holds" } else { "violated" })
                .with("n", a.n)
                .with("growth_radius", rep.growth_radius),
        );
        r.result("transplant", rep)?;
        Ok(())
    })
}

fn load_link(cfg: &mut ExperimentConfig, a: &LinkArgs) -> Result<LinkGraph, Error> {
    let link = match (&a.presentation, &a.group) {
        (Some(path), _) => LinkGraph::from_presentation(&load::<Presentation>(cfg, "presentation", path)?)?,
        (None, Some(path)) => LinkGraph::from_group(&load::<GroupSpec>(cfg, "group", path)?.build()?)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    match &a.weights {
        Some(path) => Ok(link.with_weights(&load::<WeightsFile>(cfg, "weights", path)?)?),
        None => Ok(link),
    }
}

fn criterion_link(s: &Session, a: &LinkArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("criterion link");
    let link = load_link(&mut cfg, a)?;
    s.compute(cfg, |r| {
        let mut edges = Table::new(&["s", "t", "weight"]);
        for &(u, v, w) in &link.edges {
            edges.push(vec![link.vertices[u].as_str().into(), link.vertices[v].as_str().into(), w.into()]);
        }
        r.table("edges", edges);
        r.result("link", &link)?
            .result("connected", link.is_connected())?;
        Ok(())
    })
}

fn criterion_k2(s: &Session, a: &LinkArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("criterion k2");
    let link = load_link(&mut cfg, a)?;
    s.compute(cfg, |r| {
        r.result("poincare", poincare_k2(&link)?)?;
        Ok(())
    })
}

fn criterion_check(s: &Session, a: &CheckArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("criterion check");
    let link = load_link(&mut cfg, &a.link)?;
    if !(a.c.is_finite() && a.c > 0.0) {
        return Err(hfl_core::spectral::SpectralError::Weights(format!(
            "C must be positive and finite, got {}",
            a.c
        ))
        .into());
    }
    cfg.param("C", a.c);
    s.compute(cfg, |r| {
        let k2 = poincare_k2(&link)?;
        let verdict = nowak_criterion(&k2, a.c);
        r.verdict(
            Verdict::new(
                "fixed_point_criterion",
                if verdict.fixed_point_certified { "certified" } else { "not_certified" },
            )
            .with("C", a.c)
            .with("guard", hfl_core::spectral::CRITERION_GUARD),
        );
        r.result("poincare", k2)?.result("criterion", verdict)?;
        Ok(())
    })
}

fn run_suite(s: &Session, a: &SuiteArgs) -> Result<Outcome, Error> {
    let mut cfg = s.config("suite");
    if let Some(id) = a.only {
        cfg.param("only", id);
    }
    s.compute(cfg, |r| {
        let report = match a.only {
            Some(id) => {
                let c = suite::run_criterion(id, s.seed)?;
                suite::SuiteReport {
                    seed: s.seed,
                    pass: c.pass,
                    criteria: vec![c],
                }
            }
            None => suite::run_full_suite(s.seed)?,
        };
        let mut table = Table::new(&["id", "name", "pass"]);
        for c in &report.criteria {
            table.push(vec![(c.id as usize).into(), c.name.as_str().into(), c.pass.to_string().into()]);
        }
        r.table("criteria", table);
        r.verdict(Verdict::new("suite", if report.pass { "pass" } else { "fail" }).with("seed", s.seed));
        r.result("suite", report)?;
        Ok(())
    })
}
