use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hfl_core::fixtures;
use hfl_core::gmodel::{sample_labelling, LabelledGraph};
use hfl_core::graph::{self, random_regular_with_girth};
use hfl_core::group::Word;
use hfl_core::harmonic::{run_flow, FlowConfig};
use hfl_core::{GroupContext, Vector};

fn walk_convolution(c: &mut Criterion) {
    let ctx = GroupContext::free(2).unwrap();
    c.bench_function("walk_convolution F2 n=6", |b| {
        b.iter(|| black_box(ctx.walk_convolution(black_box(6)).unwrap()))
    });
}

fn expander_stats(c: &mut Criterion) {
    let g = graph::random_regular(200, 4, 1).unwrap();
    c.bench_function("stats V=200 k=4", |b| b.iter(|| black_box(graph::stats(&g).unwrap())));
}

fn harmonic_flow(c: &mut Criterion) {
    let (ctx, action) = fixtures::f2_translations();
    let v0 = Vector::from_element(action.dim(), 1.0);
    let config = FlowConfig {
        radius: 3,
        ..FlowConfig::default()
    };
    c.bench_function("run_flow F2 R=3", |b| {
        b.iter(|| black_box(run_flow(&action, &ctx, &v0, config).unwrap()))
    });
}

fn pushforward(c: &mut Criterion) {
    let g = random_regular_with_girth(50, 4, 6, 3).unwrap();
    let alpha = sample_labelling(&g, 2, 5).unwrap();
    let lg = LabelledGraph::new(&g, &alpha).unwrap();
    c.bench_function("pushforward V=50 n=2", |b| {
        b.iter(|| black_box(lg.pushforward_walk(&Word::identity(), 2).unwrap()))
    });
}

criterion_group!(benches, walk_convolution, expander_stats, harmonic_flow, pushforward);
criterion_main!(benches);
