use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tnet_bench::{dense_transducer, frames, layered};
use tnet_core::planner::{self, PathQuery, PlannerParams, Policy};
use tnet_core::transducer::compose;
use tnet_core::{Firing, NodeKind};

fn ticks(c: &mut Criterion) {
    let mut g = c.benchmark_group("tick");
    for hidden in [50, 200, 800] {
        let (net, ins) = layered(16, hidden, 1);
        let input = frames(&ins, 100, 2);
        g.bench_with_input(BenchmarkId::new("100 ticks", hidden), &hidden, |b, _| {
            b.iter(|| {
                let mut n = net.clone();
                for f in &input {
                    black_box(n.tick(f, Firing::Deterministic).expect("tick"));
                }
            })
        });
    }
    g.finish();
}

fn composition(c: &mut Criterion) {
    let mut g = c.benchmark_group("compose");
    for k in [2, 4, 8] {
        let (t1, t2) = (dense_transducer(k, "p", 3), dense_transducer(k, "q", 4));
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| b.iter(|| compose(black_box(&t1), black_box(&t2))));
    }
    g.finish();
}

fn decisions(c: &mut Criterion) {
    let (mut net, _) = layered(1, 60, 5);
    let src = net.nodes()[0].id;
    let goal = net.add_node(Some("goal"), NodeKind::Plain).expect("fresh");
    net.set_weight(goal.into(), 2.0).expect("node");
    for i in 40..60 {
        let (f, _) = net.ensure_reciprocal(net.nodes()[i].id, goal).expect("pair");
        net.set_weight(f.into(), 1.5).expect("edge");
    }
    let q = PathQuery::new(src, goal);
    let p = PlannerParams::default();
    c.bench_function("decide/60 nodes", |b| {
        b.iter(|| planner::decide(black_box(&net), &q, Policy::Relative, &p, Firing::Deterministic))
    });
}

criterion_group!(benches, ticks, composition, decisions);
criterion_main!(benches);
