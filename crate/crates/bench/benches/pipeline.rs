use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nst_core::checker::check_all;
use nst_core::corpus;
use nst_core::runtime::{run, Policy, DEFAULT_STEPS};
use nst_core::syntax::parse_signature;

fn pipeline(c: &mut Criterion) {
    for (name, src) in corpus::PROGRAMS {
        c.bench_function(&format!("parse/{name}"), |b| b.iter(|| parse_signature(black_box(src))));
        let (sig, _) = parse_signature(src);
        c.bench_function(&format!("check/{name}"), |b| b.iter(|| check_all(black_box(&sig), 1)));
        if sig.defs.contains_key("main") {
            c.bench_function(&format!("run/{name}"), |b| {
                b.iter(|| run(black_box(&sig), "main", Policy::RoundRobin, DEFAULT_STEPS).unwrap())
            });
        }
    }
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
