use criterion::{criterion_group, criterion_main, Criterion};
use replic::{
    bayes_factor, partial_conjunction_e, partial_conjunction_p, BayesFactorSpec, CombinerId, EValue, MergeRule,
    ModelSpec, NullKind, Probability,
};
use std::hint::black_box;

fn combiners(c: &mut Criterion) {
    let p: Vec<Probability> = [0.003, 0.04, 0.2, 0.5, 0.71, 0.93].iter().map(|&v| Probability::new(v).unwrap()).collect();
    let mut group = c.benchmark_group("partial_conjunction_p");
    for id in CombinerId::ALL {
        group.bench_function(id.name(), |b| b.iter(|| partial_conjunction_p(black_box(&p), 2, id).unwrap()));
    }
    group.finish();

    let e: Vec<EValue> = [0.4, 1.2, 3.0, 0.9, 7.5, 2.2].iter().map(|&v| EValue::new(v).unwrap()).collect();
    c.bench_function("partial_conjunction_e/product", |b| {
        b.iter(|| partial_conjunction_e(black_box(&e), 2, MergeRule::Product).unwrap())
    });
}

fn bayes_factors(c: &mut Criterion) {
    let p = Probability::new(0.03).unwrap();
    let mut group = c.benchmark_group("bayes_factor");
    for (name, model, r, kind) in [
        ("beta/simple", ModelSpec::Beta, 5.0, NullKind::Simple),
        ("beta/composite", ModelSpec::Beta, 5.0, NullKind::Composite),
        ("normal/simple", ModelSpec::normal(0.5).unwrap(), 0.75, NullKind::Simple),
        ("normal/composite", ModelSpec::normal(0.5).unwrap(), 0.75, NullKind::Composite),
    ] {
        let spec = BayesFactorSpec::new(model, r, kind).unwrap();
        group.bench_function(name, |b| b.iter(|| bayes_factor(&spec, black_box(p)).unwrap()));
    }
    group.finish();

    c.bench_function("bayes_factor_spec/composite_normal_setup", |b| {
        b.iter(|| BayesFactorSpec::new(ModelSpec::normal(0.5).unwrap(), black_box(0.75), NullKind::Composite).unwrap())
    });
}

criterion_group!(benches, combiners, bayes_factors);
criterion_main!(benches);
