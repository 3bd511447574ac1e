use criterion::{criterion_group, criterion_main, Criterion};
use mrqa::distort::{apply, DistortionKind, DistortionSpec};
use mrqa::quality::{brisque_features, niqe_fit, niqe_score};
use mrqa::Normalization;
use mrqa_bench::{corpus, noisy_pair};
use std::hint::black_box;

fn distortions(c: &mut Criterion) {
    let (reference, _) = noisy_pair(0);
    let mut group = c.benchmark_group("distort");
    for kind in DistortionKind::ALL {
        let spec = DistortionSpec::new(kind, 3.0, 7).unwrap();
        group.bench_function(kind.label(), |b| b.iter(|| apply(black_box(&reference), &spec).unwrap()));
    }
    group.finish();
}

fn normalizations(c: &mut Criterion) {
    let (reference, _) = noisy_pair(0);
    let mut group = c.benchmark_group("normalize");
    for norm in Normalization::standard_set() {
        group.bench_function(norm.label(), |b| b.iter(|| norm.apply(black_box(&reference)).unwrap()));
    }
    group.finish();
}

fn natural_scene_models(c: &mut Criterion) {
    let (_, distorted) = noisy_pair(0);
    let model = niqe_fit(&corpus(20)).unwrap();
    let mut group = c.benchmark_group("nss");
    group.sample_size(20);
    group.bench_function("brisque-features", |b| b.iter(|| brisque_features(black_box(&distorted)).unwrap()));
    group.bench_function("niqe-score", |b| b.iter(|| niqe_score(black_box(&distorted), &model).unwrap()));
    group.bench_function("niqe-fit-20", |b| {
        let images = corpus(20);
        b.iter(|| niqe_fit(black_box(&images)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, distortions, normalizations, natural_scene_models);
criterion_main!(benches);
