use criterion::{black_box, criterion_group, criterion_main, Criterion};

use belldistill::{
    apply_label_map, bell_measure, canonicalize, enumerate_label_maps, evaluate, optimize,
    parity_split, rate_2copy, recurrence_step, reference_tree_2copy, residual_entropy_curve,
    werner, BlockDist, MeasuredBit, ParityMask, SearchConfig,
};

fn block(m: usize) -> BlockDist {
    werner(0.85).unwrap().tensor_power(m).unwrap()
}

fn bench_primitives(c: &mut Criterion) {
    let four = block(4);
    let mask = ParityMask::new(4, 0b10101010).unwrap();
    c.bench_function("entropy_256", |b| {
        b.iter(|| black_box(&four).entropy_bits())
    });
    c.bench_function("parity_split_m4", |b| {
        b.iter(|| parity_split(black_box(&four), &mask).unwrap())
    });
    c.bench_function("bell_measure_m4", |b| {
        b.iter(|| bell_measure(black_box(&four), 2, MeasuredBit::Amp).unwrap())
    });
    let two = block(2);
    let g = enumerate_label_maps(2).unwrap()[300].clone();
    c.bench_function("pushforward_m2", |b| {
        b.iter(|| apply_label_map(&g, black_box(&two)).unwrap())
    });
    let single = werner(0.85).unwrap();
    c.bench_function("recurrence_step", |b| {
        b.iter(|| recurrence_step(black_box(&single)).unwrap())
    });
    c.bench_function("rate_2copy", |b| {
        b.iter(|| rate_2copy(black_box(&single)).unwrap())
    });
}

fn bench_evaluator(c: &mut Criterion) {
    let two = block(2);
    let tree = reference_tree_2copy();
    c.bench_function("evaluate_2copy_tree", |b| {
        b.iter(|| evaluate(&tree, black_box(&two)).unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    let two = block(2);
    c.bench_function("canonicalize_m2", |b| {
        b.iter(|| canonicalize(black_box(&two), 1e-10).unwrap())
    });
    let cfg = SearchConfig::default();
    c.bench_function("optimize_m2_werner085", |b| {
        b.iter(|| optimize(black_box(&two), &cfg).unwrap())
    });
}

fn bench_montecarlo(c: &mut Criterion) {
    let w = werner(0.8).unwrap();
    c.bench_function("residual_entropy_n4_t10", |b| {
        b.iter(|| residual_entropy_curve(black_box(&w), 4, 8, 10, 3).unwrap())
    });
}

criterion_group!(
    benches,
    bench_primitives,
    bench_evaluator,
    bench_search,
    bench_montecarlo
);
criterion_main!(benches);
