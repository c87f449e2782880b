use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use std::sync::Arc;
use wignerlab_core::ensembles::{build_potential, deform, sample_wigner, EnsembleSpec, EntryLaw, PotentialKind};
use wignerlab_core::freeconv::{ComplexPoint, FreeConvolution};
use wignerlab_core::matrix::{diagonalize, eigenvalues, Beta};
use wignerlab_core::momentflow::{build_generator, enumerate, Boundary, Range, Window};

fn solve_m(c: &mut Criterion) {
    let n = 1000;
    let t = (n as f64).powf(-0.4);
    let fc = FreeConvolution::new(build_potential(&PotentialKind::SemicircleQuantiles, n).unwrap(), t).unwrap();
    let points: Vec<ComplexPoint> = (0..32).map(|i| ComplexPoint::new(-1.5 + 0.1 * i as f64, 1e-3).unwrap()).collect();
    c.bench_function("solve_m_n1000_32_points", |b| {
        b.iter(|| points.iter().map(|&p| fc.solve_m(black_box(p)).unwrap().im).sum::<f64>())
    });
    c.bench_function("quantile_table_n1000", |b| {
        b.iter(|| {
            let fc = FreeConvolution::new(fc.potential().clone(), t).unwrap();
            fc.gamma(n / 2).unwrap()
        })
    });
}

fn diagonalize_bench(c: &mut Criterion) {
    let n = 400;
    let d = build_potential(&PotentialKind::SemicircleQuantiles, n).unwrap();
    let w = sample_wigner(&EnsembleSpec::wigner(n, Beta::Real, EntryLaw::Gaussian, 1)).unwrap();
    let h = deform(&d, 0.1, &w).unwrap();
    let mut g = c.benchmark_group("diagonalize_n400");
    g.sample_size(20);
    g.bench_function("vectors", |b| b.iter(|| diagonalize(black_box(&h)).unwrap()));
    g.bench_function("values_only", |b| b.iter(|| eigenvalues(black_box(&h)).unwrap()));
    g.finish();
}

fn generator(c: &mut Criterion) {
    let lambda: Vec<f64> = (0..400).map(|i| -2.0 + 4.0 * i as f64 / 399.0).collect();
    let space = Arc::new(enumerate(Window::new(150, 249).unwrap(), 2).unwrap());
    let mut g = c.benchmark_group("generator_window100_n2");
    g.sample_size(20);
    g.bench_function("short_range", |b| {
        b.iter(|| build_generator(&space, black_box(&lambda), Range::Short(8), Boundary::Absorb).unwrap().len())
    });
    g.finish();
}

criterion_group!(benches, solve_m, diagonalize_bench, generator);
criterion_main!(benches);
