use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use supergauss_core::cases::{complete_bundle, family, FamilyOptions};
use supergauss_core::grassmann::{GrassmannValue, BASIS_LEN};
use supergauss_core::*;

fn grid(n: usize) -> Arc<ConformalGrid> {
    Arc::new(ConformalGrid::unit_square(n).unwrap())
}

fn grassmann_product(c: &mut Criterion) {
    let value = |seed: f64| {
        let mut co = [Complex64::new(0.0, 0.0); BASIS_LEN];
        for (k, x) in co.iter_mut().enumerate() {
            *x = Complex64::new(seed + k as f64, seed - k as f64);
        }
        GrassmannValue::from_coeffs(co)
    };
    let (a, b) = (value(0.5), value(-1.5));
    c.bench_function("grassmann/product", |bench| {
        bench.iter(|| black_box(a) * black_box(b))
    });
}

fn wirtinger_derivative(c: &mut Criterion) {
    let mut group = c.benchmark_group("field/d_x");
    for n in [101, 201] {
        let g = grid(n);
        let f = Field::from_fn(&g, |x| (x * x.conj() + 1.0).ln());
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |bench, f| {
            bench.iter(|| f.d_x(XDir::X1))
        });
    }
    group.finish();
}

fn verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    let g = grid(101);
    for tag in [CaseTag::EucF0, CaseTag::EucF3C1, CaseTag::HypF3C1] {
        let spec = CaseSpec::default_for(tag);
        let b = family(&spec, &g, &FamilyOptions::default()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(tag.name()), &b, |bench, b| {
            bench.iter(|| verify_case(&spec, b, None).unwrap())
        });
    }
    group.finish();
}

fn transport(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrator");
    group.sample_size(10);
    let g = grid(101);
    for tag in [CaseTag::EucF0, CaseTag::CurF0] {
        let spec = CaseSpec::default_for(tag);
        let full = complete_bundle(
            &spec,
            &family(&spec, &g, &FamilyOptions::default()).unwrap(),
        )
        .unwrap();
        let fs = assemble(&spec, &full, Stencil::Fourth).unwrap();
        let omega0 = initial_frame(&spec, &full, &fs, [0, 0]).unwrap();
        group.bench_function(BenchmarkId::new("propagate", tag.name()), |bench| {
            bench.iter(|| propagate(&fs, [0, 0], &omega0, SweepOrder::RowFirst).unwrap())
        });
        group.bench_function(BenchmarkId::new("holonomy", tag.name()), |bench| {
            bench.iter(|| holonomy(&fs, [0, 0]).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    grassmann_product,
    wirtinger_derivative,
    verify,
    transport
);
criterion_main!(benches);
