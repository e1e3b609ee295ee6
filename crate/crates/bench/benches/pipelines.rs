use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fivephoton::harness::rate_model;
use fivephoton::measurement::outcome_distribution;
use fivephoton::protocols::{build_ghz, open_destination_teleport, Destination, Sign};
use fivephoton::{DeviceConfig, PolKet};
use fivephoton_bench::{fitted_five_photon, five_modes, pm_bases};

fn pipelines(c: &mut Criterion) {
    let fitted = DeviceConfig::fitted();
    let ideal = DeviceConfig::ideal();
    let mut g = c.benchmark_group("pipelines");
    g.sample_size(10);
    g.bench_function("build_ghz5_ideal", |b| {
        b.iter(|| build_ghz(5, black_box(&ideal)).unwrap())
    });
    g.bench_function("build_ghz5_fitted", |b| {
        b.iter(|| build_ghz(5, black_box(&fitted)).unwrap())
    });
    g.bench_function("teleport_cell_fitted", |b| {
        let dest = Destination::new(5).unwrap();
        b.iter(|| {
            open_destination_teleport(
                &PolKet::plus(),
                dest,
                (Sign::Plus, Sign::Plus),
                black_box(&fitted),
            )
            .unwrap()
        })
    });
    g.finish();
}

fn measurement(c: &mut Criterion) {
    let s = fitted_five_photon();
    let (modes, bases) = (five_modes(), pm_bases());
    c.bench_function("outcome_distribution_5_pm", |b| {
        b.iter(|| outcome_distribution(black_box(&s), &modes, &bases).unwrap())
    });
    c.bench_function("rate_model", |b| {
        b.iter(|| rate_model(black_box(&DeviceConfig::fitted())).unwrap())
    });
}

criterion_group!(benches, pipelines, measurement);
criterion_main!(benches);
