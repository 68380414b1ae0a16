use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use sqkd_core::oracle::{
    build_squeezed_wavefunction, evolve_characteristic, pdf_from_characteristic, CharacteristicFunction1D, Grid1D, PSampling,
    WavefunctionGrid2D,
};
use sqkd_core::Quadrature;

fn beam_splitter_grid(c: &mut Criterion) {
    let n = 512;
    let psi = build_squeezed_wavefunction(Quadrature::X1, 1.5, 1.0, Grid1D::centered(1.0, 4.0, n).unwrap()).unwrap();
    let vac = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, Grid1D::centered(0.0, 4.0, n).unwrap()).unwrap();
    let joint = WavefunctionGrid2D::product(&psi, &vac);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("beam_splitter_transform_512x512", |b| {
        b.iter(|| joint.beam_splitter_transform(black_box(0.99), black_box(0.01)).unwrap())
    });
    group.finish();
}

fn characteristic(c: &mut Criterion) {
    let r = 2.0;
    let grid = Grid1D::centered(0.0, 12.0, 1024).unwrap();
    let psi = build_squeezed_wavefunction(Quadrature::X1, r, 0.0, grid).unwrap();
    let var0 = (-2.0 * r).exp() / 4.0;
    let sampling = PSampling::for_evolution(var0, 1e-2, 24.0).unwrap();
    let chi0 = CharacteristicFunction1D::from_wavefunction(&psi, sampling);
    let chi = evolve_characteristic(&chi0, 1e-2).unwrap();
    let out = Grid1D::centered(0.0, 1.0, 1024).unwrap();
    c.bench_function("oracle/evolve_characteristic", |b| b.iter(|| evolve_characteristic(&chi0, black_box(1e-2)).unwrap()));
    c.bench_function("oracle/pdf_from_characteristic", |b| b.iter(|| pdf_from_characteristic(&chi, &out).unwrap()));
}

criterion_group!(benches, beam_splitter_grid, characteristic);
criterion_main!(benches);
