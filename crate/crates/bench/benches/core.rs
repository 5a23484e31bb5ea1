use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mudecay_core::asymptotics::{decay_integral, DecayChannel, TestModeFunction};
use mudecay_core::bounds::compute_bounds;
use mudecay_core::dirac::{vertex_contract, Spinor4};
use mudecay_core::fock::{car_exact_deviation, CarPair};
use mudecay_core::hamiltonian::{
    commutator_identities, seeded_coeffs, vertex_integral, Channel, Variant,
};
use mudecay_core::landau::LandauQN;
use mudecay_core::spectral::{krylov_eigh, sectored_solve};
use mudecay_core::{Model, ModelConfig};
use num_complex::Complex64 as C64;

fn spinors(c: &mut Criterion) {
    let s = |k: f64| Spinor4::new([0.1, 0.2, 0.3, 0.4].map(|x: f64| C64::new(x * k, 1.0 - x)));
    let (a, b, cc, d) = (s(1.0), s(2.0), s(-1.0), s(0.5));
    c.bench_function("vertex_contract", |bch| {
        bch.iter(|| vertex_contract(black_box(&a), black_box(&b), black_box(&cc), black_box(&d)))
    });
    let cfg = ModelConfig::default();
    let xi1 = LandauQN::new(-1, 1, 0.2, 0.3).unwrap();
    let xi2 = LandauQN::new(-1, 0, 0.1, -0.4).unwrap();
    c.bench_function("vertex_integral", |bch| {
        bch.iter(|| {
            vertex_integral(
                &cfg,
                &xi1,
                &xi2,
                &[0.1, 0.2, 0.3],
                &[0.5, -0.1, 0.2],
                Variant::Decay,
            )
            .unwrap()
        })
    });
}

fn fock(c: &mut Criterion) {
    c.bench_function("car_exact_10_modes", |b| {
        b.iter(|| car_exact_deviation(10, CarPair::Mixed))
    });
}

fn hamiltonian(c: &mut Criterion) {
    let cfg = ModelConfig::default();
    let mut g = c.benchmark_group("hamiltonian");
    g.sample_size(10);
    g.bench_function("build_model", |b| b.iter(|| Model::build(&cfg).unwrap()));
    let model = Model::build(&cfg).unwrap();
    let bounds = compute_bounds(&cfg).unwrap();
    let h = model.total(bounds.g, bounds.g0);
    g.bench_function("sectored_solve", |b| {
        b.iter(|| sectored_solve(&model, &h).unwrap())
    });
    g.bench_function("krylov_lowest_4", |b| {
        b.iter(|| krylov_eigh(&h.matrix, 4, 1e-9, 400, 1).unwrap())
    });
    let f = seeded_coeffs(model.space.grids.grid(Channel::B1.species()).len(), 1, 0);
    g.bench_function("commutators_electron", |b| {
        b.iter(|| commutator_identities(&model, Channel::B1, &f).unwrap())
    });
    g.finish();
}

fn decay(c: &mut Criterion) {
    let cfg = ModelConfig::default();
    let f = TestModeFunction::from_config(&cfg, DecayChannel::Electron);
    let mut g = c.benchmark_group("decay");
    g.sample_size(10);
    g.bench_function("electron_t50", |b| {
        b.iter(|| decay_integral(&cfg, &f, 50.0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, spinors, fock, hamiltonian, decay);
criterion_main!(benches);
