use criterion::{black_box, criterion_group, criterion_main, Criterion};
use gpj_core::bracket::integral_i;
use gpj_core::eulerian::evolve;
use gpj_core::flowmap::FlowMap;
use gpj_core::{classify, make_profile, solve_eta, ModelParams, ProfileKind};

fn integrals(c: &mut Criterion) {
    let params = ModelParams::new(1.0).unwrap();
    for kind in [ProfileKind::Parabola, ProfileKind::Cosine] {
        let profile = make_profile(kind, 1.0, None, None).unwrap();
        c.bench_function(&format!("integral_i/{kind}"), |b| {
            b.iter(|| integral_i(&profile, &params, black_box(0.9), 1e-12).unwrap())
        });
    }
    let zigzag = make_profile(ProfileKind::FourierZigzag, 1.0, Some(16), None).unwrap();
    c.bench_function("integral_i/fourier_zigzag[16]", |b| {
        b.iter(|| integral_i(&zigzag, &params, black_box(0.9), 1e-12).unwrap())
    });
}

fn clock(c: &mut Criterion) {
    let profile = make_profile(ProfileKind::Cosine, 1.0, None, None).unwrap();
    for a in [-3.0, -2.0, 0.5, 1.0] {
        let params = ModelParams::new(a).unwrap();
        c.bench_function(&format!("solve_eta/cosine/a={a}"), |b| {
            b.iter(|| solve_eta(&profile, &params, black_box(3.0), 1e-10).unwrap())
        });
    }
    let params = ModelParams::new(-2.0).unwrap();
    let traj = solve_eta(&profile, &params, 1.0, 1e-10).unwrap();
    let map = FlowMap::new(&profile, &params, &traj).unwrap();
    c.bench_function("flowmap/sample/65", |b| b.iter(|| map.sample(black_box(0.8), 65).unwrap()));
    c.bench_function("classify/cosine/a=1", |b| {
        let params = ModelParams::new(1.0).unwrap();
        b.iter(|| classify(&profile, &params, 4).unwrap())
    });
}

fn eulerian(c: &mut Criterion) {
    let profile = make_profile(ProfileKind::Cosine, 1.0, None, None).unwrap();
    let params = ModelParams::new(-2.0).unwrap();
    let mut group = c.benchmark_group("eulerian");
    group.sample_size(10);
    for n in [128, 256] {
        group.bench_function(format!("evolve/n={n}"), |b| {
            b.iter(|| evolve(&profile, &params, black_box(0.5), n, 0.5).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, integrals, clock, eulerian);
criterion_main!(benches);
