use criterion::{black_box, criterion_group, criterion_main, Criterion};
use infodyn::models::ks::{ks_initial_ensemble, BumpSpec, KsConfig, KsSolver};
use infodyn::models::sw::{
    geostrophic_init, sw_step, synthetic_jet_height, JetSpec, SwConfig, SwState,
};

fn ks(c: &mut Criterion) {
    let cfg = KsConfig::default();
    let start = ks_initial_ensemble(1, 1, &cfg.grid, &BumpSpec::default())
        .unwrap()
        .remove(0);
    let mut solver = KsSolver::new(cfg).unwrap();
    c.bench_function("ks_step_1024", |b| {
        let mut u = start.clone();
        b.iter(|| solver.step(black_box(&mut u)).unwrap())
    });
}

fn sw(c: &mut Criterion) {
    let cfg = SwConfig::default();
    let h = synthetic_jet_height(&cfg, &JetSpec::default()).unwrap();
    let (u, v) = geostrophic_init(&h, &cfg).unwrap();
    let state = SwState {
        hu: h.iter().zip(&u).map(|(h, u)| h * u).collect(),
        hv: h.iter().zip(&v).map(|(h, v)| h * v).collect(),
        h,
    };
    c.bench_function("sw_step_254x50", |b| {
        b.iter(|| sw_step(black_box(&state), &cfg).unwrap())
    });
}

criterion_group!(benches, ks, sw);
criterion_main!(benches);
