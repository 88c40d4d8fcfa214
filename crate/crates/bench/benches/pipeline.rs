use criterion::{criterion_group, criterion_main, Criterion};
use panelgarch::{
    fit_arma, garch_filter, residual_filter, simulate, ArmaParams, DgpParams, FitOptions,
    GarchParams, Innovation, ModelOrders, SimulatedPanel, VolatilityInit,
};

fn benchmark_panel(n: usize, t: usize) -> (ModelOrders, DgpParams, SimulatedPanel) {
    let orders = ModelOrders::new(1, 1, 1, 1, 1).unwrap();
    let dgp = DgpParams {
        mu: (0..n).map(|i| 0.1 * i as f64).collect(),
        arma: ArmaParams::new(vec![3.0], vec![0.3], vec![0.3]),
        omega: (0..n).map(|i| 1.0 + 0.02 * i as f64).collect(),
        garch: GarchParams::new(vec![0.2], vec![0.4]),
    };
    let sim = simulate(&orders, &dgp, Innovation::Normal, t, 300, 12345).unwrap();
    (orders, dgp, sim)
}

fn bench_filters(c: &mut Criterion) {
    let (_, dgp, sim) = benchmark_panel(50, 200);
    c.bench_function("residual_filter 50x200", |b| {
        b.iter(|| residual_filter(&sim.panel, &dgp.arma, &dgp.mu, None).unwrap())
    });
    c.bench_function("garch_filter 50x200", |b| {
        b.iter(|| {
            garch_filter(
                &sim.u,
                &dgp.garch,
                &dgp.omega,
                VolatilityInit::UnconditionalVariance,
            )
            .unwrap()
        })
    });
}

fn bench_fit(c: &mut Criterion) {
    let (orders, _, sim) = benchmark_panel(20, 100);
    let opts = FitOptions {
        compute_covariance: false,
        ..FitOptions::default()
    };
    c.bench_function("fit_arma 20x100", |b| {
        b.iter(|| fit_arma(&sim.panel, &orders, &opts).unwrap())
    });
}

criterion_group!(benches, bench_filters, bench_fit);
criterion_main!(benches);
