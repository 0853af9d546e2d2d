use divfx::control::{unrestricted_solution, ProblemSpec, ValueFunction};
use divfx::levy::{presets, LevyTriplet};
use divfx::montecarlo::{
    ruin_probability_constant_rate, sample_levy_increment, simulate_value, Moments, SimConfig,
    StrategySpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn discount_factor_moments(fx: &LevyTriplet, delta: f64, n: usize, seed: u64) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (-delta - sample_levy_increment(fx, 1.0, &mut rng)).exp())
        .collect()
}

#[test]
fn brownian_increments_pass_ks() {
    let fx = LevyTriplet::new(1.0, vec![], 0.0).unwrap();
    let dt = 0.01;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut xs: Vec<f64> = (0..n)
        .map(|_| sample_levy_increment(&fx, dt, &mut rng))
        .collect();
    xs.sort_by(f64::total_cmp);
    let law = Normal::new(0.0, dt.sqrt()).unwrap();
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n as f64)
                .abs()
                .max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
}

#[test]
fn bsp1_discount_factor_mean() {
    let (fx, delta) = presets::bsp1();
    let m = discount_factor_moments(&fx, delta, 1_000_000, 2);
    let target = (-0.05f64).exp();
    assert!(
        (m.mean - target).abs() <= 4.0 * m.stderr(),
        "{} +- {} vs {target}",
        m.mean,
        m.stderr()
    );
}

/// Target `e^{-β}` with `β` from the closed-form NIG term.
#[test]
fn bsp2_discount_factor_mean_matches_beta() {
    let (fx, delta) = presets::bsp2();
    let m = discount_factor_moments(&fx, delta, 1_000_000, 3);
    let target = (-0.6f64).exp();
    assert!(
        (m.mean - target).abs() <= 4.0 * m.stderr(),
        "{} +- {} vs {target}",
        m.mean,
        m.stderr()
    );
}

/// Target `e^{-δ}·E[e^{-L_1}]` from the NIG Laplace transform of the simulated law.
#[test]
fn bsp2_discount_factor_mean_matches_laplace_transform() {
    let (fx, delta) = presets::bsp2();
    let m = discount_factor_moments(&fx, delta, 1_000_000, 3);
    let target = (-delta + fx.neg_unit_exponent().unwrap()).exp();
    assert!((target - (-0.4f64).exp()).abs() < 1e-12);
    assert!(
        (m.mean - target).abs() <= 4.0 * m.stderr(),
        "{} +- {} vs {target}",
        m.mean,
        m.stderr()
    );
}

#[test]
fn ruin_edge_cases() {
    let cfg = SimConfig {
        n_paths: 100_000,
        seed: 5,
        ..Default::default()
    };
    let r = ruin_probability_constant_rate(1.0, 1.0, 0.3, 0.0, &cfg).unwrap();
    assert_eq!(r.analytic, 1.0);
    assert_eq!(r.mc.mean, 1.0);

    let r = ruin_probability_constant_rate(1.0, 1.0, 0.0, 20.0, &cfg).unwrap();
    assert!((r.analytic - (-40f64).exp()).abs() < 1e-30);
    assert!(r.analytic < 4.3e-18);
    assert_eq!(r.mc.mean, 0.0);
    assert_eq!(r.mc.n, 100_000);
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let (fx, delta) = presets::bsp1();
    let spec = ProblemSpec::from_triplet(
        1.0,
        1.0,
        delta,
        divfx::control::PayoutMode::Unrestricted,
        &fx,
    )
    .unwrap();
    let cfg = SimConfig {
        n_paths: 3000,
        dt: 0.02,
        seed: 8,
        antithetic: true,
        ..Default::default()
    };
    let strategy = StrategySpec::ReflectionBarrier { barrier: 2.0 };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_value(&spec, &fx, &strategy, &cfg, 1.0, 0.0).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

#[test]
fn unrestricted_error_does_not_grow_as_dt_halves() {
    let spec = ProblemSpec::unrestricted(1.0, 1.0, 0.5).unwrap();
    let g = unrestricted_solution(&spec).unwrap();
    let target = g.value(1.0).unwrap();
    let strategy = StrategySpec::ReflectionBarrier { barrier: g.x_u };
    let runs: Vec<(f64, f64)> = [1e-2, 5e-3, 2.5e-3]
        .into_iter()
        .map(|dt| {
            let cfg = SimConfig {
                n_paths: 40_000,
                dt,
                seed: 13,
                ..Default::default()
            };
            let e = simulate_value(&spec, &LevyTriplet::zero(), &strategy, &cfg, 1.0, 0.0).unwrap();
            ((e.mean - target).abs(), e.stderr)
        })
        .collect();
    for w in runs.windows(2) {
        let (coarse, se_c) = w[0];
        let (fine, se_f) = w[1];
        assert!(
            fine <= coarse + 3.0 * (se_c * se_c + se_f * se_f).sqrt(),
            "{runs:?}"
        );
    }
}

#[test]
fn fx_start_factorises() {
    let (fx, delta) = presets::bsp2();
    let spec = ProblemSpec::from_triplet(
        1.0,
        1.0,
        delta,
        divfx::control::PayoutMode::Restricted { xi: 1.0 },
        &fx,
    )
    .unwrap();
    let cfg = SimConfig {
        n_paths: 1000,
        dt: 0.02,
        seed: 21,
        ..Default::default()
    };
    let s = StrategySpec::ThresholdRate {
        barrier: 0.5,
        rate: 1.0,
    };
    let base = simulate_value(&spec, &fx, &s, &cfg, 1.0, 0.0).unwrap();
    let shifted = simulate_value(&spec, &fx, &s, &cfg, 1.0, 0.7).unwrap();
    let f = (-0.7f64).exp();
    assert!((shifted.mean - f * base.mean).abs() <= 1e-12 * base.mean);
    assert!((shifted.stderr - f * base.stderr).abs() <= 1e-12 * base.stderr);
}
