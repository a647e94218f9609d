use nalgebra::DMatrix;
use sphreg::diagnostics::filter_and_refit;
use sphreg::distributions::{standard_normal, RngStream};
use sphreg::metrics::{credible_interval, sandwich_interval};
use sphreg::model::{ChainState, Dataset, McmcConfig, ModelSpec, PriorPrecision, RidgeSpec, SpikeSlabSpec};
use sphreg::sampler::steps::update_lambda;
use sphreg::sampler::{fit, log_alpha2_conditional, slice_sample_step, GammaPrior};
use sphreg::spike_slab::{log_lr, update_coordinate, update_q, update_sigma2_ss, SpikeSlabSampler};
use sphreg::synthetic::{generate_dataset, SimSetting};
use sphreg::{Error, LossKind};
use sphreg_oracle::{batch_mean_and_se, bessel_k, ks_statistic, mean_and_se, Dense};

fn state(n: usize, p: usize, alpha2: f64) -> ChainState {
    ChainState { beta: vec![0.0; p], gamma: vec![true; p], mu: 0.0, lambda: vec![1.0; n], sigma2: 1.0, alpha2, q: 0.5 }
}

fn lambda_mean_at_zero_residual(loss: LossKind, alpha2: f64, seed: u64) -> (f64, f64) {
    let mut s = state(100_000, 0, alpha2);
    let resid = vec![0.0; 100_000];
    update_lambda(&mut s, &resid, loss, &mut RngStream::new(seed, 0)).unwrap();
    mean_and_se(&s.lambda)
}

#[test]
fn lambda_conditional_at_zero_residual() {
    let a2: f64 = 2.0;
    // Unscaled mixture: GIG(a2, a2, 1/2) has mean K_{3/2}(a2) / K_{1/2}(a2).
    let want = bessel_k(1.5, a2) / bessel_k(0.5, a2);
    let (m, se) = lambda_mean_at_zero_residual(LossKind::UnscaledPh, a2, 1);
    assert!((m - want).abs() < 3.0 * se, "{m} vs {want}");

    // SPH: GIG(1 + a2, a2, 1/2).
    let w = (a2 * (1.0 + a2)).sqrt();
    let want = (a2 / (1.0 + a2)).sqrt() * bessel_k(1.5, w) / bessel_k(0.5, w);
    let (m, se) = lambda_mean_at_zero_residual(LossKind::Sph, a2, 2);
    assert!((m - want).abs() < 3.0 * se, "{m} vs {want}");

    // L1: GIG(2, 0, 1/2) is Gamma(1/2, rate 1).
    let (m, se) = lambda_mean_at_zero_residual(LossKind::L1, a2, 3);
    assert!((m - 0.5).abs() < 3.0 * se, "{m}");
}

#[test]
fn scale_parameter_untouched_without_alpha() {
    let mut rng = RngStream::new(4, 0);
    let x = DMatrix::from_fn(30, 2, |_, _| standard_normal(&mut rng));
    let y: Vec<f64> = (0..30).map(|_| standard_normal(&mut rng)).collect();
    let data = Dataset::new(y, x).unwrap();
    let config = McmcConfig { n_burnin: 0, n_draws: 50, ..Default::default() };
    for loss in [LossKind::L1, LossKind::L2] {
        let draws = fit(&data, &ModelSpec::Ridge(RidgeSpec::with_loss(loss)), &config, 0).unwrap();
        assert!(draws.alpha2.iter().all(|a| *a == 1.0), "{loss:?}");
    }
}

#[test]
fn alpha2_slice_recovers_prior_without_data() {
    let prior = GammaPrior { shape: 1.0, rate: 1.0 };
    let mut rng = RngStream::new(5, 0);
    let mut a = 1.0;
    let mut xs = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        a = slice_sample_step(
            |v| log_alpha2_conditional(v, &[], LossKind::Sph, Some(prior)),
            a,
            1.0,
            50,
            (0.0, f64::INFINITY),
            &mut rng,
        )
        .unwrap();
        xs.push(a);
    }
    xs.sort_by(f64::total_cmp);
    let ks = ks_statistic(&xs, |x| 1.0 - (-x).exp());
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn alpha2_conditional_matches_quadrature_bessel() {
    // Zero residuals, no prior: -(n/2) ln a2 - n ln K_1(a s) - s n a.
    let n = 25.0;
    let resid = vec![0.0; 25];
    for a2 in [0.3, 4.0] {
        let s = (1.0f64 + a2).sqrt();
        let a = f64::sqrt(a2);
        let want = -0.5 * n * f64::ln(a2) - n * bessel_k(1.0, a * s).ln() - s * n * a;
        let got = log_alpha2_conditional(a2, &resid, LossKind::Sph, None);
        assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
    }
}

fn slice_chain(width: f64, max_steps: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    let mut x = 0.0;
    let mut xs = Vec::with_capacity(100_000);
    for _ in 0..100_000 {
        x = slice_sample_step(|v| -0.5 * v * v, x, width, max_steps, (f64::NEG_INFINITY, f64::INFINITY), &mut rng)
            .unwrap();
        xs.push(x);
    }
    xs.sort_by(f64::total_cmp);
    xs
}

fn normal_cdf(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().cdf(x)
}

#[test]
fn slice_sampler_leaves_normal_invariant() {
    let ks = ks_statistic(&slice_chain(1.0, 50, 6), normal_cdf);
    assert!(ks < 0.01, "stepping out: {ks}");
    // An interval wide enough to cover the slice: shrinkage alone.
    let ks = ks_statistic(&slice_chain(20.0, 0, 7), normal_cdf);
    assert!(ks < 0.01, "shrink only: {ks}");
}

#[test]
fn slice_sampler_respects_domain() {
    let mut rng = RngStream::new(8, 0);
    let mut x = 0.5;
    for _ in 0..10_000 {
        x = slice_sample_step(|_| 0.0, x, 5.0, 10, (0.0, 1.0), &mut rng).unwrap();
        assert!(x > 0.0 && x < 1.0);
    }
}

/// `ln N(r | 0, S1) - ln N(r | 0, S0)` with `S0 = sigma2 L`, `S1 = S0 + tau2 x x'`.
fn dense_log_lr(r: &[f64], x: &[f64], lambda: &[f64], sigma2: f64, tau2: f64) -> f64 {
    let s0 = Dense::diag(&lambda.iter().map(|l| sigma2 * l).collect::<Vec<_>>());
    let mut s1 = s0.clone();
    s1.add_outer(tau2, x);
    sphreg_oracle::mvn_log_density_zero_mean(r, &s1) - sphreg_oracle::mvn_log_density_zero_mean(r, &s0)
}

#[test]
fn log_lr_toy_instance() {
    let (x, r) = ([1.0, 0.0, 1.0], [2.0, 1.0, -1.0]);
    let got = log_lr(&r, &x, &[1.0; 3], 1.0, 4.0);
    let want = dense_log_lr(&r, &x, &[1.0; 3], 1.0, 4.0);
    assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
}

#[test]
fn inclusion_boundaries() {
    let x = [1.0, -2.0, 0.5];
    let mut rng = RngStream::new(9, 0);
    for (q, want) in [(0.0, false), (1.0, true)] {
        let mut s = state(3, 1, 1.0);
        s.q = q;
        for _ in 0..200 {
            let mut resid = vec![3.0, -6.0, 1.5];
            s.beta[0] = 0.0;
            update_coordinate(0, &x, &mut s, &mut resid, 1e4, &mut rng);
            assert_eq!(s.gamma[0], want);
            assert_eq!(s.beta[0] != 0.0, want);
        }
    }
}

#[test]
fn weight_update_moments() {
    let spec = SpikeSlabSpec::default();
    let mut gamma = vec![false; 10];
    gamma[..4].iter_mut().for_each(|g| *g = true);
    let mut rng = RngStream::new(10, 0);
    let xs: Vec<f64> = (0..100_000).map(|_| update_q(&gamma, &spec, &mut rng).unwrap()).collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - 5.0 / 12.0).abs() < 3.0 * se);
    // All active: Beta(1 + 10, 1).
    let xs: Vec<f64> = (0..100_000).map(|_| update_q(&[true; 10], &spec, &mut rng).unwrap()).collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - 11.0 / 12.0).abs() < 3.0 * se);
}

#[test]
fn spike_slab_scale_conditional_is_conjugate() {
    let mut spec = SpikeSlabSpec::with_loss(LossKind::Sph);
    spec.common.include_intercept = false;
    spec.common.include_sigma = true;
    spec.common.a_sigma = 3.0;
    spec.common.b_sigma = 2.0;
    let resid = [1.0, -2.0, 0.5, 3.0];
    let mut s = state(4, 2, 1.0);
    s.lambda = vec![1.0, 2.0, 0.5, 4.0];
    let rss: f64 = resid.iter().zip(&s.lambda).map(|(r, l)| r * r / l).sum();
    let (shape, scale) = (3.0 + 2.0, 2.0 + rss / 2.0);
    let mut rng = RngStream::new(11, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| {
            update_sigma2_ss(&mut s, &resid, &spec, &mut rng).unwrap();
            s.sigma2
        })
        .collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - scale / (shape - 1.0)).abs() < 3.0 * se, "{m}");
}

#[test]
fn sweep_keeps_residuals_and_zeros_exact() {
    let setting =
        SimSetting { n: 40, p: 30, beta_pattern: sphreg::synthetic::BetaPattern::Sparse, ..Default::default() };
    let sim = generate_dataset(&setting, &mut RngStream::new(12, 0)).unwrap();
    let spec = SpikeSlabSpec::default();
    let config = McmcConfig::default();
    let mut sampler = SpikeSlabSampler::new(&sim.data, &spec, &config).unwrap();
    let mut s = sampler.initial_state().unwrap();
    let mut rng = RngStream::new(12, 1);
    for _ in 0..200 {
        sampler.step(&mut s, &mut rng).unwrap();
        for (b, g) in s.beta.iter().zip(&s.gamma) {
            assert_eq!(*b == 0.0, !*g);
        }
        let incremental = sampler.residuals().to_vec();
        sampler.sync_residuals(&s);
        for (a, b) in incremental.iter().zip(sampler.residuals()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

fn dense_problem(n: usize, seed: u64) -> Dataset {
    let setting = SimSetting { n, p: 10, ..Default::default() };
    generate_dataset(&setting, &mut RngStream::new(seed, 0)).unwrap().data
}

#[test]
fn ridge_posterior_mean_recovers_truth() {
    let data = dense_problem(500, 13);
    let truth = sphreg::synthetic::beta_true(&SimSetting { p: 10, ..Default::default() });
    let config = McmcConfig { n_burnin: 1000, n_draws: 2000, seed: 13, ..Default::default() };
    let draws = fit(&data, &ModelSpec::Ridge(RidgeSpec::default()), &config, 0).unwrap();
    let worst = draws.beta_mean().iter().zip(&truth).map(|(m, t)| (m - t).abs()).fold(0.0, f64::max);
    assert!(worst < 0.15, "{worst}");
}

#[test]
fn chain_length_and_determinism() {
    let data = dense_problem(60, 14);
    let config = McmcConfig { n_burnin: 0, n_draws: 3, seed: 1, ..Default::default() };
    for spec in [ModelSpec::Ridge(RidgeSpec::default()), ModelSpec::SpikeSlab(SpikeSlabSpec::default())] {
        let a = fit(&data, &spec, &config, 7).unwrap();
        assert_eq!(a.n_draws, 3);
        assert_eq!(a.mu.len(), 3);
        let config = McmcConfig { n_burnin: 50, n_draws: 100, ..config.clone() };
        let b = fit(&data, &spec, &config, 7).unwrap();
        let c = fit(&data, &spec, &config, 7).unwrap();
        assert_eq!(b, c);
        let d = fit(&data, &spec, &config, 8).unwrap();
        assert_ne!(b.beta, d.beta);
    }
}

#[test]
fn chain_is_stationary_after_burn_in() {
    let mut rng = RngStream::new(15, 0);
    let x = DMatrix::from_fn(50, 3, |_, _| standard_normal(&mut rng));
    let y: Vec<f64> = (0..50).map(|i| x[(i, 0)] - 0.5 * x[(i, 2)] + standard_normal(&mut rng)).collect();
    let data = Dataset::new(y, x).unwrap();
    let config = McmcConfig { n_burnin: 1000, n_draws: 20_000, seed: 15, record_lambda: false, ..Default::default() };
    let draws = fit(&data, &ModelSpec::Ridge(RidgeSpec::default()), &config, 0).unwrap();
    for j in 0..3 {
        let b = draws.beta_coordinate(j);
        let (m1, se1) = batch_mean_and_se(&b[..2000], 20);
        let (m2, se2) = batch_mean_and_se(&b[10_000..], 20);
        let z = (m1 - m2) / (se1 * se1 + se2 * se2).sqrt();
        assert!(z.abs() < 4.0, "coordinate {j}: z = {z}");
    }
}

#[test]
fn sandwich_matches_unadjusted_for_conjugate_gaussian() {
    let data = dense_problem(200, 16);
    let spec = RidgeSpec { precision: PriorPrecision::Isotropic(1e-8), ..RidgeSpec::with_loss(LossKind::L2) };
    let config = McmcConfig { n_burnin: 500, n_draws: 10_000, seed: 16, ..Default::default() };
    let draws = fit(&data, &ModelSpec::Ridge(spec), &config, 0).unwrap();
    let s2 = sphreg::stats::mean(&draws.sigma2);
    for j in 0..10 {
        let et = credible_interval(&draws, j, 0.9).unwrap();
        let sw = sandwich_interval(&draws, &data, s2, j, 0.9).unwrap();
        let rel = (sw.length() - et.length()).abs() / et.length();
        assert!(rel < 0.05, "coordinate {j}: {rel}");
    }
}

#[test]
fn refit_without_flags_equals_fresh_fit() {
    // Uniform small residuals: no observation stands out.
    let mut rng = RngStream::new(17, 0);
    let x = DMatrix::from_fn(40, 2, |_, _| standard_normal(&mut rng));
    let y: Vec<f64> = (0..40).map(|i| x[(i, 0)] + 0.01 * (i as f64 / 40.0 - 0.5)).collect();
    let data = Dataset::new(y, x).unwrap();
    let spec = ModelSpec::Ridge(RidgeSpec::default());
    let config = McmcConfig { n_burnin: 100, n_draws: 200, seed: 17, ..Default::default() };
    let (report, refit) = filter_and_refit(&data, &spec, &config, 3).unwrap();
    assert!(report.flagged.is_empty(), "{:?}", report.flagged);
    assert_eq!(refit, fit(&data, &spec, &config, 4).unwrap());
}

#[test]
fn refit_errors() {
    let data = dense_problem(30, 18);
    let config = McmcConfig { n_burnin: 10, n_draws: 20, ..Default::default() };
    let l2 = ModelSpec::Ridge(RidgeSpec::with_loss(LossKind::L2));
    let err = filter_and_refit(&data, &l2, &config, 0).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)), "{err}");
    assert!(err.to_string().contains("observation-level scales"));

    // Six rows cannot identify eleven ridge coefficients.
    let tiny = data.select_rows(&[0, 1, 2, 3, 4, 5]);
    let err = filter_and_refit(&tiny, &ModelSpec::Ridge(RidgeSpec::default()), &config, 0).unwrap_err();
    assert!(matches!(err, Error::TooFew { .. }), "{err}");
}
