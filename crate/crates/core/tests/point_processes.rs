use lwpa_core::analytic::{density_approximations, matern_density};
use lwpa_core::point_process::{
    empirical_density, matern_ii, sample_ppp, split_wifi, ClosedExclusion, Deployment, RngSeed,
};
use lwpa_core::{reference_params, Point, PointPattern, Window};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn ppp_count_matches_poisson_mean() {
    let window = Window::square(2000.0).unwrap();
    let root = RngSeed(11);
    let counts: Vec<f64> = (0..10_000)
        .map(|i| sample_ppp(2e-4, window, root.derive(i)).unwrap().len() as f64)
        .collect();
    let (mean, se) = mean_and_se(&counts);
    assert!((mean - 800.0).abs() < 3.0 * se, "mean {mean} se {se}");
    // Poisson: variance equals the mean
    let var = se * se * counts.len() as f64;
    assert!((var / 800.0 - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn empirical_density_is_unbiased() {
    let window = Window::square(300.0).unwrap();
    let d: Vec<f64> = (0..10_000)
        .map(|i| empirical_density(&sample_ppp(1e-4, window, RngSeed(5).derive(i)).unwrap()))
        .collect();
    let (mean, se) = mean_and_se(&d);
    assert!((mean - 1e-4).abs() < 3.0 * se);
}

/// Toroidal Ripley K estimate.
fn ripley_k(pattern: &PointPattern, r: f64) -> f64 {
    let w = pattern.window();
    let pts = pattern.points();
    let n = pts.len() as f64;
    let mut pairs = 0usize;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            if w.dist(*a, *b) < r {
                pairs += 2;
            }
        }
    }
    w.area() * pairs as f64 / (n * (n - 1.0))
}

#[test]
fn ppp_is_consistent_with_csr() {
    let window = Window::square(1000.0).unwrap();
    let observed = sample_ppp(1e-4, window, RngSeed(77)).unwrap();
    let n = observed.len();
    // envelope from an independent uniform generator with the same count
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    for r in [50.0, 100.0] {
        let mut sims: Vec<f64> = (0..199)
            .map(|_| {
                let pts: Vec<Point> = (0..n)
                    .map(|_| Point::new(rng.random::<f64>() * 1000.0, rng.random::<f64>() * 1000.0))
                    .collect();
                ripley_k(&PointPattern::new(window, pts).unwrap(), r)
            })
            .collect();
        sims.sort_by(f64::total_cmp);
        let k = ripley_k(&observed, r);
        assert!(k >= sims[0] && k <= sims[198], "r={r}: K={k} envelope [{}, {}]", sims[0], sims[198]);
    }
}

#[test]
fn splitting_trivial_and_thinned_densities() {
    let window = Window::square(1000.0).unwrap();
    let wifi = sample_ppp(2e-4, window, RngSeed(3)).unwrap();
    let (open, closed) = split_wifi(&wifi, 0.0, RngSeed(4)).unwrap();
    assert!(closed.is_empty());
    assert_eq!(open.len(), wifi.len());
    let (open, closed) = split_wifi(&wifi, 1.0, RngSeed(4)).unwrap();
    assert!(open.is_empty());
    assert_eq!(closed.len(), wifi.len());

    let window = Window::square(2000.0).unwrap();
    let mut open_counts = Vec::new();
    let mut closed_counts = Vec::new();
    for i in 0..2000 {
        let seed = RngSeed(8).derive(i);
        let wifi = sample_ppp(2e-4, window, seed).unwrap();
        let (open, closed) = split_wifi(&wifi, 0.5, seed).unwrap();
        assert_eq!(open.len() + closed.len(), wifi.len());
        open_counts.push(open.len() as f64);
        closed_counts.push(closed.len() as f64);
    }
    for counts in [open_counts, closed_counts] {
        let (mean, se) = mean_and_se(&counts);
        assert!((mean - 400.0).abs() < 3.0 * se, "mean {mean}");
    }
}

#[test]
fn matern_density_over_many_windows() {
    let window = Window::square(1000.0).unwrap();
    let densities: Vec<f64> = (0..200)
        .map(|i| {
            let seed = RngSeed(21).derive(i);
            let parent = sample_ppp(2e-4, window, seed).unwrap();
            empirical_density(&matern_ii(&parent, 50.0, seed).unwrap())
        })
        .collect();
    let (mean, _) = mean_and_se(&densities);
    let expected = matern_density(2e-4, 50.0);
    assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
}

#[test]
fn matern_zero_radius_and_idempotence() {
    let window = Window::square(800.0).unwrap();
    let parent = sample_ppp(3e-4, window, RngSeed(1)).unwrap();
    assert_eq!(matern_ii(&parent, 0.0, RngSeed(2)).unwrap(), parent);
    let once = matern_ii(&parent, 40.0, RngSeed(2)).unwrap();
    assert!(once.min_pairwise_distance().unwrap() >= 40.0);
    let twice = matern_ii(&once, 40.0, RngSeed(9)).unwrap();
    assert_eq!(once, twice);
}

#[test]
fn activation_density_near_third_approximation() {
    let params = reference_params(0.5, 2e-4).unwrap();
    let window = Window::square(1000.0).unwrap();
    let densities: Vec<f64> = (0..200)
        .map(|i| {
            let dep = Deployment::sample(&params, window, ClosedExclusion::ActiveClosed, RngSeed(31).derive(i)).unwrap();
            dep.check_invariants(params.delta(), params.r_serve()).unwrap();
            empirical_density(&dep.active_lwpa)
        })
        .collect();
    let (mean, _) = mean_and_se(&densities);
    let approx = density_approximations(&params).lambda_a3;
    assert!((approx - 2.178e-5).abs() < 1e-8);
    assert!((mean / approx - 1.0).abs() < 0.2, "{mean} vs {approx}");
}

#[test]
fn activation_density_monotone_in_users_and_closed_share() {
    let window = Window::square(800.0).unwrap();
    let mean_density = |p: f64, xi: f64| {
        let params = reference_params(p, xi).unwrap();
        let d: Vec<f64> = (0..300)
            .map(|i| {
                let dep = Deployment::sample(&params, window, ClosedExclusion::ActiveClosed, RngSeed(41).derive(i)).unwrap();
                empirical_density(&dep.active_lwpa)
            })
            .collect();
        mean_and_se(&d)
    };
    let by_xi: Vec<(f64, f64)> = [5e-5, 2e-4, 8e-4].iter().map(|&xi| mean_density(0.5, xi)).collect();
    for w in by_xi.windows(2) {
        assert!(w[1].0 + 3.0 * (w[0].1 + w[1].1) >= w[0].0, "{by_xi:?}");
    }
    let by_p: Vec<(f64, f64)> = [0.2, 0.5, 0.8].iter().map(|&p| mean_density(p, 2e-4)).collect();
    for w in by_p.windows(2) {
        assert!(w[1].0 <= w[0].0 + 3.0 * (w[0].1 + w[1].1), "{by_p:?}");
    }
}

#[test]
fn literal_exclusion_clears_all_closed_aps() {
    let params = reference_params(0.5, 4e-4).unwrap();
    let window = Window::square(800.0).unwrap();
    for i in 0..30 {
        let seed = RngSeed(51).derive(i);
        let active = Deployment::sample(&params, window, ClosedExclusion::ActiveClosed, seed).unwrap();
        let literal = Deployment::sample(&params, window, ClosedExclusion::AllClosed, seed).unwrap();
        literal.check_invariants(params.delta(), params.r_serve()).unwrap();
        // every closed AP is at least δ away from each literal-variant candidate
        if let Some(d) = literal.active_lwpa.min_cross_distance(&literal.wifi_closed) {
            assert!(d >= params.delta());
        }
        assert_eq!(active.active_closed, literal.active_closed);
    }
}

#[test]
fn deployments_are_deterministic() {
    let params = reference_params(0.5, 2e-4).unwrap();
    let window = Window::square(600.0).unwrap();
    let a = Deployment::sample(&params, window, ClosedExclusion::ActiveClosed, RngSeed(7)).unwrap();
    let b = Deployment::sample(&params, window, ClosedExclusion::ActiveClosed, RngSeed(7)).unwrap();
    assert_eq!(a, b);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_deployments_respect_invariants(
        seed in any::<u64>(),
        p in 0.0f64..=1.0,
        xi in 0.0f64..1e-3,
        delta in 0.0f64..80.0,
    ) {
        let params = reference_params(p, xi).unwrap().with_delta(delta).unwrap();
        let window = Window::square(400.0).unwrap();
        for exclusion in [ClosedExclusion::ActiveClosed, ClosedExclusion::AllClosed] {
            let dep = Deployment::sample(&params, window, exclusion, RngSeed(seed)).unwrap();
            prop_assert!(dep.check_invariants(delta, params.r_serve()).is_ok());
            // hexagonal packing bound for a hard-core distance δ
            let packing = 2.0 / (3f64.sqrt() * delta * delta);
            prop_assert!(empirical_density(&dep.active_lwpa) <= packing);
        }
    }
}
