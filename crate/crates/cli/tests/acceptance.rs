//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line straight to
//! stderr (bypassing the test harness capture) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use lwpa_cli::config::EngineSettings;
use lwpa_cli::presets::{delta_grid, run_figure_preset, theta_grid, xi_grid, FigureOutput, FigurePreset, PresetOptions};
use lwpa_core::analytic::{
    ase_breakdown, ase_improvement, cellular_rate_improvement, lte_success_probability, matern_density,
    wifi_success_probability, AseBaseline, DensityApproximations,
};
use lwpa_core::montecarlo::{estimate_rate, estimate_wifi_success, EmpiricalCcdf, McConfig};
use lwpa_core::numerics::{
    laplace_interference, laplace_interference_alpha4, laplace_interference_fast, QuadratureConfig,
};
use lwpa_core::point_process::{empirical_density, matern_ii, sample_ppp, RngSeed};
use lwpa_core::{reference_params, NetworkParams, Window};

// Tolerances and budgets, one block per criterion.
const C1_REL_TOL: f64 = 1e-6;
const C1_BUDGET: Duration = Duration::from_secs(1);
const C2_ABS_TOL: f64 = 1e-6;
const C2_BUDGET: Duration = Duration::from_secs(1);
const C3_STANDARD_ERRORS: f64 = 3.0;
const C3_WINDOWS: u64 = 200;
const C3_SIDE: f64 = 2000.0;
const C3_BUDGET: Duration = Duration::from_secs(30);
const C4_REL_TOL: f64 = 0.20;
const C4_REPLICATIONS: usize = 500;
const C4_BUDGET: Duration = Duration::from_secs(5 * 60);
const C5_ABS_TOL: f64 = 0.03;
const C5_MIN_SAMPLES: usize = 100_000;
const C5_REPLICATIONS: usize = 500;
const C5_FADING_DRAWS: usize = 200;
const C5_BUDGET: Duration = Duration::from_secs(10 * 60);
const C6_BUDGET: Duration = Duration::from_secs(2 * 60);
const C7_BUDGET: Duration = Duration::from_secs(2 * 60);
const C8_BUDGET: Duration = Duration::from_secs(1);
const C9_QUADRATURE_TOL: f64 = 1e-9;
const C10_BUDGET: Duration = Duration::from_secs(10 * 60);

const SEED: u64 = 20_170_521;
const P_SET: [f64; 3] = [0.2, 0.5, 0.8];

fn report(id: u32, pass: bool, summary: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{} criterion {id}: {summary}", if pass { "PASS" } else { "FAIL" });
}

fn info(id: u32, line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "     criterion {id}: {line}");
}

fn finish(id: u32, failures: &[String], elapsed: Duration, budget: Duration, summary: &str) {
    let mut failures = failures.to_vec();
    if elapsed > budget {
        failures.push(format!("runtime {elapsed:?} exceeds {budget:?}"));
    }
    for f in &failures {
        info(id, f);
    }
    report(id, failures.is_empty(), &format!("{summary} ({elapsed:.2?})"));
    assert!(failures.is_empty(), "criterion {id} failed: {failures:#?}");
}

fn params(p: f64, xi: f64) -> NetworkParams {
    reference_params(p, xi).unwrap()
}

fn mc(replications: usize, draws: usize) -> McConfig {
    McConfig::new(replications, Window::square(2000.0).unwrap(), draws, RngSeed(SEED))
}

#[test]
fn criterion_01_laplace_closed_form() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let d = DensityApproximations::new(&params(0.5, 2e-4));
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for lambda in [d.lambda_tilde_w2, d.lambda_active_wifi()] {
        for i in 0..20 {
            for j in 0..20 {
                let s = 10f64.powf(-2.0 + 10.0 * i as f64 / 19.0);
                let x = 100.0 * j as f64 / 19.0;
                let generic = laplace_interference(s, x, lambda, 4.0, &cfg).unwrap();
                let closed = (-PI * lambda * s.sqrt() * (PI / 2.0 - (x * x / s.sqrt()).atan())).exp();
                let rel = (generic - closed).abs() / closed;
                worst = worst.max(rel);
                if rel > C1_REL_TOL {
                    failures.push(format!("lambda={lambda:e} s={s:e} x={x}: relative error {rel:e}"));
                }
            }
        }
    }
    finish(1, &failures, start.elapsed(), C1_BUDGET, &format!("generic Laplace vs alpha=4 closed form, worst relative error {worst:.2e}"));
}

#[test]
fn criterion_02_lte_interference_limited() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let p = params(0.5, 2e-4).with_sigma2(0.0).unwrap();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for theta in [0.1f64, 1.0, 10.0] {
        let exact = 1.0 / (1.0 + theta.sqrt() * (PI / 2.0 - (1.0 / theta.sqrt()).atan()));
        let got = lte_success_probability(theta, &p, &cfg).unwrap();
        worst = worst.max((got - exact).abs());
        if (got - exact).abs() > C2_ABS_TOL {
            failures.push(format!("theta={theta}: {got} vs {exact}"));
        }
    }
    finish(2, &failures, start.elapsed(), C2_BUDGET, &format!("LTE success at sigma2=0, worst error {worst:.2e}"));
}

#[test]
fn criterion_03_matern_density() {
    let start = Instant::now();
    let window = Window::square(C3_SIDE).unwrap();
    let delta = 50.0;
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for load in [0.5, 1.57, 5.0] {
        let lambda = load / (PI * delta * delta);
        let densities: Vec<f64> = (0..C3_WINDOWS)
            .map(|i| {
                let seed = RngSeed(SEED).derive(i);
                empirical_density(&matern_ii(&sample_ppp(lambda, window, seed).unwrap(), delta, seed).unwrap())
            })
            .collect();
        let n = densities.len() as f64;
        let mean = densities.iter().sum::<f64>() / n;
        let se = (densities.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let expected = matern_density(lambda, delta);
        let z = (mean - expected) / se;
        parts.push(format!("load {load}: z={z:+.2}"));
        if z.abs() > C3_STANDARD_ERRORS {
            failures.push(format!("load {load}: mean {mean:e} vs {expected:e}, {z:.2} standard errors"));
        }
    }
    finish(3, &failures, start.elapsed(), C3_BUDGET, &format!("Matern II density, {}", parts.join(", ")));
}

#[test]
fn criterion_04_density_reproduction() {
    let start = Instant::now();
    let opts = PresetOptions {
        base: params(0.5, 2e-4),
        mc: mc(C4_REPLICATIONS, 1),
        settings: EngineSettings::default(),
        engines: None,
        p_set: Some(P_SET.to_vec()),
    };
    let FigureOutput::Density(table) = run_figure_preset(FigurePreset::Fig2, &opts).unwrap() else {
        unreachable!("fig2 yields a density table")
    };
    let grid = xi_grid(false);
    let cell = |p: f64, xi: f64| {
        let row = table.rows.iter().find(|r| r.p == p && r.xi_u == xi).unwrap();
        (row.approx[2], *row.mc.as_ref().unwrap().as_ref().unwrap())
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    for &p in &P_SET {
        for w in grid.windows(2) {
            let (_, a) = cell(p, w[0]);
            let (_, b) = cell(p, w[1]);
            if b.mean < a.mean - (a.ci_halfwidth + b.ci_halfwidth) {
                failures.push(format!("p={p}: MC density falls from xi={:e} to xi={:e}", w[0], w[1]));
            }
        }
    }
    for &xi in &grid {
        for w in P_SET.windows(2) {
            let (_, a) = cell(w[0], xi);
            let (_, b) = cell(w[1], xi);
            if b.mean > a.mean + (a.ci_halfwidth + b.ci_halfwidth) {
                failures.push(format!("xi={xi:e}: MC density rises from p={} to p={}", w[0], w[1]));
            }
        }
    }
    for &p in &P_SET {
        for &xi in &grid {
            let d = DensityApproximations::new(&params(p, xi));
            let (approx, est) = cell(p, xi);
            let rel = (approx - est.mean).abs() / est.mean;
            if d.validity_a {
                checked += 1;
                info(4, &format!("p={p} xi={:.0}/km2 lambda_A3/MC = {:.3}", xi * 1e6, approx / est.mean));
                if rel > C4_REL_TOL {
                    failures.push(format!(
                        "p={p} xi={:.0}/km2: lambda_A3={approx:.4e} vs MC {:.4e} ± {:.1e} ({:.1}% off)",
                        xi * 1e6,
                        est.mean,
                        est.ci_halfwidth,
                        100.0 * rel
                    ));
                }
            }
        }
    }
    finish(
        4,
        &failures,
        start.elapsed(),
        C4_BUDGET,
        &format!("density monotonicity and lambda_A3 within 20% at {checked} valid grid points"),
    );
}

#[test]
fn criteria_05_and_09_success_curves_and_rate_identity() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let thetas = theta_grid();
    let config = mc(C5_REPLICATIONS, C5_FADING_DRAWS);
    let mut failures5 = Vec::new();
    let mut failures9 = Vec::new();
    let mut analytic_curves = Vec::new();
    let mut worst = 0.0f64;
    for &p in &P_SET {
        let params = params(p, 2e-4);
        let interferers = DensityApproximations::new(&params).lambda_active_wifi();
        let analytic: Vec<f64> = thetas
            .iter()
            .map(|&t| wifi_success_probability(t, &params, interferers, &cfg).unwrap())
            .collect();
        let est = estimate_wifi_success(&thetas, &params, &config).unwrap();
        let n = est.samples.total();
        if n < C5_MIN_SAMPLES {
            failures5.push(format!("p={p}: only {n} SINR samples"));
        }
        for (i, &theta) in thetas.iter().enumerate() {
            let diff = analytic[i] - est.curve.values()[i];
            worst = worst.max(diff.abs());
            if diff.abs() > C5_ABS_TOL {
                failures5.push(format!(
                    "p={p} theta={:.0} dB: analytic {:.4} vs MC {:.4} (diff {diff:+.4})",
                    10.0 * theta.log10(),
                    analytic[i],
                    est.curve.values()[i]
                ));
            }
        }
        analytic_curves.push(analytic);

        let rate = estimate_rate(&est.samples, config.z_value());
        let via_curve = EmpiricalCcdf::new(&est.samples).rate_integral();
        let gap = (rate.mean - via_curve).abs();
        let pass = gap <= rate.ci_halfwidth + C9_QUADRATURE_TOL;
        info(9, &format!("p={p}: mean log2(1+SINR) {:.6} ± {:.1e}, curve integral {via_curve:.6}", rate.mean, rate.ci_halfwidth));
        if !pass {
            failures9.push(format!("p={p}: rate {} vs curve integral {via_curve}", rate.mean));
        }
    }
    for (i, &theta) in thetas.iter().enumerate() {
        let (a, b, c) = (analytic_curves[0][i], analytic_curves[1][i], analytic_curves[2][i]);
        if !(a > b && b > c) {
            failures5.push(format!("theta={:.0} dB: ordering {a:.5} > {b:.5} > {c:.5} violated", 10.0 * theta.log10()));
        }
    }
    let elapsed = start.elapsed();
    let nine = std::panic::catch_unwind(|| {
        finish(9, &failures9, elapsed, C5_BUDGET, "mean log2(1+SINR) equals the theta-integral of the empirical curve")
    });
    finish(
        5,
        &failures5,
        elapsed,
        C5_BUDGET,
        &format!("WiFi success analytic vs MC, worst |diff| {worst:.4}, p-ordering of analytic curves"),
    );
    if let Err(e) = nine {
        std::panic::resume_unwind(e);
    }
}

#[test]
fn criterion_06_ase_orderings() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let xi = 4e-4;
    let mut failures = Vec::new();
    let by_p: Vec<f64> = P_SET.iter().map(|&p| ase_improvement(&params(p, xi), &cfg).unwrap()).collect();
    info(6, &format!("P_SI at delta=50 m: {by_p:.4?} for p={P_SET:?}"));
    if !(by_p[0] > by_p[1] && by_p[1] > by_p[2]) {
        failures.push(format!("P_SI not strictly decreasing in p: {by_p:?}"));
    }
    for p in [0.5, 0.8] {
        let sweep: Vec<f64> = delta_grid()
            .iter()
            .map(|&d| ase_improvement(&params(p, xi).with_delta(d).unwrap(), &cfg).unwrap())
            .collect();
        info(6, &format!("p={p} delta 30..80 m: {sweep:.4?}"));
        for (k, w) in sweep.windows(2).enumerate() {
            if w[1] < w[0] {
                failures.push(format!(
                    "p={p}: P_SI falls from {:.4} at delta={} m to {:.4} at delta={} m",
                    w[0],
                    delta_grid()[k],
                    w[1],
                    delta_grid()[k + 1]
                ));
            }
        }
        // informational only: the baseline with every closed AP interfering
        let literal: Vec<f64> = delta_grid()
            .iter()
            .map(|&d| ase_breakdown(&params(p, xi).with_delta(d).unwrap(), AseBaseline::AllClosed, &cfg).unwrap().ratio)
            .collect();
        info(6, &format!("p={p} delta sweep with all-closed baseline (not scored): {literal:.4?}"));
    }
    finish(6, &failures, start.elapsed(), C6_BUDGET, "ASE improvement decreasing in p, non-decreasing in delta at p=0.5, 0.8");
}

#[test]
fn criterion_07_rate_improvement_orderings() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut failures = Vec::new();
    let by_p: Vec<f64> = P_SET
        .iter()
        .map(|&p| cellular_rate_improvement(&params(p, 2e-4), &cfg).unwrap())
        .collect();
    info(7, &format!("P_CI at xi=200/km2: {by_p:.4?} for p={P_SET:?}"));
    if !(by_p[0] > by_p[1] && by_p[1] > by_p[2]) {
        failures.push(format!("P_CI not strictly decreasing in p: {by_p:?}"));
    }
    let by_xi: Vec<f64> = xi_grid(false)
        .iter()
        .map(|&xi| cellular_rate_improvement(&params(0.2, xi), &cfg).unwrap())
        .collect();
    info(7, &format!("P_CI at p=0.2, xi 100..1000/km2: {by_xi:.4?}"));
    if by_xi.windows(2).any(|w| w[1] <= w[0]) {
        failures.push(format!("P_CI not increasing in xi_u at p=0.2: {by_xi:?}"));
    }
    finish(7, &failures, start.elapsed(), C7_BUDGET, "cellular rate improvement decreasing in p, increasing in xi_u");
}

#[test]
fn criterion_08_trivial_limits() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };

    let all_closed = params(1.0, 4e-4);
    let d = DensityApproximations::new(&all_closed);
    check([d.lambda_a1, d.lambda_a2, d.lambda_a3] == [0.0; 3], "p=1: lambda_A^i != 0");
    check(cellular_rate_improvement(&all_closed, &cfg).unwrap() == 0.0, "p=1: P_CI != 0");

    let no_users = params(0.5, 0.0);
    let d = DensityApproximations::new(&no_users);
    check([d.lambda_a1, d.lambda_a2, d.lambda_a3] == [0.0; 3], "xi_u=0: lambda_A^i != 0");
    check(ase_improvement(&no_users, &cfg).unwrap() == 1.0, "xi_u=0: P_SI != 1");

    for (x, lambda, alpha) in [(0.0, 1e-4, 4.0), (25.0, 3e-4, 3.5), (10.0, 1e-3, 5.0)] {
        check(laplace_interference(0.0, x, lambda, alpha, &cfg).unwrap() == 1.0, "s=0: Laplace != 1");
        check(laplace_interference_fast(0.0, x, lambda, alpha, &cfg).unwrap() == 1.0, "s=0: Laplace != 1");
    }
    check(laplace_interference_alpha4(0.0, 5.0, 1e-4) == 1.0, "s=0: closed-form Laplace != 1");

    for p in P_SET {
        let ps = params(p, 2e-4);
        let lambda = DensityApproximations::new(&ps).lambda_active_wifi();
        check(wifi_success_probability(0.0, &ps, lambda, &cfg).unwrap() == 1.0, "theta=0: WiFi success != 1");
        check(lte_success_probability(0.0, &ps, &cfg).unwrap() == 1.0, "theta=0: LTE success != 1");
    }
    let generic = params(0.5, 2e-4).to_builder().alpha(3.7).build().unwrap();
    check(wifi_success_probability(0.0, &generic, 1e-4, &cfg).unwrap() == 1.0, "theta=0, alpha=3.7: WiFi success != 1");
    check(lte_success_probability(0.0, &generic, &cfg).unwrap() == 1.0, "theta=0, alpha=3.7: LTE success != 1");

    finish(8, &failures, start.elapsed(), C8_BUDGET, "trivial limits hold with exact equality");
}

#[test]
fn criterion_10_fig2_determinism() {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("lwpa-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_lwpa"))
            .args(["figure", "fig2", "--seed", &SEED.to_string(), "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let a = run("first.csv");
    let b = run("second.csv");
    let mut failures = Vec::new();
    if a != b {
        failures.push("fig2 CSV differs between identical runs".to_string());
    }
    finish(10, &failures, start.elapsed(), C10_BUDGET, &format!("fig2 CSV byte-identical across runs ({} bytes)", a.len()));
}
