use std::path::PathBuf;
use std::process::Command;

use lwpa_cli::config::{validate_config, EngineSettings};
use lwpa_cli::output::write_sweep_csv;
use lwpa_cli::presets::{run_figure_preset, FigureOutput, FigurePreset, PresetOptions};
use lwpa_cli::sweep::{run_sweep, Engine, Metric, SweepSpec, SweptParameter};
use lwpa_core::analytic::{ase_breakdown, AseBaseline, DensityApproximations};
use lwpa_core::montecarlo::McConfig;
use lwpa_core::point_process::RngSeed;
use lwpa_core::{reference_params, Window};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lwpa"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lwpa-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small_opts() -> PresetOptions {
    PresetOptions {
        base: reference_params(0.5, 2e-4).unwrap(),
        mc: McConfig::new(20, Window::square(600.0).unwrap(), 10, RngSeed(5)),
        settings: EngineSettings::default(),
        engines: None,
        p_set: None,
    }
}

#[test]
fn config_errors_are_aggregated_with_paths() {
    let errs = validate_config("alpha = 2\np_closed = 1.5\nxi_u = 3\nbogus = 1\n").unwrap_err();
    let text: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
    assert!(text.iter().any(|t| t.starts_with("alpha") && t.contains("alpha must exceed 2")), "{text:?}");
    assert!(text.iter().any(|t| t.starts_with("p_closed") && t.contains("[0, 1]")));
    assert!(text.iter().any(|t| t.starts_with("xi_u (line 3)") && t.contains("missing unit")));
    assert!(text.iter().any(|t| t.starts_with("bogus (line 4)")));
}

#[test]
fn densities_in_per_km2() {
    let cfg = validate_config("lambda_W = 200 per_km2\nlambda_L = 1e-4 per_m2\n").unwrap();
    assert_eq!(cfg.params.lambda_w(), 2e-4);
    assert_eq!(cfg.params.lambda_l(), 1e-4);
}

#[test]
fn empty_p_set_rejected_at_parse_time() {
    let errs = validate_config(
        "sweep.parameter = xi_u\nsweep.values = 100, 200 per_km2\nsweep.metric = lwpa_density\nsweep.p_set =\n",
    )
    .unwrap_err();
    assert!(errs.iter().any(|e| e.path.starts_with("sweep.p_set")), "{errs:?}");
}

#[test]
fn sweep_config_round_trip() {
    let cfg = validate_config(
        "sweep.parameter = delta\nsweep.values = 30..80 step 10 m\nsweep.metric = ase_improvement\n\
         sweep.engines = analytic, montecarlo\nmc.replications = 300\nmc.window = 1.5 km\nmc.seed = 9\n",
    )
    .unwrap();
    let spec = cfg.sweep.unwrap();
    assert_eq!(spec.values(), &[30.0, 40.0, 50.0, 60.0, 70.0, 80.0]);
    assert_eq!(spec.p_set(), &SweepSpec::DEFAULT_P_SET);
    assert_eq!(spec.engines(), &[Engine::Analytic, Engine::MonteCarlo]);
    assert_eq!(cfg.mc.window.width(), 1500.0);
    assert_eq!(cfg.mc.root_seed, RngSeed(9));
}

#[test]
fn single_value_sweep_equals_direct_call() {
    let base = reference_params(0.5, 2e-4).unwrap();
    let spec = SweepSpec::new(
        SweptParameter::XiU,
        vec![4e-4],
        vec![0.8],
        Metric::AseImprovement,
        vec![Engine::Analytic],
    )
    .unwrap();
    let settings = EngineSettings::default();
    let r = run_sweep(&spec, &base, &small_opts().mc, &settings);
    let direct = ase_breakdown(
        &reference_params(0.8, 4e-4).unwrap(),
        AseBaseline::ActiveClosed,
        &settings.quadrature,
    )
    .unwrap()
    .ratio;
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].value, direct);
}

#[test]
fn delta_sweep_trend_under_all_closed_baseline() {
    // the literal baseline (every closed AP interfering) rises with δ at p = 0.5
    let spec = SweepSpec::new(
        SweptParameter::Delta,
        (0..=10).map(|k| 30.0 + 5.0 * k as f64).collect(),
        vec![0.5],
        Metric::AseImprovement,
        vec![Engine::Analytic],
    )
    .unwrap();
    let settings = EngineSettings {
        ase_baseline: AseBaseline::AllClosed,
        ..EngineSettings::default()
    };
    let base = reference_params(0.5, 4e-4).unwrap();
    let r = run_sweep(&spec, &base, &small_opts().mc, &settings);
    for w in r.rows.windows(2) {
        assert!(w[1].value > w[0].value, "{} -> {}", w[0].value, w[1].value);
    }
}

#[test]
fn figure_presets_respect_engine_subset() {
    let mut opts = small_opts();
    opts.engines = Some(vec![Engine::Analytic]);
    let FigureOutput::Sweep(r) = run_figure_preset(FigurePreset::Fig4, &opts).unwrap() else {
        panic!("fig4 is a sweep");
    };
    assert_eq!(r.rows.len(), 16 * 3);
    assert!(r.rows.iter().all(|row| row.engine == Engine::Analytic && row.ci_halfwidth.is_none()));
}

#[test]
fn fig2_has_all_approximations_and_validity_warnings() {
    let FigureOutput::Density(t) = run_figure_preset(FigurePreset::Fig2, &small_opts()).unwrap() else {
        panic!("fig2 is a density table");
    };
    assert_eq!(t.rows.len(), 11 * 3);
    let row = t.rows.iter().find(|r| r.p == 0.5 && r.xi_u == 2e-4).unwrap();
    let d = DensityApproximations::new(&reference_params(0.5, 2e-4).unwrap());
    assert_eq!(row.approx, [d.lambda_a1, d.lambda_a2, d.lambda_a3]);
    assert!(row.mc.as_ref().unwrap().is_ok());
    assert!(t.warnings.iter().any(|w| w.contains("p_closed=0.5 xi_u=2e-4")));

    let mut buf = Vec::new();
    lwpa_cli::write_figure_csv(&mut buf, &FigureOutput::Density(t)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().any(|l| l == "xi_u,p,approx_1,approx_2,approx_3,mc_mean,mc_ci"));
    assert!(text.lines().any(|l| l.starts_with("# warning: validity")));
}

#[test]
fn fig5_rows_are_deterministic() {
    let mut opts = small_opts();
    opts.engines = Some(vec![Engine::Analytic, Engine::MonteCarlo]);
    let render = || {
        let FigureOutput::Sweep(r) = run_figure_preset(FigurePreset::Fig5, &opts).unwrap() else {
            unreachable!()
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &r).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn binary_validate_reports_config_errors() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, "alpha = 2\np_closed = 1.5\n").unwrap();
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha must exceed 2") && err.contains("p_closed"));

    let good = scratch("good.cfg");
    std::fs::write(&good, "lambda_W = 200 per_km2\n").unwrap();
    let out = bin().arg("validate").arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn binary_density_prints_flags() {
    let path = scratch("density.cfg");
    std::fs::write(&path, "p_closed = 0.5\nxi_u = 200 per_km2\n").unwrap();
    let out = bin().arg("density").arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lambda_A3") && text.contains("21.78"));
    assert!(text.contains("violated"));
}

#[test]
fn binary_exit_codes_for_cell_failures() {
    let numerical = scratch("numerical.cfg");
    std::fs::write(
        &numerical,
        "sweep.parameter = xi_u\nsweep.values = 100 per_km2\nsweep.metric = ase_improvement\nsweep.p_set = 0, 0.5\n",
    )
    .unwrap();
    let out = bin().arg("sweep").arg(&numerical).arg("--out").arg(scratch("numerical.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // the failing cell is still recorded
    let csv = std::fs::read_to_string(scratch("numerical.csv")).unwrap();
    assert!(csv.contains("numerical: division by zero"));
    assert!(csv.lines().any(|l| l.starts_with("1.000000000e-4,0.5,analytic,") && l.ends_with(",ok")));

    let statistical = scratch("statistical.cfg");
    std::fs::write(
        &statistical,
        "sweep.parameter = theta\nsweep.values = 0, 10 dB\nsweep.metric = wifi_success\nsweep.p_set = 1\n\
         sweep.engines = montecarlo\nmc.replications = 5\nmc.window = 400 m\nmc.fading_draws = 2\n",
    )
    .unwrap();
    let out = bin().arg("sweep").arg(&statistical).arg("--out").arg("-").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn binary_output_dir_and_byte_identical_runs() {
    let dir = scratch("outdir");
    let run = |seed: &str| {
        let status = bin()
            .args(["figure", "fig2", "--replications", "10", "--window", "500", "--seed", seed])
            .env(lwpa_cli::OUTPUT_DIR_ENV, &dir)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.join("fig2.csv")).unwrap()
    };
    let a = run("3");
    let b = run("3");
    assert_eq!(a, b);
    let c = run("4");
    assert_ne!(a, c);
    assert!(String::from_utf8(a).unwrap().contains("# seed=3"));
}

#[test]
fn binary_rejects_unknown_preset() {
    let out = bin().args(["figure", "fig3"]).output().unwrap();
    assert!(!out.status.success());
}
