//! Figure presets: fixed sweeps over the reference scenario.

use std::fmt;
use std::str::FromStr;

use lwpa_core::analytic::DensityApproximations;
use lwpa_core::montecarlo::{estimate_lwpa_density, McConfig, McEstimate};
use lwpa_core::params::per_km2;
use lwpa_core::{Error, NetworkParams};
use rayon::prelude::*;

use crate::config::EngineSettings;
use crate::sweep::{run_sweep, Engine, Metric, SweepResult, SweepSpec, SweptParameter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Active LWPA AP density vs. user density: three approximations and simulation.
    Fig2,
    /// WiFi link success probability vs. SINR threshold.
    Fig4,
    /// ASE improvement vs. guard radius.
    Fig5,
    /// ASE improvement vs. user density.
    Fig6,
    /// Cellular rate improvement vs. guard radius.
    Fig7,
    /// Cellular rate improvement vs. user density.
    Fig8,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 6] = [
        FigurePreset::Fig2,
        FigurePreset::Fig4,
        FigurePreset::Fig5,
        FigurePreset::Fig6,
        FigurePreset::Fig7,
        FigurePreset::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig2 => "fig2",
            FigurePreset::Fig4 => "fig4",
            FigurePreset::Fig5 => "fig5",
            FigurePreset::Fig6 => "fig6",
            FigurePreset::Fig7 => "fig7",
            FigurePreset::Fig8 => "fig8",
        }
    }

    /// Engines run when the caller does not choose.
    pub fn default_engines(self) -> Vec<Engine> {
        match self {
            FigurePreset::Fig2 | FigurePreset::Fig4 => vec![Engine::Analytic, Engine::MonteCarlo],
            _ => vec![Engine::Analytic],
        }
    }
}

impl fmt::Display for FigurePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigurePreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        FigurePreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown figure preset '{s}' (expected fig2, fig4, fig5, fig6, fig7 or fig8)"))
    }
}

/// User density grid of the density and user-density presets, per m².
pub fn xi_grid(include_zero: bool) -> Vec<f64> {
    let start = if include_zero { 0 } else { 1 };
    (start..=10).map(|k| per_km2(100.0 * k as f64)).collect()
}

/// Guard radius grid, 30 to 80 m in 5 m steps.
pub fn delta_grid() -> Vec<f64> {
    (0..=10).map(|k| 30.0 + 5.0 * k as f64).collect()
}

/// SINR thresholds from -10 dB to 20 dB in 2 dB steps, linear.
pub fn theta_grid() -> Vec<f64> {
    (0..=15).map(|k| 10f64.powf((-10.0 + 2.0 * k as f64) / 10.0)).collect()
}

/// User density held fixed by the guard-radius presets.
pub const FIXED_XI_U: f64 = 4e-4;

#[derive(Debug, Clone)]
pub struct PresetOptions {
    /// Parameters other than `p_closed` and the swept one.
    pub base: NetworkParams,
    pub mc: McConfig,
    pub settings: EngineSettings,
    pub engines: Option<Vec<Engine>>,
    pub p_set: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub xi_u: f64,
    pub p: f64,
    /// `λ_A^1`, `λ_A^2`, `λ_A^3`.
    pub approx: [f64; 3],
    pub mc: Option<Result<McEstimate, Error>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub params: NetworkParams,
    pub mc: McConfig,
    pub settings: EngineSettings,
    pub rows: Vec<DensityRow>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureOutput {
    Density(DensityTable),
    Sweep(SweepResult),
}

fn density_table(opts: &PresetOptions, p_set: &[f64], with_mc: bool) -> Result<DensityTable, Error> {
    let grid = xi_grid(true);
    let mut cells = Vec::new();
    for &p in p_set {
        for &xi in &grid {
            cells.push((xi, opts.base.with_p_closed(p)?.with_xi_u(xi)?));
        }
    }
    let rows: Vec<DensityRow> = cells
        .par_iter()
        .map(|(xi, params)| {
            let d = DensityApproximations::new(params);
            DensityRow {
                xi_u: *xi,
                p: params.p_closed(),
                approx: [d.lambda_a1, d.lambda_a2, d.lambda_a3],
                mc: with_mc.then(|| estimate_lwpa_density(params, &opts.mc)),
            }
        })
        .collect();

    let mut warnings = Vec::new();
    for (_, params) in &cells {
        let d = DensityApproximations::new(params);
        if !d.validity_a {
            warnings.push(format!(
                "validity: lambda_tilde_W2={:.4e} >= P1*lambda_W1={:.4e} at p_closed={} xi_u={:e}",
                d.lambda_tilde_w2,
                d.p1 * params.lambda_w_open(),
                params.p_closed(),
                params.xi_u()
            ));
        }
    }
    if with_mc {
        warnings.extend(opts.mc.warnings(&opts.base).into_iter().map(|w| format!("montecarlo: {w}")));
    }
    Ok(DensityTable {
        params: opts.base,
        mc: opts.mc,
        settings: opts.settings,
        rows,
        warnings,
        notes: vec!["xi_u axis: 0 to 1000 per_km2 in steps of 100 per_km2".to_string()],
    })
}

/// Runs a preset on the reference scenario (`opts.base`).
pub fn run_figure_preset(preset: FigurePreset, opts: &PresetOptions) -> Result<FigureOutput, Error> {
    let engines = opts.engines.clone().unwrap_or_else(|| preset.default_engines());
    let p_set = opts.p_set.clone().unwrap_or_else(|| SweepSpec::DEFAULT_P_SET.to_vec());
    if p_set.is_empty() {
        return Err(Error::InvalidParameter {
            field: "p_set",
            reason: "must not be empty".into(),
        });
    }
    if preset == FigurePreset::Fig2 {
        return Ok(FigureOutput::Density(density_table(
            opts,
            &p_set,
            engines.contains(&Engine::MonteCarlo),
        )?));
    }

    let (parameter, values, metric, base, note) = match preset {
        FigurePreset::Fig4 => (
            SweptParameter::Theta,
            theta_grid(),
            Metric::WifiSuccess,
            opts.base,
            "theta axis: -10 dB to 20 dB in steps of 2 dB",
        ),
        FigurePreset::Fig5 => (
            SweptParameter::Delta,
            delta_grid(),
            Metric::AseImprovement,
            opts.base.with_xi_u(FIXED_XI_U)?,
            "delta axis: 30 m to 80 m in steps of 5 m at xi_u = 400 per_km2",
        ),
        FigurePreset::Fig6 => (
            SweptParameter::XiU,
            xi_grid(false),
            Metric::AseImprovement,
            opts.base,
            "xi_u axis: 100 to 1000 per_km2 in steps of 100 per_km2",
        ),
        FigurePreset::Fig7 => (
            SweptParameter::Delta,
            delta_grid(),
            Metric::RateImprovement,
            opts.base.with_xi_u(FIXED_XI_U)?,
            "delta axis: 30 m to 80 m in steps of 5 m at xi_u = 400 per_km2",
        ),
        FigurePreset::Fig8 => (
            SweptParameter::XiU,
            xi_grid(false),
            Metric::RateImprovement,
            opts.base,
            "xi_u axis: 100 to 1000 per_km2 in steps of 100 per_km2",
        ),
        FigurePreset::Fig2 => unreachable!(),
    };
    let spec = SweepSpec::new(parameter, values, p_set, metric, engines).map_err(|errs| {
        let (field, reason) = errs.into_iter().next().expect("errors are non-empty");
        Error::InvalidParameter { field, reason }
    })?;
    let mut result = run_sweep(&spec, &base, &opts.mc, &opts.settings);
    result.notes.insert(0, note.to_string());
    Ok(FigureOutput::Sweep(result))
}
