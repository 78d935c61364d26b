//! Cartesian sweeps over one model parameter and the closed-access share.

use lwpa_core::analytic::{
    ase_breakdown, cellular_rate_improvement, lte_success_probability, wifi_success_probability,
    DensityApproximations,
};
use lwpa_core::montecarlo::{estimate_ase_improvement, estimate_lte_success, estimate_lwpa_density, estimate_wifi_success, McConfig};
use lwpa_core::{Error, NetworkParams};
use rayon::prelude::*;

use crate::config::{EngineSettings, Quantity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptParameter {
    XiU,
    Delta,
    PClosed,
    Theta,
}

impl SweptParameter {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "xi_u" => SweptParameter::XiU,
            "delta" => SweptParameter::Delta,
            "p_closed" => SweptParameter::PClosed,
            "theta" => SweptParameter::Theta,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweptParameter::XiU => "xi_u",
            SweptParameter::Delta => "delta",
            SweptParameter::PClosed => "p_closed",
            SweptParameter::Theta => "theta",
        }
    }

    pub fn quantity(self) -> Quantity {
        match self {
            SweptParameter::XiU => Quantity::Density,
            SweptParameter::Delta => Quantity::Length,
            SweptParameter::PClosed => Quantity::Plain,
            SweptParameter::Theta => Quantity::Threshold,
        }
    }

    /// SI unit of the swept column in output files.
    pub fn unit(self) -> &'static str {
        match self {
            SweptParameter::XiU => "per_m2",
            SweptParameter::Delta => "m",
            SweptParameter::PClosed => "1",
            SweptParameter::Theta => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    LwpaDensity,
    WifiSuccess,
    LteSuccess,
    RateImprovement,
    AseImprovement,
}

impl Metric {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "lwpa_density" => Metric::LwpaDensity,
            "wifi_success" => Metric::WifiSuccess,
            "lte_success" => Metric::LteSuccess,
            "rate_improvement" => Metric::RateImprovement,
            "ase_improvement" => Metric::AseImprovement,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::LwpaDensity => "lwpa_density",
            Metric::WifiSuccess => "wifi_success",
            Metric::LteSuccess => "lte_success",
            Metric::RateImprovement => "rate_improvement",
            Metric::AseImprovement => "ase_improvement",
        }
    }

    fn is_success(self) -> bool {
        matches!(self, Metric::WifiSuccess | Metric::LteSuccess)
    }

    fn supports(self, engine: Engine) -> bool {
        !(self == Metric::RateImprovement && engine == Engine::MonteCarlo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Engine {
    Analytic,
    MonteCarlo,
}

impl Engine {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "analytic" => Some(Engine::Analytic),
            "montecarlo" => Some(Engine::MonteCarlo),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "montecarlo",
        }
    }
}

/// What to sweep and how to evaluate it.
///
/// When `p_closed` itself is swept the `p_set` is not used and every row
/// carries the swept value as its `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    parameter: SweptParameter,
    values: Vec<f64>,
    p_set: Vec<f64>,
    metric: Metric,
    engines: Vec<Engine>,
}

impl SweepSpec {
    pub const DEFAULT_P_SET: [f64; 3] = [0.2, 0.5, 0.8];

    /// Values are in SI units. Errors are `(field, message)` pairs.
    pub fn new(
        parameter: SweptParameter,
        values: Vec<f64>,
        p_set: Vec<f64>,
        metric: Metric,
        engines: Vec<Engine>,
    ) -> Result<Self, Vec<(&'static str, String)>> {
        let mut errors = Vec::new();
        if values.is_empty() {
            errors.push(("sweep.values", "must not be empty".to_string()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            errors.push(("sweep.values", "must be strictly increasing".to_string()));
        }
        let in_domain = |v: f64| match parameter {
            SweptParameter::PClosed => (0.0..=1.0).contains(&v),
            _ => v >= 0.0 && v.is_finite(),
        };
        if let Some(v) = values.iter().find(|v| !in_domain(**v)) {
            errors.push(("sweep.values", format!("{v} is outside the domain of {}", parameter.name())));
        }
        if p_set.is_empty() {
            errors.push(("sweep.p_set", "must not be empty".to_string()));
        }
        if let Some(p) = p_set.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            errors.push(("sweep.p_set", format!("{p} is not a probability")));
        }
        let mut sorted = p_set.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            errors.push(("sweep.p_set", "contains duplicates".to_string()));
        }
        if engines.is_empty() {
            errors.push(("sweep.engines", "must not be empty".to_string()));
        }
        let mut e = engines.clone();
        e.sort();
        e.dedup();
        if e.len() != engines.len() {
            errors.push(("sweep.engines", "contains duplicates".to_string()));
        }
        if metric.is_success() != (parameter == SweptParameter::Theta) {
            errors.push((
                "sweep.metric",
                format!("{} cannot be swept over {}", metric.name(), parameter.name()),
            ));
        }
        for engine in &engines {
            if !metric.supports(*engine) {
                errors.push((
                    "sweep.engines",
                    format!("{} has no {} engine", metric.name(), engine.name()),
                ));
            }
        }
        if errors.is_empty() {
            Ok(SweepSpec {
                parameter,
                values,
                p_set,
                metric,
                engines,
            })
        } else {
            Err(errors)
        }
    }

    pub fn parameter(&self) -> SweptParameter {
        self.parameter
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_set(&self) -> &[f64] {
        &self.p_set
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn engines(&self) -> &[Engine] {
        &self.engines
    }

    pub fn uses_montecarlo(&self) -> bool {
        self.engines.contains(&Engine::MonteCarlo)
    }

    /// p values that index rows; a `p_closed` sweep has a single slot.
    fn p_slots(&self) -> Vec<Option<f64>> {
        if self.parameter == SweptParameter::PClosed {
            vec![None]
        } else {
            self.p_set.iter().copied().map(Some).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    InvalidInput(String),
    Numerical(String),
    Statistical(String),
}

impl CellStatus {
    fn from_error(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => CellStatus::InvalidInput(e.to_string()),
            Error::Quadrature(_) | Error::DivisionByZero(_) => CellStatus::Numerical(e.to_string()),
            Error::Statistical(_) => CellStatus::Statistical(e.to_string()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CellStatus::Ok => "ok".into(),
            CellStatus::InvalidInput(m) => format!("invalid: {m}"),
            CellStatus::Numerical(m) => format!("numerical: {m}"),
            CellStatus::Statistical(m) => format!("statistical: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub swept: f64,
    pub p: f64,
    pub engine: Engine,
    /// NaN when the cell failed.
    pub value: f64,
    pub ci_halfwidth: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub params: NetworkParams,
    pub mc: McConfig,
    pub settings: EngineSettings,
    pub rows: Vec<Row>,
    /// Validity-flag and configuration warnings, deduplicated, in order.
    pub warnings: Vec<String>,
    /// Free-form provenance of preset choices.
    pub notes: Vec<String>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.status != CellStatus::Ok)
    }
}

/// Parameters of one cell, before any θ is applied.
fn cell_params(spec: &SweepSpec, base: &NetworkParams, p: Option<f64>, value: f64) -> lwpa_core::Result<NetworkParams> {
    let with_p = match p {
        Some(p) => base.with_p_closed(p)?,
        None => *base,
    };
    match spec.parameter {
        SweptParameter::XiU => with_p.with_xi_u(value),
        SweptParameter::Delta => with_p.with_delta(value),
        SweptParameter::PClosed => with_p.with_p_closed(value),
        SweptParameter::Theta => Ok(with_p),
    }
}

type Cell = lwpa_core::Result<(f64, Option<f64>)>;

fn analytic_cell(metric: Metric, params: &NetworkParams, theta: f64, settings: &EngineSettings) -> Cell {
    let cfg = &settings.quadrature;
    let value = match metric {
        Metric::LwpaDensity => DensityApproximations::new(params).lambda_a(),
        Metric::WifiSuccess => {
            let interferers = DensityApproximations::new(params).lambda_active_wifi();
            wifi_success_probability(theta, params, interferers, cfg)?
        }
        Metric::LteSuccess => lte_success_probability(theta, params, cfg)?,
        Metric::RateImprovement => cellular_rate_improvement(params, cfg)?,
        Metric::AseImprovement => ase_breakdown(params, settings.ase_baseline, cfg)?.ratio,
    };
    Ok((value, None))
}

fn montecarlo_cell(metric: Metric, params: &NetworkParams, mc: &McConfig) -> Cell {
    let est = match metric {
        Metric::LwpaDensity => estimate_lwpa_density(params, mc)?,
        Metric::AseImprovement => estimate_ase_improvement(params, mc)?,
        _ => unreachable!("curve metrics and unsupported engines are filtered out"),
    };
    Ok((est.mean, Some(est.ci_halfwidth)))
}

/// One unit of parallel work: a single cell, or a whole θ curve for one
/// Monte Carlo run.
enum Job {
    Cell { slot: usize, index: usize, engine: Engine },
    Curve { slot: usize },
}

fn run_job(job: &Job, spec: &SweepSpec, base: &NetworkParams, mc: &McConfig, settings: &EngineSettings) -> Vec<(usize, usize, Engine, Cell)> {
    let slots = spec.p_slots();
    match *job {
        Job::Cell { slot, index, engine } => {
            let value = spec.values[index];
            let cell = cell_params(spec, base, slots[slot], value).and_then(|params| {
                let theta = if spec.parameter == SweptParameter::Theta { value } else { f64::NAN };
                match engine {
                    Engine::Analytic => analytic_cell(spec.metric, &params, theta, settings),
                    Engine::MonteCarlo => montecarlo_cell(spec.metric, &params, mc),
                }
            });
            vec![(slot, index, engine, cell)]
        }
        Job::Curve { slot } => {
            let curve = cell_params(spec, base, slots[slot], f64::NAN).and_then(|params| match spec.metric {
                Metric::WifiSuccess => estimate_wifi_success(&spec.values, &params, mc),
                Metric::LteSuccess => estimate_lte_success(&spec.values, &params, mc),
                _ => unreachable!("curves exist for success metrics only"),
            });
            match curve {
                Ok(est) => {
                    let ci = est.curve.ci_halfwidth().map(<[f64]>::to_vec).unwrap_or_default();
                    est.curve
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(i, v)| (slot, i, Engine::MonteCarlo, Ok((*v, ci.get(i).copied()))))
                        .collect()
                }
                Err(e) => (0..spec.values.len())
                    .map(|i| (slot, i, Engine::MonteCarlo, Err(e.clone())))
                    .collect(),
            }
        }
    }
}

fn push_unique(list: &mut Vec<String>, item: String) {
    if !list.contains(&item) {
        list.push(item);
    }
}

/// Warnings for every evaluated point where `λ̃_W2 < P1 λ_W1` fails.
fn validity_warnings(spec: &SweepSpec, base: &NetworkParams) -> Vec<String> {
    let mut out = Vec::new();
    if spec.metric == Metric::LteSuccess {
        return out;
    }
    for p in spec.p_slots() {
        for &value in &spec.values {
            let Ok(params) = cell_params(spec, base, p, value) else {
                continue;
            };
            let d = DensityApproximations::new(&params);
            if !d.validity_a {
                push_unique(
                    &mut out,
                    format!(
                        "validity: lambda_tilde_W2={:.4e} >= P1*lambda_W1={:.4e} at p_closed={} xi_u={:e} delta={}",
                        d.lambda_tilde_w2,
                        d.p1 * params.lambda_w_open(),
                        params.p_closed(),
                        params.xi_u(),
                        params.delta()
                    ),
                );
            }
        }
    }
    out
}

/// Evaluates every (p, value, engine) cell. Cells run in parallel; rows are
/// assembled in (p, value, engine) order, so output never depends on
/// scheduling. A failing cell is recorded in its row and the sweep goes on.
pub fn run_sweep(spec: &SweepSpec, params: &NetworkParams, mc: &McConfig, settings: &EngineSettings) -> SweepResult {
    let slots = spec.p_slots();
    let mut jobs = Vec::new();
    for slot in 0..slots.len() {
        for &engine in &spec.engines {
            if engine == Engine::MonteCarlo && spec.metric.is_success() {
                jobs.push(Job::Curve { slot });
                continue;
            }
            for index in 0..spec.values.len() {
                jobs.push(Job::Cell { slot, index, engine });
            }
        }
    }
    let mut cells: Vec<(usize, usize, Engine, Cell)> = jobs
        .par_iter()
        .map(|job| run_job(job, spec, params, mc, settings))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    cells.sort_by_key(|&(slot, index, engine, _)| {
        let e = spec.engines.iter().position(|x| *x == engine).unwrap_or(0);
        (slot, index, e)
    });

    let rows = cells
        .into_iter()
        .map(|(slot, index, engine, cell)| {
            let swept = spec.values[index];
            let p = slots[slot].unwrap_or(swept);
            match cell {
                Ok((value, ci)) => Row {
                    swept,
                    p,
                    engine,
                    value,
                    ci_halfwidth: ci,
                    status: CellStatus::Ok,
                },
                Err(e) => Row {
                    swept,
                    p,
                    engine,
                    value: f64::NAN,
                    ci_halfwidth: None,
                    status: CellStatus::from_error(&e),
                },
            }
        })
        .collect();

    let mut warnings = validity_warnings(spec, params);
    if spec.uses_montecarlo() {
        for w in mc.warnings(params) {
            push_unique(&mut warnings, format!("montecarlo: {w}"));
        }
    }
    let mut notes = Vec::new();
    if spec.uses_montecarlo() && spec.metric == Metric::AseImprovement {
        notes.push("montecarlo ase baseline uses contention-winning closed APs as interferers".to_string());
    }
    SweepResult {
        spec: spec.clone(),
        params: *params,
        mc: *mc,
        settings: *settings,
        rows,
        warnings,
        notes,
    }
}
