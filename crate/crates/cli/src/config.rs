//! Flat `key = value [unit]` configuration files.
//!
//! ```text
//! # network; omitted keys take the reference values
//! lambda_W = 200 per_km2
//! P_W = 18 dBm
//! delta = 50 m
//!
//! sweep.parameter = xi_u
//! sweep.values = 100, 200, 400 per_km2
//! sweep.metric = lwpa_density
//!
//! mc.replications = 500
//! mc.window = 2 km
//! ```
//!
//! Every dimensional quantity needs an explicit unit. Values are converted
//! to SI (per m², m, W, Hz) at parse time.

use std::collections::BTreeMap;
use std::fmt;

use lwpa_core::analytic::AseBaseline;
use lwpa_core::montecarlo::McConfig;
use lwpa_core::numerics::QuadratureConfig;
use lwpa_core::params::{dbm_to_watts, per_km2};
use lwpa_core::point_process::{ClosedExclusion, RngSeed};
use lwpa_core::{NetworkParams, Window};

use crate::sweep::{Engine, Metric, SweepSpec, SweptParameter};

/// One violated constraint, located by key and line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Density,
    Length,
    Power,
    Bandwidth,
    /// SINR threshold: `dB` or linear without a unit.
    Threshold,
    Plain,
}

/// Converts `number [unit]` to SI.
pub fn parse_quantity(text: &str, kind: Quantity) -> Result<f64, String> {
    let mut parts = text.split_whitespace();
    let number = parts.next().ok_or("empty value")?;
    let unit = parts.next();
    if parts.next().is_some() {
        return Err(format!("unexpected trailing text in '{text}'"));
    }
    let x: f64 = number.parse().map_err(|_| format!("'{number}' is not a number"))?;
    let si = match (kind, unit) {
        (Quantity::Density, Some("per_km2")) => per_km2(x),
        (Quantity::Density, Some("per_m2")) => x,
        (Quantity::Length, Some("m")) => x,
        (Quantity::Length, Some("km")) => x * 1e3,
        (Quantity::Power, Some("dBm")) => dbm_to_watts(x),
        (Quantity::Power, Some("W")) => x,
        (Quantity::Power, Some("mW")) => x * 1e-3,
        (Quantity::Bandwidth, Some("Hz")) => x,
        (Quantity::Bandwidth, Some("kHz")) => x * 1e3,
        (Quantity::Bandwidth, Some("MHz")) => x * 1e6,
        (Quantity::Threshold, Some("dB")) => 10f64.powf(x / 10.0),
        (Quantity::Threshold, None) | (Quantity::Plain, None) => x,
        (_, None) => return Err(format!("missing unit ({})", expected_units(kind))),
        (_, Some(u)) => return Err(format!("unknown unit '{u}' ({})", expected_units(kind))),
    };
    if !si.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok(si)
}

fn expected_units(kind: Quantity) -> &'static str {
    match kind {
        Quantity::Density => "per_km2 or per_m2",
        Quantity::Length => "m or km",
        Quantity::Power => "dBm, W or mW",
        Quantity::Bandwidth => "Hz, kHz or MHz",
        Quantity::Threshold => "dB, or none for linear",
        Quantity::Plain => "none",
    }
}

/// Comma-separated list sharing one trailing unit: `30, 40, 50 m`.
fn parse_list(text: &str, kind: Quantity) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err("empty list entry".into());
    }
    let unit = items.last().and_then(|last| last.split_whitespace().nth(1));
    items
        .iter()
        .map(|item| {
            let mut words = item.split_whitespace();
            let number = words.next().unwrap_or_default();
            match (words.next(), unit) {
                (Some(_), _) | (None, None) => parse_quantity(item, kind),
                (None, Some(u)) => parse_quantity(&format!("{number} {u}"), kind),
            }
        })
        .collect()
}

/// `start..stop step inc unit`, e.g. `30..80 step 5 m`.
fn parse_range(text: &str, kind: Quantity) -> Option<Result<Vec<f64>, String>> {
    let (start, rest) = text.split_once("..")?;
    let mut words = rest.split_whitespace();
    let stop = words.next()?;
    if words.next() != Some("step") {
        return Some(Err("range must read 'start..stop step increment [unit]'".into()));
    }
    let step = words.next()?;
    let unit = words.next().map(|u| format!(" {u}")).unwrap_or_default();
    let conv = |s: &str| parse_quantity(&format!("{}{unit}", s.trim()), kind);
    let plain = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("'{s}' is not a number"));
    Some((|| {
        let (a, b, h) = (plain(start)?, plain(stop)?, plain(step)?);
        if !(h > 0.0) || b < a {
            return Err("range needs start <= stop and a positive step".into());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        (0..=n).map(|i| conv(&format!("{}", a + i as f64 * h))).collect()
    })())
}

/// Raw key/value entries with their line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, Vec<ConfigError>> {
        let mut entries = BTreeMap::new();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(ConfigError::new(format!("line {lineno}"), "expected 'key = value'"));
                continue;
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if let Some((first, _)) = entries.get(&key) {
                errors.push(ConfigError::new(
                    format!("{key} (line {lineno})"),
                    format!("duplicate key, first set on line {first}"),
                ));
                continue;
            }
            entries.insert(key, (lineno, value));
        }
        if errors.is_empty() {
            Ok(RawConfig { entries })
        } else {
            Err(errors)
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    fn path(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some((0, _)) => format!("{key} (override)"),
            Some((line, _)) => format!("{key} (line {line})"),
            None => key.to_string(),
        }
    }
}

/// Everything a run needs, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub params: NetworkParams,
    pub sweep: Option<SweepSpec>,
    pub mc: McConfig,
    pub settings: EngineSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineSettings {
    pub quadrature: QuadratureConfig,
    pub ase_baseline: AseBaseline,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPLICATIONS: usize = 500;
pub const DEFAULT_WINDOW_SIDE: f64 = 2000.0;
pub const DEFAULT_FADING_DRAWS: usize = 200;

const NETWORK_KEYS: [(&str, Quantity, &str); 12] = [
    ("lambda_L", Quantity::Density, "100 per_km2"),
    ("lambda_W", Quantity::Density, "200 per_km2"),
    ("p_closed", Quantity::Plain, "0.5"),
    ("xi_u", Quantity::Density, "200 per_km2"),
    ("R_serve", Quantity::Length, "30 m"),
    ("delta", Quantity::Length, "50 m"),
    ("alpha", Quantity::Plain, "4"),
    ("P_L", Quantity::Power, "22 dBm"),
    ("P_W", Quantity::Power, "18 dBm"),
    ("sigma2", Quantity::Power, "-95 dBm"),
    ("B_c", Quantity::Bandwidth, "10 MHz"),
    ("B_w", Quantity::Bandwidth, "10 MHz"),
];

const OTHER_KEYS: [&str; 14] = [
    "closed_exclusion",
    "ase_baseline",
    "sweep.parameter",
    "sweep.values",
    "sweep.p_set",
    "sweep.metric",
    "sweep.engines",
    "mc.replications",
    "mc.window",
    "mc.fading_draws",
    "mc.confidence",
    "mc.seed",
    "quadrature.rel_tol",
    "quadrature.abs_tol",
];

struct Collector<'a> {
    raw: &'a RawConfig,
    errors: Vec<ConfigError>,
}

impl Collector<'_> {
    fn value(&self, key: &str) -> Option<&str> {
        self.raw.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        let path = self.raw.path(key);
        self.errors.push(ConfigError::new(path, message));
    }

    fn quantity(&mut self, key: &str, kind: Quantity, default: &str) -> f64 {
        let text = self.value(key).unwrap_or(default).to_string();
        match parse_quantity(&text, kind) {
            Ok(v) => v,
            Err(e) => {
                self.fail(key, e);
                f64::NAN
            }
        }
    }

    fn count(&mut self, key: &str, default: usize) -> usize {
        match self.value(key).map(str::parse::<usize>) {
            None => default,
            Some(Ok(v)) => v,
            Some(Err(_)) => {
                self.fail(key, "expected a non-negative integer");
                default
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)], default: T) -> T {
        let Some(text) = self.value(key).map(str::to_string) else {
            return default;
        };
        match options.iter().find(|(name, _)| *name == text) {
            Some((_, v)) => *v,
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.fail(key, format!("'{text}' is not one of {}", names.join(", ")));
                default
            }
        }
    }
}

/// Parses and checks a configuration file, reporting every problem found.
pub fn validate_config(text: &str) -> Result<ValidatedConfig, Vec<ConfigError>> {
    let raw = RawConfig::parse(text)?;
    validate_raw(&raw)
}

pub fn validate_raw(raw: &RawConfig) -> Result<ValidatedConfig, Vec<ConfigError>> {
    let mut c = Collector {
        raw,
        errors: Vec::new(),
    };
    for key in raw.entries.keys() {
        let known = NETWORK_KEYS.iter().any(|(k, _, _)| k == key) || OTHER_KEYS.contains(&key.as_str());
        if !known {
            c.errors.push(ConfigError::new(raw.path(key), "unknown key"));
        }
    }

    let v: Vec<f64> = NETWORK_KEYS
        .iter()
        .map(|&(key, kind, default)| c.quantity(key, kind, default))
        .collect();
    let built = NetworkParams::builder()
        .lambda_l(v[0])
        .lambda_w(v[1])
        .p_closed(v[2])
        .xi_u(v[3])
        .r_serve(v[4])
        .delta(v[5])
        .alpha(v[6])
        .p_l(v[7])
        .p_w(v[8])
        .sigma2(v[9])
        .b_c(v[10])
        .b_w(v[11])
        .build_all();
    let params = match built {
        Ok(p) => Some(p),
        Err(errs) => {
            for e in errs {
                if let lwpa_core::Error::InvalidParameter { field, reason } = e {
                    // unparsable values were already reported
                    if reason != "must be finite" {
                        c.fail(field, reason);
                    }
                }
            }
            None
        }
    };

    let exclusion = c.choice(
        "closed_exclusion",
        &[("active_closed", ClosedExclusion::ActiveClosed), ("all_closed", ClosedExclusion::AllClosed)],
        ClosedExclusion::ActiveClosed,
    );
    let ase_baseline = c.choice(
        "ase_baseline",
        &[("active_closed", AseBaseline::ActiveClosed), ("all_closed", AseBaseline::AllClosed)],
        AseBaseline::ActiveClosed,
    );

    let replications = c.count("mc.replications", DEFAULT_REPLICATIONS);
    let side = c.quantity("mc.window", Quantity::Length, "2000 m");
    let draws = c.count("mc.fading_draws", DEFAULT_FADING_DRAWS);
    let confidence = c.quantity("mc.confidence", Quantity::Plain, "0.99");
    let seed = match c.value("mc.seed").map(str::parse::<u64>) {
        None => DEFAULT_SEED,
        Some(Ok(s)) => s,
        Some(Err(_)) => {
            c.fail("mc.seed", "expected an unsigned 64-bit integer");
            DEFAULT_SEED
        }
    };
    let window = match Window::square(side) {
        Ok(w) => Some(w),
        Err(_) => {
            if side.is_finite() {
                c.fail("mc.window", "side must be positive");
            }
            None
        }
    };
    let mc = window.map(|w| McConfig {
        replications,
        window: w,
        fading_draws_per_geometry: draws,
        confidence_level: confidence,
        root_seed: RngSeed(seed),
        exclusion,
    });
    if let (Some(mc), Some(params)) = (&mc, &params) {
        if let Err(lwpa_core::Error::InvalidParameter { field, reason }) = mc.validate(params) {
            let key = match field {
                "mc.fading_draws" | "mc.replications" | "mc.confidence" | "mc.window" => field,
                _ => "mc",
            };
            c.fail(key, reason);
        }
    }

    let rel = c.quantity("quadrature.rel_tol", Quantity::Plain, "1e-8");
    let abs = c.quantity("quadrature.abs_tol", Quantity::Plain, "1e-12");
    let quadrature = match QuadratureConfig::new(rel, abs, QuadratureConfig::default().max_subdivisions()) {
        Ok(q) => q,
        Err(e) => {
            if rel.is_finite() && abs.is_finite() {
                c.fail("quadrature", e.to_string());
            }
            QuadratureConfig::default()
        }
    };

    let sweep = parse_sweep(&mut c);

    if !c.errors.is_empty() {
        return Err(c.errors);
    }
    Ok(ValidatedConfig {
        params: params.expect("no errors implies valid parameters"),
        sweep,
        mc: mc.expect("no errors implies a valid window"),
        settings: EngineSettings {
            quadrature,
            ase_baseline,
        },
    })
}

fn parse_sweep(c: &mut Collector<'_>) -> Option<SweepSpec> {
    let any = c.raw.entries.keys().any(|k| k.starts_with("sweep."));
    if !any {
        return None;
    }
    let parameter = match c.value("sweep.parameter") {
        None => {
            c.fail("sweep.parameter", "required when any sweep key is set");
            None
        }
        Some(text) => match SweptParameter::from_name(text) {
            Some(p) => Some(p),
            None => {
                let text = text.to_string();
                c.fail("sweep.parameter", format!("'{text}' is not one of xi_u, delta, p_closed, theta"));
                None
            }
        },
    };
    let metric = match c.value("sweep.metric") {
        None => {
            c.fail("sweep.metric", "required when any sweep key is set");
            None
        }
        Some(text) => match Metric::from_name(text) {
            Some(m) => Some(m),
            None => {
                let text = text.to_string();
                c.fail(
                    "sweep.metric",
                    format!("'{text}' is not one of lwpa_density, wifi_success, lte_success, rate_improvement, ase_improvement"),
                );
                None
            }
        },
    };
    let values = match (parameter, c.value("sweep.values").map(str::to_string)) {
        (_, None) => {
            c.fail("sweep.values", "required when any sweep key is set");
            None
        }
        (None, Some(_)) => None,
        (Some(p), Some(text)) => {
            let parsed = parse_range(&text, p.quantity()).unwrap_or_else(|| parse_list(&text, p.quantity()));
            match parsed {
                Ok(v) => Some(v),
                Err(e) => {
                    c.fail("sweep.values", e);
                    None
                }
            }
        }
    };
    let p_set = match c.value("sweep.p_set").map(str::to_string) {
        None => Some(SweepSpec::DEFAULT_P_SET.to_vec()),
        Some(text) if text.trim().is_empty() => {
            c.fail("sweep.p_set", "must not be empty");
            None
        }
        Some(text) => match parse_list(&text, Quantity::Plain) {
            Ok(v) => Some(v),
            Err(e) => {
                c.fail("sweep.p_set", e);
                None
            }
        },
    };
    let engines = match c.value("sweep.engines").map(str::to_string) {
        None => Some(vec![Engine::Analytic]),
        Some(text) => {
            let parsed: Result<Vec<Engine>, String> = text
                .split(',')
                .map(|s| Engine::from_name(s.trim()).ok_or_else(|| format!("'{}' is not analytic or montecarlo", s.trim())))
                .collect();
            match parsed {
                Ok(v) => Some(v),
                Err(e) => {
                    c.fail("sweep.engines", e);
                    None
                }
            }
        }
    };
    let (parameter, metric, values, p_set, engines) = (parameter?, metric?, values?, p_set?, engines?);
    match SweepSpec::new(parameter, values, p_set, metric, engines) {
        Ok(spec) => Some(spec),
        Err(errors) => {
            for (key, message) in errors {
                c.fail(key, message);
            }
            None
        }
    }
}

/// Canonical `key = value` text of the network parameters, in SI units.
pub fn describe_params(params: &NetworkParams) -> String {
    params.to_string()
}
