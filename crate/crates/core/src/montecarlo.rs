//! Monte Carlo estimators mirroring the analytic metrics.
//!
//! Replications are the i.i.d. unit: each one samples a fresh deployment
//! from `root_seed.derive(index)`, picks a single typical link and averages
//! over the configured number of fading draws. Confidence intervals use the
//! normal approximation over replications. Replications run in parallel but
//! results are collected in index order and reduced by pairwise summation,
//! so estimates are bit-identical for a fixed seed.

use std::f64::consts::{LN_2, PI};
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::{CurveSource, SuccessCurve};
use crate::error::{Error, Result};
use crate::params::NetworkParams;
use crate::pattern::{Point, Window};
use crate::point_process::{
    empirical_density, min_window_side, sample_ppp_with, ClosedExclusion, Deployment, RngSeed, Stream,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub replications: usize,
    pub window: Window,
    pub fading_draws_per_geometry: usize,
    pub confidence_level: f64,
    pub root_seed: RngSeed,
    pub exclusion: ClosedExclusion,
}

impl McConfig {
    pub fn new(replications: usize, window: Window, fading_draws_per_geometry: usize, root_seed: RngSeed) -> Self {
        McConfig {
            replications,
            window,
            fading_draws_per_geometry,
            confidence_level: 0.99,
            root_seed,
            exclusion: ClosedExclusion::ActiveClosed,
        }
    }

    /// Rejects configurations that cannot be simulated for `params`.
    pub fn validate(&self, params: &NetworkParams) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("mc.replications", "must be at least 1"));
        }
        if self.fading_draws_per_geometry == 0 {
            return Err(Error::invalid("mc.fading_draws", "must be at least 1"));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::invalid("mc.confidence", "must lie in (0, 1)"));
        }
        if self.window.min_side() < min_window_side(params.delta()) {
            return Err(Error::invalid(
                "mc.window",
                format!("side must be at least 4·delta = {} m", min_window_side(params.delta())),
            ));
        }
        Ok(())
    }

    /// Non-fatal concerns about the configuration.
    pub fn warnings(&self, params: &NetworkParams) -> Vec<String> {
        let mut out = Vec::new();
        if params.lambda_l() > 0.0 {
            let needed = 20.0 / (PI * params.lambda_l()).sqrt();
            if self.window.min_side() < needed {
                out.push(format!(
                    "window side {} m is below 20/sqrt(pi lambda_L) = {needed:.0} m; \
                     interference from outside the window is not negligible",
                    self.window.min_side()
                ));
            }
        }
        if self.replications < 200 {
            out.push(format!(
                "{} replications: normal-approximation intervals assume at least 200",
                self.replications
            ));
        }
        out
    }

    /// Two-sided standard normal quantile for the confidence level.
    pub fn z_value(&self) -> f64 {
        Normal::standard().inverse_cdf(0.5 + 0.5 * self.confidence_level)
    }

    fn seed(&self, replication: usize) -> RngSeed {
        self.root_seed.derive(replication as u64)
    }
}

/// Sample mean with a normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// Summarises i.i.d. samples. A single sample yields an infinite
    /// half-width unless the value is zero.
    pub fn from_samples(samples: &[f64], z: f64) -> Self {
        let n = samples.len();
        if n == 0 {
            return McEstimate {
                mean: f64::NAN,
                ci_halfwidth: f64::INFINITY,
                n_samples: 0,
            };
        }
        let mean = pairwise_sum(samples) / n as f64;
        let ci_halfwidth = if n < 2 {
            if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = pairwise_sum(&dev) / (n - 1) as f64;
            z * (var / n as f64).sqrt()
        };
        McEstimate {
            mean,
            ci_halfwidth,
            n_samples: n,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.ci_halfwidth
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci_halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_halfwidth
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        n if n <= 16 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// One per-replication observation, for external inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub metric: &'static str,
    pub value: f64,
}

/// Writes records as `replication,metric,value` CSV rows with a header.
pub fn write_replication_csv<W: Write>(mut out: W, records: &[ReplicationRecord]) -> io::Result<()> {
    writeln!(out, "replication,metric,value")?;
    for r in records {
        writeln!(out, "{},{},{:.9e}", r.replication, r.metric, r.value)?;
    }
    Ok(())
}

fn run_replications<T, F>(mc: &McConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, RngSeed) -> Result<T> + Sync,
{
    (0..mc.replications)
        .into_par_iter()
        .map(|i| f(i, mc.seed(i)))
        .collect()
}

/// Per-replication density of active LWPA-mode APs.
pub fn lwpa_density_replications(params: &NetworkParams, mc: &McConfig) -> Result<Vec<f64>> {
    mc.validate(params)?;
    run_replications(mc, |_, seed| {
        let dep = Deployment::sample(params, mc.window, mc.exclusion, seed)?;
        Ok(empirical_density(&dep.active_lwpa))
    })
}

/// Mean density of active LWPA-mode APs over independent windows.
pub fn estimate_lwpa_density(params: &NetworkParams, mc: &McConfig) -> Result<McEstimate> {
    let samples = lwpa_density_replications(params, mc)?;
    Ok(McEstimate::from_samples(&samples, mc.z_value()))
}

/// Raw SINR draws (linear), grouped by replication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SinrSamples {
    per_replication: Vec<Vec<f64>>,
}

impl SinrSamples {
    pub fn new(per_replication: Vec<Vec<f64>>) -> Self {
        SinrSamples { per_replication }
    }

    pub fn replications(&self) -> &[Vec<f64>] {
        &self.per_replication
    }

    pub fn total(&self) -> usize {
        self.per_replication.iter().map(Vec::len).sum()
    }

    /// All samples in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.per_replication.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Success curve over the pooled draws; the interval treats each
    /// replication's success fraction as one i.i.d. observation.
    pub fn success_curve(&self, thresholds: &[f64], z: f64) -> Result<SuccessCurve> {
        if self.per_replication.iter().all(Vec::is_empty) {
            return Err(Error::Statistical("no SINR samples".into()));
        }
        let sorted: Vec<Vec<f64>> = self
            .per_replication
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| {
                let mut r = r.clone();
                r.sort_by(f64::total_cmp);
                r
            })
            .collect();
        let mut values = Vec::with_capacity(thresholds.len());
        let mut ci = Vec::with_capacity(thresholds.len());
        for &theta in thresholds {
            let fractions: Vec<f64> = sorted
                .iter()
                .map(|r| (r.len() - r.partition_point(|&x| x <= theta)) as f64 / r.len() as f64)
                .collect();
            let est = McEstimate::from_samples(&fractions, z);
            values.push(est.mean.clamp(0.0, 1.0));
            ci.push(est.ci_halfwidth);
        }
        SuccessCurve::new(thresholds.to_vec(), values, CurveSource::MonteCarlo, Some(ci))
    }
}

/// Empirical `P(SINR > θ)` over a pooled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCcdf {
    sorted: Vec<f64>,
}

impl EmpiricalCcdf {
    pub fn new(samples: &SinrSamples) -> Self {
        EmpiricalCcdf {
            sorted: samples.sorted(),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.sorted.len();
        if n == 0 {
            return 0.0;
        }
        (n - self.sorted.partition_point(|&x| x <= theta)) as f64 / n as f64
    }

    /// `∫_0^∞ P̂(θ) / (1 + θ) dθ / ln 2` in bits/s/Hz. The curve is constant
    /// between consecutive samples, so each step integrates exactly to
    /// `P̂ · ln((1 + b) / (1 + a))`.
    pub fn rate_integral(&self) -> f64 {
        let n = self.sorted.len();
        if n == 0 {
            return 0.0;
        }
        let mut steps = Vec::with_capacity(n);
        let mut prev = 0.0f64;
        for (k, &x) in self.sorted.iter().enumerate() {
            let x = x.max(0.0);
            if x > prev {
                let level = (n - k) as f64 / n as f64;
                steps.push(level * (x.ln_1p() - prev.ln_1p()));
                prev = x;
            }
        }
        pairwise_sum(&steps) / LN_2
    }
}

/// Ergodic rate in bits/s/Hz as the mean of `log2(1 + SINR)`, with the
/// replication as the i.i.d. unit.
pub fn estimate_rate(samples: &SinrSamples, z: f64) -> McEstimate {
    let per_rep: Vec<f64> = samples
        .per_replication
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let logs: Vec<f64> = r.iter().map(|s| s.ln_1p() / LN_2).collect();
            pairwise_sum(&logs) / r.len() as f64
        })
        .collect();
    McEstimate::from_samples(&per_rep, z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessEstimate {
    pub curve: SuccessCurve,
    pub samples: SinrSamples,
    /// Replications without any link to evaluate (e.g. no active LWPA AP).
    pub skipped_replications: usize,
}

/// SINR draws at `user` served by `tx[serving]`, all other transmitters
/// interfering. Received powers are normalised by the transmit power.
fn link_sinr_draws<R: Rng + ?Sized>(
    tx: &[Point],
    serving: usize,
    user: Point,
    window: &Window,
    alpha: f64,
    noise_over_power: f64,
    draws: usize,
    rng: &mut R,
) -> Vec<f64> {
    let half_alpha = 0.5 * alpha;
    let signal_gain = window.dist2(user, tx[serving]).powf(-half_alpha);
    let gains: Vec<f64> = tx
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != serving)
        .map(|(_, p)| window.dist2(user, *p).powf(-half_alpha))
        .collect();
    (0..draws)
        .map(|_| {
            let h: f64 = Exp1.sample(rng);
            let interference: f64 = gains
                .iter()
                .map(|g| {
                    let hj: f64 = Exp1.sample(rng);
                    hj * g
                })
                .sum();
            h * signal_gain / (interference + noise_over_power)
        })
        .collect()
}

/// Places a user uniformly in the service disk of `ap`.
fn user_around<R: Rng + ?Sized>(ap: Point, r_serve: f64, window: &Window, rng: &mut R) -> Point {
    let radius = r_serve * rng.random::<f64>().sqrt();
    let angle = 2.0 * PI * rng.random::<f64>();
    window.wrap(Point::new(ap.x + radius * angle.cos(), ap.y + radius * angle.sin()))
}

/// Typical-link SINR draws for one deployment: serving AP chosen uniformly
/// among `tx[..candidates]`, user uniform in its service disk.
fn typical_wifi_link(
    tx: &[Point],
    candidates: usize,
    params: &NetworkParams,
    window: &Window,
    draws: usize,
    seed: RngSeed,
) -> Option<Vec<f64>> {
    if candidates == 0 {
        return None;
    }
    let mut rng = seed.rng(Stream::TypicalLink);
    let serving = rng.random_range(0..candidates);
    let user = user_around(tx[serving], params.r_serve(), window, &mut rng);
    Some(link_sinr_draws(
        tx,
        serving,
        user,
        window,
        params.alpha(),
        params.sigma2() / params.p_w(),
        draws,
        &mut rng,
    ))
}

/// SINR draws of the typical LWPA link in every replication.
pub fn wifi_sinr_samples(params: &NetworkParams, mc: &McConfig) -> Result<SinrSamples> {
    mc.validate(params)?;
    let per_rep = run_replications(mc, |_, seed| {
        let dep = Deployment::sample(params, mc.window, mc.exclusion, seed)?;
        let tx: Vec<Point> = dep
            .active_lwpa
            .iter()
            .chain(dep.active_closed.iter())
            .copied()
            .collect();
        Ok(typical_wifi_link(
            &tx,
            dep.active_lwpa.len(),
            params,
            &mc.window,
            mc.fading_draws_per_geometry,
            seed,
        )
        .unwrap_or_default())
    })?;
    Ok(SinrSamples::new(per_rep))
}

fn finish_success(samples: SinrSamples, thresholds: &[f64], mc: &McConfig, what: &str) -> Result<SuccessEstimate> {
    let skipped = samples.replications().iter().filter(|r| r.is_empty()).count();
    if skipped == samples.replications().len() {
        return Err(Error::Statistical(format!("no {what} link in any replication")));
    }
    let curve = samples.success_curve(thresholds, mc.z_value())?;
    Ok(SuccessEstimate {
        curve,
        samples,
        skipped_replications: skipped,
    })
}

/// Empirical success curve of the typical LWPA-mode WiFi link. The
/// interferers are all other active LWPA APs and all contention-winning
/// closed APs.
pub fn estimate_wifi_success(thresholds: &[f64], params: &NetworkParams, mc: &McConfig) -> Result<SuccessEstimate> {
    let samples = wifi_sinr_samples(params, mc)?;
    finish_success(samples, thresholds, mc, "active LWPA-mode")
}

/// SINR draws of a user at the window centre served by its nearest BS.
pub fn lte_sinr_samples(params: &NetworkParams, mc: &McConfig) -> Result<SinrSamples> {
    mc.validate(params)?;
    let window = mc.window;
    let user = window.center();
    let per_rep = run_replications(mc, |_, seed| {
        let bs = sample_ppp_with(params.lambda_l(), window, &mut seed.rng(Stream::LteBs))?;
        let nearest = bs
            .iter()
            .enumerate()
            .min_by(|a, b| window.dist2(user, *a.1).total_cmp(&window.dist2(user, *b.1)))
            .map(|(i, _)| i);
        Ok(match nearest {
            None => Vec::new(),
            Some(serving) => link_sinr_draws(
                bs.points(),
                serving,
                user,
                &window,
                params.alpha(),
                params.sigma2() / params.p_l(),
                mc.fading_draws_per_geometry,
                &mut seed.rng(Stream::TypicalLink),
            ),
        })
    })?;
    Ok(SinrSamples::new(per_rep))
}

pub fn estimate_lte_success(thresholds: &[f64], params: &NetworkParams, mc: &McConfig) -> Result<SuccessEstimate> {
    let samples = lte_sinr_samples(params, mc)?;
    finish_success(samples, thresholds, mc, "LTE")
}

/// Per-replication ASE with LWPA (`T_r`) and of the closed-only baseline
/// (`T̃_r`) on the same deployment, bits/s/Hz/m².
pub fn ase_replications(
    params: &NetworkParams,
    mc: &McConfig,
    lwpa_enabled: bool,
) -> Result<Vec<(f64, f64)>> {
    mc.validate(params)?;
    let window = mc.window;
    let area = window.area();
    run_replications(mc, |_, seed| {
        let dep = Deployment::sample(params, window, mc.exclusion, seed)?;
        let lwpa: &[Point] = if lwpa_enabled { dep.active_lwpa.points() } else { &[] };
        let all: Vec<Point> = lwpa.iter().chain(dep.active_closed.iter()).copied().collect();
        let closed = dep.active_closed.points();

        let ase = |tx: &[Point]| -> f64 {
            match typical_wifi_link(tx, tx.len(), params, &window, mc.fading_draws_per_geometry, seed) {
                None => 0.0,
                Some(draws) => {
                    let logs: Vec<f64> = draws.iter().map(|s| s.ln_1p() / LN_2).collect();
                    tx.len() as f64 / area * pairwise_sum(&logs) / draws.len() as f64
                }
            }
        };
        Ok((ase(&all), ase(closed)))
    })
}

/// ASE improvement `T / T̃` as a ratio of means over paired replications,
/// with a delta-method interval.
pub fn estimate_ase_improvement_with(
    params: &NetworkParams,
    mc: &McConfig,
    lwpa_enabled: bool,
) -> Result<McEstimate> {
    if params.p_closed() <= 0.0 {
        return Err(Error::DivisionByZero("no closed-access APs: the baseline ASE is zero"));
    }
    let pairs = ase_replications(params, mc, lwpa_enabled)?;
    let n = pairs.len();
    let num: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let den: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mean_num = pairwise_sum(&num) / n as f64;
    let mean_den = pairwise_sum(&den) / n as f64;
    if mean_den <= 0.0 {
        return Err(Error::DivisionByZero("baseline ASE estimate is zero"));
    }
    let ratio = mean_num / mean_den;
    let residuals: Vec<f64> = pairs.iter().map(|(t, b)| (t - ratio * b) / mean_den).collect();
    let spread = McEstimate::from_samples(&residuals, mc.z_value());
    Ok(McEstimate {
        mean: ratio,
        ci_halfwidth: spread.ci_halfwidth,
        n_samples: n,
    })
}

pub fn estimate_ase_improvement(params: &NetworkParams, mc: &McConfig) -> Result<McEstimate> {
    estimate_ase_improvement_with(params, mc, true)
}
