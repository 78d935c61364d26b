//! Closed-form and integral expressions for the LWPA network.
//!
//! Densities come from three approximations of the active LWPA-mode AP
//! intensity. Downstream metrics use the third one, `λ_A = λ_A^3`, and treat
//! the active WiFi transmitters (LWPA plus contention-winning closed APs) as
//! a Poisson field of intensity `λ_A + λ̃_W2` outside the guard zone.

use std::cell::Cell;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::numerics::{
    improper_theta_integral, integrate, integrate_semi_infinite, laplace_exponent_fast,
    QuadratureConfig, QuadratureError,
};
use crate::params::NetworkParams;

/// Probability that a PPP of density `xi_u` has a point within `r`:
/// `1 - exp(-ξ_u π R²)`.
pub fn retain_p1(xi_u: f64, r: f64) -> f64 {
    -(-xi_u * PI * r * r).exp_m1()
}

/// Probability that no contention-winning closed AP lies within `delta`:
/// `exp(exp(-p λ_W π δ²) - 1)`.
pub fn retain_p2(p: f64, lambda_w: f64, delta: f64) -> f64 {
    (-p * lambda_w * PI * delta * delta).exp_m1().exp()
}

/// Intensity of a Matérn type-II thinning of a PPP of density `lambda`:
/// `(1 - exp(-λ π δ²)) / (π δ²)`.
pub fn matern_density(lambda: f64, delta: f64) -> f64 {
    let area = PI * delta * delta;
    if area == 0.0 {
        return lambda;
    }
    -(-lambda * area).exp_m1() / area
}

/// The three approximations of the active LWPA-mode AP density together
/// with their intermediates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityApproximations {
    /// Thinning by users and closed-AP holes, then Matérn contention.
    pub lambda_a1: f64,
    /// Matérn contention among open APs, then thinning.
    pub lambda_a2: f64,
    /// Matérn contention among all APs, then open-access and user thinning.
    pub lambda_a3: f64,
    /// Closed APs surviving their own contention.
    pub lambda_tilde_w2: f64,
    pub p1: f64,
    pub p2: f64,
    /// `λ̃_W2 < P1 λ_W1`.
    pub validity_a: bool,
    /// `λ̃_W2 < P1 λ̂_W1`.
    pub validity_b: bool,
    pub lambda_tilde_w1: f64,
    pub lambda_hat_w1: f64,
    pub lambda_tilde_w: f64,
}

impl DensityApproximations {
    pub fn new(params: &NetworkParams) -> Self {
        let delta = params.delta();
        let area = PI * delta * delta;
        let p = params.p_closed();
        let lambda_w = params.lambda_w();
        let lambda_w1 = params.lambda_w_open();

        let p1 = retain_p1(params.xi_u(), params.r_serve());
        let p2 = retain_p2(p, lambda_w, delta);
        let lambda_tilde_w2 = matern_density(params.lambda_w_closed(), delta);
        let lambda_tilde_w1 = p1 * p2 * lambda_w1;
        let lambda_hat_w1 = matern_density(lambda_w1, delta);
        let lambda_tilde_w = matern_density(lambda_w, delta);

        let lambda_a1 = matern_density(lambda_tilde_w1, delta);
        let lambda_a2 = p1 * p2 * lambda_hat_w1;
        let lambda_a3 = p1 * (1.0 - p) * lambda_tilde_w;
        debug_assert!(area == 0.0 || lambda_a3 <= 1.0 / area * (1.0 + 1e-12));

        DensityApproximations {
            lambda_a1,
            lambda_a2,
            lambda_a3,
            lambda_tilde_w2,
            p1,
            p2,
            validity_a: lambda_tilde_w2 < p1 * lambda_w1,
            validity_b: lambda_tilde_w2 < p1 * lambda_hat_w1,
            lambda_tilde_w1,
            lambda_hat_w1,
            lambda_tilde_w,
        }
    }

    /// Density of active LWPA-mode APs used by all downstream metrics.
    pub fn lambda_a(&self) -> f64 {
        self.lambda_a3
    }

    /// Density of all active WiFi transmitters, `λ_A + λ̃_W2`.
    pub fn lambda_active_wifi(&self) -> f64 {
        self.lambda_a3 + self.lambda_tilde_w2
    }
}

pub fn density_approximations(params: &NetworkParams) -> DensityApproximations {
    DensityApproximations::new(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    Analytic,
    MonteCarlo,
}

/// Success probability sampled on an increasing grid of SINR thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessCurve {
    thresholds: Vec<f64>,
    values: Vec<f64>,
    source: CurveSource,
    ci_halfwidth: Option<Vec<f64>>,
}

impl SuccessCurve {
    /// Monotonicity is checked up to `1e-9` to absorb quadrature noise.
    pub fn new(
        thresholds: Vec<f64>,
        values: Vec<f64>,
        source: CurveSource,
        ci_halfwidth: Option<Vec<f64>>,
    ) -> Result<Self> {
        if thresholds.len() != values.len()
            || ci_halfwidth.as_ref().is_some_and(|c| c.len() != values.len())
        {
            return Err(Error::invalid("curve", "length mismatch"));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("thresholds", "must be strictly increasing"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("values", "probabilities must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[1] > w[0] + 1e-9) {
            return Err(Error::invalid("values", "must be non-increasing in the threshold"));
        }
        Ok(SuccessCurve {
            thresholds,
            values,
            source,
            ci_halfwidth,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> CurveSource {
        self.source
    }

    pub fn ci_halfwidth(&self) -> Option<&[f64]> {
        self.ci_halfwidth.as_deref()
    }
}

/// `1 - ∫ f(d) (1 - exp(-exponent(d))) dd`; written as a deficit so that
/// vanishing thresholds give exactly 1.
fn probability_from_deficit(deficit: f64) -> f64 {
    (1.0 - deficit).clamp(0.0, 1.0)
}

/// Carries the first inner error out of an infallible integrand.
struct Fallible {
    error: Cell<Option<Error>>,
}

impl Fallible {
    fn new() -> Self {
        Fallible {
            error: Cell::new(None),
        }
    }

    fn wrap(&self, value: Result<f64>) -> f64 {
        match value {
            Ok(v) => v,
            Err(e) => {
                let first = self.error.take().unwrap_or(e);
                self.error.set(Some(first));
                f64::NAN
            }
        }
    }

    fn finish<T>(self, outer: std::result::Result<T, QuadratureError>) -> Result<T> {
        match (self.error.into_inner(), outer) {
            (Some(inner), _) => Err(inner),
            (None, r) => Ok(r?),
        }
    }
}

/// Success probability of a typical active LWPA-mode WiFi link,
/// `P(SINR_W > θ)`, for interferers of density `lambda_interferers`.
///
/// The user is uniform in the service disk (link distance density
/// `2l/R²`); interferers form a PPP outside a disk of radius `max(δ - l, 0)`
/// centred at the user.
pub fn wifi_success_probability(
    theta: f64,
    params: &NetworkParams,
    lambda_interferers: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_theta(theta)?;
    if !(lambda_interferers >= 0.0 && lambda_interferers.is_finite()) {
        return Err(Error::invalid("lambda_interferers", "must be finite and non-negative"));
    }
    let r = params.r_serve();
    if theta == 0.0 || r == 0.0 {
        return Ok(1.0);
    }
    let (alpha, delta) = (params.alpha(), params.delta());
    let noise = theta * params.sigma2() / params.p_w();

    let guard = Fallible::new();
    let integrand = |l: f64| {
        let path = l.powf(alpha);
        let exclusion = (delta - l).max(0.0);
        let exponent = laplace_exponent_fast(theta * path, exclusion, lambda_interferers, alpha, cfg)
            .map(|e| e + noise * path)
            .map_err(Error::from);
        let exponent = guard.wrap(exponent);
        2.0 * l / (r * r) * -(-exponent).exp_m1()
    };

    // the exclusion radius has a kink at l = δ
    let deficit = if delta > 0.0 && delta < r {
        let near = integrate(&integrand, 0.0, delta, cfg);
        let far = integrate(&integrand, delta, r, cfg);
        match (near, far) {
            (Ok(a), Ok(b)) => Ok(a.value + b.value),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    } else {
        integrate(&integrand, 0.0, r, cfg).map(|i| i.value)
    };
    Ok(probability_from_deficit(guard.finish(deficit)?))
}

/// Success probability of a typical LTE link under nearest-BS association,
/// `P(SINR_L > θ)`.
pub fn lte_success_probability(theta: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    check_theta(theta)?;
    let lambda_l = params.lambda_l();
    if lambda_l <= 0.0 {
        return Err(Error::invalid("lambda_L", "LTE link needs a positive BS density"));
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    let alpha = params.alpha();
    let noise = theta * params.sigma2() / params.p_l();

    // v = π λ_L r² turns the serving-distance density into e^{-v}
    let guard = Fallible::new();
    let integrand = |v: f64| {
        let r = (v / (PI * lambda_l)).sqrt();
        let path = r.powf(alpha);
        let exponent = laplace_exponent_fast(theta * path, r, lambda_l, alpha, cfg)
            .map(|e| e + noise * path)
            .map_err(Error::from);
        let exponent = guard.wrap(exponent);
        (-v).exp() * -(-exponent).exp_m1()
    };
    let deficit = integrate_semi_infinite(integrand, 0.0, 1.0, cfg).map(|i| i.value);
    Ok(probability_from_deficit(guard.finish(deficit)?))
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("theta", "SINR threshold must be finite and non-negative"))
    }
}

pub fn wifi_success_curve(
    thresholds: &[f64],
    params: &NetworkParams,
    lambda_interferers: f64,
    cfg: &QuadratureConfig,
) -> Result<SuccessCurve> {
    let values = thresholds
        .iter()
        .map(|&t| wifi_success_probability(t, params, lambda_interferers, cfg))
        .collect::<Result<Vec<_>>>()?;
    SuccessCurve::new(thresholds.to_vec(), values, CurveSource::Analytic, None)
}

pub fn lte_success_curve(
    thresholds: &[f64],
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<SuccessCurve> {
    let values = thresholds
        .iter()
        .map(|&t| lte_success_probability(t, params, cfg))
        .collect::<Result<Vec<_>>>()?;
    SuccessCurve::new(thresholds.to_vec(), values, CurveSource::Analytic, None)
}

/// Ergodic rate `E[log2(1 + SINR)]` in bits/s/Hz from a success
/// probability function: `∫_0^∞ P(θ) / (1 + θ) dθ / ln 2`.
pub fn ergodic_rate<F>(success: F, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let guard = Fallible::new();
    let nats = improper_theta_integral(|theta| guard.wrap(success(theta)), cfg);
    Ok(guard.finish(nats)? / LN_2)
}

/// Ergodic rate of a typical LWPA-mode WiFi link.
pub fn wifi_ergodic_rate(params: &NetworkParams, lambda_interferers: f64, cfg: &QuadratureConfig) -> Result<f64> {
    ergodic_rate(|t| wifi_success_probability(t, params, lambda_interferers, cfg), cfg)
}

pub fn lte_ergodic_rate(params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    ergodic_rate(|t| lte_success_probability(t, params, cfg), cfg)
}

/// Components of the cellular rate improvement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularRateImprovement {
    /// `B_w R_WiFi N_W / (B_c R_LTE)`.
    pub ratio: f64,
    pub r_wifi: f64,
    pub r_lte: f64,
    /// Mean number of active LWPA-mode APs per LTE cell, `λ_A / λ_L`.
    pub n_w: f64,
}

pub fn cellular_rate_breakdown(params: &NetworkParams, cfg: &QuadratureConfig) -> Result<CellularRateImprovement> {
    if params.lambda_l() <= 0.0 {
        return Err(Error::invalid("lambda_L", "must be positive"));
    }
    let d = DensityApproximations::new(params);
    let n_w = d.lambda_a() / params.lambda_l();
    let r_lte = lte_ergodic_rate(params, cfg)?;
    if r_lte <= 0.0 {
        return Err(Error::DivisionByZero("LTE ergodic rate is zero"));
    }
    if n_w == 0.0 {
        return Ok(CellularRateImprovement {
            ratio: 0.0,
            r_wifi: f64::NAN,
            r_lte,
            n_w,
        });
    }
    let r_wifi = wifi_ergodic_rate(params, d.lambda_active_wifi(), cfg)?;
    Ok(CellularRateImprovement {
        ratio: params.b_w() * r_wifi * n_w / (params.b_c() * r_lte),
        r_wifi,
        r_lte,
        n_w,
    })
}

/// Ratio of WiFi-contributed to LTE aggregate rate in a typical cell.
pub fn cellular_rate_improvement(params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(cellular_rate_breakdown(params, cfg)?.ratio)
}

/// Interferer density used for the LWPA-disabled ASE baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AseBaseline {
    /// Contention winners only, `λ̃_W2`; the baseline then equals the
    /// LWPA ASE evaluated at `λ_A = 0`.
    #[default]
    ActiveClosed,
    /// All closed-access APs, `p λ_W`, as interferers (the prefactor stays
    /// `λ̃_W2`).
    AllClosed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AseImprovement {
    /// `T / T̃`.
    pub ratio: f64,
    /// ASE with LWPA enabled, bits/s/Hz/m².
    pub ase: f64,
    /// ASE of the closed-access-only baseline, bits/s/Hz/m².
    pub ase_baseline: f64,
}

pub fn ase_breakdown(params: &NetworkParams, baseline: AseBaseline, cfg: &QuadratureConfig) -> Result<AseImprovement> {
    let d = DensityApproximations::new(params);
    if d.lambda_tilde_w2 <= 0.0 {
        return Err(Error::DivisionByZero("no closed-access APs: the baseline ASE is zero"));
    }
    let active = d.lambda_active_wifi();
    let ase = active * wifi_ergodic_rate(params, active, cfg)?;
    let baseline_interferers = match baseline {
        AseBaseline::ActiveClosed => d.lambda_tilde_w2,
        AseBaseline::AllClosed => params.lambda_w_closed(),
    };
    let ase_baseline = d.lambda_tilde_w2 * wifi_ergodic_rate(params, baseline_interferers, cfg)?;
    if ase_baseline <= 0.0 {
        return Err(Error::DivisionByZero("baseline ASE is zero"));
    }
    Ok(AseImprovement {
        ratio: ase / ase_baseline,
        ase,
        ase_baseline,
    })
}

/// ASE improvement of the WiFi band, `T / T̃`, with the default baseline.
pub fn ase_improvement(params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(ase_breakdown(params, AseBaseline::default(), cfg)?.ratio)
}
