//! Laplace transform of Poisson-field interference under Rayleigh fading.
//!
//! For interferers of density `λ` outside a disk of radius `x` around the
//! receiver, unit-mean exponential fading and pathloss `r^-α`,
//!
//! ```text
//! L(s) = exp(-π λ s^(2/α) ∫_{x²/s^(2/α)}^∞ dw / (1 + w^(α/2)))
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use super::quadrature::{integrate, QuadratureConfig, QuadratureError};

/// `∫_lower^∞ dw / (1 + w^(α/2))` by adaptive quadrature.
///
/// With `a = α/2`, `k = a - 1` and `w = (1 + lower - x) / x`, `x = s^(1/k)`,
/// the integral becomes `(1 + lower)/k ∫_0^1 ds / (x^a + (1 + lower - x)^a)`,
/// whose integrand stays bounded even as `α → 2`.
pub fn interference_tail_integral(
    lower: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    assert!(lower >= 0.0, "lower bound must be non-negative, got {lower}");
    assert!(alpha > 2.0, "pathloss exponent must exceed 2, got {alpha}");
    if lower.is_infinite() {
        return Ok(0.0);
    }
    let a = 0.5 * alpha;
    let k = a - 1.0;
    let top = 1.0 + lower;
    let r = integrate(
        |s| {
            let x = s.powf(1.0 / k);
            1.0 / (x.powf(a) + (top - x).powf(a))
        },
        0.0,
        1.0,
        cfg,
    )?;
    Ok(top / k * r.value)
}

/// Closed form of the tail integral at `α = 4`: `π/2 - arctan(lower)`.
pub fn interference_tail_alpha4(lower: f64) -> f64 {
    if lower > 1.0 {
        // avoids cancellation for large bounds
        (1.0 / lower).atan()
    } else {
        FRAC_PI_2 - lower.atan()
    }
}

/// Exponent `π λ s^(2/α) ∫ ...` of [`laplace_interference`], so that the
/// transform equals `exp(-exponent)`. Zero when `s` or `lambda` is zero.
pub fn laplace_exponent(
    s: f64,
    x: f64,
    lambda: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if s == 0.0 || lambda == 0.0 {
        return Ok(0.0);
    }
    let s_pow = s.powf(2.0 / alpha);
    let tail = interference_tail_integral(x * x / s_pow, alpha, cfg)?;
    Ok(PI * lambda * s_pow * tail)
}

pub fn laplace_exponent_alpha4(s: f64, x: f64, lambda: f64) -> f64 {
    if s == 0.0 || lambda == 0.0 {
        return 0.0;
    }
    let root = s.sqrt();
    PI * lambda * root * interference_tail_alpha4(x * x / root)
}

/// Closed form when `alpha` is exactly 4, quadrature otherwise.
pub fn laplace_exponent_fast(
    s: f64,
    x: f64,
    lambda: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if alpha == 4.0 {
        Ok(laplace_exponent_alpha4(s, x, lambda))
    } else {
        laplace_exponent(s, x, lambda, alpha, cfg)
    }
}

/// Laplace transform at `s` of the interference from a PPP of density
/// `lambda` outside `B(0, x)`, evaluated by quadrature for any `α > 2`.
pub fn laplace_interference(
    s: f64,
    x: f64,
    lambda: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    Ok((-laplace_exponent(s, x, lambda, alpha, cfg)?).exp())
}

/// `α = 4` specialisation: `exp(-π λ √s (π/2 - arctan(x² / √s)))`.
pub fn laplace_interference_alpha4(s: f64, x: f64, lambda: f64) -> f64 {
    (-laplace_exponent_alpha4(s, x, lambda)).exp()
}

pub fn laplace_interference_fast(
    s: f64,
    x: f64,
    lambda: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    Ok((-laplace_exponent_fast(s, x, lambda, alpha, cfg)?).exp())
}
