//! Quadrature kernels for the interference and rate integrals.

mod laplace;
mod quadrature;

pub use laplace::{
    interference_tail_alpha4, interference_tail_integral, laplace_exponent,
    laplace_exponent_alpha4, laplace_exponent_fast, laplace_interference,
    laplace_interference_alpha4, laplace_interference_fast,
};
pub use quadrature::{
    integrate, integrate_semi_infinite, Integral, QuadratureConfig, QuadratureError,
};

/// `∫_0^∞ f(θ) / (1 + θ) dθ` for a function bounded by 1 that vanishes as
/// `θ → ∞`, such as a success probability.
///
/// With `θ = u / (1 - u)` the factor `1 / (1 + θ)` becomes `1 - u` and
/// `dθ = du / (1 - u)²`, leaving `∫_0^1 f(u / (1 - u)) / (1 - u) du`.
pub fn improper_theta_integral<F>(f: F, cfg: &QuadratureConfig) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let r = integrate(
        |u| {
            let rest = 1.0 - u;
            if rest <= 0.0 {
                return 0.0;
            }
            let value = f(u / rest);
            if value == 0.0 {
                0.0
            } else {
                value / rest
            }
        },
        0.0,
        1.0,
        cfg,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// e·E₁(1) from the convergent series E₁(x) = -γ - ln x - Σ (-x)^k / (k k!).
    fn e_times_e1_at_one() -> f64 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            term *= -1.0 / k as f64;
            sum += term / k as f64;
        }
        std::f64::consts::E * (-EULER_GAMMA - sum)
    }

    #[test]
    fn theta_integral_oracles() {
        let cfg = QuadratureConfig::default();
        assert_eq!(improper_theta_integral(|_| 0.0, &cfg).unwrap(), 0.0);
        let lorentz = improper_theta_integral(|t| 1.0 / (1.0 + t), &cfg).unwrap();
        assert!((lorentz - 1.0).abs() < 1e-9);
        let expo = improper_theta_integral(|t| (-t).exp(), &cfg).unwrap();
        let oracle = e_times_e1_at_one();
        assert!((oracle - 0.59634).abs() < 1e-5);
        assert!((expo - oracle).abs() < 1e-9, "{expo} vs {oracle}");
    }

    #[test]
    fn deterministic() {
        let cfg = QuadratureConfig::default();
        let f = |t: f64| 1.0 / (1.0 + t.sqrt() * (std::f64::consts::FRAC_PI_2 - (1.0 / t.sqrt()).atan()));
        let a = improper_theta_integral(f, &cfg).unwrap();
        let b = improper_theta_integral(f, &cfg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
