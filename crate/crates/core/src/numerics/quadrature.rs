//! Globally adaptive Gauss-Kronrod (G10/K21) integration.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge: value {value:e}, error estimate {abs_error:e} \
         after {intervals} subintervals"
    )]
    NonConvergence {
        value: f64,
        abs_error: f64,
        intervals: usize,
    },

    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Error control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(QuadratureError::InvalidConfig("rel_tol must be positive"));
        }
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(QuadratureError::InvalidConfig("abs_tol must be positive"));
        }
        if max_subdivisions == 0 {
            return Err(QuadratureError::InvalidConfig("max_subdivisions must be at least 1"));
        }
        Ok(QuadratureConfig {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

/// Result of a successful integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

// Kronrod abscissae; odd indices are the embedded Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, QuadratureError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(QuadratureError::NonFinite { x })
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = eval(f, center)?;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();
    let mut res_gauss = 0.0;

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let error = rescale_error((res_kronrod - res_gauss) * half, res_abs, res_asc);
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// The interval with the largest local error estimate is bisected until the
/// summed estimate falls below `max(abs_tol, rel_tol * |value|)`. The
/// integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are tolerated.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            intervals: 1,
        });
    }

    let mut segments = vec![gauss_kronrod_21(&f, a, b)?];
    loop {
        // Summation in index order keeps results bit-reproducible.
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                abs_error: error,
                intervals: segments.len(),
            });
        }

        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        let exhausted = segments.len() >= cfg.max_subdivisions;
        let too_narrow = mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b);
        if exhausted || too_narrow {
            return Err(QuadratureError::NonConvergence {
                value,
                abs_error: error,
                intervals: segments.len(),
            });
        }

        let left = gauss_kronrod_21(&f, seg.a, mid)?;
        let right = gauss_kronrod_21(&f, mid, seg.b)?;
        segments[worst] = left;
        segments.push(right);
    }
}

/// Integrates `f` over `[a, ∞)` through `x = a + scale * t / (1 - t)`,
/// `t ∈ [0, 1)`. `scale` should be the length over which `f` varies.
pub fn integrate_semi_infinite<F>(
    f: F,
    a: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    debug_assert!(scale > 0.0);
    integrate(
        |t| {
            let u = 1.0 - t;
            if u <= 0.0 {
                return 0.0;
            }
            let x = a + scale * t / u;
            let y = f(x);
            if y == 0.0 {
                0.0
            } else {
                y * scale / (u * u)
            }
        },
        0.0,
        1.0,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_weights_are_consistent() {
        let kronrod: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let gauss: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((kronrod - 2.0).abs() < 1e-14);
        assert!((gauss - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomials_are_exact() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, &cfg).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn endpoint_singularity() {
        let cfg = QuadratureConfig::new(1e-8, 1e-12, 500).unwrap();
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn semi_infinite_lorentzian() {
        let cfg = QuadratureConfig::default();
        let r = integrate_semi_infinite(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_interval_negates() {
        let cfg = QuadratureConfig::default();
        let fwd = integrate(f64::exp, 0.0, 1.0, &cfg).unwrap().value;
        let rev = integrate(f64::exp, 1.0, 0.0, &cfg).unwrap().value;
        assert!((fwd + rev).abs() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig::new(1e-12, 1e-15, 3).unwrap();
        let err = integrate(|x| (50.0 * x).sin().abs(), 0.0, 10.0, &cfg).unwrap_err();
        assert!(matches!(err, QuadratureError::NonConvergence { intervals: 3, .. }));
    }

    #[test]
    fn rejects_non_finite_integrand() {
        let cfg = QuadratureConfig::default();
        let err = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuadratureConfig::new(0.0, 1e-12, 10).is_err());
        assert!(QuadratureConfig::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureConfig::new(1e-8, 1e-12, 0).is_err());
    }

    #[test]
    fn tightening_tolerance_stays_within_error_estimate() {
        let integrands: [fn(f64) -> f64; 3] = [
            |x| (-x * x).exp(),
            |x| 1.0 / (1.0 + 25.0 * x * x),
            |x| (x * 7.0).cos() * x.sqrt(),
        ];
        for f in integrands {
            let mut tol = 1e-4;
            let mut prev = integrate(f, 0.0, 3.0, &QuadratureConfig::new(tol, 1e-14, 500).unwrap()).unwrap();
            while tol > 1e-11 {
                tol /= 2.0;
                let next = integrate(f, 0.0, 3.0, &QuadratureConfig::new(tol, 1e-14, 500).unwrap()).unwrap();
                assert!((next.value - prev.value).abs() <= prev.abs_error);
                prev = next;
            }
        }
    }
}
