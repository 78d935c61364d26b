//! Model parameters and unit conversions.

use std::fmt;

use crate::error::{Error, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(value_dbm: f64) -> f64 {
    10f64.powf(value_dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// Converts a density given per km² to the internal per-m² unit.
pub fn per_km2(value: f64) -> f64 {
    value / 1e6
}

/// Scalar parameters of the two-tier LTE/WiFi network.
///
/// Densities are points per m², distances meters, powers watts and
/// bandwidths hertz. Instances are only obtainable through
/// [`NetworkParamsBuilder::build`], which enforces the invariants, so every
/// `NetworkParams` in circulation is valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    lambda_l: f64,
    lambda_w: f64,
    p_closed: f64,
    xi_u: f64,
    r_serve: f64,
    delta: f64,
    alpha: f64,
    p_l: f64,
    p_w: f64,
    sigma2: f64,
    b_c: f64,
    b_w: f64,
}

impl NetworkParams {
    pub fn builder() -> NetworkParamsBuilder {
        NetworkParamsBuilder::default()
    }

    pub fn to_builder(&self) -> NetworkParamsBuilder {
        NetworkParamsBuilder {
            lambda_l: Some(self.lambda_l),
            lambda_w: Some(self.lambda_w),
            p_closed: Some(self.p_closed),
            xi_u: Some(self.xi_u),
            r_serve: Some(self.r_serve),
            delta: Some(self.delta),
            alpha: Some(self.alpha),
            p_l: Some(self.p_l),
            p_w: Some(self.p_w),
            sigma2: Some(self.sigma2),
            b_c: Some(self.b_c),
            b_w: Some(self.b_w),
        }
    }

    /// LTE base-station density.
    pub fn lambda_l(&self) -> f64 {
        self.lambda_l
    }
    /// Total WiFi access-point density (open and closed).
    pub fn lambda_w(&self) -> f64 {
        self.lambda_w
    }
    /// Probability that a WiFi AP is closed-access.
    pub fn p_closed(&self) -> f64 {
        self.p_closed
    }
    /// Cellular user density.
    pub fn xi_u(&self) -> f64 {
        self.xi_u
    }
    /// WiFi service range.
    pub fn r_serve(&self) -> f64 {
        self.r_serve
    }
    /// CSMA guard-zone radius.
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn p_l(&self) -> f64 {
        self.p_l
    }
    pub fn p_w(&self) -> f64 {
        self.p_w
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn b_c(&self) -> f64 {
        self.b_c
    }
    pub fn b_w(&self) -> f64 {
        self.b_w
    }

    /// Density of open-access APs, `(1 - p) λ_W`.
    pub fn lambda_w_open(&self) -> f64 {
        (1.0 - self.p_closed) * self.lambda_w
    }

    /// Density of closed-access APs before contention, `p λ_W`.
    pub fn lambda_w_closed(&self) -> f64 {
        self.p_closed * self.lambda_w
    }

    pub fn with_p_closed(&self, p_closed: f64) -> Result<Self> {
        self.to_builder().p_closed(p_closed).build()
    }

    pub fn with_xi_u(&self, xi_u: f64) -> Result<Self> {
        self.to_builder().xi_u(xi_u).build()
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        self.to_builder().delta(delta).build()
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        self.to_builder().sigma2(sigma2).build()
    }

    /// Key/value listing in SI units, used for output metadata.
    pub fn entries(&self) -> [(&'static str, f64); 12] {
        [
            ("lambda_L", self.lambda_l),
            ("lambda_W", self.lambda_w),
            ("p_closed", self.p_closed),
            ("xi_u", self.xi_u),
            ("R_serve", self.r_serve),
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("P_L", self.p_l),
            ("P_W", self.p_w),
            ("sigma2", self.sigma2),
            ("B_c", self.b_c),
            ("B_w", self.b_w),
        ]
    }
}

impl fmt::Display for NetworkParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (key, value)) in self.entries().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{key}={value:e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct NetworkParamsBuilder {
    lambda_l: Option<f64>,
    lambda_w: Option<f64>,
    p_closed: Option<f64>,
    xi_u: Option<f64>,
    r_serve: Option<f64>,
    delta: Option<f64>,
    alpha: Option<f64>,
    p_l: Option<f64>,
    p_w: Option<f64>,
    sigma2: Option<f64>,
    b_c: Option<f64>,
    b_w: Option<f64>,
}

macro_rules! setters {
    ($($name:ident),*) => {
        $(
            pub fn $name(mut self, value: f64) -> Self {
                self.$name = Some(value);
                self
            }
        )*
    };
}

impl NetworkParamsBuilder {
    setters!(lambda_l, lambda_w, p_closed, xi_u, r_serve, delta, alpha, p_l, p_w, sigma2, b_c, b_w);

    /// Validates and freezes the parameters. Reports the first violation.
    pub fn build(self) -> Result<NetworkParams> {
        self.build_all().map_err(|mut errs| errs.remove(0))
    }

    /// Validates every field and reports all violations at once.
    pub fn build_all(self) -> std::result::Result<NetworkParams, Vec<Error>> {
        let mut errors = Vec::new();
        let mut take = |field: &'static str, value: Option<f64>| -> f64 {
            match value {
                None => {
                    errors.push(Error::invalid(field, "missing value"));
                    f64::NAN
                }
                Some(v) if !v.is_finite() => {
                    errors.push(Error::invalid(field, "must be finite"));
                    v
                }
                Some(v) if v < 0.0 => {
                    errors.push(Error::invalid(field, "must be non-negative"));
                    v
                }
                Some(v) => v,
            }
        };

        let params = NetworkParams {
            lambda_l: take("lambda_L", self.lambda_l),
            lambda_w: take("lambda_W", self.lambda_w),
            p_closed: take("p_closed", self.p_closed),
            xi_u: take("xi_u", self.xi_u),
            r_serve: take("R_serve", self.r_serve),
            delta: take("delta", self.delta),
            alpha: take("alpha", self.alpha),
            p_l: take("P_L", self.p_l),
            p_w: take("P_W", self.p_w),
            sigma2: take("sigma2", self.sigma2),
            b_c: take("B_c", self.b_c),
            b_w: take("B_w", self.b_w),
        };

        if params.p_closed > 1.0 {
            errors.push(Error::invalid("p_closed", "must lie in [0, 1]"));
        }
        if params.alpha.is_finite() && params.alpha <= 2.0 {
            errors.push(Error::invalid("alpha", "alpha must exceed 2"));
        }

        if errors.is_empty() {
            Ok(params)
        } else {
            Err(errors)
        }
    }
}

/// Parameter set of the reference scenario: 100 BS/km², 200 AP/km², 30 m
/// service range, 50 m guard zone, α = 4, 10 MHz on both bands, 22 dBm LTE
/// and 18 dBm WiFi transmit power, -95 dBm noise.
///
/// `p_closed` and `xi_u` are swept in every experiment and must be supplied.
pub fn reference_params(p_closed: f64, xi_u: f64) -> Result<NetworkParams> {
    NetworkParams::builder()
        .lambda_l(per_km2(100.0))
        .lambda_w(per_km2(200.0))
        .p_closed(p_closed)
        .xi_u(xi_u)
        .r_serve(30.0)
        .delta(50.0)
        .alpha(4.0)
        .p_l(dbm_to_watts(22.0))
        .p_w(dbm_to_watts(18.0))
        .sigma2(dbm_to_watts(-95.0))
        .b_c(10e6)
        .b_w(10e6)
        .build()
}
