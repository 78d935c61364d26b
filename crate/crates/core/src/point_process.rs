//! Spatial sampling of the two-tier network and the LWPA activation rules.
//!
//! Every tier is drawn on the same toroidal [`Window`]. A deployment is a
//! pure function of its parameters and one [`RngSeed`]: each tier draws
//! from its own ChaCha stream, so changing one density leaves the other
//! tiers of a seeded realization untouched.

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::params::NetworkParams;
use crate::pattern::{CellGrid, Point, PointPattern, Window};

/// Root of all randomness in a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSeed {
    /// Child seed for replication `index`:
    /// `splitmix64(root + 0x9e3779b97f4a7c15 * (index + 1))`.
    pub fn derive(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(
            self.0
                .wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))),
        ))
    }

    /// Generator for one named purpose within a realization.
    pub fn rng(self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream as u64);
        rng
    }
}

/// Independent random streams drawn from a single seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Default = 0,
    LteBs = 1,
    WifiAps = 2,
    AccessMarks = 3,
    Users = 4,
    ClosedContention = 5,
    LwpaContention = 6,
    TypicalLink = 7,
}

pub fn sample_ppp_with<R: Rng + ?Sized>(
    density: f64,
    window: Window,
    rng: &mut R,
) -> Result<PointPattern> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(Error::invalid("density", "must be finite and non-negative"));
    }
    let mean = density * window.area();
    if mean == 0.0 {
        return Ok(PointPattern::empty(window));
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid("density", e.to_string()))?
        .sample(rng) as usize;
    let points = (0..count)
        .map(|_| {
            Point::new(
                rng.random::<f64>() * window.width(),
                rng.random::<f64>() * window.height(),
            )
        })
        .map(|p| window.wrap(p))
        .collect();
    Ok(PointPattern::from_trusted(window, points))
}

/// Homogeneous Poisson point process of `density` points per m².
pub fn sample_ppp(density: f64, window: Window, seed: RngSeed) -> Result<PointPattern> {
    sample_ppp_with(density, window, &mut seed.rng(Stream::Default))
}

pub fn split_wifi_with<R: Rng + ?Sized>(
    wifi: &PointPattern,
    p_closed: f64,
    rng: &mut R,
) -> (PointPattern, PointPattern) {
    let closed: Vec<bool> = (0..wifi.len()).map(|_| rng.random::<f64>() < p_closed).collect();
    (wifi.select(|i| !closed[i]), wifi.select(|i| closed[i]))
}

/// Independent Bernoulli marking into `(open, closed)` access tiers.
pub fn split_wifi(wifi: &PointPattern, p_closed: f64, seed: RngSeed) -> Result<(PointPattern, PointPattern)> {
    if !(0.0..=1.0).contains(&p_closed) {
        return Err(Error::invalid("p_closed", "must lie in [0, 1]"));
    }
    Ok(split_wifi_with(wifi, p_closed, &mut seed.rng(Stream::Default)))
}

pub fn matern_ii_with<R: Rng + ?Sized>(pattern: &PointPattern, delta: f64, rng: &mut R) -> PointPattern {
    if delta <= 0.0 || pattern.len() < 2 {
        return pattern.clone();
    }
    let marks: Vec<f64> = (0..pattern.len()).map(|_| rng.random::<f64>()).collect();
    let grid = CellGrid::new(pattern.window(), pattern.points(), delta);
    let beats = |j: usize, i: usize| (marks[j], j) < (marks[i], i);
    pattern.select(|i| {
        let mut dominated = false;
        grid.for_each_within(pattern.points()[i], delta, |j, _| {
            if j != i && beats(j, i) {
                dominated = true;
            }
        });
        !dominated
    })
}

/// Matérn type-II hard-core thinning: a point survives iff no other input
/// point within `delta` (toroidal) carries a smaller uniform mark.
pub fn matern_ii(pattern: &PointPattern, delta: f64, seed: RngSeed) -> Result<PointPattern> {
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta", "must be non-negative"));
    }
    Ok(matern_ii_with(pattern, delta, &mut seed.rng(Stream::Default)))
}

/// Number of points per unit area.
pub fn empirical_density(pattern: &PointPattern) -> f64 {
    pattern.len() as f64 / pattern.window().area()
}

/// Which closed-access APs open a guard-zone hole around themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedExclusion {
    /// Only closed APs that won their own contention.
    #[default]
    ActiveClosed,
    /// Every closed-access AP, active or not.
    AllClosed,
}

/// Sampled tiers before any activation rule is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Tiers {
    pub lte_bs: PointPattern,
    pub users: PointPattern,
    pub wifi_open: PointPattern,
    pub wifi_closed: PointPattern,
}

impl Tiers {
    pub fn sample(params: &NetworkParams, window: Window, seed: RngSeed) -> Result<Self> {
        let lte_bs = sample_ppp_with(params.lambda_l(), window, &mut seed.rng(Stream::LteBs))?;
        let wifi = sample_ppp_with(params.lambda_w(), window, &mut seed.rng(Stream::WifiAps))?;
        let (wifi_open, wifi_closed) =
            split_wifi_with(&wifi, params.p_closed(), &mut seed.rng(Stream::AccessMarks));
        let users = sample_ppp_with(params.xi_u(), window, &mut seed.rng(Stream::Users))?;
        Ok(Tiers {
            lte_bs,
            users,
            wifi_open,
            wifi_closed,
        })
    }

    pub fn window(&self) -> Window {
        self.lte_bs.window()
    }
}

/// One realization of the network with its active transmitter sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub lte_bs: PointPattern,
    pub users: PointPattern,
    pub wifi_open: PointPattern,
    pub wifi_closed: PointPattern,
    /// Closed-access APs that survive contention among themselves.
    pub active_closed: PointPattern,
    /// Open-access APs that satisfy all four activation conditions.
    pub active_lwpa: PointPattern,
}

/// Smallest toroidal window side for a guard radius `delta`.
pub fn min_window_side(delta: f64) -> f64 {
    4.0 * delta
}

/// Applies the activation pipeline to sampled tiers:
///
/// 1. closed-access APs contend among themselves (Matérn II, radius δ);
/// 2. an open AP is a candidate if some user lies within `R_serve` and no
///    excluding closed AP lies within δ;
/// 3. candidates contend among themselves (Matérn II, radius δ).
pub fn activate_lwpa(
    tiers: Tiers,
    params: &NetworkParams,
    exclusion: ClosedExclusion,
    seed: RngSeed,
) -> Result<Deployment> {
    let window = tiers.window();
    for tier in [&tiers.users, &tiers.wifi_open, &tiers.wifi_closed] {
        if tier.window() != window {
            return Err(Error::invalid("tiers", "all tiers must share one window"));
        }
    }
    let delta = params.delta();
    if window.min_side() < min_window_side(delta) {
        return Err(Error::invalid(
            "window",
            format!("side {} m is below 4·delta = {} m", window.min_side(), 4.0 * delta),
        ));
    }

    let active_closed = matern_ii_with(
        &tiers.wifi_closed,
        delta,
        &mut seed.rng(Stream::ClosedContention),
    );

    let blockers = match exclusion {
        ClosedExclusion::ActiveClosed => &active_closed,
        ClosedExclusion::AllClosed => &tiers.wifi_closed,
    };
    let r_serve = params.r_serve();
    let user_grid = CellGrid::new(window, tiers.users.points(), r_serve);
    let blocker_grid = CellGrid::new(window, blockers.points(), delta);
    let candidates = tiers.wifi_open.select(|i| {
        let ap = tiers.wifi_open.points()[i];
        r_serve > 0.0
            && user_grid.any_within(ap, r_serve, None)
            && (delta == 0.0 || !blocker_grid.any_within(ap, delta, None))
    });
    let active_lwpa = matern_ii_with(&candidates, delta, &mut seed.rng(Stream::LwpaContention));

    Ok(Deployment {
        lte_bs: tiers.lte_bs,
        users: tiers.users,
        wifi_open: tiers.wifi_open,
        wifi_closed: tiers.wifi_closed,
        active_closed,
        active_lwpa,
    })
}

impl Deployment {
    /// Samples tiers and applies [`activate_lwpa`] from a single seed.
    pub fn sample(
        params: &NetworkParams,
        window: Window,
        exclusion: ClosedExclusion,
        seed: RngSeed,
    ) -> Result<Self> {
        activate_lwpa(Tiers::sample(params, window, seed)?, params, exclusion, seed)
    }

    pub fn window(&self) -> Window {
        self.lte_bs.window()
    }

    /// Checks the structural invariants by brute force. Intended for tests
    /// and debugging; cost is quadratic in the active set sizes.
    pub fn check_invariants(&self, delta: f64, r_serve: f64) -> std::result::Result<(), String> {
        let window = self.window();
        let subset = |sub: &PointPattern, sup: &PointPattern, name: &str| {
            if sub.iter().all(|p| sup.points().contains(p)) {
                Ok(())
            } else {
                Err(format!("{name} is not a subset"))
            }
        };
        subset(&self.active_closed, &self.wifi_closed, "active_closed")?;
        subset(&self.active_lwpa, &self.wifi_open, "active_lwpa")?;

        let separated = |d: Option<f64>, name: &str| match d {
            Some(d) if d < delta => Err(format!("{name} separation {d} < {delta}")),
            _ => Ok(()),
        };
        separated(self.active_closed.min_pairwise_distance(), "active_closed")?;
        separated(self.active_lwpa.min_pairwise_distance(), "active_lwpa")?;
        separated(self.active_lwpa.min_cross_distance(&self.active_closed), "cross")?;

        for ap in self.active_lwpa.iter() {
            if !self.users.iter().any(|u| window.dist(*ap, *u) <= r_serve) {
                return Err(format!("active AP ({}, {}) has no user in range", ap.x, ap.y));
            }
        }
        Ok(())
    }

    /// Writes every tier as `tier,x,y` rows. Active sets are listed in
    /// addition to the tier they are drawn from.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "tier,x,y")?;
        let tiers = [
            ("lte_bs", &self.lte_bs),
            ("user", &self.users),
            ("wifi_open", &self.wifi_open),
            ("wifi_closed", &self.wifi_closed),
            ("active_closed", &self.active_closed),
            ("active_lwpa", &self.active_lwpa),
        ];
        for (label, pattern) in tiers {
            for p in pattern.iter() {
                writeln!(out, "{label},{:.6},{:.6}", p.x, p.y)?;
            }
        }
        Ok(())
    }
}
