//! Asymptotic matchability threshold for mixed degrees.
//!
//! With `n = c*m` left nodes of degree `l` (fraction `alpha`) or `l + 1`,
//! view each left node as a hyperedge on its right neighbours. A left-perfect
//! matching exists w.h.p. exactly when the 2-core of that hypergraph has
//! fewer edges than vertices. Density evolution gives the core through the
//! largest root `xi` of
//!
//! ```text
//! xi = c * E[K (1 - e^-xi)^(K-1)]
//! ```
//!
//! after which the core has `c * E[(1 - e^-xi)^K]` edges and
//! `1 - e^-xi - xi e^-xi` vertices per right node.

use crate::error::{Error, Result};
use crate::montecarlo::{count_failures, fixed_spec};
use crate::graph::SamplingMode;

/// Bracket for the threshold search; `c <= 1` is necessary for a matching.
pub const C_BRACKET: (f64, f64) = (0.01, 1.0);

/// Width at which [`threshold_c_star`] stops.
pub const C_TOLERANCE: f64 = 1e-9;

const XI_STEP_TOLERANCE: f64 = 1e-13;
const XI_ZERO: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000_000;

/// Degrees `l` (fraction `alpha`) and `l + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdQuery {
    pub l: u32,
    pub alpha: f64,
}

impl ThresholdQuery {
    pub fn new(l: u32, alpha: f64) -> Result<Self> {
        if l < 2 || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("need l >= 2 and alpha in [0, 1], got l={l}, alpha={alpha}")));
        }
        let q = Self { l, alpha };
        if q.dbar() <= 2.0 {
            return Err(Error::InvalidParameter("average degree must exceed 2".into()));
        }
        Ok(q)
    }

    /// Splits a real average degree into `l = floor(dbar)` and
    /// `alpha = ceil(dbar) - dbar`; integral `dbar` gives `alpha = 1`.
    pub fn from_dbar(dbar: f64) -> Result<Self> {
        if !(dbar.is_finite() && dbar > 2.0) {
            return Err(Error::InvalidParameter(format!("average degree must exceed 2, got {dbar}")));
        }
        let l = dbar.floor();
        let alpha = if dbar == l { 1.0 } else { dbar.ceil() - dbar };
        Self::new(l as u32, alpha)
    }

    pub fn dbar(&self) -> f64 {
        self.alpha * self.l as f64 + (1.0 - self.alpha) * (self.l + 1) as f64
    }

    fn weighted(&self, f: impl Fn(u32) -> f64) -> f64 {
        let mut total = 0.0;
        if self.alpha > 0.0 {
            total += self.alpha * f(self.l);
        }
        if self.alpha < 1.0 {
            total += (1.0 - self.alpha) * f(self.l + 1);
        }
        total
    }

    /// Right-hand side of the fixed-point equation.
    pub fn xi_map(&self, c: f64, xi: f64) -> f64 {
        let s = -(-xi).exp_m1();
        c * self.weighted(|k| k as f64 * s.powi(k as i32 - 1))
    }
}

/// Fixed-point parameter plus the core's edges per vertex (`None` when the
/// core is empty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreState {
    pub xi: f64,
    pub density: Option<f64>,
}

/// Largest non-negative root of `xi = c E[K (1 - e^-xi)^(K-1)]`.
///
/// Iterates the map from `c E[K]`, which bounds every root from above. The
/// map is increasing, so the iterates decrease monotonically to the largest
/// root. Returns 0 when the core is empty.
pub fn xi_fixed_point(c: f64, q: &ThresholdQuery) -> f64 {
    if !(c > 0.0) {
        return 0.0;
    }
    let mut xi = c * q.dbar();
    for _ in 0..MAX_ITERATIONS {
        let next = q.xi_map(c, xi);
        let step = xi - next;
        xi = next;
        if xi < XI_ZERO {
            return 0.0;
        }
        if step.abs() < XI_STEP_TOLERANCE {
            break;
        }
    }
    xi
}

/// `P(Po(xi) >= 2)`, accurate for small `xi`.
fn at_least_two(xi: f64) -> f64 {
    if xi > 0.1 {
        return -(-xi).exp_m1() - xi * (-xi).exp();
    }
    let mut term = xi * xi / 2.0;
    let mut sum = 0.0;
    let mut j = 2.0;
    while term > sum * 1e-18 {
        sum += term;
        j += 1.0;
        term *= xi / j;
    }
    sum * (-xi).exp()
}

/// Core edges per core vertex at load `c`.
pub fn core_density(c: f64, q: &ThresholdQuery) -> CoreState {
    let xi = xi_fixed_point(c, q);
    if xi == 0.0 {
        return CoreState { xi, density: None };
    }
    let s = -(-xi).exp_m1();
    let edges = c * q.weighted(|k| s.powi(k as i32));
    CoreState { xi, density: Some(edges / at_least_two(xi)) }
}

fn below_threshold(c: f64, q: &ThresholdQuery) -> bool {
    core_density(c, q).density.map_or(true, |d| d <= 1.0)
}

/// The load `c*` at which the core density crosses 1, by bisection on
/// [`C_BRACKET`].
///
/// ```
/// let c = leftmatch::threshold::threshold_c_star(3.5).unwrap();
/// assert!((c - 0.95708).abs() < 1e-5);
/// ```
pub fn threshold_c_star(dbar: f64) -> Result<f64> {
    let q = ThresholdQuery::from_dbar(dbar)?;
    let (mut lo, mut hi) = C_BRACKET;
    if below_threshold(hi, &q) {
        return Ok(hi);
    }
    while hi - lo > C_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if below_threshold(mid, &q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Brackets the load at which the simulated failure rate crosses 1/2.
///
/// Bisects [`C_BRACKET`]; each probe runs `trials` graphs of the fixed
/// near-optimal spec with `n = round(c m)` and seed stream `step`. Stops once
/// the bracket is at most `resolution` wide (or after one probe when
/// `resolution` exceeds half the bracket).
pub fn empirical_threshold(dbar: f64, m: usize, trials: u64, seed: u64, resolution: f64) -> Result<(f64, f64)> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
    }
    if trials == 0 || m < 2 {
        return Err(Error::InvalidParameter("need trials >= 1 and m >= 2".into()));
    }
    ThresholdQuery::from_dbar(dbar)?;
    let (mut lo, mut hi) = C_BRACKET;
    let mut step = 0u64;
    loop {
        let mid = 0.5 * (lo + hi);
        let n = ((mid * m as f64).round_ties_even() as usize).max(2);
        let spec = fixed_spec(n, dbar)?;
        let failures = count_failures(&spec, m, trials, seed, 0, step, SamplingMode::WithReplacement)?;
        if 2 * failures >= trials {
            hi = mid;
        } else {
            lo = mid;
        }
        step += 1;
        if hi - lo <= resolution || step >= 64 {
            return Ok((lo, hi));
        }
    }
}
