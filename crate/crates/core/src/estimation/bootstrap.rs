//! Bootstrap inference for the productivity-growth ratio `-intercept / slope`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ols::line_fit;
use crate::table::RegressionSample;
use crate::{Error, Result};

/// Replicates whose slope magnitude falls below this are redrawn.
pub const MIN_REPLICATE_SLOPE: f64 = 1e-12;

/// Redraw cap as a multiple of the requested replicate count.
pub const REDRAW_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapScheme {
    /// Resample `(x, y)` rows with replacement.
    #[default]
    Pairs,
    /// Keep `x`, add resampled OLS residuals to the fitted line.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub reps: usize,
    pub seed: u64,
    pub scheme: BootstrapScheme,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { reps: 400, seed: 0, scheme: BootstrapScheme::Pairs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapSummary {
    /// Two-sided sign P-value for `TFPg = 0`.
    pub p_value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reps: usize,
}

impl BootstrapSummary {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }
}

/// Seed for one sector, so fan-out order never changes the draws.
pub fn sector_seed(seed: u64, sector: usize) -> u64 {
    seed ^ sector as u64
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstraps the TFPg ratio and returns the 5th/95th percentile interval
/// with the sign-based P-value `min(1, 2 * min(P(T <= 0), P(T >= 0)))`.
pub fn bootstrap_tfpg(sample: &RegressionSample, cfg: &BootstrapConfig) -> Result<BootstrapSummary> {
    let xs = sample.xs();
    let ys = sample.ys();
    let n = xs.len();
    let (slope0, intercept0) = line_fit(&xs, &ys).ok_or_else(|| Error::DegenerateSample {
        sector: sample.sector,
        reason: "regressor has zero variance".into(),
    })?;
    if cfg.reps == 0 {
        return Err(Error::InvalidInput("bootstrap needs at least one replicate".into()));
    }
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| y - intercept0 - slope0 * x)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cap = REDRAW_FACTOR * cfg.reps;
    let mut draws = 0;
    let mut tfpg = Vec::with_capacity(cfg.reps);
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];
    while tfpg.len() < cfg.reps {
        if draws == cap {
            return Err(Error::BootstrapUnstable { sector: sample.sector, draws, reps: cfg.reps });
        }
        draws += 1;
        match cfg.scheme {
            BootstrapScheme::Pairs => {
                for k in 0..n {
                    let idx = rng.random_range(0..n);
                    bx[k] = xs[idx];
                    by[k] = ys[idx];
                }
            }
            BootstrapScheme::Residual => {
                for k in 0..n {
                    let idx = rng.random_range(0..n);
                    bx[k] = xs[k];
                    by[k] = intercept0 + slope0 * xs[k] + residuals[idx];
                }
            }
        }
        match line_fit(&bx, &by) {
            Some((slope, intercept)) if slope.abs() >= MIN_REPLICATE_SLOPE => {
                tfpg.push(-intercept / slope)
            }
            _ => continue,
        }
    }

    let reps = tfpg.len() as f64;
    let nonpositive = tfpg.iter().filter(|t| **t <= 0.0).count() as f64 / reps;
    let nonnegative = tfpg.iter().filter(|t| **t >= 0.0).count() as f64 / reps;
    let p_value = (2.0 * nonpositive.min(nonnegative)).min(1.0);

    tfpg.sort_by(f64::total_cmp);
    Ok(BootstrapSummary {
        p_value,
        ci_lo: quantile_sorted(&tfpg, 0.05),
        ci_hi: quantile_sorted(&tfpg, 0.95),
        reps: tfpg.len(),
    })
}
