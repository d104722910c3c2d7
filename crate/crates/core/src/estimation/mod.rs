//! Sector-wise estimation of CES elasticities and productivity growth.
//!
//! Each sector's regression of share growth on relative-price growth has
//! slope `gamma = 1 - sigma` and intercept `-gamma * TFPg`.

mod agreement;
mod bootstrap;
mod ols;
mod tornqvist;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use agreement::{agreement, agreement_with, AgreementReport, MomentConvention};
pub use bootstrap::{
    bootstrap_tfpg, sector_seed, BootstrapConfig, BootstrapScheme, BootstrapSummary,
    MIN_REPLICATE_SLOPE, REDRAW_FACTOR,
};
pub use ols::{ols_fit, ols_fit_with, OlsFit, StdErrors};
pub use tornqvist::{tornqvist_sector, tornqvist_tfpg};

use crate::par::Execution;
use crate::table::{IOTable, LinkedObservation, RegressionSample};
use crate::Result;

pub const DEFAULT_ALPHA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stars {
    Three,
    Two,
    One,
    None,
}

impl Stars {
    pub fn from_p(p: f64) -> Stars {
        if p < 0.01 {
            Stars::Three
        } else if p < 0.05 {
            Stars::Two
        } else if p < 0.1 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::Three => "***",
            Stars::Two => "**",
            Stars::One => "*",
            Stars::None => "",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorEstimate {
    pub sector: usize,
    /// Raw OLS slope, kept even when the null is accepted.
    pub slope: f64,
    pub intercept: f64,
    /// Effective `gamma`: the slope, or 0 when the null is accepted.
    pub gamma: f64,
    pub sigma: f64,
    /// `-intercept / slope`; `None` for null-accepted or zero-slope sectors.
    pub tfpg: Option<f64>,
    pub se_slope: f64,
    pub se_intercept: f64,
    pub p_slope: f64,
    pub p_intercept: f64,
    pub stars_slope: Stars,
    pub stars_intercept: Stars,
    pub n_obs: usize,
    pub bootstrap: Option<BootstrapSummary>,
    pub accepted_null: bool,
}

impl SectorEstimate {
    /// Elasticity implied by the raw slope, ignoring significance.
    pub fn raw_sigma(&self) -> f64 {
        1.0 - self.slope
    }

    /// TFPg implied by the raw coefficients, ignoring significance.
    pub fn raw_tfpg(&self) -> Option<f64> {
        (self.slope != 0.0).then(|| -self.intercept / self.slope)
    }

    pub fn slope_significant(&self, alpha: f64) -> bool {
        self.p_slope < alpha
    }

    pub fn intercept_significant(&self, alpha: f64) -> bool {
        self.p_intercept < alpha
    }
}

/// Fits one sector and applies the significance gate: when `p_slope >= alpha`
/// the slope is treated as zero (Cobb-Douglas) and TFPg is left undefined.
pub fn estimate_sector(sample: &RegressionSample, alpha: f64, errors: StdErrors) -> Result<SectorEstimate> {
    let fit = ols_fit_with(&sample.xs(), &sample.ys(), errors).map_err(|e| match e {
        crate::Error::DegenerateSample { reason, .. } => crate::Error::DegenerateSample {
            sector: sample.sector,
            reason,
        },
        other => other,
    })?;
    let accepted_null = !(fit.p_slope < alpha);
    let gamma = if accepted_null { 0.0 } else { fit.slope };
    let tfpg = (!accepted_null && gamma != 0.0).then(|| -fit.intercept / fit.slope);
    Ok(SectorEstimate {
        sector: sample.sector,
        slope: fit.slope,
        intercept: fit.intercept,
        gamma,
        sigma: 1.0 - gamma,
        tfpg,
        se_slope: fit.se_slope,
        se_intercept: fit.se_intercept,
        p_slope: fit.p_slope,
        p_intercept: fit.p_intercept,
        stars_slope: Stars::from_p(fit.p_slope),
        stars_intercept: Stars::from_p(fit.p_intercept),
        n_obs: fit.n_obs,
        bootstrap: None,
        accepted_null,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EstimationConfig {
    pub alpha: f64,
    pub errors: StdErrors,
    /// `None` skips the bootstrap.
    pub bootstrap: Option<BootstrapConfig>,
    pub execution: Execution,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            alpha: DEFAULT_ALPHA,
            errors: StdErrors::Classical,
            bootstrap: Some(BootstrapConfig::default()),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SectorOutcome {
    Estimated {
        estimate: SectorEstimate,
        /// Törnqvist TFPg computed on the same data, when available.
        tornqvist: Option<f64>,
        bootstrap_error: Option<String>,
    },
    Skipped {
        sector: usize,
        n_obs: usize,
        reason: String,
    },
}

impl SectorOutcome {
    pub fn sector(&self) -> usize {
        match self {
            SectorOutcome::Estimated { estimate, .. } => estimate.sector,
            SectorOutcome::Skipped { sector, .. } => *sector,
        }
    }

    pub fn estimate(&self) -> Option<&SectorEstimate> {
        match self {
            SectorOutcome::Estimated { estimate, .. } => Some(estimate),
            SectorOutcome::Skipped { .. } => None,
        }
    }
}

/// Runs the full per-sector pipeline (fit, gate, bootstrap, Törnqvist) with
/// sectors fanned out according to `cfg.execution`. Bootstrap seeds are
/// derived per sector, so every execution mode returns identical results.
pub fn estimate_all(
    obs: &LinkedObservation,
    samples: &[RegressionSample],
    cfg: &EstimationConfig,
) -> Vec<SectorOutcome> {
    cfg.execution.map_slice(samples, |_, sample| {
        let tornqvist = tornqvist_sector(obs, sample.sector).ok();
        estimate_one(sample, tornqvist, cfg)
    })
}

/// [`estimate_all`] without Törnqvist benchmarks, for bare samples.
pub fn estimate_samples(samples: &[RegressionSample], cfg: &EstimationConfig) -> Vec<SectorOutcome> {
    cfg.execution.map_slice(samples, |_, sample| estimate_one(sample, None, cfg))
}

fn estimate_one(sample: &RegressionSample, tornqvist: Option<f64>, cfg: &EstimationConfig) -> SectorOutcome {
    if !sample.is_estimable() {
        return SectorOutcome::Skipped {
            sector: sample.sector,
            n_obs: sample.n_obs(),
            reason: "insufficient-rows".into(),
        };
    }
    let mut estimate = match estimate_sector(sample, cfg.alpha, cfg.errors) {
        Ok(e) => e,
        Err(_) => {
            return SectorOutcome::Skipped {
                sector: sample.sector,
                n_obs: sample.n_obs(),
                reason: "degenerate".into(),
            }
        }
    };
    let mut bootstrap_error = None;
    if let (Some(boot), false) = (cfg.bootstrap, estimate.accepted_null) {
        let boot = BootstrapConfig { seed: sector_seed(boot.seed, sample.sector), ..boot };
        match bootstrap_tfpg(sample, &boot) {
            Ok(b) => estimate.bootstrap = Some(b),
            Err(e) => bootstrap_error = Some(e.to_string()),
        }
    }
    SectorOutcome::Estimated { estimate, tornqvist, bootstrap_error }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryMode {
    /// Null-accepted sectors count as `sigma = 1`.
    SignificantOnly,
    /// Every raw point estimate counts.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticitySummary {
    pub mean_sigma: f64,
    pub n_sectors: usize,
    pub n_significant: usize,
}

pub fn summarize_elasticities(estimates: &[SectorEstimate], mode: SummaryMode) -> ElasticitySummary {
    let n = estimates.len();
    let sum: f64 = estimates
        .iter()
        .map(|e| match mode {
            SummaryMode::SignificantOnly => e.sigma,
            SummaryMode::All => e.raw_sigma(),
        })
        .sum();
    ElasticitySummary {
        mean_sigma: if n == 0 { f64::NAN } else { sum / n as f64 },
        n_sectors: n,
        n_significant: estimates.iter().filter(|e| !e.accepted_null).count(),
    }
}

/// CES share parameters. Under the unit-price normalisation of the current
/// state they coincide with the observed cost shares.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareParameters {
    pub lambda0: DVector<f64>,
    pub lambda: DMatrix<f64>,
}

pub fn calibrate_lambda(table: &IOTable) -> ShareParameters {
    ShareParameters { lambda0: table.a0.clone(), lambda: table.a.clone() }
}

/// Sector subsets of the CES-versus-Törnqvist comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementSubset {
    /// Every slope-significant sector.
    Slope,
    /// Slope significant, intercept not.
    SlopeOnly,
    /// Slope and intercept both significant.
    SlopeAndConstant,
    /// TFPg significant by bootstrap.
    Bootstrap,
}

impl AgreementSubset {
    pub const ALL: [AgreementSubset; 4] = [
        AgreementSubset::Slope,
        AgreementSubset::SlopeOnly,
        AgreementSubset::SlopeAndConstant,
        AgreementSubset::Bootstrap,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AgreementSubset::Slope => "slope",
            AgreementSubset::SlopeOnly => "slope-only",
            AgreementSubset::SlopeAndConstant => "slope-and-constant",
            AgreementSubset::Bootstrap => "bootstrap",
        }
    }

    fn admits(self, e: &SectorEstimate, alpha: f64) -> bool {
        if e.accepted_null {
            return false;
        }
        match self {
            AgreementSubset::Slope => true,
            AgreementSubset::SlopeOnly => !e.intercept_significant(alpha),
            AgreementSubset::SlopeAndConstant => e.intercept_significant(alpha),
            AgreementSubset::Bootstrap => e.bootstrap.is_some_and(|b| b.p_value < alpha),
        }
    }
}

/// One agreement row per subset; `report` is `None` when the subset has
/// fewer than two sectors or a constant series.
#[derive(Debug, Clone)]
pub struct SubsetAgreement {
    pub subset: AgreementSubset,
    pub n: usize,
    pub report: Option<AgreementReport>,
}

pub fn agreement_table(outcomes: &[SectorOutcome], alpha: f64) -> Vec<SubsetAgreement> {
    AgreementSubset::ALL
        .iter()
        .map(|&subset| {
            let (ces, translog): (Vec<f64>, Vec<f64>) = outcomes
                .iter()
                .filter_map(|o| match o {
                    SectorOutcome::Estimated { estimate, tornqvist: Some(t), .. }
                        if subset.admits(estimate, alpha) =>
                    {
                        estimate.tfpg.map(|c| (c, *t))
                    }
                    _ => None,
                })
                .unzip();
            let report = agreement(&translog, &ces).ok().map(|r| r.labelled(subset.label()));
            SubsetAgreement { subset, n: ces.len(), report }
        })
        .collect()
}
