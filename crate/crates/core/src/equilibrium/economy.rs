use nalgebra::{DMatrix, DVector};

use crate::estimation::{calibrate_lambda, SectorEstimate, ShareParameters};
use crate::table::IOTable;
use crate::{Error, Result};

/// `|gamma| below this is handled by the Cobb-Douglas (log-linear) limit.
pub const ZERO_GAMMA: f64 = 1e-9;

/// A calibrated production system with current prices normalised to one.
#[derive(Debug, Clone)]
pub struct Economy {
    table: IOTable,
    params: ShareParameters,
    gamma: Vec<f64>,
}

impl Economy {
    pub fn new(table: IOTable, gamma: Vec<f64>) -> Result<Self> {
        let violations = table.validate();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidInput(format!(
                "{} table violation(s), first: {v}",
                violations.len()
            )));
        }
        if gamma.len() != table.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} sectors but {} gamma values",
                table.n(),
                gamma.len()
            )));
        }
        if let Some(j) = gamma.iter().position(|g| !g.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma of sector {} is not finite", j + 1)));
        }
        let params = calibrate_lambda(&table);
        Ok(Economy { table, params, gamma })
    }

    pub fn uniform(table: IOTable, gamma: f64) -> Result<Self> {
        let n = table.n();
        Economy::new(table, vec![gamma; n])
    }

    /// Same technology with a different gamma vector.
    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} sectors but {} gamma values",
                self.n(),
                gamma.len()
            )));
        }
        Ok(Economy { table: self.table.clone(), params: self.params.clone(), gamma })
    }

    pub fn with_uniform_gamma(&self, gamma: f64) -> Self {
        Economy { table: self.table.clone(), params: self.params.clone(), gamma: vec![gamma; self.n()] }
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn table(&self) -> &IOTable {
        &self.table
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn is_cobb_douglas(&self, j: usize) -> bool {
        self.gamma[j].abs() < ZERO_GAMMA
    }

    /// `Some(gamma)` when every sector shares one exponent.
    pub fn uniform_gamma(&self) -> Option<f64> {
        let g = self.gamma[0];
        self.gamma.iter().all(|&x| x == g).then_some(g)
    }

    /// Share parameter of `factor` (0 = primary) in `sector`.
    pub fn lambda(&self, factor: usize, sector: usize) -> f64 {
        if factor == 0 {
            self.params.lambda0[sector]
        } else {
            self.params.lambda[(factor - 1, sector)]
        }
    }

    pub fn lambda_matrix(&self) -> &DMatrix<f64> {
        &self.params.lambda
    }

    pub fn lambda0(&self) -> &DVector<f64> {
        &self.params.lambda0
    }

    pub fn demand(&self) -> &DVector<f64> {
        &self.table.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Significant estimates only; null-accepted or missing sectors get 0.
    SignificantOnly,
    /// Every raw point estimate; missing sectors get 0.
    AllEstimates,
}

/// Builds a gamma vector of length `n` from per-sector estimates.
pub fn gamma_from_estimates(n: usize, estimates: &[SectorEstimate], mode: GammaMode) -> Vec<f64> {
    let mut gamma = vec![0.0; n];
    for e in estimates.iter().filter(|e| e.sector < n) {
        gamma[e.sector] = match mode {
            GammaMode::SignificantOnly => e.gamma,
            GammaMode::AllEstimates => e.slope,
        };
    }
    gamma
}
