//! Projected equilibrium prices under an exogenous productivity vector `z`.
//!
//! Prices solve `pi_j = z_j^{-1} (sum_i a_ij pi_i^{gamma_j})^{1/gamma_j}` with
//! the primary factor as numeraire (`pi_0 = 1`). Sectors with zero gamma use
//! the log-linear limit `ln pi_j = -ln z_j + sum_i a_ij ln pi_i`.

use nalgebra::{DMatrix, DVector};

use super::Economy;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target accuracy of the prices, checked against the last change and
    /// its extrapolation.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial relaxation weight on the new iterate.
    pub damping: f64,
    /// Drop the weight to 0.5 if the change grows three iterations running.
    pub adaptive_damping: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, max_iter: 10_000, damping: 1.0, adaptive_damping: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub pi: DVector<f64>,
    pub iterations: usize,
    /// Largest price change in the final iteration.
    pub residual: f64,
}

pub(crate) fn check_productivity(z: &[f64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::DimensionMismatch(format!("{n} sectors but {} productivity factors", z.len())));
    }
    if let Some(j) = z.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Precondition(format!(
            "productivity of sector {} must be positive, got {}",
            j + 1,
            z[j]
        )));
    }
    Ok(())
}

/// One application of the unit-cost map in log space.
fn unit_cost_map(economy: &Economy, ln_z: &[f64], excess: &[f64], ln_pi: &[f64], out: &mut [f64]) {
    let n = economy.n();
    let a = economy.lambda_matrix();
    for j in 0..n {
        let col = a.column(j);
        if economy.is_cobb_douglas(j) {
            let s: f64 = (0..n).map(|i| col[i] * ln_pi[i]).sum();
            out[j] = -ln_z[j] + s;
        } else {
            let g = economy.gamma()[j];
            // sum_i a_ij pi_i^g - 1 = (sum_i a_ij - 1) + sum_i a_ij (pi_i^g - 1);
            // the primary factor contributes nothing to the second sum
            let mut s = excess[j];
            for i in 0..n {
                let c = col[i];
                if c != 0.0 {
                    s += c * (g * ln_pi[i]).exp_m1();
                }
            }
            out[j] = -ln_z[j] + s.ln_1p() / g;
        }
    }
}

fn share_excess(economy: &Economy) -> Vec<f64> {
    (0..economy.n())
        .map(|j| economy.lambda0()[j] + economy.lambda_matrix().column(j).sum() - 1.0)
        .collect()
}

/// Plain (optionally damped) iteration of the unit-cost map from `pi = 1`.
/// Convergence needs both the last price change and its geometric
/// extrapolation to fall below `tol`.
pub fn solve_prices_fixed_point(economy: &Economy, z: &[f64], opts: &SolverOptions) -> Result<FixedPointSolution> {
    let n = economy.n();
    check_productivity(z, n)?;
    let ln_z: Vec<f64> = z.iter().map(|v| v.ln()).collect();
    let excess = share_excess(economy);
    let mut ln_pi = vec![0.0; n];
    let mut pi = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut omega = opts.damping;
    let mut prev_change = f64::INFINITY;
    let mut growing = 0;

    for iter in 1..=opts.max_iter {
        unit_cost_map(economy, &ln_z, &excess, &ln_pi, &mut next);
        let mut change = 0.0f64;
        for j in 0..n {
            let l = (1.0 - omega) * ln_pi[j] + omega * next[j];
            let p = l.exp();
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::NonpositivePrice { sector: j });
            }
            change = change.max((p - pi[j]).abs());
            ln_pi[j] = l;
            pi[j] = p;
        }
        // the last step understates the remaining error by 1 / (1 - rate);
        // stop once the extrapolated error is also below tol, or at rounding level
        let rate = change / prev_change;
        let remaining = if rate < 1.0 { change * rate / (1.0 - rate) } else { change };
        let floor = 8.0 * f64::EPSILON * pi.iter().fold(1.0f64, |m, p| m.max(*p));
        if change < opts.tol && (remaining < opts.tol || change <= floor) {
            return Ok(FixedPointSolution { pi: DVector::from_vec(pi), iterations: iter, residual: change });
        }
        if opts.adaptive_damping && omega > 0.5 {
            growing = if change > prev_change { growing + 1 } else { 0 };
            if growing >= 3 {
                omega = 0.5;
            }
        }
        prev_change = change;
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual: prev_change })
}

/// Largest `|T(pi) - pi|` of the unit-cost map at a candidate price vector.
pub fn equilibrium_residual(economy: &Economy, z: &[f64], pi: &DVector<f64>) -> Result<f64> {
    check_productivity(z, economy.n())?;
    let ln_z: Vec<f64> = z.iter().map(|v| v.ln()).collect();
    let ln_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let mut out = vec![0.0; economy.n()];
    unit_cost_map(economy, &ln_z, &share_excess(economy), &ln_pi, &mut out);
    Ok(out
        .iter()
        .zip(pi.iter())
        .map(|(l, p)| (l.exp() - p).abs())
        .fold(0.0, f64::max))
}

/// Solves the row system `u M = rhs` after confirming `M` is a non-singular
/// M-matrix (non-negative inverse): `M` is a Z-matrix, and such a matrix has
/// a non-negative inverse iff `M^{-1} 1 > 0`.
fn solve_m_matrix_row(m: DMatrix<f64>, rhs: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let n = m.nrows();
    let probe = m
        .clone()
        .lu()
        .solve(&DVector::from_element(n, 1.0))
        .ok_or_else(|| Error::SingularSystem(what.into()))?;
    if let Some(j) = probe.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::SingularSystem(format!(
            "{what} is not a non-singular M-matrix (probe fails at sector {})",
            j + 1
        )));
    }
    m.transpose()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::SingularSystem(what.into()))
}

/// `a0 [<z^gamma> - A]^{-1}` as a column vector.
fn scaled_leontief_row(economy: &Economy, z: &[f64], gamma: &[f64]) -> Result<DVector<f64>> {
    let n = economy.n();
    let mut m = -economy.lambda_matrix().clone();
    for j in 0..n {
        m[(j, j)] += z[j].powf(gamma[j]);
    }
    solve_m_matrix_row(m, economy.lambda0(), "<z^gamma> - A")
}

/// Matrix solution `pi = (a0 [<z^gamma> - A]^{-1})^{1/gamma}`, raised
/// elementwise. This is the exact equilibrium only for uniform gamma; with
/// heterogeneous gamma it is the matrix formula evaluated as written.
pub fn solve_prices_closed_form(economy: &Economy, z: &[f64]) -> Result<DVector<f64>> {
    check_productivity(z, economy.n())?;
    if let Some(sector) = (0..economy.n()).find(|&j| economy.is_cobb_douglas(j)) {
        return Err(Error::ZeroGamma { sector });
    }
    let u = scaled_leontief_row(economy, z, economy.gamma())?;
    u.iter()
        .zip(economy.gamma())
        .enumerate()
        .map(|(j, (&u, &g))| {
            if u > 0.0 {
                Ok(u.powf(1.0 / g))
            } else {
                Err(Error::NonpositivePrice { sector: j })
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(DVector::from_vec)
}

/// Leontief prices `pi = a0 [<z> - A]^{-1}`, whatever the economy's gamma.
pub fn solve_prices_leontief(economy: &Economy, z: &[f64]) -> Result<DVector<f64>> {
    check_productivity(z, economy.n())?;
    scaled_leontief_row(economy, z, &vec![1.0; economy.n()])
}

/// Cobb-Douglas prices `pi = exp(-(ln z) [I - A]^{-1})`, whatever the
/// economy's gamma.
pub fn solve_prices_cobb_douglas(economy: &Economy, z: &[f64]) -> Result<DVector<f64>> {
    let n = economy.n();
    check_productivity(z, n)?;
    let m = DMatrix::identity(n, n) - economy.lambda_matrix();
    let rhs = DVector::from_iterator(n, z.iter().map(|v| -v.ln()));
    let ln_pi = solve_m_matrix_row(m, &rhs, "I - A")?;
    Ok(ln_pi.map(f64::exp))
}
