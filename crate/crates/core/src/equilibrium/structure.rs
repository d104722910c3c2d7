//! Projected cost structure, value added and social cost saved (SCS).

use nalgebra::{DMatrix, DVector};

use super::Economy;
use crate::{Error, Result};

/// How value added is assigned to sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Attribution {
    /// Value added generated in each producing sector: `<a0> [I - A]^{-1} d`.
    #[default]
    Producing,
    /// Value added embodied in each sector's final demand:
    /// `a0 [I - A]^{-1} <d>`. Under share exhaustion `a0 [I - A]^{-1} = 1`,
    /// so this reduces to `v = d` and `v' = pi * d`.
    FinalDemand,
}

impl Attribution {
    pub fn label(self) -> &'static str {
        match self {
            Attribution::Producing => "producing",
            Attribution::FinalDemand => "final-demand",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedShares {
    pub b0: DVector<f64>,
    pub b: DMatrix<f64>,
}

impl ProjectedShares {
    pub fn column_total(&self, j: usize) -> f64 {
        self.b0[j] + self.b.column(j).sum()
    }

    /// Largest `|column sum - 1|`.
    pub fn max_closure_gap(&self) -> f64 {
        (0..self.b0.len())
            .map(|j| (self.column_total(j) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `b_ij = a_ij (z_j pi_j / pi_i)^{-gamma_j}` with `pi_0 = 1`.
pub fn projected_shares(economy: &Economy, z: &[f64], pi: &DVector<f64>) -> ProjectedShares {
    let n = economy.n();
    let mut b0 = economy.lambda0().clone();
    let mut b = economy.lambda_matrix().clone();
    let ln_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    for j in 0..n {
        if economy.is_cobb_douglas(j) {
            continue;
        }
        let g = economy.gamma()[j];
        let own = z[j].ln() + ln_pi[j];
        b0[j] *= (-g * own).exp();
        for i in 0..n {
            if b[(i, j)] != 0.0 {
                b[(i, j)] *= (-g * (own - ln_pi[i])).exp();
            }
        }
    }
    ProjectedShares { b0, b }
}

fn solve(m: DMatrix<f64>, rhs: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    m.lu().solve(rhs).ok_or_else(|| Error::SingularSystem(what.into()))
}

/// Value added for a share structure `(s0, S)` and delivered vector `q`
/// (in value terms) under the chosen attribution.
fn value_added(
    s0: &DVector<f64>,
    s: &DMatrix<f64>,
    weights: &DVector<f64>,
    d: &DVector<f64>,
    attribution: Attribution,
    what: &str,
) -> Result<DVector<f64>> {
    let n = s0.len();
    let m = DMatrix::identity(n, n) - s;
    match attribution {
        Attribution::Producing => {
            let wd = weights.component_mul(d);
            Ok(s0.component_mul(&solve(m, &wd, what)?))
        }
        Attribution::FinalDemand => {
            let row = solve(m.transpose(), s0, what)?;
            Ok(row.component_mul(weights).component_mul(d))
        }
    }
}

/// Current value added from the observed shares.
pub fn value_added_current(economy: &Economy, attribution: Attribution) -> Result<DVector<f64>> {
    let ones = DVector::from_element(economy.n(), 1.0);
    value_added(
        economy.lambda0(),
        economy.lambda_matrix(),
        &ones,
        economy.demand(),
        attribution,
        "I - A",
    )
}

/// Projected value added `b0 [I - B]^{-1} <pi> <d>` from projected shares.
pub fn value_added_projected(
    economy: &Economy,
    shares: &ProjectedShares,
    pi: &DVector<f64>,
    attribution: Attribution,
) -> Result<DVector<f64>> {
    value_added(&shares.b0, &shares.b, pi, economy.demand(), attribution, "I - B")
}

/// Projected value added for a uniform exponent without forming `B`:
/// `a0 [<z^gamma> - A]^{-1} <pi^{1-gamma}> <d>`. The matching price
/// vector must be supplied (Cobb-Douglas prices for `gamma = 0`).
pub fn value_added_uniform(
    economy: &Economy,
    z: &[f64],
    pi: &DVector<f64>,
    gamma: f64,
    attribution: Attribution,
) -> Result<DVector<f64>> {
    let n = economy.n();
    let mut zg = DMatrix::identity(n, n);
    for j in 0..n {
        zg[(j, j)] = z[j].powf(gamma) - 1.0;
    }
    // value_added forms I - S, so pass S = A - (<z^gamma> - I)
    let s = economy.lambda_matrix() - zg;
    let weights = pi.map(|p| p.powf(1.0 - gamma));
    value_added(economy.lambda0(), &s, &weights, economy.demand(), attribution, "<z^gamma> - A")
}

/// Tolerance of the aggregate identity `(1 - pi) d = sum(v - v')`.
pub const SCS_REL_TOL: f64 = 1e-6;
pub const SCS_ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Scs {
    pub total: f64,
    pub distribution: DVector<f64>,
    /// `|(1 - pi) d - sum(v - v')|`.
    pub identity_gap: f64,
}

/// SCS without enforcing the aggregate identity.
pub fn scs_unchecked(d: &DVector<f64>, pi: &DVector<f64>, v: &DVector<f64>, v_prime: &DVector<f64>) -> Scs {
    let total: f64 = pi.iter().zip(d.iter()).map(|(p, d)| (1.0 - p) * d).sum();
    let distribution = v - v_prime;
    let identity_gap = (distribution.sum() - total).abs();
    Scs { total, distribution, identity_gap }
}

/// SCS total `(1 - pi) d` and distribution `v - v'`, failing when the two
/// disagree beyond tolerance (which signals an unconverged price vector).
pub fn scs(d: &DVector<f64>, pi: &DVector<f64>, v: &DVector<f64>, v_prime: &DVector<f64>) -> Result<Scs> {
    let s = scs_unchecked(d, pi, v, v_prime);
    if s.identity_gap > SCS_REL_TOL * s.total.abs() + SCS_ABS_TOL {
        return Err(Error::ConsistencyFailure { total: s.total, distributed: s.distribution.sum() });
    }
    Ok(s)
}

/// Non-excess population kurtosis `m4 / m2^2`.
pub fn kurtosis(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("kurtosis needs at least two values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let d2 = (x - mean) * (x - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        return Err(Error::ZeroVariance("kurtosis input"));
    }
    Ok(m4 / (m2 * m2))
}
