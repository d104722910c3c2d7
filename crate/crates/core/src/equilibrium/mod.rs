//! Multi-sector general-equilibrium price model and welfare accounting.

mod economy;
mod prices;
mod proposition;
mod structure;

use nalgebra::DVector;

pub use economy::{gamma_from_estimates, Economy, GammaMode, ZERO_GAMMA};
pub use prices::{
    equilibrium_residual, solve_prices_closed_form, solve_prices_cobb_douglas,
    solve_prices_fixed_point, solve_prices_leontief, FixedPointSolution, SolverOptions,
};
pub use proposition::{
    proposition_check, remark_search, Direction, PropositionReport, RemarkWitness,
    PROPOSITION_TOL,
};
pub use structure::{
    kurtosis, projected_shares, scs, scs_unchecked, value_added_current, value_added_projected,
    value_added_uniform, Attribution, ProjectedShares, Scs, SCS_ABS_TOL, SCS_REL_TOL,
};

use crate::Result;

/// Technology assumption and price solver for one shock run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceMethod {
    /// `gamma = 1` everywhere, matrix solution.
    Leontief,
    /// `gamma = 0` everywhere, log-linear solution.
    CobbDouglas,
    /// The economy's own gamma vector, fixed-point iteration.
    Ces,
    /// The economy's own gamma vector, matrix formula evaluated as written.
    CesPaperClosedForm,
}

impl PriceMethod {
    pub fn label(self) -> &'static str {
        match self {
            PriceMethod::Leontief => "leontief",
            PriceMethod::CobbDouglas => "cobb-douglas",
            PriceMethod::Ces => "ces",
            PriceMethod::CesPaperClosedForm => "ces-paper-closed-form",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShockResult {
    pub method: PriceMethod,
    pub z: Vec<f64>,
    pub pi: DVector<f64>,
    pub shares: ProjectedShares,
    pub v: DVector<f64>,
    pub v_prime: DVector<f64>,
    pub scs_total: f64,
    pub scs_dist: DVector<f64>,
    /// `None` when the distribution is numerically flat.
    pub kurtosis: Option<f64>,
    pub iterations: usize,
    /// Largest `|T(pi) - pi|` of the unit-cost map at the returned prices.
    pub residual: f64,
    pub identity_gap: f64,
}

/// Solves prices for `z`, projects the cost structure and accounts SCS.
///
/// The aggregate SCS identity is enforced for every method except
/// [`PriceMethod::CesPaperClosedForm`], whose prices are not an equilibrium
/// under heterogeneous gamma; there the gap is only reported.
pub fn solve_shock(
    economy: &Economy,
    z: &[f64],
    method: PriceMethod,
    opts: &SolverOptions,
    attribution: Attribution,
) -> Result<ShockResult> {
    let n = economy.n();
    let (model, pi, iterations) = match method {
        PriceMethod::Leontief => {
            let m = economy.with_uniform_gamma(1.0);
            let pi = solve_prices_leontief(&m, z)?;
            (m, pi, 0)
        }
        PriceMethod::CobbDouglas => {
            let m = economy.with_uniform_gamma(0.0);
            let pi = solve_prices_cobb_douglas(&m, z)?;
            (m, pi, 0)
        }
        PriceMethod::Ces => {
            let sol = solve_prices_fixed_point(economy, z, opts)?;
            (economy.clone(), sol.pi, sol.iterations)
        }
        PriceMethod::CesPaperClosedForm => {
            let pi = solve_prices_closed_form(economy, z)?;
            (economy.clone(), pi, 0)
        }
    };
    let residual = equilibrium_residual(&model, z, &pi)?;
    let shares = projected_shares(&model, z, &pi);
    let v = value_added_current(&model, attribution)?;
    let v_prime = value_added_projected(&model, &shares, &pi, attribution)?;
    let s = match method {
        PriceMethod::CesPaperClosedForm => scs_unchecked(model.demand(), &pi, &v, &v_prime),
        _ => scs(model.demand(), &pi, &v, &v_prime)?,
    };
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let flat = s.distribution.iter().all(|x| x.abs() <= 1e-12 * scale);
    let kurtosis = if flat || n < 2 {
        None
    } else {
        kurtosis(s.distribution.as_slice()).ok()
    };
    Ok(ShockResult {
        method,
        z: z.to_vec(),
        pi,
        shares,
        v,
        v_prime,
        scs_total: s.total,
        scs_dist: s.distribution,
        kurtosis,
        iterations,
        residual,
        identity_gap: s.identity_gap,
    })
}

/// Productivity vector with `factor` applied to the listed sectors.
pub fn productivity_shock(n: usize, shocks: &[(usize, f64)]) -> Vec<f64> {
    let mut z = vec![1.0; n];
    for &(j, f) in shocks {
        z[j] *= f;
    }
    z
}
