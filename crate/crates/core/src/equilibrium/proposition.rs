//! Sign law of the SCS distribution under uniform elasticities, and a
//! seeded search for counterexamples once elasticities differ by sector.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    projected_shares, solve_prices_fixed_point, value_added_current, value_added_projected,
    Attribution, Economy, SolverOptions,
};
use crate::par::Execution;
use crate::{Error, Result};

/// Slack on the sign test of `v - v'`.
pub const PROPOSITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `z >= 1` elementwise.
    Up,
    /// `z <= 1` elementwise.
    Down,
}

impl Direction {
    pub fn of(z: &[f64]) -> Option<Direction> {
        if z.iter().all(|&v| v >= 1.0) {
            Some(Direction::Up)
        } else if z.iter().all(|&v| v <= 1.0) {
            Some(Direction::Down)
        } else {
            None
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub direction: Direction,
    pub gamma: f64,
    pub holds: bool,
    /// Sector closest to (or furthest past) violating the sign law.
    pub worst_sector: usize,
    pub worst_value: f64,
    /// `pi <= pi^{1-gamma} <= 1` (reversed for `Down`).
    pub price_order_holds: bool,
    pub scs_dist: DVector<f64>,
}

fn direction_and_demand(economy: &Economy, z: &[f64]) -> Result<Direction> {
    super::prices::check_productivity(z, economy.n())?;
    let dir = Direction::of(z)
        .ok_or_else(|| Error::Precondition("productivity change must be one-signed".into()))?;
    if let Some(j) = economy.demand().iter().position(|&d| d < 0.0) {
        return Err(Error::Precondition(format!(
            "sign law needs non-negative final demand, sector {} has {}",
            j + 1,
            economy.demand()[j]
        )));
    }
    Ok(dir)
}

fn scs_distribution(economy: &Economy, z: &[f64], opts: &SolverOptions, attribution: Attribution) -> Result<(DVector<f64>, DVector<f64>)> {
    let sol = solve_prices_fixed_point(economy, z, opts)?;
    let shares = projected_shares(economy, z, &sol.pi);
    let v = value_added_current(economy, attribution)?;
    let v_prime = value_added_projected(economy, &shares, &sol.pi, attribution)?;
    Ok((v - v_prime, sol.pi))
}

/// Evaluates `v - v'` for a uniform `gamma` in `[0, 1]` and a one-signed
/// shock, reporting whether every sector has the predicted sign.
pub fn proposition_check(
    economy: &Economy,
    gamma: f64,
    z: &[f64],
    opts: &SolverOptions,
    attribution: Attribution,
) -> Result<PropositionReport> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Precondition(format!("uniform gamma must lie in [0, 1], got {gamma}")));
    }
    let direction = direction_and_demand(economy, z)?;
    let model = economy.with_uniform_gamma(gamma);
    let (dist, pi) = scs_distribution(&model, z, opts, attribution)?;

    let pick = |best: (usize, f64), (j, &x): (usize, &f64)| match direction {
        Direction::Up if x < best.1 => (j, x),
        Direction::Down if x > best.1 => (j, x),
        _ => best,
    };
    let (worst_sector, worst_value) = dist.iter().enumerate().fold((0, dist[0]), pick);
    let holds = match direction {
        Direction::Up => worst_value >= -PROPOSITION_TOL,
        Direction::Down => worst_value <= PROPOSITION_TOL,
    };
    let eps = 1e-12;
    let price_order_holds = pi.iter().all(|&p| {
        let mid = p.powf(1.0 - gamma);
        match direction {
            Direction::Up => p <= mid + eps && mid <= 1.0 + eps,
            Direction::Down => p + eps >= mid && mid + eps >= 1.0,
        }
    });
    Ok(PropositionReport {
        direction,
        gamma,
        holds,
        worst_sector,
        worst_value,
        price_order_holds,
        scs_dist: dist,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemarkWitness {
    pub trial: usize,
    pub sector: usize,
    /// `v_j - v'_j`, of the sign opposite to the shock direction.
    pub value: f64,
    pub gamma: Vec<f64>,
}

/// Draws `trials` heterogeneous gamma vectors with elasticities in
/// `[0, sigma_max]` (gamma in `[1 - sigma_max, 1]`) and returns, per trial,
/// the worst sector whose SCS has the wrong sign. Trials fan out according
/// to `exec`; each trial seeds its own stream from `seed ^ trial`.
#[allow(clippy::too_many_arguments)]
pub fn remark_search(
    economy: &Economy,
    z: &[f64],
    sigma_max: f64,
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
    attribution: Attribution,
    exec: Execution,
) -> Result<Vec<RemarkWitness>> {
    if !(sigma_max >= 0.0 && sigma_max.is_finite()) {
        return Err(Error::Precondition(format!("sigma_max must be non-negative, got {sigma_max}")));
    }
    let direction = direction_and_demand(economy, z)?;
    let n = economy.n();
    let found = exec.map_range(trials, |trial| -> Result<Option<RemarkWitness>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial as u64);
        let gamma: Vec<f64> = (0..n).map(|_| 1.0 - rng.random_range(0.0..=sigma_max)).collect();
        let model = economy.with_gamma(gamma.clone())?;
        let (dist, _) = scs_distribution(&model, z, opts, attribution)?;
        let signed = |x: f64| match direction {
            Direction::Up => x,
            Direction::Down => -x,
        };
        let worst = dist
            .iter()
            .enumerate()
            .min_by(|a, b| signed(*a.1).total_cmp(&signed(*b.1)))
            .map(|(j, &x)| (j, x));
        Ok(worst
            .filter(|&(_, x)| signed(x) < -PROPOSITION_TOL)
            .map(|(sector, value)| RemarkWitness { trial, sector, value, gamma }))
    });
    found.into_iter().filter_map(|r| r.transpose()).collect()
}
