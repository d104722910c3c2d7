//! Simple linear regression with intercept.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::table::{RegressionSample, MIN_OBSERVATIONS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdErrors {
    /// Homoskedastic OLS errors.
    #[default]
    Classical,
    /// White sandwich errors with the HC1 small-sample factor `n / (n - 2)`.
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    pub p_slope: f64,
    pub p_intercept: f64,
    pub n_obs: usize,
    pub rss: f64,
}

pub fn ols_fit(sample: &RegressionSample) -> Result<OlsFit> {
    ols_fit_with(&sample.xs(), &sample.ys(), StdErrors::Classical).map_err(|e| match e {
        Error::DegenerateSample { reason, .. } => Error::DegenerateSample {
            sector: sample.sector,
            reason,
        },
        other => other,
    })
}

/// Centered sums of a paired sample.
struct Moments {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    sxy: f64,
}

fn moments(xs: &[f64], ys: &[f64]) -> std::result::Result<Moments, String> {
    if xs.len() != ys.len() {
        return Err(format!("{} x values but {} y values", xs.len(), ys.len()));
    }
    if xs.len() < MIN_OBSERVATIONS {
        return Err(format!("{} observations, need at least {MIN_OBSERVATIONS}", xs.len()));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut max_abs = 0.0f64;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
        max_abs = max_abs.max(x.abs());
    }
    // variance below rounding noise of the data counts as zero
    let floor = n * (4.0 * f64::EPSILON * max_abs).powi(2);
    if !(sxx > floor) {
        return Err("regressor has zero variance".into());
    }
    Ok(Moments { n, mean_x, mean_y, sxx, sxy })
}

/// Slope and intercept only; `None` when the regressor is degenerate.
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let m = moments(xs, ys).ok()?;
    let slope = m.sxy / m.sxx;
    Some((slope, m.mean_y - slope * m.mean_x))
}

fn two_sided_p(coef: f64, se: f64, dist: &StudentsT) -> f64 {
    if se > 0.0 {
        2.0 * dist.sf((coef / se).abs())
    } else if coef == 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn ols_fit_with(xs: &[f64], ys: &[f64], errors: StdErrors) -> Result<OlsFit> {
    let m = moments(xs, ys).map_err(|reason| Error::DegenerateSample { sector: 0, reason })?;
    let slope = m.sxy / m.sxx;
    let intercept = m.mean_y - slope * m.mean_x;
    let resid: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| y - intercept - slope * x)
        .collect();
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let df = m.n - 2.0;

    let (var_slope, var_intercept) = match errors {
        StdErrors::Classical => {
            let s2 = rss / df;
            (s2 / m.sxx, s2 * (1.0 / m.n + m.mean_x * m.mean_x / m.sxx))
        }
        StdErrors::Robust => {
            // (X'X)^{-1} X' diag(e^2) X (X'X)^{-1} for X = [1, x]
            let sx: f64 = xs.iter().sum();
            let sxx_raw: f64 = xs.iter().map(|x| x * x).sum();
            let det = m.n * sxx_raw - sx * sx;
            let inv = [[sxx_raw / det, -sx / det], [-sx / det, m.n / det]];
            let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
            for (&x, &e) in xs.iter().zip(&resid) {
                let e2 = e * e;
                m00 += e2;
                m01 += x * e2;
                m11 += x * x * e2;
            }
            let meat = [[m00, m01], [m01, m11]];
            let mut cov = [[0.0; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    let mut acc = 0.0;
                    for k in 0..2 {
                        for l in 0..2 {
                            acc += inv[r][k] * meat[k][l] * inv[l][c];
                        }
                    }
                    cov[r][c] = acc * m.n / df;
                }
            }
            (cov[1][1], cov[0][0])
        }
    };
    let se_slope = var_slope.max(0.0).sqrt();
    let se_intercept = var_intercept.max(0.0).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    Ok(OlsFit {
        slope,
        intercept,
        se_slope,
        se_intercept,
        p_slope: two_sided_p(slope, se_slope, &dist),
        p_intercept: two_sided_p(intercept, se_intercept, &dist),
        n_obs: xs.len(),
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_line() {
        let xs = [-1.0, 0.0, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.1 + 0.5 * x).collect();
        let fit = ols_fit_with(&xs, &ys, StdErrors::Classical).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-15);
        assert!((fit.intercept + 0.1).abs() < 1e-15);
        assert!(fit.rss < 1e-30);
        assert!(fit.p_slope < 1e-6);
    }

    #[test]
    fn constant_regressor_is_degenerate() {
        let xs = [0.3; 5];
        let ys = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            ols_fit_with(&xs, &ys, StdErrors::Classical),
            Err(Error::DegenerateSample { .. })
        ));
        assert!(ols_fit_with(&[1.0, 2.0], &[1.0, 2.0], StdErrors::Classical).is_err());
    }

    #[test]
    fn matches_normal_equations() {
        // oracle: solve (X'X) b = X'y directly with a dense solver
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let xs: Vec<f64> = (0..20).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 - 0.7 * x + rng.random_range(-0.5..0.5)).collect();
        let x = DMatrix::from_fn(20, 2, |r, c| if c == 0 { 1.0 } else { xs[r] });
        let y = DVector::from_column_slice(&ys);
        let xtx = x.transpose() * &x;
        let b = xtx.clone().lu().solve(&(x.transpose() * &y)).unwrap();
        let resid = &y - &x * &b;
        let s2 = resid.norm_squared() / 18.0;
        let cov = xtx.try_inverse().unwrap() * s2;

        let fit = ols_fit_with(&xs, &ys, StdErrors::Classical).unwrap();
        assert!((fit.intercept - b[0]).abs() < 1e-12);
        assert!((fit.slope - b[1]).abs() < 1e-12);
        assert!((fit.se_intercept - cov[(0, 0)].sqrt()).abs() < 1e-12);
        assert!((fit.se_slope - cov[(1, 1)].sqrt()).abs() < 1e-12);
    }

    #[test]
    fn robust_errors_match_sandwich_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x + x.abs() * rng.random_range(-1.0..1.0)).collect();
        let x = DMatrix::from_fn(30, 2, |r, c| if c == 0 { 1.0 } else { xs[r] });
        let y = DVector::from_column_slice(&ys);
        let bread = (x.transpose() * &x).try_inverse().unwrap();
        let b = &bread * x.transpose() * &y;
        let e = &y - &x * &b;
        let omega = DMatrix::from_diagonal(&e.map(|v| v * v));
        let cov = &bread * x.transpose() * omega * &x * &bread * (30.0 / 28.0);
        let fit = ols_fit_with(&xs, &ys, StdErrors::Robust).unwrap();
        assert!((fit.se_slope - cov[(1, 1)].sqrt()).abs() < 1e-12);
        assert!((fit.se_intercept - cov[(0, 0)].sqrt()).abs() < 1e-12);
    }

    #[test]
    fn p_value_uses_t_distribution() {
        // t = 2 on 3 df, two-sided: 0.1393259685588431
        let dist = StudentsT::new(0.0, 1.0, 3.0).unwrap();
        let p = two_sided_p(2.0, 1.0, &dist);
        assert!((p - 0.1393259685588431).abs() < 1e-10);
    }
}
