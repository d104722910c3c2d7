//! Input-output tables, deflators, and regression-sample assembly.
//!
//! Factor indices follow the input-output convention: factor `0` is the
//! aggregated primary input (value added) and factors `1..=n` are the
//! commodities. Sector indices are zero-based in code and one-based in
//! human-facing messages and files.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

/// Tolerance on `a0_j + sum_i a_ij = 1`.
pub const SHARE_TOLERANCE: f64 = 1e-9;

/// Minimum number of factor observations for a sector regression.
pub const MIN_OBSERVATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct IOTable {
    pub year: i32,
    pub labels: Vec<String>,
    /// `a[(i, j)]`: cost share of commodity `i` in sector `j`.
    pub a: DMatrix<f64>,
    /// Primary-factor cost share of each sector.
    pub a0: DVector<f64>,
    /// Final demand, may contain negative entries.
    pub d: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { factor: usize, sector: usize },
    NegativeCoefficient { factor: usize, sector: usize, value: f64 },
    ShareExhaustion { sector: usize, sum: f64 },
    NonFiniteDemand { sector: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { factor, sector } => {
                write!(f, "non-finite coefficient at ({factor},{})", sector + 1)
            }
            Violation::NegativeCoefficient { factor, sector, value } => write!(
                f,
                "negative coefficient at ({factor},{}) = {value}",
                sector + 1
            ),
            Violation::ShareExhaustion { sector, sum } => {
                write!(f, "column {} shares sum {sum} \u{2260} 1", sector + 1)
            }
            Violation::NonFiniteDemand { sector } => {
                write!(f, "non-finite final demand at sector {}", sector + 1)
            }
        }
    }
}

impl IOTable {
    pub fn new(
        year: i32,
        labels: Vec<String>,
        a: DMatrix<f64>,
        a0: DVector<f64>,
        d: DVector<f64>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidInput("table has no sectors".into()));
        }
        if a.nrows() != n || a.ncols() != n || a0.len() != n || d.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} labels, A is {}x{}, a0 has {}, d has {}",
                a.nrows(),
                a.ncols(),
                a0.len(),
                d.len()
            )));
        }
        Ok(IOTable { year, labels, a, a0, d })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Share of `factor` (0 = primary) in the unit cost of `sector`.
    pub fn share(&self, factor: usize, sector: usize) -> f64 {
        if factor == 0 {
            self.a0[sector]
        } else {
            self.a[(factor - 1, sector)]
        }
    }

    /// Full share column `(a0_j, a_1j, ..., a_nj)` of a sector.
    pub fn share_column(&self, sector: usize) -> Vec<f64> {
        (0..=self.n()).map(|i| self.share(i, sector)).collect()
    }

    pub fn column_total(&self, sector: usize) -> f64 {
        self.a0[sector] + self.a.column(sector).sum()
    }

    /// Recomputes `a0 = 1 - column sums of A`, for rounded source data.
    pub fn renormalize(&mut self) {
        for j in 0..self.n() {
            self.a0[j] = 1.0 - self.a.column(j).sum();
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_table(self)
    }

    /// Gross output `x = [I - A]^{-1} d`.
    pub fn gross_output(&self) -> Result<DVector<f64>> {
        let n = self.n();
        let m = DMatrix::identity(n, n) - &self.a;
        m.lu()
            .solve(&self.d)
            .ok_or_else(|| Error::SingularSystem("I - A".into()))
    }
}

/// Lists every violated table invariant; empty when the table is valid.
pub fn validate_table(table: &IOTable) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = table.n();
    for j in 0..n {
        for i in 0..=n {
            let v = table.share(i, j);
            if !v.is_finite() {
                out.push(Violation::NonFinite { factor: i, sector: j });
            } else if v < 0.0 {
                out.push(Violation::NegativeCoefficient { factor: i, sector: j, value: v });
            }
        }
        let sum = table.column_total(j);
        if sum.is_finite() && (sum - 1.0).abs() > SHARE_TOLERANCE {
            out.push(Violation::ShareExhaustion { sector: j, sum });
        }
        if !table.d[j].is_finite() {
            out.push(Violation::NonFiniteDemand { sector: j });
        }
    }
    out
}

/// Target-year price indexes; index 0 is the primary factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorVector {
    p: Vec<f64>,
}

impl DeflatorVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonpositiveDeflator { index, value });
        }
        Ok(DeflatorVector { p })
    }

    /// All ones: no price change for `n` sectors.
    pub fn unit(n: usize) -> Self {
        DeflatorVector { p: vec![1.0; n + 1] }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn factor(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// Output deflator of zero-based sector `j`.
    pub fn output(&self, j: usize) -> f64 {
        self.p[j + 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

#[derive(Debug, Clone)]
pub struct LinkedObservation {
    pub table0: IOTable,
    pub table1: IOTable,
    pub deflators: DeflatorVector,
}

impl LinkedObservation {
    pub fn new(table0: IOTable, table1: IOTable, deflators: DeflatorVector) -> Result<Self> {
        let n = table0.n();
        if table1.n() != n || deflators.len() != n + 1 {
            return Err(Error::DimensionMismatch(format!(
                "reference table has {n} sectors, target table {}, deflators {} (expected {})",
                table1.n(),
                deflators.len(),
                n + 1
            )));
        }
        if let Some(j) = (0..n).find(|&j| table0.labels[j] != table1.labels[j]) {
            return Err(Error::InvalidInput(format!(
                "sector {} label differs between periods: {:?} vs {:?}",
                j + 1,
                table0.labels[j],
                table1.labels[j]
            )));
        }
        Ok(LinkedObservation { table0, table1, deflators })
    }

    pub fn n(&self) -> usize {
        self.table0.n()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub factor: usize,
    /// Share growth `ln a1_ij - ln a0_ij`.
    pub y: f64,
    /// Relative price growth `ln p_i - ln p_j`.
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    pub sector: usize,
    pub rows: Vec<SampleRow>,
}

impl RegressionSample {
    pub fn n_obs(&self) -> usize {
        self.rows.len()
    }

    pub fn is_estimable(&self) -> bool {
        self.rows.len() >= MIN_OBSERVATIONS
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.y).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Drop the own-input share `a_jj` from sector `j`'s regression.
    pub exclude_diagonal: bool,
}

/// Assembles one regression sample per sector. Factors enter only when
/// their share is strictly positive in both periods; rows are ordered by
/// factor index. Samples with fewer than [`MIN_OBSERVATIONS`] rows are still
/// returned and report `is_estimable() == false`.
pub fn build_regression_samples(
    obs: &LinkedObservation,
    opts: SampleOptions,
) -> Vec<RegressionSample> {
    let n = obs.n();
    let ln_p: Vec<f64> = obs.deflators.as_slice().iter().map(|p| p.ln()).collect();
    (0..n)
        .map(|j| {
            let ln_pj = ln_p[j + 1];
            let rows = (0..=n)
                .filter(|&i| !(opts.exclude_diagonal && i == j + 1))
                .filter_map(|i| {
                    let s0 = obs.table0.share(i, j);
                    let s1 = obs.table1.share(i, j);
                    (s0 > 0.0 && s1 > 0.0).then(|| SampleRow {
                        factor: i,
                        y: s1.ln() - s0.ln(),
                        x: ln_p[i] - ln_pj,
                    })
                })
                .collect();
            RegressionSample { sector: j, rows }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_sector(a: f64, a0: f64) -> IOTable {
        IOTable::new(
            2000,
            vec!["s".into()],
            DMatrix::from_element(1, 1, a),
            DVector::from_element(1, a0),
            DVector::from_element(1, 1.0),
        )
        .unwrap()
    }

    fn two_sector(a: [[f64; 2]; 2], a0: [f64; 2]) -> IOTable {
        IOTable::new(
            2000,
            vec!["x".into(), "y".into()],
            DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]),
            DVector::from_row_slice(&a0),
            DVector::from_row_slice(&[1.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn valid_one_sector_table_has_no_violations() {
        assert!(one_sector(0.5, 0.5).validate().is_empty());
    }

    #[test]
    fn negative_entry_is_reported() {
        let t = two_sector([[0.3, -0.1], [0.2, 0.5]], [0.5, 0.6]);
        let v = t.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "negative coefficient at (1,2) = -0.1");
    }

    #[test]
    fn short_column_is_reported() {
        let t = one_sector(0.5, 0.48);
        let v = t.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("column 1 shares sum 0.98"));
    }

    #[test]
    fn renormalize_restores_exhaustion() {
        let mut t = one_sector(0.5, 0.48);
        t.renormalize();
        assert!(t.validate().is_empty());
        assert_eq!(t.a0[0], 0.5);
    }

    #[test]
    fn dimension_and_deflator_checks() {
        let t = one_sector(0.5, 0.5);
        assert!(LinkedObservation::new(t.clone(), t.clone(), DeflatorVector::unit(2)).is_err());
        assert!(DeflatorVector::new(vec![1.0, 0.0]).is_err());
        assert!(DeflatorVector::new(vec![1.0, f64::NAN]).is_err());
        let mut other = t.clone();
        other.labels[0] = "z".into();
        assert!(LinkedObservation::new(t, other, DeflatorVector::unit(1)).is_err());
    }

    #[test]
    fn identical_tables_give_zero_rows() {
        let t = two_sector([[0.3, 0.1], [0.2, 0.5]], [0.5, 0.4]);
        let obs = LinkedObservation::new(t.clone(), t, DeflatorVector::unit(2)).unwrap();
        let samples = build_regression_samples(&obs, SampleOptions::default());
        assert_eq!(samples.len(), 2);
        for s in &samples {
            assert_eq!(s.n_obs(), 3);
            assert!(s.rows.iter().all(|r| r.x == 0.0 && r.y == 0.0));
        }
    }

    #[test]
    fn log_growth_rows() {
        // factor 1 in sector 2: 0.2 -> 0.4, p_1 = 2, p_2 = 1
        let t0 = two_sector([[0.3, 0.2], [0.2, 0.3]], [0.5, 0.5]);
        let t1 = two_sector([[0.3, 0.4], [0.2, 0.3]], [0.5, 0.3]);
        let p = DeflatorVector::new(vec![1.0, 2.0, 1.0]).unwrap();
        let obs = LinkedObservation::new(t0, t1, p).unwrap();
        let samples = build_regression_samples(&obs, SampleOptions::default());
        let row = samples[1].rows.iter().find(|r| r.factor == 1).unwrap();
        assert!((row.y - 2f64.ln()).abs() < 1e-15);
        assert!((row.x - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_share_in_either_period_is_excluded() {
        let t0 = two_sector([[0.1, 0.2], [0.2, 0.3]], [0.7, 0.5]);
        let t1 = two_sector([[0.0, 0.2], [0.2, 0.3]], [0.8, 0.5]);
        let obs = LinkedObservation::new(t0.clone(), t1, DeflatorVector::unit(2)).unwrap();
        let samples = build_regression_samples(&obs, SampleOptions::default());
        let factors: Vec<usize> = samples[0].rows.iter().map(|r| r.factor).collect();
        assert_eq!(factors, vec![0, 2]);
        assert!(!samples[0].is_estimable());
        assert!(samples[1].is_estimable());

        let obs = LinkedObservation::new(t0.clone(), t0, DeflatorVector::unit(2)).unwrap();
        let excl = build_regression_samples(&obs, SampleOptions { exclude_diagonal: true });
        let factors: Vec<usize> = excl[1].rows.iter().map(|r| r.factor).collect();
        assert_eq!(factors, vec![0, 1]);
    }
}
