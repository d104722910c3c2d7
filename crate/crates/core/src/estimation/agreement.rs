//! Pearson correlation and Lin's concordance correlation coefficient.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentConvention {
    /// `1/n` moments.
    #[default]
    Population,
    /// `1/(n-1)` moments; only the CCC changes.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub subset: String,
    pub n: usize,
    pub pearson: f64,
    pub lin_ccc: f64,
}

pub fn agreement(x: &[f64], y: &[f64]) -> Result<AgreementReport> {
    agreement_with(x, y, MomentConvention::Population)
}

pub fn agreement_with(x: &[f64], y: &[f64], moments: MomentConvention) -> Result<AgreementReport> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput("agreement needs at least two pairs".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first series"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second series"));
    }
    let div = match moments {
        MomentConvention::Population => n,
        MomentConvention::Sample => n - 1.0,
    };
    let pearson = sxy / (sxx * syy).sqrt();
    let lin_ccc = 2.0 * sxy / div / (sxx / div + syy / div + (mx - my).powi(2));
    Ok(AgreementReport { subset: String::new(), n: x.len(), pearson, lin_ccc })
}

impl AgreementReport {
    pub fn labelled(mut self, subset: impl Into<String>) -> Self {
        self.subset = subset.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity() {
        let x = [0.1, -0.4, 0.9, 0.3];
        let r = agreement(&x, &x).unwrap();
        assert!((r.pearson - 1.0).abs() < 1e-15);
        assert!((r.lin_ccc - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_pair() {
        let r = agreement(&[0.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!((r.pearson - 1.0).abs() < 1e-12);
        assert!((r.lin_ccc - 1.0 / 3.0).abs() < 1e-12);
        // sample moments: 2 * 0.5 / (0.5 + 0.5 + 1)
        let s = agreement_with(&[0.0, 1.0], &[1.0, 2.0], MomentConvention::Sample).unwrap();
        assert!((s.lin_ccc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mirrored() {
        let x = [-1.0, 0.0, 1.0];
        let y = [1.0, 0.0, -1.0];
        let r = agreement(&x, &y).unwrap();
        assert!((r.pearson + 1.0).abs() < 1e-15);
        assert!((r.lin_ccc + 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(agreement(&[1.0, 2.0], &[1.0]).is_err());
        assert!(matches!(agreement(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ZeroVariance(_))));
    }

    proptest! {
        #[test]
        fn ccc_never_exceeds_pearson(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..40)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = agreement(&x, &y) {
                prop_assert!(r.lin_ccc.abs() <= r.pearson.abs() + 1e-12);
                prop_assert!(r.pearson.abs() <= 1.0 + 1e-12);
            }
        }
    }
}
