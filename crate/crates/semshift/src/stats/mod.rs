//! Statistical machinery: Pearson correlation with Student-t p-values,
//! ordinary least squares with influence diagnostics, principal component
//! projection, and kernel density estimation.
//!
//! p-values everywhere are two-tailed. Distribution CDFs come from `statrs`;
//! the test suites check them against direct numeric integration of the
//! densities, so the dependency stays behind a verified contract.

mod kde;
mod ols;
mod pca;

pub use kde::{kde_1d, scott_bandwidth, DensityCurve};
pub use ols::{
    ols_fit, regression_band, simple_regression, CoefficientEstimate, DesignSpec, Predictor,
    RegressionBand, RegressionResult, Table, Transform,
};
pub use pca::{pca_project, PcaProjection};

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// A correlation coefficient with its two-tailed p-value and sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

pub(crate) fn t_two_tailed_p(t: f64, df: usize) -> f64 {
    debug_assert!(df >= 1);
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

pub(crate) fn t_quantile(p: f64, df: usize) -> f64 {
    debug_assert!(df >= 1 && p > 0.0 && p < 1.0);
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(p)
}

/// Pearson correlation between two equal-length samples of at least three
/// finite values each.
///
/// The p-value comes from `t = rho * sqrt((n-2) / (1 - rho^2))` against a
/// Student-t distribution with `n - 2` degrees of freedom; `|rho| = 1` maps
/// to a p-value of exactly zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "correlation inputs have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            got: n,
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite value in correlation input".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("first correlation input has zero variance".into()));
    }
    if syy == 0.0 {
        return Err(Error::Degenerate("second correlation input has zero variance".into()));
    }
    // Bitwise-identical samples correlate perfectly by identity; computing
    // the quotient instead would land an ulp away from 1.
    let rho = if x == y {
        1.0
    } else {
        (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
    };
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * ((n as f64 - 2.0) / (1.0 - rho * rho)).sqrt();
        t_two_tailed_p(t, n - 2)
    };
    Ok(CorrelationResult { rho, p, n })
}

/// Conventional significance marker for a two-tailed p-value.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "n.s."
    }
}
