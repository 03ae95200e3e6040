//! Ordinary least squares with an always-present intercept, rank checking,
//! and per-row influence diagnostics.
//!
//! The solve path is QR-based: a column-pivoted factorization establishes
//! the numerical rank (tolerance `1e-10` relative to the largest design
//! column norm), then a plain Householder QR of the full-rank design
//! produces coefficients, `(X^T X)^{-1}`, and leverages. Rank-deficient
//! designs are rejected with the dependent columns named rather than
//! silently dropped.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::stats::{t_quantile, t_two_tailed_p};

const RANK_TOLERANCE: f64 = 1e-10;

/// Column transform applied while assembling the design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Log10,
}

impl Transform {
    fn apply(self, column: &str, value: f64) -> Result<f64> {
        match self {
            Transform::Identity => Ok(value),
            Transform::Log10 => {
                if value > 0.0 && value.is_finite() {
                    Ok(value.log10())
                } else {
                    Err(Error::Transform {
                        transform: "log10",
                        column: column.to_string(),
                        value,
                    })
                }
            }
        }
    }
}

/// One predictor: a table column plus its transform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predictor {
    pub column: String,
    pub transform: Transform,
}

impl Predictor {
    pub fn raw(column: impl Into<String>) -> Self {
        Predictor {
            column: column.into(),
            transform: Transform::Identity,
        }
    }

    pub fn log10(column: impl Into<String>) -> Self {
        Predictor {
            column: column.into(),
            transform: Transform::Log10,
        }
    }

    /// Display name carrying the transform, e.g. `log10(freq)`.
    pub fn label(&self) -> String {
        match self.transform {
            Transform::Identity => self.column.clone(),
            Transform::Log10 => format!("log10({})", self.column),
        }
    }
}

/// A regression formula: response column, predictors, and whether the
/// predictors are z-scored before fitting. Raw (unstandardized) predictors
/// are the default so coefficients stay in interpretable units.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub response: String,
    pub predictors: Vec<Predictor>,
    pub standardize: bool,
}

impl DesignSpec {
    pub fn new(response: impl Into<String>, predictors: Vec<Predictor>) -> Self {
        DesignSpec {
            response: response.into(),
            predictors,
            standardize: false,
        }
    }
}

/// Column-oriented numeric table with row labels.
#[derive(Debug, Clone, Default)]
pub struct Table {
    labels: Vec<String>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(labels: Vec<String>) -> Self {
        Table {
            labels,
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "column {name:?} has {} values for {} rows",
                values.len(),
                self.labels.len()
            )));
        }
        if self.names.contains(&name) {
            return Err(Error::Config(format!("duplicate column {name:?}")));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

/// One fitted coefficient with its standard error and two-tailed t-test.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientEstimate {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

/// Full fit output: coefficients (intercept first), fit quality, and per-row
/// diagnostics aligned with the input row order.
#[derive(Debug, Clone)]
pub struct RegressionResult {
    pub coefficients: Vec<CoefficientEstimate>,
    pub n: usize,
    pub rank: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    /// Residual variance estimate `RSS / (n - rank)`.
    pub sigma2: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub leverages: Vec<f64>,
    pub cooks_d: Vec<f64>,
    pub labels: Vec<String>,
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Greedy Gram-Schmidt scan naming the columns that add no new direction.
/// Earlier columns win ties, so the intercept is never the one blamed.
fn dependent_columns(cols: &[Vec<f64>], names: &[String], tol: f64) -> Vec<String> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for (col, name) in cols.iter().zip(names) {
        let mut v = col.clone();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (slot, x) in v.iter_mut().zip(b) {
                    *slot -= d * x;
                }
            }
        }
        let residual = l2_norm(&v);
        if residual <= tol {
            dependent.push(name.clone());
        } else {
            for slot in v.iter_mut() {
                *slot /= residual;
            }
            basis.push(v);
        }
    }
    dependent
}

/// Fit `spec` against `table` by least squares.
pub fn ols_fit(spec: &DesignSpec, table: &Table) -> Result<RegressionResult> {
    if spec.predictors.is_empty() {
        return Err(Error::Config("regression needs at least one predictor".into()));
    }
    let n = table.len();
    let y = table
        .column(&spec.response)
        .ok_or_else(|| Error::MissingColumn {
            column: spec.response.clone(),
            hint: format!("available: {}", table.names().join(", ")),
        })?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!(
            "response {:?} contains non-finite values",
            spec.response
        )));
    }

    let m = spec.predictors.len() + 1;
    if n < m + 1 {
        return Err(Error::InsufficientData {
            required: m + 1,
            got: n,
        });
    }

    let mut names: Vec<String> = vec!["intercept".to_string()];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for predictor in &spec.predictors {
        let raw = table
            .column(&predictor.column)
            .ok_or_else(|| Error::MissingColumn {
                column: predictor.column.clone(),
                hint: format!("available: {}", table.names().join(", ")),
            })?;
        let mut col = Vec::with_capacity(n);
        for &value in raw {
            if !value.is_finite() {
                return Err(Error::Degenerate(format!(
                    "predictor {:?} contains non-finite values",
                    predictor.column
                )));
            }
            col.push(predictor.transform.apply(&predictor.column, value)?);
        }
        if spec.standardize {
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            if var == 0.0 {
                return Err(Error::Degenerate(format!(
                    "predictor {:?} has zero variance, cannot standardize",
                    predictor.column
                )));
            }
            let sd = var.sqrt();
            for v in col.iter_mut() {
                *v = (*v - mean) / sd;
            }
        }
        names.push(predictor.label());
        cols.push(col);
    }

    let max_col_norm = cols.iter().map(|c| l2_norm(c)).fold(0.0f64, f64::max);
    let tol = RANK_TOLERANCE * max_col_norm;

    let x_mat = DMatrix::from_fn(n, m, |r, c| cols[c][r]);
    let y_vec = DVector::from_column_slice(y);

    let pivoted = x_mat.clone().col_piv_qr();
    let r_pivoted = pivoted.r();
    let rank = (0..m).filter(|&i| r_pivoted[(i, i)].abs() > tol).count();
    if rank < m {
        let dependent = dependent_columns(&cols, &names, tol);
        return Err(Error::Collinear {
            columns: if dependent.is_empty() {
                "unidentified".to_string()
            } else {
                dependent.join(", ")
            },
        });
    }

    let qr = x_mat.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * &y_vec;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Numeric("triangular solve failed on full-rank design".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .ok_or_else(|| Error::Numeric("triangular inverse failed on full-rank design".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let fitted_vec = &x_mat * &beta;
    let residual_vec = &y_vec - &fitted_vec;
    let rss: f64 = residual_vec.norm_squared();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    if tss == 0.0 {
        return Err(Error::Degenerate(format!(
            "response {:?} has zero variance",
            spec.response
        )));
    }

    let df = n - m;
    let sigma2 = rss / df as f64;
    let r_squared = 1.0 - rss / tss;
    let adj_r_squared = 1.0 - (rss / df as f64) / (tss / (n as f64 - 1.0));

    let p_predictors = (m - 1) as f64;
    let f_statistic = ((tss - rss) / p_predictors) / (rss / df as f64);
    let f_p_value = if f_statistic.is_finite() {
        let dist = FisherSnedecor::new(p_predictors, df as f64)
            .map_err(|e| Error::Numeric(format!("F distribution: {e}")))?;
        dist.sf(f_statistic).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let mut coefficients = Vec::with_capacity(m);
    for j in 0..m {
        let beta_j = beta[j];
        let se = (sigma2 * xtx_inv[(j, j)]).max(0.0).sqrt();
        let t = if se > 0.0 {
            beta_j / se
        } else if beta_j == 0.0 {
            0.0
        } else {
            beta_j.signum() * f64::INFINITY
        };
        let p = t_two_tailed_p(t, df);
        coefficients.push(CoefficientEstimate {
            name: names[j].clone(),
            beta: beta_j,
            se,
            t,
            p,
        });
    }

    let mut leverages = Vec::with_capacity(n);
    for i in 0..n {
        leverages.push(q.row(i).norm_squared());
    }
    let cooks_d = leverages
        .iter()
        .zip(residual_vec.iter())
        .map(|(&h, &res)| {
            if sigma2 == 0.0 {
                // An exact fit cannot move: removing any point changes nothing.
                0.0
            } else {
                let denom = m as f64 * sigma2 * (1.0 - h).powi(2);
                res * res * h / denom
            }
        })
        .collect();

    Ok(RegressionResult {
        coefficients,
        n,
        rank,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        sigma2,
        fitted: fitted_vec.iter().copied().collect(),
        residuals: residual_vec.iter().copied().collect(),
        leverages,
        cooks_d,
        labels: table.labels().to_vec(),
    })
}

/// One-predictor convenience wrapper over [`ols_fit`].
pub fn simple_regression(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    let labels = (0..x.len()).map(|i| i.to_string()).collect();
    let mut table = Table::new(labels);
    table.add_column("x", x.to_vec())?;
    table.add_column("y", y.to_vec())?;
    ols_fit(
        &DesignSpec::new("y", vec![Predictor::raw("x")]),
        &table,
    )
}

/// Pointwise confidence band for the conditional mean of a simple
/// regression, evaluated on an even grid over the observed x range.
#[derive(Debug, Clone)]
pub struct RegressionBand {
    pub level: f64,
    pub intercept: f64,
    pub slope: f64,
    pub n: usize,
    pub grid: Vec<f64>,
    pub fitted: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Fit `y ~ x` and evaluate the `level` confidence band for the mean
/// response at `points` grid positions.
///
/// The half-width at `x0` is `t * s * sqrt(1/n + (x0 - xbar)^2 / Sxx)`, so
/// the band is narrowest at the mean of x and collapses to zero width when
/// the points are exactly collinear.
pub fn regression_band(x: &[f64], y: &[f64], level: f64, points: usize) -> Result<RegressionBand> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    if points < 2 {
        return Err(Error::Config("band grid needs at least 2 points".into()));
    }
    let fit = simple_regression(x, y)?;
    let n = x.len();
    let intercept = fit.coefficients[0].beta;
    let slope = fit.coefficients[1].beta;
    let s = fit.sigma2.sqrt();
    let x_bar = x.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - x_bar).powi(2)).sum();
    let t_crit = t_quantile(0.5 + level / 2.0, n - 2);

    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid = Vec::with_capacity(points);
    let mut fitted = Vec::with_capacity(points);
    let mut lower = Vec::with_capacity(points);
    let mut upper = Vec::with_capacity(points);
    for i in 0..points {
        let g = if i + 1 == points { hi } else { lo + step * i as f64 };
        let center = intercept + slope * g;
        let half = t_crit * s * (1.0 / n as f64 + (g - x_bar).powi(2) / sxx).sqrt();
        grid.push(g);
        fitted.push(center);
        lower.push(center - half);
        upper.push(center + half);
    }
    Ok(RegressionBand {
        level,
        intercept,
        slope,
        n,
        grid,
        fitted,
        lower,
        upper,
    })
}
