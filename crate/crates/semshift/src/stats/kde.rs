//! Gaussian kernel density estimation on a fixed evaluation grid.
//!
//! The default bandwidth is Scott's rule, `sigma_hat * n^(-1/5)` with the
//! sample standard deviation. The grid always extends four bandwidths past
//! the extreme observations: rates live in [0, 1] but the density support is
//! deliberately not clipped to it, so mass near the boundary stays visible
//! instead of piling into an artificial spike.

use crate::error::{Error, Result};

const BASE_GRID_POINTS: usize = 512;
const MAX_GRID_POINTS: usize = 16384;

/// An evaluated density curve.
#[derive(Debug, Clone)]
pub struct DensityCurve {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl DensityCurve {
    /// Trapezoid integral over the evaluation grid; close to one by
    /// construction of the grid margins.
    pub fn trapezoid_integral(&self) -> f64 {
        let mut acc = 0.0;
        for w in self.grid.windows(2).zip(self.density.windows(2)) {
            let (g, d) = w;
            acc += (g[1] - g[0]) * (d[0] + d[1]) / 2.0;
        }
        acc
    }
}

/// Scott's rule bandwidth: sample standard deviation times `n^(-1/5)`.
pub fn scott_bandwidth(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        return Err(Error::Degenerate(
            "all values identical, bandwidth must be given explicitly".into(),
        ));
    }
    Ok(var.sqrt() * (n as f64).powf(-0.2))
}

/// Estimate the density of `values` with a Gaussian kernel.
///
/// `bandwidth` of `None` selects Scott's rule; passing an explicit positive
/// bandwidth also unlocks degenerate samples where every value coincides.
pub fn kde_1d(values: &[f64], bandwidth: Option<f64>) -> Result<DensityCurve> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: n,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite value in density input".into()));
    }
    let h = match bandwidth {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => {
            return Err(Error::Degenerate(format!(
                "bandwidth must be positive and finite, got {h}"
            )))
        }
        None => scott_bandwidth(values)?,
    };

    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let lo = min - 4.0 * h;
    let hi = max + 4.0 * h;
    // Keep at least four grid steps per bandwidth so the trapezoid integral
    // resolves every kernel even when the data range dwarfs h.
    let needed = ((hi - lo) / (h / 4.0)).ceil() as usize + 1;
    let points = needed.clamp(BASE_GRID_POINTS, MAX_GRID_POINTS);

    let step = (hi - lo) / (points - 1) as f64;
    let norm = 1.0 / ((n as f64) * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut grid = Vec::with_capacity(points);
    let mut density = Vec::with_capacity(points);
    for i in 0..points {
        let g = if i + 1 == points { hi } else { lo + step * i as f64 };
        let mut acc = 0.0;
        for &v in values {
            let u = (g - v) / h;
            acc += (-0.5 * u * u).exp();
        }
        grid.push(g);
        density.push(acc * norm);
    }
    Ok(DensityCurve {
        bandwidth: h,
        grid,
        density,
    })
}
