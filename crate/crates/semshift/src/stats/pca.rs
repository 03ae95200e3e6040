//! Principal component projection via singular value decomposition of the
//! mean-centered data matrix.
//!
//! Components carry a deterministic sign: the loading with the largest
//! magnitude (smallest index on ties) is made positive, so repeated runs and
//! platform changes cannot flip an axis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A fitted projection: per-point coordinates plus the basis that made them.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    /// Column means subtracted before decomposition.
    pub mean: Vec<f64>,
    /// `components[c]` is the unit-length loading vector of component `c`.
    pub components: Vec<Vec<f64>>,
    /// Singular values of the centered matrix, one per kept component,
    /// non-increasing.
    pub singular_values: Vec<f64>,
    /// `coordinates[i][c]` is point `i` projected on component `c`.
    pub coordinates: Vec<Vec<f64>>,
}

/// Project `vectors` onto their top `n_components` principal directions.
pub fn pca_project(vectors: &[Vec<f64>], n_components: usize) -> Result<PcaProjection> {
    if n_components == 0 {
        return Err(Error::Config("n_components must be positive".into()));
    }
    let n = vectors.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: n,
        });
    }
    let dim = vectors[0].len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "vector {i} has {} components, expected {dim}",
                v.len()
            )));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Degenerate(format!("vector {i} has non-finite components")));
        }
    }
    // Centering removes one direction; the data can span at most n-1.
    let available = dim.min(n - 1);
    if n_components > available {
        return Err(Error::Underdetermined {
            requested: n_components,
            available,
        });
    }

    let mut mean = vec![0.0f64; dim];
    for v in vectors {
        for (slot, &c) in mean.iter_mut().zip(v) {
            *slot += c;
        }
    }
    for slot in mean.iter_mut() {
        *slot /= n as f64;
    }

    let centered = DMatrix::from_fn(n, dim, |r, c| vectors[r][c] - mean[c]);
    let svd = centered.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return right singular vectors".into()))?;

    // Defensive ordering: pair each singular value with its row of V^T and
    // sort by value descending, index ascending.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(n_components);
    let mut singular_values = Vec::with_capacity(n_components);
    for &idx in order.iter().take(n_components) {
        let mut component: Vec<f64> = v_t.row(idx).iter().copied().collect();
        let dominant = component
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.abs()
                    .total_cmp(&b.1.abs())
                    .then(b.0.cmp(&a.0))
            })
            .map(|(i, _)| i)
            .expect("dim > 0");
        if component[dominant] < 0.0 {
            for c in component.iter_mut() {
                *c = -*c;
            }
        }
        singular_values.push(svd.singular_values[idx]);
        components.push(component);
    }

    let coordinates = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|comp| {
                    comp.iter()
                        .zip(centered.row(i).iter())
                        .map(|(c, x)| c * x)
                        .sum()
                })
                .collect()
        })
        .collect();

    Ok(PcaProjection {
        mean,
        components,
        singular_values,
        coordinates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn planar_data_is_recovered_exactly() {
        // Points on a plane inside a 5-dimensional space: projection must
        // preserve all pairwise distances, and residual variance is zero.
        let mut rng = StdRng::seed_from_u64(2);
        let e1 = [1.0, 0.0, 0.0, 0.0, 0.0];
        let e2 = [0.0, 0.0, 1.0, 0.0, 0.0];
        let points: Vec<(f64, f64)> = (0..12)
            .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let vectors: Vec<Vec<f64>> = points
            .iter()
            .map(|(a, b)| (0..5).map(|i| 3.0 + a * e1[i] + b * e2[i]).collect())
            .collect();
        let proj = pca_project(&vectors, 2).unwrap();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let original = ((points[i].0 - points[j].0).powi(2)
                    + (points[i].1 - points[j].1).powi(2))
                .sqrt();
                let projected = ((proj.coordinates[i][0] - proj.coordinates[j][0]).powi(2)
                    + (proj.coordinates[i][1] - proj.coordinates[j][1]).powi(2))
                .sqrt();
                assert!(
                    (original - projected).abs() < 1e-8,
                    "distance {i}-{j}: {original} vs {projected}"
                );
            }
        }
        // Third and later singular directions carry nothing.
        let total: f64 = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.iter()
                    .zip(&proj.mean)
                    .map(|(x, m)| (x - m).powi(2))
                    .sum::<f64>()
                    - proj.coordinates[i].iter().map(|c| c * c).sum::<f64>()
            })
            .sum();
        assert!(total.abs() < 1e-12, "off-plane variance {total}");
    }

    #[test]
    fn rank_two_reconstruction_matches_projection_energy() {
        let mut rng = StdRng::seed_from_u64(8);
        let vectors: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let proj = pca_project(&vectors, 2).unwrap();
        // Reconstruction from 2 components; its squared error must equal the
        // centered energy minus the kept coordinate energy.
        let mut err = 0.0;
        let mut kept = 0.0;
        let mut total = 0.0;
        for (i, v) in vectors.iter().enumerate() {
            for (d, value) in v.iter().enumerate() {
                let rec: f64 = proj.mean[d]
                    + proj.coordinates[i][0] * proj.components[0][d]
                    + proj.coordinates[i][1] * proj.components[1][d];
                err += (value - rec).powi(2);
                total += (value - proj.mean[d]).powi(2);
            }
            kept += proj.coordinates[i].iter().map(|c| c * c).sum::<f64>();
        }
        assert!((err - (total - kept)).abs() < 1e-9);
        // The kept energy equals the squared singular values.
        let sv_energy: f64 = proj.singular_values.iter().map(|s| s * s).sum();
        assert!((kept - sv_energy).abs() < 1e-9);
    }

    #[test]
    fn duplicated_points_share_coordinates() {
        let base = vec![0.5, -1.0, 2.0];
        let vectors = vec![
            base.clone(),
            vec![1.0, 0.0, 0.0],
            base.clone(),
            vec![-0.5, 0.7, 0.3],
        ];
        let proj = pca_project(&vectors, 2).unwrap();
        assert_eq!(proj.coordinates[0], proj.coordinates[2]);
    }

    #[test]
    fn sign_convention_makes_dominant_loading_positive() {
        let mut rng = StdRng::seed_from_u64(4);
        let vectors: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let proj = pca_project(&vectors, 2).unwrap();
        for comp in &proj.components {
            let dominant = comp
                .iter()
                .cloned()
                .fold(0.0f64, |acc, c| if c.abs() > acc.abs() { c } else { acc });
            assert!(dominant > 0.0);
        }
        assert!(proj.singular_values[0] >= proj.singular_values[1]);
    }

    #[test]
    fn components_are_orthonormal() {
        let mut rng = StdRng::seed_from_u64(12);
        let vectors: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let proj = pca_project(&vectors, 3).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = proj.components[a]
                    .iter()
                    .zip(&proj.components[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "({a},{b}) dot {dot}");
            }
        }
    }

    #[test]
    fn degenerate_requests_are_rejected() {
        let vectors = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert!(matches!(
            pca_project(&vectors, 2).unwrap_err(),
            Error::Underdetermined {
                requested: 2,
                available: 1
            }
        ));
        assert!(matches!(
            pca_project(&vectors[..1], 1).unwrap_err(),
            Error::InsufficientData { .. }
        ));
        let ragged = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(
            pca_project(&ragged, 1).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
    }
}
