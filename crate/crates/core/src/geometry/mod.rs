//! Sampling, connectivity and witness paths on `GST_n`.

mod components;
pub mod export;
mod path;
mod sampling;

use serde::Serialize;

use crate::spectral::{CollisionSpace, SpectralError, Spectrum};

pub use components::{
    count_components, count_components_in, epsilon_graph_components, find_plateau,
    min_opposite_sign_distance, opposite_sign_edges, ComponentReport, EpsilonGrid, SingleLinkage,
    UnionFind, DEFAULT_GRID_PERCENTILES, DEFAULT_GRID_STEPS, PERCENTILE_SUBSAMPLE, MIN_PLATEAU_SAMPLES, PLATEAU_LEN,
};
pub use path::{
    build_path, validate_path, PathConfig, PathError, PathTolerances, PathValidation, PathViolation,
    PathWitness, ViolationKind,
};
pub use sampling::{sample_gst, sample_slice, CloudPoint, SampleCloud, SamplerConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("slice parameters need s > 0 and t >= 0 (got s = {s}, t = {t})")]
    InvalidSlice { s: f64, t: f64 },
    #[error("slice is empty: positive block {positive}, negative block {negative}")]
    EmptySlice { positive: usize, negative: usize },
    #[error("sampling stalled: {accepted} accepted after {attempts} attempts")]
    SamplingStalled { attempts: u64, accepted: usize },
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("invalid epsilon grid: {0}")]
    InvalidGrid(String),
    #[error("no plateau of {len} equal counts in {counts:?}")]
    NoStablePlateau {
        len: usize,
        grid: Vec<f64>,
        counts: Vec<usize>,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Half-width `s` of the free `y₁` interval and shared block energy `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceSpec {
    s: f64,
    t: f64,
}

impl SliceSpec {
    pub fn new(s: f64, t: f64) -> Result<Self, GeometryError> {
        if !(s > 0.0) || !(t >= 0.0) || !s.is_finite() || !t.is_finite() {
            return Err(GeometryError::InvalidSlice { s, t });
        }
        Ok(Self { s, t })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Euclidean distance from `y` to `span(collision.y_basis)`.
///
/// `P` is orthogonal, so this is also the x-space distance to the shifted
/// collision space.
pub fn distance_to_t(y: &[f64], collision: &CollisionSpace) -> f64 {
    let mut r = y.to_vec();
    for u in collision.orthonormal_y_basis() {
        let d: f64 = r.iter().zip(&u).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(&u).for_each(|(a, b)| *a -= d * b);
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest `t` for which the whole `y₁ = 0` slice of energy `t` lies in `[0,1]^n`.
///
/// By Cauchy–Schwarz, `max |x_i - ½|` over the slice is
/// `√t (√Σ₊ P_ij²/λ_j + √Σ₋ P_ij²/|λ_j|)`.
pub fn slice_fit_bound(s: &Spectrum) -> f64 {
    let ev = s.eigenvalues();
    s.p()
        .iter()
        .map(|row| {
            let a: f64 = s
                .positive_indices()
                .map(|j| row[j] * row[j] / ev[j])
                .sum::<f64>()
                .sqrt();
            let b: f64 = s
                .negative_indices()
                .map(|j| row[j] * row[j] / -ev[j])
                .sum::<f64>()
                .sqrt();
            (0.5 / (a + b)).powi(2)
        })
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GstModel;

    #[test]
    fn slice_spec_validation() {
        assert!(SliceSpec::new(1.0, 0.0).is_ok());
        assert!(SliceSpec::new(0.0, 1.0).is_err());
        assert!(SliceSpec::new(1.0, -1e-9).is_err());
        assert!(SliceSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn distance_to_t_examples() {
        let m4 = GstModel::new(4).unwrap();
        let d = distance_to_t(&[0.3, 1.0, 2.0, 2.0], &m4.collision);
        assert!((d - 3.0).abs() < 1e-14);

        let m5 = GstModel::new(5).unwrap();
        let b2 = m5.collision.b2.clone().unwrap();
        let y: Vec<f64> = b2.iter().map(|v| 0.37 * v).collect();
        assert!(distance_to_t(&y, &m5.collision) < 1e-10);
        let mut y2 = y.clone();
        y2[0] = 4.0;
        assert!(distance_to_t(&y2, &m5.collision) < 1e-10);
    }

    #[test]
    fn fit_bound_is_tight() {
        let m = GstModel::new(5).unwrap();
        let t = slice_fit_bound(&m.spectrum);
        assert!(t > 0.0 && t < 1.0);
        // the maximiser of x_0 over the slice touches the cube face
        let s = &m.spectrum;
        let ev = s.eigenvalues();
        let row = &s.p()[0];
        let mut y = vec![0.0; 5];
        let a: f64 = s.positive_indices().map(|j| row[j] * row[j] / ev[j]).sum();
        let b: f64 = s.negative_indices().map(|j| row[j] * row[j] / -ev[j]).sum();
        for j in s.positive_indices() {
            y[j] = (t / a).sqrt() * row[j] / ev[j];
        }
        for j in s.negative_indices() {
            y[j] = (t / b).sqrt() * row[j] / -ev[j];
        }
        assert!((s.positive_energy(&y) - t).abs() < 1e-12);
        assert!((s.negative_energy(&y) - t).abs() < 1e-12);
        let x = s.to_x(&y);
        let worst = x.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
        assert!((worst - 0.5).abs() < 1e-9, "{worst}");
    }
}
