//! Floating eigenstructure of `Q_n` and the palindromic collision space in
//! diagonal coordinates.
//!
//! With `P` orthogonal and `Pᵀ Q_n P = D`, points are written `x = m + P y`
//! where `m = (½, …, ½)`. Column 0 of `P` is the all-ones direction, so `y[0]`
//! is the free coordinate and the remaining coordinates split into a positive
//! block and a negative block. `Psi(x) = 0` says the two blocks carry the same
//! energy `t`.

mod jacobi;

use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::model::Rational;
use crate::quadratic::{ExactInertia, QuadraticForm};

pub use jacobi::{jacobi_eigen, EigenPairs, MAX_SWEEPS};

/// Relative to the largest `|λ|`.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one eigenspace when comparing b₂.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("expected a one-dimensional kernel, found {0}")]
    UnexpectedKernelDim(usize),
    #[error("b2 has non-positive positive-block energy {0}")]
    DegenerateB2(f64),
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Row-major; column `j` is the eigenvector of `eigenvalues[j]`.
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    inertia: ExactInertia,
    zero_tol: f64,
    sweeps: usize,
}

/// Diagonalises `Q_n`.
///
/// Columns are ordered kernel first, then by eigenvalue descending. Each
/// eigenvector's last nonzero component is made positive.
pub fn eigendecompose(form: &QuadraticForm, zero_tol: f64) -> Result<Spectrum, SpectralError> {
    let q = form.to_f64();
    let n = q.len();
    let pairs = jacobi_eigen(&q)?;
    let scale = pairs.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = zero_tol * scale;
    let is_zero = |v: f64| v.abs() <= cutoff;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (pairs.values[a], pairs.values[b]);
        is_zero(vb)
            .cmp(&is_zero(va))
            .then(vb.total_cmp(&va))
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&j| pairs.values[j]).collect();
    let mut p = vec![vec![0.0; n]; n];
    for (new_j, &old_j) in order.iter().enumerate() {
        let col: Vec<f64> = (0..n).map(|i| pairs.vectors[i][old_j]).collect();
        let flip = col
            .iter()
            .rev()
            .find(|v| v.abs() > 1e-12)
            .is_some_and(|v| *v < 0.0);
        for i in 0..n {
            p[i][new_j] = if flip { -col[i] } else { col[i] };
        }
    }

    let zero = eigenvalues.iter().filter(|v| is_zero(**v)).count();
    let positive = eigenvalues.iter().filter(|v| !is_zero(**v) && **v > 0.0).count();
    Ok(Spectrum {
        n,
        inertia: ExactInertia::new(positive, zero, n - zero - positive),
        eigenvalues,
        p,
        q,
        zero_tol,
        sweeps: pairs.sweeps,
    })
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row-major orthogonal matrix, eigenvectors in columns.
    pub fn p(&self) -> &[Vec<f64>] {
        &self.p
    }

    /// `Q_n` in floating point.
    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn inertia(&self) -> ExactInertia {
        self.inertia
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        self.p.iter().map(|row| row[j]).collect()
    }

    /// Indices of the positive eigenvalues.
    pub fn positive_indices(&self) -> std::ops::Range<usize> {
        let start = self.inertia.zero;
        start..start + self.inertia.positive
    }

    /// Indices of the negative eigenvalues.
    pub fn negative_indices(&self) -> std::ops::Range<usize> {
        let start = self.inertia.zero + self.inertia.positive;
        start..self.n
    }

    /// `y = Pᵀ (x - m)`.
    pub fn to_y(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.p[i][j] * (x[i] - 0.5)).sum())
            .collect()
    }

    /// `x = m + P y`.
    pub fn to_x(&self, y: &[f64]) -> Vec<f64> {
        self.p
            .iter()
            .map(|row| 0.5 + row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// `Pᵀ v` without the shift.
    pub fn rotate(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.p[i][j] * v[i]).sum())
            .collect()
    }

    /// `Σ_{λ>0} λ_i y_i²`.
    pub fn positive_energy(&self, y: &[f64]) -> f64 {
        self.positive_indices()
            .map(|i| self.eigenvalues[i] * y[i] * y[i])
            .sum()
    }

    /// `Σ_{λ<0} (-λ_i) y_i²`.
    pub fn negative_energy(&self, y: &[f64]) -> f64 {
        self.negative_indices()
            .map(|i| -self.eigenvalues[i] * y[i] * y[i])
            .sum()
    }

    /// `‖PᵀP - I‖_∞` (largest absolute entry).
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|i| self.p[i][a] * self.p[i][b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `‖PᵀQP - D‖_∞` (largest absolute entry).
    pub fn diagonalization_residual(&self) -> f64 {
        let n = self.n;
        let qp: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.q[i][k] * self.p[k][j]).sum())
                    .collect()
            })
            .collect();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let v: f64 = (0..n).map(|i| self.p[i][a] * qp[i][b]).sum();
                let target = if a == b { self.eigenvalues[a] } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// `I × S^{p-1} × S^{q-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SliceType {
    pub n: usize,
    pub positive_sphere_dim: usize,
    pub negative_sphere_dim: usize,
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

impl fmt::Display for SliceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "I × S{} × S{}",
            superscript(self.positive_sphere_dim),
            superscript(self.negative_sphere_dim)
        )
    }
}

pub fn slice_type(s: &Spectrum) -> Result<SliceType, SpectralError> {
    let inertia = s.inertia();
    if inertia.zero != 1 {
        return Err(SpectralError::UnexpectedKernelDim(inertia.zero));
    }
    // n >= 3 with one kernel direction leaves p, q >= 1 for Q_n
    Ok(SliceType {
        n: s.n(),
        positive_sphere_dim: inertia.positive.saturating_sub(1),
        negative_sphere_dim: inertia.negative.saturating_sub(1),
    })
}

/// `Ind_n ∩ Inf_n^c` and its image `T` in diagonal coordinates.
#[derive(Debug, Clone)]
pub struct CollisionSpace {
    pub n: usize,
    /// Exact x-space basis.
    pub x_basis: Vec<Vec<Rational>>,
    /// `e₁` followed by the images of the kernel directions orthogonal to the all-ones vector.
    pub y_basis: Vec<Vec<f64>>,
    /// First non-constant direction, when the collision space is larger than the all-ones line.
    pub b2: Option<Vec<f64>>,
}

impl CollisionSpace {
    pub fn dim(&self) -> usize {
        self.x_basis.len()
    }

    /// Orthonormal basis of `span(y_basis)`.
    pub fn orthonormal_y_basis(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for v in &self.y_basis {
            let mut w = v.clone();
            for u in &out {
                let d: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
            }
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-12 {
                out.push(w.into_iter().map(|a| a / norm).collect());
            }
        }
        out
    }
}

fn is_constant(v: &[Rational]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// Builds the y-space picture of the collision space from an exact x-space kernel.
///
/// Each non-constant kernel vector `v` (sparsest first) contributes
/// `Pᵀ (v - mean(v)·1)`; the first of these is b₂.
pub fn collision_space(s: &Spectrum, kernel: &[Vec<Rational>]) -> CollisionSpace {
    let n = s.n();
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let mut y_basis = vec![e1];

    let mut others: Vec<&Vec<Rational>> = kernel.iter().filter(|v| !is_constant(v)).collect();
    others.sort_by_key(|v| v.iter().filter(|c| **c != Rational::from_integer(0.into())).count());
    for v in others {
        let mean: Rational = v.iter().sum::<Rational>() / Rational::from_integer(n.into());
        let centred: Vec<f64> = v
            .iter()
            .map(|c| (c - &mean).to_f64().unwrap_or(f64::NAN))
            .collect();
        y_basis.push(s.rotate(&centred));
    }
    // only a constant kernel vector: T is the y1 axis
    let b2 = y_basis.get(1).cloned();
    CollisionSpace {
        n,
        x_basis: kernel.to_vec(),
        y_basis,
        b2,
    }
}

/// Outcome of matching a computed b₂ against reference coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct B2Comparison {
    pub matches: bool,
    /// +1 or -1: the global sign applied to the computed vector.
    pub sign: f64,
    pub max_abs_diff: f64,
    /// True when a degenerate eigenspace forced a projection-norm comparison.
    pub used_eigenspaces: bool,
}

/// Compares up to a global sign. Coordinates belonging to eigenvalues that
/// coincide within [`DEGENERACY_TOL`] are compared through the norm of their
/// projection onto that eigenspace.
pub fn compare_b2(s: &Spectrum, computed: &[f64], reference: &[f64], tol: f64) -> B2Comparison {
    let n = s.n();
    assert_eq!(computed.len(), n);
    assert_eq!(reference.len(), n);
    let ev = s.eigenvalues();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match groups
            .iter_mut()
            .find(|g| (ev[g[0]] - ev[i]).abs() < DEGENERACY_TOL)
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let used_eigenspaces = groups.iter().any(|g| g.len() > 1);
    let diff_for = |sign: f64| -> f64 {
        groups
            .iter()
            .map(|g| {
                if g.len() == 1 {
                    (sign * computed[g[0]] - reference[g[0]]).abs()
                } else {
                    let nc = g.iter().map(|&i| computed[i].powi(2)).sum::<f64>().sqrt();
                    let nr = g.iter().map(|&i| reference[i].powi(2)).sum::<f64>().sqrt();
                    (nc - nr).abs()
                }
            })
            .fold(0.0, f64::max)
    };
    let (plus, minus) = (diff_for(1.0), diff_for(-1.0));
    let (sign, max_abs_diff) = if plus <= minus { (1.0, plus) } else { (-1.0, minus) };
    B2Comparison {
        matches: max_abs_diff <= tol,
        sign,
        max_abs_diff,
        used_eigenspaces,
    }
}

/// Positive `c` with `Σ_{λ>0} λ_i (c b₂ᵢ)² = t`.
pub fn c_coefficient(s: &Spectrum, b2: &[f64], t: f64) -> Result<f64, SpectralError> {
    let denom = s.positive_energy(b2);
    if denom <= 0.0 || !denom.is_finite() {
        return Err(SpectralError::DegenerateB2(denom));
    }
    Ok((t / denom).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::{build_form, restrict_to_symmetric};

    fn spectrum(n: usize) -> Spectrum {
        eigendecompose(&build_form(n).unwrap(), DEFAULT_ZERO_TOL).unwrap()
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(spectrum(4).inertia().as_tuple(), (1, 1, 2));
        assert_eq!(spectrum(6).inertia().as_tuple(), (2, 1, 3));
        assert_eq!(spectrum(7).inertia().as_tuple(), (3, 1, 3));
    }

    #[test]
    fn kernel_column_first() {
        for n in 3..=10 {
            let s = spectrum(n);
            assert!(s.eigenvalues()[0].abs() < 1e-12);
            let target = 1.0 / (n as f64).sqrt();
            for v in s.eigenvector(0) {
                assert!((v - target).abs() < 1e-10);
            }
            let rest = &s.eigenvalues()[1..];
            assert!(rest.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn slice_types() {
        assert_eq!(slice_type(&spectrum(5)).unwrap().to_string(), "I × S¹ × S¹");
        assert_eq!(slice_type(&spectrum(4)).unwrap().to_string(), "I × S⁰ × S¹");
        assert_eq!(slice_type(&spectrum(3)).unwrap().to_string(), "I × S⁰ × S⁰");
        assert_eq!(slice_type(&spectrum(7)).unwrap().to_string(), "I × S² × S²");
    }

    #[test]
    fn slice_type_rejects_wrong_kernel() {
        let mut s = spectrum(5);
        s.inertia = ExactInertia::new(2, 2, 1);
        assert_eq!(slice_type(&s), Err(SpectralError::UnexpectedKernelDim(2)));
    }

    fn collision(n: usize) -> (Spectrum, CollisionSpace) {
        let s = spectrum(n);
        let k = restrict_to_symmetric(&build_form(n).unwrap()).lifted_kernel();
        let c = collision_space(&s, &k);
        (s, c)
    }

    #[test]
    fn b2_reproduces_reference_values() {
        let (s, c) = collision(5);
        let b2 = c.b2.unwrap();
        let reference = [0.0, 0.686556, -0.606862, 0.519196, -0.301323];
        let cmp = compare_b2(&s, &b2, &reference, 1e-4);
        assert!(cmp.matches, "{cmp:?} {b2:?}");
        assert!(!cmp.used_eigenspaces);
        let norm = b2.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.2f64.sqrt()).abs() < 1e-12);

        let (s, c) = collision(7);
        let reference = [0.0, -0.6902, 0.6635, -0.5705, 0.5168, -0.3974, 0.2172];
        assert!(compare_b2(&s, c.b2.as_ref().unwrap(), &reference, 1e-4).matches);
    }

    #[test]
    fn b2_mismatch_detected() {
        let (s, c) = collision(5);
        let wrong = [0.0, 0.686556, 0.606862, 0.519196, -0.301323];
        assert!(!compare_b2(&s, c.b2.as_ref().unwrap(), &wrong, 1e-4).matches);
    }

    #[test]
    fn degenerate_groups_compare_norms() {
        // fake spectrum with a repeated eigenvalue
        let mut s = spectrum(5);
        s.eigenvalues = vec![0.0, 1.0, 1.0, -1.0, -2.0];
        let computed = [0.0, 0.6, 0.8, 0.1, 0.2];
        let reference = [0.0, 0.0, 1.0, 0.1, 0.2];
        let cmp = compare_b2(&s, &computed, &reference, 1e-9);
        assert!(cmp.used_eigenspaces);
        assert!(cmp.matches);
    }

    #[test]
    fn one_dimensional_collision_space() {
        let (_, c) = collision(6);
        assert_eq!(c.dim(), 1);
        assert!(c.b2.is_none());
        assert_eq!(c.y_basis, vec![vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]]);
    }

    #[test]
    fn c_coefficient_solves_slice_equation() {
        for n in [5, 7] {
            let (s, c) = collision(n);
            let b2 = c.b2.unwrap();
            assert_eq!(c_coefficient(&s, &b2, 0.0).unwrap(), 0.0);
            let coef = c_coefficient(&s, &b2, 1.0).unwrap();
            let scaled: Vec<f64> = b2.iter().map(|v| v * coef).collect();
            assert!((s.positive_energy(&scaled) - 1.0).abs() < 1e-10);
        }
        let s = spectrum(5);
        assert!(matches!(
            c_coefficient(&s, &[0.0; 5], 1.0),
            Err(SpectralError::DegenerateB2(_))
        ));
    }
}
