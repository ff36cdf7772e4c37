//! The independence quadratic form `Psi` and its matrix `Q_n`.
//!
//! `Psi(x) = (2^{1-n} Σ_k C(n-1,k) x_{k+1})² - 2^{1-n} Σ_k C(n-2,k) (x_{k+2}² + x_{k+1} x_{n-k-1})`
//! vanishes exactly on the conditional-independence variety. Everything here is
//! exact rational arithmetic.

mod linalg;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::expectations::expectations;
use crate::model::{binomial, Rational};

pub use linalg::{exact_inertia, integer_normalize, kernel_basis, rref, ExactInertia, ExactMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuadraticError {
    #[error("player count must be at least 3, got {0}")]
    InvalidN(usize),
    #[error("vector has length {got}, form has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `Q_n` with `xᵀ Q_n x = Psi(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    n: usize,
    q: ExactMatrix,
}

fn two_pow(e: usize) -> Rational {
    Rational::from_integer(BigInt::one() << e)
}

/// Coefficients of the linear functional whose square is the first term of `Psi`.
fn marginal_functional(n: usize) -> Vec<Rational> {
    let denom = two_pow(n - 1);
    (0..n)
        .map(|k| Rational::from_integer(binomial(n - 1, k)) / &denom)
        .collect()
}

/// Builds `Q_n = ℓℓᵀ - B`, with `B` the symmetric part of the second sum's
/// coefficient matrix. Cross terms split evenly across `(a, b)` and `(b, a)`;
/// when `a == b` the two halves land on the same diagonal entry.
pub fn build_form(n: usize) -> Result<QuadraticForm, QuadraticError> {
    if n < 3 {
        return Err(QuadraticError::InvalidN(n));
    }
    let l = marginal_functional(n);
    let mut q = ExactMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = &l[i] * &l[j];
        }
    }
    let denom = two_pow(n - 1);
    let half = Rational::new(1.into(), 2.into());
    for k in 0..=n - 2 {
        let w = Rational::from_integer(binomial(n - 2, k)) / &denom;
        q[(k + 1, k + 1)] -= &w;
        let (a, b) = (k, n - k - 2);
        let hw = &w * &half;
        q[(a, b)] -= &hw;
        q[(b, a)] -= &hw;
    }
    debug_assert!(q.is_symmetric());
    Ok(QuadraticForm { n, q })
}

/// Term-by-term evaluation of `Psi`, independent of the matrix route.
pub fn psi_direct(x: &[Rational]) -> Rational {
    let n = x.len();
    let at = |i: usize| &x[i - 1];
    let denom = two_pow(n - 1);
    let linear: Rational = (0..n)
        .map(|k| Rational::from_integer(binomial(n - 1, k)) * at(k + 1))
        .sum::<Rational>()
        / &denom;
    let second: Rational = (0..=n - 2)
        .map(|k| {
            Rational::from_integer(binomial(n - 2, k))
                * (at(k + 2) * at(k + 2) + at(k + 1) * at(n - (k + 1)))
        })
        .sum::<Rational>()
        / &denom;
    &linear * &linear - second
}

/// Floating twin of [`psi_direct`].
pub fn psi_direct_f64(x: &[f64]) -> f64 {
    let n = x.len();
    let at = |i: usize| x[i - 1];
    let scale = 0.5f64.powi(n as i32 - 1);
    let binom = |m: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
    };
    let linear: f64 = (0..n).map(|k| binom(n - 1, k) * at(k + 1)).sum::<f64>() * scale;
    let second: f64 = (0..=n - 2)
        .map(|k| binom(n - 2, k) * (at(k + 2) * at(k + 2) + at(k + 1) * at(n - (k + 1))))
        .sum::<f64>()
        * scale;
    linear * linear - second
}

impl QuadraticForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.q
    }

    /// `xᵀ Q x`.
    pub fn eval(&self, x: &[Rational]) -> Result<Rational, QuadraticError> {
        if x.len() != self.n {
            return Err(QuadraticError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let qx = self.q.mul_vec(x);
        Ok(x.iter().zip(&qx).map(|(a, b)| a * b).sum())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.q.to_f64()
    }

    pub fn inertia(&self) -> ExactInertia {
        exact_inertia(&self.q)
    }
}

/// Evaluates `xᵀ Q x` in floating point for a dense matrix.
pub fn quadratic_f64(q: &[Vec<f64>], x: &[f64]) -> f64 {
    q.iter()
        .zip(x)
        .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// `Psi` restricted to palindromic vectors `x_i = x_{n-i+1}`, over the free
/// coordinates `x_1 .. x_m`, `m = ceil(n/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedForm {
    n: usize,
    r: ExactMatrix,
    scale: Rational,
}

/// One monomial `coefficient · x_i x_j` (1-based, `i <= j`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "crate::model::serialize_rational")]
    pub coefficient: Rational,
}

/// `-coefficient · (x_a - x_b)²` with 1-based `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerfectSquare {
    #[serde(serialize_with = "crate::model::serialize_rational")]
    pub coefficient: Rational,
    pub pair: (usize, usize),
}

impl fmt::Display for PerfectSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "-{}(x{} - x{})^2", self.coefficient, self.pair.0, self.pair.1)
    }
}

/// `n × m` matrix mapping free coordinates to the mirrored full vector.
fn lifting_matrix(n: usize) -> ExactMatrix {
    let m = n.div_ceil(2);
    let mut l = ExactMatrix::zeros(n, m);
    for i in 0..n {
        l[(i, i.min(n - 1 - i))] = Rational::one();
    }
    l
}

pub fn restrict_to_symmetric(q: &QuadraticForm) -> RestrictedForm {
    let n = q.n();
    let l = lifting_matrix(n);
    let r = l.transpose().mul(&q.q).mul(&l);
    let scale = expectations()
        .restricted
        .get(&n)
        .map(|e| e.scale.clone())
        .unwrap_or_else(|| integer_polynomial_scale(&r));
    RestrictedForm { n, r, scale }
}

/// Smallest power of two turning every monomial coefficient into an integer.
fn integer_polynomial_scale(r: &ExactMatrix) -> Rational {
    let two = Rational::from_integer(2.into());
    let mut scale = Rational::one();
    loop {
        let all_integer = (0..r.rows()).all(|i| {
            (i..r.cols()).all(|j| {
                let c = if i == j { r[(i, j)].clone() } else { &r[(i, j)] * &two };
                (c * &scale).is_integer()
            })
        });
        if all_integer {
            return scale;
        }
        scale *= &two;
    }
}

impl RestrictedForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.r.rows()
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.r
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn scaled_matrix(&self) -> ExactMatrix {
        self.r.scaled(&self.scale)
    }

    /// Mirrors free coordinates into a full palindromic vector.
    pub fn lift(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.m(), "restricted vector has wrong length");
        (0..self.n)
            .map(|i| v[i.min(self.n - 1 - i)].clone())
            .collect()
    }

    /// `vᵀ R v`.
    pub fn eval(&self, v: &[Rational]) -> Rational {
        let rv = self.r.mul_vec(v);
        v.iter().zip(&rv).map(|(a, b)| a * b).sum()
    }

    /// Monomials of `scale · vᵀ R v`, zero coefficients dropped.
    pub fn polynomial(&self) -> Vec<Monomial> {
        let two = Rational::from_integer(2.into());
        let mut out = Vec::new();
        for i in 0..self.m() {
            for j in i..self.m() {
                let c = if i == j {
                    &self.r[(i, i)] * &self.scale
                } else {
                    &self.r[(i, j)] * &self.scale * &two
                };
                if !c.is_zero() {
                    out.push(Monomial {
                        i: i + 1,
                        j: j + 1,
                        coefficient: c,
                    });
                }
            }
        }
        out
    }

    pub fn polynomial_string(&self) -> String {
        let terms = self.polynomial();
        if terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, t) in terms.iter().enumerate() {
            let neg = t.coefficient.is_negative();
            let mag = t.coefficient.abs();
            match (k, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            if !mag.is_one() {
                s.push_str(&mag.to_string());
                s.push(' ');
            }
            if t.i == t.j {
                s.push_str(&format!("x{}^2", t.i));
            } else {
                s.push_str(&format!("x{} x{}", t.i, t.j));
            }
        }
        s
    }

    pub fn inertia(&self) -> ExactInertia {
        exact_inertia(&self.r)
    }

    /// Kernel of `R` in free coordinates.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        kernel_basis(&self.r)
    }

    /// Basis of `Ind_n ∩ Inf_n^c` in x-space. `R` is negative semidefinite, so
    /// its zero set is exactly its kernel.
    pub fn lifted_kernel(&self) -> Vec<Vec<Rational>> {
        self.kernel().iter().map(|v| self.lift(v)).collect()
    }
}

/// Recognises `scale · R = -c (x_a - x_b)²` with `c > 0`.
pub fn perfect_square_check(r: &RestrictedForm) -> Option<PerfectSquare> {
    let s = r.scaled_matrix();
    let m = s.rows();
    let support: Vec<usize> = (0..m).filter(|&i| !s[(i, i)].is_zero()).collect();
    let [a, b] = support[..] else {
        return None;
    };
    let c = -s[(a, a)].clone();
    if !c.is_positive() || s[(b, b)] != -c.clone() || s[(a, b)] != c {
        return None;
    }
    let nonzero = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| !s[(i, j)].is_zero())
        .count();
    (nonzero == 4).then(|| PerfectSquare {
        coefficient: c,
        pair: (a + 1, b + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x.into())).collect()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn rejects_small_n() {
        assert_eq!(build_form(2), Err(QuadraticError::InvalidN(2)));
    }

    #[test]
    fn build_form_examples() {
        let q4 = build_form(4).unwrap();
        assert_eq!(q4.eval(&ints(&[1, 0, 0, 1])).unwrap(), r(-1, 16));
        let q5 = build_form(5).unwrap();
        assert_eq!(q5.eval(&ints(&[1, 0, 0, 0, 1])).unwrap(), r(-3, 64));
        for n in 3..=10 {
            let q = build_form(n).unwrap();
            assert!(q.eval(&ints(&vec![1; n])).unwrap().is_zero());
            assert!(q.matrix().is_symmetric());
            assert!(q.matrix().mul_vec(&ints(&vec![1; n])).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn eval_psi_examples() {
        let q3 = build_form(3).unwrap();
        assert_eq!(q3.eval(&ints(&[1, 0, 0])).unwrap(), r(1, 16));
        assert_eq!(psi_direct(&ints(&[1, 0, 0])), r(1, 16));
        let q6 = build_form(6).unwrap();
        let x = ints(&[1, 0, 0, 0, 0, 1]);
        assert_eq!(q6.eval(&x).unwrap(), psi_direct(&x));
        assert!(matches!(
            q6.eval(&ints(&[1, 2])),
            Err(QuadraticError::DimensionMismatch { expected: 6, got: 2 })
        ));
    }

    #[test]
    fn restricted_polynomials_display() {
        let r4 = restrict_to_symmetric(&build_form(4).unwrap());
        assert_eq!(r4.polynomial_string(), "-1/2 x1^2 + x1 x2 - 1/2 x2^2");
        let r5 = restrict_to_symmetric(&build_form(5).unwrap());
        assert_eq!(r5.polynomial_string(), "-3 x1^2 + 6 x1 x3 - 3 x3^2");
        let r3 = restrict_to_symmetric(&build_form(3).unwrap());
        assert_eq!(r3.polynomial_string(), "0");
    }

    #[test]
    fn fallback_scale_gives_integer_coefficients() {
        let r9 = restrict_to_symmetric(&build_form(9).unwrap());
        assert!(r9.polynomial().iter().all(|t| t.coefficient.is_integer()));
        let half = r9.scale() / Rational::from_integer(2.into());
        let r9_half = RestrictedForm { scale: half, ..r9.clone() };
        assert!(!r9_half.polynomial().iter().all(|t| t.coefficient.is_integer()));
    }

    #[test]
    fn perfect_squares() {
        let check = |n| perfect_square_check(&restrict_to_symmetric(&build_form(n).unwrap()));
        assert_eq!(check(4), Some(PerfectSquare { coefficient: r(1, 2), pair: (1, 2) }));
        assert_eq!(check(5), Some(PerfectSquare { coefficient: r(3, 1), pair: (1, 3) }));
        assert_eq!(check(6), None);
        assert_eq!(check(7), None);
        assert_eq!(check(3), None);
        assert_eq!(check(5).unwrap().to_string(), "-3(x1 - x3)^2");
    }

    #[test]
    fn inertia_examples() {
        let r4 = restrict_to_symmetric(&build_form(4).unwrap());
        assert_eq!(r4.inertia().as_tuple(), (0, 1, 1));
        let r6 = restrict_to_symmetric(&build_form(6).unwrap());
        assert_eq!(r6.inertia().as_tuple(), (0, 1, 2));
        assert_eq!(build_form(5).unwrap().inertia().as_tuple(), (2, 1, 2));
    }

    #[test]
    fn lifted_kernels() {
        let k = |n| restrict_to_symmetric(&build_form(n).unwrap()).lifted_kernel();
        assert_eq!(k(4), vec![ints(&[1, 1, 1, 1])]);
        assert_eq!(k(5), vec![ints(&[0, 1, 0, 1, 0]), ints(&[1, 0, 1, 0, 1])]);
        assert_eq!(k(6), vec![ints(&[1; 6])]);
        assert_eq!(
            k(7),
            vec![ints(&[1, 0, 1, 0, 1, 0, 1]), ints(&[0, 1, 0, 1, 0, 1, 0])]
        );
    }
}
