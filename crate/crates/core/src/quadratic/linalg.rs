//! Small dense exact-rational matrices: inertia by symmetric pivoting and
//! reduced-echelon kernels.

use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::model::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += &self[(i, k)] * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)].to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl Index<(usize, usize)> for ExactMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Counts of positive, zero and negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ExactInertia {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl ExactInertia {
    pub fn new(positive: usize, zero: usize, negative: usize) -> Self {
        Self {
            positive,
            zero,
            negative,
        }
    }

    pub fn dim(&self) -> usize {
        self.positive + self.zero + self.negative
    }

    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.positive, self.zero, self.negative)
    }
}

/// Inertia of a symmetric matrix via exact `L D Lᵀ` with symmetric pivoting.
///
/// Nonzero diagonal entries are used as 1×1 pivots; when the remaining Schur
/// complement has an all-zero diagonal, a nonzero off-diagonal entry `a_ij`
/// yields a 2×2 pivot block. By Sylvester's law the block-diagonal `D` has the
/// same inertia as the input.
pub fn exact_inertia(m: &ExactMatrix) -> ExactInertia {
    assert!(m.is_symmetric(), "exact_inertia needs a symmetric matrix");
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..m.rows()).collect();
    let mut inertia = ExactInertia::new(0, 0, 0);

    while !active.is_empty() {
        if let Some(pos) = active.iter().position(|&i| !a[(i, i)].is_zero()) {
            let p = active.remove(pos);
            let pivot = a[(p, p)].clone();
            if pivot.is_positive() {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
            }
            for &i in &active {
                if a[(i, p)].is_zero() {
                    continue;
                }
                let f = &a[(i, p)] / &pivot;
                for &j in &active {
                    let delta = &f * &a[(p, j)];
                    a[(i, j)] -= delta;
                }
            }
            continue;
        }

        let pair = active.iter().enumerate().find_map(|(ai, &i)| {
            active[ai + 1..]
                .iter()
                .find(|&&j| !a[(i, j)].is_zero())
                .map(|&j| (i, j))
        });
        let Some((p, q)) = pair else {
            inertia.zero += active.len();
            break;
        };
        active.retain(|&k| k != p && k != q);

        let (e11, e12, e22) = (a[(p, p)].clone(), a[(p, q)].clone(), a[(q, q)].clone());
        let det = &e11 * &e22 - &e12 * &e12;
        let trace = &e11 + &e22;
        if det.is_negative() {
            inertia.positive += 1;
            inertia.negative += 1;
        } else if trace.is_positive() {
            inertia.positive += 2;
        } else {
            inertia.negative += 2;
        }
        // E^{-1} = [[e22, -e12], [-e12, e11]] / det
        let (i11, i12, i22) = (&e22 / &det, -(&e12 / &det), &e11 / &det);
        for &i in &active {
            let (ci_p, ci_q) = (a[(i, p)].clone(), a[(i, q)].clone());
            if ci_p.is_zero() && ci_q.is_zero() {
                continue;
            }
            let u = &ci_p * &i11 + &ci_q * &i12;
            let w = &ci_p * &i12 + &ci_q * &i22;
            for &j in &active {
                let delta = &u * &a[(p, j)] + &w * &a[(q, j)];
                a[(i, j)] -= delta;
            }
        }
    }
    inertia
}

/// Reduced row echelon form (leftmost pivots) and the pivot columns.
pub fn rref(m: &ExactMatrix) -> (ExactMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols() {
        if row == a.rows() {
            break;
        }
        let Some(src) = (row..a.rows()).find(|&r| !a[(r, col)].is_zero()) else {
            continue;
        };
        if src != row {
            for j in 0..a.cols() {
                let tmp = a[(src, j)].clone();
                a[(src, j)] = a[(row, j)].clone();
                a[(row, j)] = tmp;
            }
        }
        let inv = a[(row, col)].recip();
        for j in 0..a.cols() {
            a[(row, j)] *= &inv;
        }
        for r in 0..a.rows() {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for j in 0..a.cols() {
                let delta = &f * &a[(row, j)];
                a[(r, j)] -= delta;
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Exact kernel basis, one vector per free column in increasing column order,
/// each scaled to coprime integer entries with a positive leading entry.
pub fn kernel_basis(m: &ExactMatrix) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); m.cols()];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, f)].clone();
            }
            integer_normalize(&v)
        })
        .collect()
}

/// Scales a nonzero vector to coprime integers with a positive first nonzero entry.
pub fn integer_normalize(v: &[Rational]) -> Vec<Rational> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v.to_vec();
    }
    let lead_negative = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let q = x / &gcd;
            Rational::from_integer(if lead_negative { -q } else { q })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect())
                .collect(),
        )
    }

    #[test]
    fn inertia_diagonal() {
        let m = mat(&[&[3, 0, 0], &[0, 0, 0], &[0, 0, -2]]);
        assert_eq!(exact_inertia(&m).as_tuple(), (1, 1, 1));
    }

    #[test]
    fn inertia_needs_two_by_two_pivot() {
        // zero diagonal, eigenvalues ±1 and ±2
        let m = mat(&[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 2], &[0, 0, 2, 0]]);
        assert_eq!(exact_inertia(&m).as_tuple(), (2, 0, 2));
        let m = mat(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        // eigenvalues 2, -1, -1
        assert_eq!(exact_inertia(&m).as_tuple(), (1, 0, 2));
    }

    #[test]
    fn inertia_semidefinite() {
        let m = mat(&[&[1, -1], &[-1, 1]]);
        assert_eq!(exact_inertia(&m).as_tuple(), (1, 1, 0));
        assert_eq!(exact_inertia(&ExactMatrix::zeros(3, 3)).as_tuple(), (0, 3, 0));
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = mat(&[&[1, 0, -1], &[0, 0, 0], &[-1, 0, 1]]);
        let k = kernel_basis(&m);
        let expect = [mat(&[&[0, 1, 0]]), mat(&[&[1, 0, 1]])];
        assert_eq!(k.len(), 2);
        for (v, e) in k.iter().zip(&expect) {
            assert_eq!(v.as_slice(), &e.data[..]);
        }
    }

    #[test]
    fn kernel_is_integer_scaled() {
        let half = Rational::new(1.into(), 2.into());
        let m = ExactMatrix::from_rows(vec![vec![half.clone(), Rational::from_integer(3.into())]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        // x1/2 + 3 x2 = 0 -> (-6, 1) -> leading positive (6, -1)
        assert_eq!(k[0], vec![Rational::from_integer(6.into()), Rational::from_integer((-1).into())]);
        assert!(m.mul_vec(&k[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn kernel_of_full_rank_is_empty() {
        assert!(kernel_basis(&mat(&[&[2, 1], &[1, 2]])).is_empty());
    }
}
