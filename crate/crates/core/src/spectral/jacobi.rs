//! Cyclic Jacobi rotations for small dense symmetric matrices.

use super::SpectralError;

pub const MAX_SWEEPS: usize = 50;

/// Off-diagonal Frobenius norm must fall below this fraction of `‖A‖_F`.
pub const RELATIVE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Unsorted eigenvalues.
    pub values: Vec<f64>,
    /// Row-major; column `j` is the unit eigenvector for `values[j]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diagonal(a: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Diagonalises `a` with rotations applied in row-cyclic order.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Result<EigenPairs, SpectralError> {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let threshold = RELATIVE_TOLERANCE * frobenius(&a);

    for sweep in 0..=MAX_SWEEPS {
        if off_diagonal(&a) <= threshold {
            return Ok(EigenPairs {
                values: (0..n).map(|i| a[i][i]).collect(),
                vectors: v,
                sweeps: sweep,
            });
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                // a'_pq = 0 for the smaller root of t² + 2θt - 1 = 0
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(SpectralError::NoConvergence { sweeps: MAX_SWEEPS })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[Vec<f64>], e: &EigenPairs) -> f64 {
        let n = a.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i][k] * e.vectors[k][j]).sum();
                worst = worst.max((av - e.values[j] * e.vectors[i][j]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let e = jacobi_eigen(&a).unwrap();
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!(residual(&a, &e) < 1e-14);
    }

    #[test]
    fn already_diagonal() {
        let a = vec![vec![2.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 0.5]];
        let e = jacobi_eigen(&a).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, vec![2.0, -1.0, 0.5]);
    }

    #[test]
    fn dense_symmetric() {
        let a = vec![
            vec![4.0, -2.0, 1.0, 0.5],
            vec![-2.0, 3.0, 0.25, -1.0],
            vec![1.0, 0.25, -1.0, 2.0],
            vec![0.5, -1.0, 2.0, 0.0],
        ];
        let e = jacobi_eigen(&a).unwrap();
        assert!(residual(&a, &e) < 1e-12);
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 6.0).abs() < 1e-12);
    }
}
