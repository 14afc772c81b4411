//! Small dense linear algebra kernels: LU with partial pivoting and
//! Householder least squares. Matrices are row-major `Vec<T>`.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::real::Real;

/// LU factorization `P A = L U` of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactor<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    norm1: T,
}

impl<T: Real> LuFactor<T> {
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage must be n*n");
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<T>())
            .fold(T::zero(), T::max);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= T::epsilon() * norm1 || !pmax.is_finite() {
                return Err(Error::SingularSystem {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        let akj = a[k * n + j];
                        a[i * n + j] -= f * akj;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu: a,
            perm,
            norm1,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        // U^T y = b
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        // L^T z = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Hager–Higham estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> T {
        let n = self.n;
        let nf = T::of_usize(n);
        let mut x = vec![T::one() / nf; n];
        let mut est = T::zero();
        for _ in 0..5 {
            let y = self.solve(&x);
            let ynorm: T = y.iter().map(|v| v.abs()).sum();
            if ynorm <= est {
                break;
            }
            est = ynorm;
            let xi: Vec<T> = y
                .iter()
                .map(|v| if *v >= T::zero() { T::one() } else { -T::one() })
                .collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -T::one()), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: T = z.iter().zip(&x).map(|(a, b)| *a * *b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![T::zero(); n];
            x[jmax] = T::one();
        }
        est * self.norm1
    }
}

/// Result of a dense least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    pub x: Vec<T>,
    /// Euclidean norm of `A x - b`.
    pub residual_norm: T,
    /// 2-norm condition number of `A`.
    pub condition: T,
    /// Diagonal of `(A^T A)^{-1}`, for standard errors.
    pub covariance_diag: Vec<T>,
}

/// Householder QR least squares for a tall `rows x cols` matrix.
pub fn least_squares<T: Real>(rows: usize, cols: usize, a: &[T], b: &[T]) -> Result<LeastSquares<T>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    if rows < cols {
        return Err(Error::InvalidParameter(format!(
            "least squares needs rows >= cols, got {rows} < {cols}"
        )));
    }
    let mut q = a.to_vec();
    let mut rhs = b.to_vec();
    for k in 0..cols {
        let norm = (k..rows).map(|i| q[i * cols + k].powi(2)).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::FitQuality {
                condition: f64::INFINITY,
            });
        }
        let alpha = if q[k * cols + k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| q[i * cols + k]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|x| x.powi(2)).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        for j in k..cols {
            let dot: T = (k..rows).map(|i| v[i - k] * q[i * cols + j]).sum();
            let f = T::of(2.0) * dot / vnorm2;
            for i in k..rows {
                q[i * cols + j] -= f * v[i - k];
            }
        }
        let dot: T = (k..rows).map(|i| v[i - k] * rhs[i]).sum();
        let f = T::of(2.0) * dot / vnorm2;
        for i in k..rows {
            rhs[i] -= f * v[i - k];
        }
    }
    // R is the upper cols x cols block of q.
    let r = |i: usize, j: usize| q[i * cols + j];
    let mut x = vec![T::zero(); cols];
    for i in (0..cols).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..cols {
            s -= r(i, j) * x[j];
        }
        x[i] = s / r(i, i);
    }
    let residual_norm = (cols..rows).map(|i| rhs[i].powi(2)).sum::<T>().sqrt();

    // R^{-1} by back substitution, column by column.
    let mut rinv = vec![T::zero(); cols * cols];
    for c in 0..cols {
        for i in (0..=c).rev() {
            let mut s = if i == c { T::one() } else { T::zero() };
            for j in (i + 1)..=c {
                s -= r(i, j) * rinv[j * cols + c];
            }
            rinv[i * cols + c] = s / r(i, i);
        }
    }
    let covariance_diag = (0..cols)
        .map(|i| (0..cols).map(|j| rinv[i * cols + j].powi(2)).sum())
        .collect();

    let mut rtr = vec![T::zero(); cols * cols];
    for i in 0..cols {
        for j in 0..cols {
            rtr[i * cols + j] = (0..cols).map(|k| r(k, i) * r(k, j)).sum();
        }
    }
    let eig = symmetric_eigenvalues(cols, rtr);
    let (lo, hi) = eig
        .iter()
        .fold((T::infinity(), T::zero()), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = if lo > T::zero() {
        (hi / lo).sqrt()
    } else {
        T::infinity()
    };
    Ok(LeastSquares {
        x,
        residual_norm,
        condition,
        covariance_diag,
    })
}

/// Cyclic Jacobi eigenvalues of a small symmetric matrix.
pub fn symmetric_eigenvalues<T: Real>(n: usize, mut a: Vec<T>) -> Vec<T> {
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        let diag: T = (0..n).map(|i| a[i * n + i].powi(2)).sum();
        if off <= T::epsilon() * T::epsilon() * diag {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lu_solves_small_system() {
        let a = vec![2.0, 1.0, 1.0, 1.0, 3.0, 2.0, 1.0, 0.0, 0.0];
        let lu = LuFactor::factor(3, a.clone()).unwrap();
        let x = lu.solve(&[4.0, 5.0, 6.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert_relative_eq!(r, [4.0, 5.0, 6.0][i], epsilon = 1e-12);
        }
        let y = lu.solve_transpose(&[1.0, 2.0, 3.0]);
        for j in 0..3 {
            let r: f64 = (0..3).map(|i| a[i * 3 + j] * y[i]).sum();
            assert_relative_eq!(r, [1.0, 2.0, 3.0][j], epsilon = 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            LuFactor::factor(2, a),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let a = vec![1.0, 0.0, 0.0, 0.0, 1e-3, 0.0, 0.0, 0.0, 10.0];
        let lu = LuFactor::factor(3, a).unwrap();
        assert_relative_eq!(lu.condition_estimate(), 1e4, max_relative = 1e-12);
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let a: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let b: Vec<f64> = xs.iter().map(|&x| 1.5 - 2.0 * x).collect();
        let ls = least_squares(4, 2, &a, &b).unwrap();
        assert_relative_eq!(ls.x[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(ls.x[1], -2.0, epsilon = 1e-12);
        assert!(ls.residual_norm < 1e-12);
        assert!(ls.condition > 1.0 && ls.condition < 10.0);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let mut e = symmetric_eigenvalues(2, vec![2.0, 1.0, 1.0, 2.0]);
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(e[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e[1], 3.0, epsilon = 1e-12);
    }
}
