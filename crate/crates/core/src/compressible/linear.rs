//! Frozen-coefficient divergence-form operator and its preconditioned
//! conjugate-gradient solve.
//!
//! Unknowns live on rings `1..n_r-1`; rings 0 and `n_r - 1` carry Dirichlet
//! data. Vectors span the whole grid, with boundary entries ignored.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::ConformalGrid;
use crate::real::Real;

/// Face coefficients `w h` of the five-point scheme.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients<T> {
    /// Radial faces `(i + 1/2, j)`, `i < n_r - 1`.
    pub radial: Vec<T>,
    /// Angular faces `(i, j + 1/2)`, all rings (boundary rings unused).
    pub angular: Vec<T>,
}

/// `R = sum_faces c (psi_nbr - psi)` at interior nodes; zero elsewhere.
pub(crate) fn flux_residual<T: Real>(grid: &ConformalGrid<T>, c: &Coefficients<T>, psi: &[T], out: &mut [T]) {
    let (nr, nt) = (grid.n_r, grid.n_theta);
    out.iter_mut().for_each(|v| *v = T::zero());
    for i in 1..nr - 1 {
        for j in 0..nt {
            let k = i * nt + j;
            let jp = i * nt + (j + 1) % nt;
            let jm = i * nt + (j + nt - 1) % nt;
            let p = psi[k];
            out[k] = c.radial[k] * (psi[k + nt] - p)
                + c.radial[k - nt] * (psi[k - nt] - p)
                + c.angular[k] * (psi[jp] - p)
                + c.angular[jm] * (psi[jm] - p);
        }
    }
}

/// `A x` for interior `x` (boundary entries treated as zero).
fn apply<T: Real>(grid: &ConformalGrid<T>, c: &Coefficients<T>, x: &[T], out: &mut [T]) {
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let at = |k: usize, i: usize| if i == 0 || i == nr - 1 { T::zero() } else { x[k] };
    for i in 1..nr - 1 {
        for j in 0..nt {
            let k = i * nt + j;
            let jp = i * nt + (j + 1) % nt;
            let jm = i * nt + (j + nt - 1) % nt;
            let p = x[k];
            out[k] = c.radial[k] * (p - at(k + nt, i + 1))
                + c.radial[k - nt] * (p - at(k - nt, i - 1))
                + c.angular[k] * (p - x[jp])
                + c.angular[jm] * (p - x[jm]);
        }
    }
}

fn dot<T: Real>(nt: usize, nr: usize, a: &[T], b: &[T]) -> T {
    a[nt..(nr - 1) * nt].iter().zip(&b[nt..(nr - 1) * nt]).map(|(&x, &y)| x * y).sum()
}

/// Exact inverse of the operator with ring-averaged coefficients: FFT in
/// theta, tridiagonal solve in s for every Fourier mode.
pub(crate) struct Preconditioner<T: Real> {
    nr: usize,
    nt: usize,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
    /// Averaged radial coefficient below and above each interior ring.
    lower: Vec<T>,
    upper: Vec<T>,
    angular: Vec<T>,
    eigen: Vec<T>,
}

impl<T: Real> Preconditioner<T> {
    pub fn new(grid: &ConformalGrid<T>, c: &Coefficients<T>) -> Self {
        let (nr, nt) = (grid.n_r, grid.n_theta);
        let mean = |v: &[T]| v.iter().copied().sum::<T>() / T::of_usize(v.len());
        let radial_mean: Vec<T> = (0..nr - 1).map(|i| mean(&c.radial[i * nt..(i + 1) * nt])).collect();
        let lower = (0..nr).map(|i| if i == 0 { T::zero() } else { radial_mean[i - 1] }).collect();
        let upper = (0..nr).map(|i| if i + 1 >= nr { T::zero() } else { radial_mean[i] }).collect();
        let angular = (0..nr).map(|i| mean(&c.angular[i * nt..(i + 1) * nt])).collect();
        let eigen = (0..nt)
            .map(|q| T::of(2.0) * (T::one() - (T::TAU() * T::of_usize(q) / T::of_usize(nt)).cos()))
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            nr,
            nt,
            fft: planner.plan_fft_forward(nt),
            ifft: planner.plan_fft_inverse(nt),
            lower,
            upper,
            angular,
            eigen,
        }
    }

    pub fn apply(&self, r: &[T], out: &mut [T]) {
        let (nr, nt) = (self.nr, self.nt);
        let n_int = nr - 2;
        let mut spec = vec![Complex::new(T::zero(), T::zero()); n_int * nt];
        for i in 1..nr - 1 {
            let row = &mut spec[(i - 1) * nt..i * nt];
            for j in 0..nt {
                row[j] = Complex::from(r[i * nt + j]);
            }
            self.fft.process(row);
        }
        let mut cp = vec![T::zero(); n_int];
        let mut dp = vec![Complex::new(T::zero(), T::zero()); n_int];
        for q in 0..nt {
            // Thomas algorithm along the rings.
            for k in 0..n_int {
                let i = k + 1;
                let diag = self.lower[i] + self.upper[i] + self.angular[i] * self.eigen[q];
                let sub = if k > 0 { -self.lower[i] } else { T::zero() };
                let sup = -self.upper[i];
                let rhs = spec[k * nt + q];
                if k == 0 {
                    cp[k] = sup / diag;
                    dp[k] = rhs / diag;
                } else {
                    let m = diag - sub * cp[k - 1];
                    cp[k] = sup / m;
                    dp[k] = (rhs - dp[k - 1] * sub) / m;
                }
            }
            for k in (0..n_int).rev() {
                let next = if k + 1 < n_int { spec[(k + 1) * nt + q] } else { Complex::new(T::zero(), T::zero()) };
                spec[k * nt + q] = dp[k] - next * cp[k];
            }
        }
        let scale = T::one() / T::of_usize(nt);
        out.iter_mut().for_each(|v| *v = T::zero());
        for i in 1..nr - 1 {
            let row = &mut spec[(i - 1) * nt..i * nt];
            self.ifft.process(row);
            for j in 0..nt {
                out[i * nt + j] = row[j].re * scale;
            }
        }
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinearSolve<T> {
    pub iterations: usize,
    /// `||b - A x|| / ||b||` at exit.
    pub relative_residual: T,
}

/// Solves `A x = b` on the interior by preconditioned conjugate gradients,
/// starting from zero.
pub(crate) fn pcg<T: Real>(
    grid: &ConformalGrid<T>,
    c: &Coefficients<T>,
    b: &[T],
    tolerance: T,
    max_iterations: usize,
) -> (Vec<T>, LinearSolve<T>) {
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let n = nr * nt;
    let pre = Preconditioner::new(grid, c);
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    r[..nt].fill(T::zero());
    r[(nr - 1) * nt..].fill(T::zero());
    let b_norm = dot(nt, nr, &r, &r).sqrt();
    if b_norm == T::zero() {
        return (
            x,
            LinearSolve {
                iterations: 0,
                relative_residual: T::zero(),
            },
        );
    }
    let mut z = vec![T::zero(); n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(nt, nr, &r, &z);
    let mut iterations = 0;
    let mut rel = T::one();
    while iterations < max_iterations {
        apply(grid, c, &p, &mut ap);
        let alpha = rz / dot(nt, nr, &p, &ap);
        for k in nt..(nr - 1) * nt {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        iterations += 1;
        rel = dot(nt, nr, &r, &r).sqrt() / b_norm;
        if rel <= tolerance {
            break;
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(nt, nr, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in nt..(nr - 1) * nt {
            p[k] = z[k] + beta * p[k];
        }
    }
    (
        x,
        LinearSolve {
            iterations,
            relative_residual: rel,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compressible::grid::build_grid;
    use crate::geometry::Body;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coefficients(grid: &ConformalGrid<f64>, rng: &mut ChaCha8Rng, spread: f64) -> Coefficients<f64> {
        let n = grid.len();
        Coefficients {
            radial: (0..n - grid.n_theta).map(|_| 1.0 + spread * rng.gen::<f64>()).collect(),
            angular: (0..n).map(|_| 2.0 + spread * rng.gen::<f64>()).collect(),
        }
    }

    #[test]
    fn preconditioner_inverts_ring_constant_operator() {
        let grid = build_grid(&Body::circle(1.0).unwrap(), 30.0, 20, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut c = coefficients(&grid, &mut rng, 0.0);
        for i in 0..grid.n_r - 1 {
            for j in 0..grid.n_theta {
                c.radial[i * 32 + j] = 1.0 + i as f64 * 0.1;
            }
        }
        let x: Vec<f64> = (0..grid.len())
            .map(|k| if !(32..19 * 32).contains(&k) { 0.0 } else { rng.gen::<f64>() - 0.5 })
            .collect();
        let mut ax = vec![0.0; grid.len()];
        apply(&grid, &c, &x, &mut ax);
        let pre = Preconditioner::new(&grid, &c);
        let mut back = vec![0.0; grid.len()];
        pre.apply(&ax, &mut back);
        for k in 32..19 * 32 {
            assert!((back[k] - x[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn pcg_solves_variable_coefficient_problem() {
        let grid = build_grid(&Body::circle(1.0).unwrap(), 30.0, 24, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = coefficients(&grid, &mut rng, 0.5);
        let x: Vec<f64> = (0..grid.len())
            .map(|k| if !(48..23 * 48).contains(&k) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        let mut b = vec![0.0; grid.len()];
        apply(&grid, &c, &x, &mut b);
        let (sol, info) = pcg(&grid, &c, &b, 1e-13, 200);
        assert!(info.relative_residual <= 1e-13);
        assert!(info.iterations < 60, "{} iterations", info.iterations);
        for k in 48..23 * 48 {
            assert!((sol[k] - x[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_vanishes_for_discrete_solution() {
        let grid = build_grid(&Body::circle(1.0).unwrap(), 30.0, 16, 16).unwrap();
        let c = Coefficients {
            radial: vec![1.0; grid.len() - 16],
            angular: vec![1.0; grid.len()],
        };
        let psi = vec![3.0; grid.len()];
        let mut r = vec![0.0f64; grid.len()];
        flux_residual(&grid, &c, &psi, &mut r);
        assert!(r.iter().all(|v| v.abs() < 1e-14));
    }
}
