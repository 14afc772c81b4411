//! Subsonic compressible flow `div(h(|grad psi|^2/2) grad psi) = 0` around a
//! circle or flat plate, on a polar grid in the circle plane.
//!
//! In log-polar coordinates `s + i theta = log sigma` the divergence-form
//! operator keeps its shape; only `|grad psi|^2 = (psi_s^2 + psi_theta^2)/|J|^2`
//! with `J = sigma dz/d sigma` carries the map. The five-point weights
//! `1/(2(cosh ds - 1))` and `1/(2(1 - cos dtheta))` make the scheme exact for
//! `exp(+-s) sin(theta)`, `exp(+-s) cos(theta)` and `s`, so incompressible
//! circle and plate flows are discrete solutions.

mod grid;
mod linear;
mod study;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

pub use grid::{build_grid, ConformalGrid, GridMap};
pub use study::{refinement_study, RefinementLevel, RefinementStudy, StudyOptions};

use crate::error::{Error, Result};
use crate::gas::{BernoulliState, GasModel};
use crate::geometry::Point;
use crate::incompressible::FarField;
use crate::real::Real;
use linear::{flux_residual, pcg, Coefficients};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions<T> {
    /// Picard under-relaxation factor.
    pub relaxation: T,
    /// Relative nonlinear residual that ends the iteration.
    pub tolerance: T,
    pub max_iterations: usize,
    pub linear_tolerance: T,
    pub max_linear_iterations: usize,
    /// Diagnostic mode: clamp fluxes below the sonic limit instead of
    /// aborting. Results are marked non-physical.
    pub capped: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            relaxation: T::of(0.7),
            tolerance: T::of(1e-10),
            max_iterations: 300,
            linear_tolerance: T::of(1e-13),
            max_linear_iterations: 2000,
            capped: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    /// Relative nonlinear residual before this step's linear solve.
    pub residual: T,
    /// Relative residual of the frozen-coefficient solve.
    pub linear_residual: T,
    pub linear_iterations: usize,
    /// Largest `m / m_max` over all faces.
    pub max_flux_ratio: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompressibleSolution<T> {
    #[serde(skip)]
    pub grid: ConformalGrid<T>,
    pub far: FarField<T>,
    pub mach_inf: T,
    pub rho_inf: T,
    #[serde(skip)]
    pub psi: Vec<T>,
    /// Node densities; NaN at flagged nodes.
    #[serde(skip)]
    pub density: Vec<T>,
    #[serde(skip)]
    pub mach: Vec<T>,
    #[serde(skip)]
    pub velocity: Vec<Complex<T>>,
    pub log: Vec<IterationRecord<T>>,
    pub converged: bool,
    pub residual: T,
    pub max_mach: T,
    pub max_mach_location: (T, T),
    /// Largest face flux ratio `m / m_max` of the final iterate.
    pub max_flux_ratio: T,
    pub non_physical: bool,
}

impl<T: Real> CompressibleSolution<T> {
    /// Largest node Mach number within `radius` of any of `centers`.
    pub fn max_mach_near(&self, centers: &[Point<T>], radius: T) -> Option<(T, Point<T>)> {
        self.mach
            .iter()
            .zip(&self.grid.nodes)
            .filter(|(m, z)| m.is_finite() && centers.iter().any(|c| (**z - c).norm() <= radius))
            .fold(None, |best: Option<(T, Point<T>)>, (&m, &z)| match best {
                Some((b, _)) if b >= m => best,
                _ => Some((m, z)),
            })
    }
}

/// Weights of the fitted five-point scheme and gradient stencils.
#[derive(Debug, Clone, Copy)]
struct Stencil<T> {
    ws: T,
    wt: T,
    /// Radial face derivative divisor `2 sinh(ds/2)`.
    face_ds: T,
    /// Angular face derivative divisor `2 sin(dtheta/2)`.
    face_dt: T,
    /// Centered nodal divisors `2 sinh ds`, `2 sin dtheta`.
    node_ds: T,
    node_dt: T,
    cosh_half: T,
    cos_half: T,
    /// One-sided weights for `f(0), f(ds), f(2 ds)`.
    one_sided: [T; 3],
}

impl<T: Real> Stencil<T> {
    fn new(ds: T, dt: T) -> Self {
        let two = T::of(2.0);
        let half_ds = ds / two;
        let b = T::one() / half_ds.tanh();
        let c = -T::one() / (two * ds.sinh());
        Self {
            ws: T::one() / (two * (ds.cosh() - T::one())),
            wt: T::one() / (two * (T::one() - dt.cos())),
            face_ds: two * half_ds.sinh(),
            face_dt: two * (dt / two).sin(),
            node_ds: two * ds.sinh(),
            node_dt: two * dt.sin(),
            cosh_half: half_ds.cosh(),
            cos_half: (dt / two).cos(),
            one_sided: [-b - c, b, c],
        }
    }
}

/// `m = |grad psi|^2 / 2` on radial faces `(i + 1/2, j)` and angular faces
/// `(i, j + 1/2)` of interior rings.
fn face_fluxes<T: Real>(grid: &ConformalGrid<T>, st: &Stencil<T>, psi: &[T]) -> (Vec<T>, Vec<T>) {
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let half = T::of(0.5);
    let radial: Vec<T> = (0..nr - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..nt).map(move |j| {
                let k = i * nt + j;
                let (jp, jm) = ((j + 1) % nt, (j + nt - 1) % nt);
                let ps = (psi[k + nt] - psi[k]) / st.face_ds;
                let pt = ((psi[i * nt + jp] - psi[i * nt + jm]) + (psi[(i + 1) * nt + jp] - psi[(i + 1) * nt + jm]))
                    / (T::of(2.0) * st.node_dt * st.cosh_half);
                half * (ps * ps + pt * pt) / grid.radial_face_j2[k]
            })
        })
        .collect();
    let angular: Vec<T> = (0..nr)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..nt).map(move |j| {
                if i == 0 || i == nr - 1 {
                    return T::zero();
                }
                let k = i * nt + j;
                let jp = i * nt + (j + 1) % nt;
                let pt = (psi[jp] - psi[k]) / st.face_dt;
                let ps = ((psi[k + nt] - psi[k - nt]) + (psi[jp + nt] - psi[jp - nt])) / (T::of(2.0) * st.node_ds * st.cos_half);
                half * (ps * ps + pt * pt) / grid.angular_face_j2[k]
            })
        })
        .collect();
    (radial, angular)
}

/// Face coefficients `w / rho(m)` with the sonic guard.
fn coefficients<T: Real>(
    grid: &ConformalGrid<T>,
    st: &Stencil<T>,
    gas: &GasModel<T>,
    state: &BernoulliState<T>,
    psi: &[T],
    capped: bool,
    iteration: usize,
) -> Result<(Coefficients<T>, T, bool)> {
    let (radial_m, angular_m) = face_fluxes(grid, st, psi);
    let nt = grid.n_theta;
    let (mut worst, mut worst_face) = (T::zero(), (true, 0usize));
    for (k, &m) in radial_m.iter().enumerate() {
        if m > worst {
            worst = m;
            worst_face = (true, k);
        }
    }
    for (k, &m) in angular_m.iter().enumerate() {
        if m > worst {
            worst = m;
            worst_face = (false, k);
        }
    }
    let ratio = worst / state.flux_max;
    if !(ratio < T::one()) && !capped {
        let (i, j) = (worst_face.1 / nt, worst_face.1 % nt);
        let half = T::of(0.5);
        let sigma = if worst_face.0 {
            Complex::from_polar((grid.ds * (T::of_usize(i) + half)).exp(), grid.dtheta * T::of_usize(j))
        } else {
            Complex::from_polar((grid.ds * T::of_usize(i)).exp(), grid.dtheta * (T::of_usize(j) + half))
        };
        let z = grid.map.map(sigma);
        return Err(Error::SonicExcursion {
            x: z.re.to64(),
            y: z.im.to64(),
            flux_ratio: ratio.to64(),
            iteration,
        });
    }
    let cap = state.flux_max * (T::one() - T::of(1e-6));
    let clipped = ratio >= T::one();
    let h = |m: T| -> Result<T> { Ok(state.density_from_flux(gas, m.min(cap))?.inverse_density) };
    let radial = radial_m.par_iter().map(|&m| h(m).map(|v| v * st.ws)).collect::<Result<Vec<_>>>()?;
    let angular = angular_m.par_iter().map(|&m| h(m).map(|v| v * st.wt)).collect::<Result<Vec<_>>>()?;
    Ok((Coefficients { radial, angular }, ratio, clipped))
}

/// `||R|| / ||D psi||` with `D` the operator diagonal, over interior nodes.
fn relative_residual<T: Real>(grid: &ConformalGrid<T>, c: &Coefficients<T>, psi: &[T], r: &[T]) -> T {
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 1..nr - 1 {
        for j in 0..nt {
            let k = i * nt + j;
            let diag = c.radial[k] + c.radial[k - nt] + c.angular[k] + c.angular[i * nt + (j + nt - 1) % nt];
            num += r[k] * r[k];
            den += (diag * psi[k]).powi(2);
        }
    }
    if den == T::zero() {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Picard iteration for the compressible stream function.
pub fn solve_subsonic<T: Real>(
    grid: &ConformalGrid<T>,
    gas: &GasModel<T>,
    state: &BernoulliState<T>,
    far: FarField<T>,
    opts: &SolverOptions<T>,
) -> Result<CompressibleSolution<T>> {
    let speed = far.w_inf.norm();
    let rho_inf = state.density_from_speed(gas, speed)?;
    let mach_inf = gas.mach(speed, rho_inf)?;
    if !(mach_inf < T::one()) {
        return Err(Error::InvalidParameter(format!("free-stream Mach {mach_inf} is not subsonic")));
    }
    if !(opts.relaxation > T::zero() && opts.relaxation <= T::one()) {
        return Err(Error::InvalidParameter(format!("relaxation {} outside (0, 1]", opts.relaxation)));
    }
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let n = nr * nt;
    let st = Stencil::new(grid.ds, grid.dtheta);

    let mut psi = vec![T::zero(); n];
    for j in 0..nt {
        psi[(nr - 1) * nt + j] = rho_inf * grid.map.incompressible_stream(far, grid.sigma(nr - 1, j));
    }
    // Incompressible start.
    let laplace = Coefficients {
        radial: vec![st.ws; (nr - 1) * nt],
        angular: vec![st.wt; n],
    };
    let mut r = vec![T::zero(); n];
    flux_residual(grid, &laplace, &psi, &mut r);
    let (delta, _) = pcg(grid, &laplace, &r, opts.linear_tolerance, opts.max_linear_iterations);
    for k in nt..(nr - 1) * nt {
        psi[k] += delta[k];
    }

    let mut log = Vec::new();
    let mut converged = false;
    let mut residual = T::infinity();
    let mut max_flux_ratio = T::zero();
    let mut non_physical = false;
    for iteration in 0..=opts.max_iterations {
        let (c, ratio, clipped) = coefficients(grid, &st, gas, state, &psi, opts.capped, iteration)?;
        non_physical |= clipped;
        max_flux_ratio = ratio;
        flux_residual(grid, &c, &psi, &mut r);
        residual = relative_residual(grid, &c, &psi, &r);
        if residual <= opts.tolerance {
            log.push(IterationRecord {
                iteration,
                residual,
                linear_residual: T::zero(),
                linear_iterations: 0,
                max_flux_ratio: ratio,
            });
            converged = true;
            break;
        }
        if iteration == opts.max_iterations {
            break;
        }
        let (delta, info) = pcg(grid, &c, &r, opts.linear_tolerance, opts.max_linear_iterations);
        for k in nt..(nr - 1) * nt {
            psi[k] += opts.relaxation * delta[k];
        }
        log.push(IterationRecord {
            iteration,
            residual,
            linear_residual: info.relative_residual,
            linear_iterations: info.iterations,
            max_flux_ratio: ratio,
        });
    }
    if !converged {
        return Err(Error::IterationLimit {
            iterations: opts.max_iterations,
            residual: residual.to64(),
            history: log.iter().map(|r| r.residual.to64()).collect(),
        });
    }

    let (density, mach, velocity) = node_fields(grid, &st, gas, state, &psi, opts.capped)?;
    let mut max_mach = T::zero();
    let mut at = Complex::new(T::zero(), T::zero());
    for (k, &m) in mach.iter().enumerate() {
        if m.is_finite() && m > max_mach {
            max_mach = m;
            at = grid.nodes[k];
        }
    }
    Ok(CompressibleSolution {
        grid: grid.clone(),
        far,
        mach_inf,
        rho_inf,
        psi,
        density,
        mach,
        velocity,
        log,
        converged,
        residual,
        max_mach,
        max_mach_location: (at.re, at.im),
        max_flux_ratio,
        non_physical,
    })
}

type NodeFields<T> = (Vec<T>, Vec<T>, Vec<Complex<T>>);

/// Density, Mach number and complex velocity `w = i (psi_s - i psi_theta) / (rho J)`
/// at every node.
fn node_fields<T: Real>(
    grid: &ConformalGrid<T>,
    st: &Stencil<T>,
    gas: &GasModel<T>,
    state: &BernoulliState<T>,
    psi: &[T],
    capped: bool,
) -> Result<NodeFields<T>> {
    let (nr, nt) = (grid.n_r, grid.n_theta);
    let nan = T::nan();
    let results = (0..nr * nt)
        .into_par_iter()
        .map(|k| -> Result<(T, T, Complex<T>)> {
            if grid.is_flagged(k) {
                return Ok((nan, nan, Complex::new(nan, nan)));
            }
            let (i, j) = (k / nt, k % nt);
            let [a, b, c] = st.one_sided;
            let ps = if i == 0 {
                a * psi[k] + b * psi[k + nt] + c * psi[k + 2 * nt]
            } else if i == nr - 1 {
                -(a * psi[k] + b * psi[k - nt] + c * psi[k - 2 * nt])
            } else {
                (psi[k + nt] - psi[k - nt]) / st.node_ds
            };
            let pt = if i == 0 {
                T::zero()
            } else {
                (psi[i * nt + (j + 1) % nt] - psi[i * nt + (j + nt - 1) % nt]) / st.node_dt
            };
            let jac = grid.jacobian[k];
            let m = T::of(0.5) * (ps * ps + pt * pt) / jac.norm_sqr();
            if !(m < state.flux_max) && !capped {
                let z = grid.nodes[k];
                return Err(Error::SonicExcursion {
                    x: z.re.to64(),
                    y: z.im.to64(),
                    flux_ratio: (m / state.flux_max).to64(),
                    iteration: usize::MAX,
                });
            }
            let rho = state.density_from_flux(gas, m.min(state.flux_max * (T::one() - T::of(1e-6))))?.density;
            let w = Complex::new(T::zero(), T::one()) * Complex::new(ps, -pt) / (jac * rho);
            let mach = gas.mach(w.norm(), rho)?;
            Ok((rho, mach, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut density = Vec::with_capacity(results.len());
    let mut mach = Vec::with_capacity(results.len());
    let mut velocity = Vec::with_capacity(results.len());
    for (r, m, w) in results {
        density.push(r);
        mach.push(m);
        velocity.push(w);
    }
    Ok((density, mach, velocity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Body;

    fn air(mach: f64) -> (GasModel<f64>, BernoulliState<f64>, FarField<f64>) {
        let gas = GasModel::air();
        let state = BernoulliState::from_free_stream(&gas, mach).unwrap();
        let speed = state.speed_at_unit_density(&gas).unwrap();
        (gas, state, FarField::new(Complex::new(speed, 0.0), 0.0))
    }

    #[test]
    fn one_sided_weights_are_exact_for_exponentials() {
        let st = Stencil::new(0.1, 0.1);
        let [a, b, c] = st.one_sided;
        for (f, df) in [(f64::exp as fn(f64) -> f64, 1.0), (|s: f64| (-s).exp(), -1.0), (|_s: f64| 1.0, 0.0)] {
            let approx = a * f(0.0) + b * f(0.1) + c * f(0.2);
            assert!((approx - df).abs() < 1e-12);
        }
    }

    #[test]
    fn horizontal_plate_uniform_flow_is_a_fixed_point() {
        let (gas, state, far) = air(0.3);
        let grid = build_grid(&Body::flat_plate(4.0, 0.0).unwrap(), 80.0, 32, 64).unwrap();
        let sol = solve_subsonic(&grid, &gas, &state, far, &SolverOptions::default()).unwrap();
        assert!(sol.residual < 1e-12, "{}", sol.residual);
        let u = far.w_inf.re;
        for (k, z) in grid.nodes.iter().enumerate() {
            assert!((sol.psi[k] - u * z.im).abs() < 1e-10 * u * 80.0);
            if !grid.is_flagged(k) {
                assert!((sol.velocity[k] - u).norm() < 1e-10, "{k}: {}", sol.velocity[k]);
                assert!((sol.mach[k] - 0.3).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn circle_speeds_up_under_compressibility() {
        let (gas, state, far) = air(0.3);
        let grid = build_grid(&Body::circle(1.0).unwrap(), 50.0, 48, 96).unwrap();
        let sol = solve_subsonic(&grid, &gas, &state, far, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        let top = sol.velocity[grid.index(0, 24)].norm() / far.w_inf.norm();
        assert!(top > 2.0 && top < 2.3, "{top}");
        assert!(sol.log.iter().all(|r| r.linear_residual <= 1e-12));
    }

    #[test]
    fn supersonic_free_stream_is_rejected() {
        let gas = GasModel::air();
        let state = BernoulliState::from_free_stream(&gas, 0.5).unwrap();
        let grid = build_grid(&Body::circle(1.0).unwrap(), 50.0, 16, 16).unwrap();
        let limit = state.limit_speed * 0.99;
        let far = FarField::new(Complex::new(limit, 0.0), 0.0);
        assert!(solve_subsonic(&grid, &gas, &state, far, &SolverOptions::default()).is_err());
    }

    #[test]
    fn circle_near_critical_mach_aborts_with_location() {
        let (gas, state, far) = air(0.6);
        let grid = build_grid(&Body::circle(1.0).unwrap(), 50.0, 32, 64).unwrap();
        match solve_subsonic(&grid, &gas, &state, far, &SolverOptions::default()) {
            Err(Error::SonicExcursion { y, flux_ratio, .. }) => {
                assert!(flux_ratio >= 1.0);
                assert!(y.abs() > 0.5);
            }
            other => panic!("expected a sonic excursion, got {other:?}"),
        }
    }
}
