//! Local corner expansion `psi = sum a_k r^(k pi/beta) sin(k pi theta/beta)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{probe_ring_with_margin, Corner, ProbePoint};
use crate::incompressible::FlowField;
use crate::linalg::least_squares;
use crate::real::Real;

/// Fits with a larger scaled condition number are rejected.
pub const MAX_FIT_CONDITION: f64 = 1e8;

/// Sign behaviour of `psi` near a corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignAttainment {
    Both,
    PositiveOnly,
    NegativeOnly,
    Indeterminate,
}

/// Settings for corner fits and sign checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerFitOptions<T> {
    /// Explicit ring radii; `None` derives them from the corner reach.
    pub radii: Option<Vec<T>>,
    /// Outer and inner default radius as fractions of the corner reach.
    pub outer_fraction: T,
    pub inner_fraction: T,
    pub rings: usize,
    /// Innermost ring of the velocity-exponent estimate, as a fraction of
    /// the reach; it is never placed closer than `exponent_resolution_multiple`
    /// times the flow's resolution length. The outer ring is ten times larger.
    pub exponent_inner_fraction: T,
    pub exponent_resolution_multiple: T,
    pub samples: usize,
    /// Number of expansion modes in the least-squares fit.
    pub modes: usize,
    /// Fraction of the wedge kept away from each wall.
    pub wall_margin: T,
    /// `tol_a1`: singular when `|a1| > tol_a1 |w_inf| R^(1 - pi/beta)`.
    pub a1_tolerance: T,
    /// Noise floor for sign checks, relative to `|w_inf| R`.
    pub psi_tolerance: T,
}

impl<T: Real> Default for CornerFitOptions<T> {
    fn default() -> Self {
        Self {
            radii: None,
            outer_fraction: T::of(0.02),
            inner_fraction: T::of(0.002),
            rings: 4,
            exponent_inner_fraction: T::of(4e-5),
            exponent_resolution_multiple: T::of(4.0),
            samples: 64,
            modes: 6,
            wall_margin: T::of(crate::geometry::DEFAULT_WALL_MARGIN),
            a1_tolerance: T::of(1e-3),
            psi_tolerance: T::of(1e-10),
        }
    }
}

impl<T: Real> CornerFitOptions<T> {
    pub fn radii_for(&self, corner: &Corner<T>) -> Result<Vec<T>> {
        if let Some(r) = &self.radii {
            return Ok(r.clone());
        }
        if self.rings < 2 || !(self.inner_fraction > T::zero() && self.inner_fraction < self.outer_fraction) {
            return Err(Error::InvalidParameter("corner fit needs at least two nested rings".into()));
        }
        let ratio = (self.inner_fraction / self.outer_fraction).powf(T::one() / T::of_usize(self.rings - 1));
        Ok((0..self.rings)
            .map(|k| corner.reach * self.outer_fraction * ratio.powi(k as i32))
            .collect())
    }

    /// Rings for the velocity exponent: one decade, as close to the corner
    /// as the flow's resolution allows.
    pub fn exponent_radii_for(&self, corner: &Corner<T>, resolution: T) -> Result<Vec<T>> {
        if let Some(r) = &self.radii {
            return Ok(r.clone());
        }
        let inner = (corner.reach * self.exponent_inner_fraction).max(resolution * self.exponent_resolution_multiple);
        let rings = self.rings.max(2);
        let step = T::of(0.1).powf(T::one() / T::of_usize(rings - 1));
        Ok((0..rings).map(|k| inner * T::of(10.0) * step.powi(k as i32)).collect())
    }

    /// Same settings with every radius halved.
    pub fn halved(&self) -> Self {
        let half = T::of(0.5);
        Self {
            radii: self.radii.as_ref().map(|r| r.iter().map(|&x| x * half).collect()),
            outer_fraction: self.outer_fraction * half,
            inner_fraction: self.inner_fraction * half,
            exponent_inner_fraction: self.exponent_inner_fraction * half,
            ..self.clone()
        }
    }
}

/// Fitted local expansion at one corner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerFit<T> {
    /// Coefficients `a_1 .. a_K`.
    pub coefficients: Vec<T>,
    /// Standard error of `a_1` from the fit residual.
    pub a1_std_error: T,
    pub condition: T,
    /// Root-mean-square fit residual.
    pub residual_rms: T,
    pub radii: Vec<T>,
}

impl<T: Real> CornerFit<T> {
    pub fn a1(&self) -> T {
        self.coefficients[0]
    }
}

/// Everything measured at one corner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerReport<T> {
    pub corner_id: usize,
    pub vertex: (T, T),
    pub beta: T,
    /// Log-log slope of the largest `|w|` per ring against the ring radius.
    pub fitted_exponent: T,
    /// `pi/beta - 1`.
    pub expected_exponent: T,
    pub a1_estimate: T,
    pub a1_std_error: T,
    /// `|a1|` above which the corner counts as singular.
    pub a1_threshold: T,
    pub singular: bool,
    pub sign_attainment: SignAttainment,
    pub fit: CornerFit<T>,
}

fn sample<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    corner: &Corner<T>,
    radii: &[T],
    samples: usize,
    margin: T,
) -> Result<(Vec<ProbePoint<T>>, Vec<T>)> {
    let points = probe_ring_with_margin(corner, radii, samples, margin)?;
    let psi = points
        .par_iter()
        .map(|p| flow.stream(p.z))
        .collect::<Result<Vec<_>>>()?;
    Ok((points, psi))
}

/// Least-squares fit of the local expansion to sampled `psi`.
pub fn fit_coefficients<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    corner: &Corner<T>,
    opts: &CornerFitOptions<T>,
) -> Result<CornerFit<T>> {
    let radii = opts.radii_for(corner)?;
    let k = opts.modes.max(1);
    let (points, psi) = sample(flow, corner, &radii, opts.samples, opts.wall_margin)?;
    let rows = points.len();
    if rows < 2 * k {
        return Err(Error::InvalidParameter(format!(
            "corner fit with {k} modes needs more than {rows} samples"
        )));
    }
    let r_ref = radii.iter().copied().fold(T::zero(), T::max);
    let nu = T::PI() / corner.beta;
    let mut a = Vec::with_capacity(rows * k);
    for p in &points {
        for m in 1..=k {
            let e = nu * T::of_usize(m);
            a.push((p.r / r_ref).powf(e) * (e * p.theta).sin());
        }
    }
    let ls = least_squares(rows, k, &a, &psi)?;
    if !(ls.condition < T::of(MAX_FIT_CONDITION)) {
        return Err(Error::FitQuality {
            condition: ls.condition.to64(),
        });
    }
    let dof = T::of_usize((rows - k).max(1));
    let sigma = ls.residual_norm / dof.sqrt();
    let coefficients = ls
        .x
        .iter()
        .enumerate()
        .map(|(m, &c)| c / r_ref.powf(nu * T::of_usize(m + 1)))
        .collect();
    Ok(CornerFit {
        coefficients,
        a1_std_error: sigma * ls.covariance_diag[0].sqrt() / r_ref.powf(nu),
        condition: ls.condition,
        residual_rms: ls.residual_norm / T::of_usize(rows).sqrt(),
        radii,
    })
}

/// Log-log slope of `max |w|` per ring against the ring radius.
pub fn velocity_exponent<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    corner: &Corner<T>,
    radii: &[T],
    samples: usize,
    margin: T,
) -> Result<T> {
    let points = probe_ring_with_margin(corner, radii, samples, margin)?;
    let speeds = points
        .par_iter()
        .map(|p| flow.velocity(p.z).map(|w| w.norm()))
        .collect::<Result<Vec<_>>>()?;
    let mut peak = vec![T::zero(); radii.len()];
    for (p, s) in points.iter().zip(speeds) {
        peak[p.ring] = peak[p.ring].max(s);
    }
    let xs: Vec<T> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = peak.iter().map(|v| v.max(T::min_positive_value()).ln()).collect();
    let n = T::of_usize(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Sign verdict from `samples` points on each of the given rings.
pub fn sign_attainment<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    corner: &Corner<T>,
    radii: &[T],
    samples: usize,
    margin: T,
    psi_tolerance: T,
) -> Result<SignAttainment> {
    let (points, psi) = sample(flow, corner, radii, samples, margin)?;
    let mut verdicts = Vec::with_capacity(radii.len());
    for ring in 0..radii.len() {
        let vals = points.iter().zip(&psi).filter(|(p, _)| p.ring == ring).map(|(_, &v)| v);
        let (lo, hi) = vals.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let neg = lo < -psi_tolerance;
        let pos = hi > psi_tolerance;
        verdicts.push(match (pos, neg) {
            (true, true) => SignAttainment::Both,
            (true, false) => SignAttainment::PositiveOnly,
            (false, true) => SignAttainment::NegativeOnly,
            (false, false) => SignAttainment::Indeterminate,
        });
    }
    let first = verdicts.first().copied().unwrap_or(SignAttainment::Indeterminate);
    Ok(if verdicts.iter().all(|&v| v == first) {
        first
    } else {
        SignAttainment::Indeterminate
    })
}

/// Threshold on `|a1|` for the singular verdict.
pub fn a1_threshold<T: Real>(corner: &Corner<T>, speed: T, length: T, tolerance: T) -> T {
    tolerance * speed * length.powf(T::one() - T::PI() / corner.beta)
}

/// Fits corner `corner_id` of the flow's body.
pub fn fit_corner<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    corner_id: usize,
    opts: &CornerFitOptions<T>,
) -> Result<CornerReport<T>> {
    let body = flow
        .body()
        .ok_or_else(|| Error::InvalidParameter("flow has no body to fit corners on".into()))?;
    let corner = body.corners.get(corner_id).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "corner {corner_id} does not exist (body has {})",
            body.corners.len()
        ))
    })?;
    fit_corner_at(flow, corner_id, corner, opts)
}

/// As [`fit_corner`], for an explicitly given corner.
pub fn fit_corner_at<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    corner_id: usize,
    corner: &Corner<T>,
    opts: &CornerFitOptions<T>,
) -> Result<CornerReport<T>> {
    let fit = fit_coefficients(flow, corner, opts)?;
    let exponent_radii = opts.exponent_radii_for(corner, flow.resolution())?;
    let fitted_exponent = velocity_exponent(flow, corner, &exponent_radii, opts.samples, opts.wall_margin)?;
    let speed = flow.far_field().w_inf.norm();
    let a1_threshold = a1_threshold(corner, speed, flow.length_scale(), opts.a1_tolerance);
    let psi_tol = opts.psi_tolerance * speed.max(T::one()) * flow.length_scale();
    let sign = sign_attainment(flow, corner, &fit.radii[fit.radii.len().saturating_sub(3)..], opts.samples, opts.wall_margin, psi_tol)?;
    Ok(CornerReport {
        corner_id,
        vertex: (corner.vertex.re, corner.vertex.im),
        beta: corner.beta,
        fitted_exponent,
        expected_exponent: corner.singular_exponent(),
        a1_estimate: fit.a1(),
        a1_std_error: fit.a1_std_error,
        a1_threshold,
        singular: fit.a1().abs() > a1_threshold,
        sign_attainment: sign,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;
    use crate::geometry::Point;
    use crate::incompressible::FarField;
    use num_complex::Complex;
    use std::f64::consts::PI;

    /// `psi = Im(sum a_k zeta^(k pi/beta))` in corner-local coordinates.
    struct Synthetic {
        corner: Corner<f64>,
        coeffs: Vec<f64>,
    }

    impl FlowField<f64> for Synthetic {
        fn velocity(&self, z: Point<f64>) -> Result<Complex<f64>> {
            let (r, th) = self.corner.local_polar(z);
            let nu = PI / self.corner.beta;
            let mut dw = Complex::new(0.0, 0.0);
            for (k, a) in self.coeffs.iter().enumerate() {
                let e = nu * (k + 1) as f64;
                dw += Complex::from_polar(a * e * r.powf(e - 1.0), (e - 1.0) * th);
            }
            Ok(dw / self.corner.side_directions[0])
        }
        fn stream(&self, z: Point<f64>) -> Result<f64> {
            let (r, th) = self.corner.local_polar(z);
            let nu = PI / self.corner.beta;
            Ok(self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * r.powf(nu * (k + 1) as f64) * (nu * (k + 1) as f64 * th).sin())
                .sum())
        }
        fn far_field(&self) -> FarField<f64> {
            FarField::new(Complex::new(1.0, 0.0), 0.0)
        }
    }

    fn corner(beta: f64) -> Corner<f64> {
        Corner::new(Complex::new(0.3, -0.2), Complex::from_polar(1.0, 0.4), beta, 1.0).unwrap()
    }

    fn opts() -> CornerFitOptions<f64> {
        CornerFitOptions {
            radii: Some(vec![0.1, 0.05, 0.02, 0.01]),
            ..Default::default()
        }
    }

    #[test]
    fn single_mode_three_halves_pi() {
        let c = corner(1.5 * PI);
        let flow = Synthetic { corner: c, coeffs: vec![1.0] };
        let report = fit_corner_at(&flow, 0, &c, &opts()).unwrap();
        assert!((report.a1_estimate - 1.0).abs() < 1e-10);
        assert!((report.fitted_exponent + 1.0 / 3.0).abs() < 1e-10);
        assert!(report.singular);
    }

    #[test]
    fn a1_only_field_keeps_one_sign_on_the_wedge() {
        // sin(2 theta / 3) > 0 throughout 0 < theta < 3 pi / 2.
        let c = corner(1.5 * PI);
        let flow = Synthetic { corner: c, coeffs: vec![1.0] };
        let v = sign_attainment(&flow, &c, &[0.1, 0.05, 0.02], 64, 0.05, 1e-12).unwrap();
        assert_eq!(v, SignAttainment::PositiveOnly);
        let flow = Synthetic { corner: c, coeffs: vec![-2.0] };
        let v = sign_attainment(&flow, &c, &[0.1, 0.05, 0.02], 64, 0.05, 1e-12).unwrap();
        assert_eq!(v, SignAttainment::NegativeOnly);
    }

    #[test]
    fn regular_corner_changes_sign() {
        let c = corner(1.5 * PI);
        let flow = Synthetic { corner: c, coeffs: vec![0.0, 1.0, 0.3] };
        let report = fit_corner_at(&flow, 0, &c, &opts()).unwrap();
        assert!(!report.singular);
        assert_eq!(report.sign_attainment, SignAttainment::Both);
    }

    #[test]
    fn zero_field_is_indeterminate() {
        let c = corner(2.0 * PI);
        let flow = Synthetic { corner: c, coeffs: vec![0.0] };
        let v = sign_attainment(&flow, &c, &[0.1, 0.05], 64, 0.05, 1e-12).unwrap();
        assert_eq!(v, SignAttainment::Indeterminate);
    }

    #[test]
    fn two_mode_recovery_across_angles() {
        for &beta in &[1.25 * PI, 1.5 * PI, 1.75 * PI, 2.0 * PI] {
            let c = corner(beta);
            let flow = Synthetic { corner: c, coeffs: vec![0.7, -1.3] };
            let fit = fit_coefficients(&flow, &c, &opts()).unwrap();
            assert!((fit.a1() - 0.7).abs() < 0.7e-6, "beta {beta}: {}", fit.a1());
        }
    }

    #[test]
    fn rings_outside_reach_are_clipped() {
        let c = corner(1.5 * PI);
        let flow = Synthetic { corner: c, coeffs: vec![1.0] };
        let o = CornerFitOptions {
            radii: Some(vec![2.0, 1.0, 0.5]),
            ..Default::default()
        };
        assert!(matches!(fit_corner_at(&flow, 0, &c, &o), Err(Error::GeometryClip { .. })));
    }
}
