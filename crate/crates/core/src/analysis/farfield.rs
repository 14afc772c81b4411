//! Laurent fit `w ~ c0 + c1/z + c2/z^2` on rings far from the body.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::incompressible::FlowField;
use crate::linalg::least_squares;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaurentFit<T> {
    pub c0: Complex<T>,
    pub c1: Complex<T>,
    pub c2: Complex<T>,
    /// RMS misfit of the samples, relative to `|c0|`.
    pub residual: T,
    /// `-2 pi Im c1`.
    pub gamma_estimate: T,
    /// `Re c1`; nonzero values mean net mass flux.
    pub mass_flux_coefficient: T,
}

/// Radii below this multiple of the body circumradius are rejected.
pub const MIN_RADIUS_FACTOR: f64 = 4.0;

/// Default contamination tolerance on the relative residual.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

pub fn farfield_fit<T: Real, F: FlowField<T> + ?Sized>(flow: &F, radii: &[T], samples: usize) -> Result<LaurentFit<T>> {
    farfield_fit_with_tolerance(flow, radii, samples, T::of(DEFAULT_TOLERANCE))
}

pub fn farfield_fit_with_tolerance<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    radii: &[T],
    samples: usize,
    tolerance: T,
) -> Result<LaurentFit<T>> {
    if radii.is_empty() || samples < 8 {
        return Err(Error::InvalidParameter("far-field fit needs radii and at least 8 samples".into()));
    }
    let (center, min_radius) = match flow.body() {
        Some(b) => (b.centroid(), b.circumradius() * T::of(MIN_RADIUS_FACTOR)),
        None => (Complex::new(T::zero(), T::zero()), T::zero()),
    };
    if let Some(&r) = radii.iter().find(|&&r| !(r >= min_radius && r.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "far-field radius {r} is inside {MIN_RADIUS_FACTOR} body circumradii"
        )));
    }
    let points: Vec<Complex<T>> = radii
        .iter()
        .flat_map(|&r| {
            (0..samples).map(move |k| Complex::from_polar(r, T::TAU() * T::of_usize(k) / T::of_usize(samples)))
        })
        .collect();
    // Expansion about the origin, as in the Laurent series of w.
    let values = points
        .par_iter()
        .map(|&z| flow.velocity(z + center))
        .collect::<Result<Vec<_>>>()?;
    let scale = radii.iter().copied().fold(T::infinity(), T::min);
    let n = points.len();
    let mut a = Vec::with_capacity(2 * n * 6);
    let mut b = Vec::with_capacity(2 * n);
    for (z, w) in points.iter().zip(&values) {
        let basis = [Complex::from(T::one()), Complex::from(scale) / z, Complex::from(scale * scale) / (z * z)];
        // Real and imaginary rows of sum (x_k + i y_k) basis_k.
        for part in 0..2 {
            for e in &basis {
                let (re, im) = (e.re, e.im);
                if part == 0 {
                    a.push(re);
                    a.push(-im);
                } else {
                    a.push(im);
                    a.push(re);
                }
            }
            b.push(if part == 0 { w.re } else { w.im });
        }
    }
    let ls = least_squares(2 * n, 6, &a, &b)?;
    let c0 = Complex::new(ls.x[0], ls.x[1]);
    let c1 = Complex::new(ls.x[2], ls.x[3]) * scale;
    let c2 = Complex::new(ls.x[4], ls.x[5]) * scale * scale;
    let residual = ls.residual_norm / T::of_usize(n).sqrt() / c0.norm().max(T::min_positive_value());
    if !(residual <= tolerance) {
        return Err(Error::FarFieldContamination {
            residual: residual.to64(),
            tolerance: tolerance.to64(),
        });
    }
    Ok(LaurentFit {
        c0,
        c1,
        c2,
        residual,
        gamma_estimate: -T::TAU() * c1.im,
        mass_flux_coefficient: c1.re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incompressible::{ComplexFlow, FarField};
    use std::f64::consts::PI;

    #[test]
    fn circle_coefficients() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 2.0 * PI)).unwrap();
        let fit = farfield_fit(&flow, &[5.0, 10.0, 20.0], 64).unwrap();
        assert!((fit.c0 - 1.0).norm() < 1e-12);
        assert!((fit.c1 - Complex::new(0.0, -1.0)).norm() < 1e-12);
        assert!((fit.c2 + 1.0).norm() < 1e-10);
        assert!((fit.gamma_estimate - 2.0 * PI).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn uniform_flow_coefficients() {
        let w = Complex::new(0.8, -0.3);
        let fit = farfield_fit(&ComplexFlow::uniform(w), &[1.0, 2.0], 32).unwrap();
        assert!((fit.c0 - w).norm() < 1e-14);
        assert!(fit.c1.norm() < 1e-14);
    }

    #[test]
    fn near_radii_are_rejected() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        assert!(farfield_fit(&flow, &[2.0, 10.0], 64).is_err());
    }

    #[test]
    fn tail_terms_trigger_contamination() {
        let flow = ComplexFlow::plate(4.0, 0.5, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        let err = farfield_fit_with_tolerance(&flow, &[8.0, 9.0], 64, 1e-8).unwrap_err();
        assert!(matches!(err, Error::FarFieldContamination { .. }));
    }
}
