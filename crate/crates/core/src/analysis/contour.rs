//! Closed line integrals of the complex velocity.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::Contour;
use crate::incompressible::{ComplexFlow, FlowField};
use crate::real::Real;

/// A quadrature value with the difference to a half-resolution rule as its
/// error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature<T> {
    pub value: T,
    pub error_estimate: T,
}

fn check<T: Real, F: FlowField<T> + ?Sized>(flow: &F, contour: &Contour<T>) -> Result<()> {
    if let Some(body) = flow.body() {
        contour.check_against(body)?;
    }
    Ok(())
}

fn integrate_w<T: Real, F: FlowField<T> + ?Sized>(flow: &F, contour: &Contour<T>, coarse: bool) -> Result<Complex<T>> {
    let terms = contour
        .nodes(coarse)
        .par_iter()
        .map(|&(z, dz)| flow.velocity(z).map(|w| w * dz))
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.into_iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
}

/// `closed integral of w dz = Gamma + i (outward mass flux)`, with separate
/// error estimates for the two parts.
pub fn velocity_integral<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    contour: &Contour<T>,
) -> Result<(Quadrature<T>, Quadrature<T>)> {
    check(flow, contour)?;
    let fine = integrate_w(flow, contour, false)?;
    let coarse = integrate_w(flow, contour, true)?;
    let err = fine - coarse;
    Ok((
        Quadrature {
            value: fine.re,
            error_estimate: err.re.abs(),
        },
        Quadrature {
            value: fine.im,
            error_estimate: err.im.abs(),
        },
    ))
}

/// Circulation `closed integral of v . dx`.
pub fn circulation<T: Real, F: FlowField<T> + ?Sized>(flow: &F, contour: &Contour<T>) -> Result<Quadrature<T>> {
    velocity_integral(flow, contour).map(|(g, _)| g)
}

/// Outward volume flux `closed integral of v . n ds`.
pub fn mass_flux<T: Real, F: FlowField<T> + ?Sized>(flow: &F, contour: &Contour<T>) -> Result<Quadrature<T>> {
    velocity_integral(flow, contour).map(|(_, m)| m)
}

/// Change of the complex potential after one counterclockwise loop, found by
/// following `W` continuously along the contour nodes.
pub fn potential_increment<T: Real>(flow: &ComplexFlow<T>, contour: &Contour<T>) -> Result<Complex<T>> {
    check(flow, contour)?;
    let c = flow.branch_point();
    let gamma = flow.far_field().circulation;
    let points: Vec<_> = contour.nodes(false).into_iter().map(|(z, _)| z).collect();
    let values = points
        .par_iter()
        .map(|&z| flow.potential(z))
        .collect::<Result<Vec<_>>>()?;
    let mut total = Complex::new(T::zero(), T::zero());
    for k in 0..points.len() {
        let j = (k + 1) % points.len();
        let (z0, z1) = (points[k] - c, points[j] - c);
        // Principal-log jump across the cut between consecutive nodes.
        let jump = (z1.ln() - z0.ln() - (z1 / z0).ln()).im / T::TAU();
        total += values[j] - values[k] - Complex::from(gamma * jump.round());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incompressible::FarField;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn circle_circulation_and_flux() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 2.0 * PI)).unwrap();
        let (g, m) = velocity_integral(&flow, &Contour::circle(Complex::new(0.0, 0.0), 2.0, 256)).unwrap();
        assert_relative_eq!(g.value, 2.0 * PI, epsilon = 1e-10);
        assert!(m.value.abs() < 1e-10);
        let m3 = mass_flux(&flow, &Contour::circle(Complex::new(0.0, 0.0), 3.0, 256)).unwrap();
        assert!(m3.value.abs() < 1e-10);
    }

    #[test]
    fn uniform_flow_has_no_circulation() {
        let flow = ComplexFlow::uniform(Complex::new(0.7f64, -0.2));
        let contour = Contour::Polyline {
            points: vec![Complex::new(0.0, 0.0), Complex::new(2.0, 0.0), Complex::new(1.0, 3.0)],
        };
        assert!(circulation(&flow, &contour).unwrap().value.abs() < 1e-13);
        assert!(mass_flux(&flow, &contour).unwrap().value.abs() < 1e-13);
    }

    #[test]
    fn contour_crossing_body_is_rejected() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        let contour = Contour::circle(Complex::new(1.0, 0.0), 0.5, 64);
        assert!(circulation(&flow, &contour).is_err());
    }

    #[test]
    fn loop_increment_of_potential() {
        let contour = Contour::circle(Complex::new(0.0, 0.0), 2.5, 128);
        let lifting = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 2.0 * PI)).unwrap();
        let dw = potential_increment(&lifting, &contour).unwrap();
        assert!((dw - 2.0 * PI).norm() < 1e-12, "{dw}");
        let plain = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        assert!(potential_increment(&plain, &contour).unwrap().norm() < 1e-12);
    }
}
