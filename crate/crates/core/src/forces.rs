//! Blasius contour force and Kutta-Joukowsky lift.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::Contour;
use crate::incompressible::FlowField;
use crate::real::Real;

/// Force on the body split along and across the free stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceResult<T> {
    /// Component along the free-stream direction.
    pub drag: T,
    /// Component 90 degrees counterclockwise from the free stream, so
    /// positive is upward for a stream in `+x`.
    pub lift: T,
    /// Cartesian force `(F_x, F_y)`.
    pub force: (T, T),
    /// Richardson estimate from a half-resolution rule.
    pub error_estimate: T,
    pub contour: Contour<T>,
    pub sign_convention: &'static str,
}

pub const SIGN_CONVENTION: &str = "F_x - i F_y = (i rho / 2) closed integral of w^2 dz; lift = -rho |w_inf| Gamma";

fn blasius_integral<T: Real, F: FlowField<T> + ?Sized>(flow: &F, contour: &Contour<T>, coarse: bool) -> Result<Complex<T>> {
    let terms = contour
        .nodes(coarse)
        .par_iter()
        .map(|&(z, dz)| flow.velocity(z).map(|w| w * w * dz))
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.into_iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
}

/// Force from `F_x - i F_y = (i rho/2) closed integral of w^2 dz`.
pub fn blasius_force<T: Real, F: FlowField<T> + ?Sized>(flow: &F, contour: &Contour<T>, rho_inf: T) -> Result<ForceResult<T>> {
    if let Some(body) = flow.body() {
        contour.check_against(body)?;
    }
    let f = |coarse| -> Result<Complex<T>> {
        let i = blasius_integral(flow, contour, coarse)?;
        Ok(Complex::new(T::zero(), rho_inf / T::of(2.0)) * i)
    };
    let fine = f(false)?;
    let coarse = f(true)?;
    let (fx, fy) = (fine.re, -fine.im);
    let w = flow.far_field().w_inf;
    // Stream direction is conj(w_inf) / |w_inf|.
    let dir = if w.norm() > T::zero() { w.conj() / w.norm() } else { Complex::new(T::one(), T::zero()) };
    let force = Complex::new(fx, fy);
    let along = force * dir.conj();
    Ok(ForceResult {
        drag: along.re,
        lift: along.im,
        force: (fx, fy),
        error_estimate: (fine - coarse).norm(),
        contour: contour.clone(),
        sign_convention: SIGN_CONVENTION,
    })
}

/// `L = -rho |w_inf| Gamma`.
pub fn kutta_joukowsky_lift<T: Real>(rho_inf: T, w_inf: Complex<T>, gamma: T) -> T {
    -rho_inf * w_inf.norm() * gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incompressible::{ComplexFlow, FarField};
    use std::f64::consts::PI;

    fn ring(r: f64) -> Contour<f64> {
        Contour::circle(Complex::new(0.0, 0.0), r, 1024)
    }

    #[test]
    fn symmetric_circle_feels_no_force() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        let f = blasius_force(&flow, &ring(2.0), 1.0).unwrap();
        assert!(f.drag.abs() < 1e-9 && f.lift.abs() < 1e-9);
    }

    #[test]
    fn lifting_circle_matches_residue() {
        // w^2 has residue 2 w_inf Gamma / (2 pi i); the integral is 2 w_inf Gamma,
        // so F_x - i F_y = i rho w_inf Gamma and F_y = -rho w_inf Gamma.
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 2.0 * PI)).unwrap();
        let f = blasius_force(&flow, &ring(2.0), 1.0).unwrap();
        assert!((f.lift + 2.0 * PI).abs() < 1e-9, "{}", f.lift);
        assert!(f.drag.abs() < 1e-9);
        assert!((f.lift - kutta_joukowsky_lift(1.0, Complex::new(1.0, 0.0), 2.0 * PI)).abs() < 1e-9);
        let g = blasius_force(&flow, &ring(5.0), 1.0).unwrap();
        assert!((g.lift - f.lift).abs() < 1e-9);
    }

    #[test]
    fn lift_is_bilinear() {
        let w = Complex::new(1.5f64, 0.0);
        let a = kutta_joukowsky_lift(1.2, w, 0.8);
        let b = kutta_joukowsky_lift(1.2, w * 2.0, 0.4);
        assert!((a - b).abs() < 1e-15);
        assert_eq!(kutta_joukowsky_lift(1.0, w, 0.0), 0.0);
    }

    #[test]
    fn inclined_stream_resolves_lift_across_it() {
        let w = FarField::from_speed_angle(1.0, 0.3, 1.0);
        let flow = ComplexFlow::circle(1.0, w).unwrap();
        let f = blasius_force(&flow, &ring(3.0), 1.0).unwrap();
        assert!(f.drag.abs() < 1e-9);
        assert!((f.lift + 1.0).abs() < 1e-9);
    }
}
