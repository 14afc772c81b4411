//! Closed-form incompressible flows: the circle and its Joukowsky image, the
//! flat plate.

use num_complex::Complex;
use serde::Serialize;

use super::FarField;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::real::Real;

/// Flow around the circle `|z| = radius` centered at the origin:
/// `w = w_inf - conj(w_inf) R^2 / z^2 + Gamma / (2 pi i z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleFlow<T> {
    pub radius: T,
    pub far: FarField<T>,
}

impl<T: Real> CircleFlow<T> {
    pub fn new(radius: T, far: FarField<T>) -> Result<Self> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!("circle radius {radius}")));
        }
        Ok(Self { radius, far })
    }

    fn check(&self, z: Point<T>) -> Result<()> {
        if z.norm() < self.radius * (T::one() - T::of(64.0) * T::epsilon()) {
            return Err(Error::Domain(format!("point {z} lies inside the circle")));
        }
        if z.norm() == T::zero() {
            return Err(Error::Domain("origin".into()));
        }
        Ok(())
    }

    pub fn velocity(&self, z: Point<T>) -> Result<Complex<T>> {
        self.check(z)?;
        let w = self.far.w_inf;
        let r2 = self.radius * self.radius;
        Ok(w - w.conj() * r2 / (z * z) + vortex_velocity(self.far.circulation, z))
    }

    /// Stream function, zero on the circle.
    pub fn stream(&self, z: Point<T>) -> Result<T> {
        self.check(z)?;
        let w = self.far.w_inf;
        let r2 = self.radius * self.radius;
        let doublet = (w * z + w.conj() * r2 / z).im;
        Ok(doublet - self.far.circulation / T::TAU() * (z.norm() / self.radius).ln())
    }

    /// Complex potential with the logarithm's branch cut on the negative real
    /// axis.
    pub fn potential(&self, z: Point<T>) -> Result<Complex<T>> {
        self.check(z)?;
        let w = self.far.w_inf;
        let r2 = self.radius * self.radius;
        Ok(w * z + w.conj() * r2 / z + vortex_potential(self.far.circulation, z))
    }
}

#[inline]
pub(crate) fn vortex_velocity<T: Real>(circulation: T, z: Complex<T>) -> Complex<T> {
    Complex::new(T::zero(), -circulation / T::TAU()) / z
}

#[inline]
pub(crate) fn vortex_potential<T: Real>(circulation: T, z: Complex<T>) -> Complex<T> {
    Complex::new(T::zero(), -circulation / T::TAU()) * z.ln()
}

/// Flow around a flat plate of length `chord`, obtained from circle flow
/// through `z = exp(-i alpha) a (sigma + 1/sigma)` with `a = chord / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateFlow<T> {
    pub chord: T,
    pub alpha: T,
    pub far: FarField<T>,
}

impl<T: Real> PlateFlow<T> {
    pub fn new(chord: T, alpha: T, far: FarField<T>) -> Result<Self> {
        if !(chord > T::zero() && chord.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidGeometry(format!("flat plate chord {chord}")));
        }
        Ok(Self { chord, alpha, far })
    }

    fn a(&self) -> T {
        self.chord / T::of(4.0)
    }

    fn rotation(&self) -> Complex<T> {
        Complex::from_polar(T::one(), -self.alpha)
    }

    /// Far-field velocity of the equivalent circle flow in the sigma plane.
    fn sigma_stream(&self) -> Complex<T> {
        self.far.w_inf * self.rotation() * self.a()
    }

    /// Exterior preimage `sigma` (with `|sigma| > 1`) of a fluid point.
    pub fn preimage(&self, z: Point<T>) -> Result<Complex<T>> {
        let zeta = z / self.rotation();
        let two_a = self.a() * T::of(2.0);
        let on_slit_tol = T::of(64.0) * T::epsilon() * self.chord;
        if zeta.im.abs() <= on_slit_tol && zeta.re.abs() <= two_a + on_slit_tol {
            return Err(Error::Domain(format!("point {z} lies on the plate")));
        }
        // Product of principal roots keeps the branch cut on the slit itself.
        let root = (zeta - two_a).sqrt() * (zeta + two_a).sqrt();
        Ok((zeta + root) / two_a)
    }

    /// Plate point `z(sigma)`.
    pub fn map(&self, sigma: Complex<T>) -> Point<T> {
        self.rotation() * (sigma + sigma.inv()) * self.a()
    }

    /// `dz / d sigma`.
    pub fn map_derivative(&self, sigma: Complex<T>) -> Complex<T> {
        self.rotation() * (Complex::from(T::one()) - (sigma * sigma).inv()) * self.a()
    }

    /// `dW / d sigma` of the circle-plane flow.
    pub fn sigma_velocity(&self, sigma: Complex<T>) -> Complex<T> {
        let v = self.sigma_stream();
        v - v.conj() / (sigma * sigma) + vortex_velocity(self.far.circulation, sigma)
    }

    /// Complex velocity by the chain rule `w = W_sigma / z_sigma`. At an
    /// edge preimage the velocity is infinite unless the numerator vanishes.
    pub fn velocity(&self, z: Point<T>) -> Result<Complex<T>> {
        let sigma = self.preimage(z)?;
        Ok(self.sigma_velocity(sigma) / self.map_derivative(sigma))
    }

    pub fn stream(&self, z: Point<T>) -> Result<T> {
        let sigma = self.preimage(z)?;
        let v = self.sigma_stream();
        let doublet = (v * sigma + v.conj() / sigma).im;
        Ok(doublet - self.far.circulation / T::TAU() * sigma.norm().ln())
    }

    /// Complex potential; the logarithm is written as `log z` plus a
    /// single-valued remainder so the branch cut lies on the negative real
    /// axis from the plate center.
    pub fn potential(&self, z: Point<T>) -> Result<Complex<T>> {
        let sigma = self.preimage(z)?;
        let v = self.sigma_stream();
        let s2 = sigma * sigma;
        // log(sigma / z) = i alpha - ln a + Log(sigma^2 / (sigma^2 + 1))
        let log_ratio = Complex::new(-self.a().ln(), self.alpha) + (s2 / (s2 + T::one())).ln();
        let log_sigma = log_ratio + z.ln();
        Ok(v * sigma + v.conj() / sigma + Complex::new(T::zero(), -self.far.circulation / T::TAU()) * log_sigma)
    }

    /// Circulation that makes the velocity bounded at the given edge
    /// (`true` for the trailing edge, preimage `sigma = 1`).
    pub fn edge_regular_circulation(&self, trailing: bool) -> T {
        let s = if trailing { T::one() } else { -T::one() };
        let v = self.sigma_stream();
        // v - conj(v) + Gamma / (2 pi i s) = 0 at sigma = s
        let jump = v - v.conj();
        // Gamma = -2 pi i s (v - conj v), real because v - conj v is imaginary.
        (Complex::new(T::zero(), -T::TAU() * s) * jump).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn far(w: f64, gamma: f64) -> FarField<f64> {
        FarField::new(Complex::new(w, 0.0), gamma)
    }

    #[test]
    fn circle_formula_values() {
        let flow = CircleFlow::new(1.0, far(1.0, 0.0)).unwrap();
        assert!(flow.velocity(Complex::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let top = flow.velocity(Complex::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(top.re, 2.0, epsilon = 1e-15);
        assert_relative_eq!(top.im, 0.0, epsilon = 1e-15);
        let far_pt = flow.velocity(Complex::from_polar(1e6, 0.7)).unwrap();
        assert!((far_pt - 1.0).norm() < 1e-11);
        assert!(flow.velocity(Complex::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn circle_stream_vanishes_on_body() {
        let flow = CircleFlow::new(2.0, FarField::new(Complex::new(1.0, -0.3), 2.5)).unwrap();
        for k in 0..32 {
            let z = Complex::from_polar(2.0, 2.0 * PI * k as f64 / 32.0);
            assert!(flow.stream(z).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn horizontal_plate_without_circulation_is_uniform() {
        let plate = PlateFlow::new(4.0, 0.0, far(1.0, 0.0)).unwrap();
        for &z in &[Complex::new(0.3, 0.2), Complex::new(-5.0, 1.0), Complex::new(1.9, -0.01)] {
            let w = plate.velocity(z).unwrap();
            assert!((w - 1.0).norm() < 1e-13, "{w}");
            assert_relative_eq!(plate.stream(z).unwrap(), z.im, epsilon = 1e-13);
        }
    }

    #[test]
    fn plate_map_round_trip() {
        let plate = PlateFlow::new(4.0, 0.4, far(1.0, 0.0)).unwrap();
        for &z in &[Complex::new(0.3, 0.2), Complex::new(-3.0, 1.0), Complex::new(0.1, -0.01)] {
            let s = plate.preimage(z).unwrap();
            assert!(s.norm() > 1.0);
            assert!((plate.map(s) - z).norm() < 1e-13);
        }
        assert!(plate.preimage(Complex::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn kutta_circulation_bounds_trailing_edge() {
        let alpha = PI / 6.0;
        let mut plate = PlateFlow::new(4.0, alpha, far(1.0, 0.0)).unwrap();
        let gamma = plate.edge_regular_circulation(true);
        assert_relative_eq!(gamma, -PI * 4.0 * alpha.sin(), max_relative = 1e-14);
        plate.far.circulation = gamma;
        let te = Complex::from_polar(2.0, -alpha);
        let outward = Complex::from_polar(1.0, -alpha);
        let near = |d: f64| plate.velocity(te + outward * d + outward * Complex::new(0.0, d)).unwrap().norm();
        assert!((near(1e-6) - near(1e-8)).abs() < 1e-3);
        // The leading edge stays singular like r^(-1/2).
        let le = -te;
        let lv = |d: f64| plate.velocity(le - outward * d).unwrap().norm();
        let slope = (lv(1e-6).ln() - lv(1e-4).ln()) / ((1e-6f64).ln() - (1e-4f64).ln());
        assert_relative_eq!(slope, -0.5, epsilon = 1e-2);
    }

    #[test]
    fn potential_derivative_is_velocity() {
        let flows = [
            PlateFlow::new(4.0, 0.3, far(1.0, -1.3)).unwrap(),
            PlateFlow::new(2.0, -0.2, FarField::new(Complex::new(0.8, 0.1), 0.7)).unwrap(),
        ];
        for plate in &flows {
            for &z in &[Complex::new(0.5, 0.7), Complex::new(-3.0, -2.0), Complex::new(2.5, 0.1)] {
                let h = 1e-5;
                let d = (plate.potential(z + h).unwrap() - plate.potential(z - h).unwrap()) / (2.0 * h);
                assert!((d - plate.velocity(z).unwrap()).norm() < 1e-8);
                assert!((plate.potential(z).unwrap().im - plate.stream(z).unwrap()).abs() < 1e-12);
            }
        }
    }
}
