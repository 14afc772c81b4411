//! Body-fitted polar grids in the circle plane `sigma = exp(s + i theta)`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Body, BodyKind, Point};
use crate::incompressible::FarField;
use crate::real::Real;

/// Map from the exterior of the unit circle to the physical plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridMap<T> {
    /// `z = R sigma`.
    Circle { radius: T },
    /// `z = exp(-i alpha) a (sigma + 1/sigma)`, `a = chord/4`.
    Plate { chord: T, alpha: T },
}

impl<T: Real> GridMap<T> {
    pub fn map(&self, sigma: Complex<T>) -> Point<T> {
        match *self {
            GridMap::Circle { radius } => sigma * radius,
            GridMap::Plate { chord, alpha } => {
                Complex::from_polar(chord / T::of(4.0), -alpha) * (sigma + sigma.inv())
            }
        }
    }

    /// `dz/d sigma`.
    pub fn derivative(&self, sigma: Complex<T>) -> Complex<T> {
        match *self {
            GridMap::Circle { radius } => Complex::from(radius),
            GridMap::Plate { chord, alpha } => {
                Complex::from_polar(chord / T::of(4.0), -alpha) * (Complex::from(T::one()) - (sigma * sigma).inv())
            }
        }
    }

    /// `dz / d(s + i theta) = sigma dz/d sigma`.
    pub fn jacobian(&self, sigma: Complex<T>) -> Complex<T> {
        sigma * self.derivative(sigma)
    }

    /// Length that turns `|z|` into `|sigma|` far away.
    pub fn scale(&self) -> T {
        match *self {
            GridMap::Circle { radius } => radius,
            GridMap::Plate { chord, .. } => chord / T::of(4.0),
        }
    }

    pub fn body(&self) -> Result<Body<T>> {
        match *self {
            GridMap::Circle { radius } => Body::circle(radius),
            GridMap::Plate { chord, alpha } => Body::flat_plate(chord, alpha),
        }
    }

    /// Incompressible stream function at circle-plane point `sigma`, zero
    /// on the body.
    pub fn incompressible_stream(&self, far: FarField<T>, sigma: Complex<T>) -> T {
        let v = far.w_inf * self.derivative_at_infinity();
        let doublet = (v * sigma + v.conj() / sigma).im;
        doublet - far.circulation / T::TAU() * sigma.norm().ln()
    }

    /// Incompressible complex velocity at circle-plane point `sigma`.
    pub fn incompressible_velocity(&self, far: FarField<T>, sigma: Complex<T>) -> Complex<T> {
        let v = far.w_inf * self.derivative_at_infinity();
        let dw = v - v.conj() / (sigma * sigma) + Complex::new(T::zero(), -far.circulation / T::TAU()) / sigma;
        dw / self.derivative(sigma)
    }

    fn derivative_at_infinity(&self) -> Complex<T> {
        match *self {
            GridMap::Circle { radius } => Complex::from(radius),
            GridMap::Plate { chord, alpha } => Complex::from_polar(chord / T::of(4.0), -alpha),
        }
    }
}

/// Polar grid `s_i = i ds` (`i < n_r`), `theta_j = j dtheta` (`j < n_theta`).
/// Ring 0 lies on the body. Nodes are stored ring by ring.
#[derive(Debug, Clone, Serialize)]
pub struct ConformalGrid<T> {
    pub map: GridMap<T>,
    pub n_r: usize,
    pub n_theta: usize,
    pub sigma_max: T,
    pub ds: T,
    pub dtheta: T,
    /// Physical node positions.
    #[serde(skip)]
    pub nodes: Vec<Point<T>>,
    /// `|dz/d sigma|` per node.
    #[serde(skip)]
    pub factor: Vec<T>,
    /// Nodes at preimages of plate edges, where the map is not conformal.
    pub flagged: Vec<usize>,
    /// `|J|^2` on radial faces `(i + 1/2, j)`, `i < n_r - 1`.
    #[serde(skip)]
    pub(crate) radial_face_j2: Vec<T>,
    /// `|J|^2` on angular faces `(i, j + 1/2)`.
    #[serde(skip)]
    pub(crate) angular_face_j2: Vec<T>,
    /// `J` per node.
    #[serde(skip)]
    pub(crate) jacobian: Vec<Complex<T>>,
}

impl<T: Real> ConformalGrid<T> {
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn sigma(&self, i: usize, j: usize) -> Complex<T> {
        Complex::from_polar((self.ds * T::of_usize(i)).exp(), self.dtheta * T::of_usize(j))
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_flagged(&self, k: usize) -> bool {
        self.flagged.contains(&k)
    }

    pub fn jacobian(&self, k: usize) -> Complex<T> {
        self.jacobian[k]
    }
}

/// Builds the grid; `r_far` is the outer radius in physical units.
pub fn build_grid<T: Real>(body: &Body<T>, r_far: T, n_r: usize, n_theta: usize) -> Result<ConformalGrid<T>> {
    if n_r < 16 || n_theta < 16 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 16 x 16 nodes, got {n_r} x {n_theta}"
        )));
    }
    let map = match body.kind {
        BodyKind::Circle { radius } => GridMap::Circle { radius },
        BodyKind::FlatPlate { chord, alpha } => {
            if !n_theta.is_multiple_of(2) {
                return Err(Error::InvalidParameter(
                    "plate grids need an even number of angles so both edges are nodes".into(),
                ));
            }
            GridMap::Plate { chord, alpha }
        }
        BodyKind::Polygon { .. } => {
            return Err(Error::Unsupported(
                "compressible solver supports circles and flat plates only".into(),
            ))
        }
    };
    let min_far = body.circumradius() * T::of(20.0);
    if !(r_far >= min_far) {
        return Err(Error::InvalidParameter(format!(
            "outer radius {r_far} is below 20 body circumradii ({min_far})"
        )));
    }
    let sigma_max = r_far / map.scale();
    let ds = sigma_max.ln() / T::of_usize(n_r - 1);
    let dtheta = T::TAU() / T::of_usize(n_theta);
    let half = T::of(0.5);
    let at = |s: T, th: T| Complex::from_polar(s.exp(), th);
    let mut nodes = Vec::with_capacity(n_r * n_theta);
    let mut factor = Vec::with_capacity(n_r * n_theta);
    let mut jacobian = Vec::with_capacity(n_r * n_theta);
    for i in 0..n_r {
        for j in 0..n_theta {
            let sigma = at(ds * T::of_usize(i), dtheta * T::of_usize(j));
            nodes.push(map.map(sigma));
            factor.push(map.derivative(sigma).norm());
            jacobian.push(map.jacobian(sigma));
        }
    }
    let flagged = match map {
        GridMap::Circle { .. } => Vec::new(),
        GridMap::Plate { .. } => vec![0, n_theta / 2],
    };
    let mut radial_face_j2 = Vec::with_capacity((n_r - 1) * n_theta);
    for i in 0..n_r - 1 {
        for j in 0..n_theta {
            let sigma = at(ds * (T::of_usize(i) + half), dtheta * T::of_usize(j));
            radial_face_j2.push(map.jacobian(sigma).norm_sqr());
        }
    }
    let mut angular_face_j2 = Vec::with_capacity(n_r * n_theta);
    for i in 0..n_r {
        for j in 0..n_theta {
            let sigma = at(ds * T::of_usize(i), dtheta * (T::of_usize(j) + half));
            angular_face_j2.push(map.jacobian(sigma).norm_sqr());
        }
    }
    Ok(ConformalGrid {
        map,
        n_r,
        n_theta,
        sigma_max,
        ds,
        dtheta,
        nodes,
        factor,
        flagged,
        radial_face_j2,
        angular_face_j2,
        jacobian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_grid_has_constant_factor() {
        let g = build_grid(&Body::circle(1.0f64).unwrap(), 50.0, 64, 128).unwrap();
        assert_eq!(g.len(), 64 * 128);
        assert!(g.factor.iter().all(|&f| (f - 1.0).abs() < 1e-15));
        assert!(g.flagged.is_empty());
        assert!((g.nodes[g.index(63, 0)].re - 50.0).abs() < 1e-10);
    }

    #[test]
    fn plate_factor_is_joukowsky_derivative() {
        let g = build_grid(&Body::flat_plate(4.0f64, 0.0).unwrap(), 100.0, 32, 64).unwrap();
        for &(i, j) in &[(0usize, 5usize), (3, 17), (31, 40)] {
            let s = g.sigma(i, j);
            let expected = (Complex::from(1.0) - (s * s).inv()).norm() * 1.0;
            assert!((g.factor[g.index(i, j)] - expected).abs() < 1e-13);
        }
        assert_eq!(g.flagged, vec![0, 32]);
        assert!(g.factor[0] < 1e-15 && g.factor[32] < 1e-15);
        // Ring 0 lies on the plate.
        assert!(g.nodes[g.index(0, 7)].im.abs() < 1e-15);
    }

    #[test]
    fn circle_plane_formulas_match_exact_flows() {
        use crate::incompressible::{CircleFlow, PlateFlow};
        let far = FarField::new(Complex::new(1.0f64, 0.2), 1.1);
        let map = GridMap::Plate { chord: 4.0, alpha: 0.4 };
        let exact = PlateFlow::new(4.0, 0.4, far).unwrap();
        let circ = GridMap::Circle { radius: 2.0 };
        let cexact = CircleFlow::new(2.0, far).unwrap();
        for &s in &[Complex::new(1.5, 0.3), Complex::new(-0.2, 3.0)] {
            let z = map.map(s);
            assert!((map.incompressible_stream(far, s) - exact.stream(z).unwrap()).abs() < 1e-12);
            assert!((map.incompressible_velocity(far, s) - exact.velocity(z).unwrap()).norm() < 1e-12);
            let z = circ.map(s);
            assert!((circ.incompressible_stream(far, s) - cexact.stream(z).unwrap()).abs() < 1e-12);
            assert!((circ.incompressible_velocity(far, s) - cexact.velocity(z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let c = Body::circle(1.0f64).unwrap();
        assert!(build_grid(&c, 50.0, 8, 128).is_err());
        assert!(build_grid(&c, 10.0, 32, 32).is_err());
        let sq = Body::regular_polygon(4, 1.0, PI / 4.0).unwrap();
        assert!(matches!(build_grid(&sq, 50.0, 32, 32), Err(Error::Unsupported(_))));
    }
}
