//! Incompressible irrotational flows represented by their complex velocity
//! `w = v_x - i v_y`, complex potential `W = phi + i psi` and stream function
//! `psi = Im W`, normalized to vanish on the body.

mod exact;
mod kutta;
mod panel;

use num_complex::Complex;
use serde::Serialize;

pub use exact::{CircleFlow, PlateFlow};
pub use kutta::{affine_a1, kutta_solve, kutta_solve_refined, AffineA1, KuttaOptions, KuttaResult};
pub use panel::{PanelLayout, PanelOptions, PanelSolution, PanelSystem};

use crate::error::{Error, Result};
use crate::geometry::{Body, BodyKind, Point};
use crate::real::Real;

/// Behaviour at infinity: `w -> w_inf` and `w ~ w_inf + Gamma / (2 pi i z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarField<T> {
    pub w_inf: Complex<T>,
    pub circulation: T,
}

impl<T: Real> FarField<T> {
    pub fn new(w_inf: Complex<T>, circulation: T) -> Self {
        Self { w_inf, circulation }
    }

    /// Free stream of the given speed moving in direction `angle` (radians,
    /// counterclockwise from `+x`). Since `w = v_x - i v_y`, this is
    /// `speed * exp(-i angle)`.
    pub fn from_speed_angle(speed: T, angle: T, circulation: T) -> Self {
        Self::new(Complex::from_polar(speed, -angle), circulation)
    }

    pub fn with_circulation(self, circulation: T) -> Self {
        Self { circulation, ..self }
    }
}

/// Anything that can be sampled as a planar incompressible flow.
pub trait FlowField<T: Real>: Sync {
    fn velocity(&self, z: Point<T>) -> Result<Complex<T>>;

    /// Stream function, zero on the body.
    fn stream(&self, z: Point<T>) -> Result<T>;

    fn far_field(&self) -> FarField<T>;

    fn body(&self) -> Option<&Body<T>> {
        None
    }

    /// Length used to make thresholds scale invariant.
    fn length_scale(&self) -> T {
        self.body().map(|b| b.circumradius()).unwrap_or_else(T::one)
    }

    /// Smallest length the representation resolves (zero when exact).
    fn resolution(&self) -> T {
        T::zero()
    }
}

/// An incompressible solution in one of its supported representations.
#[derive(Debug, Clone)]
pub enum ComplexFlow<T> {
    Uniform { w_inf: Complex<T> },
    Circle { body: Body<T>, flow: CircleFlow<T> },
    Plate { body: Body<T>, flow: PlateFlow<T> },
    Panel(PanelSolution<T>),
}

impl<T: Real> ComplexFlow<T> {
    pub fn uniform(w_inf: Complex<T>) -> Self {
        ComplexFlow::Uniform { w_inf }
    }

    pub fn circle(radius: T, far: FarField<T>) -> Result<Self> {
        Ok(ComplexFlow::Circle {
            body: Body::circle(radius)?,
            flow: CircleFlow::new(radius, far)?,
        })
    }

    pub fn plate(chord: T, alpha: T, far: FarField<T>) -> Result<Self> {
        Ok(ComplexFlow::Plate {
            body: Body::flat_plate(chord, alpha)?,
            flow: PlateFlow::new(chord, alpha, far)?,
        })
    }

    /// Exact solution for circle and plate bodies; an error for polygons.
    pub fn exact(body: &Body<T>, far: FarField<T>) -> Result<Self> {
        match body.kind {
            BodyKind::Circle { radius } => Self::circle(radius, far),
            BodyKind::FlatPlate { chord, alpha } => Self::plate(chord, alpha, far),
            BodyKind::Polygon { .. } => Err(Error::Unsupported(
                "no closed-form flow for polygons; use the panel solver".into(),
            )),
        }
    }

    /// Complex potential. The logarithmic term is `Gamma/(2 pi i) Log(z - c)`
    /// with `c` the body centroid and the principal branch, so the cut runs
    /// along the negative real direction from `c`.
    pub fn potential(&self, z: Point<T>) -> Result<Complex<T>> {
        match self {
            ComplexFlow::Uniform { w_inf } => Ok(w_inf * z),
            ComplexFlow::Circle { flow, .. } => flow.potential(z),
            ComplexFlow::Plate { flow, .. } => flow.potential(z),
            ComplexFlow::Panel(p) => p.potential(z),
        }
    }

    /// Point where the logarithm's branch cut starts; the cut runs toward
    /// `-infinity` parallel to the real axis.
    pub fn branch_point(&self) -> Point<T> {
        self.body()
            .map(|b| b.centroid())
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }
}

impl<T: Real> FlowField<T> for ComplexFlow<T> {
    fn velocity(&self, z: Point<T>) -> Result<Complex<T>> {
        match self {
            ComplexFlow::Uniform { w_inf } => Ok(*w_inf),
            ComplexFlow::Circle { flow, .. } => flow.velocity(z),
            ComplexFlow::Plate { flow, .. } => flow.velocity(z),
            ComplexFlow::Panel(p) => p.velocity(z),
        }
    }

    fn stream(&self, z: Point<T>) -> Result<T> {
        match self {
            ComplexFlow::Uniform { w_inf } => Ok((w_inf * z).im),
            ComplexFlow::Circle { flow, .. } => flow.stream(z),
            ComplexFlow::Plate { flow, .. } => flow.stream(z),
            ComplexFlow::Panel(p) => p.stream(z),
        }
    }

    fn far_field(&self) -> FarField<T> {
        match self {
            ComplexFlow::Uniform { w_inf } => FarField::new(*w_inf, T::zero()),
            ComplexFlow::Circle { flow, .. } => flow.far,
            ComplexFlow::Plate { flow, .. } => flow.far,
            ComplexFlow::Panel(p) => p.far,
        }
    }

    fn body(&self) -> Option<&Body<T>> {
        match self {
            ComplexFlow::Uniform { .. } => None,
            ComplexFlow::Circle { body, .. } | ComplexFlow::Plate { body, .. } => Some(body),
            ComplexFlow::Panel(p) => Some(p.body()),
        }
    }

    fn resolution(&self) -> T {
        match self {
            ComplexFlow::Panel(p) => p.layout().min_panel_length(),
            _ => T::zero(),
        }
    }
}

impl<T: Real> FlowField<T> for PanelSolution<T> {
    fn velocity(&self, z: Point<T>) -> Result<Complex<T>> {
        PanelSolution::velocity(self, z)
    }
    fn stream(&self, z: Point<T>) -> Result<T> {
        PanelSolution::stream(self, z)
    }
    fn far_field(&self) -> FarField<T> {
        self.far
    }
    fn body(&self) -> Option<&Body<T>> {
        Some(PanelSolution::body(self))
    }
    fn resolution(&self) -> T {
        self.layout().min_panel_length()
    }
}
