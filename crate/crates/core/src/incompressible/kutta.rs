//! Circulation selection by the Kutta condition `a1 = 0` at one corner.
//!
//! The panel problem is linear in the circulation, so the fitted `a1` of any
//! corner is an affine function of `Gamma`. Two solves fix it.

use num_complex::Complex;
use serde::Serialize;

use super::{FarField, PanelOptions, PanelSolution, PanelSystem};
use crate::analysis::{a1_threshold, fit_coefficients, CornerFitOptions};
use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::real::Real;

/// `a1(Gamma) = intercept + slope * Gamma` at one corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineA1<T> {
    pub corner_id: usize,
    pub intercept: T,
    pub slope: T,
    /// Fit standard errors of `a1` at `Gamma = 0` and `Gamma = 1`.
    pub std_errors: [T; 2],
    /// Singular-verdict threshold on `|a1|`.
    pub threshold: T,
}

impl<T: Real> AffineA1<T> {
    pub fn at(&self, gamma: T) -> T {
        self.intercept + self.slope * gamma
    }

    pub fn root(&self) -> T {
        -self.intercept / self.slope
    }

    /// Half-width of the circulation interval on which the corner is regular.
    pub fn regular_half_width(&self) -> T {
        self.threshold / self.slope.abs()
    }

    /// First-order propagation of the fit standard errors into the root.
    pub fn root_std_error(&self) -> T {
        let (a0, a1) = (self.intercept, self.intercept + self.slope);
        let [s0, s1] = self.std_errors;
        ((a1 * s0).powi(2) + (a0 * s1).powi(2)).sqrt() / self.slope.powi(2)
    }
}

/// Affine `a1` forms for several corners from two panel solves.
pub fn affine_a1<T: Real>(
    system: &PanelSystem<T>,
    w_inf: Complex<T>,
    corner_ids: &[usize],
    fit: &CornerFitOptions<T>,
) -> Result<Vec<AffineA1<T>>> {
    let body = system.layout().body();
    for &id in corner_ids {
        let corner = body
            .corners
            .get(id)
            .ok_or_else(|| Error::InvalidParameter(format!("corner {id} does not exist")))?;
        if !corner.protruding {
            return Err(Error::InvalidParameter(format!("corner {id} is not protruding")));
        }
    }
    let s0 = system.solve(FarField::new(w_inf, T::zero()))?;
    let s1 = system.solve(FarField::new(w_inf, T::one()))?;
    let scale = body.circumradius();
    corner_ids
        .iter()
        .map(|&id| {
            let corner = &body.corners[id];
            let f0 = fit_coefficients(&s0, corner, fit)?;
            let f1 = fit_coefficients(&s1, corner, fit)?;
            Ok(AffineA1 {
                corner_id: id,
                intercept: f0.a1(),
                slope: f1.a1() - f0.a1(),
                std_errors: [f0.a1_std_error, f1.a1_std_error],
                threshold: a1_threshold(corner, w_inf.norm(), scale, fit.a1_tolerance),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KuttaOptions<T> {
    pub panels: PanelOptions<T>,
    pub fit: CornerFitOptions<T>,
    /// Relative change in `Gamma*` that ends panel doubling.
    pub refine_tolerance: T,
    pub max_per_side: usize,
}

impl<T: Real> Default for KuttaOptions<T> {
    fn default() -> Self {
        Self {
            panels: PanelOptions::default(),
            fit: CornerFitOptions::default(),
            refine_tolerance: T::of(1e-3),
            max_per_side: 4096,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KuttaResult<T> {
    pub corner_id: usize,
    /// The circulation `Gamma*` with `a1 = 0`.
    pub circulation: T,
    /// Larger of the propagated fit error and the shift of the root when the
    /// fit radii are halved.
    pub uncertainty: T,
    pub fit_std_error: T,
    pub radius_sensitivity: T,
    pub affine: AffineA1<T>,
    pub per_side: usize,
    /// Successive `Gamma*` values when the panels were refined.
    pub refinement: Vec<(usize, T)>,
    #[serde(skip)]
    pub flow: PanelSolution<T>,
}

fn solve_on<T: Real>(system: &PanelSystem<T>, w_inf: Complex<T>, corner_id: usize, opts: &KuttaOptions<T>) -> Result<KuttaResult<T>> {
    let form = affine_a1(system, w_inf, &[corner_id], &opts.fit)?[0];
    let body = system.layout().body();
    let corner = &body.corners[corner_id];
    let slope_floor = T::of(1e-12) * body.circumradius().powf(-T::PI() / corner.beta);
    if !(form.slope.abs() >= slope_floor) {
        return Err(Error::DegenerateKutta {
            corner: corner_id,
            slope: form.slope.to64(),
        });
    }
    let halved = affine_a1(system, w_inf, &[corner_id], &opts.fit.halved())?[0];
    let circulation = form.root();
    let fit_std_error = form.root_std_error();
    let radius_sensitivity = (halved.root() - circulation).abs();
    let flow = system.solve(FarField::new(w_inf, circulation))?;
    Ok(KuttaResult {
        corner_id,
        circulation,
        uncertainty: fit_std_error.max(radius_sensitivity),
        fit_std_error,
        radius_sensitivity,
        affine: form,
        per_side: opts.panels.per_side,
        refinement: vec![(opts.panels.per_side, circulation)],
        flow,
    })
}

/// Kutta circulation for `corner_id` at the panel resolution in `opts`.
pub fn kutta_solve<T: Real>(body: &Body<T>, w_inf: Complex<T>, corner_id: usize, opts: &KuttaOptions<T>) -> Result<KuttaResult<T>> {
    let system = PanelSystem::new(body, &opts.panels)?;
    solve_on(&system, w_inf, corner_id, opts)
}

/// Doubles the panel count until `Gamma*` changes by less than
/// `refine_tolerance` (relative) or `max_per_side` is reached.
pub fn kutta_solve_refined<T: Real>(
    body: &Body<T>,
    w_inf: Complex<T>,
    corner_id: usize,
    opts: &KuttaOptions<T>,
) -> Result<KuttaResult<T>> {
    let mut level = opts.clone();
    let mut prev = kutta_solve(body, w_inf, corner_id, &level)?;
    let mut history = prev.refinement.clone();
    while level.panels.per_side * 2 <= opts.max_per_side {
        level.panels.per_side *= 2;
        let next = kutta_solve(body, w_inf, corner_id, &level)?;
        history.push((level.panels.per_side, next.circulation));
        let scale = next.circulation.abs().max(w_inf.norm() * body.circumradius() * T::of(1e-6));
        let done = (next.circulation - prev.circulation).abs() <= opts.refine_tolerance * scale;
        prev = next;
        if done {
            break;
        }
    }
    prev.refinement = history;
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_incidence_plate_needs_no_circulation() {
        let plate = Body::flat_plate(4.0f64, 0.0).unwrap();
        let opts = KuttaOptions {
            panels: PanelOptions::per_side(128),
            ..Default::default()
        };
        let r = kutta_solve(&plate, Complex::new(1.0, 0.0), Body::<f64>::TRAILING_EDGE, &opts).unwrap();
        assert!(r.circulation.abs() < 1e-8, "{}", r.circulation);
    }

    #[test]
    fn plate_root_close_to_conformal_value() {
        let alpha = PI / 6.0;
        let plate = Body::flat_plate(4.0, alpha).unwrap();
        let opts = KuttaOptions {
            panels: PanelOptions::per_side(256),
            ..Default::default()
        };
        let r = kutta_solve(&plate, Complex::new(1.0, 0.0), Body::<f64>::TRAILING_EDGE, &opts).unwrap();
        let exact = -PI * 4.0 * alpha.sin();
        assert!((r.circulation - exact).abs() < 0.01 * exact.abs(), "{} vs {exact}", r.circulation);
    }

    #[test]
    fn non_protruding_corner_is_rejected() {
        // An L-shaped hexagon has one reentrant vertex (index 3).
        let body = Body::polygon(vec![
            Complex::new(0.0, 0.0),
            Complex::new(2.0, 0.0),
            Complex::new(2.0, 1.0),
            Complex::new(1.0, 1.0),
            Complex::new(1.0, 2.0),
            Complex::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(!body.corners[3].protruding);
        let opts = KuttaOptions {
            panels: PanelOptions::per_side(16),
            ..Default::default()
        };
        assert!(matches!(
            kutta_solve(&body, Complex::new(1.0, 0.0), 3, &opts),
            Err(Error::InvalidParameter(_))
        ));
    }
}
