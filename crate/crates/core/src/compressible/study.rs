//! Grid refinement studies: corner Mach growth on a plate at incidence and
//! grid convergence on the circle.

use num_complex::Complex;
use serde::Serialize;

use super::{build_grid, solve_subsonic, GridMap, SolverOptions};
use crate::error::{Error, Result};
use crate::gas::{BernoulliState, GasModel};
use crate::geometry::{Body, BodyKind};
use crate::incompressible::FarField;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyOptions<T> {
    /// Outer radius in units of the body circumradius.
    pub far_radius: T,
    /// `(n_r, n_theta)` per level, coarse to fine.
    pub levels: Vec<(usize, usize)>,
    /// Corner neighbourhood radius as a fraction of the chord.
    pub corner_fraction: T,
    pub solver: SolverOptions<T>,
}

impl<T: Real> Default for StudyOptions<T> {
    fn default() -> Self {
        Self {
            far_radius: T::of(25.0),
            levels: vec![(64, 128), (128, 256), (256, 512)],
            corner_fraction: T::of(0.1),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementLevel<T> {
    pub n_r: usize,
    pub n_theta: usize,
    /// Radial step `ds` of the log-polar grid.
    pub h: T,
    /// Largest node Mach near the plate edges (whole field for a circle).
    pub max_mach: Option<T>,
    pub max_mach_location: Option<(T, T)>,
    pub iterations: usize,
    /// Largest face flux ratio reached, from the solution or the abort.
    pub flux_ratio: Option<T>,
    /// Largest `m / m_max` near the plate edges (whole field for a circle).
    /// Defined for aborted levels too, so growth can be compared past the
    /// sonic guard.
    pub corner_flux_ratio: Option<T>,
    /// Error kind and message when the level did not produce a solution.
    pub error: Option<(String, String)>,
    pub sonic_abort: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy<T> {
    pub body: GridMap<T>,
    pub mach_inf: T,
    pub circulation: T,
    pub levels: Vec<RefinementLevel<T>>,
    /// Corner Mach grows at every level, or the finest level aborted at
    /// the sonic guard after growth before it.
    pub increasing: bool,
    /// Corner flux ratio grows at every level.
    pub flux_ratio_increasing: bool,
    /// The finest level aborted at the sonic guard.
    pub finest_aborted: bool,
    pub sonic_abort: bool,
    /// `|M_k - M_(k+1)|` between successive levels.
    pub cauchy_differences: Vec<T>,
    pub label: String,
}

/// Solve on each grid of `opts.levels` at free-stream Mach `mach_inf`.
/// Solver failures are recorded per level.
pub fn refinement_study<T: Real>(
    body: &Body<T>,
    gas: &GasModel<T>,
    mach_inf: T,
    circulation: T,
    opts: &StudyOptions<T>,
) -> Result<RefinementStudy<T>> {
    if opts.levels.len() < 3 {
        return Err(Error::InvalidParameter("a refinement study needs at least 3 grids".into()));
    }
    for pair in opts.levels.windows(2) {
        if pair[1].0 != 2 * pair[0].0 || pair[1].1 != 2 * pair[0].1 {
            return Err(Error::InvalidParameter(format!(
                "grid {:?} is not a doubling of {:?}",
                pair[1], pair[0]
            )));
        }
    }
    let (map, corners) = match body.kind {
        BodyKind::FlatPlate { chord, alpha } => {
            let tip = Complex::from_polar(chord / T::of(2.0), -alpha);
            (GridMap::Plate { chord, alpha }, vec![tip, -tip])
        }
        BodyKind::Circle { radius } => (GridMap::Circle { radius }, Vec::new()),
        BodyKind::Polygon { .. } => {
            return Err(Error::Unsupported("compressible studies support circles and plates only".into()))
        }
    };
    let state = BernoulliState::from_free_stream(gas, mach_inf)?;
    let speed = state.speed_at_unit_density(gas)?;
    let far = FarField::new(Complex::new(speed, T::zero()), circulation);
    let r_far = opts.far_radius * body.circumradius();
    let reach = match body.kind {
        BodyKind::FlatPlate { chord, .. } => chord * opts.corner_fraction,
        _ => T::zero(),
    };

    let mut levels = Vec::new();
    for &(n_r, n_theta) in &opts.levels {
        let grid = build_grid(body, r_far, n_r, n_theta)?;
        log::info!("refinement level {n_r}x{n_theta}");
        let level = match solve_subsonic(&grid, gas, &state, far, &opts.solver) {
            Ok(sol) => {
                let (m, at) = if corners.is_empty() {
                    (Some(sol.max_mach), Some(sol.max_mach_location))
                } else {
                    match sol.max_mach_near(&corners, reach) {
                        Some((m, z)) => (Some(m), Some((z.re, z.im))),
                        None => (None, None),
                    }
                };
                let corner_flux = sol
                    .density
                    .iter()
                    .zip(&sol.velocity)
                    .zip(&grid.nodes)
                    .filter(|((r, _), z)| r.is_finite() && (corners.is_empty() || corners.iter().any(|c| (**z - c).norm() <= reach)))
                    .map(|((&r, w), _)| T::of(0.5) * r * r * w.norm_sqr() / state.flux_max)
                    .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))));
                RefinementLevel {
                    n_r,
                    n_theta,
                    h: grid.ds,
                    max_mach: m,
                    max_mach_location: at,
                    iterations: sol.log.len(),
                    flux_ratio: Some(sol.max_flux_ratio),
                    corner_flux_ratio: corner_flux,
                    error: None,
                    sonic_abort: false,
                }
            }
            Err(e) => {
                let (loc, ratio, it) = match e {
                    Error::SonicExcursion { x, y, flux_ratio, iteration } => {
                        (Some((T::of(x), T::of(y))), Some(T::of(flux_ratio)), iteration)
                    }
                    _ => (None, None, 0),
                };
                let near = loc.is_some_and(|(x, y)| {
                    corners.is_empty() || corners.iter().any(|c| (Complex::new(x, y) - c).norm() <= reach)
                });
                RefinementLevel {
                    n_r,
                    n_theta,
                    h: grid.ds,
                    max_mach: None,
                    max_mach_location: loc,
                    iterations: it,
                    flux_ratio: ratio,
                    corner_flux_ratio: if near { ratio } else { None },
                    sonic_abort: matches!(e, Error::SonicExcursion { .. }),
                    error: Some((e.kind().to_string(), e.to_string())),
                }
            }
        };
        levels.push(level);
    }

    let solved: Vec<T> = levels.iter().map_while(|l| l.max_mach).collect();
    let grows = solved.windows(2).all(|p| p[1] > p[0]);
    let sonic_abort = levels.iter().any(|l| l.sonic_abort);
    let increasing = if solved.len() == levels.len() {
        grows
    } else {
        // Failures after the solved prefix must all be sonic aborts.
        grows && !solved.is_empty() && levels[solved.len()..].iter().all(|l| l.sonic_abort)
    };
    let ratios: Vec<T> = levels.iter().filter_map(|l| l.corner_flux_ratio).collect();
    let flux_ratio_increasing = ratios.len() == levels.len() && ratios.windows(2).all(|p| p[1] > p[0]);
    let finest_aborted = levels.last().is_some_and(|l| l.sonic_abort);
    let cauchy_differences = solved.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    Ok(RefinementStudy {
        body: map,
        mach_inf,
        circulation,
        levels,
        increasing,
        flux_ratio_increasing,
        finest_aborted,
        sonic_abort,
        cauchy_differences,
        label: "finite-resolution signature".into(),
    })
}
