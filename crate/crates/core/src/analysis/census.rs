//! Corner census over circulations and sign-component counting.
//!
//! Both are finite-resolution signatures: they report what a computed flow
//! does, not what every flow must do.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::CornerFitOptions;
use crate::error::{Error, Result};
use super::{sign_attainment, SignAttainment};
use crate::geometry::{Body, Corner};
use crate::incompressible::{affine_a1, AffineA1, FlowField, PanelOptions, PanelSystem};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusOptions<T> {
    pub panels: PanelOptions<T>,
    pub fit: CornerFitOptions<T>,
    /// Points in the redundancy sweep over circulation.
    pub grid_points: usize,
    /// Sweep margin beyond the outermost roots, relative to their spread.
    pub margin: T,
}

impl<T: Real> Default for CensusOptions<T> {
    fn default() -> Self {
        Self {
            panels: PanelOptions::default(),
            fit: CornerFitOptions::default(),
            grid_points: 33,
            margin: T::of(0.25),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusVerdict {
    /// No circulation makes every protruding corner regular.
    NoCommonRegularization,
    /// The regular intervals of all corners overlap; roots coincide within
    /// tolerance and nothing can be concluded.
    DegenerateCoincidence,
}

impl CensusVerdict {
    pub fn describe(&self) -> &'static str {
        match self {
            CensusVerdict::NoCommonRegularization => "no circulation regularizes all corners",
            CensusVerdict::DegenerateCoincidence => "degenerate coincidence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusEntry<T> {
    pub gamma: T,
    pub singular_corners: Vec<usize>,
    pub regular_corners: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerCensus<T> {
    /// Affine `a1(Gamma)` per protruding corner.
    pub corners: Vec<AffineA1<T>>,
    /// Circulation interval on which each corner is regular.
    pub regular_intervals: Vec<(T, T)>,
    /// Pairs of corners whose regular intervals overlap.
    pub coincidences: Vec<(usize, usize)>,
    /// Fewest singular corners over all circulations, from the intervals.
    pub min_singular_count: usize,
    pub protruding_count: usize,
    pub verdict: CensusVerdict,
    /// Uniform sweep followed by the roots themselves.
    pub sweep: Vec<CensusEntry<T>>,
    pub label: &'static str,
}

impl<T: Real> CornerCensus<T> {
    pub fn classify(corners: &[AffineA1<T>], gamma: T) -> CensusEntry<T> {
        let (regular, singular): (Vec<&AffineA1<T>>, Vec<&AffineA1<T>>) = corners.iter().partition(|c| c.at(gamma).abs() <= c.threshold);
        CensusEntry {
            gamma,
            singular_corners: singular.iter().map(|c| c.corner_id).collect(),
            regular_corners: regular.iter().map(|c| c.corner_id).collect(),
        }
    }

    /// Smallest singular count seen in the sweep.
    pub fn sweep_min_singular(&self) -> usize {
        self.sweep.iter().map(|e| e.singular_corners.len()).min().unwrap_or(0)
    }
}

/// Most intervals sharing a common point.
fn max_overlap<T: Real>(intervals: &[(T, T)]) -> usize {
    let mut events: Vec<(T, i32)> = intervals.iter().flat_map(|&(a, b)| [(a, 1), (b, -1)]).collect();
    // Openings before closings at equal positions: closed intervals.
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(y.1.cmp(&x.1)));
    let (mut depth, mut best) = (0i32, 0i32);
    for (_, d) in events {
        depth += d;
        best = best.max(depth);
    }
    best as usize
}

/// Affine census of the protruding corners of `body` in the free stream `w_inf`.
pub fn corner_census<T: Real>(body: &Body<T>, w_inf: Complex<T>, opts: &CensusOptions<T>) -> Result<CornerCensus<T>> {
    let ids: Vec<usize> = (0..body.corners.len()).filter(|&i| body.corners[i].protruding).collect();
    if ids.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "census needs at least two protruding corners, body has {}",
            ids.len()
        )));
    }
    let system = PanelSystem::new(body, &opts.panels)?;
    let corners = affine_a1(&system, w_inf, &ids, &opts.fit)?;
    let scale = body.circumradius();
    for c in &corners {
        let floor = T::of(1e-12) * scale.powf(-T::PI() / body.corners[c.corner_id].beta);
        if !(c.slope.abs() >= floor) {
            return Err(Error::DegenerateKutta {
                corner: c.corner_id,
                slope: c.slope.to64(),
            });
        }
    }
    let regular_intervals: Vec<(T, T)> = corners
        .iter()
        .map(|c| (c.root() - c.regular_half_width(), c.root() + c.regular_half_width()))
        .collect();
    let mut coincidences = Vec::new();
    for i in 0..corners.len() {
        for j in (i + 1)..corners.len() {
            let (a, b) = (regular_intervals[i], regular_intervals[j]);
            if a.0 <= b.1 && b.0 <= a.1 {
                coincidences.push((corners[i].corner_id, corners[j].corner_id));
            }
        }
    }
    let overlap = max_overlap(&regular_intervals);
    let n = corners.len();
    let verdict = if overlap == n {
        CensusVerdict::DegenerateCoincidence
    } else {
        CensusVerdict::NoCommonRegularization
    };

    let roots: Vec<T> = corners.iter().map(|c| c.root()).collect();
    let lo = roots.iter().copied().fold(T::infinity(), T::min);
    let hi = roots.iter().copied().fold(T::neg_infinity(), T::max);
    let pad = ((hi - lo) * opts.margin).max(T::of(0.1) * w_inf.norm() * scale);
    let (lo, hi) = (lo - pad, hi + pad);
    let m = opts.grid_points.max(2);
    let mut sweep: Vec<_> = (0..m)
        .map(|k| CornerCensus::classify(&corners, lo + (hi - lo) * T::of_usize(k) / T::of_usize(m - 1)))
        .collect();
    sweep.extend(roots.iter().map(|&g| CornerCensus::classify(&corners, g)));

    Ok(CornerCensus {
        corners,
        regular_intervals,
        coincidences,
        min_singular_count: n - overlap,
        protruding_count: n,
        verdict,
        sweep,
        label: "finite-resolution signature",
    })
}

/// Rectangular sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Window<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> Window<T> {
    /// Square window of half-width `half` around `center`.
    pub fn square(center: Complex<T>, half: T) -> Self {
        Self {
            x_min: center.re - half,
            x_max: center.re + half,
            y_min: center.im - half,
            y_max: center.im + half,
        }
    }

    /// Cell-center coordinates of an `n x n` grid, row by row from `y_min`.
    pub fn cell_centers(&self, n: usize) -> Vec<Complex<T>> {
        let hx = (self.x_max - self.x_min) / T::of_usize(n);
        let hy = (self.y_max - self.y_min) / T::of_usize(n);
        let half = T::of(0.5);
        (0..n)
            .flat_map(|j| {
                (0..n).map(move |i| {
                    Complex::new(
                        self.x_min + hx * (T::of_usize(i) + half),
                        self.y_min + hy * (T::of_usize(j) + half),
                    )
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignComponents {
    pub resolution: usize,
    pub positive_components: usize,
    pub negative_components: usize,
    /// Components not touching the window edge.
    pub positive_bounded: usize,
    pub negative_bounded: usize,
    /// Cells inside or on the body.
    pub masked_cells: usize,
    /// Cells with `|psi|` under the noise floor.
    pub unsigned_cells: usize,
    /// Cells too coarse to resolve the sign lobes of corners where `psi`
    /// takes both signs.
    pub inconclusive: bool,
}

/// Vertices whose fluid angle is within this fraction of `pi` of a straight
/// wall are not resolution-critical.
const FLAT_VERTEX: f64 = 0.1;

/// Counts connected components of `{psi > 0}` and `{psi < 0}` over an
/// `n x n` cell grid (4-connectivity).
pub fn sign_component_census<T: Real, F: FlowField<T> + ?Sized>(
    flow: &F,
    window: &Window<T>,
    resolution: usize,
) -> Result<SignComponents> {
    if resolution < 4 {
        return Err(Error::InvalidParameter("sign census needs at least 4 cells per side".into()));
    }
    let n = resolution;
    let scale = flow.length_scale();
    let hx = (window.x_max - window.x_min) / T::of_usize(n);
    let hy = (window.y_max - window.y_min) / T::of_usize(n);
    let mut inconclusive = false;
    if let Some(body) = flow.body() {
        let c = body.centroid();
        let need = body.circumradius() * T::of(4.0);
        if window.x_min > c.re - need || window.x_max < c.re + need || window.y_min > c.im - need || window.y_max < c.im + need {
            return Err(Error::InvalidParameter(
                "sign census window must clear the body by three circumradii".into(),
            ));
        }
        // Lobes only form where psi takes both signs next to the corner.
        // Nearly flat vertices behave like smooth boundary points.
        let fit = CornerFitOptions::<T>::default();
        let speed = flow.far_field().w_inf.norm();
        let ring_tol = fit.psi_tolerance * speed.max(T::one()) * scale;
        let lobed = |k: &Corner<T>| {
            fit.radii_for(k)
                .and_then(|radii| sign_attainment(flow, k, &radii, fit.samples, fit.wall_margin, ring_tol))
                .map_or(true, |s| s != SignAttainment::PositiveOnly && s != SignAttainment::NegativeOnly)
        };
        let reach = body
            .corners
            .iter()
            .filter(|k| (k.beta - T::PI()).abs() > T::of(FLAT_VERTEX) * T::PI())
            .filter(|k| k.reach < (hx.max(hy) * T::of(4.0)) && lobed(k))
            .map(|k| k.reach)
            .fold(T::infinity(), T::min);
        inconclusive = hx.max(hy) > reach * T::of(0.25);
    }
    let tol = T::of(1e-10) * flow.far_field().w_inf.norm().max(T::one()) * scale;
    let clearance = T::of(1e-9) * hx.min(hy);
    // 1 positive, -1 negative, 0 unsigned, 2 masked
    let signs: Vec<i8> = window
        .cell_centers(n)
        .par_iter()
        .map(|&z| {
            if let Some(body) = flow.body() {
                if body.contains(z) || body.distance_to_boundary(z) <= clearance {
                    return Ok(2);
                }
            }
            let psi = flow.stream(z)?;
            Ok(if psi > tol {
                1
            } else if psi < -tol {
                -1
            } else {
                0
            })
        })
        .collect::<Result<_>>()?;

    let mut label = vec![usize::MAX; n * n];
    let mut counts = [[0usize; 2]; 2]; // [sign][bounded]
    let mut stack = Vec::new();
    for start in 0..n * n {
        let s = signs[start];
        if label[start] != usize::MAX || !(s == 1 || s == -1) {
            continue;
        }
        label[start] = start;
        stack.push(start);
        let mut touches_edge = false;
        while let Some(k) = stack.pop() {
            let (i, j) = (k % n, k / n);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                touches_edge = true;
            }
            let mut visit = |q: usize| {
                if label[q] == usize::MAX && signs[q] == s {
                    label[q] = start;
                    stack.push(q);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < n {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - n);
            }
            if j + 1 < n {
                visit(k + n);
            }
        }
        counts[usize::from(s < 0)][usize::from(!touches_edge)] += 1;
    }
    Ok(SignComponents {
        resolution: n,
        positive_components: counts[0][0] + counts[0][1],
        negative_components: counts[1][0] + counts[1][1],
        positive_bounded: counts[0][1],
        negative_bounded: counts[1][1],
        masked_cells: signs.iter().filter(|&&s| s == 2).count(),
        unsigned_cells: signs.iter().filter(|&&s| s == 0).count(),
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;
    use crate::geometry::Point;
    use crate::incompressible::{ComplexFlow, FarField};

    #[test]
    fn overlap_counting() {
        assert_eq!(max_overlap(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]), 1);
        assert_eq!(max_overlap(&[(0.0, 2.0), (1.0, 3.0), (2.5, 5.0)]), 2);
        assert_eq!(max_overlap(&[(0.0, 1.0), (1.0, 2.0)]), 2);
    }

    #[test]
    fn uniform_flow_has_only_unbounded_components() {
        let flow = ComplexFlow::uniform(Complex::new(1.0, 0.0));
        let c = sign_component_census(&flow, &Window::square(Complex::new(0.0, 0.0), 3.0), 50).unwrap();
        assert_eq!((c.positive_components, c.negative_components), (1, 1));
        assert_eq!((c.positive_bounded, c.negative_bounded), (0, 0));
    }

    #[test]
    fn circle_flow_has_no_bounded_components() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        let c = sign_component_census(&flow, &Window::square(Complex::new(0.0, 0.0), 4.5), 120).unwrap();
        assert_eq!((c.positive_bounded, c.negative_bounded), (0, 0));
        assert!(c.masked_cells > 0);
    }

    /// `psi = x^2 + y^2 - 1` has a bounded negative disc.
    struct Bowl;
    impl FlowField<f64> for Bowl {
        fn velocity(&self, z: Point<f64>) -> Result<Complex<f64>> {
            Ok(Complex::new(2.0 * z.im, -2.0 * z.re))
        }
        fn stream(&self, z: Point<f64>) -> Result<f64> {
            Ok(z.norm_sqr() - 1.0)
        }
        fn far_field(&self) -> FarField<f64> {
            FarField::new(Complex::new(0.0, 0.0), 0.0)
        }
    }

    #[test]
    fn detects_bounded_component() {
        let c = sign_component_census(&Bowl, &Window::square(Complex::new(0.0, 0.0), 3.0), 60).unwrap();
        assert_eq!(c.negative_bounded, 1);
        assert_eq!(c.positive_bounded, 0);
    }

    #[test]
    fn window_too_small_is_rejected() {
        let flow = ComplexFlow::circle(1.0, FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        assert!(sign_component_census(&flow, &Window::square(Complex::new(0.0, 0.0), 2.0), 50).is_err());
    }

    #[test]
    fn coarse_cells_at_a_regular_sharp_corner_are_inconclusive() {
        use crate::incompressible::{kutta_solve, KuttaOptions};
        let plate = Body::flat_plate(0.4f64, 0.3).unwrap();
        let k = kutta_solve(&plate, Complex::new(1.0, 0.0), Body::<f64>::TRAILING_EDGE, &KuttaOptions::default()).unwrap();
        let flow = ComplexFlow::Panel(k.flow);
        let window = Window::square(Complex::new(0.0, 0.0), 1.0);
        assert!(sign_component_census(&flow, &window, 10).unwrap().inconclusive);
        assert!(!sign_component_census(&flow, &window, 200).unwrap().inconclusive);
    }

    #[test]
    fn nearly_flat_vertices_do_not_force_fine_cells() {
        use crate::incompressible::{PanelOptions, PanelSolution};
        let gon = Body::regular_polygon(128, 1.0f64, 0.0).unwrap();
        let sol = PanelSolution::solve(&gon, FarField::new(Complex::new(1.0, 0.0), 0.0), &PanelOptions::per_side(1)).unwrap();
        let c = sign_component_census(&sol, &Window::square(Complex::new(0.0, 0.0), 4.5), 100).unwrap();
        assert!(!c.inconclusive);
        assert_eq!((c.positive_bounded, c.negative_bounded), (0, 0));
    }
}
