//! Bodies with corners, corner classification, probe rings and integration
//! contours.
//!
//! Points in the plane are complex numbers `x + iy`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

pub type Point<T> = Complex<T>;

/// A boundary corner with fluid-side angle `beta`.
///
/// `side_directions[0]` and `side_directions[1]` are unit vectors along the
/// two adjacent sides, pointing away from the vertex. The fluid wedge is swept
/// counterclockwise from the first to the second, covering exactly `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner<T> {
    pub vertex: Point<T>,
    pub beta: T,
    pub protruding: bool,
    pub side_directions: [Point<T>; 2],
    /// Largest probe radius that stays inside the local straight-sided wedge.
    pub reach: T,
}

impl<T: Real> Corner<T> {
    /// Builds a corner from its vertex, the first side direction and the
    /// fluid-side angle.
    pub fn new(vertex: Point<T>, first_side: Point<T>, beta: T, reach: T) -> Result<Self> {
        let two_pi = T::TAU();
        if !(beta > T::zero() && beta <= two_pi) {
            return Err(Error::InvalidGeometry(format!(
                "corner angle {beta} outside (0, 2pi]"
            )));
        }
        let norm = first_side.norm();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::InvalidGeometry("zero side direction".into()));
        }
        let d0 = first_side / norm;
        let d1 = d0 * Complex::from_polar(T::one(), beta);
        Ok(Self {
            vertex,
            beta,
            protruding: beta > T::PI(),
            side_directions: [d0, d1],
            reach,
        })
    }

    /// Exponent of the leading velocity mode, `pi/beta - 1`.
    pub fn singular_exponent(&self) -> T {
        T::PI() / self.beta - T::one()
    }

    /// Corner-aligned polar coordinates `(r, theta)` of `z`; theta is measured
    /// counterclockwise from the first side and lies in `[0, 2pi)`.
    pub fn local_polar(&self, z: Point<T>) -> (T, T) {
        let local = (z - self.vertex) / self.side_directions[0];
        let mut theta = local.arg();
        if theta < T::zero() {
            theta += T::TAU();
        }
        (local.norm(), theta)
    }

    pub fn point_at(&self, r: T, theta: T) -> Point<T> {
        self.vertex + self.side_directions[0] * Complex::from_polar(r, theta)
    }
}

/// Shape of a body.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyKind<T> {
    Circle { radius: T },
    /// Segment of length `chord` centered at the origin. Positive `alpha`
    /// raises the leading (upstream, `x < 0`) edge: the plate points along
    /// `exp(-i alpha)`.
    FlatPlate { chord: T, alpha: T },
    /// Simple polygon with counterclockwise vertices.
    Polygon { vertices: Vec<Point<T>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Body<T> {
    pub kind: BodyKind<T>,
    pub corners: Vec<Corner<T>>,
}

impl<T: Real> Body<T> {
    pub const LEADING_EDGE: usize = 0;
    pub const TRAILING_EDGE: usize = 1;

    pub fn circle(radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!("circle radius {radius}")));
        }
        Ok(Self {
            kind: BodyKind::Circle { radius },
            corners: Vec::new(),
        })
    }

    /// Flat plate; corner 0 is the leading edge, corner 1 the trailing edge,
    /// both with `beta = 2 pi`.
    pub fn flat_plate(chord: T, alpha: T) -> Result<Self> {
        if !(chord > T::zero() && chord.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "flat plate chord {chord}, incidence {alpha}"
            )));
        }
        let dir = Complex::from_polar(T::one(), -alpha);
        let half = chord / T::of(2.0);
        let leading = Corner::new(-dir * half, dir, T::TAU(), chord)?;
        let trailing = Corner::new(dir * half, -dir, T::TAU(), chord)?;
        Ok(Self {
            kind: BodyKind::FlatPlate { chord, alpha },
            corners: vec![leading, trailing],
        })
    }

    pub fn polygon(vertices: Vec<Point<T>>) -> Result<Self> {
        let corners = classify_corners(&vertices)?;
        Ok(Self {
            kind: BodyKind::Polygon { vertices },
            corners,
        })
    }

    /// Regular `n`-gon inscribed in the circle of the given radius, with a
    /// vertex at angle `phase`.
    pub fn regular_polygon(n: usize, radius: T, phase: T) -> Result<Self> {
        let vertices = (0..n)
            .map(|k| {
                Complex::from_polar(radius, phase + T::TAU() * T::of_usize(k) / T::of_usize(n))
            })
            .collect();
        Self::polygon(vertices)
    }

    pub fn centroid(&self) -> Point<T> {
        match &self.kind {
            BodyKind::Circle { .. } | BodyKind::FlatPlate { .. } => Complex::new(T::zero(), T::zero()),
            BodyKind::Polygon { vertices } => polygon_centroid(vertices),
        }
    }

    /// Radius of the smallest centroid-centered disc containing the body.
    pub fn circumradius(&self) -> T {
        match &self.kind {
            BodyKind::Circle { radius } => *radius,
            BodyKind::FlatPlate { chord, .. } => *chord / T::of(2.0),
            BodyKind::Polygon { vertices } => {
                let c = polygon_centroid(vertices);
                vertices.iter().map(|v| (v - c).norm()).fold(T::zero(), T::max)
            }
        }
    }

    /// Straight boundary segments (empty for the circle).
    pub fn segments(&self) -> Vec<(Point<T>, Point<T>)> {
        match &self.kind {
            BodyKind::Circle { .. } => Vec::new(),
            BodyKind::FlatPlate { .. } => vec![(self.corners[0].vertex, self.corners[1].vertex)],
            BodyKind::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|k| (vertices[k], vertices[(k + 1) % n])).collect()
            }
        }
    }

    /// Whether `z` lies strictly inside the solid. A plate has no interior.
    pub fn contains(&self, z: Point<T>) -> bool {
        match &self.kind {
            BodyKind::Circle { radius } => z.norm() < *radius,
            BodyKind::FlatPlate { .. } => false,
            BodyKind::Polygon { vertices } => point_in_polygon(vertices, z),
        }
    }

    /// Euclidean distance from `z` to the body boundary.
    pub fn distance_to_boundary(&self, z: Point<T>) -> T {
        match &self.kind {
            BodyKind::Circle { radius } => (z.norm() - *radius).abs(),
            _ => self
                .segments()
                .iter()
                .map(|&(a, b)| segment_distance(a, b, z))
                .fold(T::infinity(), T::min),
        }
    }

    /// `Ok` when `z` is a fluid point at least `clearance` from the boundary.
    pub fn check_fluid_point(&self, z: Point<T>, clearance: T) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {z}")));
        }
        if self.contains(z) {
            return Err(Error::Domain(format!("point {z} lies inside the body")));
        }
        if self.distance_to_boundary(z) <= clearance {
            return Err(Error::Domain(format!("point {z} lies on the body boundary")));
        }
        Ok(())
    }
}

/// Classifies every vertex of a simple counterclockwise polygon.
pub fn classify_corners<T: Real>(vertices: &[Point<T>]) -> Result<Vec<Corner<T>>> {
    validate_polygon(vertices)?;
    let n = vertices.len();
    let edges: Vec<(Point<T>, Point<T>)> =
        (0..n).map(|k| (vertices[k], vertices[(k + 1) % n])).collect();
    let mut corners = Vec::with_capacity(n);
    for k in 0..n {
        let v = vertices[k];
        let prev = vertices[(k + n - 1) % n];
        let next = vertices[(k + 1) % n];
        let d_in = prev - v;
        let d_out = next - v;
        // Fluid lies counterclockwise from the incoming side.
        let mut beta = (d_out / d_in).arg();
        if beta <= T::zero() {
            beta += T::TAU();
        }
        let mut reach = d_in.norm().min(d_out.norm());
        for (j, &(a, b)) in edges.iter().enumerate() {
            if j == k || j == (k + n - 1) % n {
                continue;
            }
            reach = reach.min(segment_distance(a, b, v));
        }
        corners.push(Corner::new(v, d_in, beta, reach)?);
    }
    Ok(corners)
}

fn validate_polygon<T: Real>(vertices: &[Point<T>]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::InvalidGeometry(format!(
            "polygon needs at least 3 vertices, got {n}"
        )));
    }
    if vertices.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidGeometry("non-finite vertex".into()));
    }
    let scale = vertices.iter().map(|v| v.norm()).fold(T::zero(), T::max).max(T::one());
    let tiny = T::of(1e3) * T::epsilon() * scale;
    for k in 0..n {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        let c = vertices[(k + 2) % n];
        if (b - a).norm() <= tiny {
            return Err(Error::InvalidGeometry(format!("repeated vertex at index {}", (k + 1) % n)));
        }
        let cross = cross(b - a, c - b);
        if cross.abs() <= tiny * ((b - a).norm() + (c - b).norm()) {
            return Err(Error::InvalidGeometry(format!(
                "collinear adjacent edges at vertex {}",
                (k + 1) % n
            )));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::InvalidGeometry(format!(
                    "edges {i} and {j} intersect; polygon is not simple"
                )));
            }
        }
    }
    if signed_area(vertices) <= T::zero() {
        return Err(Error::InvalidGeometry(
            "polygon vertices must be counterclockwise".into(),
        ));
    }
    Ok(())
}

#[inline]
fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a.re * b.im - a.im * b.re
}

pub fn signed_area<T: Real>(vertices: &[Point<T>]) -> T {
    let n = vertices.len();
    (0..n)
        .map(|k| cross(vertices[k], vertices[(k + 1) % n]))
        .sum::<T>()
        / T::of(2.0)
}

fn polygon_centroid<T: Real>(vertices: &[Point<T>]) -> Point<T> {
    let n = vertices.len();
    let area = signed_area(vertices);
    let mut c = Complex::new(T::zero(), T::zero());
    for k in 0..n {
        let (a, b) = (vertices[k], vertices[(k + 1) % n]);
        c += (a + b) * cross(a, b);
    }
    c / (T::of(6.0) * area)
}

fn point_in_polygon<T: Real>(vertices: &[Point<T>], z: Point<T>) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for k in 0..n {
        let (a, b) = (vertices[k], vertices[(k + 1) % n]);
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn segment_distance<T: Real>(a: Point<T>, b: Point<T>, z: Point<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 > T::zero() {
        (((z - a) * ab.conj()).re / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    (z - (a + ab * t)).norm()
}

fn segments_intersect<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let o1 = cross(b - a, c - a);
    let o2 = cross(b - a, d - a);
    let o3 = cross(d - c, a - c);
    let o4 = cross(d - c, b - c);
    if ((o1 > T::zero()) != (o2 > T::zero())) && ((o3 > T::zero()) != (o4 > T::zero())) {
        return o1 != T::zero() && o2 != T::zero() && o3 != T::zero() && o4 != T::zero();
    }
    let on = |p: Point<T>, q: Point<T>, r: Point<T>, o: T| {
        o == T::zero()
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// A sample point near a corner, with its corner-aligned polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint<T> {
    pub z: Point<T>,
    pub r: T,
    pub theta: T,
    pub ring: usize,
}

/// Fraction of the wedge angle kept away from each wall by probe rings.
pub const DEFAULT_WALL_MARGIN: f64 = 0.05;

/// Rings of probe points inside the fluid wedge of `corner`.
pub fn probe_ring<T: Real>(corner: &Corner<T>, radii: &[T], samples_per_radius: usize) -> Result<Vec<ProbePoint<T>>> {
    probe_ring_with_margin(corner, radii, samples_per_radius, T::of(DEFAULT_WALL_MARGIN))
}

pub fn probe_ring_with_margin<T: Real>(
    corner: &Corner<T>,
    radii: &[T],
    samples_per_radius: usize,
    margin_fraction: T,
) -> Result<Vec<ProbePoint<T>>> {
    if samples_per_radius < 2 {
        return Err(Error::InvalidParameter(
            "probe rings need at least 2 samples per radius".into(),
        ));
    }
    if !(margin_fraction > T::zero() && margin_fraction < T::of(0.5)) {
        return Err(Error::InvalidParameter(format!("wall margin {margin_fraction}")));
    }
    let margin = margin_fraction * corner.beta;
    let span = corner.beta - margin * T::of(2.0);
    let mut out = Vec::with_capacity(radii.len() * samples_per_radius);
    for (ring, &r) in radii.iter().enumerate() {
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("probe radius {r}")));
        }
        if r >= corner.reach {
            return Err(Error::GeometryClip {
                radius: r.to64(),
                reach: corner.reach.to64(),
            });
        }
        for j in 0..samples_per_radius {
            let theta = margin + span * T::of_usize(j) / T::of_usize(samples_per_radius - 1);
            out.push(ProbePoint {
                z: corner.point_at(r, theta),
                r,
                theta,
                ring,
            });
        }
    }
    Ok(out)
}

/// Closed, counterclockwise integration contour.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contour<T> {
    Circle {
        center: Point<T>,
        radius: T,
        samples: usize,
    },
    /// Closed polyline; the last point connects back to the first.
    Polyline { points: Vec<Point<T>> },
}

/// Each polyline edge is split into this many Gauss panels.
const POLYLINE_SUBDIVISIONS: usize = 16;

const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887),
    (-0.183_434_642_495_65, 0.362_683_783_378_362),
    (0.183_434_642_495_65, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

impl<T: Real> Contour<T> {
    pub fn circle(center: Point<T>, radius: T, samples: usize) -> Self {
        Contour::Circle {
            center,
            radius,
            samples,
        }
    }

    pub fn length(&self) -> T {
        match self {
            Contour::Circle { radius, .. } => T::TAU() * *radius,
            Contour::Polyline { points } => {
                let n = points.len();
                (0..n).map(|k| (points[(k + 1) % n] - points[k]).norm()).sum()
            }
        }
    }

    /// Quadrature nodes `(z_k, dz_k)` with `sum f(z_k) dz_k ~ closed integral of f dz`.
    /// `coarse` halves the resolution, for error estimates.
    pub fn nodes(&self, coarse: bool) -> Vec<(Point<T>, Point<T>)> {
        match self {
            Contour::Circle {
                center,
                radius,
                samples,
            } => {
                let n = if coarse { (*samples / 2).max(1) } else { *samples };
                let dt = T::TAU() / T::of_usize(n);
                (0..n)
                    .map(|k| {
                        let e = Complex::from_polar(*radius, dt * T::of_usize(k));
                        (*center + e, Complex::<T>::i() * e * dt)
                    })
                    .collect()
            }
            Contour::Polyline { points } => {
                let n = points.len();
                let mut out = Vec::new();
                let pieces = (0..n).flat_map(|k| {
                    let (a, b) = (points[k], points[(k + 1) % n]);
                    (0..POLYLINE_SUBDIVISIONS).map(move |j| {
                        let t0 = T::of_usize(j) / T::of_usize(POLYLINE_SUBDIVISIONS);
                        let t1 = T::of_usize(j + 1) / T::of_usize(POLYLINE_SUBDIVISIONS);
                        (a + (b - a) * t0, a + (b - a) * t1)
                    })
                });
                for (a, b) in pieces {
                    let half = (b - a) / T::of(2.0);
                    let mid = (a + b) / T::of(2.0);
                    if coarse {
                        // 2-point Gauss rule
                        let x = T::one() / T::of(3.0).sqrt();
                        out.push((mid - half * x, half));
                        out.push((mid + half * x, half));
                    } else {
                        for &(x, w) in &GAUSS8 {
                            out.push((mid + half * T::of(x), half * T::of(w)));
                        }
                    }
                }
                out
            }
        }
    }

    /// Winding test: whether the contour encloses `z`.
    pub fn encloses(&self, z: Point<T>) -> bool {
        match self {
            Contour::Circle { center, radius, .. } => (z - center).norm() < *radius,
            Contour::Polyline { points } => point_in_polygon(points, z),
        }
    }

    /// Checks that the contour is counterclockwise and stays in the fluid:
    /// the body must lie wholly inside or wholly outside it.
    pub fn check_against(&self, body: &Body<T>) -> Result<()> {
        if let Contour::Polyline { points } = self {
            if points.len() < 3 || signed_area(points) <= T::zero() {
                return Err(Error::Domain(
                    "contour must be a closed counterclockwise polyline".into(),
                ));
            }
        }
        if let Contour::Circle { radius, samples, .. } = self {
            if !(*radius > T::zero()) || *samples < 4 {
                return Err(Error::Domain("degenerate circular contour".into()));
            }
        }
        let probes = body_outline(body);
        let inside = probes.iter().filter(|&&p| self.encloses(p)).count();
        if inside != 0 && inside != probes.len() {
            return Err(Error::Domain("contour intersects the body".into()));
        }
        let clearance = T::of(1e-9) * body.circumradius();
        for (z, _) in self.nodes(false) {
            if body.contains(z) || body.distance_to_boundary(z) <= clearance {
                return Err(Error::Domain("contour touches the body".into()));
            }
        }
        Ok(())
    }
}

/// Dense sampling of the body boundary used for containment checks.
fn body_outline<T: Real>(body: &Body<T>) -> Vec<Point<T>> {
    match &body.kind {
        BodyKind::Circle { radius } => (0..64)
            .map(|k| Complex::from_polar(*radius, T::TAU() * T::of_usize(k) / T::of(64.0)))
            .collect(),
        _ => body
            .segments()
            .iter()
            .flat_map(|&(a, b)| {
                (0..16).map(move |k| a + (b - a) * (T::of_usize(k) / T::of(16.0)))
            })
            .chain(body.corners.last().map(|c| c.vertex))
            .collect(),
    }
}
