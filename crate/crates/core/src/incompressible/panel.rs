//! Linear-strength vortex panel method.
//!
//! The body boundary carries a vortex sheet whose strength varies linearly
//! between panel nodes; nodes at corners are shared by both adjacent sides.
//! Slip is imposed as zero net normal flux through every panel, i.e. equal
//! stream function values at the two ends of each panel. On a closed body
//! the flux equations sum to zero, so one of them is replaced by the
//! circulation constraint `sum of integrated strengths = Gamma`.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::FarField;
use crate::error::{Error, Result};
use crate::geometry::{Body, BodyKind, Point};
use crate::linalg::LuFactor;
use crate::real::Real;

/// Panel discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PanelOptions<T> {
    /// Panels on each polygon side (on the whole chord for a plate).
    pub per_side: usize,
    /// Blend between uniform (0) and cosine (1) node spacing on each side.
    pub clustering: T,
}

impl<T: Real> Default for PanelOptions<T> {
    fn default() -> Self {
        Self {
            per_side: 128,
            clustering: T::one(),
        }
    }
}

impl<T: Real> PanelOptions<T> {
    pub fn per_side(per_side: usize) -> Self {
        Self {
            per_side,
            ..Self::default()
        }
    }
}

/// Nodes of the discretized boundary.
#[derive(Debug, Clone, Serialize)]
pub struct PanelLayout<T> {
    body: Body<T>,
    nodes: Vec<Point<T>>,
    closed: bool,
    /// Node index of each body corner.
    corner_nodes: Vec<usize>,
    #[serde(skip)]
    panels: Vec<Panel<T>>,
    #[serde(skip)]
    clusters: Vec<Cluster<T>>,
}

/// Consecutive panels grouped for far-field expansion.
#[derive(Debug, Clone)]
struct Cluster<T> {
    panels: std::ops::Range<usize>,
    center: Point<T>,
    radius: T,
}

/// Panels per cluster.
const CLUSTER_SIZE: usize = 16;
/// Expansion order of cluster far fields.
const EXPANSION_ORDER: usize = 32;
/// A cluster is expanded when the point is this many radii from its center.
const EXPANSION_RATIO: f64 = 3.0;

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    start: usize,
    end: usize,
    origin: Point<T>,
    /// Unit tangent from start to end.
    tangent: Complex<T>,
    len: T,
}

impl<T: Real> PanelLayout<T> {
    pub fn new(body: &Body<T>, opts: &PanelOptions<T>) -> Result<Self> {
        if !(opts.clustering >= T::zero() && opts.clustering <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "panel clustering {} outside [0, 1]",
                opts.clustering
            )));
        }
        let spacing = |j: usize, n: usize| {
            let u = T::of_usize(j) / T::of_usize(n);
            let cosine = (T::one() - (T::PI() * u).cos()) / T::of(2.0);
            (T::one() - opts.clustering) * u + opts.clustering * cosine
        };
        let n = opts.per_side;
        let (nodes, closed, corner_nodes) = match &body.kind {
            BodyKind::Circle { .. } => {
                return Err(Error::Unsupported(
                    "panel solver needs a polygon or flat plate; use the exact circle flow".into(),
                ))
            }
            BodyKind::FlatPlate { .. } => {
                if n < 8 {
                    return Err(Error::InvalidParameter(format!(
                        "flat plate needs at least 8 panels, got {n}"
                    )));
                }
                let a = body.corners[Body::<T>::LEADING_EDGE].vertex;
                let b = body.corners[Body::<T>::TRAILING_EDGE].vertex;
                let nodes = (0..=n).map(|j| a + (b - a) * spacing(j, n)).collect();
                (nodes, false, vec![0, n])
            }
            BodyKind::Polygon { vertices } => {
                let m = vertices.len();
                if n == 0 || n * m < 8 {
                    return Err(Error::InvalidParameter(format!(
                        "polygon needs at least 8 panels in total, got {}",
                        n * m
                    )));
                }
                let mut nodes = Vec::with_capacity(n * m);
                let mut corner_nodes = Vec::with_capacity(m);
                for k in 0..m {
                    let (a, b) = (vertices[k], vertices[(k + 1) % m]);
                    corner_nodes.push(nodes.len());
                    for j in 0..n {
                        nodes.push(a + (b - a) * spacing(j, n));
                    }
                }
                (nodes, true, corner_nodes)
            }
        };
        let count = if closed { nodes.len() } else { nodes.len() - 1 };
        let panels: Vec<Panel<T>> = (0..count)
            .map(|k| {
                let start = k;
                let end = (k + 1) % nodes.len();
                let d = nodes[end] - nodes[start];
                let len = d.norm();
                Panel {
                    start,
                    end,
                    origin: nodes[start],
                    tangent: d / len,
                    len,
                }
            })
            .collect();
        let clusters = (0..panels.len())
            .step_by(CLUSTER_SIZE)
            .map(|start| {
                let range = start..(start + CLUSTER_SIZE).min(panels.len());
                let members = &panels[range.clone()];
                let center = members
                    .iter()
                    .map(|p: &Panel<T>| p.origin + p.tangent * (p.len / T::of(2.0)))
                    .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
                    / T::of_usize(members.len());
                let radius = members
                    .iter()
                    .flat_map(|p| [nodes[p.start], nodes[p.end]])
                    .map(|z| (z - center).norm())
                    .fold(T::zero(), T::max);
                Cluster {
                    panels: range,
                    center,
                    radius,
                }
            })
            .collect();
        Ok(Self {
            body: body.clone(),
            nodes,
            closed,
            corner_nodes,
            panels,
            clusters,
        })
    }

    pub fn body(&self) -> &Body<T> {
        &self.body
    }

    pub fn nodes(&self) -> &[Point<T>] {
        &self.nodes
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn corner_nodes(&self) -> &[usize] {
        &self.corner_nodes
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn perimeter(&self) -> T {
        self.panels.iter().map(|p| p.len).sum()
    }

    pub fn min_panel_length(&self) -> T {
        self.panels.iter().map(|p| p.len).fold(T::infinity(), T::min)
    }
}

/// Closed-form integrals over a panel laid along `[0, L]` of the real axis,
/// evaluated at local coordinate `z`.
mod kernel {
    use super::*;

    /// Above this `|z| / L` the integrals are summed as Laurent series.
    const FAR_RATIO: f64 = 4.0;
    const MAX_TERMS: usize = 80;

    #[inline]
    fn xlogx<T: Real>(u: Complex<T>) -> Complex<T> {
        if u.norm_sqr() == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            u * u.ln()
        }
    }

    #[inline]
    fn quad_log<T: Real>(u: Complex<T>) -> Complex<T> {
        // u^2/2 log u - u^2/4
        if u.norm_sqr() == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            let u2 = u * u;
            u2 * u.ln() / T::of(2.0) - u2 / T::of(4.0)
        }
    }

    /// `(int 1/(z-s) ds, int s/(z-s) ds)` over `[0, L]`.
    pub fn cauchy<T: Real>(z: Complex<T>, len: T) -> (Complex<T>, Complex<T>) {
        if z.norm() > T::of(FAR_RATIO) * len {
            cauchy_series(z, len)
        } else {
            let i0 = (z / (z - len)).ln();
            (i0, z * i0 - len)
        }
    }

    pub fn cauchy_series<T: Real>(z: Complex<T>, len: T) -> (Complex<T>, Complex<T>) {
        let q = Complex::from(len) / z;
        let mut qn = q;
        let mut i0 = Complex::new(T::zero(), T::zero());
        let mut i1 = Complex::new(T::zero(), T::zero());
        for n in 1..MAX_TERMS {
            let nf = T::of_usize(n);
            let t0 = qn / nf;
            i0 += t0;
            i1 += qn * len / (nf + T::one());
            if t0.norm() <= T::epsilon() * i0.norm() * T::of(0.01) {
                break;
            }
            qn *= q;
        }
        (i0, i1)
    }

    /// `(int log(z-s) ds, int s log(z-s) ds, log(z - L/2))` over `[0, L]`,
    /// all on one continuous branch of the logarithm along the panel.
    pub fn logarithmic<T: Real>(z: Complex<T>, len: T) -> (Complex<T>, Complex<T>, Complex<T>) {
        if z.norm() > T::of(FAR_RATIO) * len {
            logarithmic_series(z, len)
        } else {
            let zl = z - len;
            let k0 = xlogx(z) - xlogx(zl) - len;
            let k1 = z * k0 - (quad_log(z) - quad_log(zl));
            (k0, k1, (z - len / T::of(2.0)).ln())
        }
    }

    pub fn logarithmic_series<T: Real>(z: Complex<T>, len: T) -> (Complex<T>, Complex<T>, Complex<T>) {
        let lnz = z.ln();
        let q = Complex::from(len) / z;
        let mut qn = q;
        let mut s0 = Complex::new(T::zero(), T::zero());
        let mut s1 = Complex::new(T::zero(), T::zero());
        for n in 1..MAX_TERMS {
            let nf = T::of_usize(n);
            let t0 = qn / (nf * (nf + T::one()));
            s0 += t0;
            s1 += qn / (nf * (nf + T::of(2.0)));
            if t0.norm() <= T::epsilon() * s0.norm() * T::of(0.01) {
                break;
            }
            qn *= q;
        }
        let k0 = lnz * len - s0 * len;
        let k1 = lnz * (len * len / T::of(2.0)) - s1 * (len * len);
        let mid = lnz + (Complex::from(T::one()) - q / T::of(2.0)).ln();
        (k0, k1, mid)
    }
}

impl<T: Real> Panel<T> {
    #[inline]
    fn local(&self, z: Point<T>) -> Complex<T> {
        (z - self.origin) * self.tangent.conj()
    }

    /// Complex velocity induced at `z` by unit nodal strengths at the start
    /// and end nodes.
    #[inline]
    fn velocity_coeffs(&self, z: Point<T>) -> (Complex<T>, Complex<T>) {
        let (i0, i1) = kernel::cauchy(self.local(z), self.len);
        // 1 / (2 pi i t)
        let f = Complex::new(T::zero(), -T::one() / T::TAU()) * self.tangent.conj();
        (f * (i0 - i1 / self.len), f * (i1 / self.len))
    }

    /// Stream function induced at `z` by unit nodal strengths.
    #[inline]
    fn stream_coeffs(&self, z: Point<T>) -> (T, T) {
        let (k0, k1, _) = kernel::logarithmic(self.local(z), self.len);
        let f = -T::one() / T::TAU();
        (f * (k0 - k1 / self.len).re, f * (k1 / self.len).re)
    }
}

/// Assembled and factored panel equations for one body and layout. Solving
/// for several far fields reuses the factorization.
#[derive(Debug, Clone)]
pub struct PanelSystem<T> {
    layout: Arc<PanelLayout<T>>,
    lu: LuFactor<T>,
    /// Stream function at node `i` due to unit strength at node `j`.
    node_stream: Vec<T>,
    condition: T,
    dropped_equation: Option<usize>,
}

/// Largest accepted condition estimate, relative to `1 / epsilon`.
const CONDITION_LIMIT: f64 = 1e-3;

impl<T: Real> PanelSystem<T> {
    pub fn new(body: &Body<T>, opts: &PanelOptions<T>) -> Result<Self> {
        let layout = Arc::new(PanelLayout::new(body, opts)?);
        let n = layout.nodes.len();
        let node_stream: Vec<T> = layout
            .nodes
            .par_iter()
            .flat_map_iter(|&z| {
                let mut row = vec![T::zero(); n];
                for p in &layout.panels {
                    let (ca, cb) = p.stream_coeffs(z);
                    row[p.start] += ca;
                    row[p.end] += cb;
                }
                row
            })
            .collect();

        let mut matrix = vec![T::zero(); n * n];
        let dropped_equation = layout.closed.then(|| layout.panels.len() - 1);
        let mut row = 0;
        for (k, p) in layout.panels.iter().enumerate() {
            if Some(k) == dropped_equation {
                continue;
            }
            for j in 0..n {
                matrix[row * n + j] = (node_stream[p.end * n + j] - node_stream[p.start * n + j]) / p.len;
            }
            row += 1;
        }
        let perimeter = layout.perimeter();
        for p in &layout.panels {
            let w = p.len / (T::of(2.0) * perimeter);
            matrix[row * n + p.start] += w;
            matrix[row * n + p.end] += w;
        }
        debug_assert_eq!(row + 1, n);

        let lu = LuFactor::factor(n, matrix)?;
        let condition = lu.condition_estimate();
        if !(condition.is_finite() && condition * T::epsilon() < T::of(CONDITION_LIMIT)) {
            return Err(Error::SingularSystem {
                condition: condition.to64(),
            });
        }
        Ok(Self {
            layout,
            lu,
            node_stream,
            condition,
            dropped_equation,
        })
    }

    pub fn layout(&self) -> &PanelLayout<T> {
        &self.layout
    }

    pub fn condition(&self) -> T {
        self.condition
    }

    /// Index of the flux equation replaced by the circulation row.
    pub fn dropped_equation(&self) -> Option<usize> {
        self.dropped_equation
    }

    pub fn solve(&self, far: FarField<T>) -> Result<PanelSolution<T>> {
        if !(far.w_inf.re.is_finite() && far.w_inf.im.is_finite() && far.circulation.is_finite()) {
            return Err(Error::InvalidParameter("non-finite far field".into()));
        }
        let layout = &self.layout;
        let n = layout.nodes.len();
        let free = |z: Point<T>| (far.w_inf * z).im;
        let mut rhs = Vec::with_capacity(n);
        for (k, p) in layout.panels.iter().enumerate() {
            if Some(k) == self.dropped_equation {
                continue;
            }
            rhs.push(-(free(layout.nodes[p.end]) - free(layout.nodes[p.start])) / p.len);
        }
        rhs.push(far.circulation / layout.perimeter());
        let strengths = self.lu.solve(&rhs);

        let node_psi: Vec<T> = (0..n)
            .map(|i| {
                free(layout.nodes[i])
                    + (0..n).map(|j| self.node_stream[i * n + j] * strengths[j]).sum::<T>()
            })
            .collect();
        let body_stream = node_psi.iter().copied().sum::<T>() / T::of_usize(n);
        let tangency_residual = layout
            .panels
            .iter()
            .map(|p| ((node_psi[p.end] - node_psi[p.start]) / p.len).abs())
            .fold(T::zero(), T::max);
        let moments = cluster_moments(layout, &strengths);
        Ok(PanelSolution {
            layout: Arc::clone(&self.layout),
            moments,
            strengths,
            far,
            body_stream,
            tangency_residual,
            condition: self.condition,
        })
    }
}

/// Moments `int gamma(s) (zeta(s) - c)^k ds` of each cluster. With
/// `u = zeta - c` running linearly along a panel, the integrand is a
/// polynomial in `u` and integrates in closed form.
fn cluster_moments<T: Real>(layout: &PanelLayout<T>, strengths: &[T]) -> Vec<Vec<Complex<T>>> {
    layout
        .clusters
        .iter()
        .map(|cluster| {
            let mut m = vec![Complex::new(T::zero(), T::zero()); EXPANSION_ORDER + 1];
            for p in &layout.panels[cluster.panels.clone()] {
                let (ga, gb) = (strengths[p.start], strengths[p.end]);
                let u0 = p.origin - cluster.center;
                let u1 = u0 + p.tangent * p.len;
                // gamma = alpha + beta u, ds = du / t
                let beta = Complex::from((gb - ga) / p.len) / p.tangent;
                let alpha = Complex::from(ga) - beta * u0;
                let inv_t = p.tangent.conj();
                let (mut a0, mut a1) = (u0, u1);
                for (k, mk) in m.iter_mut().enumerate() {
                    let (b0, b1) = (a0 * u0, a1 * u1);
                    let kf = T::of_usize(k);
                    *mk += inv_t * (alpha * (a1 - a0) / (kf + T::one()) + beta * (b1 - b0) / (kf + T::of(2.0)));
                    a0 = b0;
                    a1 = b1;
                }
            }
            m
        })
        .collect()
}

/// Vortex-sheet solution for one far field.
#[derive(Debug, Clone)]
pub struct PanelSolution<T> {
    layout: Arc<PanelLayout<T>>,
    /// `int gamma (zeta - c)^k ds` per cluster, `k = 0..=EXPANSION_ORDER`.
    moments: Vec<Vec<Complex<T>>>,
    /// Sheet strength at each node.
    pub strengths: Vec<T>,
    pub far: FarField<T>,
    /// Raw stream function value on the body, subtracted on evaluation.
    pub body_stream: T,
    /// Largest mean normal velocity over any panel.
    pub tangency_residual: T,
    pub condition: T,
}

impl<T: Real> PanelSolution<T> {
    /// Solves from scratch; prefer [`PanelSystem::solve`] for repeated far fields.
    pub fn solve(body: &Body<T>, far: FarField<T>, opts: &PanelOptions<T>) -> Result<Self> {
        PanelSystem::new(body, opts)?.solve(far)
    }

    pub fn layout(&self) -> &PanelLayout<T> {
        &self.layout
    }

    pub fn body(&self) -> &Body<T> {
        &self.layout.body
    }

    /// Total circulation carried by the sheet.
    pub fn sheet_circulation(&self) -> T {
        self.layout
            .panels
            .iter()
            .map(|p| p.len * (self.strengths[p.start] + self.strengths[p.end]) / T::of(2.0))
            .sum()
    }

    fn check(&self, z: Point<T>) -> Result<()> {
        let clearance = T::of(1e-12) * self.layout.body.circumradius();
        self.layout.body.check_fluid_point(z, clearance)
    }

    pub fn velocity(&self, z: Point<T>) -> Result<Complex<T>> {
        self.check(z)?;
        let mut w = self.far.w_inf;
        for (cluster, moments) in self.layout.clusters.iter().zip(&self.moments) {
            let d = z - cluster.center;
            if d.norm() > cluster.radius * T::of(EXPANSION_RATIO) {
                // (1 / 2 pi i) sum M_k / d^(k+1)
                let inv = d.inv();
                let mut sum = Complex::new(T::zero(), T::zero());
                for m in moments.iter().rev() {
                    sum = (sum + m) * inv;
                }
                w += sum * Complex::new(T::zero(), -T::one() / T::TAU());
            } else {
                for p in &self.layout.panels[cluster.panels.clone()] {
                    let (ca, cb) = p.velocity_coeffs(z);
                    w += ca * self.strengths[p.start] + cb * self.strengths[p.end];
                }
            }
        }
        Ok(w)
    }

    pub fn stream(&self, z: Point<T>) -> Result<T> {
        self.check(z)?;
        let mut psi = (self.far.w_inf * z).im - self.body_stream;
        for (cluster, moments) in self.layout.clusters.iter().zip(&self.moments) {
            let d = z - cluster.center;
            if d.norm() > cluster.radius * T::of(EXPANSION_RATIO) {
                // -(1 / 2 pi) Re[M_0 log d - sum_{k>=1} M_k / (k d^k)]
                let inv = d.inv();
                let mut sum = Complex::new(T::zero(), T::zero());
                for (k, m) in moments.iter().enumerate().skip(1).rev() {
                    sum = (sum + m / T::of_usize(k)) * inv;
                }
                psi -= (moments[0] * d.ln() - sum).re / T::TAU();
            } else {
                for p in &self.layout.panels[cluster.panels.clone()] {
                    let (ca, cb) = p.stream_coeffs(z);
                    psi += ca * self.strengths[p.start] + cb * self.strengths[p.end];
                }
            }
        }
        Ok(psi)
    }

    /// Direct panel-by-panel evaluation, without cluster expansions.
    pub fn velocity_direct(&self, z: Point<T>) -> Result<Complex<T>> {
        self.check(z)?;
        let mut w = self.far.w_inf;
        for p in &self.layout.panels {
            let (ca, cb) = p.velocity_coeffs(z);
            w += ca * self.strengths[p.start] + cb * self.strengths[p.end];
        }
        Ok(w)
    }

    pub fn stream_direct(&self, z: Point<T>) -> Result<T> {
        self.check(z)?;
        let mut psi = (self.far.w_inf * z).im - self.body_stream;
        for p in &self.layout.panels {
            let (ca, cb) = p.stream_coeffs(z);
            psi += ca * self.strengths[p.start] + cb * self.strengths[p.end];
        }
        Ok(psi)
    }

    /// Complex potential with the circulation's logarithm centered at the
    /// body centroid (principal branch). Assumes the body is star-shaped with
    /// respect to its centroid.
    pub fn potential(&self, z: Point<T>) -> Result<Complex<T>> {
        self.check(z)?;
        let c = self.layout.body.centroid();
        let log_c = (z - c).ln();
        let two_pi_i = Complex::new(T::zero(), T::TAU());
        let mut total = Complex::new(T::zero(), T::zero());
        for p in &self.layout.panels {
            let (ga, gb) = (self.strengths[p.start], self.strengths[p.end]);
            let gamma_p = p.len * (ga + gb) / T::of(2.0);
            let (k0, k1, mid_log) = kernel::logarithmic(p.local(z), p.len);
            let log_t = Complex::new(T::zero(), p.tangent.arg());
            let g = log_t * gamma_p + (k0 - k1 / p.len) * ga + k1 / p.len * gb;
            let mid = p.origin + p.tangent * (p.len / T::of(2.0));
            let principal = ((z - mid) / (z - c)).ln();
            let shift = ((log_t + mid_log - log_c - principal).im / T::TAU()).round();
            total += g - log_c * gamma_p - two_pi_i * shift * gamma_p;
        }
        let circ = self.sheet_circulation();
        let induced = (total + log_c * circ) / two_pi_i;
        Ok(self.far.w_inf * z + induced - Complex::new(T::zero(), self.body_stream))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incompressible::{CircleFlow, FlowField};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn square() -> Body<f64> {
        Body::polygon(vec![
            Complex::new(-0.5, -0.5),
            Complex::new(0.5, -0.5),
            Complex::new(0.5, 0.5),
            Complex::new(-0.5, 0.5),
        ])
        .unwrap()
    }

    /// Brute-force Gauss-Legendre quadrature of the panel integrals, as an
    /// oracle for the closed forms.
    fn quad_panel(z: Complex<f64>, len: f64, weight: impl Fn(f64) -> f64) -> (Complex<f64>, f64) {
        let n = 20000;
        let h = len / n as f64;
        let mut w = Complex::new(0.0, 0.0);
        let mut psi = 0.0;
        for k in 0..n {
            let s = (k as f64 + 0.5) * h;
            let g = weight(s) * h;
            w += g / (Complex::new(0.0, 2.0 * PI) * (z - s));
            psi -= g * (z - s).norm().ln() / (2.0 * PI);
        }
        (w, psi)
    }

    #[test]
    fn kernels_match_quadrature() {
        let p = Panel {
            start: 0,
            end: 1,
            origin: Complex::new(0.0, 0.0),
            tangent: Complex::new(1.0, 0.0),
            len: 0.7,
        };
        for &z in &[
            Complex::new(0.3, 0.4),
            Complex::new(-0.2, -0.1),
            Complex::new(1.5, 0.05),
            Complex::new(3.2, -2.5),
            Complex::new(-0.5, 0.0),
        ] {
            let (va, vb) = p.velocity_coeffs(z);
            let (sa, sb) = p.stream_coeffs(z);
            let (wa, pa) = quad_panel(z, 0.7, |s| 1.0 - s / 0.7);
            let (wb, pb) = quad_panel(z, 0.7, |s| s / 0.7);
            assert!((va - wa).norm() < 1e-7, "{z}: {va} vs {wa}");
            assert!((vb - wb).norm() < 1e-7);
            assert_relative_eq!(sa, pa, epsilon = 1e-7);
            assert_relative_eq!(sb, pb, epsilon = 1e-7);
        }
    }

    #[test]
    fn series_and_closed_forms_agree() {
        let len = 1.0f64;
        for &(r, arg) in &[(3.5, 0.3), (4.5, 1.7), (6.0, 3.0), (3.0, -2.2), (5.0, -0.01)] {
            let z = Complex::from_polar(r, arg) + 0.5;
            let i0 = (z / (z - len)).ln();
            let (a0, a1) = (i0, z * i0 - len);
            let (b0, b1) = kernel::cauchy_series(z, len);
            assert!((a0 - b0).norm() < 1e-14 && (a1 - b1).norm() < 1e-14);
            // Closed form, bypassing the dispatch on |z|.
            let zl = z - len;
            let c0 = z * z.ln() - zl * zl.ln() - len;
            let q = |u: Complex<f64>| u * u * u.ln() / 2.0 - u * u / 4.0;
            let c1 = z * c0 - (q(z) - q(zl));
            let cm = (z - len / 2.0).ln();
            let (d0, d1, dm) = kernel::logarithmic_series(z, len);
            assert!((c0 - d0).norm() < 1e-13 && (c1 - d1).norm() < 1e-13 && (cm - dm).norm() < 1e-13);
        }
    }

    #[test]
    fn regular_polygon_matches_circle_formula() {
        let body = Body::regular_polygon(64, 1.0, 0.0).unwrap();
        let far = FarField::new(Complex::new(1.0, 0.0), 0.0);
        let sol = PanelSolution::solve(&body, far, &PanelOptions::per_side(1)).unwrap();
        let exact = CircleFlow::new(1.0, far).unwrap();
        let z = Complex::new(0.0, 2.0);
        let rel = (sol.velocity(z).unwrap() - exact.velocity(z).unwrap()).norm()
            / exact.velocity(z).unwrap().norm();
        assert!(rel < 2e-3, "relative error {rel}");
    }

    #[test]
    fn circulation_row_and_tangency() {
        let body = square();
        let system = PanelSystem::new(&body, &PanelOptions::per_side(32)).unwrap();
        let sol = system.solve(FarField::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
        assert!(sol.sheet_circulation().abs() < 1e-12);
        assert!(sol.tangency_residual < 1e-8, "{}", sol.tangency_residual);
        let sol = system.solve(FarField::new(Complex::new(1.0, 0.2), 1.3)).unwrap();
        assert_relative_eq!(sol.sheet_circulation(), 1.3, epsilon = 1e-12);
        assert!(sol.tangency_residual < 1e-8);
    }

    #[test]
    fn strengths_are_affine_in_circulation() {
        let body = Body::regular_polygon(3, 1.0, 0.0).unwrap();
        let system = PanelSystem::new(&body, &PanelOptions::per_side(16)).unwrap();
        let w = Complex::new(1.0, 0.0);
        let s0 = system.solve(FarField::new(w, 0.0)).unwrap().strengths;
        let s1 = system.solve(FarField::new(w, 1.0)).unwrap().strengths;
        let t = 0.37f64;
        let st = system.solve(FarField::new(w, t)).unwrap().strengths;
        for i in 0..st.len() {
            assert!((st[i] - ((1.0 - t) * s0[i] + t * s1[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn stream_vanishes_on_the_body() {
        let body = square();
        let sol = PanelSolution::solve(&body, FarField::new(Complex::new(1.0, 0.0), 0.4), &PanelOptions::per_side(32)).unwrap();
        for z in sol.layout().nodes().iter().step_by(7) {
            let outward = *z * 1e-9;
            assert!(sol.stream(z + outward).unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn potential_matches_stream_and_velocity() {
        let body = square();
        let sol = PanelSolution::solve(&body, FarField::new(Complex::new(1.0, 0.1), 0.8), &PanelOptions::per_side(16)).unwrap();
        for &z in &[Complex::new(1.0, 0.3), Complex::new(-0.7, -0.9), Complex::new(0.1, 3.0), Complex::new(-2.0, 0.1)] {
            let w = sol.potential(z).unwrap();
            assert!((w.im - sol.stream(z).unwrap()).abs() < 1e-10);
            let h = 1e-5;
            let d = (sol.potential(z + h).unwrap() - sol.potential(z - h).unwrap()) / (2.0 * h);
            assert!((d - sol.velocity(z).unwrap()).norm() < 1e-7);
        }
    }

    #[test]
    fn plate_panels_without_incidence_carry_no_vorticity() {
        let plate = Body::flat_plate(4.0, 0.0).unwrap();
        let sol = PanelSolution::solve(&plate, FarField::new(Complex::new(1.0, 0.0), 0.0), &PanelOptions::per_side(64)).unwrap();
        assert!(sol.strengths.iter().all(|g: &f64| g.abs() < 1e-12));
        assert!((sol.velocity(Complex::new(0.3, 0.2)).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn cluster_expansions_match_direct_sums() {
        let body = Body::regular_polygon(3, 1.0f64, 0.2).unwrap();
        let sol = PanelSolution::solve(&body, FarField::new(Complex::new(1.0, 0.3), -0.7), &PanelOptions::per_side(96)).unwrap();
        for &z in &[Complex::new(1.3, 0.1), Complex::new(-0.8, 0.9), Complex::new(4.0, -3.0), Complex::new(0.1, -0.75)] {
            assert!((sol.velocity(z).unwrap() - sol.velocity_direct(z).unwrap()).norm() < 1e-12);
            assert!((sol.stream(z).unwrap() - sol.stream_direct(z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_circle_and_coarse_layouts() {
        let circle = Body::circle(1.0).unwrap();
        assert!(matches!(PanelSystem::new(&circle, &PanelOptions::default()), Err(Error::Unsupported(_))));
        let plate = Body::flat_plate(1.0, 0.1).unwrap();
        assert!(PanelSystem::new(&plate, &PanelOptions::per_side(4)).is_err());
    }

    #[test]
    fn evaluation_inside_body_is_a_domain_error() {
        let sol = PanelSolution::solve(&square(), FarField::new(Complex::new(1.0, 0.0), 0.0), &PanelOptions::per_side(8)).unwrap();
        assert!(matches!(sol.velocity(Complex::new(0.1, 0.1)), Err(Error::Domain(_))));
        assert!(matches!(FlowField::stream(&sol, Complex::new(0.0, 0.0)), Err(Error::Domain(_))));
    }
}
