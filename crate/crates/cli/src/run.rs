//! Dispatch of a parsed scenario to the solvers and assembly of the summary.

use std::path::Path;

use anyhow::Result;
use cornerflow::analysis::{
    circulation, corner_census, farfield_fit_with_tolerance, fit_corner, mass_flux, sign_component_census,
    CensusOptions, CornerCensus, CornerFitOptions, Window,
};
use cornerflow::compressible::{build_grid, refinement_study, solve_subsonic, SolverOptions, StudyOptions};
use cornerflow::forces::{blasius_force, kutta_joukowsky_lift};
use cornerflow::gas::{BernoulliState, GasModel};
use cornerflow::geometry::{Body, BodyKind, Contour};
use cornerflow::incompressible::{
    kutta_solve, kutta_solve_refined, ComplexFlow, FarField, FlowField, KuttaOptions, PanelOptions, PanelSolution,
    PlateFlow,
};
use cornerflow::{BodyF64, Error};
use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{BodySpec, Method, Scenario};
use crate::export::{export_field, export_nodes};

pub const LABEL: &str = "finite-resolution signature";
const CONTOUR_SAMPLES: usize = 1024;
const FARFIELD_SAMPLES: usize = 256;

pub fn error_value(e: &Error) -> Value {
    let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
    match e {
        Error::SonicExcursion { x, y, flux_ratio, iteration } => {
            v["location"] = json!([x, y]);
            v["flux_ratio"] = json!(flux_ratio);
            v["iteration"] = json!(iteration);
        }
        Error::IterationLimit { history, .. } => v["residual_history"] = json!(history),
        _ => {}
    }
    v
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).unwrap_or(Value::Null)
}

pub fn build_body(spec: &BodySpec) -> cornerflow::Result<BodyF64> {
    match spec {
        BodySpec::Circle { radius } => Body::circle(*radius),
        BodySpec::FlatPlate { chord, alpha_deg } => Body::flat_plate(*chord, alpha_deg.to_radians()),
        BodySpec::Polygon { vertices } => Body::polygon(vertices.iter().map(|v| Complex::new(v[0], v[1])).collect()),
        BodySpec::RegularPolygon { sides, radius, phase_deg } => {
            Body::regular_polygon(*sides, *radius, phase_deg.to_radians())
        }
    }
}

fn fit_options(s: &Scenario) -> CornerFitOptions<f64> {
    CornerFitOptions {
        a1_tolerance: s.tolerances.a1_tolerance,
        psi_tolerance: s.tolerances.psi_tolerance,
        modes: s.tolerances.fit_modes,
        ..CornerFitOptions::default()
    }
}

fn panel_options(s: &Scenario) -> PanelOptions<f64> {
    PanelOptions {
        per_side: s.solver.panels_per_side,
        clustering: s.solver.clustering,
    }
}

/// Runs the scenario, filling `summary` as results arrive. Output files go
/// to `out`. The first solver error ends the run.
pub fn run(s: &Scenario, out: &Path, summary: &mut Map<String, Value>) -> std::result::Result<(), Error> {
    let body = build_body(&s.body)?;
    summary.insert(
        "body".into(),
        json!({
            "kind": to_value(&body.kind),
            "circumradius": body.circumradius(),
            "centroid": [body.centroid().re, body.centroid().im],
            "corners": body.corners.iter().enumerate().map(|(i, c)| json!({
                "id": i,
                "vertex": [c.vertex.re, c.vertex.im],
                "beta": c.beta,
                "protruding": c.protruding,
            })).collect::<Vec<_>>(),
        }),
    );
    match s.gas.as_ref().and_then(|g| g.mach_inf.map(|m| (g.gamma, m))) {
        Some((gamma, mach)) => run_compressible(s, &body, gamma, mach, out, summary),
        None => run_incompressible(s, &body, out, summary),
    }
}

fn run_incompressible(s: &Scenario, body: &BodyF64, out: &Path, summary: &mut Map<String, Value>) -> std::result::Result<(), Error> {
    let speed = s.flow.speed.unwrap_or(1.0);
    let angle = s.flow.angle_deg.to_radians();
    let w_inf = FarField::from_speed_angle(speed, angle, 0.0).w_inf;
    let scale = body.circumradius();
    let centroid = body.centroid();
    let has_closed_form = matches!(body.kind, BodyKind::Circle { .. } | BodyKind::FlatPlate { .. });

    let census_opts = |points: usize, margin: f64| CensusOptions {
        panels: panel_options(s),
        fit: fit_options(s),
        grid_points: points,
        margin,
    };

    let flow: Option<ComplexFlow<f64>> = if let Some(gamma) = s.flow.circulation {
        let far = FarField::new(w_inf, gamma);
        let panel = match s.solver.method {
            Method::Auto => !has_closed_form,
            Method::Exact => false,
            Method::Panel => true,
        };
        let flow = if panel {
            ComplexFlow::Panel(PanelSolution::solve(body, far, &panel_options(s))?)
        } else {
            ComplexFlow::exact(body, far)?
        };
        summary.insert("method".into(), json!(if panel { "panel" } else { "exact" }));
        Some(flow)
    } else if let Some(id) = s.flow.kutta_corner {
        if s.solver.method == Method::Exact {
            return Err(Error::Unsupported("the Kutta solve runs on panels".into()));
        }
        let opts = KuttaOptions {
            panels: panel_options(s),
            fit: fit_options(s),
            refine_tolerance: s.tolerances.kutta_refine_tolerance,
            ..KuttaOptions::default()
        };
        let result = if s.solver.refine {
            kutta_solve_refined(body, w_inf, id, &opts)?
        } else {
            kutta_solve(body, w_inf, id, &opts)?
        };
        let mut k = to_value(&result);
        if let BodyKind::FlatPlate { chord, alpha } = body.kind {
            let plate = PlateFlow::new(chord, alpha, FarField::new(w_inf, 0.0))?;
            k["conformal_circulation"] = json!(plate.edge_regular_circulation(id == Body::<f64>::TRAILING_EDGE));
        }
        summary.insert("kutta".into(), k);
        summary.insert("method".into(), json!("panel"));
        Some(ComplexFlow::Panel(result.flow))
    } else if let Some(sweep) = &s.flow.circulation_sweep {
        let census = corner_census(body, w_inf, &census_opts(sweep.points, sweep.margin))?;
        let mut v = census_value(&census);
        if let Some([lo, hi]) = sweep.range {
            let n = sweep.points;
            let entries: Vec<_> = (0..n)
                .map(|k| CornerCensus::classify(&census.corners, lo + (hi - lo) * k as f64 / (n - 1) as f64))
                .collect();
            v["range_sweep"] = to_value(&entries);
        }
        summary.insert("census".into(), v);
        None
    } else {
        None
    };

    if s.analyses.census && s.flow.circulation_sweep.is_none() {
        let census = corner_census(body, w_inf, &census_opts(33, 0.25))?;
        summary.insert("census".into(), census_value(&census));
    }

    let Some(flow) = flow else {
        let wanted = s.analyses.corner_fits
            || s.analyses.far_field
            || s.analyses.forces
            || s.analyses.integrals
            || s.analyses.sign_census
            || s.analyses.field.is_some();
        if wanted {
            summary.insert("skipped".into(), json!("a circulation sweep has no single flow to analyse"));
        }
        return Ok(());
    };
    let far = flow.far_field();
    summary.insert(
        "flow".into(),
        json!({ "w_inf": [far.w_inf.re, far.w_inf.im], "circulation": far.circulation, "speed": speed, "angle_deg": s.flow.angle_deg }),
    );

    if s.analyses.integrals {
        let mut rows = Vec::new();
        for &r in &s.tolerances.contour_radii {
            let contour = Contour::circle(centroid, r * scale, CONTOUR_SAMPLES);
            let g = circulation(&flow, &contour)?;
            let q = mass_flux(&flow, &contour)?;
            rows.push(json!({
                "radius": r * scale,
                "circulation": g.value,
                "circulation_error": g.error_estimate,
                "mass_flux": q.value,
                "mass_flux_error": q.error_estimate,
            }));
        }
        summary.insert("integrals".into(), Value::Array(rows));
    }
    if s.analyses.far_field {
        let radii: Vec<f64> = s.tolerances.farfield_radii.iter().map(|r| r * scale).collect();
        let fit = farfield_fit_with_tolerance(&flow, &radii, FARFIELD_SAMPLES, s.tolerances.farfield_tolerance)?;
        summary.insert("far_field".into(), to_value(&fit));
    }
    if s.analyses.forces {
        let contour = Contour::circle(centroid, 2.0 * scale, CONTOUR_SAMPLES);
        let force = blasius_force(&flow, &contour, 1.0)?;
        let mut v = to_value(&force);
        v["kutta_joukowsky_lift"] = json!(kutta_joukowsky_lift(1.0, far.w_inf, far.circulation));
        summary.insert("forces".into(), v);
    }
    if s.analyses.corner_fits {
        let opts = fit_options(s);
        let reports: Vec<Value> = (0..body.corners.len())
            .map(|id| match fit_corner(&flow, id, &opts) {
                Ok(r) => to_value(&r),
                Err(e) => json!({ "corner_id": id, "error": error_value(&e) }),
            })
            .collect();
        summary.insert("corners".into(), Value::Array(reports));
    }
    if s.analyses.sign_census {
        let window = Window::square(centroid, s.tolerances.sign_half_width * scale);
        let census = sign_component_census(&flow, &window, s.tolerances.sign_resolution)?;
        let mut v = to_value(&census);
        v["window"] = to_value(&window);
        summary.insert("sign_census".into(), v);
    }
    if let Some(field) = &s.analyses.field {
        if let Some([x_min, x_max, y_min, y_max]) = field.window {
            let path = out.join(&s.outputs.field);
            let window = Window { x_min, x_max, y_min, y_max };
            let stats = export_field(&flow, &window, field.resolution, &path).map_err(|e| Error::Domain(format!("{e:#}")))?;
            summary.insert("field".into(), json!({ "path": s.outputs.field, "rows": stats.rows, "masked": stats.masked }));
        }
    }
    Ok(())
}

fn census_value(census: &CornerCensus<f64>) -> Value {
    let mut v = to_value(census);
    v["verdict_text"] = json!(census.verdict.describe());
    v["sweep_min_singular"] = json!(census.sweep_min_singular());
    v
}

fn run_compressible(
    s: &Scenario,
    body: &BodyF64,
    gamma: f64,
    mach: f64,
    out: &Path,
    summary: &mut Map<String, Value>,
) -> std::result::Result<(), Error> {
    let gas = GasModel::new(gamma)?;
    let circulation = s.flow.circulation.unwrap_or(0.0);
    let t = &s.tolerances;
    let solver = SolverOptions {
        relaxation: t.relaxation,
        tolerance: t.picard_tolerance,
        max_iterations: t.max_iterations,
        capped: t.capped,
        ..SolverOptions::default()
    };
    summary.insert("gas".into(), json!({ "gamma": gamma, "mach_inf": mach }));
    if s.analyses.refinement_study {
        let opts = StudyOptions {
            far_radius: s.solver.far_radius,
            levels: t.refinement_levels.iter().map(|l| (l[0], l[1])).collect(),
            corner_fraction: t.corner_fraction,
            solver,
        };
        let study = refinement_study(body, &gas, mach, circulation, &opts)?;
        summary.insert("refinement_study".into(), to_value(&study));
        return Ok(());
    }
    let state = BernoulliState::from_free_stream(&gas, mach)?;
    let speed = state.speed_at_unit_density(&gas)?;
    let far = FarField::from_speed_angle(speed, s.flow.angle_deg.to_radians(), circulation);
    let [n_r, n_theta] = s.solver.grid;
    let grid = build_grid(body, s.solver.far_radius * body.circumradius(), n_r, n_theta)?;
    let sol = solve_subsonic(&grid, &gas, &state, far, &solver)?;
    let mut v = to_value(&sol);
    v["grid"] = json!({ "n_r": n_r, "n_theta": n_theta, "r_far": s.solver.far_radius * body.circumradius() });
    summary.insert("compressible".into(), v);
    if s.analyses.field.is_some() {
        let path = out.join(&s.outputs.field);
        let stats = export_nodes(&sol, &path).map_err(|e| Error::Domain(format!("{e:#}")))?;
        summary.insert("field".into(), json!({ "path": s.outputs.field, "rows": stats.rows, "masked": stats.masked }));
    }
    Ok(())
}

/// Writes `summary` as pretty JSON with a trailing newline.
pub fn write_summary(path: &Path, summary: &Map<String, Value>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

