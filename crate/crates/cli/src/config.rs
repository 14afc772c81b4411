//! Scenario files: JSON, versioned by `schema_version`.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub body: BodySpec,
    #[serde(default)]
    pub gas: Option<GasSpec>,
    pub flow: FlowSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Circle {
        radius: f64,
    },
    FlatPlate {
        chord: f64,
        alpha_deg: f64,
    },
    /// Counterclockwise vertices.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    RegularPolygon {
        sides: usize,
        radius: f64,
        #[serde(default)]
        phase_deg: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSpec {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub mach_inf: Option<f64>,
    #[serde(default)]
    pub incompressible: bool,
}

fn default_gamma() -> f64 {
    1.4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    /// Free-stream speed; compressible runs take it from the Mach number.
    #[serde(default)]
    pub speed: Option<f64>,
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default)]
    pub circulation: Option<f64>,
    #[serde(default)]
    pub kutta_corner: Option<usize>,
    #[serde(default)]
    pub circulation_sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_sweep_points")]
    pub points: usize,
    /// Margin beyond the outermost corner roots, relative to their spread.
    #[serde(default = "default_sweep_margin")]
    pub margin: f64,
    /// Explicit range, classified in addition to the automatic sweep.
    #[serde(default)]
    pub range: Option<[f64; 2]>,
}

fn default_sweep_points() -> usize {
    33
}

fn default_sweep_margin() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form when available, panels otherwise.
    #[default]
    Auto,
    Exact,
    Panel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub method: Method,
    pub panels_per_side: usize,
    /// Cosine clustering strength toward corners, 0 for uniform panels.
    pub clustering: f64,
    /// Refine the Kutta solve until the circulation settles.
    pub refine: bool,
    /// Compressible grid `[n_r, n_theta]`.
    pub grid: [usize; 2],
    /// Outer radius of the compressible grid in body circumradii.
    pub far_radius: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            panels_per_side: 128,
            clustering: 1.0,
            refine: false,
            grid: [128, 256],
            far_radius: 25.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Analyses {
    pub corner_fits: bool,
    pub census: bool,
    pub far_field: bool,
    pub forces: bool,
    pub integrals: bool,
    pub sign_census: bool,
    pub refinement_study: bool,
    pub field: Option<FieldSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// `[x_min, x_max, y_min, y_max]`; compressible runs export grid nodes
    /// and take no window.
    #[serde(default)]
    pub window: Option<[f64; 4]>,
    #[serde(default = "default_field_resolution")]
    pub resolution: usize,
}

fn default_field_resolution() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub summary: String,
    pub field: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            summary: "summary.json".into(),
            field: "field.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub a1_tolerance: f64,
    pub psi_tolerance: f64,
    pub fit_modes: usize,
    pub kutta_refine_tolerance: f64,
    pub farfield_tolerance: f64,
    /// Far-field fit radii in body circumradii.
    pub farfield_radii: Vec<f64>,
    /// Nested contour radii in body circumradii.
    pub contour_radii: Vec<f64>,
    pub picard_tolerance: f64,
    pub relaxation: f64,
    pub max_iterations: usize,
    pub capped: bool,
    pub sign_resolution: usize,
    /// Half width of the sign census window in body circumradii.
    pub sign_half_width: f64,
    pub refinement_levels: Vec<[usize; 2]>,
    pub corner_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            a1_tolerance: 1e-3,
            psi_tolerance: 1e-10,
            fit_modes: 6,
            kutta_refine_tolerance: 1e-3,
            farfield_tolerance: 0.05,
            farfield_radii: vec![5.0, 8.0, 12.0],
            contour_radii: vec![1.5, 3.0, 6.0],
            picard_tolerance: 1e-10,
            relaxation: 0.7,
            max_iterations: 300,
            capped: false,
            sign_resolution: 400,
            sign_half_width: 4.5,
            refinement_levels: vec![[64, 128], [128, 256], [256, 512]],
            corner_fraction: 0.1,
        }
    }
}

/// Schema violation, anchored to a line of the scenario file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at_key(text: &str, key: &str, message: String) -> Self {
        Self {
            line: line_of_key(text, key),
            column: None,
            message,
        }
    }

    fn plain(message: String) -> Self {
        Self {
            line: None,
            column: None,
            message,
        }
    }
}

/// First line containing `"key"` followed by a colon.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines()
        .position(|l| l.find(&quoted).is_some_and(|p| l[p + quoted.len()..].trim_start().starts_with(':')))
        .map(|i| i + 1)
}

/// Applies `key.path=value` to the raw JSON. The value is parsed as JSON
/// and falls back to a string.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::plain(format!("override `{spec}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| ConfigError::plain(format!("override `{path}`: `{}` is not an object", keys[..i].join("."))))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(ConfigError::plain(format!("override `{spec}` has an empty key")))
}

/// Parses, applies overrides and validates a scenario.
pub fn parse(text: &str, overrides: &[String]) -> Result<Scenario, ConfigError> {
    let anchored = |e: serde_json::Error| ConfigError {
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    };
    let mut scenario: Scenario = serde_json::from_str(text).map_err(anchored)?;
    if !overrides.is_empty() {
        let mut value: Value = serde_json::from_str(text).map_err(anchored)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        scenario = serde_json::from_value(value)
            .map_err(|e| ConfigError::plain(format!("after overrides: {e}")))?;
    }
    validate(&scenario, text)?;
    Ok(scenario)
}

fn validate(s: &Scenario, text: &str) -> Result<(), ConfigError> {
    let err = |key: &str, msg: String| Err(ConfigError::at_key(text, key, msg));
    if s.schema_version != SCHEMA_VERSION {
        return err(
            "schema_version",
            format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", s.schema_version),
        );
    }
    let f = &s.flow;
    let given = [f.circulation.is_some(), f.kutta_corner.is_some(), f.circulation_sweep.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given != 1 {
        return err(
            "flow",
            format!("flow must set exactly one of circulation, kutta_corner, circulation_sweep ({given} given)"),
        );
    }
    let corners = match &s.body {
        BodySpec::Circle { .. } => 0,
        BodySpec::FlatPlate { .. } => 2,
        BodySpec::Polygon { vertices } => vertices.len(),
        BodySpec::RegularPolygon { sides, .. } => *sides,
    };
    if let Some(id) = f.kutta_corner {
        if id >= corners {
            return err("kutta_corner", format!("corner {id} does not exist (body has {corners})"));
        }
    }
    if let Some(sweep) = &f.circulation_sweep {
        if sweep.points < 2 {
            return err("circulation_sweep", "a sweep needs at least 2 points".into());
        }
    }
    if let Some(gas) = &s.gas {
        if gas.incompressible == gas.mach_inf.is_some() {
            return err("gas", "gas must set exactly one of mach_inf, incompressible".into());
        }
        if let Some(m) = gas.mach_inf {
            if !matches!(s.body, BodySpec::Circle { .. } | BodySpec::FlatPlate { .. }) {
                return err("body", "compressible runs support circle and flat_plate bodies only".into());
            }
            if f.circulation.is_none() {
                return err("flow", "compressible runs take an explicit circulation".into());
            }
            if f.speed.is_some() {
                return err("speed", "compressible runs set the speed through mach_inf".into());
            }
            if !(0.0..1.0).contains(&m) {
                return err("mach_inf", format!("mach_inf {m} must lie in [0, 1)"));
            }
        }
    }
    let compressible = s.gas.as_ref().is_some_and(|g| g.mach_inf.is_some());
    if s.analyses.refinement_study && !compressible {
        return err("refinement_study", "a refinement study needs a compressible gas".into());
    }
    if s.solver.method == Method::Exact && !matches!(s.body, BodySpec::Circle { .. } | BodySpec::FlatPlate { .. }) {
        return err("method", "closed-form flows exist only for circles and flat plates".into());
    }
    if let Some(field) = &s.analyses.field {
        match field.window {
            Some([x0, x1, y0, y1]) => {
                if !(x1 > x0 && y1 > y0) || field.resolution == 0 {
                    return err("field", "field window must have positive extent and resolution".into());
                }
            }
            None if !compressible => return err("field", "field export needs a window".into()),
            None => {}
        }
    }
    Ok(())
}
