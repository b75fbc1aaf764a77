//! Problem description files.
//!
//! A problem is a TOML document:
//!
//! ```toml
//! name = "barrier"
//!
//! [mesh]
//! kind = "box"          # box | file | polygon_patch | segment
//! lo = [-2.0, -1.0, -1.0]
//! hi = [2.0, 1.0, 1.0]
//! cells = [8, 4, 4]
//!
//! [[fractures]]
//! vertices = [[-1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]]
//! eta = 0.1
//!
//! [coefficients]
//! matrix = 1.0
//! fractures = 100.0
//! traces = 1e4
//! eta = [inf, inf, inf]   # fractures, traces, points
//!
//! [boundary]
//! x_min = -2.0
//! x_max = 2.0
//!
//! [discretization]
//! family = "rt"
//! order = 1
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::assembly::Spaces;
use crate::error::{Error, Result};
use crate::geometry::{Plane, Point};
use crate::problem::{BoxBoundary, Coefficients};
use crate::solve::SolverOptions;
use crate::vem::{ElementSpace, Family};

/// Highest supported order.
pub const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub fractures: Vec<FractureConfig>,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub sources: SourceConfig,
    #[serde(default)]
    pub manufactured: Option<ManufacturedConfig>,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "problem".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    #[serde(flatten)]
    pub source: MeshSource,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSource {
    /// Structured grid, optionally split by full planes into general polyhedra.
    Box {
        lo: [f64; 3],
        hi: [f64; 3],
        cells: [usize; 3],
        #[serde(default)]
        planes: Vec<PlaneConfig>,
    },
    /// Mesh in the text format of [`crate::mesh::read_mesh`]; relative paths
    /// are resolved against the configuration file.
    File { path: PathBuf },
    /// Standalone polygonal mesh of the unit square.
    PolygonPatch { n: usize },
    /// Standalone segment mesh of `[0, 1]`.
    Segment { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    pub normal: [f64; 3],
    pub point: [f64; 3],
}

impl PlaneConfig {
    pub fn plane(&self) -> Plane {
        Plane::new(Point::from(self.normal).normalize(), &Point::from(self.point))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureConfig {
    pub vertices: Vec<[f64; 3]>,
    /// Overrides the common fracture transmissivity.
    #[serde(default)]
    pub transmissivity: Option<f64>,
    /// Overrides the common normal transmissivity.
    #[serde(default)]
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default = "one")]
    pub matrix: f64,
    #[serde(default = "one")]
    pub fractures: f64,
    #[serde(default = "one")]
    pub traces: f64,
    /// Normal transmissivity of fractures, traces and points; `inf` imposes
    /// pressure continuity.
    #[serde(default = "infinite")]
    pub eta: [f64; 3],
}

fn one() -> f64 {
    1.0
}

fn infinite() -> [f64; 3] {
    [f64::INFINITY; 3]
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        CoefficientConfig { matrix: 1.0, fractures: 1.0, traces: 1.0, eta: infinite() }
    }
}

fn inverse(eta: f64) -> Result<f64> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::Config(format!("normal transmissivity must be positive, got {eta}")));
    }
    Ok(if eta.is_infinite() { 0.0 } else { 1.0 / eta })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    /// Pressures imposed at trace intersections, located by coordinates.
    #[serde(default)]
    pub points: Vec<PointValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointValue {
    pub at: [f64; 3],
    pub pressure: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default)]
    pub matrix: f64,
    #[serde(default)]
    pub fractures: f64,
    #[serde(default)]
    pub traces: f64,
    #[serde(default)]
    pub points: f64,
}

/// Exact solution from which sources and boundary data are derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedConfig {
    pub field: FieldKind,
    /// Gradient of a linear field.
    #[serde(default)]
    pub gradient: [f64; 3],
    #[serde(default)]
    pub constant: f64,
    /// Terms `[c, i, j, k]` of `Σ c xⁱ yʲ zᵏ`.
    #[serde(default)]
    pub terms: Vec<[f64; 4]>,
    /// Impose the exact pressure at trace intersections.
    #[serde(default = "yes")]
    pub point_dirichlet: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Quartic,
    SinProduct,
    Linear,
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    #[serde(default = "rt")]
    pub family: Family,
    #[serde(default)]
    pub order: usize,
    /// RT order on fractures; defaults to the matrix pressure degree.
    #[serde(default)]
    pub fracture_order: Option<usize>,
    /// RT order on traces; defaults to the matrix pressure degree.
    #[serde(default)]
    pub trace_order: Option<usize>,
    /// Flow along traces; when off, traces carry a pressure multiplier only.
    #[serde(default = "yes")]
    pub trace_flow: bool,
}

fn rt() -> Family {
    Family::Rt
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig { family: Family::Rt, order: 0, fracture_order: None, trace_order: None, trace_flow: true }
    }
}

impl DiscretizationConfig {
    pub fn spaces(&self) -> Result<Spaces> {
        let orders = [Some(self.order), self.fracture_order, self.trace_order];
        if let Some(k) = orders.iter().flatten().find(|&&k| k > MAX_ORDER) {
            return Err(Error::Config(format!("order {k} exceeds the supported maximum {MAX_ORDER}")));
        }
        let mut s = Spaces::uniform(self.family, self.order)?;
        if let Some(k) = self.fracture_order {
            s.d2 = ElementSpace::new(2, k, Family::Rt)?;
        }
        if let Some(k) = self.trace_order {
            s.d1 = ElementSpace::new(1, k, Family::Rt)?;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "solver_tolerance")]
    pub tolerance: f64,
    #[serde(default = "direct_limit")]
    pub direct_limit: usize,
    #[serde(default)]
    pub deterministic: bool,
}

fn solver_tolerance() -> f64 {
    1e-10
}

fn direct_limit() -> usize {
    500_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tolerance: solver_tolerance(), direct_limit: direct_limit(), deterministic: false }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            direct_limit: self.direct_limit,
            deterministic: self.deterministic,
            ..SolverOptions::default()
        }
    }
}

/// Files written next to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "yes")]
    pub errors: bool,
    #[serde(default = "yes")]
    pub flux: bool,
    #[serde(default)]
    pub vtk: bool,
    #[serde(default)]
    pub matrix: bool,
    #[serde(default)]
    pub elements: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { errors: true, flux: true, vtk: false, matrix: false, elements: false }
    }
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ProblemConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn check(&self) -> Result<()> {
        self.discretization.spaces()?;
        for e in self.coefficients.eta {
            inverse(e)?;
        }
        let a = &self.coefficients;
        for (name, v) in [("matrix", a.matrix), ("fractures", a.fractures), ("traces", a.traces)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} transmissivity must be positive and finite")));
            }
        }
        for (i, f) in self.fractures.iter().enumerate() {
            if f.vertices.len() < 3 {
                return Err(Error::Config(format!("fracture {} has {} vertices", i + 1, f.vertices.len())));
            }
            if let Some(e) = f.eta {
                inverse(e)?;
            }
            if f.transmissivity.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::Config(format!("fracture {} transmissivity must be positive", i + 1)));
            }
        }
        let standalone = matches!(self.mesh.source, MeshSource::PolygonPatch { .. } | MeshSource::Segment { .. });
        if standalone && !self.fractures.is_empty() {
            return Err(Error::Config("standalone meshes take no fractures".into()));
        }
        if standalone && self.manufactured.is_none() {
            return Err(Error::Config("standalone meshes need a manufactured solution".into()));
        }
        if let MeshSource::Box { lo, hi, cells, .. } = &self.mesh.source {
            if cells.contains(&0) || (0..3).any(|i| hi[i] <= lo[i]) {
                return Err(Error::Config("box mesh needs positive extents and cell counts".into()));
            }
        }
        if let Some(m) = &self.manufactured {
            if m.field == FieldKind::Polynomial && m.terms.is_empty() {
                return Err(Error::Config("polynomial field without terms".into()));
            }
            if m.terms.iter().any(|t| t[1..].iter().any(|e| *e < 0.0 || e.fract() != 0.0)) {
                return Err(Error::Config("polynomial exponents must be non-negative integers".into()));
            }
        }
        Ok(())
    }

    pub fn fracture_polygons(&self) -> Vec<Vec<Point>> {
        self.fractures.iter().map(|f| f.vertices.iter().map(|&v| Point::from(v)).collect()).collect()
    }

    /// Coefficients for a network with the given fracture, trace and point
    /// counts; per-fracture overrides apply to the listed fractures.
    pub fn coefficients(&self, fractures: usize, traces: usize, points: usize) -> Result<Coefficients> {
        let c = &self.coefficients;
        let n = fractures.max(self.fractures.len());
        let inv = [inverse(c.eta[0])?, inverse(c.eta[1])?, inverse(c.eta[2])?];
        let mut coef = Coefficients::uniform([n, traces, points], [c.matrix, c.fractures, c.traces], inv);
        for (i, f) in self.fractures.iter().enumerate() {
            if let Some(t) = f.transmissivity {
                coef.fractures[i] = t;
            }
            if let Some(e) = f.eta {
                coef.inverse_eta_fractures[i] = inverse(e)?;
            }
        }
        Ok(coef)
    }

    /// Dirichlet sides of the bounding box `[lo, hi]`.
    pub fn box_boundary(&self, lo: &Point, hi: &Point) -> BoxBoundary {
        let b = &self.boundary;
        BoxBoundary {
            lo: [lo.x, lo.y, lo.z],
            hi: [hi.x, hi.y, hi.z],
            sides: [b.x_min, b.x_max, b.y_min, b.y_max, b.z_min, b.z_max],
            tol: self.mesh.tolerance * (hi - lo).norm().max(1.0),
        }
    }

    /// Point pressures matched to network intersection points.
    pub fn point_values(&self, points: &[Point]) -> Result<Vec<Option<f64>>> {
        let tol = self.mesh.tolerance;
        let mut out = vec![None; points.len()];
        for pv in &self.boundary.points {
            let at = Point::from(pv.at);
            let hit = points.iter().position(|p| (p - at).norm() <= tol * at.norm().max(1.0));
            match hit {
                Some(i) => out[i] = Some(pv.pressure),
                None => {
                    return Err(Error::Config(format!("no trace intersection at {:?}", pv.at)));
                }
            }
        }
        Ok(out)
    }

    /// Polynomial terms with integer exponents.
    pub fn polynomial_terms(&self) -> Vec<(f64, [u32; 3])> {
        let Some(m) = &self.manufactured else {
            return Vec::new();
        };
        match m.field {
            FieldKind::Linear => {
                let mut t = vec![(m.constant, [0, 0, 0])];
                for (i, g) in m.gradient.iter().enumerate() {
                    let mut e = [0, 0, 0];
                    e[i] = 1;
                    t.push((*g, e));
                }
                t
            }
            FieldKind::Polynomial => {
                let mut t: Vec<(f64, [u32; 3])> =
                    m.terms.iter().map(|t| (t[0], [t[1] as u32, t[2] as u32, t[3] as u32])).collect();
                if m.constant != 0.0 {
                    t.push((m.constant, [0, 0, 0]));
                }
                t
            }
            _ => Vec::new(),
        }
    }
}

/// Named overrides applied on top of a configuration, as `key=value` pairs on
/// dotted TOML paths.
pub fn apply_overrides(text: &str, overrides: &BTreeMap<String, String>) -> Result<String> {
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for (key, raw) in overrides {
        let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.clone()));
        let parts: Vec<&str> = key.split('.').collect();
        let mut table = &mut doc;
        for p in &parts[..parts.len() - 1] {
            let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry.as_table_mut().ok_or_else(|| Error::Config(format!("{key}: {p} is not a table")))?;
        }
        table.insert(parts[parts.len() - 1].to_string(), value);
    }
    toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BARRIER: &str = r#"
name = "barrier"

[mesh]
kind = "box"
lo = [-2.0, -1.0, -1.0]
hi = [2.0, 1.0, 1.0]
cells = [4, 2, 2]

[[fractures]]
vertices = [[-1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]]
eta = 10.0

[coefficients]
fractures = 100.0
eta = [inf, 10.0, 10.0]

[boundary]
x_min = -2.0
x_max = 2.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ProblemConfig::from_toml(BARRIER).unwrap();
        assert_eq!(cfg.fractures.len(), 1);
        assert_eq!(cfg.discretization.family, Family::Rt);
        let coef = cfg.coefficients(1, 0, 0).unwrap();
        assert_eq!(coef.inverse_eta_fractures, vec![0.1]);
        assert_eq!(coef.fractures, vec![100.0]);
        let again = ProblemConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ProblemConfig::from_toml("[mesh]\nkind = \"box\"\n").is_err());
        let typo = BARRIER.replace("x_min", "xmin");
        assert!(matches!(ProblemConfig::from_toml(&typo), Err(Error::Config(_))));
        let high = format!("{BARRIER}\n[discretization]\norder = 5\n");
        assert!(ProblemConfig::from_toml(&high).is_err());
        let bdm0 = format!("{BARRIER}\n[discretization]\nfamily = \"bdm\"\norder = 0\n");
        assert!(ProblemConfig::from_toml(&bdm0).is_err());
        let neg = BARRIER.replace("eta = 10.0", "eta = -1.0");
        assert!(ProblemConfig::from_toml(&neg).is_err());
    }

    #[test]
    fn overrides_replace_values() {
        let mut o = BTreeMap::new();
        o.insert("discretization.order".to_string(), "2".to_string());
        o.insert("name".to_string(), "renamed".to_string());
        let cfg = ProblemConfig::from_toml(&apply_overrides(BARRIER, &o).unwrap()).unwrap();
        assert_eq!(cfg.discretization.order, 2);
        assert_eq!(cfg.name, "renamed");
    }
}
