//! End-to-end runs: mesh, cut, assemble, solve and report.

mod builtin;
mod export;
mod sweep;

pub use builtin::{
    builtin_config, builtin_names, chart_deviation, matrix_jump, patch_configs, patch_polynomial, problem1_chart,
    problem2_runs, run_builtin, Bound, BuiltinReport, Check, Problem2Runs, PATCH_CASES, PROBLEM1_CHART,
    PROBLEM2_CONTRAST,
};
pub use export::{vtk_polydata, write_vtk};
pub use sweep::{convergence_sweep, log_slope, RateTable, SweepLevel, EXACT_THRESHOLD};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::assembly::{assemble, DofCounts, GlobalSystem};
use crate::config::{FieldKind, MeshSource, ProblemConfig};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::generate::{cut_box, polygon_patch, segment_nodes};
use crate::mesh::{cut_mesh, read_mesh, FractureNetwork, MixedMesh, NetworkGeometry, PolyMesh};
use crate::problem::{
    ConfiguredData, ExactField, Manufactured, Polynomial, ProblemData, Quartic, ReferenceSolution, SinProduct,
};
use crate::solve::{element_mismatch, error_norms, flux_report, solve, DomainErrors, FluxReport, SolveStats};
use crate::vem::Family;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory receiving the selected outputs and `manifest.json`.
    pub output_dir: Option<PathBuf>,
    /// Directory against which relative mesh paths are resolved.
    pub base_dir: PathBuf,
    pub deterministic: bool,
    /// Overrides the solver tolerance.
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub name: String,
    pub config_sha256: String,
    pub mesh_sha256: Option<String>,
    pub family: Family,
    pub order: usize,
    /// Elements per dimension, indexed by `d`.
    pub elements: [usize; 4],
    pub dofs: DofCounts,
    pub nonzeros: usize,
    pub solver: SolveStats,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub max_imbalance: f64,
    pub element_mismatch: f64,
    /// Largest relative pressure, velocity and divergence error over all
    /// domains, when an exact solution is known.
    pub max_relative_error: Option<[f64; 3]>,
    pub outputs: Vec<PathBuf>,
}

pub struct RunResult {
    pub manifest: RunManifest,
    pub mesh: MixedMesh,
    pub system: GlobalSystem,
    pub solution: Vec<f64>,
    pub errors: Vec<DomainErrors>,
    pub flux: FluxReport,
}

/// Problem data together with its exact solution, if any.
pub enum Setup {
    Configured(ConfiguredData),
    Manufactured(Box<dyn ManufacturedProblem>),
}

pub trait ManufacturedProblem: Send + Sync {
    fn data(&self) -> &dyn ProblemData;
    fn reference(&self) -> &dyn ReferenceSolution;
}

impl<E: ExactField> ManufacturedProblem for Manufactured<E> {
    fn data(&self) -> &dyn ProblemData {
        self
    }

    fn reference(&self) -> &dyn ReferenceSolution {
        self
    }
}

impl Setup {
    pub fn data(&self) -> &dyn ProblemData {
        match self {
            Setup::Configured(c) => c,
            Setup::Manufactured(m) => m.data(),
        }
    }

    pub fn reference(&self) -> Option<&dyn ReferenceSolution> {
        match self {
            Setup::Configured(_) => None,
            Setup::Manufactured(m) => Some(m.reference()),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t = Instant::now();
    let out = f().map_err(|e| e.at(stage));
    timings.insert(stage.to_string(), t.elapsed().as_secs_f64());
    out
}

/// Background polyhedral mesh for box and file sources.
pub fn background_mesh(cfg: &ProblemConfig, base_dir: &Path) -> Result<(PolyMesh, Option<String>)> {
    let tol = cfg.mesh.tolerance;
    match &cfg.mesh.source {
        MeshSource::Box { lo, hi, cells, planes } => {
            let (lo, hi) = (Point::from(*lo), Point::from(*hi));
            let mesh = if planes.is_empty() {
                PolyMesh::box_grid(lo, hi, *cells)?
            } else {
                let planes: Vec<_> = planes.iter().map(|p| p.plane()).collect();
                cut_box(lo, hi, *cells, &planes, tol)?
            };
            Ok((mesh, None))
        }
        MeshSource::File { path } => {
            let text = fs::read_to_string(base_dir.join(path))?;
            Ok((read_mesh(&text)?, Some(sha256_hex(text.as_bytes()))))
        }
        _ => Err(Error::Config("standalone meshes have no background mesh".into())),
    }
}

/// Mixed-dimensional mesh described by the configuration.
pub fn build_mesh(cfg: &ProblemConfig, base_dir: &Path) -> Result<(MixedMesh, Option<String>)> {
    let tol = cfg.mesh.tolerance;
    match &cfg.mesh.source {
        MeshSource::PolygonPatch { n } => {
            let (v, f) = polygon_patch(*n);
            return Ok((MixedMesh::surface(v, f, tol)?, None));
        }
        MeshSource::Segment { n } => return Ok((MixedMesh::segment(&segment_nodes(*n), tol)?, None)),
        _ => {}
    }
    let (poly, hash) = background_mesh(cfg, base_dir)?;
    let volume = poly.total_volume()?;
    let net = NetworkGeometry::new(&FractureNetwork { fractures: cfg.fracture_polygons() }, tol)?;
    let cut = cut_mesh(&poly, &net, tol)?;
    Ok((MixedMesh::build(cut, net, cfg.discretization.trace_flow, volume)?, hash))
}

/// Problem data for a mesh built from `cfg`.
pub fn setup(cfg: &ProblemConfig, mesh: &MixedMesh) -> Result<Setup> {
    let net = &mesh.network;
    let coef = cfg.coefficients(net.fractures.len(), net.traces.len(), net.points.len())?;
    let Some(m) = &cfg.manufactured else {
        let (lo, hi) = mesh.poly.bounding_box();
        let s = &cfg.sources;
        return Ok(Setup::Configured(ConfiguredData {
            coefficients: coef,
            boundary: cfg.box_boundary(&lo, &hi),
            sources: [s.points, s.traces, s.fractures, s.matrix],
            points: cfg.point_values(&net.points)?,
        }));
    };
    let isolated = mesh.matrix.elements.is_empty();
    fn boxed<E: ExactField + 'static>(mut m: Manufactured<E>, isolated: bool) -> Setup {
        m.isolated = isolated;
        Setup::Manufactured(Box::new(m))
    }
    let net = net.clone();
    Ok(match m.field {
        FieldKind::Quartic => boxed(Manufactured::new(Quartic, net, coef, m.point_dirichlet), isolated),
        FieldKind::SinProduct => boxed(Manufactured::new(SinProduct, net, coef, m.point_dirichlet), isolated),
        FieldKind::Linear | FieldKind::Polynomial => {
            let p = Polynomial { terms: cfg.polynomial_terms() };
            boxed(Manufactured::new(p, net, coef, m.point_dirichlet), isolated)
        }
    })
}

pub fn element_counts(mesh: &MixedMesh) -> [usize; 4] {
    [
        mesh.points.len(),
        mesh.traces.iter().map(|t| t.elements.len()).sum(),
        mesh.fractures.iter().map(|f| f.elements.len()).sum(),
        mesh.matrix.elements.len(),
    ]
}

/// Runs the whole pipeline; any mesh validator failure is an error.
pub fn run(cfg: &ProblemConfig, opts: &RunOptions) -> Result<RunResult> {
    let mut timings = BTreeMap::new();
    timed(&mut timings, "config", || cfg.check())?;
    let spaces = cfg.discretization.spaces().map_err(|e| e.at("config"))?;
    let (mesh, mesh_sha256) = timed(&mut timings, "mesh", || build_mesh(cfg, &opts.base_dir))?;
    timed(&mut timings, "validate", || {
        let v = mesh.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Error::Conformity(list.join("; ")))
        }
    })?;
    let problem = timed(&mut timings, "setup", || setup(cfg, &mesh))?;
    let data = problem.data();
    let system = timed(&mut timings, "assemble", || assemble(&mesh, &spaces, data))?;
    let mut solver = cfg.solver.options();
    solver.deterministic |= opts.deterministic;
    if let Some(t) = opts.tolerance {
        solver.tolerance = t;
    }
    let (solution, stats) = timed(&mut timings, "solve", || solve(&system, &solver))?;
    let t = Instant::now();
    let errors = problem.reference().map(|r| error_norms(&mesh, &system, &solution, r)).unwrap_or_default();
    let flux = flux_report(&mesh, &system, &solution, data);
    let mismatch = element_mismatch(&mesh, &system, &solution, data);
    timings.insert("post".into(), t.elapsed().as_secs_f64());
    let max_relative_error = (!errors.is_empty()).then(|| {
        errors.iter().fold([0.0f64; 3], |acc, e| {
            let r = e.relative();
            [acc[0].max(r[0]), acc[1].max(r[1]), acc[2].max(r[2])]
        })
    });
    let config_text = cfg.to_toml().map_err(|e| e.at("config"))?;
    let mut manifest = RunManifest {
        name: cfg.name.clone(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        mesh_sha256,
        family: cfg.discretization.family,
        order: cfg.discretization.order,
        elements: element_counts(&mesh),
        dofs: system.dofs.counts.clone(),
        nonzeros: system.nnz(),
        solver: stats,
        timings,
        max_imbalance: flux.max_imbalance(),
        element_mismatch: mismatch,
        max_relative_error,
        outputs: Vec::new(),
    };
    let mut result = RunResult { manifest: manifest.clone(), mesh, system, solution, errors, flux };
    if let Some(dir) = &opts.output_dir {
        let t = Instant::now();
        manifest.outputs = export::write_outputs(dir, cfg, &config_text, &result).map_err(|e| e.at("output"))?;
        manifest.timings.insert("output".into(), t.elapsed().as_secs_f64());
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()).at("output"))?;
        fs::write(dir.join("manifest.json"), json).map_err(|e| Error::from(e).at("output"))?;
    }
    result.manifest = manifest;
    Ok(result)
}
