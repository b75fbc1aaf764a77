use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::RunResult;
use crate::assembly::GlobalSystem;
use crate::config::ProblemConfig;
use crate::error::Result;
use crate::geometry::Point;
use crate::mesh::MixedMesh;
use crate::solve::{pressure_value, velocity_value};

/// Writes the outputs selected in `cfg` and returns their paths.
pub(super) fn write_outputs(dir: &Path, cfg: &ProblemConfig, config_text: &str, r: &RunResult) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, text)?;
        out.push(p);
        Ok(())
    };
    put("config.toml", config_text.to_string())?;
    if cfg.output.errors && !r.errors.is_empty() {
        put("errors.csv", errors_csv(r))?;
    }
    if cfg.output.flux {
        put("flux.csv", r.flux.to_text())?;
    }
    if cfg.output.matrix {
        put("matrix.coo", matrix_coo(&r.system))?;
    }
    if cfg.output.elements {
        put("elements.csv", element_dump(&r.mesh, &r.system, &r.solution))?;
    }
    if cfg.output.vtk {
        out.extend(write_vtk(dir, &r.mesh, &r.system, &r.solution)?);
    }
    Ok(out)
}

fn errors_csv(r: &RunResult) -> String {
    let mut s = String::from("domain,d,l,e_p,e_u,e_div\n");
    for e in &r.errors {
        let [p, u, d] = e.relative();
        let _ = writeln!(s, "{},{},{},{p:.6e},{u:.6e},{d:.6e}", e.domain, e.domain.dim, e.domain.index + 1);
    }
    s
}

/// Coordinate list `row col value`, 0-based, followed by the right-hand side.
fn matrix_coo(sys: &GlobalSystem) -> String {
    let mut s = format!("% {} {} {}\n", sys.n, sys.n, sys.entries.len());
    for &(r, c, v) in &sys.entries {
        let _ = writeln!(s, "{r} {c} {v:.17e}");
    }
    s.push_str("% rhs\n");
    for v in &sys.rhs {
        let _ = writeln!(s, "{v:.17e}");
    }
    s
}

fn element_dump(mesh: &MixedMesh, sys: &GlobalSystem, x: &[f64]) -> String {
    let mut s = String::from("domain,element,flux_dofs,pressure_dofs,pressure_coefficients\n");
    for (di, dd) in sys.dofs.domains.iter().enumerate() {
        let dm = mesh.domain(dd.id);
        for e in 0..dm.elements.len() {
            let nf = dd.element_flux.get(e).map_or(0, |v| v.len());
            let pr = dd.element_pressure[e].clone();
            let coef: Vec<String> = x[pr.clone()].iter().map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(s, "{},{},{},{},{}", dd.id, e, nf, pr.len(), coef.join(" "));
        }
        let _ = di;
    }
    s
}

/// Cell geometry of one element as global polygons, lines or a vertex.
enum Shape {
    Polygons(Vec<Vec<Point>>),
    Line(Point, Point),
    Vertex(Point),
}

/// Legacy VTK polydata of every domain of dimension `dim`, with cell-wise
/// pressure at the element centroid, the first pressure coefficient and the
/// projected velocity at the centroid.
pub fn vtk_polydata(mesh: &MixedMesh, sys: &GlobalSystem, x: &[f64], dim: usize) -> String {
    let mut cells: Vec<(Shape, f64, f64, Point, usize)> = Vec::new();
    for (di, dd) in sys.dofs.domains.iter().enumerate() {
        if dd.id.dim != dim {
            continue;
        }
        let dm = mesh.domain(dd.id);
        for (e, el) in dm.elements.iter().enumerate() {
            let (shape, local) = match dim {
                3 => (Shape::Polygons(mesh.poly.cell_faces(el.entity)), None),
                2 => (Shape::Polygons(vec![mesh.poly.face_points(el.entity)]), None),
                1 => {
                    let a = dm.facets[el.facets[0].0].centroid;
                    let b = dm.facets[el.facets[1].0].centroid;
                    (Shape::Line(a, b), Some(dm.frame.to_local(&((a + b) * 0.5))))
                }
                _ => (Shape::Vertex(dm.frame.origin), Some(Point::zeros())),
            };
            let c = match (sys.locals[di].get(e), local) {
                (Some(lm), _) => lm.geom.centroid,
                (None, Some(l)) => l,
                (None, None) => Point::zeros(),
            };
            let p = pressure_value(sys, di, e, x, &c);
            let p0 = x[dd.element_pressure[e].start];
            let u = velocity_value(sys, &dm.frame, di, e, x, &c);
            cells.push((shape, p, p0, u, dd.id.index + 1));
        }
    }
    let mut points: Vec<Point> = Vec::new();
    let mut polys = Vec::new();
    let mut lines = Vec::new();
    let mut verts = Vec::new();
    // cell data rows in VTK order: vertices, lines, polygons
    let mut rows: [Vec<(f64, f64, Point, usize)>; 3] = Default::default();
    for (shape, p, p0, u, id) in &cells {
        match shape {
            Shape::Polygons(faces) => {
                for f in faces {
                    let start = points.len();
                    points.extend(f.iter().copied());
                    polys.push((start..points.len()).collect::<Vec<_>>());
                    rows[2].push((*p, *p0, *u, *id));
                }
            }
            Shape::Line(a, b) => {
                lines.push([points.len(), points.len() + 1]);
                points.push(*a);
                points.push(*b);
                rows[1].push((*p, *p0, *u, *id));
            }
            Shape::Vertex(a) => {
                verts.push(points.len());
                points.push(*a);
                rows[0].push((*p, *p0, *u, *id));
            }
        }
    }
    let mut s = format!(
        "# vtk DataFile Version 3.0\nfields d={dim}\nASCII\nDATASET POLYDATA\nPOINTS {} double\n",
        points.len()
    );
    for p in &points {
        let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", p.x, p.y, p.z);
    }
    if !verts.is_empty() {
        let _ = writeln!(s, "VERTICES {} {}", verts.len(), 2 * verts.len());
        for v in &verts {
            let _ = writeln!(s, "1 {v}");
        }
    }
    if !lines.is_empty() {
        let _ = writeln!(s, "LINES {} {}", lines.len(), 3 * lines.len());
        for l in &lines {
            let _ = writeln!(s, "2 {} {}", l[0], l[1]);
        }
    }
    if !polys.is_empty() {
        let size: usize = polys.iter().map(|p| p.len() + 1).sum();
        let _ = writeln!(s, "POLYGONS {} {size}", polys.len());
        for p in &polys {
            let ids: Vec<String> = p.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{} {}", p.len(), ids.join(" "));
        }
    }
    let all: Vec<&(f64, f64, Point, usize)> = rows.iter().flatten().collect();
    if all.is_empty() {
        return s;
    }
    let _ = writeln!(s, "CELL_DATA {}", all.len());
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for r in &all {
        let _ = writeln!(s, "{:.12e}", r.0);
    }
    s.push_str("SCALARS pressure_coefficient double 1\nLOOKUP_TABLE default\n");
    for r in &all {
        let _ = writeln!(s, "{:.12e}", r.1);
    }
    s.push_str("VECTORS velocity double\n");
    for r in &all {
        let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", r.2.x, r.2.y, r.2.z);
    }
    s.push_str("SCALARS domain int 1\nLOOKUP_TABLE default\n");
    for r in &all {
        let _ = writeln!(s, "{}", r.3);
    }
    s
}

/// One `fields_<d>d.vtk` file per non-empty dimension.
pub fn write_vtk(dir: &Path, mesh: &MixedMesh, sys: &GlobalSystem, x: &[f64]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for dim in (0..=3).rev() {
        if !sys.dofs.domains.iter().any(|d| d.id.dim == dim && !mesh.domain(d.id).elements.is_empty()) {
            continue;
        }
        let p = dir.join(format!("fields_{dim}d.vtk"));
        fs::write(&p, vtk_polydata(mesh, sys, x, dim))?;
        out.push(p);
    }
    Ok(out)
}
