//! Polyhedral meshes, fracture-conforming cutting and the mixed-dimensional
//! domain hierarchy built on top of them.

mod cut;
pub mod generate;
mod io;
mod mixed;
mod network;

pub use cut::{cut_mesh, CutMesh};
pub use io::{read_mesh, write_mesh};
pub use mixed::{DomainId, DomainMesh, FacetKind, Interface, MeshElement, MeshFacet, MixedMesh, Side};
pub use network::{FractureNetwork, NetworkGeometry, Trace};

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{polygon_area, polygon_area_vector, polyhedron_volume, Point};

/// Polyhedral mesh stored as vertex, face and cell tables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolyMesh {
    pub vertices: Vec<Point>,
    /// Vertex loops.
    pub faces: Vec<Vec<usize>>,
    /// Faces of each cell; the flag is true when the face loop normal points
    /// out of the cell.
    pub cells: Vec<Vec<(usize, bool)>>,
}

impl PolyMesh {
    pub fn face_points(&self, f: usize) -> Vec<Point> {
        self.faces[f].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Outward-oriented face loops of a cell.
    pub fn cell_faces(&self, c: usize) -> Vec<Vec<Point>> {
        self.cells[c]
            .iter()
            .map(|&(f, out)| {
                let mut p = self.face_points(f);
                if !out {
                    p.reverse();
                }
                p
            })
            .collect()
    }

    pub fn cell_volume(&self, c: usize) -> Result<f64> {
        polyhedron_volume(&self.cell_faces(c))
    }

    pub fn total_volume(&self) -> Result<f64> {
        (0..self.cells.len()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Cells owning each face.
    pub fn face_owners(&self) -> Vec<Vec<(usize, bool)>> {
        let mut owners = vec![Vec::new(); self.faces.len()];
        for (c, faces) in self.cells.iter().enumerate() {
            for &(f, out) in faces {
                owners[f].push((c, out));
            }
        }
        owners
    }

    /// Structured `nx × ny × nz` grid of boxes.
    pub fn box_grid(lo: Point, hi: Point, n: [usize; 3]) -> Result<Self> {
        if n.contains(&0) || (0..3).any(|i| hi[i] <= lo[i]) {
            return Err(Error::Config(format!("invalid box grid {lo:?}..{hi:?} with {n:?}")));
        }
        let coord = |axis: usize, i: usize| lo[axis] + (hi[axis] - lo[axis]) * i as f64 / n[axis] as f64;
        let vid = |i: usize, j: usize, k: usize| (k * (n[1] + 1) + j) * (n[0] + 1) + i;
        let mut mesh = PolyMesh::default();
        for k in 0..=n[2] {
            for j in 0..=n[1] {
                for i in 0..=n[0] {
                    mesh.vertices.push(Point::new(coord(0, i), coord(1, j), coord(2, k)));
                }
            }
        }
        // faces normal to each axis, loops counter-clockwise about +axis
        let mut face_id: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
        for axis in 0..3 {
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut m = [n[0], n[1], n[2]];
            m[axis] += 1;
            for k in 0..m[2] {
                for j in 0..m[1] {
                    for i in 0..m[0] {
                        let base = [i, j, k];
                        let corner = |d1: usize, d2: usize| {
                            let mut c = base;
                            c[a1] += d1;
                            c[a2] += d2;
                            vid(c[0], c[1], c[2])
                        };
                        face_id.insert((axis, i, j, k), mesh.faces.len());
                        mesh.faces.push(vec![corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)]);
                    }
                }
            }
        }
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let mut cell = Vec::with_capacity(6);
                    for axis in 0..3 {
                        let mut hi_idx = [i, j, k];
                        hi_idx[axis] += 1;
                        cell.push((face_id[&(axis, i, j, k)], false));
                        cell.push((face_id[&(axis, hi_idx[0], hi_idx[1], hi_idx[2])], true));
                    }
                    mesh.cells.push(cell);
                }
            }
        }
        Ok(mesh)
    }
}

/// Tolerance-based point deduplication on a hashed grid.
pub(crate) struct PointSet {
    tol: f64,
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    pub points: Vec<Point>,
}

impl PointSet {
    pub fn new(tol: f64) -> Self {
        PointSet { tol, cell: 4.0 * tol, buckets: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: &Point) -> [i64; 3] {
        [(p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64, (p.z / self.cell).floor() as i64]
    }

    pub fn find(&self, p: &Point) -> Option<usize> {
        let k = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &i in ids {
                            let d = (self.points[i] - p).norm();
                            if d <= self.tol && best.is_none_or(|b| d < b.0) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        best.map(|b| b.1)
    }

    /// Seeds the set with points that are already pairwise distinct.
    pub fn from_points(points: &[Point], tol: f64) -> Self {
        let mut set = PointSet::new(tol);
        for (i, p) in points.iter().enumerate() {
            set.points.push(*p);
            set.buckets.entry(set.key(p)).or_default().push(i);
        }
        set
    }

    pub fn insert(&mut self, p: Point) -> usize {
        if let Some(i) = self.find(&p) {
            return i;
        }
        let i = self.points.len();
        self.points.push(p);
        self.buckets.entry(self.key(&p)).or_default().push(i);
        i
    }
}

/// A failed mesh check.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OpenCell { cell: usize, residual: f64 },
    NonPositiveVolume { cell: usize },
    NonPlanarFace { face: usize, deviation: f64 },
    FaceOwners { face: usize, owners: usize },
    VolumeMismatch { volume: f64, expected: f64 },
    FractureCoverage { fracture: usize, area: f64, expected: f64 },
    FractureSides { fracture: usize, element: usize },
    TraceCoverage { trace: usize, length: f64, expected: f64 },
    TraceSides { trace: usize, element: usize, fracture: usize, sides: usize },
    DanglingInterface { upper: DomainId, lower: DomainId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OpenCell { cell, residual } => {
                write!(f, "cell {cell} is not closed (|sum |f| n_f| = {residual:e})")
            }
            Violation::NonPositiveVolume { cell } => write!(f, "cell {cell} has non-positive volume"),
            Violation::NonPlanarFace { face, deviation } => {
                write!(f, "face {face} deviates {deviation:e} from its plane")
            }
            Violation::FaceOwners { face, owners } => write!(f, "face {face} has {owners} owners"),
            Violation::VolumeMismatch { volume, expected } => {
                write!(f, "total volume {volume} differs from {expected}")
            }
            Violation::FractureCoverage { fracture, area, expected } => {
                write!(f, "fracture {fracture} mesh covers {area}, polygon area is {expected}")
            }
            Violation::FractureSides { fracture, element } => {
                write!(f, "fracture {fracture} element {element} is not two-sided in the matrix")
            }
            Violation::TraceCoverage { trace, length, expected } => {
                write!(f, "trace {trace} mesh covers {length}, segment length is {expected}")
            }
            Violation::TraceSides { trace, element, fracture, sides } => {
                write!(f, "trace {trace} element {element} has {sides} sides in fracture {fracture}")
            }
            Violation::DanglingInterface { upper, lower } => {
                write!(f, "interface between {upper} and {lower} is one-sided")
            }
        }
    }
}

/// Closure, orientation, planarity and face-ownership checks on a 3D mesh.
pub fn validate_polymesh(mesh: &PolyMesh, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for (f, lp) in mesh.faces.iter().enumerate() {
        let pts: Vec<Point> = lp.iter().map(|&v| mesh.vertices[v]).collect();
        let n = polygon_area_vector(&pts);
        if n.norm() <= tol * tol {
            out.push(Violation::NonPlanarFace { face: f, deviation: f64::INFINITY });
            continue;
        }
        let n = n.normalize();
        let c = pts.iter().sum::<Point>() / pts.len() as f64;
        let dev = pts.iter().map(|p| (p - c).dot(&n).abs()).fold(0.0, f64::max);
        if dev > tol {
            out.push(Violation::NonPlanarFace { face: f, deviation: dev });
        }
    }
    for (f, owners) in mesh.face_owners().iter().enumerate() {
        if owners.is_empty() || owners.len() > 2 || (owners.len() == 2 && owners[0].1 == owners[1].1) {
            out.push(Violation::FaceOwners { face: f, owners: owners.len() });
        }
    }
    for c in 0..mesh.cells.len() {
        let faces = mesh.cell_faces(c);
        let area: f64 = faces.iter().map(|f| polygon_area(f)).sum();
        let residual: Point = faces.iter().map(|f| polygon_area_vector(f)).sum();
        if residual.norm() > 1e-10 * area.max(tol * tol) {
            out.push(Violation::OpenCell { cell: c, residual: residual.norm() });
        }
        if polyhedron_volume(&faces).is_err() {
            out.push(Violation::NonPositiveVolume { cell: c });
        }
    }
    out
}

/// Relative comparison used by the measure-conservation checks.
pub(crate) fn close_relative(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
