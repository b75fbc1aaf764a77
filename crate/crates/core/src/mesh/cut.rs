//! Cutting a background mesh along fracture planes.
//!
//! Cells crossed by a fracture are split by the whole fracture plane (the cut
//! is prolonged to the cell boundary). Faces are then rebuilt plane by plane as
//! the common refinement of the faces seen from both sides, so that every face
//! has at most two owners; faces on a fracture plane are further split along
//! the fracture boundary, along traces, and across trace endpoints.

use std::collections::HashMap;

use rayon::prelude::*;

use super::network::NetworkGeometry;
use super::{PointSet, PolyMesh};
use crate::error::{Error, Result};
use crate::geometry::{
    clip_convex_polygon, convex_polygon_intersection, point_in_convex_polygon, polygon_area, polygon_area_vector,
    polygon_centroid, polygon_diameter, Frame, Plane, Point,
};

/// Conforming mesh produced by [`cut_mesh`].
#[derive(Clone, Debug)]
pub struct CutMesh {
    pub mesh: PolyMesh,
    /// Fracture owning each face, if the face is a fracture cell.
    pub face_fracture: Vec<Option<usize>>,
    /// Background vertices moved onto a fracture plane.
    pub snapped: usize,
    /// Background cells that were split.
    pub cut_cells: usize,
    pub tol: f64,
}

type Loop = Vec<Point>;

pub fn cut_mesh(background: &PolyMesh, net: &NetworkGeometry, tol: f64) -> Result<CutMesh> {
    let mut bg = background.clone();
    let mut snapped = 0;
    for v in &mut bg.vertices {
        for pl in &net.planes {
            let d = pl.signed_distance(v);
            if d != 0.0 && d.abs() <= tol {
                *v -= pl.normal * d;
                snapped += 1;
            }
        }
    }

    let pieces: Vec<(Vec<Vec<Loop>>, bool)> = (0..bg.cells.len())
        .into_par_iter()
        .map(|c| cut_cell(bg.cell_faces(c), net, tol).map_err(|e| at_cell(e, c)))
        .collect::<Result<_>>()?;
    let cut_cells = pieces.iter().filter(|p| p.1).count();
    let cells: Vec<Vec<Loop>> = pieces.into_iter().flat_map(|p| p.0).collect();

    // group faces by plane
    let mut pre = PointSet::new(tol);
    let mut groups: Vec<PlaneGroup> = Vec::new();
    for (c, faces) in cells.iter().enumerate() {
        for f in faces {
            if thin(f, tol) {
                continue;
            }
            let n = polygon_area_vector(f);
            let (normal, outward_positive) = canonical(n.normalize());
            let plane = Plane::new(normal, &polygon_centroid(f));
            let ids: Vec<usize> = f.iter().map(|p| pre.insert(*p)).collect();
            let g = match groups.iter().position(|g| same_plane(&g.plane, &plane, tol)) {
                Some(g) => g,
                None => {
                    groups.push(PlaneGroup::new(plane));
                    groups.len() - 1
                }
            };
            let mut pts = f.clone();
            if !outward_positive {
                pts.reverse();
            }
            let mut key = ids;
            key.sort_unstable();
            let side = if outward_positive { &mut groups[g].a } else { &mut groups[g].b };
            side.push(SideFace { pts, cell: c, key });
        }
    }

    for g in &mut groups {
        g.fractures = (0..net.planes.len()).filter(|&l| same_plane(&g.plane, &net.planes[l], tol)).collect();
    }
    let refined: Vec<Vec<PlanePiece>> = groups.par_iter().map(|g| g.refine(net, tol)).collect::<Result<_>>()?;

    // final topology
    let mut set = PointSet::new(tol);
    let mut mesh = PolyMesh { vertices: Vec::new(), faces: Vec::new(), cells: vec![Vec::new(); cells.len()] };
    let mut face_fracture = Vec::new();
    for (g, pieces) in groups.iter().zip(refined) {
        for p in pieces {
            let mut pts = p.pts;
            if polygon_area_vector(&pts).dot(&g.plane.normal) < 0.0 {
                pts.reverse();
            }
            let mut ids: Vec<usize> = Vec::with_capacity(pts.len());
            for q in &pts {
                let id = set.insert(*q);
                if ids.last() != Some(&id) {
                    ids.push(id);
                }
            }
            while ids.len() > 1 && ids[0] == ids[ids.len() - 1] {
                ids.pop();
            }
            if ids.len() < 3 {
                continue;
            }
            let f = mesh.faces.len();
            mesh.faces.push(ids);
            face_fracture.push(p.fracture);
            if let Some(a) = p.a {
                mesh.cells[a].push((f, true));
            }
            if let Some(b) = p.b {
                mesh.cells[b].push((f, false));
            }
        }
    }
    mesh.vertices = set.points;
    Ok(CutMesh { mesh, face_fracture, snapped, cut_cells, tol })
}

fn at_cell(e: Error, c: usize) -> Error {
    match e {
        Error::DegenerateGeometry(m) => Error::DegenerateGeometry(format!("cell {c}: {m}")),
        Error::Conformity(m) => Error::Conformity(format!("cell {c}: {m}")),
        other => other,
    }
}

/// Splits one background cell by every fracture crossing it.
fn cut_cell(faces: Vec<Loop>, net: &NetworkGeometry, tol: f64) -> Result<(Vec<Vec<Loop>>, bool)> {
    let mut parts = vec![faces];
    let mut was_cut = false;
    for (l, plane) in net.planes.iter().enumerate() {
        let mut next = Vec::with_capacity(parts.len() + 1);
        for p in parts {
            if crossed_by(&p, plane, &net.fractures[l], tol) {
                if !is_convex(&p, tol) {
                    return Err(Error::Conformity(format!("non-convex cell is crossed by fracture {l}")));
                }
                let (lo, hi) = split_convex(&p, plane, tol)?;
                next.push(lo);
                next.push(hi);
                was_cut = true;
            } else {
                next.push(p);
            }
        }
        parts = next;
    }
    Ok((parts, was_cut))
}

fn crossed_by(faces: &[Loop], plane: &Plane, fracture: &[Point], tol: f64) -> bool {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for f in faces {
        for p in f {
            let d = plane.signed_distance(p);
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if lo >= -tol || hi <= tol {
        return false;
    }
    let cap = section(faces, plane, tol);
    if cap.len() < 3 {
        return false;
    }
    let inter = convex_polygon_intersection(&cap, fracture, tol);
    !thin(&inter, tol)
}

fn is_convex(faces: &[Loop], tol: f64) -> bool {
    faces.iter().all(|f| {
        let n = polygon_area_vector(f);
        if n.norm() == 0.0 {
            return true;
        }
        let pl = Plane::new(n, &polygon_centroid(f));
        faces.iter().flatten().all(|p| pl.signed_distance(p) <= 10.0 * tol)
    })
}

/// Cross-section polygon of a convex cell, counter-clockwise about the plane normal.
fn section(faces: &[Loop], plane: &Plane, tol: f64) -> Loop {
    let mut on = Vec::new();
    for f in faces {
        let m = f.len();
        for i in 0..m {
            let a = f[i];
            let b = f[(i + 1) % m];
            let da = plane.signed_distance(&a);
            let db = plane.signed_distance(&b);
            if da.abs() <= tol {
                on.push(a);
            }
            if (da < -tol && db > tol) || (da > tol && db < -tol) {
                on.push(a + (b - a) * (da / (da - db)));
            }
        }
    }
    convex_hull(&on, &plane.normal, tol)
}

/// Convex polygon through coplanar points lying on the boundary of a convex
/// region, counter-clockwise about `normal`; duplicates and points within
/// `tol` of the chord of their neighbours are dropped.
fn convex_hull(points: &[Point], normal: &Point, tol: f64) -> Loop {
    let mut uniq: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if uniq.iter().all(|q| (p - q).norm() > tol) {
            uniq.push(*p);
        }
    }
    if uniq.len() < 3 {
        return Vec::new();
    }
    let c = uniq.iter().sum::<Point>() / uniq.len() as f64;
    let fr = Frame::plane(c, *normal);
    let mut loc: Vec<(f64, Point)> = uniq
        .iter()
        .map(|p| {
            let q = fr.to_local(p);
            (q.y.atan2(q.x), *p)
        })
        .collect();
    loc.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ring: Vec<Point> = loc.into_iter().map(|l| l.1).collect();
    // angular order is only reliable for strictly convex corners
    loop {
        let m = ring.len();
        if m < 3 {
            return Vec::new();
        }
        let drop = (0..m).find(|&i| {
            let a = ring[(i + m - 1) % m];
            let b = ring[i];
            let d = ring[(i + 1) % m];
            let chord = d - a;
            let len = chord.norm();
            len == 0.0 || chord.cross(&(b - a)).dot(normal) / len >= -tol
        });
        match drop {
            Some(i) => {
                ring.remove(i);
            }
            None => break,
        }
    }
    ring
}

fn split_convex(faces: &[Loop], plane: &Plane, tol: f64) -> Result<(Vec<Loop>, Vec<Loop>)> {
    let flip = Plane { normal: -plane.normal, offset: -plane.offset };
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for f in faces {
        let a = clip_convex_polygon(f, plane, tol);
        if !thin(&a, tol) {
            lo.push(a);
        }
        let b = clip_convex_polygon(f, &flip, tol);
        if !thin(&b, tol) {
            hi.push(b);
        }
    }
    let cap = section(faces, plane, tol);
    if cap.len() < 3 {
        return Err(Error::DegenerateGeometry("empty cut section".into()));
    }
    let mut rev = cap.clone();
    rev.reverse();
    lo.push(cap);
    hi.push(rev);
    Ok((lo, hi))
}

/// Unit normal with lexicographically positive leading component, and whether
/// the input pointed the same way.
fn canonical(n: Point) -> (Point, bool) {
    for i in 0..3 {
        if n[i].abs() > 1e-9 {
            return if n[i] > 0.0 { (n, true) } else { (-n, false) };
        }
    }
    (n, true)
}

fn same_plane(a: &Plane, b: &Plane, tol: f64) -> bool {
    let dot = a.normal.dot(&b.normal);
    if dot.abs() < 1.0 - 1e-10 {
        return false;
    }
    (a.offset - dot.signum() * b.offset).abs() <= tol
}

struct SideFace {
    pts: Loop,
    cell: usize,
    key: Vec<usize>,
}

#[derive(Clone, Debug)]
struct PlanePiece {
    pts: Loop,
    /// Cell whose outward normal is the plane normal.
    a: Option<usize>,
    /// Cell on the other side.
    b: Option<usize>,
    fracture: Option<usize>,
}

struct PlaneGroup {
    plane: Plane,
    a: Vec<SideFace>,
    b: Vec<SideFace>,
    fractures: Vec<usize>,
}

impl PlaneGroup {
    fn new(plane: Plane) -> Self {
        PlaneGroup { plane, a: Vec::new(), b: Vec::new(), fractures: Vec::new() }
    }

    fn refine(&self, net: &NetworkGeometry, tol: f64) -> Result<Vec<PlanePiece>> {
        let mut pieces = self.overlay(tol)?;
        for &l in &self.fractures {
            pieces = split_by_fracture(pieces, l, &net.fractures[l], &self.plane, tol);
        }
        for &l in &self.fractures {
            for t in net.traces_of(l) {
                let seg = net.traces[t].segment;
                let cutter = Plane::new(seg.tangent().cross(&self.plane.normal), &seg.a);
                pieces = split_along_segment(pieces, &cutter, &seg.a, &seg.b, tol);
            }
        }
        for &l in &self.fractures {
            for t in net.traces_of(l) {
                let seg = net.traces[t].segment;
                let mut marks = vec![seg.a, seg.b];
                marks.extend(net.points_on(t).into_iter().map(|p| net.points[p]));
                for p in marks {
                    let cutter = Plane::new(seg.tangent(), &p);
                    pieces = split_through_point(pieces, &cutter, &p, tol);
                }
            }
        }
        Ok(pieces)
    }

    /// Common refinement of the faces on both sides of the plane.
    fn overlay(&self, tol: f64) -> Result<Vec<PlanePiece>> {
        let mut out = Vec::new();
        let mut b_cover = vec![0.0; self.b.len()];
        let by_key: HashMap<&[usize], usize> = self.b.iter().enumerate().map(|(i, f)| (f.key.as_slice(), i)).collect();
        let boxes: Vec<(Point, Point)> = self.b.iter().map(|f| bbox(&f.pts)).collect();
        for fa in &self.a {
            let area_a = polygon_area(&fa.pts);
            if let Some(&j) = by_key.get(fa.key.as_slice()) {
                out.push(PlanePiece { pts: fa.pts.clone(), a: Some(fa.cell), b: Some(self.b[j].cell), fracture: None });
                b_cover[j] += area_a;
                continue;
            }
            let ba = bbox(&fa.pts);
            let mut covered = 0.0;
            for (j, fb) in self.b.iter().enumerate() {
                if !boxes_overlap(&ba, &boxes[j], tol) {
                    continue;
                }
                let inter = convex_polygon_intersection(&fa.pts, &fb.pts, tol);
                if thin(&inter, tol) {
                    continue;
                }
                let ar = polygon_area(&inter);
                covered += ar;
                b_cover[j] += ar;
                out.push(PlanePiece { pts: inter, a: Some(fa.cell), b: Some(fb.cell), fracture: None });
            }
            let slack = tol * polygon_diameter(&fa.pts);
            if covered <= slack {
                out.push(PlanePiece { pts: fa.pts.clone(), a: Some(fa.cell), b: None, fracture: None });
            } else if (covered - area_a).abs() > 1e-8 * area_a.max(slack) {
                return Err(Error::Conformity(format!(
                    "face partially covered from the opposite side ({covered:e} of {area_a:e})"
                )));
            }
        }
        for (j, fb) in self.b.iter().enumerate() {
            let area_b = polygon_area(&fb.pts);
            let slack = tol * polygon_diameter(&fb.pts);
            if b_cover[j] <= slack {
                out.push(PlanePiece { pts: fb.pts.clone(), a: None, b: Some(fb.cell), fracture: None });
            } else if (b_cover[j] - area_b).abs() > 1e-8 * area_b.max(slack) {
                return Err(Error::Conformity(format!(
                    "face partially covered from the opposite side ({:e} of {area_b:e})",
                    b_cover[j]
                )));
            }
        }
        Ok(out)
    }
}

/// A polygon no wider than `tol`: fewer than three points, or area at most
/// `tol` times its diameter.
fn thin(pts: &[Point], tol: f64) -> bool {
    pts.len() < 3 || polygon_area(pts) <= tol * polygon_diameter(pts)
}

fn bbox(pts: &[Point]) -> (Point, Point) {
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn boxes_overlap(a: &(Point, Point), b: &(Point, Point), tol: f64) -> bool {
    (0..3).all(|i| a.0[i] <= b.1[i] + tol && b.0[i] <= a.1[i] + tol)
}

/// Both halves of a convex polygon cut by a plane, dropping empty halves.
fn halves(pts: &[Point], cutter: &Plane, tol: f64) -> (Option<Loop>, Option<Loop>) {
    let flip = Plane { normal: -cutter.normal, offset: -cutter.offset };
    let keep = |p: Loop| (!thin(&p, tol)).then_some(p);
    (keep(clip_convex_polygon(pts, cutter, tol)), keep(clip_convex_polygon(pts, &flip, tol)))
}

fn crosses(pts: &[Point], cutter: &Plane, tol: f64) -> bool {
    let mut neg = false;
    let mut pos = false;
    for p in pts {
        let d = cutter.signed_distance(p);
        neg |= d < -tol;
        pos |= d > tol;
    }
    neg && pos
}

fn split_by_fracture(pieces: Vec<PlanePiece>, l: usize, poly: &[Point], plane: &Plane, tol: f64) -> Vec<PlanePiece> {
    let mut n = polygon_area_vector(poly).normalize();
    if n.dot(&plane.normal) < 0.0 {
        n = -n;
    }
    // outward edge planes of the fracture, counter-clockwise about the plane normal
    let mut verts = poly.to_vec();
    if polygon_area_vector(&verts).dot(&plane.normal) < 0.0 {
        verts.reverse();
    }
    let m = verts.len();
    let edges: Vec<Plane> = (0..m)
        .filter_map(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % m];
            let out = (b - a).cross(&n);
            (out.norm() > 0.0).then(|| Plane::new(out, &a))
        })
        .collect();
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        if p.fracture.is_some() {
            out.push(p);
            continue;
        }
        let inter = convex_polygon_intersection(&p.pts, &verts, tol);
        if thin(&inter, tol) {
            out.push(p);
            continue;
        }
        let mut rest = p.pts.clone();
        for e in &edges {
            if !crosses(&rest, e, tol) {
                continue;
            }
            let (inside, outside) = halves(&rest, e, tol);
            if let Some(o) = outside {
                out.push(PlanePiece { pts: o, ..p.clone() });
            }
            match inside {
                Some(i) => rest = i,
                None => {
                    rest.clear();
                    break;
                }
            }
        }
        if rest.len() >= 3 {
            out.push(PlanePiece { pts: rest, fracture: Some(l), ..p });
        }
    }
    out
}

/// Splits pieces whose interior the segment `a`–`b` passes through, along the
/// segment's line.
fn split_along_segment(pieces: Vec<PlanePiece>, cutter: &Plane, a: &Point, b: &Point, tol: f64) -> Vec<PlanePiece> {
    let mut out = Vec::with_capacity(pieces.len());
    for p in pieces {
        if !crosses(&p.pts, cutter, tol) || !segment_enters(&p.pts, a, b, tol) {
            out.push(p);
            continue;
        }
        let (lo, hi) = halves(&p.pts, cutter, tol);
        match (lo, hi) {
            (Some(l), Some(h)) => {
                out.push(PlanePiece { pts: l, ..p.clone() });
                out.push(PlanePiece { pts: h, ..p });
            }
            _ => out.push(p),
        }
    }
    out
}

/// Whether the open segment meets the interior of the convex polygon.
fn segment_enters(pts: &[Point], a: &Point, b: &Point, tol: f64) -> bool {
    let n = polygon_area_vector(pts).normalize();
    let d = b - a;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let m = pts.len();
    for i in 0..m {
        let p = pts[i];
        let q = pts[(i + 1) % m];
        let out = (q - p).cross(&n);
        let len = out.norm();
        if len == 0.0 {
            continue;
        }
        let out = out / len;
        // strictly inside: out · (a + t d - p) < -tol
        let s = out.dot(&(a - p));
        let r = out.dot(&d);
        if r.abs() < 1e-14 {
            if s >= -tol {
                return false;
            }
        } else if r > 0.0 {
            hi = hi.min((-tol - s) / r);
        } else {
            lo = lo.max((-tol - s) / r);
        }
    }
    hi - lo > tol / d.norm()
}

/// Splits pieces having `p` on their boundary, but not as a vertex, by `cutter`.
fn split_through_point(pieces: Vec<PlanePiece>, cutter: &Plane, p: &Point, tol: f64) -> Vec<PlanePiece> {
    let mut out = Vec::with_capacity(pieces.len());
    for pc in pieces {
        let is_vertex = pc.pts.iter().any(|q| (q - p).norm() <= tol);
        let on = !is_vertex && point_in_convex_polygon(p, &pc.pts, tol) && crosses(&pc.pts, cutter, tol);
        if !on {
            out.push(pc);
            continue;
        }
        match halves(&pc.pts, cutter, tol) {
            (Some(l), Some(h)) => {
                out.push(PlanePiece { pts: l, ..pc.clone() });
                out.push(PlanePiece { pts: h, ..pc });
            }
            _ => out.push(pc),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::network::FractureNetwork;
    use super::super::validate_polymesh;
    use super::*;

    fn quad(points: [[f64; 3]; 4]) -> Vec<Point> {
        points.iter().map(|p| Point::new(p[0], p[1], p[2])).collect()
    }

    fn unit_cube() -> PolyMesh {
        PolyMesh::box_grid(Point::zeros(), Point::new(1.0, 1.0, 1.0), [1, 1, 1]).unwrap()
    }

    #[test]
    fn half_split_of_cube() {
        let f = quad([[-1., -1., 0.5], [2., -1., 0.5], [2., 2., 0.5], [-1., 2., 0.5]]);
        let net = NetworkGeometry::new(&FractureNetwork { fractures: vec![f] }, 1e-9).unwrap();
        let cut = cut_mesh(&unit_cube(), &net, 1e-9).unwrap();
        assert_eq!(cut.mesh.cells.len(), 2);
        assert_eq!(cut.cut_cells, 1);
        let frac: Vec<usize> = (0..cut.mesh.faces.len()).filter(|&f| cut.face_fracture[f].is_some()).collect();
        assert_eq!(frac.len(), 1);
        let owners = cut.mesh.face_owners();
        assert_eq!(owners[frac[0]].len(), 2);
        assert!(validate_polymesh(&cut.mesh, 1e-9).is_empty());
        assert!((cut.mesh.total_volume().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fracture_ending_inside_is_prolonged() {
        // covers x in [0, 0.5] only; the cut spans the whole cell
        let f = quad([[-0.5, -0.5, 0.4], [0.5, -0.5, 0.4], [0.5, 1.5, 0.4], [-0.5, 1.5, 0.4]]);
        let net = NetworkGeometry::new(&FractureNetwork { fractures: vec![f] }, 1e-9).unwrap();
        let cut = cut_mesh(&unit_cube(), &net, 1e-9).unwrap();
        assert_eq!(cut.mesh.cells.len(), 2);
        let area: f64 = (0..cut.mesh.faces.len())
            .filter(|&f| cut.face_fracture[f].is_some())
            .map(|f| polygon_area(&cut.mesh.face_points(f)))
            .sum();
        assert!((area - 0.5).abs() < 1e-12);
        // the prolonged part is an ordinary interior face
        let owners = cut.mesh.face_owners();
        let hanging =
            (0..cut.mesh.faces.len()).filter(|&f| cut.face_fracture[f].is_none() && owners[f].len() == 2).count();
        assert_eq!(hanging, 1);
        assert!(validate_polymesh(&cut.mesh, 1e-9).is_empty());
    }

    #[test]
    fn two_fractures_one_ending_inside() {
        let f1 = quad([[-1., -1., 0.5], [2., -1., 0.5], [2., 2., 0.5], [-1., 2., 0.5]]);
        // vertical fracture x = 0.5 reaching only down to z = 0.5
        let f2 = quad([[0.5, -1., 0.5], [0.5, 2., 0.5], [0.5, 2., 2.], [0.5, -1., 2.]]);
        let net = NetworkGeometry::new(&FractureNetwork { fractures: vec![f1, f2] }, 1e-9).unwrap();
        let cut = cut_mesh(&unit_cube(), &net, 1e-9).unwrap();
        assert_eq!(cut.mesh.cells.len(), 3);
        assert!(validate_polymesh(&cut.mesh, 1e-9).is_empty());
        // bottom half sees the trace as a split of its top face
        let owners = cut.mesh.face_owners();
        let on_f1: Vec<usize> = (0..cut.mesh.faces.len()).filter(|&f| cut.face_fracture[f] == Some(0)).collect();
        assert_eq!(on_f1.len(), 2);
        for f in on_f1 {
            assert_eq!(owners[f].len(), 2);
        }
    }

    #[test]
    fn existing_faces_are_not_recut() {
        let mesh = PolyMesh::box_grid(Point::new(-1., -1., -1.), Point::new(1., 1., 1.), [2, 2, 2]).unwrap();
        let f = quad([[-1., -1., 0.], [1., -1., 0.], [1., 1., 0.], [-1., 1., 0.]]);
        let net = NetworkGeometry::new(&FractureNetwork { fractures: vec![f] }, 1e-9).unwrap();
        let cut = cut_mesh(&mesh, &net, 1e-9).unwrap();
        assert_eq!(cut.cut_cells, 0);
        assert_eq!(cut.mesh.cells.len(), 8);
        assert_eq!(cut.mesh.faces.len(), mesh.faces.len());
        assert_eq!(cut.face_fracture.iter().filter(|f| f.is_some()).count(), 4);
        let again = cut_mesh(&cut.mesh, &net, 1e-9).unwrap();
        assert_eq!(again.mesh.faces.len(), cut.mesh.faces.len());
        let sorted = |v: &[Option<usize>]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        assert_eq!(sorted(&again.face_fracture), sorted(&cut.face_fracture));
    }
}
