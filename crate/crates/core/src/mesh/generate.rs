//! Deterministic mesh generators for tests and builtin problems.

use std::collections::HashMap;

use super::{cut_mesh, FractureNetwork, NetworkGeometry, PolyMesh};
use crate::error::Result;
use crate::geometry::{clip_convex_polygon, Plane, Point};

/// Section of the box `[lo, hi]` by a plane, as a convex polygon.
pub fn box_section(lo: &Point, hi: &Point, plane: &Plane) -> Vec<Point> {
    let n = plane.normal;
    let center = (lo + hi) * 0.5;
    let origin = center - n * plane.signed_distance(&center);
    let helper = if n.x.abs() < 0.9 { Point::x() } else { Point::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    let r = 2.0 * (hi - lo).norm();
    let mut poly: Vec<Point> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(a, b)| origin + u * (a * r) + v * (b * r))
        .collect();
    for axis in 0..3 {
        let mut e = Point::zeros();
        e[axis] = 1.0;
        poly = clip_convex_polygon(&poly, &Plane::new(e, hi), 0.0);
        poly = clip_convex_polygon(&poly, &Plane::new(-e, lo), 0.0);
    }
    poly
}

/// Box grid split by full planar cuts into general polyhedra. The cut faces
/// are ordinary interior faces.
pub fn cut_box(lo: Point, hi: Point, n: [usize; 3], planes: &[Plane], tol: f64) -> Result<PolyMesh> {
    let grid = PolyMesh::box_grid(lo, hi, n)?;
    let fractures: Vec<Vec<Point>> = planes.iter().map(|p| box_section(&lo, &hi, p)).filter(|s| s.len() >= 3).collect();
    let mut mesh = grid;
    // one plane at a time so that no traces arise
    for f in fractures {
        let net = NetworkGeometry::new(&FractureNetwork { fractures: vec![f] }, tol)?;
        mesh = cut_mesh(&mesh, &net, tol)?.mesh;
    }
    Ok(mesh)
}

/// Polygonal mesh of `[0,1]²` in `z = 0` on an `n × n` grid mixing triangles,
/// quadrilaterals and split cells, so that neighbours of split cells carry
/// hanging vertices.
pub fn polygon_patch(n: usize) -> (Vec<Point>, Vec<Vec<usize>>) {
    let n = n.max(1);
    // vertices on the half grid
    let mut loops: Vec<Vec<(usize, usize)>> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b) = (2 * i, 2 * j);
            match (i + 2 * j) % 3 {
                0 => {
                    loops.push(vec![(a, b), (a + 2, b), (a + 2, b + 2)]);
                    loops.push(vec![(a, b), (a + 2, b + 2), (a, b + 2)]);
                }
                1 => {
                    loops.push(vec![(a, b), (a + 1, b), (a + 1, b + 2), (a, b + 2)]);
                    loops.push(vec![(a + 1, b), (a + 2, b), (a + 2, b + 2), (a + 1, b + 2)]);
                }
                _ => loops.push(vec![(a, b), (a + 2, b), (a + 2, b + 2), (a, b + 2)]),
            }
        }
    }
    let mut used: HashMap<(usize, usize), usize> = HashMap::new();
    for l in &loops {
        for &q in l {
            let next = used.len();
            used.entry(q).or_insert(next);
        }
    }
    let mut faces = Vec::with_capacity(loops.len());
    for l in &loops {
        let mut face = Vec::new();
        for k in 0..l.len() {
            let (p, q) = (l[k], l[(k + 1) % l.len()]);
            face.push(used[&p]);
            // midpoint of an axis-aligned edge of length 2 may be a hanging vertex
            let axis_aligned = p.0 == q.0 || p.1 == q.1;
            let long = p.0.abs_diff(q.0) == 2 || p.1.abs_diff(q.1) == 2;
            if axis_aligned && long {
                if let Some(&m) = used.get(&((p.0 + q.0) / 2, (p.1 + q.1) / 2)) {
                    face.push(m);
                }
            }
        }
        faces.push(face);
    }
    let h = 0.5 / n as f64;
    let mut vertices = vec![Point::zeros(); used.len()];
    for (&(a, b), &v) in &used {
        vertices[v] = Point::new(a as f64 * h, b as f64 * h, 0.0);
    }
    (vertices, faces)
}

/// `n + 1` nodes on `[0, 1]` with alternating long and short cells.
pub fn segment_nodes(n: usize) -> Vec<f64> {
    let n = n.max(1);
    let widths: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.6 }).collect();
    let total: f64 = widths.iter().sum();
    let mut x = vec![0.0];
    let mut acc = 0.0;
    for w in widths {
        acc += w;
        x.push(acc / total);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area;

    #[test]
    fn patch_covers_unit_square() {
        let (v, f) = polygon_patch(4);
        let area: f64 = f.iter().map(|l| polygon_area(&l.iter().map(|&i| v[i]).collect::<Vec<_>>())).sum();
        assert!((area - 1.0).abs() < 1e-13);
        assert!(f.iter().any(|l| l.len() == 3));
        assert!(f.iter().any(|l| l.len() >= 5));
    }

    #[test]
    fn cut_box_keeps_volume() {
        let planes = [Plane::new(Point::new(1.0, 0.3, 0.2).normalize(), &Point::new(0.4, 0.5, 0.5))];
        let m = cut_box(Point::zeros(), Point::repeat(1.0), [2, 2, 2], &planes, 1e-10).unwrap();
        assert!(m.cells.len() > 8);
        assert!((m.total_volume().unwrap() - 1.0).abs() < 1e-12);
    }
}
