use super::quadrature::{triangle_rule, QuadratureRule};
use super::{max_pairwise_distance, Plane, Point};
use crate::error::{Error, Result};

/// Planar polygon given by an ordered vertex loop in R³.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    /// Unit normal oriented by the vertex loop (right-hand rule).
    pub fn normal(&self) -> Point {
        polygon_area_vector(&self.vertices).normalize()
    }

    pub fn centroid(&self) -> Point {
        polygon_centroid(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        polygon_diameter(&self.vertices)
    }

    pub fn plane(&self) -> Plane {
        Plane::new(self.normal(), &self.vertices[0])
    }

    /// Largest distance of a vertex from the best-fit plane.
    pub fn planarity_defect(&self) -> f64 {
        let n = self.normal();
        let c = vertex_mean(&self.vertices);
        self.vertices.iter().map(|v| (v - c).dot(&n).abs()).fold(0.0, f64::max)
    }
}

/// Newell area vector: `|A| n`.
pub fn polygon_area_vector(vertices: &[Point]) -> Point {
    let n = vertices.len();
    let mut acc = Point::zeros();
    let o = vertices[0];
    for i in 0..n {
        let a = vertices[i] - o;
        let b = vertices[(i + 1) % n] - o;
        acc += a.cross(&b);
    }
    acc * 0.5
}

pub fn polygon_area(vertices: &[Point]) -> f64 {
    polygon_area_vector(vertices).norm()
}

pub fn polygon_diameter(vertices: &[Point]) -> f64 {
    max_pairwise_distance(vertices)
}

pub(crate) fn vertex_mean(vertices: &[Point]) -> Point {
    vertices.iter().sum::<Point>() / vertices.len() as f64
}

/// Area centroid via a signed fan from the first vertex.
pub fn polygon_centroid(vertices: &[Point]) -> Point {
    let av = polygon_area_vector(vertices);
    let area = av.norm();
    if area == 0.0 {
        return vertex_mean(vertices);
    }
    let n = av / area;
    let o = vertices[0];
    let mut acc = Point::zeros();
    for i in 1..vertices.len().saturating_sub(1) {
        let a = vertices[i];
        let b = vertices[i + 1];
        let s = 0.5 * (a - o).cross(&(b - o)).dot(&n);
        acc += (o + a + b) * (s / 3.0);
    }
    acc / area
}

/// Triangulates a simple planar polygon; triangles keep the loop orientation.
///
/// Star-shaped polygons (with respect to their centroid) are fanned from the
/// centroid; anything else goes through ear clipping.
pub fn triangulate_polygon(vertices: &[Point]) -> Result<Vec<[Point; 3]>> {
    if vertices.len() < 3 {
        return Err(Error::Triangulation(format!("polygon with {} vertices", vertices.len())));
    }
    let av = polygon_area_vector(vertices);
    let area = av.norm();
    let diam = polygon_diameter(vertices);
    if area <= 1e-14 * diam * diam || diam == 0.0 {
        return Err(Error::DegenerateGeometry("polygon with zero area".into()));
    }
    let n = av / area;
    let c = polygon_centroid(vertices);
    let m = vertices.len();
    let tol = 1e-12 * diam * diam;
    let mut fan = Vec::with_capacity(m);
    let mut star = true;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let s = (a - c).cross(&(b - c)).dot(&n);
        if s < -tol {
            star = false;
            break;
        }
        if s > tol {
            fan.push([c, a, b]);
        }
    }
    if star {
        return Ok(fan);
    }
    ear_clip(vertices, &n, diam)
}

fn ear_clip(vertices: &[Point], n: &Point, diam: f64) -> Result<Vec<[Point; 3]>> {
    let tol = 1e-12 * diam * diam;
    let cross_n = |a: &Point, b: &Point, c: &Point| (b - a).cross(&(c - a)).dot(n);
    // drop hanging (collinear) vertices; they carry no area
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    loop {
        let m = idx.len();
        if m < 3 {
            break;
        }
        let pos = (0..m).find(|&i| {
            let a = &vertices[idx[(i + m - 1) % m]];
            let b = &vertices[idx[i]];
            let c = &vertices[idx[(i + 1) % m]];
            cross_n(a, b, c).abs() <= tol && (b - a).dot(&(c - b)) >= 0.0
        });
        match pos {
            Some(i) => {
                idx.remove(i);
            }
            None => break,
        }
    }
    let mut out = Vec::with_capacity(idx.len());
    while idx.len() > 3 {
        let m = idx.len();
        let mut found = None;
        for i in 0..m {
            let ia = idx[(i + m - 1) % m];
            let ib = idx[i];
            let ic = idx[(i + 1) % m];
            let (a, b, c) = (&vertices[ia], &vertices[ib], &vertices[ic]);
            if cross_n(a, b, c) <= tol {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = &vertices[j];
                cross_n(a, b, p) >= -tol && cross_n(b, c, p) >= -tol && cross_n(c, a, p) >= -tol
            });
            if !blocked {
                found = Some(i);
                break;
            }
        }
        let i = found.ok_or_else(|| Error::Triangulation("no ear found".into()))?;
        let m = idx.len();
        out.push([vertices[idx[(i + m - 1) % m]], vertices[idx[i]], vertices[idx[(i + 1) % m]]]);
        idx.remove(i);
    }
    if idx.len() == 3 {
        out.push([vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]]);
    }
    Ok(out)
}

/// Quadrature on a planar polygon exact to polynomial degree `order`.
pub fn polygon_quadrature(vertices: &[Point], order: usize) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule::default();
    for t in triangulate_polygon(vertices)? {
        let area = 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm();
        rule.append(triangle_rule([&t[0], &t[1], &t[2]], order, 2.0 * area));
    }
    Ok(rule)
}

/// Keeps the part of a convex polygon with `plane.signed_distance <= 0`.
pub fn clip_convex_polygon(vertices: &[Point], plane: &Plane, tol: f64) -> Vec<Point> {
    let m = vertices.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let da = plane.signed_distance(&a);
        let db = plane.signed_distance(&b);
        if da <= tol {
            out.push(a);
        }
        if (da < -tol && db > tol) || (da > tol && db < -tol) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    dedup_loop(out, tol)
}

fn dedup_loop(mut pts: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if out.last().is_none_or(|q| (p - q).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= tol {
        out.pop();
    }
    out
}

/// Intersection of two coplanar convex polygons.
pub fn convex_polygon_intersection(a: &[Point], b: &[Point], tol: f64) -> Vec<Point> {
    let nb = polygon_area_vector(b).normalize();
    let m = b.len();
    let mut cur = a.to_vec();
    for i in 0..m {
        if cur.len() < 3 {
            return Vec::new();
        }
        let p = b[i];
        let q = b[(i + 1) % m];
        let out = (q - p).cross(&nb);
        if out.norm() == 0.0 {
            continue;
        }
        cur = clip_convex_polygon(&cur, &Plane::new(out, &p), tol);
    }
    if cur.len() < 3 {
        Vec::new()
    } else {
        cur
    }
}

/// Whether `p` (assumed on the polygon plane) lies in the closed convex polygon.
pub fn point_in_convex_polygon(p: &Point, vertices: &[Point], tol: f64) -> bool {
    let n = polygon_area_vector(vertices).normalize();
    let m = vertices.len();
    (0..m).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let out = (b - a).cross(&n);
        let len = out.norm();
        len == 0.0 || out.dot(&(p - a)) / len <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_shape() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(2.0, 1.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(1.0, 2.0, 0.0),
            Point::new(0.5, 2.0, 0.0),
            Point::new(0.0, 2.0, 0.0),
        ]
    }

    #[test]
    fn area_and_centroid_of_l_shape() {
        let v = l_shape();
        assert!((polygon_area(&v) - 3.0).abs() < 1e-14);
        let c = polygon_centroid(&v);
        // unit squares at (0.5,0.5),(1.5,0.5),(0.5,1.5)
        assert!((c - Point::new(2.5 / 3.0, 2.5 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn nonconvex_quadrature_is_exact() {
        let v = l_shape();
        let rule = polygon_quadrature(&v, 4).unwrap();
        assert!((rule.measure() - 3.0).abs() < 1e-13);
        // ∫ x² y² over L = [0,2]x[0,1] + [0,1]x[1,2]
        let exact = (8.0 / 3.0) * (1.0 / 3.0) + (1.0 / 3.0) * (7.0 / 3.0);
        assert!((rule.integrate(|p| p.x * p.x * p.y * p.y) - exact).abs() < 1e-13);
    }

    #[test]
    fn clipping() {
        let sq = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let half = clip_convex_polygon(&sq, &Plane::new(Point::x(), &Point::new(0.25, 0.0, 0.0)), 1e-12);
        assert!((polygon_area(&half) - 0.25).abs() < 1e-14);
        let shifted: Vec<Point> = sq.iter().map(|p| p + Point::new(0.5, 0.5, 0.0)).collect();
        let inter = convex_polygon_intersection(&sq, &shifted, 1e-12);
        assert!((polygon_area(&inter) - 0.25).abs() < 1e-14);
        assert!(point_in_convex_polygon(&Point::new(0.5, 0.5, 0.0), &sq, 1e-12));
        assert!(!point_in_convex_polygon(&Point::new(1.5, 0.5, 0.0), &sq, 1e-12));
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let v = vec![Point::zeros(), Point::x(), Point::x() * 2.0];
        assert!(triangulate_polygon(&v).is_err());
    }
}
