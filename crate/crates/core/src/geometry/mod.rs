//! Geometry kernel: points, planes, local frames, polygons, polyhedra and
//! quadrature on arbitrary (possibly non-convex, hanging-node) polytopes.

mod polygon;
mod polyhedron;
mod quadrature;

pub use polygon::{
    clip_convex_polygon, convex_polygon_intersection, point_in_convex_polygon, polygon_area, polygon_area_vector,
    polygon_centroid, polygon_diameter, polygon_quadrature, triangulate_polygon, Polygon,
};
pub use polyhedron::{polyhedron_centroid, polyhedron_quadrature, polyhedron_volume, Polyhedron};
pub use quadrature::{gauss_jacobi, segment_quadrature, QuadratureRule};

#[cfg(test)]
pub(crate) use polyhedron::box_faces;

use nalgebra::Vector3;

/// Points and vectors live in R³; lower-dimensional local coordinates leave the
/// trailing components at zero.
pub type Point = Vector3<f64>;

/// Global geometric tolerance used for coplanarity and degeneracy tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Absolute distance below which two positions are considered equal.
    pub geo: f64,
}

impl Tolerance {
    pub const RELATIVE: f64 = 1e-9;

    /// Scale-aware tolerance `1e-9 * diameter`.
    pub fn for_diameter(diameter: f64) -> Self {
        Tolerance { geo: Self::RELATIVE * diameter.max(f64::MIN_POSITIVE) }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { geo: 1e-9 }
    }
}

/// Oriented plane `{ x : normal · x = offset }` with unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub normal: Point,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Point, point: &Point) -> Self {
        let n = normal.normalize();
        Plane { normal: n, offset: n.dot(point) }
    }

    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Intersection of two planes as (point, unit direction); `None` when parallel.
    pub fn intersect(&self, other: &Plane) -> Option<(Point, Point)> {
        let dir = self.normal.cross(&other.normal);
        let len = dir.norm();
        if len < 1e-12 {
            return None;
        }
        // point = a n1 + b n2 solving both plane equations
        let n1n2 = self.normal.dot(&other.normal);
        let det = 1.0 - n1n2 * n1n2;
        let a = (self.offset - other.offset * n1n2) / det;
        let b = (other.offset - self.offset * n1n2) / det;
        Some((self.normal * a + other.normal * b, dir / len))
    }
}

/// Affine frame mapping global points to `dim`-dimensional local coordinates.
///
/// For `dim == 3` this is the identity; for planes the first two axes span the
/// plane and the third is its normal; for lines the first axis is the tangent.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub origin: Point,
    pub axes: [Point; 3],
}

impl Frame {
    pub fn identity() -> Self {
        Frame { dim: 3, origin: Point::zeros(), axes: [Point::x(), Point::y(), Point::z()] }
    }

    /// Plane frame with a deterministic in-plane basis.
    pub fn plane(origin: Point, normal: Point) -> Self {
        let n = normal.normalize();
        // pick the coordinate axis least aligned with n
        let pick = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
            Point::x()
        } else if n.y.abs() <= n.z.abs() {
            Point::y()
        } else {
            Point::z()
        };
        let e1 = (pick - n * n.dot(&pick)).normalize();
        let e2 = n.cross(&e1);
        Frame { dim: 2, origin, axes: [e1, e2, n] }
    }

    /// Plane frame whose first axis is given (must be orthogonal to `normal`).
    pub fn plane_with_axis(origin: Point, normal: Point, axis: Point) -> Self {
        let n = normal.normalize();
        let e1 = (axis - n * n.dot(&axis)).normalize();
        let e2 = n.cross(&e1);
        Frame { dim: 2, origin, axes: [e1, e2, n] }
    }

    pub fn line(origin: Point, direction: Point) -> Self {
        let t = direction.normalize();
        let pl = Frame::plane(origin, t);
        Frame { dim: 1, origin, axes: [t, pl.axes[0], pl.axes[1]] }
    }

    pub fn to_local(&self, p: &Point) -> Point {
        let d = p - self.origin;
        let mut out = Point::zeros();
        for i in 0..self.dim {
            out[i] = d.dot(&self.axes[i]);
        }
        out
    }

    pub fn to_global(&self, q: &Point) -> Point {
        let mut out = self.origin;
        for i in 0..self.dim {
            out += self.axes[i] * q[i];
        }
        out
    }

    /// Components of a global vector along the frame axes.
    pub fn vector_to_local(&self, v: &Point) -> Point {
        let mut out = Point::zeros();
        for i in 0..self.dim {
            out[i] = v.dot(&self.axes[i]);
        }
        out
    }

    pub fn vector_to_global(&self, v: &Point) -> Point {
        let mut out = Point::zeros();
        for i in 0..self.dim {
            out += self.axes[i] * v[i];
        }
        out
    }
}

/// A straight segment between two points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn tangent(&self) -> Point {
        (self.b - self.a).normalize()
    }

    pub fn midpoint(&self) -> Point {
        (self.a + self.b) * 0.5
    }

    /// Distance from `p` to the segment.
    pub fn distance(&self, p: &Point) -> f64 {
        let d = self.b - self.a;
        let t = ((p - self.a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (self.a + d * t - p).norm()
    }
}

pub(crate) fn max_pairwise_distance(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max((p - q).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_intersection_line() {
        let a = Plane::new(Point::z(), &Point::zeros());
        let b = Plane::new(Point::y(), &Point::new(0.0, 0.5, 0.0));
        let (p, d) = a.intersect(&b).unwrap();
        assert!(a.signed_distance(&p).abs() < 1e-14);
        assert!(b.signed_distance(&p).abs() < 1e-14);
        assert!((d.x.abs() - 1.0).abs() < 1e-14);
        assert!(a.intersect(&Plane::new(Point::z(), &Point::z())).is_none());
    }

    #[test]
    fn frame_round_trip() {
        let f = Frame::plane(Point::new(1.0, 2.0, 3.0), Point::new(1.0, 1.0, 0.3));
        let p = f.to_global(&Point::new(0.3, -0.7, 0.0));
        let q = f.to_local(&p);
        assert!((q - Point::new(0.3, -0.7, 0.0)).norm() < 1e-14);
        assert!(f.axes[0].dot(&f.axes[1]).abs() < 1e-15);
    }

    #[test]
    fn segment_distance() {
        let s = Segment { a: Point::zeros(), b: Point::new(2.0, 0.0, 0.0) };
        assert_eq!(s.length(), 2.0);
        assert!((s.distance(&Point::new(1.0, 1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((s.distance(&Point::new(3.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    }
}
