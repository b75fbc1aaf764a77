use crate::error::{Error, Result};
use crate::geometry::{
    max_pairwise_distance, polygon_area, polygon_centroid, polygon_diameter, polygon_quadrature, polyhedron_centroid,
    polyhedron_quadrature, polyhedron_volume, segment_quadrature, Frame, Point, QuadratureRule,
};

/// Facet of a `d`-dimensional element, in element-local coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum FacetShape {
    /// Face of a polyhedron; the loop orientation matches the facet normal.
    Polygon(Vec<Point>),
    /// Edge of a polygon.
    Segment(Point, Point),
    /// Endpoint of a segment.
    Vertex(Point),
}

impl FacetShape {
    pub fn points(&self) -> Vec<Point> {
        match self {
            FacetShape::Polygon(v) => v.clone(),
            FacetShape::Segment(a, b) => vec![*a, *b],
            FacetShape::Vertex(p) => vec![*p],
        }
    }
}

#[derive(Clone, Debug)]
pub struct FacetGeometry {
    pub shape: FacetShape,
    pub measure: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Reference unit normal `n_f`, shared by every element owning the facet.
    pub normal: Point,
    /// `n_f · n_out` for the owning element.
    pub sign: f64,
    /// Facet frame used for facet monomials (origin at the centroid).
    pub frame: Frame,
    pub quad: QuadratureRule,
}

impl FacetGeometry {
    pub fn new(shape: FacetShape, normal: Point, sign: f64, order: usize) -> Result<Self> {
        let (measure, centroid, diameter, frame, quad) = match &shape {
            FacetShape::Polygon(v) => {
                let c = polygon_centroid(v);
                (polygon_area(v), c, polygon_diameter(v), Frame::plane(c, normal), polygon_quadrature(v, order)?)
            }
            FacetShape::Segment(a, b) => {
                let c = (a + b) * 0.5;
                let len = (b - a).norm();
                (len, c, len, Frame::line(c, b - a), segment_quadrature(a, b, order))
            }
            FacetShape::Vertex(p) => (
                1.0,
                *p,
                1.0,
                Frame { dim: 0, origin: *p, axes: [Point::x(), Point::y(), Point::z()] },
                QuadratureRule { points: vec![*p], weights: vec![1.0] },
            ),
        };
        if measure <= 0.0 {
            return Err(Error::DegenerateGeometry("facet with zero measure".into()));
        }
        Ok(FacetGeometry { shape, measure, centroid, diameter, normal, sign, frame, quad })
    }

    /// Outward unit normal with respect to the owning element.
    pub fn outward(&self) -> Point {
        self.normal * self.sign
    }
}

/// Geometry of one element in its domain's local coordinates.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub dim: usize,
    pub measure: f64,
    pub centroid: Point,
    pub diameter: f64,
    pub quad: QuadratureRule,
    pub facets: Vec<FacetGeometry>,
}

impl ElementGeometry {
    /// Builds the element from its facets; quadrature is exact to degree `order`.
    pub fn new(dim: usize, facets: Vec<FacetGeometry>, order: usize) -> Result<Self> {
        let pts: Vec<Point> = facets.iter().flat_map(|f| f.shape.points()).collect();
        let diameter = max_pairwise_distance(&pts);
        let (measure, centroid, quad) = match dim {
            3 => {
                let faces: Vec<Vec<Point>> = facets
                    .iter()
                    .map(|f| {
                        let mut v = f.shape.points();
                        if f.sign < 0.0 {
                            v.reverse();
                        }
                        v
                    })
                    .collect();
                (polyhedron_volume(&faces)?, polyhedron_centroid(&faces)?, polyhedron_quadrature(&faces, order)?)
            }
            2 => {
                let lp = boundary_loop(&facets)?;
                let area = polygon_area(&lp);
                (area, polygon_centroid(&lp), polygon_quadrature(&lp, order)?)
            }
            1 => {
                if facets.len() != 2 {
                    return Err(Error::Topology(format!("segment with {} endpoints", facets.len())));
                }
                let a = facets[0].centroid;
                let b = facets[1].centroid;
                ((b - a).norm(), (a + b) * 0.5, segment_quadrature(&a, &b, order))
            }
            _ => return Err(Error::InvalidSpace(format!("element dimension {dim}"))),
        };
        if measure <= 0.0 || diameter <= 0.0 {
            return Err(Error::DegenerateGeometry(format!("{dim}D element with measure {measure:e}")));
        }
        Ok(ElementGeometry { dim, measure, centroid, diameter, quad, facets })
    }
}

/// Chains oriented edges into the counter-clockwise boundary loop of a polygon.
fn boundary_loop(facets: &[FacetGeometry]) -> Result<Vec<Point>> {
    let mut edges: Vec<(Point, Point)> = facets
        .iter()
        .map(|f| match f.shape {
            FacetShape::Segment(a, b) => Ok(if f.sign > 0.0 { (a, b) } else { (b, a) }),
            _ => Err(Error::Topology("2D element facet is not a segment".into())),
        })
        .collect::<Result<_>>()?;
    let scale = max_pairwise_distance(&edges.iter().flat_map(|e| [e.0, e.1]).collect::<Vec<_>>());
    let tol = 1e-9 * scale;
    let mut out = Vec::with_capacity(edges.len());
    let (start, mut cur) = edges.swap_remove(0);
    out.push(start);
    while !edges.is_empty() {
        let pos = edges
            .iter()
            .position(|e| (e.0 - cur).norm() <= tol)
            .ok_or_else(|| Error::Topology("polygon boundary is not closed".into()))?;
        let (a, b) = edges.swap_remove(pos);
        out.push(a);
        cur = b;
    }
    if (cur - start).norm() > tol {
        return Err(Error::Topology("polygon boundary is not closed".into()));
    }
    Ok(out)
}

impl ElementGeometry {
    /// Polygon element from a counter-clockwise loop in the `xy` plane;
    /// reference normals are the outward ones.
    pub fn polygon(vertices: &[Point], order: usize) -> Result<ElementGeometry> {
        let m = vertices.len();
        let facets = (0..m)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % m];
                let t = (b - a).normalize();
                let n = Point::new(t.y, -t.x, 0.0);
                FacetGeometry::new(FacetShape::Segment(a, b), n, 1.0, order)
            })
            .collect::<Result<_>>()?;
        ElementGeometry::new(2, facets, order)
    }

    /// Polyhedron from outward-oriented face loops; reference normals outward.
    pub fn polyhedron(faces: &[Vec<Point>], order: usize) -> Result<ElementGeometry> {
        let facets = faces
            .iter()
            .map(|f| {
                let n = crate::geometry::polygon_area_vector(f).normalize();
                FacetGeometry::new(FacetShape::Polygon(f.clone()), n, 1.0, order)
            })
            .collect::<Result<_>>()?;
        ElementGeometry::new(3, facets, order)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Axis-aligned box with facets in the order -x, +x, -y, +y, -z, +z and
    /// reference normals along the positive axes.
    pub fn box_element(lo: Point, hi: Point, order: usize) -> ElementGeometry {
        let p = |i: usize, j: usize, k: usize| {
            Point::new(
                if i == 0 { lo.x } else { hi.x },
                if j == 0 { lo.y } else { hi.y },
                if k == 0 { lo.z } else { hi.z },
            )
        };
        let mut facets = Vec::new();
        for axis in 0..3 {
            for side in 0..2 {
                let mut v = Vec::new();
                let quad = [(0, 0), (1, 0), (1, 1), (0, 1)];
                for (a, b) in quad {
                    let mut idx = [0usize; 3];
                    idx[axis] = side;
                    idx[(axis + 1) % 3] = a;
                    idx[(axis + 2) % 3] = b;
                    v.push(p(idx[0], idx[1], idx[2]));
                }
                let mut n = Point::zeros();
                n[axis] = 1.0;
                let sign = if side == 0 { -1.0 } else { 1.0 };
                facets.push(FacetGeometry::new(FacetShape::Polygon(v), n, sign, order).unwrap());
            }
        }
        ElementGeometry::new(3, facets, order).unwrap()
    }

    pub fn polygon_element(vertices: &[Point], order: usize) -> ElementGeometry {
        ElementGeometry::polygon(vertices, order).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn cube_geometry() {
        let e = box_element(Point::new(-1.0, -1.0, -1.0), Point::new(1.0, 1.0, 1.0), 2);
        assert!((e.measure - 8.0).abs() < 1e-13);
        assert!(e.centroid.norm() < 1e-14);
        assert!((e.diameter - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        // outward normals: bottom face points down
        assert!((e.facets[4].outward() - Point::new(0.0, 0.0, -1.0)).norm() < 1e-15);
        assert!((e.facets[5].outward() - Point::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        let flux: Point = e.facets.iter().map(|f| f.outward() * f.measure).sum();
        assert!(flux.norm() < 1e-13);
    }

    #[test]
    fn polygon_loop_recovered() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(2.0, 1.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(1.0, 2.0, 0.0),
            Point::new(0.0, 2.0, 0.0),
        ];
        let e = polygon_element(&v, 2);
        assert!((e.measure - 3.0).abs() < 1e-14);
    }

    #[test]
    fn segment_endpoints() {
        let a = FacetGeometry::new(FacetShape::Vertex(Point::zeros()), Point::x(), -1.0, 2).unwrap();
        let b = FacetGeometry::new(FacetShape::Vertex(Point::new(2.0, 0.0, 0.0)), Point::x(), 1.0, 2).unwrap();
        let e = ElementGeometry::new(1, vec![a, b], 2).unwrap();
        assert_eq!(e.measure, 2.0);
        assert_eq!(e.centroid, Point::new(1.0, 0.0, 0.0));
        assert_eq!(e.diameter, 2.0);
    }
}
