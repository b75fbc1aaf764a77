use super::polygon::{polygon_diameter, triangulate_polygon, vertex_mean};
use super::quadrature::{signed_tet_volume, tetra_rule, QuadratureRule};
use super::Point;
use crate::error::{Error, Result};

/// Polyhedron given by its faces, each an outward-oriented vertex loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    pub faces: Vec<Vec<Point>>,
}

impl Polyhedron {
    pub fn new(faces: Vec<Vec<Point>>) -> Self {
        Polyhedron { faces }
    }

    pub fn volume(&self) -> Result<f64> {
        polyhedron_volume(&self.faces)
    }

    pub fn centroid(&self) -> Result<Point> {
        polyhedron_centroid(&self.faces)
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point> = self.faces.iter().flatten().copied().collect();
        polygon_diameter(&pts)
    }
}

fn apex(faces: &[Vec<Point>]) -> Point {
    let pts: Vec<Point> = faces.iter().flatten().copied().collect();
    vertex_mean(&pts)
}

fn cone_tets(faces: &[Vec<Point>]) -> Result<Vec<([Point; 4], f64)>> {
    let c = apex(faces);
    let mut out = Vec::new();
    for f in faces {
        for t in triangulate_polygon(f)? {
            let v = signed_tet_volume(&c, &t[0], &t[1], &t[2]);
            if v != 0.0 {
                out.push(([c, t[0], t[1], t[2]], v));
            }
        }
    }
    Ok(out)
}

pub fn polyhedron_volume(faces: &[Vec<Point>]) -> Result<f64> {
    let v: f64 = cone_tets(faces)?.iter().map(|(_, v)| v).sum();
    if v <= 0.0 {
        return Err(Error::DegenerateGeometry(format!("polyhedron with volume {v:e}")));
    }
    Ok(v)
}

pub fn polyhedron_centroid(faces: &[Vec<Point>]) -> Result<Point> {
    let tets = cone_tets(faces)?;
    let vol: f64 = tets.iter().map(|(_, v)| v).sum();
    if vol <= 0.0 {
        return Err(Error::DegenerateGeometry(format!("polyhedron with volume {vol:e}")));
    }
    let acc: Point = tets.iter().map(|(p, v)| (p[0] + p[1] + p[2] + p[3]) * (v / 4.0)).sum();
    Ok(acc / vol)
}

/// Quadrature exact to degree `order` via a signed cone decomposition, valid
/// for non-convex cells as long as every face is a simple polygon.
pub fn polyhedron_quadrature(faces: &[Vec<Point>], order: usize) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule::default();
    for (p, v) in cone_tets(faces)? {
        rule.append(tetra_rule([&p[0], &p[1], &p[2], &p[3]], order, v));
    }
    Ok(rule)
}

#[cfg(test)]
pub(crate) fn box_faces(lo: Point, hi: Point) -> Vec<Vec<Point>> {
    let p = |i: usize, j: usize, k: usize| {
        Point::new(if i == 0 { lo.x } else { hi.x }, if j == 0 { lo.y } else { hi.y }, if k == 0 { lo.z } else { hi.z })
    };
    vec![
        vec![p(0, 0, 0), p(0, 1, 0), p(1, 1, 0), p(1, 0, 0)],
        vec![p(0, 0, 1), p(1, 0, 1), p(1, 1, 1), p(0, 1, 1)],
        vec![p(0, 0, 0), p(1, 0, 0), p(1, 0, 1), p(0, 0, 1)],
        vec![p(0, 1, 0), p(0, 1, 1), p(1, 1, 1), p(1, 1, 0)],
        vec![p(0, 0, 0), p(0, 0, 1), p(0, 1, 1), p(0, 1, 0)],
        vec![p(1, 0, 0), p(1, 1, 0), p(1, 1, 1), p(1, 0, 1)],
    ]
}
