use super::PointSet;
use crate::error::{Error, Result};
use crate::geometry::{polygon_area, polygon_area_vector, Plane, Point, Segment};

/// Planar convex fracture polygons.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FractureNetwork {
    pub fractures: Vec<Vec<Point>>,
}

/// Intersection segment of two fractures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trace {
    pub fractures: [usize; 2],
    pub segment: Segment,
}

/// Fractures with their traces and trace intersections.
#[derive(Clone, Debug)]
pub struct NetworkGeometry {
    pub fractures: Vec<Vec<Point>>,
    pub planes: Vec<Plane>,
    pub traces: Vec<Trace>,
    pub points: Vec<Point>,
    /// Traces through each intersection point.
    pub point_traces: Vec<Vec<usize>>,
}

impl NetworkGeometry {
    pub fn new(network: &FractureNetwork, tol: f64) -> Result<Self> {
        let mut planes = Vec::with_capacity(network.fractures.len());
        for (i, poly) in network.fractures.iter().enumerate() {
            planes.push(check_fracture(i, poly, tol)?);
        }
        let mut traces = Vec::new();
        for i in 0..planes.len() {
            for j in i + 1..planes.len() {
                if let Some(seg) =
                    fracture_intersection((&network.fractures[i], &planes[i]), (&network.fractures[j], &planes[j]), tol)
                        .map_err(|e| match e {
                            Error::Topology(m) => Error::Topology(format!("fractures {i} and {j}: {m}")),
                            other => other,
                        })?
                {
                    traces.push(Trace { fractures: [i, j], segment: seg });
                }
            }
        }
        for a in 0..traces.len() {
            for b in a + 1..traces.len() {
                if collinear_overlap(&traces[a].segment, &traces[b].segment, tol) {
                    return Err(Error::Topology(format!(
                        "traces {a} and {b} overlap; a trace must belong to exactly two fractures"
                    )));
                }
            }
        }
        let mut set = PointSet::new(tol);
        let mut point_traces: Vec<Vec<usize>> = Vec::new();
        for a in 0..traces.len() {
            for b in a + 1..traces.len() {
                if let Some(p) = segment_crossing(&traces[a].segment, &traces[b].segment, tol) {
                    let id = set.insert(p);
                    if id == point_traces.len() {
                        point_traces.push(Vec::new());
                    }
                    for t in [a, b] {
                        if !point_traces[id].contains(&t) {
                            point_traces[id].push(t);
                        }
                    }
                }
            }
        }
        // a point found from one pair may lie on further traces
        for (id, p) in set.points.iter().enumerate() {
            for (t, tr) in traces.iter().enumerate() {
                if tr.segment.distance(p) <= tol && !point_traces[id].contains(&t) {
                    point_traces[id].push(t);
                }
            }
            point_traces[id].sort_unstable();
        }
        Ok(NetworkGeometry { fractures: network.fractures.clone(), planes, traces, points: set.points, point_traces })
    }

    /// Traces lying on fracture `f`.
    pub fn traces_of(&self, f: usize) -> Vec<usize> {
        (0..self.traces.len()).filter(|&t| self.traces[t].fractures.contains(&f)).collect()
    }

    /// Intersection points on trace `t`.
    pub fn points_on(&self, t: usize) -> Vec<usize> {
        (0..self.points.len()).filter(|&p| self.point_traces[p].contains(&t)).collect()
    }
}

fn check_fracture(i: usize, poly: &[Point], tol: f64) -> Result<Plane> {
    if poly.len() < 3 {
        return Err(Error::DegenerateGeometry(format!("fracture {i} has fewer than 3 vertices")));
    }
    let area = polygon_area(poly);
    if area <= tol * tol {
        return Err(Error::DegenerateGeometry(format!("fracture {i} has zero area")));
    }
    let n = polygon_area_vector(poly).normalize();
    let c = poly.iter().sum::<Point>() / poly.len() as f64;
    let plane = Plane::new(n, &c);
    let dev = poly.iter().map(|p| plane.signed_distance(p).abs()).fold(0.0, f64::max);
    if dev > tol {
        return Err(Error::NonPlanar { deviation: dev, tolerance: tol });
    }
    let m = poly.len();
    for k in 0..m {
        let a = poly[k];
        let b = poly[(k + 1) % m];
        let c = poly[(k + 2) % m];
        if (b - a).cross(&(c - b)).dot(&n) < -tol * (b - a).norm().max(tol) {
            return Err(Error::DegenerateGeometry(format!("fracture {i} is not convex")));
        }
    }
    Ok(plane)
}

/// Parameter interval of the line `p0 + t d` inside a closed convex polygon.
pub(crate) fn line_in_polygon(p0: &Point, d: &Point, poly: &[Point], tol: f64) -> Option<(f64, f64)> {
    let n = polygon_area_vector(poly).normalize();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let m = poly.len();
    for k in 0..m {
        let a = poly[k];
        let b = poly[(k + 1) % m];
        let out = (b - a).cross(&n);
        if out.norm() == 0.0 {
            continue;
        }
        let out = out.normalize();
        // out · (p0 + t d - a) <= 0
        let s = out.dot(&(p0 - a));
        let r = out.dot(d);
        if r.abs() < 1e-14 {
            if s > tol {
                return None;
            }
        } else if r > 0.0 {
            hi = hi.min(-s / r);
        } else {
            lo = lo.max(-s / r);
        }
    }
    (hi > lo).then_some((lo, hi))
}

fn fracture_intersection(a: (&[Point], &Plane), b: (&[Point], &Plane), tol: f64) -> Result<Option<Segment>> {
    let Some((p0, d)) = a.1.intersect(b.1) else {
        let coplanar = (a.1.offset - a.1.normal.dot(&b.1.normal).signum() * b.1.offset).abs() <= tol;
        if coplanar {
            let inter = crate::geometry::convex_polygon_intersection(a.0, b.0, tol);
            if inter.len() >= 3 && polygon_area(&inter) > tol * tol {
                return Err(Error::Topology("coplanar fractures overlap".into()));
            }
        }
        return Ok(None);
    };
    let Some((s0, s1)) = line_in_polygon(&p0, &d, a.0, tol) else { return Ok(None) };
    let Some((t0, t1)) = line_in_polygon(&p0, &d, b.0, tol) else { return Ok(None) };
    let lo = s0.max(t0);
    let hi = s1.min(t1);
    if hi - lo <= tol {
        return Ok(None);
    }
    Ok(Some(Segment { a: p0 + d * lo, b: p0 + d * hi }))
}

fn collinear_overlap(a: &Segment, b: &Segment, tol: f64) -> bool {
    let t = a.tangent();
    if t.cross(&b.tangent()).norm() > 1e-9 {
        return false;
    }
    if a.distance(&b.a) > tol && (b.a - a.a).cross(&t).norm() > tol {
        return false;
    }
    let pa = (0.0_f64, a.length());
    let pb = {
        let u = (b.a - a.a).dot(&t);
        let v = (b.b - a.a).dot(&t);
        (u.min(v), u.max(v))
    };
    pa.1.min(pb.1) - pa.0.max(pb.0) > tol
}

/// Common point of two non-parallel segments, if they meet.
fn segment_crossing(a: &Segment, b: &Segment, tol: f64) -> Option<Point> {
    let d1 = a.b - a.a;
    let d2 = b.b - b.a;
    let r = a.a - b.a;
    let aa = d1.dot(&d1);
    let bb = d1.dot(&d2);
    let cc = d2.dot(&d2);
    let dd = d1.dot(&r);
    let ee = d2.dot(&r);
    let den = aa * cc - bb * bb;
    if den <= 1e-14 * aa * cc {
        return None;
    }
    let s = ((bb * ee - cc * dd) / den).clamp(0.0, 1.0);
    let t = ((aa * ee - bb * dd) / den).clamp(0.0, 1.0);
    let p = a.a + d1 * s;
    let q = b.a + d2 * t;
    if (p - q).norm() > tol || a.distance(&q) > tol || b.distance(&p) > tol {
        return None;
    }
    Some((p + q) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(axis: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for (u, v) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            let mut p = Point::zeros();
            p[(axis + 1) % 3] = u;
            p[(axis + 2) % 3] = v;
            out.push(p);
        }
        out
    }

    #[test]
    fn three_axis_planes() {
        let net = FractureNetwork { fractures: vec![square(2), square(1), square(0)] };
        let g = NetworkGeometry::new(&net, 1e-9).unwrap();
        assert_eq!(g.traces.len(), 3);
        assert_eq!(g.points.len(), 1);
        assert!(g.points[0].norm() < 1e-12);
        assert_eq!(g.point_traces[0], vec![0, 1, 2]);
        for t in &g.traces {
            assert!((t.segment.length() - 2.0).abs() < 1e-12);
        }
        assert_eq!(g.traces_of(0), vec![0, 1]);
    }

    #[test]
    fn parallel_fractures_have_no_traces() {
        let mut b = square(2);
        for p in &mut b {
            p.z = 0.5;
        }
        let g = NetworkGeometry::new(&FractureNetwork { fractures: vec![square(2), b] }, 1e-9).unwrap();
        assert!(g.traces.is_empty() && g.points.is_empty());
    }

    #[test]
    fn trace_ending_inside() {
        // half-height vertical fracture over the horizontal one
        let v = vec![
            Point::new(-0.5, 0.0, -0.5),
            Point::new(0.5, 0.0, -0.5),
            Point::new(0.5, 0.0, 0.5),
            Point::new(-0.5, 0.0, 0.5),
        ];
        let g = NetworkGeometry::new(&FractureNetwork { fractures: vec![square(2), v] }, 1e-9).unwrap();
        assert_eq!(g.traces.len(), 1);
        assert!((g.traces[0].segment.length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_coplanar_fractures_rejected() {
        let mut b = square(2);
        for p in &mut b {
            p.x += 0.5;
        }
        assert!(NetworkGeometry::new(&FractureNetwork { fractures: vec![square(2), b] }, 1e-9).is_err());
    }
}
