//! The mixed-dimensional mesh: matrix, fracture, trace and point domains and
//! the interfaces between consecutive dimensions.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::cut::CutMesh;
use super::network::NetworkGeometry;
use super::{close_relative, validate_polymesh, PointSet, PolyMesh, Violation};
use crate::error::{Error, Result};
use crate::geometry::{polygon_area, polygon_area_vector, triangulate_polygon, Frame, Point, Segment};
use crate::vem::{ElementGeometry, FacetGeometry, FacetShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DomainId {
    pub dim: usize,
    pub index: usize,
}

impl DomainId {
    pub fn new(dim: usize, index: usize) -> Self {
        DomainId { dim, index }
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            3 => write!(f, "matrix"),
            2 => write!(f, "fracture{}", self.index + 1),
            1 => write!(f, "trace{}", self.index + 1),
            _ => write!(f, "point{}", self.index + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetKind {
    /// Shared by two elements of the same domain.
    Interior,
    /// On the domain boundary; `external` when it also lies on the matrix boundary.
    Boundary { external: bool },
    /// Coincides with element `element` of the lower-dimensional domain `lower`.
    Interface { lower: usize, element: usize },
}

#[derive(Clone, Debug)]
pub struct MeshFacet {
    /// Local coordinates.
    pub shape: FacetShape,
    /// Reference normal `n_f` in local coordinates.
    pub normal: Point,
    pub kind: FacetKind,
    /// `(element, position in the element's facet list)`.
    pub owners: Vec<(usize, usize)>,
    pub centroid: Point,
}

#[derive(Clone, Debug)]
pub struct MeshElement {
    /// Domain facet and `n_f · n_out`.
    pub facets: Vec<(usize, f64)>,
    /// Face or cell id in the cut mesh (matrix and fractures), position along
    /// the trace, or point id.
    pub entity: usize,
}

#[derive(Clone, Debug)]
pub struct DomainMesh {
    pub id: DomainId,
    pub frame: Frame,
    pub elements: Vec<MeshElement>,
    pub facets: Vec<MeshFacet>,
    /// Pressure-only trace domain used when trace flow is neglected.
    pub multiplier: bool,
}

impl DomainMesh {
    pub fn dim(&self) -> usize {
        self.id.dim
    }

    /// Element geometry in local coordinates with quadrature exact to `order`.
    pub fn element_geometry(&self, e: usize, order: usize) -> Result<ElementGeometry> {
        let facets = self.elements[e]
            .facets
            .iter()
            .map(|&(f, s)| FacetGeometry::new(self.facets[f].shape.clone(), self.facets[f].normal, s, order))
            .collect::<Result<Vec<_>>>()?;
        ElementGeometry::new(self.id.dim, facets, order)
    }

    pub fn to_global(&self, x: &Point) -> Point {
        self.frame.to_global(x)
    }
}

/// One side of an interface: an upper-dimensional element facet.
#[derive(Clone, Debug, Serialize)]
pub struct Side {
    pub element: usize,
    /// Position of the facet in the element's facet list.
    pub slot: usize,
    /// Outward co-normal in global coordinates.
    pub conormal: [f64; 3],
    pub plus: bool,
}

/// A lower-dimensional element seen from the domain one dimension up.
#[derive(Clone, Debug, Serialize)]
pub struct Interface {
    pub upper: DomainId,
    pub lower: DomainId,
    pub lower_element: usize,
    /// Facet of the upper domain.
    pub facet: usize,
    pub sides: Vec<Side>,
}

#[derive(Clone, Debug)]
pub struct MixedMesh {
    pub poly: PolyMesh,
    pub face_fracture: Vec<Option<usize>>,
    pub network: NetworkGeometry,
    pub matrix: DomainMesh,
    pub fractures: Vec<DomainMesh>,
    pub traces: Vec<DomainMesh>,
    pub points: Vec<DomainMesh>,
    pub interfaces: Vec<Interface>,
    pub trace_flow: bool,
    pub tol: f64,
    pub background_volume: f64,
}

impl MixedMesh {
    pub fn build(cut: CutMesh, network: NetworkGeometry, trace_flow: bool, background_volume: f64) -> Result<Self> {
        let tol = cut.tol;
        let mut poly = cut.mesh;
        let face_fracture = cut.face_fracture;
        let nfr = network.fractures.len();
        let mut frac_faces: Vec<Vec<usize>> = vec![Vec::new(); nfr];
        for (f, fr) in face_fracture.iter().enumerate() {
            if let Some(l) = fr {
                frac_faces[*l].push(f);
            }
        }

        // breakpoints along every trace, as mesh vertex ids
        let mut set = PointSet::from_points(&poly.vertices, tol);
        let mut breaks: Vec<Vec<(f64, usize)>> = Vec::with_capacity(network.traces.len());
        for (t, tr) in network.traces.iter().enumerate() {
            let seg = tr.segment;
            let tan = seg.tangent();
            let mut cand: Vec<Point> = vec![seg.a, seg.b];
            cand.extend(network.points_on(t).into_iter().map(|p| network.points[p]));
            for &l in &tr.fractures {
                for &f in &frac_faces[l] {
                    for &v in &poly.faces[f] {
                        if seg.distance(&poly.vertices[v]) <= tol {
                            cand.push(poly.vertices[v]);
                        }
                    }
                }
            }
            let mut ids: Vec<(f64, usize)> = cand
                .iter()
                .map(|p| {
                    let id = set.insert(*p);
                    ((set.points[id] - seg.a).dot(&tan), id)
                })
                .collect();
            ids.sort_by(|a, b| a.0.total_cmp(&b.0));
            ids.dedup_by(|a, b| a.1 == b.1);
            breaks.push(ids);
        }
        poly.vertices = set.points.clone();

        // hanging vertices on fracture cells
        for l in 0..nfr {
            let mut special: Vec<usize> = frac_faces[l].iter().flat_map(|&f| poly.faces[f].clone()).collect();
            for t in network.traces_of(l) {
                special.extend(breaks[t].iter().map(|b| b.1));
            }
            special.sort_unstable();
            special.dedup();
            for &f in &frac_faces[l] {
                poly.faces[f] = insert_hanging(&poly.faces[f], &special, &poly.vertices, tol);
            }
        }

        let boundary = BoundaryLocator::new(&poly, tol);
        let mut fractures = Vec::with_capacity(nfr);
        for l in 0..nfr {
            fractures.push(fracture_domain(l, &poly, &frac_faces[l], &network, &breaks, &boundary, tol)?);
        }
        let mut traces = Vec::with_capacity(network.traces.len());
        for t in 0..network.traces.len() {
            traces.push(trace_domain(t, &poly, &network, &breaks[t], &boundary, trace_flow, tol));
        }
        let points = if trace_flow {
            network
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| DomainMesh {
                    id: DomainId::new(0, i),
                    frame: Frame { dim: 0, origin: *p, axes: [Point::x(), Point::y(), Point::z()] },
                    elements: vec![MeshElement { facets: Vec::new(), entity: i }],
                    facets: Vec::new(),
                    multiplier: false,
                })
                .collect()
        } else {
            Vec::new()
        };
        let matrix = matrix_domain(&poly, &face_fracture, &fractures)?;

        let mut mesh = MixedMesh {
            poly,
            face_fracture,
            network,
            matrix,
            fractures,
            traces,
            points,
            interfaces: Vec::new(),
            trace_flow,
            tol,
            background_volume,
        };
        mesh.interfaces = mesh.collect_interfaces();
        Ok(mesh)
    }

    /// Matrix mesh without fractures.
    pub fn matrix_only(poly: PolyMesh, tol: f64) -> Result<Self> {
        let volume = poly.total_volume()?;
        let face_fracture = vec![None; poly.faces.len()];
        let cut = CutMesh { mesh: poly, face_fracture, snapped: 0, cut_cells: 0, tol };
        let net = NetworkGeometry::new(&Default::default(), tol)?;
        MixedMesh::build(cut, net, true, volume)
    }

    /// A lone planar domain in `z = 0` whose boundary is entirely external.
    pub fn surface(vertices: Vec<Point>, faces: Vec<Vec<usize>>, tol: f64) -> Result<Self> {
        let (lo, hi) = bbox(&vertices);
        let outline = vec![
            Point::new(lo.x, lo.y, 0.0),
            Point::new(hi.x, lo.y, 0.0),
            Point::new(hi.x, hi.y, 0.0),
            Point::new(lo.x, hi.y, 0.0),
        ];
        let net = NetworkGeometry::new(&super::FractureNetwork { fractures: vec![outline] }, tol)?;
        let n = faces.len();
        let poly = PolyMesh { vertices, faces, cells: Vec::new() };
        let ids: Vec<usize> = (0..n).collect();
        let fracture = fracture_domain(0, &poly, &ids, &net, &[], &BoundaryLocator::everywhere(), tol)?;
        let area: f64 = (0..n).map(|f| polygon_area(&poly.face_points(f))).sum();
        Ok(MixedMesh {
            face_fracture: vec![Some(0); n],
            network: net,
            matrix: empty_matrix(),
            fractures: vec![fracture],
            traces: Vec::new(),
            points: Vec::new(),
            interfaces: Vec::new(),
            trace_flow: true,
            tol,
            background_volume: area,
            poly,
        })
    }

    /// A lone segment domain on the x axis with the given node abscissae.
    pub fn segment(nodes: &[f64], tol: f64) -> Result<Self> {
        let mut xs = nodes.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= tol);
        if xs.len() < 2 {
            return Err(Error::DegenerateGeometry("segment mesh needs two distinct nodes".into()));
        }
        let vertices: Vec<Point> = xs.iter().map(|&x| Point::new(x, 0.0, 0.0)).collect();
        let seg = Segment { a: vertices[0], b: vertices[vertices.len() - 1] };
        let net = NetworkGeometry {
            fractures: Vec::new(),
            planes: Vec::new(),
            traces: vec![super::Trace { fractures: [0, 0], segment: seg }],
            points: Vec::new(),
            point_traces: Vec::new(),
        };
        let breaks: Vec<(f64, usize)> = xs.iter().enumerate().map(|(i, &x)| (x - xs[0], i)).collect();
        let poly = PolyMesh { vertices, faces: Vec::new(), cells: Vec::new() };
        let trace = trace_domain(0, &poly, &net, &breaks, &BoundaryLocator::everywhere(), true, tol);
        Ok(MixedMesh {
            face_fracture: Vec::new(),
            network: net,
            matrix: empty_matrix(),
            fractures: Vec::new(),
            traces: vec![trace],
            points: Vec::new(),
            interfaces: Vec::new(),
            trace_flow: true,
            tol,
            background_volume: seg.length(),
            poly,
        })
    }

    pub fn domain(&self, id: DomainId) -> &DomainMesh {
        match id.dim {
            3 => &self.matrix,
            2 => &self.fractures[id.index],
            1 => &self.traces[id.index],
            _ => &self.points[id.index],
        }
    }

    /// All domains, highest dimension first.
    pub fn domains(&self) -> impl Iterator<Item = &DomainMesh> {
        std::iter::once(&self.matrix).chain(self.fractures.iter()).chain(self.traces.iter()).chain(self.points.iter())
    }

    /// Lower-dimensional neighbours of a domain.
    pub fn down(&self, id: DomainId) -> Vec<DomainId> {
        let mut v: Vec<DomainId> = self.interfaces.iter().filter(|i| i.upper == id).map(|i| i.lower).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Higher-dimensional neighbours of a domain.
    pub fn up(&self, id: DomainId) -> Vec<DomainId> {
        let mut v: Vec<DomainId> = self.interfaces.iter().filter(|i| i.lower == id).map(|i| i.upper).collect();
        v.sort();
        v.dedup();
        v
    }

    fn collect_interfaces(&self) -> Vec<Interface> {
        let mut out = Vec::new();
        for d in self.domains() {
            if d.multiplier {
                continue;
            }
            for (fi, f) in d.facets.iter().enumerate() {
                let FacetKind::Interface { lower, element } = f.kind else { continue };
                let mut sides: Vec<Side> = f
                    .owners
                    .iter()
                    .map(|&(e, slot)| {
                        let s = d.elements[e].facets[slot].1;
                        let n = d.frame.vector_to_global(&(f.normal * s));
                        Side { element: e, slot, conormal: [n.x, n.y, n.z], plus: false }
                    })
                    .collect();
                let best =
                    (0..sides.len()).max_by(|&a, &b| lex_cmp(&sides[a].conormal, &sides[b].conormal)).unwrap_or(0);
                if let Some(s) = sides.get_mut(best) {
                    s.plus = true;
                }
                out.push(Interface {
                    upper: d.id,
                    lower: DomainId::new(d.id.dim - 1, lower),
                    lower_element: element,
                    facet: fi,
                    sides,
                });
            }
        }
        out
    }

    /// Conformity report; empty means the mesh passed every check.
    pub fn validate(&self) -> Vec<Violation> {
        let tol = self.tol;
        if self.matrix.elements.is_empty() {
            // standalone fracture or trace
            let area: f64 = self
                .fractures
                .iter()
                .flat_map(|fr| &fr.elements)
                .map(|e| polygon_area(&self.poly.face_points(e.entity)))
                .sum();
            let length: f64 =
                self.traces.iter().map(|tr| (0..tr.elements.len()).map(|e| segment_length(tr, e)).sum::<f64>()).sum();
            let measure = area + length;
            if !close_relative(measure, self.background_volume, 1e-10) {
                return vec![Violation::VolumeMismatch { volume: measure, expected: self.background_volume }];
            }
            return Vec::new();
        }
        let mut out = validate_polymesh(&self.poly, tol);
        match self.poly.total_volume() {
            Ok(v) if close_relative(v, self.background_volume, 1e-10) => {}
            Ok(v) => out.push(Violation::VolumeMismatch { volume: v, expected: self.background_volume }),
            Err(_) => out.push(Violation::VolumeMismatch { volume: f64::NAN, expected: self.background_volume }),
        }
        for (l, fr) in self.fractures.iter().enumerate() {
            let area: f64 = fr.elements.iter().map(|e| polygon_area(&self.poly.face_points(e.entity))).sum();
            let expected = polygon_area(&self.network.fractures[l]);
            if !close_relative(area, expected, 1e-10) {
                out.push(Violation::FractureCoverage { fracture: l, area, expected });
            }
        }
        let mut seen = vec![Vec::new(); self.fractures.len()];
        for (l, fr) in self.fractures.iter().enumerate() {
            seen[l] = vec![0usize; fr.elements.len()];
        }
        for f in &self.matrix.facets {
            if let FacetKind::Interface { lower, element } = f.kind {
                let opposite = f.owners.len() == 2 && {
                    let s0 = self.matrix.elements[f.owners[0].0].facets[f.owners[0].1].1;
                    let s1 = self.matrix.elements[f.owners[1].0].facets[f.owners[1].1].1;
                    s0 * s1 < 0.0
                };
                match seen.get_mut(lower).and_then(|s| s.get_mut(element)) {
                    Some(n) if opposite => *n += 1,
                    Some(_) => {}
                    None => out.push(Violation::FractureSides { fracture: lower, element }),
                }
            }
        }
        for (l, s) in seen.iter().enumerate() {
            for (e, &n) in s.iter().enumerate() {
                if n != 1 {
                    out.push(Violation::FractureSides { fracture: l, element: e });
                }
            }
        }
        for (t, tr) in self.traces.iter().enumerate() {
            let length: f64 = (0..tr.elements.len()).map(|e| segment_length(tr, e)).sum();
            let expected = self.network.traces[t].segment.length();
            if !close_relative(length, expected, 1e-10) {
                out.push(Violation::TraceCoverage { trace: t, length, expected });
            }
            for &l in &self.network.traces[t].fractures {
                let mut sides = vec![0usize; tr.elements.len()];
                for f in &self.fractures[l].facets {
                    if let FacetKind::Interface { lower, element } = f.kind {
                        if lower == t {
                            sides[element] += f.owners.len();
                        }
                    }
                }
                for (e, &n) in sides.iter().enumerate() {
                    if n == 0 || n > 2 {
                        out.push(Violation::TraceSides { trace: t, element: e, fracture: l, sides: n });
                    }
                }
            }
        }
        for i in &self.interfaces {
            let expected = if i.upper.dim == 3 { 2 } else { 1 };
            if i.sides.len() < expected {
                out.push(Violation::DanglingInterface { upper: i.upper, lower: i.lower });
            }
        }
        out
    }
}

fn empty_matrix() -> DomainMesh {
    DomainMesh {
        id: DomainId::new(3, 0),
        frame: Frame::identity(),
        elements: Vec::new(),
        facets: Vec::new(),
        multiplier: false,
    }
}

fn bbox(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn lex_cmp(a: &[f64; 3], b: &[f64; 3]) -> std::cmp::Ordering {
    for i in 0..3 {
        if (a[i] - b[i]).abs() > 1e-12 {
            return a[i].total_cmp(&b[i]);
        }
    }
    std::cmp::Ordering::Equal
}

fn segment_length(d: &DomainMesh, e: usize) -> f64 {
    let el = &d.elements[e];
    let a = d.facets[el.facets[0].0].centroid;
    let b = d.facets[el.facets[1].0].centroid;
    (b - a).norm()
}

fn insert_hanging(lp: &[usize], special: &[usize], verts: &[Point], tol: f64) -> Vec<usize> {
    let m = lp.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let u = lp[i];
        let v = lp[(i + 1) % m];
        out.push(u);
        let a = verts[u];
        let d = verts[v] - a;
        let len = d.norm();
        let seg = Segment { a, b: verts[v] };
        let mut mid: Vec<(f64, usize)> = special
            .iter()
            .filter(|&&w| w != u && w != v)
            .filter_map(|&w| {
                let s = (verts[w] - a).dot(&d) / len;
                (s > tol && s < len - tol && seg.distance(&verts[w]) <= tol).then_some((s, w))
            })
            .collect();
        mid.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.extend(mid.into_iter().map(|x| x.1));
    }
    out
}

/// Locates points on the matrix boundary.
struct BoundaryLocator {
    faces: Vec<(Vec<Point>, Point, (Point, Point))>,
    tol: f64,
    everywhere: bool,
}

impl BoundaryLocator {
    fn new(poly: &PolyMesh, tol: f64) -> Self {
        let faces = poly
            .face_owners()
            .iter()
            .enumerate()
            .filter(|(_, o)| o.len() == 1)
            .map(|(f, _)| {
                let pts = poly.face_points(f);
                let n = polygon_area_vector(&pts).normalize();
                let mut lo = Point::repeat(f64::INFINITY);
                let mut hi = Point::repeat(f64::NEG_INFINITY);
                for p in &pts {
                    lo = lo.inf(p);
                    hi = hi.sup(p);
                }
                (pts, n, (lo, hi))
            })
            .collect();
        BoundaryLocator { faces, tol, everywhere: false }
    }

    fn everywhere() -> Self {
        BoundaryLocator { faces: Vec::new(), tol: 0.0, everywhere: true }
    }

    fn contains(&self, p: &Point) -> bool {
        if self.everywhere {
            return true;
        }
        let tol = self.tol;
        self.faces.iter().any(|(pts, n, (lo, hi))| {
            if (0..3).any(|i| p[i] < lo[i] - tol || p[i] > hi[i] + tol) {
                return false;
            }
            if (p - pts[0]).dot(n).abs() > tol {
                return false;
            }
            triangulate_polygon(pts).map(|tris| tris.iter().any(|t| in_triangle(p, t, n, tol))).unwrap_or(false)
        })
    }
}

fn in_triangle(p: &Point, t: &[Point; 3], n: &Point, tol: f64) -> bool {
    (0..3).all(|i| {
        let a = t[i];
        let b = t[(i + 1) % 3];
        let out = (b - a).cross(n);
        let len = out.norm();
        len == 0.0 || out.dot(&(p - a)) / len <= tol
    })
}

fn fracture_domain(
    l: usize,
    poly: &PolyMesh,
    faces: &[usize],
    net: &NetworkGeometry,
    breaks: &[Vec<(f64, usize)>],
    boundary: &BoundaryLocator,
    tol: f64,
) -> Result<DomainMesh> {
    let poly_l = &net.fractures[l];
    let centroid = poly_l.iter().sum::<Point>() / poly_l.len() as f64;
    let frame = Frame::plane(centroid, net.planes[l].normal);
    let local = |v: usize| {
        let mut q = frame.to_local(&poly.vertices[v]);
        q.z = 0.0;
        q
    };
    let traces = net.traces_of(l);
    let mut elements = Vec::with_capacity(faces.len());
    let mut facets: Vec<MeshFacet> = Vec::new();
    let mut edge_id: HashMap<(usize, usize), usize> = HashMap::new();
    for &f in faces {
        let mut lp = poly.faces[f].clone();
        let pts: Vec<Point> = lp.iter().map(|&v| local(v)).collect();
        if polygon_area_vector(&pts).z < 0.0 {
            lp.reverse();
        }
        let e = elements.len();
        let m = lp.len();
        let mut el = MeshElement { facets: Vec::with_capacity(m), entity: f };
        for i in 0..m {
            let (u, v) = (lp[i], lp[(i + 1) % m]);
            let key = (u.min(v), u.max(v));
            let slot = el.facets.len();
            match edge_id.get(&key) {
                Some(&fi) => {
                    facets[fi].owners.push((e, slot));
                    let t = local(v) - local(u);
                    let out = Point::new(t.y, -t.x, 0.0);
                    el.facets.push((fi, facets[fi].normal.dot(&out).signum()));
                }
                None => {
                    let (a, b) = (local(u), local(v));
                    let t = (b - a).normalize();
                    let normal = Point::new(t.y, -t.x, 0.0);
                    let fi = facets.len();
                    edge_id.insert(key, fi);
                    facets.push(MeshFacet {
                        shape: FacetShape::Segment(a, b),
                        normal,
                        kind: FacetKind::Interior,
                        owners: vec![(e, slot)],
                        centroid: (poly.vertices[u] + poly.vertices[v]) * 0.5,
                    });
                    el.facets.push((fi, 1.0));
                }
            }
        }
        elements.push(el);
    }
    for (key, &fi) in &edge_id {
        let f = &mut facets[fi];
        if f.owners.len() > 2 {
            return Err(Error::Topology(format!("fracture {l} edge shared by {} cells", f.owners.len())));
        }
        let (pa, pb) = (poly.vertices[key.0], poly.vertices[key.1]);
        let mut kind = None;
        for &t in &traces {
            let seg = net.traces[t].segment;
            if seg.distance(&pa) <= tol && seg.distance(&pb) <= tol {
                let mid = ((pa + pb) * 0.5 - seg.a).dot(&seg.tangent());
                let pos = breaks[t].iter().rposition(|b| b.0 <= mid).unwrap_or(0);
                let pos = pos.min(breaks[t].len().saturating_sub(2));
                kind = Some(FacetKind::Interface { lower: t, element: pos });
                break;
            }
        }
        f.kind = match kind {
            Some(k) => k,
            None if f.owners.len() == 2 => FacetKind::Interior,
            None => FacetKind::Boundary { external: boundary.contains(&f.centroid) },
        };
    }
    Ok(DomainMesh { id: DomainId::new(2, l), frame, elements, facets, multiplier: false })
}

fn trace_domain(
    t: usize,
    poly: &PolyMesh,
    net: &NetworkGeometry,
    breaks: &[(f64, usize)],
    boundary: &BoundaryLocator,
    trace_flow: bool,
    tol: f64,
) -> DomainMesh {
    let seg = net.traces[t].segment;
    let frame = Frame::line(seg.a, seg.b - seg.a);
    let pts_on = net.points_on(t);
    let n = breaks.len();
    let mut facets = Vec::with_capacity(n);
    for (i, &(s, v)) in breaks.iter().enumerate() {
        let x = poly.vertices[v];
        let mut owners = Vec::new();
        if i > 0 {
            owners.push((i - 1, 1));
        }
        if i + 1 < n {
            owners.push((i, 0));
        }
        let point = pts_on.iter().copied().find(|&p| (net.points[p] - x).norm() <= tol);
        let kind = match point {
            Some(p) if trace_flow => FacetKind::Interface { lower: p, element: 0 },
            _ if owners.len() == 2 => FacetKind::Interior,
            _ => FacetKind::Boundary { external: boundary.contains(&x) },
        };
        facets.push(MeshFacet {
            shape: FacetShape::Vertex(Point::new(s, 0.0, 0.0)),
            normal: Point::x(),
            kind,
            owners,
            centroid: x,
        });
    }
    let elements =
        (0..n.saturating_sub(1)).map(|i| MeshElement { facets: vec![(i, -1.0), (i + 1, 1.0)], entity: i }).collect();
    DomainMesh { id: DomainId::new(1, t), frame, elements, facets, multiplier: !trace_flow }
}

fn matrix_domain(poly: &PolyMesh, face_fracture: &[Option<usize>], fractures: &[DomainMesh]) -> Result<DomainMesh> {
    let owners = poly.face_owners();
    let mut element_of: Vec<HashMap<usize, usize>> = vec![HashMap::new(); fractures.len()];
    for (l, fr) in fractures.iter().enumerate() {
        for (e, el) in fr.elements.iter().enumerate() {
            element_of[l].insert(el.entity, e);
        }
    }
    let mut facets = Vec::with_capacity(poly.faces.len());
    for (f, lp) in poly.faces.iter().enumerate() {
        let pts: Vec<Point> = lp.iter().map(|&v| poly.vertices[v]).collect();
        let normal = polygon_area_vector(&pts).normalize();
        let centroid = pts.iter().sum::<Point>() / pts.len() as f64;
        let kind = match (face_fracture[f], owners[f].len()) {
            (Some(l), 2) => FacetKind::Interface { lower: l, element: element_of[l][&f] },
            (Some(l), _) => {
                return Err(Error::Conformity(format!("fracture {l} cell {f} lies on the matrix boundary")))
            }
            (None, 2) => FacetKind::Interior,
            (None, 1) => FacetKind::Boundary { external: true },
            (None, k) => return Err(Error::Topology(format!("face {f} has {k} owners"))),
        };
        facets.push(MeshFacet { shape: FacetShape::Polygon(pts), normal, kind, owners: Vec::new(), centroid });
    }
    let mut elements = Vec::with_capacity(poly.cells.len());
    for (c, cell) in poly.cells.iter().enumerate() {
        let mut el = MeshElement { facets: Vec::with_capacity(cell.len()), entity: c };
        for (slot, &(f, out)) in cell.iter().enumerate() {
            facets[f].owners.push((c, slot));
            el.facets.push((f, if out { 1.0 } else { -1.0 }));
        }
        elements.push(el);
    }
    Ok(DomainMesh { id: DomainId::new(3, 0), frame: Frame::identity(), elements, facets, multiplier: false })
}
