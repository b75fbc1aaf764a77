use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use serde::Serialize;

use crate::assembly::GlobalSystem;
use crate::geometry::{segment_quadrature, Point};
use crate::mesh::{DomainId, DomainMesh, FacetKind, MixedMesh};
use crate::problem::{ProblemData, ReferenceSolution};

/// Flux DOF values of one element.
pub fn element_dofs(sys: &GlobalSystem, domain: usize, e: usize, x: &[f64]) -> Vec<f64> {
    sys.dofs.domains[domain].element_flux[e].iter().map(|&g| x[g]).collect()
}

/// Coefficients of `Π⁰ u_h` in the element's vector polynomial basis.
pub fn projected_velocity(sys: &GlobalSystem, domain: usize, e: usize, x: &[f64]) -> DVector<f64> {
    &sys.locals[domain][e].pi_hat * DVector::from_vec(element_dofs(sys, domain, e, x))
}

/// `Π⁰ u_h` of element `e` at a local point, in global coordinates.
pub fn velocity_value(
    sys: &GlobalSystem,
    frame: &crate::geometry::Frame,
    domain: usize,
    e: usize,
    x: &[f64],
    local: &Point,
) -> Point {
    let Some(lm) = sys.locals[domain].get(e) else {
        return Point::zeros();
    };
    let coef = projected_velocity(sys, domain, e, x);
    let u: Point = lm.basis.eval(local).iter().zip(coef.iter()).map(|(g, c)| g * *c).sum();
    frame.vector_to_global(&u)
}

/// Pressure of element `e` at a point given in the domain's local coordinates.
pub fn pressure_value(sys: &GlobalSystem, domain: usize, e: usize, x: &[f64], local: &Point) -> f64 {
    let r = sys.dofs.domains[domain].element_pressure[e].clone();
    match &sys.pressure_bases[domain][e] {
        Some(b) => b.eval(local).iter().zip(&x[r]).map(|(m, c)| m * c).sum(),
        None => x[r.start],
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainErrors {
    pub domain: DomainId,
    pub pressure: f64,
    pub velocity: f64,
    pub divergence: f64,
    pub pressure_norm: f64,
    pub velocity_norm: f64,
    pub divergence_norm: f64,
}

fn rel(e: f64, n: f64) -> f64 {
    if n > 0.0 {
        e / n
    } else {
        e
    }
}

impl DomainErrors {
    /// Errors divided by the norm of the exact field, when it is non-zero.
    pub fn relative(&self) -> [f64; 3] {
        [
            rel(self.pressure, self.pressure_norm),
            rel(self.velocity, self.velocity_norm),
            rel(self.divergence, self.divergence_norm),
        ]
    }
}

/// L² errors of pressure, projected velocity and divergence on every domain.
pub fn error_norms(
    mesh: &MixedMesh,
    sys: &GlobalSystem,
    x: &[f64],
    reference: &dyn ReferenceSolution,
) -> Vec<DomainErrors> {
    let domains: Vec<&DomainMesh> = mesh.domains().collect();
    let mut out = Vec::with_capacity(domains.len());
    for (di, dm) in domains.iter().enumerate() {
        let id = dm.id;
        let mut acc = [0.0f64; 6];
        if dm.dim() == 0 {
            let p = reference.pressure(id, &dm.frame.origin);
            acc[0] = (x[sys.dofs.domains[di].pressure.start] - p).powi(2);
            acc[3] = p * p;
        } else if sys.locals[di].is_empty() {
            let order = sys.spaces.quadrature_order(2);
            for e in 0..dm.elements.len() {
                let el = &dm.elements[e];
                let a = dm.facets[el.facets[0].0].shape.points()[0];
                let b = dm.facets[el.facets[1].0].shape.points()[0];
                let q = segment_quadrature(&a, &b, order);
                for (p, w) in q.points.iter().zip(&q.weights) {
                    let exact = reference.pressure(id, &dm.to_global(p));
                    acc[0] += w * (pressure_value(sys, di, e, x, p) - exact).powi(2);
                    acc[3] += w * exact * exact;
                }
            }
        } else {
            for (e, lm) in sys.locals[di].iter().enumerate() {
                let dofs = element_dofs(sys, di, e, x);
                let coef = &lm.pi_hat * DVector::from_column_slice(&dofs);
                let div = &lm.v * DVector::from_column_slice(&dofs);
                for (p, w) in lm.geom.quad.points.iter().zip(&lm.geom.quad.weights) {
                    let xg = dm.to_global(p);
                    let pe = reference.pressure(id, &xg);
                    acc[0] += w * (pressure_value(sys, di, e, x, p) - pe).powi(2);
                    acc[3] += w * pe * pe;
                    let uh: Point = lm.basis.eval(p).iter().zip(coef.iter()).map(|(g, c)| g * *c).sum();
                    let ue = reference.velocity(id, &xg);
                    acc[1] += w * (dm.frame.vector_to_global(&uh) - ue).norm_squared();
                    acc[4] += w * ue.norm_squared();
                    let dh: f64 = lm.pressure.eval(p).iter().zip(div.iter()).map(|(m, c)| m * c).sum();
                    let de = reference.divergence(id, &xg);
                    acc[2] += w * (dh - de).powi(2);
                    acc[5] += w * de * de;
                }
            }
        }
        let s = acc.map(f64::sqrt);
        out.push(DomainErrors {
            domain: id,
            pressure: s[0],
            velocity: s[1],
            divergence: s[2],
            pressure_norm: s[3],
            velocity_norm: s[4],
            divergence_norm: s[5],
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Node {
    Boundary,
    Sink,
    Domain(DomainId),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Boundary => write!(f, "BC"),
            Node::Sink => write!(f, "sink"),
            Node::Domain(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxEdge {
    pub source: Node,
    pub target: Node,
    pub value: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FluxReport {
    pub edges: Vec<FluxEdge>,
    /// Sum of the inflow over boundary facets with incoming flux.
    pub gross_inflow: f64,
}

impl FluxReport {
    pub fn value(&self, source: Node, target: Node) -> Option<f64> {
        self.edges.iter().find(|e| e.source == source && e.target == target).map(|e| e.value)
    }

    /// `|inflow − outflow|` at every domain node, relative to the largest
    /// edge of the report and the gross inflow.
    pub fn imbalance(&self) -> Vec<(DomainId, f64)> {
        let scale = self.edges.iter().map(|e| e.value.abs()).fold(self.gross_inflow, f64::max);
        let mut nodes: BTreeMap<DomainId, f64> = BTreeMap::new();
        for e in &self.edges {
            if let Node::Domain(d) = e.target {
                *nodes.entry(d).or_default() += e.value;
            }
            if let Node::Domain(d) = e.source {
                *nodes.entry(d).or_default() -= e.value;
            }
        }
        nodes.into_iter().map(|(d, s)| (d, if scale > 0.0 { s.abs() / scale } else { s.abs() })).collect()
    }

    pub fn max_imbalance(&self) -> f64 {
        self.imbalance().iter().map(|x| x.1).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("source,target,flux\n");
        for e in &self.edges {
            s.push_str(&format!("{},{},{:.12e}\n", e.source, e.target, e.value));
        }
        s
    }
}

/// Integrated normal flux `∫ u_h · n_out` over facet position `slot` of element `e`.
fn facet_flux(sys: &GlobalSystem, dm: &DomainMesh, di: usize, e: usize, slot: usize, x: &[f64]) -> f64 {
    let dd = &sys.dofs.domains[di];
    let b = dd.block(dm, e, slot);
    let sign = dm.elements[e].facets[slot].1;
    sign * sys.locals[di][e].geom.facets[slot].measure * x[b]
}

fn source_integral(sys: &GlobalSystem, dm: &DomainMesh, di: usize, e: usize, data: &dyn ProblemData) -> f64 {
    let lm = &sys.locals[di][e];
    lm.geom.quad.points.iter().zip(&lm.geom.quad.weights).map(|(p, w)| w * data.source(dm.id, &dm.to_global(p))).sum()
}

/// Measure-weighted mean of `|p_upper − p_lower|` over the interface facets
/// between each pair of domains, sampled at facet centroids.
pub fn pressure_jumps(mesh: &MixedMesh, sys: &GlobalSystem, x: &[f64]) -> Vec<(DomainId, DomainId, f64)> {
    let domains: Vec<&DomainMesh> = mesh.domains().collect();
    let mut acc: BTreeMap<(DomainId, DomainId), (f64, f64)> = BTreeMap::new();
    for iface in &mesh.interfaces {
        let ui = sys.dofs.domain_index(iface.upper);
        let li = sys.dofs.domain_index(iface.lower);
        let (um, lm) = (domains[ui], domains[li]);
        let c = um.facets[iface.facet].centroid;
        let pl = pressure_value(sys, li, iface.lower_element, x, &lm.frame.to_local(&c));
        for s in &iface.sides {
            let pu = pressure_value(sys, ui, s.element, x, &um.frame.to_local(&c));
            let w = sys.locals[ui][s.element].geom.facets[s.slot].measure;
            let a = acc.entry((iface.upper, iface.lower)).or_default();
            a.0 += w * (pu - pl).abs();
            a.1 += w;
        }
    }
    acc.into_iter().map(|((u, l), (s, w))| (u, l, if w > 0.0 { s / w } else { 0.0 })).collect()
}

/// Flux through every boundary, source and interface of the domain graph.
pub fn flux_report(mesh: &MixedMesh, sys: &GlobalSystem, x: &[f64], data: &dyn ProblemData) -> FluxReport {
    let domains: Vec<&DomainMesh> = mesh.domains().collect();
    let mut report = FluxReport::default();
    let mut inflow_from_upper = vec![0.0; domains.len()];
    let mut exchange: BTreeMap<(DomainId, DomainId), f64> = BTreeMap::new();
    for iface in &mesh.interfaces {
        let ui = sys.dofs.domain_index(iface.upper);
        let um = domains[ui];
        let v: f64 = iface.sides.iter().map(|s| facet_flux(sys, um, ui, s.element, s.slot, x)).sum();
        *exchange.entry((iface.upper, iface.lower)).or_default() += v;
        inflow_from_upper[sys.dofs.domain_index(iface.lower)] += v;
    }
    for (di, dm) in domains.iter().enumerate() {
        let id = dm.id;
        if dm.dim() == 0 {
            let p = sys.dofs.domains[di].pressure.start;
            if sys.constrained[p].is_some() {
                report.edges.push(FluxEdge {
                    source: Node::Domain(id),
                    target: Node::Boundary,
                    value: inflow_from_upper[di],
                });
            } else {
                let f = data.source(id, &dm.frame.origin);
                report.edges.push(FluxEdge { source: Node::Domain(id), target: Node::Sink, value: -f });
            }
            continue;
        }
        if sys.locals[di].is_empty() {
            continue;
        }
        let mut bc_out = 0.0;
        let mut sink = 0.0;
        for (e, el) in dm.elements.iter().enumerate() {
            for (slot, &(f, _)) in el.facets.iter().enumerate() {
                if let FacetKind::Boundary { .. } = dm.facets[f].kind {
                    let q = facet_flux(sys, dm, di, e, slot, x);
                    bc_out += q;
                    if q < 0.0 {
                        report.gross_inflow -= q;
                    }
                }
            }
            sink -= source_integral(sys, dm, di, e, data);
        }
        report.edges.push(FluxEdge { source: Node::Boundary, target: Node::Domain(id), value: -bc_out });
        report.edges.push(FluxEdge { source: Node::Domain(id), target: Node::Sink, value: sink });
    }
    for ((u, l), v) in exchange {
        report.edges.push(FluxEdge { source: Node::Domain(u), target: Node::Domain(l), value: v });
    }
    report
}

/// Largest per-element conservation defect `∫ div u_h − inflow − ∫ f`,
/// relative to the largest facet flux.
pub fn element_mismatch(mesh: &MixedMesh, sys: &GlobalSystem, x: &[f64], data: &dyn ProblemData) -> f64 {
    let domains: Vec<&DomainMesh> = mesh.domains().collect();
    let mut inflow: Vec<Vec<f64>> = domains.iter().map(|d| vec![0.0; d.elements.len()]).collect();
    for iface in &mesh.interfaces {
        let ui = sys.dofs.domain_index(iface.upper);
        let v: f64 = iface.sides.iter().map(|s| facet_flux(sys, domains[ui], ui, s.element, s.slot, x)).sum();
        inflow[sys.dofs.domain_index(iface.lower)][iface.lower_element] += v;
    }
    let mut scale = 0.0f64;
    let mut defects = Vec::new();
    for (di, dm) in domains.iter().enumerate() {
        if dm.dim() == 0 {
            let p = sys.dofs.domains[di].pressure.start;
            if sys.constrained[p].is_none() {
                defects.push(-inflow[di][0] - data.source(dm.id, &dm.frame.origin));
            }
            scale = scale.max(inflow[di][0].abs());
            continue;
        }
        if sys.locals[di].is_empty() {
            defects.extend(inflow[di].iter().copied());
            continue;
        }
        for (e, el) in dm.elements.iter().enumerate() {
            let mut out = 0.0;
            for slot in 0..el.facets.len() {
                let q = facet_flux(sys, dm, di, e, slot, x);
                scale = scale.max(q.abs());
                out += q;
            }
            defects.push(out - inflow[di][e] - source_integral(sys, dm, di, e, data));
        }
    }
    let worst = defects.iter().map(|d| d.abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}
