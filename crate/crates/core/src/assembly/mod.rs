//! Global block system over all domains.

mod dofs;

pub use dofs::{DofCounts, DofMap, DomainDofs};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{DomainId, DomainMesh, FacetKind, MixedMesh};
use crate::poly::ScaledMonomials;
use crate::problem::{Bc, ProblemData};
use crate::vem::{ElementSpace, Family, LocalMatrices};

/// Element spaces per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spaces {
    pub d3: ElementSpace,
    pub d2: ElementSpace,
    pub d1: ElementSpace,
}

impl Spaces {
    /// `family` in 3D with order `k`; fractures and traces use RT elements
    /// with the same pressure degree.
    pub fn uniform(family: Family, k: usize) -> Result<Self> {
        let d3 = ElementSpace::new(3, k, family)?;
        let kd = d3.k_div();
        Ok(Spaces { d3, d2: ElementSpace::new(2, kd, Family::Rt)?, d1: ElementSpace::new(1, kd, Family::Rt)? })
    }

    pub fn get(&self, dim: usize) -> ElementSpace {
        match dim {
            3 => self.d3,
            2 => self.d2,
            _ => self.d1,
        }
    }

    /// Quadrature exactness used for elements of dimension `dim`.
    pub fn quadrature_order(&self, dim: usize) -> usize {
        2 * self.get(dim).k + 4
    }
}

/// Assembled system `M x = b` with essential conditions already eliminated.
#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub n: usize,
    /// Summed entries, sorted by column then row.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    /// Local matrices per domain, parallel to `dofs.domains`; empty for
    /// points and multiplier traces.
    pub locals: Vec<Vec<LocalMatrices>>,
    /// Pressure monomials per element, `None` on points.
    pub pressure_bases: Vec<Vec<Option<ScaledMonomials>>>,
    /// Prescribed values of eliminated DOFs.
    pub constrained: Vec<Option<f64>>,
    /// Connected groups of domains without any pressure datum.
    pub floating: usize,
    pub spaces: Spaces,
}

impl GlobalSystem {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }
}

type Triplets = Vec<(usize, usize, f64)>;

struct Contribution {
    entries: Triplets,
    rhs: Vec<(usize, f64)>,
    fixed: Vec<usize>,
    dirichlet: bool,
}

pub fn assemble(mesh: &MixedMesh, spaces: &Spaces, data: &dyn ProblemData) -> Result<GlobalSystem> {
    if !mesh.trace_flow {
        for t in 0..mesh.traces.len() {
            if data.inverse_eta(DomainId::new(1, t)) != 0.0 {
                return Err(Error::Config(format!(
                    "trace {} has finite normal transmissivity but trace flow is disabled",
                    t + 1
                )));
            }
        }
    }
    let dofs = DofMap::build(mesh, spaces)?;
    let domains: Vec<&DomainMesh> = mesh.domains().collect();

    let locals: Vec<Vec<LocalMatrices>> = domains
        .iter()
        .zip(&dofs.domains)
        .map(|(dm, dd)| match dd.space {
            None => Ok(Vec::new()),
            Some(space) => {
                let order = spaces.quadrature_order(dm.dim());
                (0..dm.elements.len())
                    .into_par_iter()
                    .map(|e| {
                        let geom = dm.element_geometry(e, order)?;
                        let nu = |x: &Point| 1.0 / data.transmissivity(dm.id, &dm.to_global(x));
                        LocalMatrices::compute(geom, space, &nu)
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|err| err.at(format!("local matrices of {}", dm.id)))
            }
        })
        .collect::<Result<_>>()?;

    let pressure_bases: Vec<Vec<Option<ScaledMonomials>>> = domains
        .iter()
        .zip(&locals)
        .map(|(dm, lm)| {
            if dm.dim() == 0 {
                vec![None; dm.elements.len()]
            } else if !lm.is_empty() {
                lm.iter().map(|l| Some(l.pressure.clone())).collect()
            } else {
                (0..dm.elements.len()).map(|e| Some(multiplier_basis(dm, e, spaces.d2.k))).collect()
            }
        })
        .collect();

    let index_of = |id: DomainId| dofs.domain_index(id);
    let mut contributions: Vec<Contribution> = Vec::new();
    for (di, dm) in domains.iter().enumerate() {
        let dd = &dofs.domains[di];
        if dm.dim() == 0 {
            let x = dm.frame.origin;
            let p = dd.pressure.start;
            contributions.push(match data.point_dirichlet(dm.id.index) {
                Some(v) => Contribution { entries: Vec::new(), rhs: vec![(p, v)], fixed: vec![p], dirichlet: true },
                None => Contribution {
                    entries: Vec::new(),
                    rhs: vec![(p, data.source(dm.id, &x))],
                    fixed: Vec::new(),
                    dirichlet: false,
                },
            });
            continue;
        }
        if dd.space.is_none() {
            continue;
        }
        let part: Vec<Contribution> = (0..dm.elements.len())
            .into_par_iter()
            .map(|e| {
                element_contribution(dm, dd, &locals[di][e], e, data, |id| {
                    let li = index_of(id);
                    (&domains[li], &dofs.domains[li], &pressure_bases[li])
                })
            })
            .collect();
        contributions.extend(part);
    }

    let n = dofs.total;
    let mut entries: Triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    let mut constrained: Vec<Option<f64>> = vec![None; n];
    let mut anchored = vec![false; domains.len()];
    for (c, owner) in contributions.iter().zip(contribution_owners(&domains, &dofs)) {
        entries.extend_from_slice(&c.entries);
        for &(r, v) in &c.rhs {
            rhs[r] += v;
        }
        for &f in &c.fixed {
            constrained[f] = Some(0.0);
        }
        anchored[owner] |= c.dirichlet;
    }
    // point values are the only non-zero essential data
    for (di, dm) in domains.iter().enumerate() {
        if dm.dim() == 0 && anchored[di] {
            let p = dofs.domains[di].pressure.start;
            constrained[p] = Some(rhs[p]);
            rhs[p] = 0.0;
        }
    }
    let entries = sum_duplicates(entries);
    let floating = floating_groups(mesh, &dofs, &anchored);

    let mut kept = Vec::with_capacity(entries.len() + n);
    for (r, c, v) in entries {
        if constrained[r].is_some() {
            continue;
        }
        match constrained[c] {
            Some(val) => rhs[r] -= v * val,
            None => kept.push((r, c, v)),
        }
    }
    for (i, val) in constrained.iter().enumerate() {
        if let Some(val) = val {
            kept.push((i, i, 1.0));
            rhs[i] = *val;
        }
    }
    kept.sort_unstable_by_key(|&(r, c, _)| (c, r));
    Ok(GlobalSystem { n, entries: kept, rhs, dofs, locals, pressure_bases, constrained, floating, spaces: *spaces })
}

/// Domain index owning each contribution, in the order they were produced.
fn contribution_owners(domains: &[&DomainMesh], dofs: &DofMap) -> Vec<usize> {
    let mut out = Vec::new();
    for (di, dm) in domains.iter().enumerate() {
        if dm.dim() == 0 {
            out.push(di);
        } else if dofs.domains[di].space.is_some() {
            out.extend(std::iter::repeat_n(di, dm.elements.len()));
        }
    }
    out
}

fn multiplier_basis(dm: &DomainMesh, e: usize, degree: usize) -> ScaledMonomials {
    let el = &dm.elements[e];
    let a = dm.facets[el.facets[0].0].shape.points()[0];
    let b = dm.facets[el.facets[1].0].shape.points()[0];
    ScaledMonomials::new(1, degree, (a + b) * 0.5, (b - a).norm())
}

fn element_contribution<'a>(
    dm: &DomainMesh,
    dd: &DomainDofs,
    lm: &LocalMatrices,
    e: usize,
    data: &dyn ProblemData,
    lower: impl Fn(DomainId) -> (&'a &'a DomainMesh, &'a DomainDofs, &'a Vec<Option<ScaledMonomials>>),
) -> Contribution {
    let g = &dd.element_flux[e];
    let p: Vec<usize> = dd.element_pressure[e].clone().collect();
    let k = lm.stiffness();
    let mut entries = Vec::with_capacity(g.len() * g.len() + 2 * g.len() * p.len());
    let mut rhs = Vec::new();
    let mut fixed = Vec::new();
    let mut dirichlet = false;
    for (a, &ga) in g.iter().enumerate() {
        for (b, &gb) in g.iter().enumerate() {
            if k[(a, b)] != 0.0 {
                entries.push((ga, gb, k[(a, b)]));
            }
        }
    }
    for (i, &pi) in p.iter().enumerate() {
        for (a, &ga) in g.iter().enumerate() {
            let w = lm.w[(i, a)];
            if w != 0.0 {
                entries.push((ga, pi, -w));
                entries.push((pi, ga, w));
            }
        }
    }
    // source
    for (x, wq) in lm.geom.quad.points.iter().zip(&lm.geom.quad.weights) {
        let f = data.source(dm.id, &dm.to_global(x));
        if f != 0.0 {
            for (i, m) in lm.pressure.eval(x).iter().enumerate() {
                rhs.push((p[i], wq * f * m));
            }
        }
    }
    let per = lm.layout.per_facet;
    for (slot, facet) in lm.geom.facets.iter().enumerate() {
        let mf = &dm.facets[dm.elements[e].facets[slot].0];
        let gdofs = &g[slot * per..(slot + 1) * per];
        let trace = &lm.traces[slot];
        match mf.kind {
            FacetKind::Interior => {}
            FacetKind::Boundary { external } => match data.boundary(dm.id, &mf.centroid, external) {
                Bc::Neumann => fixed.extend_from_slice(gdofs),
                Bc::Dirichlet(_) => {
                    dirichlet = true;
                    for (x, wq) in facet.quad.points.iter().zip(&facet.quad.weights) {
                        let xg = dm.to_global(x);
                        let Bc::Dirichlet(gv) = data.boundary(dm.id, &xg, external) else { continue };
                        for (j, phi) in trace.eval(facet, x).iter().enumerate() {
                            rhs.push((gdofs[j], -facet.sign * wq * gv * phi));
                        }
                    }
                }
            },
            FacetKind::Interface { lower: li, element: le } => {
                let lid = DomainId::new(dm.dim() - 1, li);
                let (lmesh, ldd, lbases) = lower(lid);
                let lp: Vec<usize> = ldd.element_pressure[le].clone().collect();
                let inv_eta = data.inverse_eta(lid);
                let mut c = vec![0.0; per * lp.len()];
                let mut mass = vec![0.0; per * per];
                for (x, wq) in facet.quad.points.iter().zip(&facet.quad.weights) {
                    let phi = trace.eval(facet, x);
                    let mu = match &lbases[le] {
                        Some(b) => b.eval(&lmesh.frame.to_local(&dm.to_global(x))),
                        None => vec![1.0],
                    };
                    for j in 0..per {
                        for (s, m) in mu.iter().enumerate() {
                            c[j * lp.len() + s] += facet.sign * wq * phi[j] * m;
                        }
                        if inv_eta != 0.0 {
                            for i in 0..per {
                                mass[j * per + i] += inv_eta * wq * phi[j] * phi[i];
                            }
                        }
                    }
                }
                for j in 0..per {
                    for (s, &ps) in lp.iter().enumerate() {
                        let v = c[j * lp.len() + s];
                        if v != 0.0 {
                            entries.push((gdofs[j], ps, v));
                            entries.push((ps, gdofs[j], -v));
                        }
                    }
                    if inv_eta != 0.0 {
                        for i in 0..per {
                            entries.push((gdofs[j], gdofs[i], mass[j * per + i]));
                        }
                    }
                }
            }
        }
    }
    Contribution { entries, rhs, fixed, dirichlet }
}

fn sum_duplicates(mut t: Triplets) -> Triplets {
    t.par_sort_unstable_by_key(|&(r, c, _)| (c, r));
    let mut out: Triplets = Vec::with_capacity(t.len());
    for (r, c, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != 0.0);
    out
}

/// Number of connected groups of domains with no Dirichlet datum anywhere.
fn floating_groups(mesh: &MixedMesh, dofs: &DofMap, anchored: &[bool]) -> usize {
    let n = dofs.domains.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in &mesh.interfaces {
        let a = find(&mut parent, dofs.domain_index(i.upper));
        let b = find(&mut parent, dofs.domain_index(i.lower));
        parent[a] = b;
    }
    let mut has = vec![false; n];
    let mut roots = vec![false; n];
    for (d, &anchor) in anchored.iter().enumerate() {
        let r = find(&mut parent, d);
        let dd = &dofs.domains[d];
        if dd.flux.is_empty() && dd.pressure.is_empty() {
            continue;
        }
        roots[r] = true;
        has[r] |= anchor;
    }
    (0..n).filter(|&r| roots[r] && !has[r]).count()
}
