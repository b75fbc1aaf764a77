use std::ops::Range;

use serde::Serialize;

use super::Spaces;
use crate::error::{Error, Result};
use crate::mesh::{DomainId, DomainMesh, FacetKind, MixedMesh};
use crate::poly::dim_poly;
use crate::vem::ElementSpace;

/// Global numbering of one domain.
#[derive(Clone, Debug)]
pub struct DomainDofs {
    pub id: DomainId,
    /// `None` for points and multiplier traces, which carry no flux.
    pub space: Option<ElementSpace>,
    pub flux: Range<usize>,
    pub pressure: Range<usize>,
    /// Local flux DOF → global index, per element.
    pub element_flux: Vec<Vec<usize>>,
    pub element_pressure: Vec<Range<usize>>,
    /// First global DOF of each facet block; interface facets have one block
    /// per owner, in owner order.
    pub facet_blocks: Vec<Vec<usize>>,
}

impl DomainDofs {
    /// Facet block seen from element `e` at facet position `slot`.
    pub fn block(&self, mesh: &DomainMesh, e: usize, slot: usize) -> usize {
        let f = mesh.elements[e].facets[slot].0;
        let blocks = &self.facet_blocks[f];
        if blocks.len() == 1 {
            return blocks[0];
        }
        let pos = mesh.facets[f].owners.iter().position(|&o| o == (e, slot)).unwrap_or(0);
        blocks[pos]
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct DofCounts {
    /// `[flux, pressure]` per dimension, indexed by `d`.
    pub per_dim: [[usize; 2]; 4],
    pub total: usize,
    /// Flux DOFs added by doubling facets on lower-dimensional domains.
    pub duplicated: usize,
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub domains: Vec<DomainDofs>,
    pub total: usize,
    pub counts: DofCounts,
}

impl DofMap {
    pub fn build(mesh: &MixedMesh, spaces: &Spaces) -> Result<Self> {
        let mut next = 0usize;
        let mut domains = Vec::new();
        let mut counts = DofCounts::default();
        for dm in mesh.domains() {
            let dim = dm.dim();
            let space = if dim == 0 || dm.multiplier { None } else { Some(spaces.get(dim)) };
            let flux_start = next;
            let mut facet_blocks = vec![Vec::new(); dm.facets.len()];
            let mut element_flux = Vec::new();
            if let Some(space) = space {
                let per = space.n_facet();
                for (f, facet) in dm.facets.iter().enumerate() {
                    let n_blocks = match facet.kind {
                        FacetKind::Interface { .. } => facet.owners.len(),
                        FacetKind::Interior if facet.owners.len() == 2 => 1,
                        FacetKind::Boundary { .. } if facet.owners.len() == 1 => 1,
                        _ => {
                            return Err(Error::Topology(format!(
                                "{} facet {f} has {} owners",
                                dm.id,
                                facet.owners.len()
                            )))
                        }
                    };
                    if n_blocks == 2 {
                        counts.duplicated += per;
                    }
                    for _ in 0..n_blocks {
                        facet_blocks[f].push(next);
                        next += per;
                    }
                }
                let partial = DomainDofs {
                    id: dm.id,
                    space: Some(space),
                    flux: 0..0,
                    pressure: 0..0,
                    element_flux: Vec::new(),
                    element_pressure: Vec::new(),
                    facet_blocks: facet_blocks.clone(),
                };
                for (e, el) in dm.elements.iter().enumerate() {
                    let layout = space.layout(el.facets.len());
                    let mut g = Vec::with_capacity(layout.total());
                    for slot in 0..el.facets.len() {
                        let b = partial.block(dm, e, slot);
                        g.extend(b..b + per);
                    }
                    g.extend(next..next + layout.n_interior());
                    next += layout.n_interior();
                    element_flux.push(g);
                }
            }
            let flux = flux_start..next;
            let np = match (dim, space) {
                (0, _) => 1,
                (_, Some(s)) => s.n_pressure(),
                (_, None) => dim_poly(1, spaces.get(2).k as isize),
            };
            let p_start = next;
            let element_pressure: Vec<Range<usize>> =
                (0..dm.elements.len()).map(|e| p_start + e * np..p_start + (e + 1) * np).collect();
            next = p_start + np * dm.elements.len();
            counts.per_dim[dim][0] += flux.len();
            counts.per_dim[dim][1] += next - p_start;
            domains.push(DomainDofs {
                id: dm.id,
                space,
                flux,
                pressure: p_start..next,
                element_flux,
                element_pressure,
                facet_blocks,
            });
        }
        counts.total = next;
        Ok(DofMap { domains, total: next, counts })
    }

    pub fn domain(&self, id: DomainId) -> &DomainDofs {
        self.domains.iter().find(|d| d.id == id).expect("domain in dof map")
    }

    pub fn domain_index(&self, id: DomainId) -> usize {
        self.domains.iter().position(|d| d.id == id).expect("domain in dof map")
    }
}
