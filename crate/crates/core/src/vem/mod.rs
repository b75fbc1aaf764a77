//! Local mixed virtual element machinery.

mod element;
mod line;
mod local;

pub use element::{ElementGeometry, FacetGeometry, FacetShape};
pub use local::{LocalMatrices, PIVOT_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::dim_poly;

/// Element family: Raviart–Thomas (`k∇ = k`) or Brezzi–Douglas–Marini (`k∇ = k - 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rt,
    Bdm,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Rt => write!(f, "RT"),
            Family::Bdm => write!(f, "BDM"),
        }
    }
}

/// The pair `(k, k∇)` on a `dim`-dimensional element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementSpace {
    pub dim: usize,
    pub k: usize,
    pub family: Family,
}

pub const MAX_ORDER: usize = 4;

impl ElementSpace {
    pub fn new(dim: usize, k: usize, family: Family) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidSpace(format!("dimension {dim}")));
        }
        if k > MAX_ORDER {
            return Err(Error::InvalidSpace(format!("order {k} exceeds {MAX_ORDER}")));
        }
        if family == Family::Bdm {
            if k == 0 {
                return Err(Error::InvalidSpace("BDM requires k >= 1".into()));
            }
            if dim != 3 {
                return Err(Error::InvalidSpace("BDM is only available for 3D elements".into()));
            }
        }
        Ok(ElementSpace { dim, k, family })
    }

    pub fn rt(dim: usize, k: usize) -> Self {
        ElementSpace::new(dim, k, Family::Rt).expect("valid RT space")
    }

    /// Degree of the divergence (and pressure) space.
    pub fn k_div(&self) -> usize {
        match self.family {
            Family::Rt => self.k,
            Family::Bdm => self.k - 1,
        }
    }

    /// Moments per facet.
    pub fn n_facet(&self) -> usize {
        dim_poly(self.dim - 1, self.k as isize)
    }

    pub fn n_pressure(&self) -> usize {
        dim_poly(self.dim, self.k_div() as isize)
    }

    /// Size of the gradient part of `[P_k]^d`.
    pub fn n_grad(&self) -> usize {
        dim_poly(self.dim, self.k as isize + 1) - 1
    }

    pub fn n_oplus(&self) -> usize {
        if self.dim == 1 {
            0
        } else {
            self.dim * dim_poly(self.dim, self.k as isize) - self.n_grad()
        }
    }

    pub fn layout(&self, n_facets: usize) -> DofLayout {
        DofLayout { n_facets, per_facet: self.n_facet(), n_ii: self.n_pressure() - 1, n_iii: self.n_oplus() }
    }
}

impl std::fmt::Display for ElementSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{} ({}D)", self.family, self.k, self.dim)
    }
}

/// Flux DOF layout of one element: facet moments, gradient moments, complement moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLayout {
    pub n_facets: usize,
    pub per_facet: usize,
    pub n_ii: usize,
    pub n_iii: usize,
}

impl DofLayout {
    pub fn facet_dof(&self, facet: usize, j: usize) -> usize {
        facet * self.per_facet + j
    }

    pub fn n_boundary(&self) -> usize {
        self.n_facets * self.per_facet
    }

    pub fn ii_offset(&self) -> usize {
        self.n_boundary()
    }

    pub fn iii_offset(&self) -> usize {
        self.n_boundary() + self.n_ii
    }

    pub fn n_interior(&self) -> usize {
        self.n_ii + self.n_iii
    }

    pub fn total(&self) -> usize {
        self.n_boundary() + self.n_ii + self.n_iii
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts() {
        assert_eq!(ElementSpace::rt(3, 0).layout(6).total(), 6);
        // 4 faces x 3 + 3 + (9 - 9 + 3)
        let tet = ElementSpace::rt(3, 1).layout(4);
        assert_eq!((tet.n_boundary(), tet.n_ii, tet.n_iii), (12, 3, 3));
        assert_eq!(tet.total(), 18);
        assert_eq!(ElementSpace::rt(2, 0).layout(3).total(), 3);
        let bdm = ElementSpace::new(3, 1, Family::Bdm).unwrap().layout(6);
        assert_eq!((bdm.n_ii, bdm.n_iii), (0, 3));
        assert_eq!(ElementSpace::rt(1, 2).layout(2).total(), 4);
        assert!(ElementSpace::new(3, 0, Family::Bdm).is_err());
        assert!(ElementSpace::new(2, 1, Family::Bdm).is_err());
        assert!(ElementSpace::new(3, 5, Family::Rt).is_err());
    }
}
