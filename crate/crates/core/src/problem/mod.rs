//! Physical data: transmissivities, normal transmissivities, sources and
//! boundary conditions for every domain.

mod exact;

pub use exact::{ExactField, Manufactured, Polynomial, Quartic, SinProduct};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::mesh::DomainId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bc {
    /// Prescribed pressure.
    Dirichlet(f64),
    /// Zero normal flux.
    Neumann,
}

pub trait ProblemData: Sync {
    /// Transmissivity `𝔞` of a domain of dimension 1, 2 or 3.
    fn transmissivity(&self, dom: DomainId, x: &Point) -> f64;
    /// `1/η` of a lower-dimensional domain; 0 means pressure continuity.
    fn inverse_eta(&self, dom: DomainId) -> f64;
    fn source(&self, dom: DomainId, x: &Point) -> f64;
    /// Condition on a boundary facet of `dom`; `external` facets lie on the
    /// matrix boundary.
    fn boundary(&self, dom: DomainId, x: &Point, external: bool) -> Bc;
    /// Pressure imposed at a trace intersection.
    fn point_dirichlet(&self, point: usize) -> Option<f64>;
}

/// Exact fields used for error measurement.
pub trait ReferenceSolution: Sync {
    fn pressure(&self, dom: DomainId, x: &Point) -> f64;
    /// Velocity in global coordinates, tangential to the domain.
    fn velocity(&self, dom: DomainId, x: &Point) -> Point;
    /// Tangential divergence.
    fn divergence(&self, dom: DomainId, x: &Point) -> f64;
}

/// Piecewise-constant coefficients, one value per domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub matrix: f64,
    pub fractures: Vec<f64>,
    pub traces: Vec<f64>,
    pub inverse_eta_fractures: Vec<f64>,
    pub inverse_eta_traces: Vec<f64>,
    pub inverse_eta_points: Vec<f64>,
}

impl Coefficients {
    /// Same transmissivity `a[d]` and `1/η` value `inv_eta[d]` for every
    /// domain of dimension `d`.
    pub fn uniform(counts: [usize; 3], a: [f64; 3], inv_eta: [f64; 3]) -> Self {
        Coefficients {
            matrix: a[0],
            fractures: vec![a[1]; counts[0]],
            traces: vec![a[2]; counts[1]],
            inverse_eta_fractures: vec![inv_eta[0]; counts[0]],
            inverse_eta_traces: vec![inv_eta[1]; counts[1]],
            inverse_eta_points: vec![inv_eta[2]; counts[2]],
        }
    }

    pub fn transmissivity(&self, dom: DomainId) -> f64 {
        match dom.dim {
            3 => self.matrix,
            2 => self.fractures[dom.index],
            1 => self.traces[dom.index],
            _ => f64::INFINITY,
        }
    }

    pub fn inverse_eta(&self, dom: DomainId) -> f64 {
        match dom.dim {
            2 => self.inverse_eta_fractures[dom.index],
            1 => self.inverse_eta_traces[dom.index],
            0 => self.inverse_eta_points[dom.index],
            _ => 0.0,
        }
    }
}

/// Constant conditions on the six sides of an axis-aligned box, shared by all
/// dimensions. `None` is a no-flow side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxBoundary {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Order: x-, x+, y-, y+, z-, z+.
    pub sides: [Option<f64>; 6],
    pub tol: f64,
}

impl BoxBoundary {
    /// Dirichlet value on the side containing `x`; Dirichlet wins over
    /// Neumann on edges and corners.
    pub fn at(&self, x: &Point) -> Bc {
        let mut bc = Bc::Neumann;
        for axis in 0..3 {
            for (k, bound) in [self.lo[axis], self.hi[axis]].into_iter().enumerate() {
                if (x[axis] - bound).abs() <= self.tol {
                    if let Some(g) = self.sides[2 * axis + k] {
                        bc = Bc::Dirichlet(g);
                    }
                }
            }
        }
        bc
    }
}

/// Constant data from a configuration file.
#[derive(Clone, Debug)]
pub struct ConfiguredData {
    pub coefficients: Coefficients,
    pub boundary: BoxBoundary,
    /// Constant source per dimension, indexed by `d`.
    pub sources: [f64; 4],
    pub points: Vec<Option<f64>>,
}

impl ProblemData for ConfiguredData {
    fn transmissivity(&self, dom: DomainId, _x: &Point) -> f64 {
        self.coefficients.transmissivity(dom)
    }

    fn inverse_eta(&self, dom: DomainId) -> f64 {
        self.coefficients.inverse_eta(dom)
    }

    fn source(&self, dom: DomainId, _x: &Point) -> f64 {
        self.sources[dom.dim]
    }

    fn boundary(&self, _dom: DomainId, x: &Point, external: bool) -> Bc {
        if external {
            self.boundary.at(x)
        } else {
            Bc::Neumann
        }
    }

    fn point_dirichlet(&self, point: usize) -> Option<f64> {
        self.points.get(point).copied().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_sides() {
        let b = BoxBoundary {
            lo: [-1.0; 3],
            hi: [1.0; 3],
            sides: [Some(-2.0), Some(2.0), None, None, None, None],
            tol: 1e-9,
        };
        assert_eq!(b.at(&Point::new(-1.0, 0.3, 0.0)), Bc::Dirichlet(-2.0));
        assert_eq!(b.at(&Point::new(0.2, 1.0, 0.0)), Bc::Neumann);
        assert_eq!(b.at(&Point::new(1.0, 1.0, 0.0)), Bc::Dirichlet(2.0));
    }
}
