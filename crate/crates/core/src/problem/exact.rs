use std::f64::consts::PI;

use nalgebra::Matrix3;

use super::{Bc, BoxBoundary, Coefficients, ProblemData, ReferenceSolution};
use crate::geometry::{point_in_convex_polygon, Point};
use crate::mesh::{DomainId, NetworkGeometry};

/// A globally continuous pressure field with one-sided derivatives.
///
/// `side` selects the limit taken on a kink: derivatives are evaluated at
/// `x + ε side`. A zero `side` is only valid away from kinks.
pub trait ExactField: Sync + Send {
    fn pressure(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point, side: &Point) -> Point;
    fn hessian(&self, x: &Point, side: &Point) -> Matrix3<f64>;
}

/// `(1+|x|)⁴ + (1+|y|)⁴ + (1+|z|)⁴`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quartic;

fn side_sign(v: f64, side: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else if side > 0.0 {
        1.0
    } else if side < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ExactField for Quartic {
    fn pressure(&self, x: &Point) -> f64 {
        x.iter().map(|c| (1.0 + c.abs()).powi(4)).sum()
    }

    fn gradient(&self, x: &Point, side: &Point) -> Point {
        Point::from_fn(|i, _| 4.0 * (1.0 + x[i].abs()).powi(3) * side_sign(x[i], side[i]))
    }

    fn hessian(&self, x: &Point, _side: &Point) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Point::from_fn(|i, _| 12.0 * (1.0 + x[i].abs()).powi(2)))
    }
}

/// `sin(πx) sin(πy) sin(πz)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SinProduct;

impl ExactField for SinProduct {
    fn pressure(&self, x: &Point) -> f64 {
        (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).sin()
    }

    fn gradient(&self, x: &Point, _side: &Point) -> Point {
        let s = x.map(|c| (PI * c).sin());
        let c = x.map(|c| (PI * c).cos());
        Point::new(PI * c.x * s.y * s.z, PI * s.x * c.y * s.z, PI * s.x * s.y * c.z)
    }

    fn hessian(&self, x: &Point, _side: &Point) -> Matrix3<f64> {
        let s = x.map(|c| (PI * c).sin());
        let c = x.map(|c| (PI * c).cos());
        let p2 = PI * PI;
        let mut h = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                h[(i, j)] = if i == j {
                    -p2 * s.x * s.y * s.z
                } else {
                    let k = 3 - i - j;
                    p2 * c[i] * c[j] * s[k]
                };
            }
        }
        h
    }
}

/// Sum of monomials `c xᵃ yᵇ zᶜ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Polynomial {
    pub fn linear(c: f64, g: Point) -> Self {
        Polynomial { terms: vec![(c, [0, 0, 0]), (g.x, [1, 0, 0]), (g.y, [0, 1, 0]), (g.z, [0, 0, 1])] }
    }

    fn eval_derivative(&self, x: &Point, d: [u32; 3]) -> f64 {
        let mut sum = 0.0;
        for (c, e) in &self.terms {
            let mut v = *c;
            for i in 0..3 {
                if e[i] < d[i] {
                    v = 0.0;
                    break;
                }
                let mut fall = 1.0;
                for j in 0..d[i] {
                    fall *= (e[i] - j) as f64;
                }
                v *= fall * x[i].powi((e[i] - d[i]) as i32);
            }
            sum += v;
        }
        sum
    }
}

impl ExactField for Polynomial {
    fn pressure(&self, x: &Point) -> f64 {
        self.eval_derivative(x, [0, 0, 0])
    }

    fn gradient(&self, x: &Point, _side: &Point) -> Point {
        Point::new(
            self.eval_derivative(x, [1, 0, 0]),
            self.eval_derivative(x, [0, 1, 0]),
            self.eval_derivative(x, [0, 0, 1]),
        )
    }

    fn hessian(&self, x: &Point, _side: &Point) -> Matrix3<f64> {
        let mut h = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut d = [0u32; 3];
                d[i] += 1;
                d[j] += 1;
                h[(i, j)] = self.eval_derivative(x, d);
            }
        }
        h
    }
}

/// Data manufactured from a continuous exact pressure: Dirichlet values on the
/// matrix boundary and sources that absorb the exchange with higher dimensions.
pub struct Manufactured<E: ExactField> {
    pub exact: E,
    pub network: NetworkGeometry,
    pub coefficients: Coefficients,
    pub point_dirichlet: bool,
    /// Overrides the exact Dirichlet data on the matrix boundary.
    pub boundary: Option<BoxBoundary>,
    /// Step used to probe which sides of an interface exist.
    pub probe: f64,
    /// No exchange with higher dimensions, for standalone domains.
    pub isolated: bool,
}

impl<E: ExactField> Manufactured<E> {
    pub fn new(exact: E, network: NetworkGeometry, coefficients: Coefficients, point_dirichlet: bool) -> Self {
        Manufactured { exact, network, coefficients, point_dirichlet, boundary: None, probe: 1e-7, isolated: false }
    }

    fn tangent_projection(&self, dom: DomainId) -> Matrix3<f64> {
        match dom.dim {
            3 => Matrix3::identity(),
            2 => {
                let n = self.network.planes[dom.index].normal;
                Matrix3::identity() - n * n.transpose()
            }
            1 => {
                let t = self.network.traces[dom.index].segment.tangent();
                t * t.transpose()
            }
            _ => Matrix3::zeros(),
        }
    }

    /// Directions pointing from `x` into every higher-dimensional side that
    /// meets `dom`, with the transmissivity of that side.
    pub fn sides(&self, dom: DomainId, x: &Point) -> Vec<(Point, f64)> {
        let net = &self.network;
        let mut out = Vec::new();
        if self.isolated {
            return out;
        }
        match dom.dim {
            2 => {
                let n = net.planes[dom.index].normal;
                out.push((n, self.coefficients.matrix));
                out.push((-n, self.coefficients.matrix));
            }
            1 => {
                let tr = &net.traces[dom.index];
                let tau = tr.segment.tangent();
                for &l in &tr.fractures {
                    let s = net.planes[l].normal.cross(&tau).normalize();
                    for dir in [s, -s] {
                        if point_in_convex_polygon(&(x + dir * self.probe), &net.fractures[l], 0.0) {
                            out.push((dir, self.coefficients.fractures[l]));
                        }
                    }
                }
            }
            0 => {
                for &t in &net.point_traces[dom.index] {
                    let seg = net.traces[t].segment;
                    let tau = seg.tangent();
                    for dir in [tau, -tau] {
                        let s = (x + dir * self.probe - seg.a).dot(&tau);
                        if s > 0.0 && s < seg.length() {
                            out.push((dir, self.coefficients.traces[t]));
                        }
                    }
                }
            }
            _ => {}
        }
        out
    }

    /// Flux entering `dom` from higher dimensions per unit measure.
    fn inflow(&self, dom: DomainId, x: &Point) -> f64 {
        self.sides(dom, x).iter().map(|(s, a)| a * self.exact.gradient(x, s).dot(s)).sum()
    }
}

impl<E: ExactField> ReferenceSolution for Manufactured<E> {
    fn pressure(&self, _dom: DomainId, x: &Point) -> f64 {
        self.exact.pressure(x)
    }

    fn velocity(&self, dom: DomainId, x: &Point) -> Point {
        let a = self.coefficients.transmissivity(dom);
        -(self.tangent_projection(dom) * self.exact.gradient(x, &Point::zeros())) * a
    }

    fn divergence(&self, dom: DomainId, x: &Point) -> f64 {
        if dom.dim == 0 {
            return 0.0;
        }
        let a = self.coefficients.transmissivity(dom);
        let t = self.tangent_projection(dom);
        -a * (t * self.exact.hessian(x, &Point::zeros()) * t).trace()
    }
}

impl<E: ExactField> ProblemData for Manufactured<E> {
    fn transmissivity(&self, dom: DomainId, _x: &Point) -> f64 {
        self.coefficients.transmissivity(dom)
    }

    fn inverse_eta(&self, dom: DomainId) -> f64 {
        self.coefficients.inverse_eta(dom)
    }

    fn source(&self, dom: DomainId, x: &Point) -> f64 {
        ReferenceSolution::divergence(self, dom, x) - self.inflow(dom, x)
    }

    fn boundary(&self, _dom: DomainId, x: &Point, external: bool) -> Bc {
        match (&self.boundary, external) {
            (_, false) => Bc::Neumann,
            (Some(b), true) => b.at(x),
            (None, true) => Bc::Dirichlet(self.exact.pressure(x)),
        }
    }

    fn point_dirichlet(&self, point: usize) -> Option<f64> {
        self.point_dirichlet.then(|| self.exact.pressure(&self.network.points[point]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(f: &dyn ExactField, x: &Point) -> Point {
        let h = 1e-6;
        Point::from_fn(|i, _| {
            let mut a = *x;
            let mut b = *x;
            a[i] += h;
            b[i] -= h;
            (f.pressure(&a) - f.pressure(&b)) / (2.0 * h)
        })
    }

    fn fd_hessian(f: &dyn ExactField, x: &Point) -> Matrix3<f64> {
        let h = 1e-5;
        let mut m = Matrix3::zeros();
        for j in 0..3 {
            let mut a = *x;
            let mut b = *x;
            a[j] += h;
            b[j] -= h;
            let d = (f.gradient(&a, &Point::zeros()) - f.gradient(&b, &Point::zeros())) / (2.0 * h);
            m.set_column(j, &d);
        }
        m
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let poly = Polynomial { terms: vec![(1.5, [2, 1, 0]), (-0.5, [0, 0, 3]), (2.0, [1, 1, 1])] };
        let fields: Vec<Box<dyn ExactField>> = vec![Box::new(Quartic), Box::new(SinProduct), Box::new(poly)];
        let x = Point::new(0.31, -0.52, 0.17);
        for f in &fields {
            let g = f.gradient(&x, &Point::zeros());
            assert!((g - fd_gradient(f.as_ref(), &x)).norm() < 1e-6 * (1.0 + g.norm()));
            let h = f.hessian(&x, &Point::zeros());
            assert!((h - fd_hessian(f.as_ref(), &x)).norm() < 1e-5 * (1.0 + h.norm()));
        }
    }

    #[test]
    fn quartic_one_sided_gradient() {
        let x = Point::new(0.5, 0.0, 0.0);
        let up = Quartic.gradient(&x, &Point::new(0.0, 1.0, 0.0));
        let down = Quartic.gradient(&x, &Point::new(0.0, -1.0, 0.0));
        assert_eq!(up.y, 4.0);
        assert_eq!(down.y, -4.0);
    }
}
