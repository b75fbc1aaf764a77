//! Gauss rules on segments, triangles and tetrahedra built from collapsed
//! coordinates.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use super::Point;

/// Quadrature points (global coordinates) and weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn append(&mut self, other: QuadratureRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Sum of weights, i.e. the measure of the integration domain.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

type RuleKey = (usize, u32);
type Rule1d = (Vec<f64>, Vec<f64>);

fn cache() -> &'static Mutex<HashMap<RuleKey, Rule1d>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Rule1d>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `n`-point Gauss–Jacobi rule on `[0, 1]` for the weight `(1 - x)^a`.
///
/// Exact for polynomials of degree `2n - 1` against that weight.
pub fn gauss_jacobi(n: usize, a: u32) -> (Vec<f64>, Vec<f64>) {
    if let Some(r) = cache().lock().expect("quadrature cache").get(&(n, a)) {
        return r.clone();
    }
    let rule = golub_welsch(n, a as f64);
    cache().lock().expect("quadrature cache").insert((n, a), rule.clone());
    rule
}

fn golub_welsch(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let beta = 0.0;
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let diag = if i == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
        };
        jac[(i, i)] = diag;
        if i + 1 < n {
            let m = k + 1.0;
            let num = 4.0 * m * (m + alpha) * (m + beta) * (m + ab);
            let den = (2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0);
            let off = (num / den).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 2f64.powf(alpha + 1.0) / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            ((1.0 + x) * 0.5, mu0 * v0 * v0 * 2f64.powf(-(alpha + 1.0)))
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

pub(crate) fn points_for_order(order: usize) -> usize {
    order / 2 + 1
}

/// Gauss–Legendre rule on the segment `[a, b]`, exact to polynomial degree `order`.
pub fn segment_quadrature(a: &Point, b: &Point, order: usize) -> QuadratureRule {
    let (x, w) = gauss_jacobi(points_for_order(order), 0);
    let len = (b - a).norm();
    QuadratureRule {
        points: x.iter().map(|t| a + (b - a) * *t).collect(),
        weights: w.iter().map(|w| w * len).collect(),
    }
}

/// Collapsed Gauss rule on a triangle; `scale` multiplies `2|T|` (use a signed
/// value to build signed decompositions).
pub(crate) fn triangle_rule(p: [&Point; 3], order: usize, scale: f64) -> QuadratureRule {
    let n = points_for_order(order);
    let (u, wu) = gauss_jacobi(n, 0);
    let (w, ww) = gauss_jacobi(n, 1);
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let mut rule = QuadratureRule::default();
    for (wi, wwi) in w.iter().zip(&ww) {
        for (ui, wui) in u.iter().zip(&wu) {
            let s = ui * (1.0 - wi);
            let t = *wi;
            rule.points.push(p[0] + e1 * s + e2 * t);
            rule.weights.push(scale * wui * wwi);
        }
    }
    rule
}

/// Collapsed Gauss rule on a tetrahedron with signed volume `vol`.
pub(crate) fn tetra_rule(p: [&Point; 4], order: usize, vol: f64) -> QuadratureRule {
    let n = points_for_order(order);
    let (u, wu) = gauss_jacobi(n, 0);
    let (v, wv) = gauss_jacobi(n, 1);
    let (w, ww) = gauss_jacobi(n, 2);
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let e3 = p[3] - p[0];
    let mut rule = QuadratureRule::default();
    for (wk, wwk) in w.iter().zip(&ww) {
        for (vj, wvj) in v.iter().zip(&wv) {
            for (ui, wui) in u.iter().zip(&wu) {
                let a = ui * (1.0 - vj) * (1.0 - wk);
                let b = vj * (1.0 - wk);
                let c = *wk;
                rule.points.push(p[0] + e1 * a + e2 * b + e3 * c);
                rule.weights.push(6.0 * vol * wui * wvj * wwk);
            }
        }
    }
    rule
}

pub(crate) fn signed_tet_volume(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn jacobi_moments() {
        for a in 0..3u32 {
            for n in 1..8 {
                let (x, w) = gauss_jacobi(n, a);
                for m in 0..(2 * n) as u32 {
                    // ∫_0^1 x^m (1-x)^a = m! a! / (m+a+1)!
                    let exact = factorial(m) * factorial(a) / factorial(m + a + 1);
                    let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(m as i32)).sum();
                    assert!((got - exact).abs() < 1e-14, "a={a} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn simplex_barycentric_moments() {
        let p = [
            Point::new(0.1, 0.2, 0.0),
            Point::new(1.3, 0.1, 0.0),
            Point::new(0.4, 0.9, 0.0),
            Point::new(0.3, 0.4, 1.1),
        ];
        let vol = signed_tet_volume(&p[0], &p[1], &p[2], &p[3]);
        let order = 6;
        let rule = tetra_rule([&p[0], &p[1], &p[2], &p[3]], order, vol);
        // barycentric coordinate of vertex 1 and 3 via linear solve
        let m = nalgebra::Matrix3::from_columns(&[p[1] - p[0], p[2] - p[0], p[3] - p[0]]);
        let inv = m.try_inverse().unwrap();
        let (a1, a3) = (3u32, 2u32);
        let got = rule.integrate(|x| {
            let l = inv * (x - p[0]);
            l[0].powi(a1 as i32) * l[2].powi(a3 as i32)
        });
        let exact = 6.0 * factorial(a1) * factorial(a3) * vol / factorial(3 + a1 + a3);
        assert!((got - exact).abs() < 1e-14);

        let area = (p[1] - p[0]).cross(&(p[2] - p[0])).norm() / 2.0;
        let tri = triangle_rule([&p[0], &p[1], &p[2]], order, 2.0 * area);
        assert!((tri.measure() - area).abs() < 1e-14);
    }
}
