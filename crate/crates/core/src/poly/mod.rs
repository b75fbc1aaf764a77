//! Scaled monomials and the vector polynomial bases built on top of them.

mod vector;

pub use vector::{VectorBasis, ORTHO_TOLERANCE};

use crate::geometry::Point;

/// `C(k + d, d)`, with `dim_poly(d, -1) == 0`.
pub fn dim_poly(d: usize, k: isize) -> usize {
    if k < 0 {
        return 0;
    }
    let k = k as usize;
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 1..=d {
        num *= k + i;
        den *= i;
    }
    num / den
}

/// Exponents of all monomials of total degree `<= k` in `d` variables.
///
/// Graded order: by total degree, then lexicographically decreasing in the
/// leading variables (`x`, `y`, `z`, `x²`, `xy`, `xz`, `y²`, ...).
pub fn exponents(d: usize, k: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(dim_poly(d, k as isize));
    for t in 0..=k as u32 {
        match d {
            0 => {
                if t == 0 {
                    out.push([0, 0, 0]);
                }
            }
            1 => out.push([t, 0, 0]),
            2 => {
                for a in (0..=t).rev() {
                    out.push([a, t - a, 0]);
                }
            }
            3 => {
                for a in (0..=t).rev() {
                    for b in (0..=t - a).rev() {
                        out.push([a, b, t - a - b]);
                    }
                }
            }
            _ => panic!("unsupported dimension {d}"),
        }
    }
    out
}

/// Position of an exponent in the graded order.
pub fn exponent_index(d: usize, e: [u32; 3]) -> usize {
    let t = (e[0] + e[1] + e[2]) as usize;
    let below = if t == 0 { 0 } else { dim_poly(d, t as isize - 1) };
    let within = match d {
        0 | 1 => 0,
        2 => (t as u32 - e[0]) as usize,
        3 => {
            // a descends from t; for each a there are (t - a + 1) entries
            let a = e[0];
            let skipped: u32 = (a + 1..=t as u32).map(|aa| t as u32 - aa + 1).sum();
            skipped as usize + (t as u32 - a - e[1]) as usize
        }
        _ => panic!("unsupported dimension {d}"),
    };
    below + within
}

/// Monomials `((x - c) / h)^α` of total degree `<= degree` in `dim` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMonomials {
    pub dim: usize,
    pub degree: usize,
    pub center: Point,
    pub h: f64,
    pub exps: Vec<[u32; 3]>,
}

impl ScaledMonomials {
    pub fn new(dim: usize, degree: usize, center: Point, h: f64) -> Self {
        assert!(h > 0.0, "monomial scaling must be positive");
        ScaledMonomials { dim, degree, center, h, exps: exponents(dim, degree) }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    fn powers(&self, x: &Point) -> [Vec<f64>; 3] {
        let mut pw: [Vec<f64>; 3] = Default::default();
        for (i, row) in pw.iter_mut().enumerate().take(self.dim) {
            let s = (x[i] - self.center[i]) / self.h;
            row.reserve(self.degree + 1);
            let mut v = 1.0;
            for _ in 0..=self.degree {
                row.push(v);
                v *= s;
            }
        }
        pw
    }

    pub fn eval_into(&self, x: &Point, out: &mut [f64]) {
        let pw = self.powers(x);
        for (o, e) in out.iter_mut().zip(&self.exps) {
            let mut v = 1.0;
            for (i, row) in pw.iter().enumerate().take(self.dim) {
                v *= row[e[i] as usize];
            }
            *o = v;
        }
    }

    pub fn eval(&self, x: &Point) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// Gradients of all monomials at `x`.
    pub fn grad(&self, x: &Point) -> Vec<Point> {
        let pw = self.powers(x);
        self.exps
            .iter()
            .map(|e| {
                let mut g = Point::zeros();
                for i in 0..self.dim {
                    if e[i] == 0 {
                        continue;
                    }
                    let mut v = e[i] as f64 / self.h;
                    for (j, row) in pw.iter().enumerate().take(self.dim) {
                        let p = if j == i { e[j] - 1 } else { e[j] };
                        v *= row[p as usize];
                    }
                    g[i] = v;
                }
                g
            })
            .collect()
    }

    pub fn index_of(&self, e: [u32; 3]) -> usize {
        exponent_index(self.dim, e)
    }
}

/// Matrix of `∫ m_a m_b` for a set of monomials under a quadrature rule.
pub fn mass_matrix(mono: &ScaledMonomials, rule: &crate::geometry::QuadratureRule) -> nalgebra::DMatrix<f64> {
    let n = mono.len();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut v = vec![0.0; n];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        mono.eval_into(p, &mut v);
        for a in 0..n {
            let wa = w * v[a];
            for b in a..n {
                m[(a, b)] += wa * v[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(dim_poly(3, 0), 1);
        assert_eq!(dim_poly(2, 2), 6);
        assert_eq!(dim_poly(3, 4), 35);
        assert_eq!(dim_poly(1, -1), 0);
        for d in 1..=3 {
            for k in 0..6 {
                assert_eq!(exponents(d, k).len(), dim_poly(d, k as isize));
            }
        }
    }

    #[test]
    fn ordering_is_graded() {
        let e = exponents(3, 2);
        assert_eq!(e[0], [0, 0, 0]);
        assert_eq!(&e[1..4], &[[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(e[4], [2, 0, 0]);
        assert_eq!(e[5], [1, 1, 0]);
        assert_eq!(e[9], [0, 0, 2]);
        for d in 1..=3 {
            for (i, x) in exponents(d, 5).into_iter().enumerate() {
                assert_eq!(exponent_index(d, x), i);
            }
        }
    }

    #[test]
    fn one_dimensional_example() {
        let m = ScaledMonomials::new(1, 1, Point::zeros(), 2.0);
        assert_eq!(m.eval(&Point::new(1.0, 0.0, 0.0)), vec![1.0, 0.5]);
        let c = Point::new(0.3, -0.2, 0.7);
        let m3 = ScaledMonomials::new(3, 3, c, 0.4);
        let v = m3.eval(&c);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|x| *x == 0.0));
    }

    proptest! {
        #[test]
        fn matches_naive_powers(x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0, h in 0.1f64..3.0) {
            let c = Point::new(0.1, 0.2, -0.3);
            let m = ScaledMonomials::new(3, 4, c, h);
            let p = Point::new(x, y, z);
            let v = m.eval(&p);
            for (e, got) in m.exps.iter().zip(&v) {
                let want = ((x - c.x) / h).powi(e[0] as i32)
                    * ((y - c.y) / h).powi(e[1] as i32)
                    * ((z - c.z) / h).powi(e[2] as i32);
                prop_assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0));
            }
        }

        #[test]
        fn gradient_matches_finite_difference(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let m = ScaledMonomials::new(2, 3, Point::zeros(), 0.7);
            let p = Point::new(x, y, 0.0);
            let g = m.grad(&p);
            let eps = 1e-6;
            for i in 0..2 {
                let mut dp = Point::zeros();
                dp[i] = eps;
                let fp = m.eval(&(p + dp));
                let fm = m.eval(&(p - dp));
                for a in 0..m.len() {
                    let fd = (fp[a] - fm[a]) / (2.0 * eps);
                    prop_assert!((fd - g[a][i]).abs() < 1e-6);
                }
            }
        }
    }
}
