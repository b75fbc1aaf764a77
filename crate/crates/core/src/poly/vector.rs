use nalgebra::DMatrix;

use super::ScaledMonomials;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Relative size below which a complement candidate counts as dependent.
pub const ORTHO_TOLERANCE: f64 = 1e-10;

/// Basis of `[P_k]^d` split into gradients of monomials of degree `1..=k+1`
/// followed by an L²(E)-orthogonal complement of that gradient space.
///
/// Every basis vector is stored by its coordinates in the canonical vector
/// monomials `e_i m_a`, canonical index `i * n_k + a`.
#[derive(Clone, Debug)]
pub struct VectorBasis {
    pub dim: usize,
    pub k: usize,
    pub mono: ScaledMonomials,
    pub coeffs: DMatrix<f64>,
    pub n_grad: usize,
    pub n_oplus: usize,
}

impl VectorBasis {
    /// `mass` is the scalar mass matrix of the degree-`k` monomials on the element.
    pub fn build(dim: usize, k: usize, center: Point, h: f64, mass: &DMatrix<f64>) -> Result<Self> {
        let mono = ScaledMonomials::new(dim, k, center, h);
        let nk = mono.len();
        let n = dim * nk;
        let grad = gradient_coeffs(dim, k, center, h);
        let n_grad = grad.nrows();
        let n_oplus = n - n_grad;
        let mc = canonical_mass(dim, mass);
        let mut coeffs = DMatrix::zeros(n, n);
        coeffs.rows_mut(0, n_grad).copy_from(&grad);
        if n_oplus > 0 {
            let oplus = complement(&grad, &mc, n_oplus, h, mass[(0, 0)])?;
            coeffs.rows_mut(n_grad, n_oplus).copy_from(&oplus);
        }
        Ok(VectorBasis { dim, k, mono, coeffs, n_grad, n_oplus })
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    /// Values of every basis vector at `x`.
    pub fn eval(&self, x: &Point) -> Vec<Point> {
        let m = self.mono.eval(x);
        let nk = m.len();
        (0..self.len())
            .map(|b| {
                let mut v = Point::zeros();
                for i in 0..self.dim {
                    let row = self.coeffs.row(b);
                    v[i] = (0..nk).map(|a| row[i * nk + a] * m[a]).sum();
                }
                v
            })
            .collect()
    }

    /// `∫ ν g_α · g_β` given the ν-weighted scalar mass matrix.
    pub fn gram(&self, mass: &DMatrix<f64>) -> DMatrix<f64> {
        let mc = canonical_mass(self.dim, mass);
        let g = &self.coeffs * mc * self.coeffs.transpose();
        (&g + g.transpose()) * 0.5
    }

    /// Coefficients of `∇·g_β` in `target` (same centre and scaling, degree `>= k-1`).
    pub fn divergence(&self, target: &ScaledMonomials) -> DMatrix<f64> {
        let nk = self.mono.len();
        let mut canon = DMatrix::<f64>::zeros(target.len(), self.dim * nk);
        for i in 0..self.dim {
            for (a, e) in self.mono.exps.iter().enumerate() {
                if e[i] == 0 {
                    continue;
                }
                let mut lower = *e;
                lower[i] -= 1;
                canon[(target.index_of(lower), i * nk + a)] += e[i] as f64 / self.mono.h;
            }
        }
        canon * self.coeffs.transpose()
    }
}

/// Block-diagonal mass matrix of the canonical vector monomials.
pub fn canonical_mass(dim: usize, mass: &DMatrix<f64>) -> DMatrix<f64> {
    let nk = mass.nrows();
    let mut mc = DMatrix::zeros(dim * nk, dim * nk);
    for i in 0..dim {
        mc.view_mut((i * nk, i * nk), (nk, nk)).copy_from(mass);
    }
    mc
}

/// Rows: `∇m_γ` for the degree-`k+1` monomials `γ >= 1`, in canonical coordinates.
fn gradient_coeffs(dim: usize, k: usize, center: Point, h: f64) -> DMatrix<f64> {
    let big = ScaledMonomials::new(dim, k + 1, center, h);
    let small = ScaledMonomials::new(dim, k, center, h);
    let nk = small.len();
    let mut out = DMatrix::zeros(big.len() - 1, dim * nk);
    for (g, e) in big.exps.iter().enumerate().skip(1) {
        for i in 0..dim {
            if e[i] == 0 {
                continue;
            }
            let mut lower = *e;
            lower[i] -= 1;
            out[(g - 1, i * nk + small.index_of(lower))] = e[i] as f64 / h;
        }
    }
    out
}

fn complement(grad: &DMatrix<f64>, mc: &DMatrix<f64>, count: usize, h: f64, measure: f64) -> Result<DMatrix<f64>> {
    let n = mc.nrows();
    let ggt = grad * mc * grad.transpose();
    let chol = ggt.clone().cholesky().ok_or_else(|| Error::Conditioning {
        matrix: "G∇∇",
        detail: "gradient Gram matrix is not positive definite".into(),
    })?;
    // columns of `res` are canonical vectors with their gradient part removed
    let rhs = grad * mc;
    let proj = grad.transpose() * chol.solve(&rhs);
    let mut res = DMatrix::<f64>::identity(n, n) - proj;
    let norms0: Vec<f64> = (0..n).map(|j| mc_norm2(mc, &res.column(j).into_owned())).collect();
    let scale = norms0.iter().cloned().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(count, n);
    let mut used = vec![false; n];
    for r in 0..count {
        let (best, norm2) = (0..n)
            .filter(|j| !used[*j])
            .map(|j| (j, mc_norm2(mc, &res.column(j).into_owned())))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("candidate left");
        if norm2 <= ORTHO_TOLERANCE * scale {
            return Err(Error::Conditioning {
                matrix: "G⊕⊕",
                detail: format!("complement basis lost rank at vector {r} of {count}"),
            });
        }
        used[best] = true;
        let v = res.column(best) / norm2.sqrt();
        // normalise so that ∫ g·g = |E| / h², like the gradient vectors
        out.row_mut(r).copy_from(&(v.transpose() * (measure.sqrt() / h)));
        let mv = mc * &v;
        for j in 0..n {
            if !used[j] {
                let c = mv.dot(&res.column(j));
                let upd = res.column(j) - &v * c;
                res.set_column(j, &upd);
            }
        }
    }
    Ok(out)
}

fn mc_norm2(mc: &DMatrix<f64>, v: &nalgebra::DVector<f64>) -> f64 {
    (v.transpose() * mc * v)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_quadrature, polyhedron_quadrature};
    use crate::poly::mass_matrix;

    fn square_basis(k: usize) -> (VectorBasis, DMatrix<f64>) {
        let sq = vec![
            Point::new(-1.0, -1.0, 0.0),
            Point::new(1.0, -1.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(-1.0, 1.0, 0.0),
        ];
        let h = 8f64.sqrt();
        let rule = polygon_quadrature(&sq, 2 * (k + 1)).unwrap();
        let mono = ScaledMonomials::new(2, k, Point::zeros(), h);
        let mass = mass_matrix(&mono, &rule);
        (VectorBasis::build(2, k, Point::zeros(), h, &mass).unwrap(), mass)
    }

    #[test]
    fn sizes() {
        let (b, _) = square_basis(1);
        assert_eq!(b.n_grad, 5);
        assert_eq!(b.n_oplus, 1);
        let (b0, _) = square_basis(0);
        assert_eq!(b0.n_oplus, 0);
        let v = b0.eval(&Point::new(0.3, 0.1, 0.0));
        let h = 8f64.sqrt();
        assert!((v[0] - Point::new(1.0 / h, 0.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - Point::new(0.0, 1.0 / h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complement_is_orthogonal_and_full_rank() {
        for k in 0..=4 {
            let (b, mass) = square_basis(k);
            let g = b.gram(&mass);
            let diag = (0..g.nrows()).map(|i| g[(i, i)]).fold(0.0, f64::max);
            for a in 0..b.n_grad {
                for c in b.n_grad..b.len() {
                    assert!(g[(a, c)].abs() <= 1e-10 * diag, "k={k}");
                }
            }
            let rank = g.clone().svd(false, false).rank(1e-12 * diag);
            assert_eq!(rank, 2 * b.mono.len());
        }
    }

    #[test]
    fn complement_in_three_dimensions() {
        let faces = crate::geometry::box_faces(Point::zeros(), Point::new(1.0, 2.0, 0.5));
        let c = Point::new(0.5, 1.0, 0.25);
        for k in 0..=3 {
            let rule = polyhedron_quadrature(&faces, 2 * (k + 1)).unwrap();
            let mono = ScaledMonomials::new(3, k, c, 2.3);
            let mass = mass_matrix(&mono, &rule);
            let b = VectorBasis::build(3, k, c, 2.3, &mass).unwrap();
            assert_eq!(b.n_grad, super::super::dim_poly(3, k as isize + 1) - 1);
            let g = b.gram(&mass);
            assert_eq!(g.clone().svd(false, false).rank(1e-12 * g.norm()), 3 * mono.len());
        }
    }
}
