use nalgebra::{DMatrix, DVector};

use super::element::ElementGeometry;
use super::{DofLayout, ElementSpace};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::poly::{mass_matrix, ScaledMonomials, VectorBasis};

/// Smallest admissible `L_ii² / A_ii` during a Cholesky factorisation.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Normal-trace data of one facet: `φ_j · n_f = |f| Σ_i (M_f⁻¹)_ij m^f_i`.
#[derive(Clone, Debug)]
pub struct FacetTrace {
    pub mono: ScaledMonomials,
    pub mass_inv: DMatrix<f64>,
}

impl FacetTrace {
    /// Values of `φ_j · n_f` for every facet DOF `j` at a point of the facet.
    pub fn eval(&self, facet: &super::FacetGeometry, x: &Point) -> Vec<f64> {
        let m = self.mono.eval(&facet.frame.to_local(x));
        let c = &self.mass_inv * DVector::from_vec(m) * facet.measure;
        c.iter().copied().collect()
    }
}

/// All local matrices of one element.
#[derive(Clone, Debug)]
pub struct LocalMatrices {
    pub space: ElementSpace,
    pub layout: DofLayout,
    pub geom: ElementGeometry,
    pub basis: VectorBasis,
    /// Pressure monomials (degree `k∇`).
    pub pressure: ScaledMonomials,
    pub traces: Vec<FacetTrace>,
    pub g: DMatrix<f64>,
    pub g_nu: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub h_hash: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    pub w2: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub pi_hat: DMatrix<f64>,
    pub pi: DMatrix<f64>,
    pub ka: DMatrix<f64>,
    pub ks: DMatrix<f64>,
    pub nu_bar: f64,
}

pub(crate) fn spd_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Conditioning { matrix: name, detail: "not positive definite".into() })?;
    let l = chol.l_dirty();
    for i in 0..a.nrows() {
        let ratio = l[(i, i)] * l[(i, i)] / a[(i, i)];
        if ratio < PIVOT_TOLERANCE {
            return Err(Error::Conditioning { matrix: name, detail: format!("relative pivot {ratio:.3e} at row {i}") });
        }
    }
    Ok(chol.solve(rhs))
}

/// Thin QR factorisation of the weighted Vandermonde matrix `√w_q m_i(x_q)`,
/// so the mass matrix is `RᵀR` without being formed.
pub(crate) struct WeightedQr {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl WeightedQr {
    pub fn new(v: DMatrix<f64>, name: &'static str) -> Result<Self> {
        let norms: Vec<f64> = v.column_iter().map(|c| c.norm()).collect();
        let qr = v.qr();
        let (q, r) = (qr.q(), qr.r());
        for (i, n) in norms.iter().enumerate() {
            let ratio = r[(i, i)] * r[(i, i)] / (n * n);
            if ratio.is_nan() || ratio < PIVOT_TOLERANCE {
                return Err(Error::Conditioning {
                    matrix: name,
                    detail: format!("relative pivot {ratio:.3e} at row {i}"),
                });
            }
        }
        Ok(WeightedQr { q, r })
    }

    /// `R⁻ᵀ x`.
    pub fn solve_rt(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.r.tr_solve_upper_triangular(x).expect("nonsingular R")
    }

    /// `R⁻¹ x`.
    pub fn solve_r(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.r.solve_upper_triangular(x).expect("nonsingular R")
    }

    /// `(RᵀR)⁻¹`.
    pub fn mass_inverse(&self) -> DMatrix<f64> {
        let ri = self.solve_r(&DMatrix::identity(self.r.nrows(), self.r.nrows()));
        let m = &ri * ri.transpose();
        (&m + m.transpose()) * 0.5
    }
}

/// Weighted Vandermonde rows `√w m(x)` for the given evaluation.
fn weighted_rows(
    points: &[Point],
    weights: &[f64],
    n: usize,
    mut eval: impl FnMut(&Point, &mut [f64]),
) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(points.len(), n);
    let mut row = vec![0.0; n];
    for (q, (p, w)) in points.iter().zip(weights).enumerate() {
        eval(p, &mut row);
        let sw = w.max(0.0).sqrt();
        for (i, x) in row.iter().enumerate() {
            v[(q, i)] = sw * x;
        }
    }
    v
}

impl LocalMatrices {
    /// Computes every local matrix for a scalar inverse transmissivity `nu`.
    pub fn compute(geom: ElementGeometry, space: ElementSpace, nu: &dyn Fn(&Point) -> f64) -> Result<Self> {
        if geom.dim != space.dim {
            return Err(Error::InvalidSpace(format!("{}D space on a {}D element", space.dim, geom.dim)));
        }
        if space.dim == 1 {
            return super::line::compute(geom, space, nu);
        }
        let k = space.k;
        let mono1 = ScaledMonomials::new(space.dim, k + 1, geom.centroid, geom.diameter);
        let s = mass_matrix(&mono1, &geom.quad);
        let nk = crate::poly::dim_poly(space.dim, k as isize);
        let mass = s.view((0, 0), (nk, nk)).into_owned();
        let basis = VectorBasis::build(space.dim, k, geom.centroid, geom.diameter, &mass)?;
        Self::compute_with_basis(geom, space, nu, basis)
    }

    /// Same as [`compute`](Self::compute) with a caller-supplied vector basis.
    pub fn compute_with_basis(
        geom: ElementGeometry,
        space: ElementSpace,
        nu: &dyn Fn(&Point) -> f64,
        basis: VectorBasis,
    ) -> Result<Self> {
        let dim = space.dim;
        let k = space.k;
        let layout = space.layout(geom.facets.len());
        let ndof = layout.total();
        let np = space.n_pressure();
        let ngrad = basis.n_grad;
        let nb = basis.len();
        let area = geom.measure;

        let mono1 = ScaledMonomials::new(dim, k + 1, geom.centroid, geom.diameter);
        let n1 = mono1.len();
        let nk = basis.mono.len();
        let pressure = ScaledMonomials::new(dim, space.k_div(), geom.centroid, geom.diameter);

        // scalar mass matrices, plain and ν-weighted
        let mut s = DMatrix::<f64>::zeros(n1, n1);
        let mut mass_nu = DMatrix::<f64>::zeros(nk, nk);
        let mut nu_int = 0.0;
        let mut vals = vec![0.0; n1];
        for (p, wq) in geom.quad.points.iter().zip(&geom.quad.weights) {
            mono1.eval_into(p, &mut vals);
            let nuv = nu(p);
            nu_int += wq * nuv;
            for a in 0..n1 {
                for c in a..n1 {
                    s[(a, c)] += wq * vals[a] * vals[c];
                }
            }
            for a in 0..nk {
                for c in a..nk {
                    mass_nu[(a, c)] += wq * nuv * vals[a] * vals[c];
                }
            }
        }
        symmetrize_upper(&mut s);
        symmetrize_upper(&mut mass_nu);
        let nu_bar = nu_int / area;
        let mass = s.view((0, 0), (nk, nk)).into_owned();

        let g = basis.gram(&mass);
        let g_nu = basis.gram(&mass_nu);
        let h = s.view((0, 0), (np, np)).into_owned();
        let h_hash = s.view((1, 0), (ngrad, np)).into_owned();

        let mut w1 = DMatrix::zeros(np, ndof);
        for a in 1..np {
            w1[(a, layout.ii_offset() + a - 1)] = -area;
        }
        let mut w2 = DMatrix::zeros(np, ndof);
        let mut b2 = DMatrix::zeros(ngrad, ndof);
        let mut d = DMatrix::zeros(ndof, nb);
        let mut traces = Vec::with_capacity(geom.facets.len());
        for (fi, f) in geom.facets.iter().enumerate() {
            let fmono = ScaledMonomials::new(dim - 1, k, Point::zeros(), f.diameter);
            let nf = fmono.len();
            let mut df = DMatrix::<f64>::zeros(nf, nb);
            let mut fv = vec![0.0; nf];
            for (p, wq) in f.quad.points.iter().zip(&f.quad.weights) {
                fmono.eval_into(&f.frame.to_local(p), &mut fv);
                let gv = basis.eval(p);
                for i in 0..nf {
                    let wi = wq * fv[i];
                    for bb in 0..nb {
                        df[(i, bb)] += wi * gv[bb].dot(&f.normal);
                    }
                }
            }
            // facet projection M_f⁻¹ P_f through the QR factor of the facet Vandermonde
            let vf =
                weighted_rows(&f.quad.points, &f.quad.weights, nf, |p, out| fmono.eval_into(&f.frame.to_local(p), out));
            let ve = weighted_rows(&f.quad.points, &f.quad.weights, n1, |p, out| mono1.eval_into(p, out));
            let fqr = WeightedQr::new(vf, "facet mass")?;
            let q = fqr.solve_r(&(fqr.q.transpose() * ve));
            let mf_inv = fqr.mass_inverse();
            let scale = f.sign * f.measure;
            for j in 0..nf {
                let dof = layout.facet_dof(fi, j);
                for a in 0..np {
                    w2[(a, dof)] = scale * q[(j, a)];
                }
                for bb in 0..ngrad {
                    b2[(bb, dof)] = scale * q[(j, bb + 1)];
                }
                for bb in 0..nb {
                    d[(dof, bb)] = df[(j, bb)] / f.measure;
                }
            }
            traces.push(FacetTrace { mono: fmono, mass_inv: mf_inv });
        }
        let w = &w1 + &w2;
        // V = H⁻¹W and H^# H⁻¹ W from the QR factor of the element Vandermonde
        let vq = weighted_rows(&geom.quad.points, &geom.quad.weights, n1, |p, out| mono1.eval_into(p, out));
        let hqr = WeightedQr::new(vq.columns(0, np).into_owned(), "H")?;
        let y = hqr.solve_rt(&w);
        let v = hqr.solve_r(&y);
        let hash_q = vq.columns(1, ngrad).transpose() * &hqr.q;

        let mut b = DMatrix::zeros(nb, ndof);
        let b_grad = -hash_q * y + b2;
        b.rows_mut(0, ngrad).copy_from(&b_grad);
        for gmm in 0..basis.n_oplus {
            b[(ngrad + gmm, layout.iii_offset() + gmm)] = area;
        }

        for a in 1..np {
            for bb in 0..nb {
                d[(layout.ii_offset() + a - 1, bb)] = g[(a - 1, bb)] / area;
            }
        }
        for gmm in 0..basis.n_oplus {
            for bb in 0..nb {
                d[(layout.iii_offset() + gmm, bb)] = g[(ngrad + gmm, bb)] / area;
            }
        }

        let pi_hat = spd_solve(&g, &b, "G")?;
        let pi = &d * &pi_hat;
        let ka = pi_hat.transpose() * &g_nu * &pi_hat;
        let ka = (&ka + ka.transpose()) * 0.5;
        let imp = DMatrix::<f64>::identity(ndof, ndof) - &pi;
        let ks = imp.transpose() * &imp * (nu_bar * area);

        Ok(LocalMatrices {
            space,
            layout,
            geom,
            basis,
            pressure,
            traces,
            g,
            g_nu,
            h,
            h_hash,
            w1,
            w2,
            w,
            v,
            b,
            d,
            pi_hat,
            pi,
            ka,
            ks,
            nu_bar,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.layout.total()
    }

    /// Flux–flux block `K_a + K_s`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        &self.ka + &self.ks
    }

    /// Full saddle-point block `[K_a + K_s, -Wᵀ; W, 0]`.
    pub fn local_system(&self) -> DMatrix<f64> {
        let n = self.n_dof();
        let np = self.w.nrows();
        let mut k = DMatrix::zeros(n + np, n + np);
        k.view_mut((0, 0), (n, n)).copy_from(&self.stiffness());
        k.view_mut((0, n), (n, np)).copy_from(&(-self.w.transpose()));
        k.view_mut((n, 0), (np, n)).copy_from(&self.w);
        k
    }

    /// Projected velocity `Π⁰ u_h` at `x` for element DOF values `dofs`.
    pub fn velocity(&self, dofs: &[f64], x: &Point) -> Point {
        let t = &self.pi_hat * DVector::from_column_slice(dofs);
        self.basis.eval(x).iter().zip(t.iter()).map(|(g, c)| g * *c).sum()
    }

    /// Divergence of `u_h` at `x`.
    pub fn divergence(&self, dofs: &[f64], x: &Point) -> f64 {
        let c = &self.v * DVector::from_column_slice(dofs);
        self.pressure.eval(x).iter().zip(c.iter()).map(|(m, c)| m * c).sum()
    }

    /// DOF values of an arbitrary vector field, by quadrature.
    pub fn interpolate(&self, f: &dyn Fn(&Point) -> Point) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dof()];
        for (fi, (facet, tr)) in self.geom.facets.iter().zip(&self.traces).enumerate() {
            for (p, wq) in facet.quad.points.iter().zip(&facet.quad.weights) {
                let m = tr.mono.eval(&facet.frame.to_local(p));
                let fn_ = f(p).dot(&facet.normal);
                for (j, mj) in m.iter().enumerate() {
                    out[self.layout.facet_dof(fi, j)] += wq * fn_ * mj / facet.measure;
                }
            }
        }
        let grads = self.pressure.clone();
        for (p, wq) in self.geom.quad.points.iter().zip(&self.geom.quad.weights) {
            let fv = f(p);
            let gm = grads.grad(p);
            for a in 1..self.layout.n_ii + 1 {
                out[self.layout.ii_offset() + a - 1] += wq * fv.dot(&gm[a]) / self.geom.measure;
            }
            let gv = self.basis.eval(p);
            for gmm in 0..self.layout.n_iii {
                out[self.layout.iii_offset() + gmm] += wq * fv.dot(&gv[self.basis.n_grad + gmm]) / self.geom.measure;
            }
        }
        out
    }
}

fn symmetrize_upper(m: &mut DMatrix<f64>) {
    for a in 0..m.nrows() {
        for c in 0..a {
            m[(a, c)] = m[(c, a)];
        }
    }
}

pub(crate) fn invert_spd(a: &DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    spd_solve(a, &DMatrix::identity(n, n), name)
}

#[cfg(test)]
mod tests {
    use super::super::element::fixtures::*;
    use super::super::Family;
    use super::*;

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn rt0_unit_cube() {
        let e = box_element(Point::zeros(), Point::new(1.0, 1.0, 1.0), 2);
        let lm = LocalMatrices::compute(e, ElementSpace::rt(3, 0), &|_| 1.0).unwrap();
        assert_eq!(lm.n_dof(), 6);
        // constant gradient basis (1/h) e_i with h = √3
        assert!(rel(&lm.g, &(DMatrix::identity(3, 3) / 3.0)) < 1e-14);
        // W is the divergence theorem row: ±|f|
        let want = DMatrix::from_row_slice(1, 6, &[-1.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
        assert!(rel(&lm.w, &want) < 1e-14);
        // DOFs of (1,0,0)/h are n_f·(1,0,0)/h
        let h = 3f64.sqrt();
        assert!((lm.d[(0, 0)] - 1.0 / h).abs() < 1e-15 && (lm.d[(1, 0)] - 1.0 / h).abs() < 1e-15);
        assert!(lm.d[(2, 0)].abs() < 1e-15);
        // lowest-order RT mass on the cube: ∫ φ_i·φ_j with φ = x e_x etc.
        let k = lm.stiffness();
        assert!(k.clone().symmetric_eigenvalues().iter().all(|l| *l > 0.0));
        let two = LocalMatrices::compute(
            box_element(Point::zeros(), Point::new(1.0, 1.0, 1.0), 2),
            ElementSpace::rt(3, 0),
            &|_| 2.0,
        )
        .unwrap();
        assert!(rel(&two.ka, &(&lm.ka * 2.0)) < 1e-13);
        assert!(rel(&two.g_nu, &(&lm.g * 2.0)) < 1e-13);
    }

    fn check_identities(lm: &LocalMatrices, tol: f64) {
        let n = lm.basis.len();
        assert!(rel(&(&lm.b * &lm.d), &lm.g) < tol, "BD = G");
        assert!(rel(&(&lm.pi_hat * &lm.d), &DMatrix::identity(n, n)) < tol, "Π̂D = I");
        assert!((&lm.ks * &lm.d).norm() <= tol * lm.ks.norm().max(1e-300), "K_s D = 0");
        let div = lm.basis.divergence(&lm.pressure);
        assert!((&lm.v * &lm.d - &div).norm() <= tol * div.norm().max(1.0), "VD = div");
        assert!(rel(&(&lm.pi * &lm.pi), &lm.pi) < tol, "Π² = Π");
    }

    #[test]
    fn identities_on_boxes_and_polygons() {
        for k in 0..=3 {
            let e = box_element(Point::new(0.1, -0.2, 0.3), Point::new(1.1, 0.5, 0.9), 2 * (k + 1));
            let lm = LocalMatrices::compute(e, ElementSpace::rt(3, k), &|_| 1.0).unwrap();
            check_identities(&lm, 1e-10);
            let hex = vec![
                Point::new(0.0, 0.0, 0.0),
                Point::new(1.0, -0.2, 0.0),
                Point::new(1.6, 0.5, 0.0),
                Point::new(1.1, 1.2, 0.0),
                Point::new(0.6, 0.7, 0.0),
                Point::new(-0.1, 1.0, 0.0),
            ];
            let e2 = polygon_element(&hex, 2 * (k + 1));
            let lm2 = LocalMatrices::compute(e2, ElementSpace::rt(2, k), &|x| 1.0 + x.x * x.x).unwrap();
            check_identities(&lm2, 1e-10);
        }
        for k in 1..=2 {
            let e = box_element(Point::zeros(), Point::new(1.0, 2.0, 0.5), 2 * (k + 1));
            let sp = ElementSpace::new(3, k, Family::Bdm).unwrap();
            let lm = LocalMatrices::compute(e, sp, &|_| 1.0).unwrap();
            check_identities(&lm, 1e-10);
        }
    }

    #[test]
    fn consistency_on_polynomials() {
        let k = 2;
        let e = box_element(Point::zeros(), Point::new(1.0, 1.0, 1.0), 2 * (k + 1));
        let nu = |x: &Point| 1.0 + 0.5 * x.y;
        let lm = LocalMatrices::compute(e, ElementSpace::rt(3, k), &nu).unwrap();
        let g = |x: &Point| Point::new(x.y * x.z, 1.0 - x.x * x.x, x.x + x.y * x.z);
        let dofs = DVector::from_vec(lm.interpolate(&g));
        let ah = (dofs.transpose() * lm.stiffness() * &dofs)[(0, 0)];
        let exact = lm.geom.quad.integrate(|x| nu(x) * g(x).norm_squared());
        assert!((ah - exact).abs() < 1e-9 * exact);
        let x = Point::new(0.3, 0.6, 0.2);
        assert!((lm.velocity(dofs.as_slice(), &x) - g(&x)).norm() < 1e-10);
        assert!((lm.divergence(dofs.as_slice(), &x) - x.y).abs() < 1e-10);
    }

    #[test]
    fn projector_is_basis_independent() {
        let k = 2;
        let hex = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.1, 0.0),
            Point::new(1.3, 0.9, 0.0),
            Point::new(0.4, 1.4, 0.0),
            Point::new(-0.2, 0.6, 0.0),
        ];
        let e = polygon_element(&hex, 2 * (k + 1));
        let sp = ElementSpace::rt(2, k);
        let lm = LocalMatrices::compute(e.clone(), sp, &|_| 1.0).unwrap();
        let mut basis = lm.basis.clone();
        let no = basis.n_oplus;
        let seed = DMatrix::<f64>::from_fn(no, no, |i, j| {
            ((i * 7 + j * 3) as f64 * 0.37).sin() + if i == j { 2.0 } else { 0.0 }
        });
        let rot = seed.qr().q();
        let op = basis.coeffs.rows(basis.n_grad, no).into_owned();
        basis.coeffs.rows_mut(basis.n_grad, no).copy_from(&(&rot * op));
        let lm2 = LocalMatrices::compute_with_basis(e, sp, &|_| 1.0, basis).unwrap();
        // new DOFs are M times the old ones, M = diag(I, R) orthogonal
        let n = lm.n_dof();
        let mut m = DMatrix::<f64>::identity(n, n);
        let off = lm.layout.iii_offset();
        m.view_mut((off, off), (no, no)).copy_from(&rot);
        let nb = lm.basis.len();
        assert!(rel(&(&lm2.pi_hat * &lm2.d), &DMatrix::identity(nb, nb)) < 1e-10);
        assert!(rel(&lm2.ka, &(&m * &lm.ka * m.transpose())) < 1e-9);
        assert!(rel(&lm2.ks, &(&m * &lm.ks * m.transpose())) < 1e-9);
        assert!(rel(&lm2.w, &lm.w) < 1e-12);
    }
}
