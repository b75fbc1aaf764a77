//! Segment elements: fluxes are plain polynomials of degree `k∇ + 1`.

use nalgebra::DMatrix;

use super::element::ElementGeometry;
use super::local::{invert_spd, spd_solve, FacetTrace, LocalMatrices};
use super::ElementSpace;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::poly::{ScaledMonomials, VectorBasis};

pub(super) fn compute(geom: ElementGeometry, space: ElementSpace, nu: &dyn Fn(&Point) -> f64) -> Result<LocalMatrices> {
    let kd = space.k_div();
    let layout = space.layout(geom.facets.len());
    let ndof = layout.total();
    let len = geom.measure;
    let c = geom.centroid;
    let h = geom.diameter;
    let flux = ScaledMonomials::new(1, kd + 1, c, h);
    let nf = flux.len();
    if nf != ndof {
        return Err(Error::InvalidSpace(format!("segment with {ndof} DOFs for {nf} coefficients")));
    }
    let wide = ScaledMonomials::new(1, kd + 2, c, h);
    let pressure = ScaledMonomials::new(1, kd, c, h);
    let np = pressure.len();

    let mut s = DMatrix::<f64>::zeros(wide.len(), wide.len());
    let mut mass_nu = DMatrix::<f64>::zeros(nf, nf);
    let mut dmat = DMatrix::<f64>::zeros(ndof, nf);
    let mut wmono = DMatrix::<f64>::zeros(np, nf);
    let mut nu_int = 0.0;
    for (p, wq) in geom.quad.points.iter().zip(&geom.quad.weights) {
        let m = wide.eval(p);
        let dm = flux.grad(p);
        let gp = pressure.grad(p);
        let nuv = nu(p);
        nu_int += wq * nuv;
        for a in 0..wide.len() {
            for b in 0..wide.len() {
                s[(a, b)] += wq * m[a] * m[b];
            }
        }
        for a in 0..nf {
            for b in 0..nf {
                mass_nu[(a, b)] += wq * nuv * m[a] * m[b];
            }
            for al in 1..np {
                dmat[(layout.ii_offset() + al - 1, a)] += wq * m[a] * gp[al].x / len;
            }
            for al in 0..np {
                wmono[(al, a)] += wq * m[al] * dm[a].x;
            }
        }
    }
    let mut traces = Vec::with_capacity(2);
    for (fi, f) in geom.facets.iter().enumerate() {
        let m = flux.eval(&f.centroid);
        for a in 0..nf {
            dmat[(layout.facet_dof(fi, 0), a)] = m[a] * f.normal.x;
        }
        traces.push(FacetTrace {
            mono: ScaledMonomials::new(0, 0, Point::zeros(), 1.0),
            mass_inv: DMatrix::identity(1, 1),
        });
    }
    let coef = dmat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Conditioning { matrix: "segment DOFs", detail: "singular".into() })?;

    let mass = s.view((0, 0), (nf, nf)).into_owned();
    let basis = VectorBasis::build(1, kd + 1, c, h, &mass)?;
    let to_basis = basis
        .coeffs
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Conditioning { matrix: "segment basis", detail: "singular".into() })?;
    let pi_hat = &to_basis * &coef;
    let g = basis.gram(&mass);
    let g_nu = basis.gram(&mass_nu);
    let d = &dmat * basis.coeffs.transpose();
    let b = &g * &pi_hat;
    let pi = &d * &pi_hat;
    let ka = pi_hat.transpose() * &g_nu * &pi_hat;
    let ka = (&ka + ka.transpose()) * 0.5;
    let w = &wmono * &coef;
    let hm = s.view((0, 0), (np, np)).into_owned();
    let h_hash = s.view((1, 0), (basis.n_grad, np)).into_owned();
    let v = spd_solve(&hm, &w, "H")?;
    let _ = invert_spd(&hm, "H")?;
    let mut w1 = DMatrix::zeros(np, ndof);
    for a in 1..np {
        w1[(a, layout.ii_offset() + a - 1)] = -len;
    }
    let w2 = &w - &w1;
    Ok(LocalMatrices {
        space,
        layout,
        basis,
        pressure,
        traces,
        g,
        g_nu,
        h: hm,
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
        ks: DMatrix::zeros(ndof, ndof),
        nu_bar: nu_int / len,
        geom,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{ElementGeometry, FacetGeometry, FacetShape, LocalMatrices};
    use super::*;

    fn segment(a: f64, b: f64, k: usize) -> ElementGeometry {
        let fa = FacetGeometry::new(FacetShape::Vertex(Point::new(a, 0.0, 0.0)), Point::x(), -1.0, 0).unwrap();
        let fb = FacetGeometry::new(FacetShape::Vertex(Point::new(b, 0.0, 0.0)), Point::x(), 1.0, 0).unwrap();
        ElementGeometry::new(1, vec![fa, fb], 2 * (k + 1)).unwrap()
    }

    #[test]
    fn lowest_order_segment() {
        let lm = LocalMatrices::compute(segment(0.0, 2.0, 0), ElementSpace::rt(1, 0), &|_| 1.0).unwrap();
        // φ_0 = 1 - x/2 with value 1 at x=0 (n_f = +x), φ_1 = x/2
        let want = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert!((&lm.ka - want).norm() < 1e-14);
        // ∫ φ' = φ(2) - φ(0)
        assert!((lm.w[(0, 0)] + 1.0).abs() < 1e-14 && (lm.w[(0, 1)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn segment_identities() {
        for k in 0..=4 {
            let lm = LocalMatrices::compute(segment(-0.3, 0.9, k), ElementSpace::rt(1, k), &|x| 2.0 + x.x).unwrap();
            let n = lm.basis.len();
            assert!((&lm.pi_hat * &lm.d - DMatrix::<f64>::identity(n, n)).norm() < 1e-10);
            assert!((&lm.b * &lm.d - &lm.g).norm() < 1e-10 * lm.g.norm());
            let div = lm.basis.divergence(&lm.pressure);
            assert!((&lm.v * &lm.d - div).norm() < 1e-9);
            let f = |x: &Point| Point::new(1.0 + x.x.powi(k as i32 + 1), 0.0, 0.0);
            let dofs = lm.interpolate(&f);
            let x = Point::new(0.2, 0.0, 0.0);
            assert!((lm.velocity(&dofs, &x) - f(&x)).norm() < 1e-10);
        }
    }
}
