use fracvem::geometry::Point;
use fracvem::vem::{ElementGeometry, ElementSpace, Family, LocalMatrices};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

fn polygon(jitter: &[f64], radii: &[f64], scale: f64) -> Vec<Point> {
    let n = jitter.len() as f64;
    jitter
        .iter()
        .enumerate()
        .zip(radii)
        .map(|((i, j), r)| {
            let t = std::f64::consts::TAU * (i as f64 + j) / n;
            Point::new(3.0 + scale * r * t.cos(), -1.0 + scale * r * t.sin(), 0.0)
        })
        .collect()
}

fn polygon_strategy() -> impl Strategy<Value = Vec<Point>> {
    (3usize..8)
        .prop_flat_map(|n| {
            (prop::collection::vec(-0.15..0.15f64, n), prop::collection::vec(0.6..1.0f64, n), 0.01..10.0f64)
        })
        .prop_map(|(j, r, s)| polygon(&j, &r, s))
}

/// Box `[0,a]×[0,b]×[0,c]` with one face split in two, so the cell has a
/// hanging vertex pair.
fn split_box(a: f64, b: f64, c: f64, t: f64) -> Vec<Vec<Point>> {
    let p = |x: f64, y: f64, z: f64| Point::new(x * a, y * b, z * c);
    vec![
        vec![p(0., 0., 0.), p(0., 1., 0.), p(1., 1., 0.), p(1., 0., 0.)],
        vec![p(0., 0., 1.), p(1., 0., 1.), p(1., 1., 1.), p(0., 1., 1.)],
        vec![p(0., 0., 0.), p(1., 0., 0.), p(1., 0., 1.), p(0., 0., 1.)],
        vec![p(0., 1., 0.), p(0., 1., 1.), p(1., 1., 1.), p(1., 1., 0.)],
        vec![p(0., 0., 0.), p(0., 0., 1.), p(0., 1., 1.), p(0., 1., 0.)],
        vec![p(1., 0., 0.), p(1., 1., 0.), p(1., 1., t), p(1., 0., t)],
        vec![p(1., 0., t), p(1., 1., t), p(1., 1., 1.), p(1., 0., 1.)],
    ]
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn check(lm: &LocalMatrices) -> Result<(), TestCaseError> {
    let n = lm.basis.len();
    let ndof = lm.n_dof();
    prop_assert!(rel(&(&lm.b * &lm.d), &lm.g) < 1e-12);
    prop_assert!(rel(&(&lm.pi_hat * &lm.d), &DMatrix::identity(n, n)) < 1e-10);
    prop_assert!(rel(&(&lm.pi * &lm.pi), &lm.pi) < 1e-10);
    prop_assert!((&lm.ks * &lm.d).norm() <= 1e-10 * lm.ks.norm());
    let div = lm.basis.divergence(&lm.pressure);
    prop_assert!((&lm.v * &lm.d - &div).norm() <= 1e-10 * div.norm().max(1.0));
    let k = lm.stiffness();
    prop_assert!(rel(&k, &k.transpose()) < 1e-13);
    let eig = SymmetricEigen::new(k.clone()).eigenvalues;
    let top = eig.max();
    prop_assert!(eig.min() > -1e-12 * top);
    // nonzero on every flux DOF: the stabilised form is positive definite
    prop_assert!(eig.min() > 0.0, "singular K_a + K_s ({ndof} dofs)");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polygon_identities(poly in polygon_strategy(), k in 0usize..3) {
        let geom = ElementGeometry::polygon(&poly, 2 * k + 4).unwrap();
        let lm = LocalMatrices::compute(geom, ElementSpace::new(2, k, Family::Rt).unwrap(), &|_| 1.0).unwrap();
        check(&lm)?;
    }

    #[test]
    fn split_box_identities(
        dims in (0.2..2.0f64, 0.2..2.0f64, 0.2..2.0f64),
        t in 0.2..0.8f64,
        case in 0usize..5,
    ) {
        let (family, k) = [(Family::Rt, 0), (Family::Rt, 1), (Family::Rt, 2), (Family::Bdm, 1), (Family::Bdm, 2)][case];
        let geom = ElementGeometry::polyhedron(&split_box(dims.0, dims.1, dims.2, t), 2 * k + 4).unwrap();
        let nu = |x: &Point| 1.0 + 0.25 * x.x * x.x;
        let lm = LocalMatrices::compute(geom, ElementSpace::new(3, k, family).unwrap(), &nu).unwrap();
        check(&lm)?;
    }

    #[test]
    fn interpolated_polynomials_are_projected_exactly(
        poly in polygon_strategy(),
        c in prop::collection::vec(-1.0..1.0f64, 7),
    ) {
        // u = ∇(c0 x + c1 y + c2 x² + c3 xy + c4 y²) + c5 (x, y) + c6 (-y, x), about the centroid;
        // the rotation lies outside the gradients
        let geom = ElementGeometry::polygon(&poly, 8).unwrap();
        let x0 = geom.centroid;
        let lm = LocalMatrices::compute(geom, ElementSpace::new(2, 1, Family::Rt).unwrap(), &|_| 1.0).unwrap();
        let u = |p: &Point| {
            let (x, y) = (p.x - x0.x, p.y - x0.y);
            Point::new(
                c[0] + 2.0 * c[2] * x + c[3] * y + c[5] * x - c[6] * y,
                c[1] + c[3] * x + 2.0 * c[4] * y + c[5] * y + c[6] * x,
                0.0,
            )
        };
        let dofs = lm.interpolate(&u);
        for p in &lm.geom.quad.points {
            let v = lm.velocity(&dofs, p);
            prop_assert!((v - u(p)).norm() <= 1e-9 * (1.0 + u(p).norm()));
            let div = 2.0 * c[2] + 2.0 * c[4] + 2.0 * c[5];
            prop_assert!((lm.divergence(&dofs, p) - div).abs() <= 1e-9 * (1.0 + div.abs()));
        }
        let t = &lm.ks * DVector::from_vec(dofs);
        prop_assert!(t.norm() <= 1e-9 * lm.ks.norm());
    }
}

#[test]
fn unit_cube_rt0_gram() {
    // gradients of x/h, y/h, z/h: G = |E|/h² I with h = √3
    let geom = ElementGeometry::polyhedron(&split_box(1.0, 1.0, 1.0, 0.5), 4).unwrap();
    let lm = LocalMatrices::compute(geom, ElementSpace::new(3, 0, Family::Rt).unwrap(), &|_| 1.0).unwrap();
    let expected = DMatrix::<f64>::identity(3, 3) / 3.0;
    assert!(rel(&lm.g, &expected) < 1e-14);
    let lm2 = LocalMatrices::compute(lm.geom.clone(), lm.space, &|_| 2.0).unwrap();
    assert!(rel(&lm2.g_nu, &(&lm.g * 2.0)) < 1e-14);
}
