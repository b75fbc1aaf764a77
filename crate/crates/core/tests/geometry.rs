use fracvem::geometry::{
    clip_convex_polygon, polygon_area, polygon_centroid, polygon_quadrature, polyhedron_quadrature, polyhedron_volume,
    segment_quadrature, Plane, Point,
};
use fracvem::mesh::generate::cut_box;
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

/// Polygon in the plane z = 0, star-shaped about `shift`: vertex `i` sits at
/// angle `2π(i + jitter_i)/n`, so consecutive angular gaps stay below π.
fn star(jitter: &[f64], radii: &[f64], shift: (f64, f64)) -> Vec<Point> {
    let n = jitter.len() as f64;
    jitter
        .iter()
        .enumerate()
        .zip(radii)
        .map(|((i, j), r)| {
            let t = std::f64::consts::TAU * (i as f64 + j) / n;
            Point::new(shift.0 + r * t.cos(), shift.1 + r * t.sin(), 0.0)
        })
        .collect()
}

fn polygon_strategy() -> impl Strategy<Value = Vec<Point>> {
    (3usize..9)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-0.2..0.2f64, n),
                prop::collection::vec(0.3..1.0f64, n),
                (-2.0..2.0f64, -2.0..2.0f64),
            )
        })
        .prop_map(|(a, r, s)| star(&a, &r, s))
        .prop_filter("non-degenerate", |p| polygon_area(p) > 1e-3)
}

/// `∫ x^a y^b` over a planar polygon by Green's theorem,
/// `∮ x^(a+1) y^b / (a+1) dy`, with exact Gauss rules on the edges.
fn green_moment(poly: &[Point], a: i32, b: i32) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let len = (q - p).norm();
        if len == 0.0 {
            continue;
        }
        let dy = (q.y - p.y) / len;
        let rule = segment_quadrature(&p, &q, (a + b + 1) as usize);
        s += rule.integrate(|x| x.x.powi(a + 1) * x.y.powi(b) / (a + 1) as f64 * dy);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polygon_quadrature_matches_green(poly in polygon_strategy(), order in 0usize..8) {
        let rule = polygon_quadrature(&poly, order).unwrap();
        for a in 0..=order as i32 {
            for b in 0..=(order as i32 - a) {
                let q = rule.integrate(|x| x.x.powi(a) * x.y.powi(b));
                let g = green_moment(&poly, a, b);
                let scale = rule.integrate(|x| (x.x.abs() + x.y.abs() + 1.0).powi(a + b));
                prop_assert!((q - g).abs() <= 1e-12 * scale, "x^{a} y^{b}: {q} vs {g}");
            }
        }
    }

    #[test]
    fn area_and_centroid_follow_rigid_motions(
        poly in polygon_strategy(),
        axis in (-1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64),
        angle in 0.0..std::f64::consts::TAU,
        shift in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
    ) {
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(axis.0, axis.1, axis.2)), angle);
        let t = Point::new(shift.0, shift.1, shift.2);
        let moved: Vec<Point> = poly.iter().map(|p| rot * p + t).collect();
        let (a0, a1) = (polygon_area(&poly), polygon_area(&moved));
        prop_assert!((a0 - a1).abs() <= 1e-12 * a0.max(1.0));
        let c = rot * polygon_centroid(&poly) + t;
        prop_assert!((polygon_centroid(&moved) - c).norm() <= 1e-12 * (1.0 + c.norm()));
    }

    #[test]
    fn clipping_splits_area(
        poly in polygon_strategy(),
        normal in (-1.0..1.0f64, -1.0..1.0f64),
        offset in -0.5..0.5f64,
    ) {
        let hull = convex_star(&poly);
        prop_assume!(normal.0.abs() + normal.1.abs() > 1e-2);
        let n = Point::new(normal.0, normal.1, 0.0).normalize();
        let plane = Plane::new(n, &(polygon_centroid(&hull) + n * offset));
        let flip = Plane { normal: -plane.normal, offset: -plane.offset };
        let area = |p: Vec<Point>| if p.len() >= 3 { polygon_area(&p) } else { 0.0 };
        let lo = area(clip_convex_polygon(&hull, &plane, 1e-12));
        let hi = area(clip_convex_polygon(&hull, &flip, 1e-12));
        let total = polygon_area(&hull);
        prop_assert!((lo + hi - total).abs() <= 1e-12 * total.max(1.0));
    }

    #[test]
    fn cut_cells_fill_the_box(
        normals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..3),
        points in prop::collection::vec((0.2..0.8f64, 0.2..0.8f64, 0.2..0.8f64), 2),
    ) {
        let planes: Vec<Plane> = normals
            .iter()
            .zip(&points)
            .filter(|(n, _)| n.0.abs() + n.1.abs() + n.2.abs() > 1e-2)
            .map(|(n, p)| Plane::new(Point::new(n.0, n.1, n.2).normalize(), &Point::new(p.0, p.1, p.2)))
            .collect();
        let mesh = cut_box(Point::zeros(), Point::new(2.0, 1.0, 1.0), [2, 1, 1], &planes, 1e-10).unwrap();
        let volume: f64 = (0..mesh.cells.len()).map(|c| mesh.cell_volume(c).unwrap()).sum();
        prop_assert!((volume - 2.0).abs() <= 1e-12);
        // divergence theorem: ∫_E ∂x(x^(a+1) y^b z^c)/(a+1) = ∮ x^(a+1) y^b z^c n_x / (a+1)
        for c in 0..mesh.cells.len() {
            let faces = mesh.cell_faces(c);
            let rule = polyhedron_quadrature(&faces, 4).unwrap();
            for (a, b, cz) in [(0, 0, 0), (1, 2, 0), (2, 1, 1), (0, 0, 4), (3, 0, 1)] {
                let inside = rule.integrate(|x| x.x.powi(a) * x.y.powi(b) * x.z.powi(cz));
                let mut boundary = 0.0;
                for f in &faces {
                    let n = fracvem::geometry::polygon_area_vector(f).normalize();
                    let fr = polygon_quadrature(f, 5).unwrap();
                    boundary += fr.integrate(|x| x.x.powi(a + 1) * x.y.powi(b) * x.z.powi(cz)) * n.x / (a + 1) as f64;
                }
                prop_assert!((inside - boundary).abs() <= 1e-12, "cell {c}: {inside} vs {boundary}");
            }
            prop_assert!((rule.measure() - polyhedron_volume(&faces).unwrap()).abs() <= 1e-13);
        }
    }
}

/// Convex polygon on the same circle positions: radii set to one.
fn convex_star(poly: &[Point]) -> Vec<Point> {
    let c = poly.iter().sum::<Point>() / poly.len() as f64;
    let mut angles: Vec<f64> = poly.iter().map(|p| (p.y - c.y).atan2(p.x - c.x)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    angles.iter().map(|t| c + Point::new(t.cos(), t.sin(), 0.0)).collect()
}

#[test]
fn l_shape_area_and_centroid() {
    let l = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
        .map(|(x, y)| Point::new(x, y, 0.0))
        .to_vec();
    assert!((polygon_area(&l) - 3.0).abs() < 1e-14);
    let c = polygon_centroid(&l);
    assert!((c - Point::new(5.0 / 6.0, 5.0 / 6.0, 0.0)).norm() < 1e-14);
    let rule = polygon_quadrature(&l, 2).unwrap();
    // ∫ x² over the L: squares [0,1]², [1,2]×[0,1], [0,1]×[1,2]
    let expected = 1.0 / 3.0 + 7.0 / 3.0 + 1.0 / 3.0;
    assert!((rule.integrate(|p| p.x * p.x) - expected).abs() < 1e-13);
}

#[test]
fn comb_uses_ear_clipping() {
    // three teeth; the centroid lies outside the polygon
    let comb = [
        (0.0, 0.0),
        (5.0, 0.0),
        (5.0, 3.0),
        (4.0, 3.0),
        (4.0, 1.0),
        (3.0, 1.0),
        (3.0, 3.0),
        (2.0, 3.0),
        (2.0, 1.0),
        (1.0, 1.0),
        (1.0, 3.0),
        (0.0, 3.0),
    ]
    .map(|(x, y)| Point::new(x, y, 0.0))
    .to_vec();
    assert!((polygon_area(&comb) - 11.0).abs() < 1e-13);
    let rule = polygon_quadrature(&comb, 4).unwrap();
    assert!(rule.weights.iter().all(|w| *w >= 0.0));
    for (a, b) in [(0, 0), (1, 0), (2, 2), (0, 4), (3, 1)] {
        let q = rule.integrate(|x| x.x.powi(a) * x.y.powi(b));
        let g = green_moment(&comb, a, b);
        assert!((q - g).abs() <= 1e-12 * g.abs().max(1.0), "x^{a} y^{b}: {q} vs {g}");
    }
}
