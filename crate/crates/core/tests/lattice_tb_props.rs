use honeycomb_bands::lattice::{build_geometry, edge_from_indices, Vec2};
use honeycomb_bands::tightbinding::{gamma_real, h_tb, wallace};
use proptest::prelude::*;

fn any_k() -> impl Strategy<Value = Vec2> {
    (-20.0f64..20.0, -20.0f64..20.0).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #[test]
    fn reduction_is_a_class_function(k in any_k(), m1 in -2i64..=2, m2 in -2i64..=2) {
        let geo = build_geometry();
        let (a, _) = geo.reduce_to_bz(k);
        let (b, shift) = geo.reduce_to_bz(k + geo.dual_vec(m1, m2));
        prop_assert!((a - b).norm() < 1e-12);
        prop_assert!(geo.in_brillouin_zone(b));
        let back = b + geo.dual_vec(shift[0], shift[1]);
        prop_assert!((back - (k + geo.dual_vec(m1, m2))).norm() < 1e-11);
    }

    #[test]
    fn tb_eigenvalues_are_plus_minus_wallace(k in any_k()) {
        let [lo, hi] = h_tb(k).eigenvalues();
        let w = wallace(k);
        prop_assert!((lo + w).abs() < 1e-10 && (hi - w).abs() < 1e-10);
    }

    #[test]
    fn wallace_is_dual_periodic(k in any_k(), m1 in -2i64..=2, m2 in -2i64..=2) {
        let geo = build_geometry();
        prop_assert!((wallace(k) - wallace(k + geo.dual_vec(m1, m2))).abs() < 1e-12);
    }

    #[test]
    fn gamma_is_rotation_invariant(k in any_k()) {
        let geo = build_geometry();
        let d = gamma_real(&geo, geo.r120.apply(k)) - gamma_real(&geo, k);
        prop_assert!(d.norm() < 1e-12);
    }

    #[test]
    fn edge_pairs_are_dual(a1 in -10i64..=10, b1 in -10i64..=10) {
        prop_assume!(num_gcd(a1.unsigned_abs(), b1.unsigned_abs()) == 1);
        let geo = build_geometry();
        let e = edge_from_indices(a1, b1).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let lat = [e.dir, e.dir2];
        let dual = [e.dual1, e.dual2];
        for (i, d) in dual.iter().enumerate() {
            for (j, v) in lat.iter().enumerate() {
                let want = if i == j { two_pi } else { 0.0 };
                prop_assert!((d.dot(*v) - want).abs() < 1e-12);
            }
        }
        prop_assert!(geo.in_brillouin_zone(geo.reduce_to_bz(e.dual2).0));
    }
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { num_gcd(b, a % b) }
}

#[test]
fn wallace_vanishes_only_at_vertices() {
    let geo = build_geometry();
    assert!(geo.kvert.iter().all(|v| wallace(*v) < 1e-12));
    let n = 201;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let ext = 4.0 * std::f64::consts::PI / 3.0;
    for i in 0..n {
        for j in 0..n {
            let k = Vec2::new(
                -ext + 2.0 * ext * i as f64 / (n - 1) as f64,
                -ext + 2.0 * ext * j as f64 / (n - 1) as f64,
            );
            if !geo.in_brillouin_zone(k) || geo.kvert.iter().any(|v| (k - *v).norm() < 1e-2) {
                continue;
            }
            lo = lo.min(wallace(k));
            hi = hi.max(wallace(k));
        }
    }
    assert!(lo > 1e-3, "{lo}");
    assert!((hi - 3.0).abs() < 1e-12);
}
