use honeycomb_bands::atomic::AtomicWell;
use honeycomb_bands::lattice::build_geometry;
use honeycomb_bands::potential::{
    cell_mean_square, check_symmetries, periodize, pt_breaking_potential, trig_potential, Parity,
};
use proptest::prelude::*;

fn direct_sum_deviation(cutoff: usize) -> f64 {
    let geo = build_geometry();
    let well = AtomicWell::default_bump();
    let v = periodize(&well, cutoff);
    let mut sites = Vec::new();
    for n1 in -5..=5 {
        for n2 in -5..=5 {
            for base in [geo.v_a, geo.v_b] {
                let s = base + geo.lattice_vec(n1, n2);
                if s.norm() <= 3.0 {
                    sites.push(s);
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..64 {
        for j in 0..64 {
            let x = (i as f64 / 64.0) * geo.v1 + (j as f64 / 64.0) * geo.v2;
            let direct: f64 = sites.iter().map(|s| well.profile((x - *s).norm())).sum();
            worst = worst.max((v.evaluate(x) - direct).abs());
        }
    }
    worst
}

// The default bump is narrow, so its transform decays like exp(-c√ξ) and
// the series needs a cutoff near 64 for 1e-4 accuracy.
#[test]
fn periodized_bump_matches_direct_sum() {
    let devs: Vec<f64> = [16, 32, 64].iter().map(|&c| direct_sum_deviation(c)).collect();
    assert!(devs[0] < 1e-2 && devs[1] < devs[0] && devs[2] < devs[1], "{devs:?}");
    assert!(devs[2] < 1e-4, "{devs:?}");
}

#[test]
fn trig_parseval() {
    let v = trig_potential();
    let coeff_mass: f64 = v.iter().map(|(_, _, c)| c.norm_sqr()).sum();
    assert!((coeff_mass - 1.5).abs() < 1e-15);
    assert!((cell_mean_square(&v, 64) - coeff_mass).abs() < 1e-6);
}

#[test]
fn periodized_bump_is_a_honeycomb_potential() {
    let r = check_symmetries(&periodize(&AtomicWell::default_bump(), 16));
    assert!(r.rotation_ok);
    assert_eq!(r.inversion_parity, Parity::Even);
    let w = check_symmetries(&pt_breaking_potential());
    assert!(w.rotation_ok);
    assert_eq!(w.inversion_parity, Parity::Odd);
}

proptest! {
    #[test]
    fn periodized_bump_rotates_about_hexagon_centre(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let geo = build_geometry();
        let v = periodize(&AtomicWell::default_bump(), 12).rotation_closed();
        let x = s * geo.v1 + t * geo.v2;
        let y = geo.xc + geo.r120.transpose().apply(x - geo.xc);
        prop_assert!((v.evaluate(x) - v.evaluate(y)).abs() < 1e-8);
    }

    #[test]
    fn pt_breaking_vanishes_only_in_pairs(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let geo = build_geometry();
        let w = pt_breaking_potential();
        let x = s * geo.v1 + t * geo.v2;
        prop_assert!((w.evaluate(2.0 * geo.xc - x) + w.evaluate(x)).abs() < 1e-12);
        prop_assert!(w.evaluate(geo.xc).abs() < 1e-12);
    }
}
