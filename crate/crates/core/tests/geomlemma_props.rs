use std::f64::consts::{FRAC_1_SQRT_2, PI};

use honeycomb_bands::geomlemma::{build_grid, run_lemma, verify_assertion1, LemmaConfig};

fn e_len() -> f64 {
    1.0 / 3f64.sqrt()
}

#[test]
fn grid_count_matches_disc_area() {
    let cfg = LemmaConfig::default();
    let bound = cfg.r0 + cfg.delta * FRAC_1_SQRT_2;
    let s = bound / cfg.delta;
    // independent count of integer points strictly inside radius s
    let p = s.ceil() as i64;
    let mut exact = 0usize;
    for a in -p..=p {
        for b in -p..=p {
            let (x, y) = (a as f64 * cfg.delta, b as f64 * cfg.delta);
            if (x * x + y * y).sqrt() < bound {
                exact += 1;
            }
        }
    }
    let n = build_grid(&cfg).len();
    assert_eq!(n, exact);
    let area = PI * s * s;
    assert!(((n as f64 - area) / area).abs() < 0.01, "{n} vs {area}");
}

#[test]
fn single_point_grid_margin() {
    // r0 + δ/√2 < δ leaves only the origin on the grid
    let cfg = LemmaConfig { r0: 0.01, delta: 0.04, ..LemmaConfig::default() };
    assert_eq!(build_grid(&cfg).len(), 1);
    let a = verify_assertion1(&cfg);
    let expected = e_len() - 4.0 * cfg.delta * FRAC_1_SQRT_2;
    assert!((a.min_margin - expected).abs() < 1e-15);
    assert!(a.verdict);
}

#[test]
fn wide_wells_break_assertion1() {
    let cfg = LemmaConfig { r0: 0.45 * e_len(), delta: 0.01, ..LemmaConfig::default() };
    let a = verify_assertion1(&cfg);
    assert!(!a.verdict, "margin {}", a.min_margin);
    assert!(a.witness.is_some());
}

#[test]
fn halving_delta_respects_slack_bound() {
    let coarse = LemmaConfig { delta: 0.02, ..LemmaConfig::default() };
    let fine = LemmaConfig { delta: 0.01, ..LemmaConfig::default() };
    let (a, b) = (verify_assertion1(&coarse), verify_assertion1(&fine));
    let bound = 2.0 * (coarse.delta - fine.delta) * FRAC_1_SQRT_2 * 4.0;
    assert!(b.min_margin >= a.min_margin - bound, "{} -> {}", a.min_margin, b.min_margin);
}

#[test]
fn report_is_independent_of_thread_count() {
    let cfg = LemmaConfig { delta: 0.02, ..LemmaConfig::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_lemma(&cfg).unwrap().to_json())
    };
    assert_eq!(run(1), run(3));
}
