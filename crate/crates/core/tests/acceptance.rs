//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Tolerances are the constants below.

use std::f64::consts::PI;
use std::time::Instant;

use honeycomb_bands::atomic::{
    cylinder_well_eigenvalue, ground_state, AtomicWell, GroundState, RadialGrid,
};
use honeycomb_bands::bloch::{
    band_path, convergence_check, degenerate_pair, dispersion_kset, fermi_velocity,
    gap_vs_eta, high_symmetry_path, rescaled_dispersion, resolvent_distance, BlochProblem,
};
use honeycomb_bands::edges::{dual_slice, nofold_check, BandSlice};
use honeycomb_bands::geomlemma::{run_lemma, LemmaConfig};
use honeycomb_bands::lattice::{build_geometry, edge_from_indices, Vec2};
use honeycomb_bands::potential::{pt_breaking_potential_about, trig_potential, FourierPotential};
use honeycomb_bands::tightbinding::{h_tb, wallace};
use honeycomb_bands::Complex64;

const TB_EXACT: f64 = 1e-10;
const TB_FLOOR: f64 = 0.05;
const TB_VERTEX_RADIUS: f64 = 1e-2;
const HESSIAN_TOL: f64 = 1e-3;
const CYL_ORACLE_TOL: f64 = 0.10;
const CYL_SMOOTH_TOL: f64 = 0.02;
const RHO_R2_MIN: f64 = 0.99;
const DIRAC_SPLIT_REL: f64 = 1e-4;
const DIRAC_ROT_TOL: f64 = 1e-4;
const VF_BAND: (f64, f64) = (0.8, 1.2);
const GAP_BAND: (f64, f64) = (0.8, 1.2);
const GAP_SPLIT_REL: f64 = 1e-6;
const OVERLAP_MAX: f64 = 0.1;
const NOFOLD_TOL: f64 = 1e-8;
const FREE_TOL: f64 = 1e-12;
const J01: f64 = 2.404_825_557_695_773;

type Outcome = Result<(bool, String), String>;

fn bump_gs(lambda: f64) -> Result<GroundState, String> {
    let w = AtomicWell::default_bump();
    ground_state(&w, lambda, RadialGrid::adaptive(&w, lambda)).map_err(|e| e.to_string())
}

fn c1_tight_binding() -> Outcome {
    let geo = build_geometry();
    let (xm, ym) = (2.0 * PI / 3f64.sqrt(), 4.0 * PI / 3.0);
    let n = 201;
    let (mut eig_err, mut floor, mut points) = (0.0f64, f64::INFINITY, 0usize);
    let mut near = Vec2::ZERO;
    for i in 0..n {
        for j in 0..n {
            let k = Vec2::new(
                -xm + 2.0 * xm * i as f64 / (n - 1) as f64,
                -ym + 2.0 * ym * j as f64 / (n - 1) as f64,
            );
            if !geo.in_brillouin_zone(k) {
                continue;
            }
            points += 1;
            let w = wallace(k);
            let [lo, hi] = h_tb(k).eigenvalues();
            eig_err = eig_err.max((lo + w).abs()).max((hi - w).abs());
            if geo.kvert.iter().all(|v| (k - *v).norm() >= TB_VERTEX_RADIUS) && w < floor {
                floor = w;
                near = k;
            }
        }
    }
    let at_vertices = geo.kvert.iter().map(|v| wallace(*v)).fold(0.0, f64::max);
    let ok = eig_err < TB_EXACT && at_vertices < TB_EXACT && floor >= TB_FLOOR;
    Ok((
        ok,
        format!(
            "{points} points, eig err {eig_err:.1e}, max at vertices {at_vertices:.1e}, \
             min off-vertex {floor:.4} at ({:.4},{:.4}) (need >= {TB_FLOOR})",
            near.x, near.y
        ),
    ))
}

fn c2_hessian() -> Outcome {
    let geo = build_geometry();
    let f = |d: Vec2| wallace(geo.k_point() + d).powi(2);
    let h = 1e-4;
    let (ex, ey) = (Vec2::new(h, 0.0), Vec2::new(0.0, h));
    let f0 = f(Vec2::ZERO);
    // Hessian of (3/4)|κ|² is (3/2) I
    let hxx = 0.5 * (f(ex) - 2.0 * f0 + f(-ex)) / (h * h);
    let hyy = 0.5 * (f(ey) - 2.0 * f0 + f(-ey)) / (h * h);
    let hxy = 0.5 * (f(ex + ey) - f(ex - ey) - f(ey - ex) + f(-ex - ey)) / (4.0 * h * h);
    let err = (hxx - 0.75).abs().max((hyy - 0.75).abs()).max(hxy.abs());
    Ok((err < HESSIAN_TOL, format!("[[{hxx:.6},{hxy:.1e}],[.,{hyy:.6}]], err {err:.1e}")))
}

fn c3_cylinder() -> Outcome {
    let (lambda, radius) = (40.0, 0.15);
    let l2 = lambda * lambda;
    let e = cylinder_well_eigenvalue(lambda, radius, 0, 1).map_err(|e| e.to_string())?;
    let target = (J01 / radius).powi(2);
    let oracle_err = ((e + l2) - target).abs() / target;
    let mut smooth = Vec::new();
    for width in [0.02, 0.01, 0.005] {
        let w = AtomicWell::smoothed_cylinder(radius, width).map_err(|e| e.to_string())?;
        let gs = ground_state(&w, lambda, RadialGrid::adaptive(&w, lambda)).map_err(|e| e.to_string())?;
        smooth.push(((gs.e0 + l2) - (e + l2)).abs() / (e + l2));
    }
    let smooth_err = *smooth.last().unwrap();
    Ok((
        oracle_err <= CYL_ORACLE_TOL && smooth_err <= CYL_SMOOTH_TOL,
        format!(
            "E+λ² = {:.2} vs (j01/R)² = {target:.2}, rel {oracle_err:.3} (need <= {CYL_ORACLE_TOL}); \
             smoothed widths 0.02/0.01/0.005 rel {:.4}/{:.4}/{:.4} (need <= {CYL_SMOOTH_TOL})",
            e + l2,
            smooth[0],
            smooth[1],
            smooth[2]
        ),
    ))
}

fn c4_rho_law() -> Outcome {
    let lambdas = [8.0, 12.0, 16.0, 20.0];
    let mut ys = Vec::new();
    for &l in &lambdas {
        ys.push(bump_gs(l)?.rho.ln());
    }
    let n = lambdas.len() as f64;
    let mx = lambdas.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = lambdas.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lambdas.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    Ok((
        r2 >= RHO_R2_MIN && slope < 0.0,
        format!(
            "ln ρ = [{}], slope {slope:.4}, R² {r2:.4} (need >= {RHO_R2_MIN})",
            ys.iter().map(|y| format!("{y:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn c5_dirac() -> Outcome {
    let lambda = 16.0;
    let gs = bump_gs(lambda)?;
    let prob = BlochProblem::periodized(&gs, 20).map_err(|e| e.to_string())?;
    let pair = degenerate_pair(&prob, build_geometry().k_point(), None).map_err(|e| e.to_string())?;
    let split = pair.split();
    let rot = pair.rotation_defect();
    let ok = split < DIRAC_SPLIT_REL * lambda * lambda && rot < DIRAC_ROT_TOL;
    Ok((
        ok,
        format!(
            "N=20 dim {}, split {split:.2e} (need < {:.2e}), μ_τ {:.6}{:+.6}i, μ_τ̄ {:.6}{:+.6}i, defect {rot:.1e}",
            prob.dim(),
            DIRAC_SPLIT_REL * lambda * lambda,
            pair.mu_tau.re,
            pair.mu_tau.im,
            pair.mu_tau_bar.re,
            pair.mu_tau_bar.im
        ),
    ))
}

fn c6_rescaled() -> Outcome {
    let kset = dispersion_kset();
    let mut devs = Vec::new();
    let mut notes = Vec::new();
    let mut all_converged = true;
    for lambda in [8.0, 12.0, 16.0, 20.0] {
        let gs = bump_gs(lambda)?;
        let mut n = 10;
        loop {
            let p = BlochProblem::periodized(&gs, n).map_err(|e| e.to_string())?;
            let q = BlochProblem::periodized(&gs, n + 4).map_err(|e| e.to_string())?;
            let a = rescaled_dispersion(&p, &gs, &kset).map_err(|e| e.to_string())?;
            let b = rescaled_dispersion(&q, &gs, &kset).map_err(|e| e.to_string())?;
            let ed = convergence_check(a.e_d, b.e_d);
            let sd = convergence_check(a.sup_dev, b.sup_dev);
            if (ed.converged && sd.converged) || n >= 18 {
                all_converged &= ed.converged && sd.converged;
                notes.push(format!("λ={lambda} N={n} dev {:.4} (Δ {:.2}%)", a.sup_dev, 100.0 * sd.rel_change));
                devs.push(a.sup_dev);
                break;
            }
            n += 4;
        }
    }
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    Ok((decreasing && all_converged, notes.join("; ")))
}

fn c7_fermi() -> Outcome {
    let k = build_geometry().k_point();
    let mut ratios = Vec::new();
    for lambda in [10.0, 20.0] {
        let gs = bump_gs(lambda)?;
        let prob = BlochProblem::periodized(&gs, 14).map_err(|e| e.to_string())?;
        ratios.push(fermi_velocity(&prob, &gs, k).map_err(|e| e.to_string())?.ratio);
    }
    let (r10, r20) = (ratios[0], ratios[1]);
    let ok = (VF_BAND.0..=VF_BAND.1).contains(&r20) && (r20 - 1.0).abs() < (r10 - 1.0).abs();
    Ok((ok, format!("ratio λ=10 {r10:.4}, λ=20 {r20:.4} (need in [{}, {}])", VF_BAND.0, VF_BAND.1)))
}

/// Every other sample of a slice, i.e. the slice at `(M+1)/2` samples.
fn thin(s: &BandSlice) -> BandSlice {
    let pick = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<_>>();
    BandSlice {
        xis: pick(&s.xis),
        e1: pick(&s.e1),
        e2: pick(&s.e2),
        ..s.clone()
    }
}

fn c8_nofold() -> Outcome {
    let k = build_geometry().k_point();
    let expected = [
        (1.0, (1, 0), true),
        (1.0, (1, 1), false),
        (1.0, (2, 1), false),
        (5.0, (1, 0), true),
        (5.0, (1, 1), true),
        (5.0, (2, 1), true),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (lambda, (a, b), want) in expected {
        let prob = BlochProblem::new(trig_potential(), lambda, 14).map_err(|e| e.to_string())?;
        let edge = edge_from_indices(a, b).map_err(|e| e.to_string())?;
        // the 81-sample grid contains the 41-sample grid
        let fine = dual_slice(&prob, &edge, k, 81).map_err(|e| e.to_string())?;
        let v81 = nofold_check(&fine, NOFOLD_TOL).holds;
        let v41 = nofold_check(&thin(&fine), NOFOLD_TOL).holds;
        ok &= v41 == want && v81 == want;
        let word = |h: bool| if h { "holds" } else { "fails" };
        notes.push(format!("λ={lambda} {}: {}/{}", edge.name(), word(v41), word(v81)));
    }
    Ok((ok, notes.join("; ")))
}

fn c9_gap() -> Outcome {
    let lambda = 5.0;
    let prob = BlochProblem::new(trig_potential(), lambda, 10)
        .map_err(|e| e.to_string())?
        .with_perturbation(pt_breaking_potential_about(Vec2::ZERO), 0.0);
    let etas = [0.0, 0.001, 0.002, 0.005, 0.01, 0.05];
    let rows = gap_vs_eta(&prob, build_geometry().k_point(), &etas).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows[1..3].iter().map(|r| r.gap / r.predicted_gap).collect();
    let split0 = rows[0].gap;
    let shrinking = rows.windows(2).all(|w| w[0].gap < w[1].gap);
    let ok = ratios.iter().all(|r| (GAP_BAND.0..=GAP_BAND.1).contains(r))
        && split0 < GAP_SPLIT_REL * lambda * lambda
        && shrinking;
    Ok((
        ok,
        format!(
            "θ♯ {:.5}, ratio η=0.001 {:.5}, η=0.002 {:.5}, split(η=0) {split0:.1e}",
            rows[0].theta_sharp, ratios[0], ratios[1]
        ),
    ))
}

fn c10_resolvent() -> Outcome {
    let geo = build_geometry();
    let z = Complex64::new(0.0, 1.0);
    let ks = [("Γ", Vec2::ZERO), ("mid Γ-K", 0.5 * geo.k_point())];
    let mut ok = true;
    let mut notes = Vec::new();
    let dist = |lambda: f64, k: Vec2| -> Result<Result<f64, String>, String> {
        let gs = bump_gs(lambda)?;
        let prob = BlochProblem::periodized(&gs, 12).map_err(|e| e.to_string())?;
        Ok(resolvent_distance(&prob, &gs, k, z).map(|r| r.distance).map_err(|e| e.to_string()))
    };
    for (name, k) in ks {
        match (dist(10.0, k)?, dist(20.0, k)?) {
            (Ok(a), Ok(b)) => {
                ok &= b < a;
                notes.push(format!("{name}: λ=10 {a:.3e}, λ=20 {b:.3e}"));
            }
            (a, b) => {
                ok = false;
                notes.push(format!("{name}: λ=10 {a:?}, λ=20 {b:?}"));
            }
        }
    }
    let gs = bump_gs(16.0)?;
    let prob = BlochProblem::periodized(&gs, 12).map_err(|e| e.to_string())?;
    for (name, k) in ks {
        let r = resolvent_distance(&prob, &gs, k, z).map_err(|e| e.to_string())?;
        ok &= r.overlap < OVERLAP_MAX;
        notes.push(format!("overlap λ=16 {name} {:.4}", r.overlap));
    }
    Ok((ok, notes.join("; ")))
}

fn c11_lemma() -> Outcome {
    let cfg = LemmaConfig::default();
    let run = |threads: usize| -> Result<_, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| run_lemma(&cfg)).map_err(|e| e.to_string())
    };
    let a = run(1)?;
    let b = run(3)?;
    let same = a.to_json() == b.to_json();
    let margin = |i: usize| a.assertions[i].min_margin;
    let ok = same && a.all_hold() && margin(0) > 0.0 && margin(3) > 0.0 && a.assertions[2].verdict;
    let pairs: u64 = a.assertions[0].checked;
    Ok((
        ok,
        format!(
            "grid {}, {pairs} pairs, margins {:.4}/{:.4}/{:.5}/{:.5}, N_bad {:?}, 1 vs 3 threads identical: {same}",
            a.grid_size,
            margin(0),
            margin(1),
            margin(2),
            margin(3),
            a.n_bad
        ),
    ))
}

fn c12_free() -> Outcome {
    let geo = build_geometry();
    let v = FourierPotential::zeros(0, "zero", Vec2::ZERO, true);
    let prob = BlochProblem::new(v, 1.0, 8).map_err(|e| e.to_string())?;
    let path = high_symmetry_path(20);
    let bands = band_path(&prob, &path, 5).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for (k, e) in path.iter().zip(&bands.energies) {
        let mut free: Vec<f64> = (-6..=6)
            .flat_map(|a| (-6..=6).map(move |b| (a, b)))
            .map(|(a, b)| (*k + geo.dual_vec(a, b)).norm_sq())
            .collect();
        free.sort_by(f64::total_cmp);
        for b in 0..5 {
            err = err.max((e[b] - free[b]).abs());
        }
    }
    Ok((err < FREE_TOL, format!("{} k-points, max err {err:.1e}", path.len())))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "tight-binding exactness", c1_tight_binding),
        (2, "Dirac cone coefficient", c2_hessian),
        (3, "cylindrical well oracle", c3_cylinder),
        (4, "rho exponential law", c4_rho_law),
        (5, "Dirac degeneracy", c5_dirac),
        (6, "rescaled convergence", c6_rescaled),
        (7, "Fermi velocity", c7_fermi),
        (8, "no-fold verdicts", c8_nofold),
        (9, "PT-breaking gap", c9_gap),
        (10, "resolvent distance", c10_resolvent),
        (11, "geometric lemma", c11_lemma),
        (12, "free particle", c12_free),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = t.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {} {name}: {detail} [{secs:.1}s]",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
