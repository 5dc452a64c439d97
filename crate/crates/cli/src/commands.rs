use std::path::{Path, PathBuf};

use clap::Args;
use honeycomb_bands::atomic::{AtomicWell, GroundState, RadialGrid};
use honeycomb_bands::bloch::{
    band_path, convergence_check, dirac_point_with, dispersion_kset, gap_vs_eta, high_symmetry_path,
    rescaled_dispersion, resolvent_distance, BlochProblem, DiracOptions,
};
use honeycomb_bands::edges::{dual_slice, nofold_check};
use honeycomb_bands::geomlemma::{run_lemma, LemmaConfig};
use honeycomb_bands::lattice::{build_geometry, edge_from_indices, Vec2};
use honeycomb_bands::potential::{pt_breaking_potential_about, trig_potential, FourierPotential};
use honeycomb_bands::tightbinding::wallace_with;
use honeycomb_bands::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cache::ground_cached;
use crate::config::{emit, load, merge_fields, parse_list};
use crate::{Failure, SCHEMA_VERSION};

/// Shared by every subcommand: `--config` and `--out` are never read from
/// the file itself.
#[derive(Args, Debug, Clone, Default)]
pub struct Io {
    /// JSON or TOML file with default values for this subcommand's flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn with_file<T: for<'de> Deserialize<'de> + Default>(io: &Io) -> Result<T, Failure> {
    match &io.config {
        Some(p) => load(p),
        None => Ok(T::default()),
    }
}

fn json_report(kind: &str, config: &impl Serialize, body: serde_json::Value) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": kind,
        "config": config,
        "result": body,
    });
    serde_json::to_string_pretty(&doc).expect("report serialises") + "\n"
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Config(format!("{name} must be positive, got {v}")))
    }
}

fn make_well(kind: &str, r0: Option<f64>, radius: Option<f64>, width: Option<f64>) -> Result<AtomicWell, Failure> {
    match kind {
        "bump" => Ok(match r0 {
            Some(r) => AtomicWell::bump(r)?,
            None => AtomicWell::default_bump(),
        }),
        "cylinder" => Ok(AtomicWell::smoothed_cylinder(radius.unwrap_or(0.15), width.unwrap_or(0.02))?),
        other => Err(Failure::Config(format!("unknown well {other:?}; expected bump or cylinder"))),
    }
}

fn make_grid(well: &AtomicWell, lambda: f64, n_r: Option<usize>, r_max: Option<f64>) -> RadialGrid {
    let g = RadialGrid::adaptive(well, lambda);
    RadialGrid {
        n_r: n_r.unwrap_or(g.n_r),
        r_max: r_max.unwrap_or(g.r_max),
    }
}

// ---------------------------------------------------------------- tb

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TbArgs {
    /// Points per side of the square grid around the Brillouin zone.
    #[arg(long)]
    pub grid: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn tb(a: TbArgs) -> Result<(), Failure> {
    let file: TbArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; grid);
    let n = a.grid.unwrap_or(101);
    if n < 2 {
        return Err(Failure::Config("grid must be >= 2".into()));
    }
    let geo = build_geometry();
    let half = geo.k_point().norm();
    let mut s = String::from("kx,ky,wtb\n");
    for i in 0..n {
        for j in 0..n {
            let k = Vec2::new(
                -half + 2.0 * half * j as f64 / (n - 1) as f64,
                -half + 2.0 * half * i as f64 / (n - 1) as f64,
            );
            s.push_str(&format!("{:.12},{:.12},{:.12}\n", k.x, k.y, wallace_with(&geo, k)));
        }
    }
    emit(io.out.as_deref(), &s)
}

// ---------------------------------------------------------------- ground / rho

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundArgs {
    /// `bump` or `cylinder`.
    #[arg(long)]
    pub well: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Cylinder radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Cylinder smoothing width.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n_r: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Directory of cached ground states.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn ground(a: GroundArgs) -> Result<(), Failure> {
    let file: GroundArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; well, r0, radius, width, lambda, n_r, r_max, cache_dir);
    let well = make_well(a.well.as_deref().unwrap_or("bump"), a.r0, a.radius, a.width)?;
    let lambda = positive("lambda", a.lambda.unwrap_or(16.0))?;
    let grid = make_grid(&well, lambda, a.n_r, a.r_max);
    let (gs, hit) = ground_cached(a.cache_dir.as_deref(), &well, lambda, grid)?;
    let body = json!({
        "cache_hit": hit,
        "e0": gs.e0,
        "e0_over_lambda_sq": gs.energy_ratio(),
        "gap": gs.gap,
        "grid_change": gs.grid_change,
        "rho": gs.rho,
        "grid": gs.grid,
        "well": gs.well,
    });
    emit(io.out.as_deref(), &json_report("ground", &a, body))
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhoArgs {
    #[arg(long)]
    pub well: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    /// Comma-separated λ values.
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn rho(a: RhoArgs) -> Result<(), Failure> {
    let file: RhoArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; well, r0, radius, width, lambdas, cache_dir);
    let well = make_well(a.well.as_deref().unwrap_or("bump"), a.r0, a.radius, a.width)?;
    let lambdas = parse_list(a.lambdas.as_deref().unwrap_or("8,12,16,20"))?;
    let mut s = String::from("lambda,e0,e0_over_lambda_sq,rho,ln_rho\n");
    for lam in lambdas {
        let lam = positive("lambda", lam)?;
        let (gs, _) = ground_cached(a.cache_dir.as_deref(), &well, lam, make_grid(&well, lam, None, None))?;
        s.push_str(&format!(
            "{lam},{:.12},{:.12},{:.12e},{:.12}\n",
            gs.e0,
            gs.energy_ratio(),
            gs.rho,
            gs.rho.ln()
        ));
    }
    emit(io.out.as_deref(), &s)
}

// ---------------------------------------------------------------- Bloch problems

/// Builds the Bloch problem and, for atomic potentials, the ground state.
fn problem(
    potential: &str,
    lambda: f64,
    n: usize,
    r0: Option<f64>,
    cache_dir: Option<&Path>,
) -> Result<(BlochProblem, Option<GroundState>), Failure> {
    match potential {
        "bump" => {
            let well = make_well("bump", r0, None, None)?;
            let (gs, _) = ground_cached(cache_dir, &well, lambda, make_grid(&well, lambda, None, None))?;
            Ok((BlochProblem::periodized(&gs, n)?, Some(gs)))
        }
        "trig" => Ok((BlochProblem::new(trig_potential(), lambda, n)?, None)),
        "zero" => Ok((
            BlochProblem::new(FourierPotential::zeros(0, "zero", Vec2::ZERO, true), lambda, n)?,
            None,
        )),
        other => Err(Failure::Config(format!(
            "unknown potential {other:?}; expected bump, trig or zero"
        ))),
    }
}

fn vertex(name: &str) -> Result<Vec2, Failure> {
    let geo = build_geometry();
    match name {
        "K" | "k" => Ok(geo.k_point()),
        "Kprime" | "kprime" | "K'" => Ok(geo.k_prime()),
        other => Err(Failure::Config(format!("unknown vertex {other:?}; expected K or Kprime"))),
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsArgs {
    /// `bump`, `trig` or `zero`.
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Truncation radius `|m|∞ ≤ n`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_bands: Option<usize>,
    /// Samples per path segment.
    #[arg(long)]
    pub per_segment: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn bands(a: BandsArgs) -> Result<(), Failure> {
    let file: BandsArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; potential, r0, lambda, n, n_bands, per_segment, cache_dir);
    let lambda = positive("lambda", a.lambda.unwrap_or(5.0))?;
    let (prob, _) = problem(
        a.potential.as_deref().unwrap_or("trig"),
        lambda,
        a.n.unwrap_or(10),
        a.r0,
        a.cache_dir.as_deref(),
    )?;
    let path = high_symmetry_path(a.per_segment.unwrap_or(30).max(1));
    let b = band_path(&prob, &path, a.n_bands.unwrap_or(4))?;
    emit(io.out.as_deref(), &b.to_csv())
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiracArgs {
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// `K` or `Kprime`.
    #[arg(long)]
    pub vertex: Option<String>,
    /// Degeneracy tolerance; default `1e-5·λ²`.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn dirac(a: DiracArgs) -> Result<(), Failure> {
    let file: DiracArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; potential, r0, lambda, n, vertex, tolerance, cache_dir);
    let lambda = positive("lambda", a.lambda.unwrap_or(16.0))?;
    let (prob, gs) = problem(
        a.potential.as_deref().unwrap_or("bump"),
        lambda,
        a.n.unwrap_or(12),
        a.r0,
        a.cache_dir.as_deref(),
    )?;
    let opts = DiracOptions {
        degeneracy_tol: a.tolerance,
        ..DiracOptions::default()
    };
    let k = vertex(a.vertex.as_deref().unwrap_or("K"))?;
    let r = dirac_point_with(&prob, k, &opts, gs.as_ref())?;
    let body = serde_json::to_value(&r).expect("report serialises");
    emit(io.out.as_deref(), &json_report("dirac", &a, body))
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn converge(a: ConvergeArgs) -> Result<(), Failure> {
    let file: ConvergeArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; r0, lambdas, n, cache_dir);
    let n = a.n.unwrap_or(12);
    let kset = dispersion_kset();
    let mut s = String::from("lambda,n,rho,e_d,sup_dev,sup_dev_refined,rel_change,converged,sign_ok\n");
    for lam in parse_list(a.lambdas.as_deref().unwrap_or("8,12,16,20"))? {
        let lam = positive("lambda", lam)?;
        let (prob, gs) = problem("bump", lam, n, a.r0, a.cache_dir.as_deref())?;
        let gs = gs.expect("atomic potential");
        let t = rescaled_dispersion(&prob, &gs, &kset)?;
        let fine = rescaled_dispersion(&BlochProblem::periodized(&gs, n + 4)?, &gs, &kset)?;
        let c = convergence_check(t.sup_dev, fine.sup_dev);
        s.push_str(&format!(
            "{lam},{n},{:.12e},{:.12},{:.12e},{:.12e},{:.6e},{},{}\n",
            t.rho, t.e_d, t.sup_dev, fine.sup_dev, c.rel_change, c.converged, t.sign_ok
        ));
    }
    emit(io.out.as_deref(), &s)
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NofoldArgs {
    /// Only `trig` is meaningful for the reference figure; `bump` works too.
    #[arg(long)]
    pub potential: Option<String>,
    /// Single λ; default runs λ = 1 and 5.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Single edge `a,b`; default runs zigzag, armchair and (2,1).
    #[arg(long)]
    pub edge: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Samples per slice (odd, ≥ 41).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// File for the per-case verdict table; stdout if absent.
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

fn parse_edge(s: &str) -> Result<(i64, i64), Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(Failure::Config(format!("edge must be two integers, got {s:?}"))),
        },
        _ => Err(Failure::Config(format!("edge must look like a,b; got {s:?}"))),
    }
}

pub fn nofold(a: NofoldArgs) -> Result<(), Failure> {
    let file: NofoldArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; potential, lambda, edge, n, samples, tol, verdicts, cache_dir);
    let lambdas = match a.lambda {
        Some(l) => vec![positive("lambda", l)?],
        None => vec![1.0, 5.0],
    };
    let edges = match &a.edge {
        Some(e) => vec![parse_edge(e)?],
        None => vec![(1, 0), (1, 1), (2, 1)],
    };
    let m = a.samples.unwrap_or(41);
    let tol = a.tol.unwrap_or(1e-8);
    let k = build_geometry().k_point();
    let mut slices = String::from("lambda,edge,xi,E1,E2,E_D\n");
    let mut table = String::from("lambda,edge,samples,holds,crossings,meets_both_orbits\n");
    for &lam in &lambdas {
        let (prob, _) = problem(
            a.potential.as_deref().unwrap_or("trig"),
            lam,
            a.n.unwrap_or(14),
            None,
            a.cache_dir.as_deref(),
        )?;
        for &(e1, e2) in &edges {
            let edge = edge_from_indices(e1, e2)?;
            let slice = dual_slice(&prob, &edge, k, m)?;
            let v = nofold_check(&slice, tol);
            let name = edge.name();
            for i in 0..slice.xis.len() {
                slices.push_str(&format!(
                    "{lam},{name},{:.12},{:.12},{:.12},{:.12}\n",
                    slice.xis[i], slice.e1[i], slice.e2[i], slice.e_d
                ));
            }
            let cross: Vec<String> = v.crossings.iter().map(|c| format!("{}@{:.4}", c.band, c.xi)).collect();
            table.push_str(&format!(
                "{lam},{name},{m},{},{},{}\n",
                if v.holds { "holds" } else { "fails" },
                cross.join(" "),
                slice.meets_both_orbits()
            ));
        }
    }
    match (&io.out, &a.verdicts) {
        (Some(_), verdicts) => {
            emit(io.out.as_deref(), &slices)?;
            emit(verdicts.as_deref(), &table)
        }
        (None, Some(v)) => {
            emit(Some(v), &table)?;
            emit(None, &slices)
        }
        (None, None) => emit(None, &table),
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated η values.
    #[arg(long)]
    pub etas: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn gap(a: GapArgs) -> Result<(), Failure> {
    let file: GapArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; lambda, n, etas);
    let lambda = positive("lambda", a.lambda.unwrap_or(5.0))?;
    let v = trig_potential();
    let w = pt_breaking_potential_about(v.center);
    let prob = BlochProblem::new(v, lambda, a.n.unwrap_or(10))?.with_perturbation(w, 0.0);
    let etas = parse_list(a.etas.as_deref().unwrap_or("0.2,0.1,0.05,0.02,0.01"))?;
    let rows = gap_vs_eta(&prob, build_geometry().k_point(), &etas)?;
    let mut s = String::from("eta,gap,theta_sharp,predicted_gap,ratio\n");
    for r in rows {
        let ratio = if r.predicted_gap > 0.0 { r.gap / r.predicted_gap } else { f64::NAN };
        s.push_str(&format!(
            "{},{:.12e},{:.12},{:.12e},{:.8}\n",
            r.eta, r.gap, r.theta_sharp, r.predicted_gap, ratio
        ));
    }
    emit(io.out.as_deref(), &s)
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventArgs {
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// `gamma` or `mid` (midpoint of Γ–K).
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub z_re: Option<f64>,
    #[arg(long)]
    pub z_im: Option<f64>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn resolvent(a: ResolventArgs) -> Result<(), Failure> {
    let file: ResolventArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; r0, lambdas, n, k, z_re, z_im, cache_dir);
    let geo = build_geometry();
    let k = match a.k.as_deref().unwrap_or("gamma") {
        "gamma" => Vec2::ZERO,
        "mid" => 0.5 * geo.k_point(),
        other => return Err(Failure::Config(format!("unknown k {other:?}; expected gamma or mid"))),
    };
    let z = Complex64::new(a.z_re.unwrap_or(0.0), a.z_im.unwrap_or(1.0));
    let mut s = String::from("lambda,n,kx,ky,distance,overlap,tb_defect,status\n");
    for lam in parse_list(a.lambdas.as_deref().unwrap_or("12,16,20"))? {
        let lam = positive("lambda", lam)?;
        let (prob, gs) = problem("bump", lam, a.n.unwrap_or(12), a.r0, a.cache_dir.as_deref())?;
        match resolvent_distance(&prob, &gs.expect("atomic potential"), k, z) {
            Ok(r) => s.push_str(&format!(
                "{lam},{},{:.12},{:.12},{:.12e},{:.12e},{:.12e},ok\n",
                r.n, k.x, k.y, r.distance, r.overlap, r.tb_defect
            )),
            // keep the sweep going; the row records why it is empty
            Err(honeycomb_bands::Error::IllConditioned { overlap }) => s.push_str(&format!(
                "{lam},{},{:.12},{:.12},,{overlap:.12e},,ill_conditioned\n",
                prob.n, k.x, k.y
            )),
            Err(e) => return Err(e.into()),
        }
    }
    emit(io.out.as_deref(), &s)
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub margin_floor: Option<f64>,
    #[arg(long)]
    pub index_bound: Option<i64>,
    #[command(flatten)]
    #[serde(skip)]
    pub io: Io,
}

pub fn geomlemma(a: LemmaArgs) -> Result<(), Failure> {
    let file: LemmaArgs = with_file(&a.io)?;
    let io = a.io.clone();
    let a = merge_fields!(a, file; delta, r0, epsilon, margin_floor, index_bound);
    let d = LemmaConfig::default();
    let cfg = LemmaConfig {
        delta: a.delta.unwrap_or(d.delta),
        r0: a.r0.unwrap_or(d.r0),
        epsilon: a.epsilon.unwrap_or(d.epsilon),
        margin_floor: a.margin_floor.unwrap_or(d.margin_floor),
        index_bound: a.index_bound.unwrap_or(d.index_bound),
    };
    let report = run_lemma(&cfg)?;
    let body = serde_json::to_value(&report).expect("report serialises");
    emit(io.out.as_deref(), &json_report("geomlemma", &cfg, body))?;
    if report.all_hold() {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .assertions
            .iter()
            .filter(|x| !x.verdict)
            .map(|x| x.assertion.to_string())
            .collect();
        Err(Failure::Verdict(format!("assertion(s) {} failed", failed.join(", "))))
    }
}
