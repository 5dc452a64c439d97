//! Truncated plane-wave Floquet–Bloch solver for
//! `H(k) = -(∇ + ik)² + λ²V + ηW` and the diagnostics built on it.
//!
//! A `k`-pseudo-periodic function is expanded as
//! `ψ(x) = Σ_m a_m e^{i(k + m·k⃗)·x}` over the index ball `|m|∞ ≤ N`,
//! ordered row-major in `(m1, m2)`.

use std::f64::consts::PI;

use faer::{c64, Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomic::{hankel_transform, GroundState, RadialFn};
use crate::eigen::{lowest, Solver};
use crate::error::{Error, Result};
use crate::lattice::{build_geometry, HoneycombGeometry, Vec2};
use crate::potential::{periodize, FourierPotential, CELL_AREA};
use crate::tightbinding::{h_tb_with, wallace_with};

/// `τ = e^{2πi/3}`.
pub fn tau() -> c64 {
    c64::cis(2.0 * PI / 3.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochProblem {
    pub v: FourierPotential,
    pub lambda: f64,
    /// Truncation radius, indices `|m|∞ ≤ n`.
    pub n: usize,
    pub eta: f64,
    pub w: Option<FourierPotential>,
    pub solver: Solver,
}

impl BlochProblem {
    pub fn new(v: FourierPotential, lambda: f64, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("truncation radius must be >= 4, got {n}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        Ok(BlochProblem {
            v,
            lambda,
            n,
            eta: 0.0,
            w: None,
            solver: Solver::Auto,
        })
    }

    /// The honeycomb periodisation of `gs.well` at `gs.lambda`, with the
    /// potential table cut off at `2n`.
    pub fn periodized(gs: &GroundState, n: usize) -> Result<Self> {
        Self::new(periodize(&gs.well, 2 * n), gs.lambda, n)
    }

    pub fn with_perturbation(mut self, w: FourierPotential, eta: f64) -> Self {
        self.w = Some(w);
        self.eta = eta;
        self
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        BlochProblem { eta, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        (2 * self.n + 1).pow(2)
    }

    pub fn basis(&self) -> Vec<(i64, i64)> {
        let n = self.n as i64;
        (-n..=n).flat_map(|a| (-n..=n).map(move |b| (a, b))).collect()
    }

    pub fn index(&self, m1: i64, m2: i64) -> Option<usize> {
        let n = self.n as i64;
        if m1.abs() > n || m2.abs() > n {
            return None;
        }
        Some(((m1 + n) * (2 * n + 1) + m2 + n) as usize)
    }

    /// `λ²V̂(d) + ηŴ(d)` for `|d|∞ ≤ 2N`.
    fn coupling(&self) -> Result<Coupling> {
        let span = 2 * self.n as i64;
        let side = (2 * span + 1) as usize;
        let lam2 = self.lambda * self.lambda;
        let mut table = vec![c64::new(0.0, 0.0); side * side];
        for d1 in -span..=span {
            for d2 in -span..=span {
                let mut c = self.v.coeff(d1, d2)? * lam2;
                if let (Some(w), true) = (&self.w, self.eta != 0.0) {
                    c += w.coeff(d1, d2)? * self.eta;
                }
                table[((d1 + span) as usize) * side + (d2 + span) as usize] = c;
            }
        }
        Ok(Coupling { span, side, table })
    }

    /// Matrix of a potential alone in this basis.
    fn potential_matrix(&self, p: &FourierPotential) -> Result<Mat<c64>> {
        let basis = self.basis();
        let span = 2 * self.n as i64;
        for d1 in -span..=span {
            for d2 in -span..=span {
                p.coeff(d1, d2)?;
            }
        }
        Ok(Mat::from_fn(basis.len(), basis.len(), |i, j| {
            let (a, b) = (basis[i], basis[j]);
            p.coeff(a.0 - b.0, a.1 - b.1).unwrap()
        }))
    }
}

struct Coupling {
    span: i64,
    side: usize,
    table: Vec<c64>,
}

impl Coupling {
    fn get(&self, d1: i64, d2: i64) -> c64 {
        self.table[((d1 + self.span) as usize) * self.side + (d2 + self.span) as usize]
    }
}

/// The Hermitian matrix of `H(k)` on the truncated basis. `k` is used as
/// given, without reduction to the Brillouin zone.
pub fn assemble_hk(prob: &BlochProblem, k: Vec2) -> Result<Mat<c64>> {
    let geo = build_geometry();
    let basis = prob.basis();
    let coupling = prob.coupling()?;
    let kinetic: Vec<f64> = basis
        .iter()
        .map(|&(a, b)| (k + geo.dual_vec(a, b)).norm_sq())
        .collect();
    Ok(Mat::from_fn(basis.len(), basis.len(), |i, j| {
        let (a, b) = (basis[i], basis[j]);
        let mut v = coupling.get(a.0 - b.0, a.1 - b.1);
        if i == j {
            v = c64::new(kinetic[i] + v.re, 0.0);
        }
        v
    }))
}

/// Lowest `n_bands` eigenvalues of `H(k)` for `k` used as given.
pub fn eigenvalues_at(prob: &BlochProblem, k: Vec2, n_bands: usize) -> Result<Vec<f64>> {
    let h = assemble_hk(prob, k)?;
    Ok(lowest(&h, n_bands, false, prob.solver)?.values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub kpoints: Vec<Vec2>,
    /// Per `k`, ascending.
    pub energies: Vec<Vec<f64>>,
    pub n_bands: usize,
    pub lambda: f64,
    pub n: usize,
}

impl BandStructure {
    /// One row per `k`: `k1_frac, k2_frac, E_1..E_n`, with `k = k1_frac k1 + k2_frac k2`.
    pub fn to_csv(&self) -> String {
        let geo = build_geometry();
        let mut s = String::from("k1_frac,k2_frac");
        for b in 1..=self.n_bands {
            s.push_str(&format!(",E_{b}"));
        }
        s.push('\n');
        for (k, es) in self.kpoints.iter().zip(&self.energies) {
            let (f1, f2) = geo.dual_coords(*k);
            // keep "-0.000…" out of the table
            let clean = |f: f64| if f.abs() < 1e-13 { 0.0 } else { f };
            let (f1, f2) = (clean(f1), clean(f2));
            s.push_str(&format!("{f1:.12},{f2:.12}"));
            for e in es {
                s.push_str(&format!(",{e:.12}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Lowest `n_bands` bands at each `k`, after reducing `k` to the
/// Brillouin zone so the truncated basis is the same for equivalent points.
pub fn band_path(prob: &BlochProblem, kpoints: &[Vec2], n_bands: usize) -> Result<BandStructure> {
    if n_bands == 0 || n_bands > prob.dim() {
        return Err(Error::InvalidInput(format!(
            "n_bands = {n_bands} must be in 1..={}",
            prob.dim()
        )));
    }
    let geo = build_geometry();
    let energies = kpoints
        .par_iter()
        .map(|k| eigenvalues_at(prob, geo.reduce_to_bz(*k).0, n_bands))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure {
        kpoints: kpoints.to_vec(),
        energies,
        n_bands,
        lambda: prob.lambda,
        n: prob.n,
    })
}

/// `Γ → K → M → Γ` with `M = k1/2` the edge midpoint next to `K`;
/// `per_segment` points per leg, closing point included.
pub fn high_symmetry_path(per_segment: usize) -> Vec<Vec2> {
    let geo = build_geometry();
    let corners = [Vec2::ZERO, geo.k_point(), 0.5 * geo.k1, Vec2::ZERO];
    let mut out = Vec::with_capacity(3 * per_segment + 1);
    for leg in corners.windows(2) {
        for i in 0..per_segment {
            let t = i as f64 / per_segment as f64;
            out.push(leg[0] + t * (leg[1] - leg[0]));
        }
    }
    out.push(Vec2::ZERO);
    out
}

fn vertex_check(geo: &HoneycombGeometry, kstar: Vec2) -> Result<()> {
    if geo.kvert.iter().any(|v| (*v - kstar).norm() < 1e-9) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "({}, {}) is not a Brillouin-zone vertex",
            kstar.x, kstar.y
        )))
    }
}

/// Applies `ℛ[f](x) = f(c + R*(x - c))` to a `K*`-pseudo-periodic
/// coefficient vector. Returns the image and the mass of coefficients
/// whose rotated index leaves the ball.
pub fn apply_rotation(prob: &BlochProblem, kstar: Vec2, a: &[c64]) -> Result<(Vec<c64>, f64)> {
    let geo = build_geometry();
    let c = prob.v.center;
    let shift = c - geo.r120.transpose().apply(c);
    let mut out = vec![c64::new(0.0, 0.0); a.len()];
    let mut leak = 0.0;
    for (i, &(m1, m2)) in prob.basis().iter().enumerate() {
        let q = kstar + geo.dual_vec(m1, m2);
        let rq = geo.r120.apply(q);
        let (f1, f2) = geo.dual_coords(rq - kstar);
        let (n1, n2) = (f1.round(), f2.round());
        if (f1 - n1).abs() > 1e-8 || (f2 - n2).abs() > 1e-8 {
            return Err(Error::InvalidInput("rotation does not fix the quasi-momentum".into()));
        }
        let phase = c64::cis(q.dot(shift));
        match prob.index(n1 as i64, n2 as i64) {
            Some(j) => out[j] += phase * a[i],
            None => leak += a[i].norm_sqr(),
        }
    }
    Ok((out, leak))
}

fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn col(m: &Mat<c64>, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// Eigen-decomposition of a 2×2 complex matrix; eigenvectors normalised.
fn eig2(m: [[c64; 2]; 2]) -> [(c64, [c64; 2]); 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    let mus = [(tr + disc) * 0.5, (tr - disc) * 0.5];
    mus.map(|mu| {
        let v1 = [m[0][1], mu - m[0][0]];
        let v2 = [mu - m[1][1], m[1][0]];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n < 1e-30 {
            // M is (numerically) scalar; any basis works
            return (mu, [c64::new(1.0, 0.0), c64::new(0.0, 0.0)]);
        }
        let s = n.sqrt();
        (mu, [v[0] / s, v[1] / s])
    })
}

/// The degenerate pair at a vertex, split into `ℛ` eigenvectors.
#[derive(Debug, Clone)]
pub struct DegeneratePair {
    pub e1: f64,
    pub e2: f64,
    /// Eigenvector with `ℛ`-eigenvalue nearest `τ`.
    pub phi_tau: Vec<c64>,
    /// Eigenvector with `ℛ`-eigenvalue nearest `τ̄`.
    pub phi_tau_bar: Vec<c64>,
    pub mu_tau: c64,
    pub mu_tau_bar: c64,
    pub leak: f64,
    /// 0 if `Φ_τ` lies mostly along the lower eigenvector, else 1.
    pub tau_index: usize,
}

impl DegeneratePair {
    pub fn e_d(&self) -> f64 {
        0.5 * (self.e1 + self.e2)
    }

    pub fn split(&self) -> f64 {
        self.e2 - self.e1
    }

    /// `max(|μ_τ - τ|, |μ_τ̄ - τ̄|)`.
    pub fn rotation_defect(&self) -> f64 {
        (self.mu_tau - tau()).norm().max((self.mu_tau_bar - tau().conj()).norm())
    }
}

fn default_tolerance(prob: &BlochProblem) -> f64 {
    1e-5 * prob.lambda * prob.lambda
}

/// Two lowest eigenpairs at a vertex and their rotation labels.
pub fn degenerate_pair(prob: &BlochProblem, kstar: Vec2, tol: Option<f64>) -> Result<DegeneratePair> {
    let geo = build_geometry();
    vertex_check(&geo, kstar)?;
    let h = assemble_hk(prob, kstar)?;
    let eig = lowest(&h, 2, true, prob.solver)?;
    let (e1, e2) = (eig.values[0], eig.values[1]);
    let tolerance = tol.unwrap_or_else(|| default_tolerance(prob));
    if e2 - e1 > tolerance {
        return Err(Error::NotDegenerate {
            split: e2 - e1,
            tolerance,
        });
    }
    let u = eig.vectors.expect("vectors requested");
    let us = [col(&u, 0), col(&u, 1)];
    let mut m = [[c64::new(0.0, 0.0); 2]; 2];
    let mut leak: f64 = 0.0;
    for j in 0..2 {
        let (ru, l) = apply_rotation(prob, kstar, &us[j])?;
        leak = leak.max(l);
        for i in 0..2 {
            m[i][j] = inner(&us[i], &ru);
        }
    }
    if leak > 1e-6 {
        return Err(Error::RotationLeak { leak });
    }
    let pairs = eig2(m);
    let t = tau();
    let (ti, bi) = if (pairs[0].0 - t).norm() <= (pairs[1].0 - t).norm() { (0, 1) } else { (1, 0) };
    let combine = |c: [c64; 2]| -> Vec<c64> {
        let mut v: Vec<c64> = us[0].iter().zip(&us[1]).map(|(a, b)| a * c[0] + b * c[1]).collect();
        let nv = inner(&v, &v).re.sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        v
    };
    Ok(DegeneratePair {
        e1,
        e2,
        phi_tau: combine(pairs[ti].1),
        phi_tau_bar: combine(pairs[bi].1),
        mu_tau: pairs[ti].0,
        mu_tau_bar: pairs[bi].0,
        leak,
        tau_index: if pairs[ti].1[0].norm_sqr() >= 0.5 { 0 } else { 1 },
    })
}

/// `E_D` and the split at a vertex, eigenvalues only.
pub fn dirac_energy(prob: &BlochProblem, kstar: Vec2, tol: Option<f64>) -> Result<(f64, f64)> {
    vertex_check(&build_geometry(), kstar)?;
    let e = eigenvalues_at(prob, kstar, 2)?;
    let tolerance = tol.unwrap_or_else(|| default_tolerance(prob));
    if e[1] - e[0] > tolerance {
        return Err(Error::NotDegenerate {
            split: e[1] - e[0],
            tolerance,
        });
    }
    Ok((0.5 * (e[0] + e[1]), e[1] - e[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracOptions {
    /// Degeneracy tolerance; `None` means `1e-5·λ²`.
    pub degeneracy_tol: Option<f64>,
    /// Finite-difference offset `|κ|` for the Fermi velocity.
    pub fd_step: f64,
    /// Angle of the first finite-difference direction.
    pub fd_angle: f64,
}

impl Default for DiracOptions {
    fn default() -> Self {
        DiracOptions {
            degeneracy_tol: None,
            fd_step: 1e-3,
            fd_angle: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracReport {
    pub kstar: Vec2,
    pub lambda: f64,
    pub n: usize,
    pub e_d: f64,
    pub split: f64,
    pub v_f: f64,
    /// Slopes along the two orthogonal directions.
    pub v_f_dirs: [f64; 2],
    /// `v_F / ((√3/2) ρ_λ)` when `ρ_λ` is known.
    pub v_f_ratio: Option<f64>,
    pub rho: Option<f64>,
    /// `(E_D - E0)/ρ_λ` when the ground state is known.
    pub h0: Option<f64>,
    pub tau_index: usize,
    /// `ℛ` eigenvalues as `[re, im]`, the `τ` one first.
    pub rotation_eigenvalues: [[f64; 2]; 2],
    pub rotation_defect: f64,
    pub rotation_leak: f64,
    /// Coefficients of `Φ₁` (`ℛΦ₁ = τΦ₁`) as `[re, im]` in basis order.
    pub phi1: Vec<[f64; 2]>,
    /// Coefficients of `Φ₂` (`ℛΦ₂ = τ̄Φ₂`).
    pub phi2: Vec<[f64; 2]>,
}

impl DiracReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Half the gap between the two lowest bands at `k`.
fn half_gap(prob: &BlochProblem, k: Vec2) -> Result<f64> {
    let e = eigenvalues_at(prob, k, 2)?;
    Ok(0.5 * (e[1] - e[0]))
}

/// Slopes of `(E₂ - E₁)/2` at `kstar` along two orthogonal directions by
/// symmetric differences.
pub fn cone_slopes(prob: &BlochProblem, kstar: Vec2, opts: &DiracOptions) -> Result<[f64; 2]> {
    let h = opts.fd_step;
    let g0 = half_gap(prob, kstar)?;
    let dirs = [
        Vec2::from_angle(opts.fd_angle),
        Vec2::from_angle(opts.fd_angle + 0.5 * PI),
    ];
    let mut out = [0.0; 2];
    for (o, d) in out.iter_mut().zip(dirs) {
        let gp = half_gap(prob, kstar + h * d)?;
        let gm = half_gap(prob, kstar - h * d)?;
        *o = (gp + gm - 2.0 * g0) / (2.0 * h);
    }
    Ok(out)
}

pub fn dirac_point(prob: &BlochProblem, kstar: Vec2) -> Result<DiracReport> {
    dirac_point_with(prob, kstar, &DiracOptions::default(), None)
}

pub fn dirac_point_with(
    prob: &BlochProblem,
    kstar: Vec2,
    opts: &DiracOptions,
    gs: Option<&GroundState>,
) -> Result<DiracReport> {
    let pair = degenerate_pair(prob, kstar, opts.degeneracy_tol)?;
    let dirs = cone_slopes(prob, kstar, opts)?;
    let v_f = 0.5 * (dirs[0] + dirs[1]);
    let rho = gs.map(|g| g.rho);
    let to_pairs = |v: &[c64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    Ok(DiracReport {
        kstar,
        lambda: prob.lambda,
        n: prob.n,
        e_d: pair.e_d(),
        split: pair.split(),
        v_f,
        v_f_dirs: dirs,
        v_f_ratio: rho.map(|r| v_f / (0.5 * 3f64.sqrt() * r)),
        rho,
        h0: gs.map(|g| (pair.e_d() - g.e0) / g.rho),
        tau_index: pair.tau_index,
        rotation_eigenvalues: [
            [pair.mu_tau.re, pair.mu_tau.im],
            [pair.mu_tau_bar.re, pair.mu_tau_bar.im],
        ],
        rotation_defect: pair.rotation_defect(),
        rotation_leak: pair.leak,
        phi1: to_pairs(&pair.phi_tau),
        phi2: to_pairs(&pair.phi_tau_bar),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiVelocity {
    pub v_f: f64,
    pub ratio: f64,
    pub dirs: [f64; 2],
}

/// `v_F` at `kstar` and its ratio to the tight-binding value `(√3/2) ρ_λ`.
pub fn fermi_velocity(prob: &BlochProblem, gs: &GroundState, kstar: Vec2) -> Result<FermiVelocity> {
    let opts = DiracOptions::default();
    dirac_energy(prob, kstar, opts.degeneracy_tol)?;
    let dirs = cone_slopes(prob, kstar, &opts)?;
    let v_f = 0.5 * (dirs[0] + dirs[1]);
    Ok(FermiVelocity {
        v_f,
        ratio: v_f / (0.5 * 3f64.sqrt() * gs.rho),
        dirs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub k: Vec2,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub wtb: f64,
    pub dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    pub lambda: f64,
    pub n: usize,
    pub e_d: f64,
    pub rho: f64,
    pub rows: Vec<DispersionRow>,
    pub sup_dev: f64,
    /// `μ₋ ≤ 0 ≤ μ₊` at every row.
    pub sign_ok: bool,
}

/// Twelve quasi-momenta on `Γ → M → K → Γ` where `𝒲_TB ≥ 1/2`, plus two
/// rotated copies.
pub fn dispersion_kset() -> Vec<Vec2> {
    let geo = build_geometry();
    let (g, m, k) = (Vec2::ZERO, 0.5 * geo.k1, geo.k_point());
    let lerp = |a: Vec2, b: Vec2, t: f64| a + t * (b - a);
    let mut out = vec![
        g,
        lerp(g, m, 0.25),
        lerp(g, m, 0.5),
        lerp(g, m, 0.75),
        m,
        lerp(m, k, 0.5),
        lerp(k, g, 0.25),
        lerp(k, g, 0.5),
        lerp(k, g, 0.75),
        lerp(g, m, 0.9),
    ];
    out.push(geo.r120.apply(out[2]));
    out.push(geo.r120.apply(out[7]));
    out
}

/// `μ_± = (E_±(k) - E_D)/ρ_λ` against `±𝒲_TB(k)`; `E_D` from the vertex `K`.
pub fn rescaled_dispersion(prob: &BlochProblem, gs: &GroundState, kset: &[Vec2]) -> Result<DispersionTable> {
    let geo = build_geometry();
    let (e_d, _) = dirac_energy(prob, geo.k_point(), None)?;
    let band = band_path(prob, kset, 2)?;
    let rho = gs.rho;
    let rows: Vec<DispersionRow> = kset
        .iter()
        .zip(&band.energies)
        .map(|(k, e)| {
            let mu_minus = (e[0] - e_d) / rho;
            let mu_plus = (e[1] - e_d) / rho;
            let wtb = wallace_with(&geo, *k);
            DispersionRow {
                k: *k,
                mu_minus,
                mu_plus,
                wtb,
                dev: (mu_minus + wtb).abs().max((mu_plus - wtb).abs()),
            }
        })
        .collect();
    Ok(DispersionTable {
        lambda: prob.lambda,
        n: prob.n,
        e_d,
        rho,
        sup_dev: rows.iter().map(|r| r.dev).fold(0.0, f64::max),
        sign_ok: rows.iter().all(|r| r.mu_minus <= 0.0 && r.mu_plus >= 0.0),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub eta: f64,
    pub gap: f64,
    pub theta_sharp: f64,
    pub predicted_gap: f64,
}

/// Gap at `kstar` for each `η`, against `2|θ♯|η` with
/// `θ♯ = ⟨Φ₁, WΦ₁⟩` from the unperturbed `τ` eigenvector.
pub fn gap_vs_eta(prob: &BlochProblem, kstar: Vec2, etas: &[f64]) -> Result<Vec<GapRow>> {
    let w = prob
        .w
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("gap scan needs a perturbation W".into()))?;
    if (w.center - prob.v.center).norm() > 1e-12 {
        // W must be odd about the same hexagon centre V is symmetric about
        return Err(Error::InvalidInput("W and V are centred at different points".into()));
    }
    let base = prob.with_eta(0.0);
    let pair = degenerate_pair(&base, kstar, None)?;
    let wm = base.potential_matrix(w)?;
    let phi = &pair.phi_tau;
    let x = Mat::from_fn(phi.len(), 1, |i, _| phi[i]);
    let wx = &wm * &x;
    let theta: c64 = (0..phi.len()).map(|i| phi[i].conj() * wx[(i, 0)]).sum();
    let theta_sharp = theta.re;
    etas.par_iter()
        .map(|&eta| {
            let e = eigenvalues_at(&prob.with_eta(eta), kstar, 2)?;
            Ok(GapRow {
                eta,
                gap: e[1] - e[0],
                theta_sharp,
                predicted_gap: 2.0 * theta_sharp.abs() * eta.abs(),
            })
        })
        .collect()
}

/// Coefficient vectors of the Bloch sums of `p₀` centred on the two
/// sublattices: `c_m(I) = p̂₀(|k + m·k⃗|) e^{-i m·k⃗·v_I} / |D|`.
pub fn approximate_modes(prob: &BlochProblem, gs: &GroundState, k: Vec2) -> (Vec<c64>, Vec<c64>) {
    let geo = build_geometry();
    let radial = RadialFn::from_ground_state(gs, 128);
    let basis = prob.basis();
    let vals: Vec<(c64, c64)> = basis
        .par_iter()
        .map(|&(m1, m2)| {
            let g = geo.dual_vec(m1, m2);
            let p = hankel_transform(&radial, (k + g).norm()) / CELL_AREA;
            (
                c64::cis(-g.dot(geo.v_a)) * p,
                c64::cis(-g.dot(geo.v_b)) * p,
            )
        })
        .collect();
    vals.into_iter().unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventReport {
    pub lambda: f64,
    pub n: usize,
    pub k: Vec2,
    pub z: [f64; 2],
    pub distance: f64,
    /// `|⟨P_A, P_B⟩| / (‖P_A‖ ‖P_B‖)`.
    pub overlap: f64,
    pub e_d: f64,
    pub rho: f64,
    /// Largest entry of `𝒥*((H - E_D)/ρ)𝒥 - H_TB(k)`.
    pub tb_defect: f64,
}

/// Largest eigenvalue of a Hermitian positive operator by Lanczos with
/// full reorthogonalisation.
fn top_eigenvalue(n: usize, apply: impl Fn(&[c64]) -> Vec<c64>, steps: usize) -> Result<f64> {
    let steps = steps.min(n);
    let mut q: Vec<Vec<c64>> = Vec::with_capacity(steps);
    let mut v: Vec<c64> = (0..n)
        .map(|i| c64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.05 * ((i * 104729) % 7) as f64))
        .collect();
    let nv = inner(&v, &v).re.sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for _ in 0..steps {
        let mut w = apply(&v);
        let a = inner(&v, &w).re;
        q.push(v.clone());
        for _ in 0..2 {
            for qi in &q {
                let c = inner(qi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        alpha.push(a);
        let b = inner(&w, &w).re.sqrt();
        if b < 1e-13 * a.abs().max(1e-300) {
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    let ev = t
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(*ev.last().expect("nonempty"))
}

/// `‖((H(k) - E_D)/ρ - z)⁻¹ - 𝒥 (H_TB(k) - z)⁻¹ 𝒥*‖` on the truncated space,
/// with `𝒥` the isometry onto the symmetrically orthonormalised modes.
pub fn resolvent_distance(prob: &BlochProblem, gs: &GroundState, k: Vec2, z: c64) -> Result<ResolventReport> {
    if z.im == 0.0 {
        return Err(Error::InvalidInput("z must be off the real axis".into()));
    }
    let geo = build_geometry();
    let (pa, pb) = approximate_modes(prob, gs, k);
    let saa = inner(&pa, &pa).re;
    let sbb = inner(&pb, &pb).re;
    let sab = inner(&pa, &pb);
    let overlap = sab.norm() / (saa * sbb).sqrt();
    if overlap >= 0.5 {
        return Err(Error::IllConditioned { overlap });
    }
    // S^{-1/2} for S = [[saa, sab], [conj sab, sbb]]
    let s = [[c64::new(saa, 0.0), sab], [sab.conj(), c64::new(sbb, 0.0)]];
    let es = eig2(s);
    let mut sinv = [[c64::new(0.0, 0.0); 2]; 2];
    for (mu, v) in es {
        let f = 1.0 / mu.re.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                sinv[i][j] += v[i] * v[j].conj() * f;
            }
        }
    }
    let dim = pa.len();
    let j_cols: [Vec<c64>; 2] = [0, 1].map(|c| {
        (0..dim)
            .map(|i| pa[i] * sinv[0][c] + pb[i] * sinv[1][c])
            .collect()
    });

    let (e_d, _) = dirac_energy(prob, geo.k_point(), None)?;
    let rho = gs.rho;
    let h = assemble_hk(prob, k)?;
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let u = eig.U();
    let a: Vec<f64> = (0..dim).map(|i| (eig.S().column_vector()[i].re - e_d) / rho).collect();

    // B = U* J in eigen-coordinates
    let jm = Mat::from_fn(dim, 2, |i, c| j_cols[c][i]);
    let b = u.adjoint() * &jm;
    let tb = h_tb_with(&geo, k);
    let m = tb.resolvent(z);

    let compressed: Vec<c64> = (0..4)
        .map(|idx| {
            let (r, c) = (idx / 2, idx % 2);
            (0..dim).map(|i| b[(i, r)].conj() * b[(i, c)] * a[i]).sum()
        })
        .collect();
    let mut tb_defect: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            tb_defect = tb_defect.max((compressed[2 * r + c] - tb.matrix[r][c]).norm());
        }
    }

    let diag: Vec<c64> = a.iter().map(|ai| (c64::new(*ai, 0.0) - z).inv()).collect();
    let apply_d = |v: &[c64], adjoint: bool| -> Vec<c64> {
        // D = Δ - B M B*, D* = Δ* - B M* B*
        let mut bv = [c64::new(0.0, 0.0); 2];
        for (c, slot) in bv.iter_mut().enumerate() {
            *slot = (0..dim).map(|i| b[(i, c)].conj() * v[i]).sum();
        }
        let mm = if adjoint {
            [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
        } else {
            m
        };
        let t = [
            mm[0][0] * bv[0] + mm[0][1] * bv[1],
            mm[1][0] * bv[0] + mm[1][1] * bv[1],
        ];
        (0..dim)
            .map(|i| {
                let d = if adjoint { diag[i].conj() } else { diag[i] };
                d * v[i] - (b[(i, 0)] * t[0] + b[(i, 1)] * t[1])
            })
            .collect()
    };
    let top = top_eigenvalue(dim, |v| apply_d(&apply_d(v, false), true), 80)?;
    Ok(ResolventReport {
        lambda: prob.lambda,
        n: prob.n,
        k,
        z: [z.re, z.im],
        distance: top.max(0.0).sqrt(),
        overlap,
        e_d,
        rho,
        tb_defect,
    })
}

/// Relative change of a headline number under `N → N + 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub value: f64,
    pub refined: f64,
    pub rel_change: f64,
    pub converged: bool,
}

/// Flags a value as converged when refining changes it by less than 1%.
pub fn convergence_check(value: f64, refined: f64) -> ConvergenceCheck {
    let rel_change = (refined - value).abs() / refined.abs().max(f64::MIN_POSITIVE);
    ConvergenceCheck {
        value,
        refined,
        rel_change,
        converged: rel_change < 0.01,
    }
}
