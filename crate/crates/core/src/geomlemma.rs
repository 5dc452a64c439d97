//! Finite grid computation behind the distance inequalities used to bound
//! overlap integrals between translated, rotated copies of the atomic
//! ground state.
//!
//! Points `z, y` of the disc `|x| < r0` are replaced by points of the grid
//! `Γ_δ = {(p1, p2)δ : |(p1, p2)|δ < r0 + δ/√2}`; every disc point lies within
//! `δ/√2` of the grid, so a margin above `4δ/√2` on the grid transfers to the
//! continuum.
//!
//! All comparisons carry a one-sided guard `margin_floor`, so a rounding
//! error can only turn a true inequality into a reported failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_geometry, Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub delta: f64,
    pub r0: f64,
    pub epsilon: f64,
    pub margin_floor: f64,
    /// Bound on `|m|∞` for the enumerated checks of assertions (2) and (3).
    pub index_bound: i64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            delta: 0.005,
            r0: 0.33 * edge_length(),
            epsilon: 1e-8,
            margin_floor: 1e-10,
            index_bound: 8,
        }
    }
}

fn edge_length() -> f64 {
    1.0 / 3f64.sqrt()
}

impl LemmaConfig {
    pub fn validate(&self) -> Result<()> {
        let e = edge_length();
        if !(self.r0 > 0.0 && self.r0 < 0.5 * e) {
            return Err(Error::InvalidInput(format!(
                "r0 = {} must lie in (0, {})",
                self.r0,
                0.5 * e
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.epsilon >= 0.0 && self.margin_floor >= 0.0) {
            return Err(Error::InvalidInput("epsilon and margin_floor must be >= 0".into()));
        }
        if self.index_bound < 1 {
            return Err(Error::InvalidInput("index_bound must be >= 1".into()));
        }
        Ok(())
    }

    /// `4δ/√2`, the discretisation slack.
    pub fn slack(&self) -> f64 {
        4.0 * self.delta * FRAC_1_SQRT_2
    }
}

/// Grid points ordered by `p2`, then `p1`.
pub fn build_grid(cfg: &LemmaConfig) -> Vec<Vec2> {
    let bound = cfg.r0 + cfg.delta * FRAC_1_SQRT_2;
    let p_max = (bound / cfg.delta).ceil() as i64;
    let mut out = Vec::new();
    for p2 in -p_max..=p_max {
        for p1 in -p_max..=p_max {
            let x = Vec2::new(p1 as f64 * cfg.delta, p2 as f64 * cfg.delta);
            if x.norm() < bound {
                out.push(x);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: Vec2,
    pub y: Vec2,
    pub l0: Option<u8>,
    /// The lattice index `m` or `n`, where the assertion has one.
    pub index: Option<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionReport {
    pub assertion: u8,
    pub checked: u64,
    pub min_margin: f64,
    /// Margin in units of `|e_{A,1}|`, the measured constant.
    pub constant: f64,
    pub witness: Option<Witness>,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub config: LemmaConfig,
    pub grid_size: usize,
    pub assertions: Vec<AssertionReport>,
    /// `{m : |e_{A,1} + m·v| = |e_{A,1}|}` found by enumeration.
    pub n_bad: Vec<[i64; 2]>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.assertions.iter().all(|a| a.verdict)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Running minimum with its position in serial pair order, so the result
/// does not depend on how the work was split.
#[derive(Clone, Copy)]
struct Worst {
    margin: f64,
    order: (usize, usize, usize),
    witness: Option<Witness>,
}

impl Worst {
    const NONE: Worst = Worst {
        margin: f64::INFINITY,
        order: (usize::MAX, usize::MAX, usize::MAX),
        witness: None,
    };

    fn offer(&mut self, margin: f64, order: (usize, usize, usize), w: impl FnOnce() -> Witness) {
        if margin < self.margin || (margin == self.margin && order < self.order) {
            self.margin = margin;
            self.order = order;
            self.witness = Some(w());
        }
    }

    fn merge(a: Worst, b: Worst) -> Worst {
        if b.margin < a.margin || (b.margin == a.margin && b.order < a.order) {
            b
        } else {
            a
        }
    }
}

fn rotations() -> [Mat2; 6] {
    let r = build_geometry().r60;
    [0, 1, 2, 3, 4, 5].map(|l| r.pow(l))
}

/// Max over `l0` of `f(l0)` and the first maximiser.
fn best_l0(f: impl Fn(usize) -> f64) -> (f64, u8) {
    let mut best = (f64::NEG_INFINITY, 0u8);
    for l in 0..6 {
        let v = f(l);
        if v > best.0 {
            best = (v, l as u8);
        }
    }
    best
}

fn pairs_over(grid: &[Vec2], body: impl Fn(usize, usize, &mut Worst) + Sync) -> Worst {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::NONE;
            for j in 0..grid.len() {
                body(i, j, &mut w);
            }
            w
        })
        .reduce(|| Worst::NONE, Worst::merge)
}

fn finish(assertion: u8, cfg: &LemmaConfig, checked: u64, worst: Worst) -> AssertionReport {
    AssertionReport {
        assertion,
        checked,
        min_margin: worst.margin,
        constant: worst.margin / edge_length(),
        witness: worst.witness,
        verdict: worst.margin > cfg.margin_floor,
    }
}

/// `min over pairs of max_l0 (|z+e-y| - |z - R60^l0 y|) - 4δ/√2`.
pub fn verify_assertion1(cfg: &LemmaConfig) -> AssertionReport {
    let grid = build_grid(cfg);
    let e = build_geometry().e_a[0];
    let rots = rotations();
    let slack = cfg.slack();
    let worst = pairs_over(&grid, |i, j, w| {
        let (z, y) = (grid[i], grid[j]);
        let lhs = (z + e - y).norm();
        let (best, l0) = best_l0(|l| lhs - (z - rots[l].apply(y)).norm());
        w.offer(best - slack, (i, j, 0), || Witness { z, y, l0: Some(l0), index: None });
    });
    let n = grid.len() as u64;
    finish(1, cfg, n * n, worst)
}

/// Nonzero `n` with `|n·v| ≤ |e| + 3r0 + ε`.
pub fn assertion4_indices(cfg: &LemmaConfig) -> Vec<[i64; 2]> {
    let geo = build_geometry();
    let bound = edge_length() + 3.0 * cfg.r0 + cfg.epsilon;
    // |n·v| ≥ |n|∞ · √3/2, so this window holds every candidate
    let w = (bound / (0.5 * 3f64.sqrt())).ceil() as i64 + 1;
    let mut out = Vec::new();
    for a in -w..=w {
        for b in -w..=w {
            if (a, b) != (0, 0) && geo.lattice_vec(a, b).norm() <= bound {
                out.push([a, b]);
            }
        }
    }
    out
}

/// For each pair and each candidate `n`:
/// `max_l0 (|z+n·v-y| - |z+e-R60^l0 y|) - 4δ/√2 - ε`.
pub fn verify_assertion4(cfg: &LemmaConfig) -> AssertionReport {
    let geo = build_geometry();
    let grid = build_grid(cfg);
    let e = geo.e_a[0];
    let rots = rotations();
    let ns = assertion4_indices(cfg);
    let nv: Vec<Vec2> = ns.iter().map(|n| geo.lattice_vec(n[0], n[1])).collect();
    let guard = cfg.slack() + cfg.epsilon;
    let worst = pairs_over(&grid, |i, j, w| {
        let (z, y) = (grid[i], grid[j]);
        let rhs: [f64; 6] = std::array::from_fn(|l| (z + e - rots[l].apply(y)).norm());
        for (k, v) in nv.iter().enumerate() {
            let lhs = (z + *v - y).norm();
            let (best, l0) = best_l0(|l| lhs - rhs[l]);
            w.offer(best - guard, (i, j, k), || Witness {
                z,
                y,
                l0: Some(l0),
                index: Some(ns[k]),
            });
        }
    });
    let n = grid.len() as u64;
    finish(4, cfg, n * n * ns.len() as u64, worst)
}

/// Sector index of `x` in `[0, 6)`, counter-clockwise from the positive axis.
fn sector(x: Vec2) -> usize {
    let t = x.y.atan2(x.x).rem_euclid(2.0 * PI);
    ((t / (PI / 3.0)).floor() as usize).min(5)
}

/// Assertion (2) over `0 < |m|∞ ≤ index_bound` with `l0` chosen so that `z`
/// and `R60^l0 y` share a 60° sector and `c'' = |e|·10⁻⁶/2`; assertion (3)
/// as the enumerated claim `|e + m·v| > |e| + 3r0 + ε` off `N_bad`.
pub fn verify_assertions23_bounded(cfg: &LemmaConfig) -> (AssertionReport, AssertionReport) {
    let geo = build_geometry();
    let grid = build_grid(cfg);
    let rots = rotations();
    let c2 = 0.5 * edge_length() * 1e-6;
    let b = cfg.index_bound;
    // indices sorted by |m·v| so the scan below can stop early
    let mut ms: Vec<([i64; 2], Vec2, f64)> = (-b..=b)
        .flat_map(|m1| (-b..=b).map(move |m2| [m1, m2]))
        .filter(|m| *m != [0, 0])
        .map(|m| {
            let v = geo.lattice_vec(m[0], m[1]);
            (m, v, ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt())
        })
        .collect();
    ms.sort_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(a.0.cmp(&b.0)));
    let max_m = ms.iter().map(|m| m.2).fold(0.0, f64::max);
    let worst2 = pairs_over(&grid, |i, j, w| {
        let (z, y) = (grid[i], grid[j]);
        // clockwise rotation by l0·60° moves y back by l0 sectors
        let l0 = if z.norm() == 0.0 || y.norm() == 0.0 {
            0
        } else {
            (sector(y) + 6 - sector(z)) % 6
        };
        let rot = (z - rots[l0].apply(y)).norm();
        let d = z - y;
        let dn = d.norm();
        let mut local = f64::INFINITY;
        let mut arg = 0;
        for (k, (_, v, mn)) in ms.iter().enumerate() {
            // |d - m·v| ≥ |m·v| - |d|; later entries cannot beat `local`
            if v.norm() - dn - rot - c2 * max_m > local {
                break;
            }
            let margin = (d - *v).norm() - rot - c2 * mn;
            if margin < local {
                local = margin;
                arg = k;
            }
        }
        w.offer(local, (i, j, arg), || Witness {
            z,
            y,
            l0: Some(l0 as u8),
            index: Some(ms[arg].0),
        });
    });
    let n = grid.len() as u64;
    let a2 = finish(2, cfg, n * n * ms.len() as u64, worst2);

    let e = geo.e_a[0];
    let bad = n_bad(cfg.index_bound);
    let threshold = e.norm() + 3.0 * cfg.r0 + cfg.epsilon;
    let mut worst3 = Worst::NONE;
    let mut checked = 0;
    for (k, (m, v, _)) in ms.iter().enumerate() {
        if bad.contains(m) {
            continue;
        }
        checked += 1;
        worst3.offer((e + *v).norm() - threshold, (k, 0, 0), || Witness {
            z: Vec2::ZERO,
            y: Vec2::ZERO,
            l0: None,
            index: Some(*m),
        });
    }
    (a2, finish(3, cfg, checked, worst3))
}

/// `m` with `|e_{A,1} + m·v| = |e_{A,μ}|`, by enumeration over `|m|∞ ≤ bound`.
pub fn n_bad(bound: i64) -> Vec<[i64; 2]> {
    let geo = build_geometry();
    let e = geo.e_a[0];
    let mut out = Vec::new();
    for m1 in -bound..=bound {
        for m2 in -bound..=bound {
            if ((e + geo.lattice_vec(m1, m2)).norm() - e.norm()).abs() < 1e-12 {
                out.push([m1, m2]);
            }
        }
    }
    out
}

/// Runs all four checks.
pub fn run_lemma(cfg: &LemmaConfig) -> Result<LemmaReport> {
    cfg.validate()?;
    let a1 = verify_assertion1(cfg);
    let (a2, a3) = verify_assertions23_bounded(cfg);
    let a4 = verify_assertion4(cfg);
    Ok(LemmaReport {
        config: *cfg,
        grid_size: build_grid(cfg).len(),
        assertions: vec![a1, a2, a3, a4],
        n_bad: n_bad(cfg.index_bound),
    })
}
