//! Dual slices `ξ ↦ E_b(K* + ξ𝔎₂)`, `|ξ| ≤ 1/2`, of the two lowest bands
//! along a rational edge, and the spectral no-fold check: the level
//! `E = E_D` may meet the two curves only at Dirac points.

use serde::{Deserialize, Serialize};

use crate::bloch::{band_path, dirac_energy, BlochProblem};
use crate::error::{Error, Result};
use crate::lattice::{build_geometry, EdgeSpec, Vec2};
use crate::tightbinding::wallace_with;

/// A point of the slice lying on a Brillouin-zone vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceVertex {
    pub xi: f64,
    /// Whether the vertex is equivalent to `K*` itself (`false`: the other
    /// orbit).
    pub same_class: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSlice {
    pub edge: EdgeSpec,
    pub kstar: Vec2,
    pub lambda: f64,
    pub xis: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub e_d: f64,
    /// Split of the lowest pair at `K*`.
    pub dirac_split: f64,
    pub vertices: Vec<SliceVertex>,
}

impl BandSlice {
    pub fn step(&self) -> f64 {
        1.0 / (self.xis.len() - 1) as f64
    }

    /// Whether the slice meets both vertex orbits.
    pub fn meets_both_orbits(&self) -> bool {
        self.vertices.iter().any(|v| v.same_class) && self.vertices.iter().any(|v| !v.same_class)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("xi,E1,E2,E_D\n");
        for i in 0..self.xis.len() {
            s.push_str(&format!(
                "{:.12},{:.12},{:.12},{:.12}\n",
                self.xis[i], self.e1[i], self.e2[i], self.e_d
            ));
        }
        s
    }
}

/// Points `ξ ∈ {-1/3, 0, 1/3}` where the slice meets a vertex; no other `ξ`
/// can, because `𝔎₂` is primitive and `3K ∈ Λ*`.
fn slice_vertices(kstar: Vec2, dir: Vec2) -> Vec<SliceVertex> {
    let geo = build_geometry();
    [-1.0 / 3.0, 0.0, 1.0 / 3.0]
        .into_iter()
        .filter_map(|xi| {
            let k = kstar + xi * dir;
            if wallace_with(&geo, k) >= 1e-9 {
                return None;
            }
            let (f1, f2) = geo.dual_coords(k - kstar);
            let same_class = (f1 - f1.round()).abs() < 1e-9 && (f2 - f2.round()).abs() < 1e-9;
            Some(SliceVertex { xi, same_class })
        })
        .collect()
}

/// The two lowest bands at `M` equally spaced `ξ ∈ [-1/2, 1/2]`.
pub fn dual_slice(prob: &BlochProblem, edge: &EdgeSpec, kstar: Vec2, m: usize) -> Result<BandSlice> {
    if m < 41 || m % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "slice sample count must be odd and >= 41, got {m}"
        )));
    }
    let (e_d, dirac_split) = dirac_energy(prob, kstar, None)?;
    let xis: Vec<f64> = (0..m).map(|j| -0.5 + j as f64 / (m - 1) as f64).collect();
    let ks: Vec<Vec2> = xis.iter().map(|&xi| kstar + xi * edge.dual2).collect();
    let bands = band_path(prob, &ks, 2)?;
    let (e1, e2) = bands.energies.iter().map(|e| (e[0], e[1])).unzip();
    Ok(BandSlice {
        edge: *edge,
        kstar,
        lambda: prob.lambda,
        xis,
        e1,
        e2,
        e_d,
        dirac_split,
        vertices: slice_vertices(kstar, edge.dual2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// 1 or 2.
    pub band: u8,
    /// Interpolated location.
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NofoldVerdict {
    pub holds: bool,
    pub crossings: Vec<Crossing>,
    pub exclusion_steps: usize,
    pub tol: f64,
}

/// Default exclusion half-width around each Dirac sample, in grid steps.
pub const DEFAULT_EXCLUSION: usize = 2;

pub fn nofold_check(slice: &BandSlice, tol: f64) -> NofoldVerdict {
    nofold_check_with(slice, tol, DEFAULT_EXCLUSION)
}

/// Sign changes of `E_b(ξ) - E_D` away from the Dirac points. Samples with
/// `|E_b - E_D| ≤ tol` are treated as zero: a run of them between opposite
/// signs is one crossing, between equal signs a tangential touch.
///
/// Inside an exclusion window the cone fixes the sign (`E1 < E_D < E2`), so
/// each window acts as a sample of that sign. A band sitting on the wrong
/// side of `E_D` right next to a Dirac point therefore still registers a
/// crossing, placed between the window and the first sample outside it.
pub fn nofold_check_with(slice: &BandSlice, tol: f64, exclusion_steps: usize) -> NofoldVerdict {
    let step = slice.step();
    let excluded = |xi: f64| {
        slice
            .vertices
            .iter()
            .any(|v| (xi - v.xi).abs() <= (exclusion_steps as f64 + 1e-9) * step)
    };
    let mut crossings = Vec::new();
    for (band, values, expected) in [(1u8, &slice.e1, -1i8), (2u8, &slice.e2, 1i8)] {
        // (sign, pinned by a window)
        let signs: Vec<(i8, bool)> = slice
            .xis
            .iter()
            .zip(values.iter())
            .map(|(&xi, &e)| {
                if excluded(xi) {
                    (expected, true)
                } else {
                    let f = e - slice.e_d;
                    (if f.abs() <= tol { 0 } else if f > 0.0 { 1 } else { -1 }, false)
                }
            })
            .collect();
        let mut last: Option<(usize, i8, bool)> = None;
        let mut zero_start: Option<usize> = None;
        for (j, &(s, pinned)) in signs.iter().enumerate() {
            if s == 0 {
                zero_start.get_or_insert(j);
                continue;
            }
            if let Some((i, prev, prev_pinned)) = last {
                if prev != s {
                    let xi = match zero_start {
                        Some(z) => 0.5 * (slice.xis[z] + slice.xis[j - 1]),
                        None if pinned || prev_pinned => 0.5 * (slice.xis[i] + slice.xis[j]),
                        None => {
                            let (fa, fb) = (values[i] - slice.e_d, values[j] - slice.e_d);
                            slice.xis[i] + fa / (fa - fb) * (slice.xis[j] - slice.xis[i])
                        }
                    };
                    crossings.push(Crossing { band, xi });
                }
            }
            last = Some((j, s, pinned));
            zero_start = None;
        }
    }
    NofoldVerdict {
        holds: crossings.is_empty(),
        crossings,
        exclusion_steps,
        tol,
    }
}
