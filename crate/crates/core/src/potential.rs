//! Periodic potentials stored as lattice Fourier series
//! `V(x) = Σ_m V̂(m) e^{i m·k⃗·x}`, `m·k⃗ = m1 k1 + m2 k2`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atomic::{hankel_transform, AtomicWell, RadialFn};
use crate::error::{Error, Result};
use crate::lattice::{build_geometry, HoneycombGeometry, Vec2};

/// Area of the fundamental cell, `√3/2`.
pub const CELL_AREA: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential {
    /// Dense table over `|m|∞ ≤ cutoff`, see [`FourierPotential::index`].
    coeffs: Vec<Complex64>,
    pub cutoff: usize,
    pub label: String,
    /// Centre of the 120° rotation and of the inversion symmetry.
    pub center: Vec2,
    /// Whether every coefficient beyond `cutoff` is exactly zero.
    pub complete: bool,
}

impl FourierPotential {
    pub fn zeros(cutoff: usize, label: impl Into<String>, center: Vec2, complete: bool) -> Self {
        let side = 2 * cutoff + 1;
        FourierPotential {
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
            cutoff,
            label: label.into(),
            center,
            complete,
        }
    }

    fn index(&self, m1: i64, m2: i64) -> Option<usize> {
        let c = self.cutoff as i64;
        if m1.abs() > c || m2.abs() > c {
            return None;
        }
        Some(((m1 + c) * (2 * c + 1) + (m2 + c)) as usize)
    }

    /// `V̂(m)`; zero beyond the cutoff for complete tables, an error otherwise.
    pub fn coeff(&self, m1: i64, m2: i64) -> Result<Complex64> {
        match self.index(m1, m2) {
            Some(i) => Ok(self.coeffs[i]),
            None if self.complete => Ok(Complex64::new(0.0, 0.0)),
            None => Err(Error::MissingCoefficient {
                m1,
                m2,
                cutoff: self.cutoff,
            }),
        }
    }

    pub fn set(&mut self, m1: i64, m2: i64, v: Complex64) {
        let i = self.index(m1, m2).expect("index within cutoff");
        self.coeffs[i] = v;
    }

    /// Stored `(m1, m2, V̂(m))` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let c = self.cutoff as i64;
        let side = 2 * c + 1;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, v)| (i as i64 / side - c, i as i64 % side - c, *v))
    }

    /// Coefficient at `m = (1, 1)`.
    pub fn v11(&self) -> Complex64 {
        self.coeff(1, 1).unwrap_or_default()
    }

    /// `V(x)`, real part of the series.
    pub fn evaluate(&self, x: Vec2) -> f64 {
        let geo = build_geometry();
        self.evaluate_with(&geo, x)
    }

    pub fn evaluate_with(&self, geo: &HoneycombGeometry, x: Vec2) -> f64 {
        let c = self.cutoff as i64;
        let (t1, t2) = (geo.k1.dot(x), geo.k2.dot(x));
        let p2: Vec<Complex64> = (-c..=c).map(|m| Complex64::cis(m as f64 * t2)).collect();
        let side = (2 * c + 1) as usize;
        let mut total = 0.0;
        for (a, m1) in (-c..=c).enumerate() {
            let row = &self.coeffs[a * side..(a + 1) * side];
            let inner: Complex64 = row.iter().zip(&p2).map(|(v, p)| v * p).sum();
            total += (inner * Complex64::cis(m1 as f64 * t1)).re;
        }
        total
    }

    /// Copy keeping only the indices whose whole 120° orbit lies within the
    /// cutoff. A square table is not closed under rotation, so sampling it
    /// directly shows a symmetry defect of the size of the dropped tail.
    pub fn rotation_closed(&self) -> FourierPotential {
        let geo = build_geometry();
        let rot = |m1: i64, m2: i64| {
            let g = geo.r120.transpose().apply(geo.dual_vec(m1, m2));
            let (f1, f2) = geo.dual_coords(g);
            (f1.round() as i64, f2.round() as i64)
        };
        let mut out = self.clone();
        for (m1, m2, _) in self.iter() {
            let (a1, a2) = rot(m1, m2);
            let (b1, b2) = rot(a1, a2);
            if self.index(a1, a2).is_none() || self.index(b1, b2).is_none() {
                out.set(m1, m2, Complex64::new(0.0, 0.0));
            }
        }
        out
    }

    /// Largest `|V̂(m) - conj V̂(-m)|`.
    pub fn reality_defect(&self) -> f64 {
        self.iter()
            .map(|(m1, m2, v)| (v - self.coeff(-m1, -m2).unwrap().conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ |V̂(m)|²`.
    pub fn l2_mass(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `Σ |V̂(m)|`, an upper bound on `sup |V|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PotentialRecord::from(self)).expect("potential serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: PotentialRecord =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut v = FourierPotential::zeros(rec.cutoff, rec.label, rec.center, rec.complete);
        for (m1, m2, re, im) in rec.coeffs {
            if v.index(m1, m2).is_none() {
                return Err(Error::InvalidInput(format!("coefficient ({m1},{m2}) beyond cutoff")));
            }
            v.set(m1, m2, Complex64::new(re, im));
        }
        Ok(v)
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialRecord {
    label: String,
    cutoff: usize,
    center: Vec2,
    complete: bool,
    coeffs: Vec<(i64, i64, f64, f64)>,
}

impl From<&FourierPotential> for PotentialRecord {
    fn from(v: &FourierPotential) -> Self {
        PotentialRecord {
            label: v.label.clone(),
            cutoff: v.cutoff,
            center: v.center,
            complete: v.complete,
            coeffs: v.iter().map(|(a, b, c)| (a, b, c.re, c.im)).collect(),
        }
    }
}

/// `V(x) = Σ_{v ∈ H} V₀(x - v)` over the honeycomb `H = Λ_A ∪ Λ_B`.
pub fn periodize(well: &AtomicWell, cutoff: usize) -> FourierPotential {
    let geo = build_geometry();
    let radial = RadialFn::from_well(well);
    // |m·k⃗|² = (16π²/3)(m1² - m1 m2 + m2²)
    let mut cache: HashMap<i64, f64> = HashMap::new();
    let mut v = FourierPotential::zeros(cutoff, well.label(), geo.xc, false);
    let c = cutoff as i64;
    for m1 in -c..=c {
        for m2 in -c..=c {
            let q = m1 * m1 - m1 * m2 + m2 * m2;
            let t = *cache
                .entry(q)
                .or_insert_with(|| hankel_transform(&radial, geo.dual_vec(m1, m2).norm()));
            let g = geo.dual_vec(m1, m2);
            let phase = Complex64::cis(-g.dot(geo.v_a)) + Complex64::cis(-g.dot(geo.v_b));
            v.set(m1, m2, phase * (t / CELL_AREA));
        }
    }
    v
}

/// `cos(k1·x) + cos(k2·x) + cos((k1+k2)·x)`.
pub fn trig_potential() -> FourierPotential {
    let mut v = FourierPotential::zeros(1, "trig", Vec2::ZERO, true);
    let half = Complex64::new(0.5, 0.0);
    for (a, b) in [(1, 0), (0, 1), (1, 1)] {
        v.set(a, b, half);
        v.set(-a, -b, half);
    }
    v
}

/// `Σ_g sin(g·(x - c))` over `g ∈ {k1, k2, -(k1+k2)}`: real, odd about `c`
/// and invariant under 120° rotation about `c`.
pub fn pt_breaking_potential_about(center: Vec2) -> FourierPotential {
    let geo = build_geometry();
    let mut w = FourierPotential::zeros(1, "pt-odd", center, true);
    for (a, b) in [(1, 0), (0, 1), (-1, -1)] {
        let g = geo.dual_vec(a, b);
        // sin θ = (e^{iθ} - e^{-iθ}) / 2i
        let c = Complex64::cis(-g.dot(center)) / Complex64::new(0.0, 2.0);
        w.set(a, b, c);
        w.set(-a, -b, c.conj());
    }
    w
}

/// The odd perturbation centred at the hexagon centre `xc`.
pub fn pt_breaking_potential() -> FourierPotential {
    pt_breaking_potential_about(build_geometry().xc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub rotation_ok: bool,
    pub inversion_parity: Parity,
    pub max_violation: f64,
    pub rotation_violation: f64,
    pub even_violation: f64,
    pub odd_violation: f64,
}

/// Samples `V` on a 128×128 cell grid and measures violations of 120°
/// rotation and of even or odd inversion about `V.center`, using the
/// rotation-closed part of the table.
pub fn check_symmetries(v: &FourierPotential) -> SymmetryReport {
    let geo = build_geometry();
    let v = &v.rotation_closed();
    let n = 128;
    let c = v.center;
    let (mut rot, mut even, mut odd, mut sup) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let x = (i as f64 / n as f64) * geo.v1 + (j as f64 / n as f64) * geo.v2;
            let f = v.evaluate_with(&geo, x);
            let fr = v.evaluate_with(&geo, c + geo.r120.apply(x - c));
            let fi = v.evaluate_with(&geo, 2.0 * c - x);
            sup = sup.max(f.abs());
            rot = rot.max((fr - f).abs());
            even = even.max((fi - f).abs());
            odd = odd.max((fi + f).abs());
        }
    }
    let tol = 1e-8 * sup.max(1.0);
    let parity = if even <= tol {
        Parity::Even
    } else if odd <= tol {
        Parity::Odd
    } else {
        Parity::None
    };
    let par_viol = match parity {
        Parity::Even => even,
        Parity::Odd => odd,
        Parity::None => even.min(odd),
    };
    SymmetryReport {
        rotation_ok: rot <= tol,
        inversion_parity: parity,
        max_violation: rot.max(par_viol),
        rotation_violation: rot,
        even_violation: even,
        odd_violation: odd,
    }
}

/// Mean of `V²` over the cell by sampling on an `n×n` grid.
pub fn cell_mean_square(v: &FourierPotential, n: usize) -> f64 {
    let geo = build_geometry();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = (i as f64 / n as f64) * geo.v1 + (j as f64 / n as f64) * geo.v2;
            s += v.evaluate_with(&geo, x).powi(2);
        }
    }
    s / (n * n) as f64
}
