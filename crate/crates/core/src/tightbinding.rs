//! Wallace's nearest-neighbour tight-binding model with hopping `t = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::{build_geometry, HoneycombGeometry, Vec2};

/// Complex quasi-momentum, `k = re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec2 {
    pub re: Vec2,
    pub im: Vec2,
}

impl From<Vec2> for CVec2 {
    fn from(re: Vec2) -> Self {
        CVec2 { re, im: Vec2::ZERO }
    }
}

/// `γ(k) = Σ_ν exp(i k·e_{B,ν})` for complex `k`.
pub fn gamma(k: CVec2) -> Complex64 {
    gamma_with(&build_geometry(), k)
}

pub fn gamma_with(geo: &HoneycombGeometry, k: CVec2) -> Complex64 {
    geo.e_b
        .iter()
        .map(|e| {
            let phase = Complex64::new(-k.im.dot(*e), k.re.dot(*e));
            phase.exp()
        })
        .sum()
}

/// `γ` at real `k`.
pub fn gamma_real(geo: &HoneycombGeometry, k: Vec2) -> Complex64 {
    geo.e_b.iter().map(|e| Complex64::cis(k.dot(*e))).sum()
}

/// `𝒲_TB(k) = |1 + e^{ik·v1} + e^{ik·v2}|`.
pub fn wallace(k: Vec2) -> f64 {
    wallace_with(&build_geometry(), k)
}

pub fn wallace_with(geo: &HoneycombGeometry, k: Vec2) -> f64 {
    (Complex64::new(1.0, 0.0) + Complex64::cis(k.dot(geo.v1)) + Complex64::cis(k.dot(geo.v2))).norm()
}

/// The 2×2 Bloch Hamiltonian in the `(A, B)` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBHamiltonian {
    pub k: Vec2,
    pub matrix: [[Complex64; 2]; 2],
}

impl TBHamiltonian {
    /// Eigenvalues in ascending order, `±|γ(k)|`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let w = self.matrix[1][0].norm();
        [-w, w]
    }

    /// Orthonormal eigenvectors matching [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> [[Complex64; 2]; 2] {
        let g = -self.matrix[1][0];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phase = if g.norm() > 0.0 { g / g.norm() } else { Complex64::new(1.0, 0.0) };
        // H = [[0, -ḡ], [-g, 0]]: (1, e^{iφ})/√2 has eigenvalue -|g|.
        [
            [Complex64::new(s, 0.0), phase * s],
            [Complex64::new(s, 0.0), -phase * s],
        ]
    }

    /// `(H − z)^{-1}` for `z` off the spectrum.
    pub fn resolvent(&self, z: Complex64) -> [[Complex64; 2]; 2] {
        let m = &self.matrix;
        let (a, b, c, d) = (m[0][0] - z, m[0][1], m[1][0], m[1][1] - z);
        let det = a * d - b * c;
        [[d / det, -b / det], [-c / det, a / det]]
    }

    /// Largest entry of `H − H†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((m[i][j] - m[j][i].conj()).norm());
            }
        }
        d
    }
}

pub fn h_tb(k: Vec2) -> TBHamiltonian {
    h_tb_with(&build_geometry(), k)
}

pub fn h_tb_with(geo: &HoneycombGeometry, k: Vec2) -> TBHamiltonian {
    let g = gamma_real(geo, k);
    let z = Complex64::new(0.0, 0.0);
    TBHamiltonian {
        k,
        matrix: [[z, -g.conj()], [-g, z]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_examples() {
        let geo = build_geometry();
        let g0 = gamma(Vec2::ZERO.into());
        assert!((g0 - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(gamma(geo.k_point().into()).norm() < 1e-12);
        for v in geo.kvert {
            assert!(gamma(v.into()).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_factorisation_complex_k() {
        let geo = build_geometry();
        let k = CVec2 { re: Vec2::new(0.3, -1.1), im: Vec2::new(0.2, 0.05) };
        let ph = |v: Vec2| Complex64::new(-k.im.dot(v), k.re.dot(v)).exp();
        let want = ph(geo.e_b[0]) * (1.0 + ph(geo.v1) + ph(geo.v2));
        assert!((gamma(k) - want).norm() < 1e-13);
    }

    #[test]
    fn wallace_examples() {
        let geo = build_geometry();
        assert!((wallace(Vec2::ZERO) - 3.0).abs() < 1e-15);
        assert!((wallace(geo.m_point()) - 1.0).abs() < 1e-14);
        let kappa = 1e-3 * Vec2::from_angle(0.37);
        let w2 = wallace(geo.k_point() + kappa).powi(2);
        assert!((w2 / (0.75 * kappa.norm_sq()) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn h_tb_examples() {
        let geo = build_geometry();
        let e = h_tb(Vec2::ZERO).eigenvalues();
        assert!((e[0] + 3.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
        let e = h_tb(geo.k_point()).eigenvalues();
        assert!(e[0].abs() < 1e-12 && e[1].abs() < 1e-12);
        // γ(M) = e^{i M·e_B1}(1 − 1 − 1), so |γ| = 1
        let e = h_tb(geo.m_point()).eigenvalues();
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hessian_at_k() {
        let geo = build_geometry();
        let f = |d: Vec2| wallace(geo.k_point() + d).powi(2);
        let h = 1e-4;
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let f0 = f(Vec2::ZERO);
        let hxx = (f(ex) - 2.0 * f0 + f(-ex)) / (h * h);
        let hyy = (f(ey) - 2.0 * f0 + f(-ey)) / (h * h);
        let hxy = (f(ex + ey) - f(ex - ey) - f(ey - ex) + f(-ex - ey)) / (4.0 * h * h);
        // f = |W|², so the Hessian of (3/4)|κ|² is (3/2) I; half of it is (3/4) I
        assert!((0.5 * hxx - 0.75).abs() < 1e-3);
        assert!((0.5 * hyy - 0.75).abs() < 1e-3);
        assert!(hxy.abs() < 1e-3);
    }

    #[test]
    fn eigenvectors_diagonalise() {
        let geo = build_geometry();
        for k in [Vec2::new(0.4, 2.0), geo.m_point(), Vec2::ZERO] {
            let h = h_tb(k);
            let ev = h.eigenvalues();
            for (vec, lam) in h.eigenvectors().iter().zip(ev) {
                for i in 0..2 {
                    let hv = h.matrix[i][0] * vec[0] + h.matrix[i][1] * vec[1];
                    assert!((hv - vec[i] * lam).norm() < 1e-13);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn eigenvalues_are_pm_wallace(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let k = Vec2::new(x, y);
            let h = h_tb(k);
            let w = wallace(k);
            let e = h.eigenvalues();
            prop_assert!((e[0] + w).abs() < 1e-10 && (e[1] - w).abs() < 1e-10);
            prop_assert!(h.hermiticity_defect() < 1e-15);
            prop_assert!((h.matrix[0][0] + h.matrix[1][1]).norm() == 0.0);
        }

        #[test]
        fn wallace_periodic(x in -10.0f64..10.0, y in -10.0f64..10.0, m1 in -2i64..=2, m2 in -2i64..=2) {
            let geo = build_geometry();
            let k = Vec2::new(x, y);
            prop_assert!((wallace(k + geo.dual_vec(m1, m2)) - wallace(k)).abs() < 1e-12);
        }

        #[test]
        fn gamma_rotation_invariant(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let geo = build_geometry();
            let q = Vec2::new(x, y);
            let a = gamma(q.into());
            let b = gamma(geo.r120.apply(q).into());
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
