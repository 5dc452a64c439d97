//! Honeycomb geometry.
//!
//! Lengths are measured in units of the triangular lattice constant, so
//! `|v1| = |v2| = 1` and nearest-neighbour sites are `1/√3` apart.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for Brillouin-zone membership and boundary ties.
pub const BZ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector at angle `theta` from the x axis.
    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// Row-major 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    /// Clockwise rotation by `theta`.
    pub fn clockwise(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2([[c, s], [-s, c]])
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn pow(&self, n: u32) -> Mat2 {
        (0..n).fold(Mat2::IDENTITY, |acc, _| acc * *self)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(c)
    }
}

/// Lattice, dual lattice, sublattice offsets and the symmetry data of the
/// honeycomb structure `H = (vA + Λh) ∪ (vB + Λh)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoneycombGeometry {
    pub v1: Vec2,
    pub v2: Vec2,
    pub k1: Vec2,
    pub k2: Vec2,
    pub v_a: Vec2,
    pub v_b: Vec2,
    /// Hexagon centre, a vertex of the diamond fundamental cell.
    pub xc: Vec2,
    /// Clockwise rotation by 2π/3.
    pub r120: Mat2,
    /// Clockwise rotation by π/3.
    pub r60: Mat2,
    /// Vectors from an A site to its three B neighbours.
    pub e_a: [Vec2; 3],
    /// Vectors from a B site to its three A neighbours.
    pub e_b: [Vec2; 3],
    /// Brillouin-zone vertices: `K, R K, R² K, K', R K', R² K'`.
    pub kvert: [Vec2; 6],
}

impl HoneycombGeometry {
    /// `m1 k1 + m2 k2`.
    pub fn dual_vec(&self, m1: i64, m2: i64) -> Vec2 {
        m1 as f64 * self.k1 + m2 as f64 * self.k2
    }

    /// `n1 v1 + n2 v2`.
    pub fn lattice_vec(&self, n1: i64, n2: i64) -> Vec2 {
        n1 as f64 * self.v1 + n2 as f64 * self.v2
    }

    /// Real coordinates of `k` in the dual basis: `k = f1 k1 + f2 k2`.
    pub fn dual_coords(&self, k: Vec2) -> (f64, f64) {
        (k.dot(self.v1) / (2.0 * PI), k.dot(self.v2) / (2.0 * PI))
    }

    /// Real coordinates of `x` in the lattice basis: `x = a v1 + b v2`.
    pub fn lattice_coords(&self, x: Vec2) -> (f64, f64) {
        (x.dot(self.k1) / (2.0 * PI), x.dot(self.k2) / (2.0 * PI))
    }

    pub fn edge_length(&self) -> f64 {
        self.e_a[0].norm()
    }

    /// `K`.
    pub fn k_point(&self) -> Vec2 {
        self.kvert[0]
    }

    /// `K' = -K`.
    pub fn k_prime(&self) -> Vec2 {
        self.kvert[3]
    }

    /// Edge midpoint `M = (k1 + k2)/2`.
    pub fn m_point(&self) -> Vec2 {
        0.5 * (self.k1 + self.k2)
    }

    /// The six shortest nonzero dual-lattice vectors, which bound the
    /// Brillouin hexagon.
    pub fn shortest_dual(&self) -> [Vec2; 6] {
        let (a, b) = (self.k1, self.k2);
        [a, b, a + b, -a, -b, -(a + b)]
    }

    /// Closed Brillouin hexagon membership with tolerance [`BZ_TOL`].
    pub fn in_brillouin_zone(&self, k: Vec2) -> bool {
        self.shortest_dual()
            .iter()
            .all(|g| k.dot(*g) / g.norm() <= 0.5 * g.norm() + BZ_TOL)
    }

    /// Canonical representative of `k` modulo the dual lattice.
    ///
    /// Returns `(k_red, m)` with `k = k_red + m1 k1 + m2 k2` and `k_red` in
    /// the closed hexagon. On the boundary the representative with the
    /// largest `y` (then largest `x`) is chosen, so the result depends only
    /// on the class of `k`.
    pub fn reduce_to_bz(&self, k: Vec2) -> (Vec2, [i64; 2]) {
        let (f1, f2) = self.dual_coords(k);
        let (c1, c2) = (f1.round() as i64, f2.round() as i64);
        let mut best: Option<(Vec2, [i64; 2])> = None;
        for d1 in -2..=2 {
            for d2 in -2..=2 {
                let m = [c1 + d1, c2 + d2];
                let cand = k - self.dual_vec(m[0], m[1]);
                if !self.in_brillouin_zone(cand) {
                    continue;
                }
                best = match best {
                    None => Some((cand, m)),
                    Some((b, bm)) => {
                        let better = if (cand.y - b.y).abs() > BZ_TOL {
                            cand.y > b.y
                        } else if (cand.x - b.x).abs() > BZ_TOL {
                            cand.x > b.x
                        } else {
                            (m[0].abs() + m[1].abs(), m) < (bm[0].abs() + bm[1].abs(), bm)
                        };
                        if better {
                            Some((cand, m))
                        } else {
                            Some((b, bm))
                        }
                    }
                };
            }
        }
        // Rounding puts k within one cell of the origin, so some candidate
        // always lands in the hexagon.
        best.expect("a translate of k lies in the Brillouin zone")
    }

    /// Whether `k` is congruent to a Brillouin-zone vertex within `tol`.
    pub fn is_vertex_class(&self, k: Vec2, tol: f64) -> bool {
        let (kr, _) = self.reduce_to_bz(k);
        self.kvert.iter().any(|v| (kr - *v).norm() <= tol)
    }
}

/// Builds the honeycomb geometry with `|v1| = |v2| = 1`.
pub fn build_geometry() -> HoneycombGeometry {
    let s3 = 3f64.sqrt();
    let v1 = Vec2::new(s3 / 2.0, 0.5);
    let v2 = Vec2::new(s3 / 2.0, -0.5);
    let k1 = 2.0 * PI * Vec2::new(s3 / 3.0, 1.0);
    let k2 = 2.0 * PI * Vec2::new(s3 / 3.0, -1.0);
    let r120 = Mat2([[-0.5, s3 / 2.0], [-s3 / 2.0, -0.5]]);
    let r60 = Mat2([[0.5, s3 / 2.0], [-s3 / 2.0, 0.5]]);
    let e1 = Vec2::new(1.0 / s3, 0.0);
    let e_a = [e1, r120.apply(e1), r120.apply(r120.apply(e1))];
    let e_b = [-e_a[0], -e_a[1], -e_a[2]];
    let k = Vec2::new(0.0, 4.0 * PI / 3.0);
    let kp = -k;
    let kvert = [
        k,
        r120.apply(k),
        r120.apply(r120.apply(k)),
        kp,
        r120.apply(kp),
        r120.apply(r120.apply(kp)),
    ];
    HoneycombGeometry {
        v1,
        v2,
        k1,
        k2,
        v_a: Vec2::ZERO,
        v_b: Vec2::new(1.0 / s3, 0.0),
        xc: Vec2::new(0.5 / s3, -0.5),
        r120,
        r60,
        e_a,
        e_b,
        kvert,
    }
}

/// A rational edge `R 𝔳1` with `𝔳1 = a1 v1 + b1 v2`, completed to a
/// unimodular basis, together with its dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a1: i64,
    pub b1: i64,
    pub a2: i64,
    pub b2: i64,
    /// Edge direction `a1 v1 + b1 v2`.
    pub dir: Vec2,
    /// Complementary lattice vector `a2 v1 + b2 v2`.
    pub dir2: Vec2,
    /// `b2 k1 - a2 k2`.
    pub dual1: Vec2,
    /// `-b1 k1 + a1 k2`, the direction of the dual slice.
    pub dual2: Vec2,
}

impl EdgeSpec {
    pub fn name(&self) -> String {
        match (self.a1, self.b1) {
            (1, 0) => "zigzag".to_string(),
            (1, 1) => "armchair".to_string(),
            (a, b) => format!("({a},{b})"),
        }
    }
}

/// Largest accepted `|a1|`, `|b1|` for [`edge_from_indices`].
pub const MAX_EDGE_INDEX: i64 = 1 << 20;

/// Completes `(a1, b1)` to a unimodular pair with `a1 b2 - a2 b1 = 1`.
///
/// The solution set is `(a2, b2) + t (a1, b1)`; the member with smallest
/// `|a2|`, then smallest `|b2|`, then larger `a2`, is returned.
pub fn edge_from_indices(a1: i64, b1: i64) -> Result<EdgeSpec> {
    let g = gcd(a1.unsigned_abs(), b1.unsigned_abs());
    if g != 1 {
        return Err(Error::NotCoprime { a1, b1 });
    }
    if a1.abs() > MAX_EDGE_INDEX || b1.abs() > MAX_EDGE_INDEX {
        return Err(Error::InvalidInput(format!(
            "edge indices must satisfy |a1|, |b1| <= {MAX_EDGE_INDEX}"
        )));
    }
    let key = |p: (i64, i64)| (p.0.abs(), p.1.abs(), -p.0);
    let (a2, b2) = if a1 == 0 {
        // b1 = ±1 and b2 is free; take b2 = 0.
        (-b1, 0)
    } else {
        // The minimal |a2| is at most |a1|/2, so this window suffices.
        (-a1.abs()..=a1.abs())
            .filter(|a2| (1 + a2 * b1) % a1 == 0)
            .map(|a2| (a2, (1 + a2 * b1) / a1))
            .min_by_key(|&p| key(p))
            .expect("coprime indices admit a unimodular completion")
    };
    debug_assert_eq!(a1 * b2 - a2 * b1, 1);

    let geo = build_geometry();
    Ok(EdgeSpec {
        a1,
        b1,
        a2,
        b2,
        dir: geo.lattice_vec(a1, b1),
        dir2: geo.lattice_vec(a2, b2),
        dual1: geo.dual_vec(b2, -a2),
        dual2: geo.dual_vec(-b1, a1),
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
