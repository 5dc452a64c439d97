//! Single radial wells `V₀`, the ground state of `-Δ + λ²V₀` on the plane
//! and the overlap scale `ρ_λ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_geometry, Vec2};
use crate::quadrature::Rule;
use crate::special::{j0, jn, jn_prime, kn_log_derivative};

/// Nearest-neighbour distance `|e_{A,1}| = 1/√3`.
pub const NN_DIST: f64 = 0.577_350_269_189_625_8;

/// Default well radius `0.33·|e_{A,1}|`.
pub const R_CRITICAL: f64 = 0.33 * NN_DIST;

/// Upper limit on `r0` when the caller opts out of the critical radius.
pub const R_RELAXED: f64 = 0.5 * NN_DIST;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WellKind {
    /// `V₀(r) = -exp(1 - 1/(1 - (r/r0)²))` for `r < r0`.
    SmoothBump,
    /// Depth-one disc of radius `radius` whose edge is smoothed over
    /// `[radius - width, radius + width]`; support radius `radius + width`.
    SmoothedCylinder { radius: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadiusBound {
    /// `r0 ≤ 0.33·|e_{A,1}|`.
    Critical,
    /// `r0 < 0.5·|e_{A,1}|`.
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomicWell {
    pub kind: WellKind,
    /// Support radius.
    pub r0: f64,
}

/// `C^∞` step, 0 for `t ≤ -1`, 1 for `t ≥ 1`, 1/2 at 0.
fn smooth_step(t: f64) -> f64 {
    let phi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (a, b) = (phi(1.0 + t), phi(1.0 - t));
    a / (a + b)
}

impl AtomicWell {
    pub fn new(kind: WellKind, r0: f64, bound: RadiusBound) -> Result<Self> {
        let limit_ok = match bound {
            RadiusBound::Critical => r0 <= R_CRITICAL * (1.0 + 1e-12),
            RadiusBound::Relaxed => r0 < R_RELAXED,
        };
        if !(r0 > 0.0 && r0.is_finite()) || !limit_ok {
            return Err(Error::InvalidInput(format!(
                "well radius {r0} violates the {bound:?} bound"
            )));
        }
        if let WellKind::SmoothedCylinder { radius, width } = kind {
            if !(width >= 0.0 && radius > width && (radius + width - r0).abs() < 1e-14) {
                return Err(Error::InvalidInput(format!(
                    "smoothed cylinder needs 0 <= width < radius and r0 = radius + width (got R={radius}, w={width}, r0={r0})"
                )));
            }
        }
        Ok(AtomicWell { kind, r0 })
    }

    pub fn bump(r0: f64) -> Result<Self> {
        Self::new(WellKind::SmoothBump, r0, RadiusBound::Critical)
    }

    /// Bump of radius `0.33·|e_{A,1}|`.
    pub fn default_bump() -> Self {
        Self::bump(R_CRITICAL).expect("default radius is admissible")
    }

    pub fn smoothed_cylinder(radius: f64, width: f64) -> Result<Self> {
        Self::new(
            WellKind::SmoothedCylinder { radius, width },
            radius + width,
            RadiusBound::Critical,
        )
    }

    /// `V₀(r)`, in `[-1, 0]`.
    pub fn profile(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.r0 {
            return 0.0;
        }
        match self.kind {
            WellKind::SmoothBump => {
                let s = r / self.r0;
                -(1.0 - 1.0 / (1.0 - s * s)).exp()
            }
            WellKind::SmoothedCylinder { radius, width } => {
                if width == 0.0 {
                    -1.0
                } else {
                    -smooth_step((radius - r) / width)
                }
            }
        }
    }

    /// Points where the profile changes character; used as quadrature breaks.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            WellKind::SmoothBump => vec![0.0, self.r0],
            WellKind::SmoothedCylinder { radius, width } if width > 0.0 => {
                vec![0.0, radius - width, radius, self.r0]
            }
            WellKind::SmoothedCylinder { .. } => vec![0.0, self.r0],
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            WellKind::SmoothBump => format!("bump(r0={})", self.r0),
            WellKind::SmoothedCylinder { radius, width } => {
                format!("cylinder(R={radius},w={width})")
            }
        }
    }
}

/// Radial discretisation: `n_r` cells on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n_r: usize,
    pub r_max: f64,
}

impl RadialGrid {
    /// `r_max = r0 + max(5/λ, 2|e_{A,1}|)` with `n_r` chosen for a step of
    /// about `1.5e-4`.
    pub fn default_for(well: &AtomicWell, lambda: f64) -> Self {
        let r_max = well.r0 + (5.0 / lambda).max(2.0 * NN_DIST);
        RadialGrid {
            n_r: (r_max / 1.5e-4).ceil() as usize,
            r_max,
        }
    }

    /// Grid whose outer radius also covers `8/√|E0|` beyond the neighbour
    /// shell, so the Dirichlet wall does not distort `p₀(y + e)` for
    /// weakly bound states. `E0` is estimated on the default grid first.
    pub fn adaptive(well: &AtomicWell, lambda: f64) -> Self {
        let base = Self::default_for(well, lambda);
        let e0 = ground_energy(well, lambda, &base);
        if e0 >= 0.0 {
            return base;
        }
        let tail = NN_DIST + well.r0 + 8.0 / (-e0).sqrt();
        let r_max = base.r_max.max(tail);
        RadialGrid {
            n_r: (r_max / base.step()).ceil() as usize,
            r_max,
        }
    }

    pub fn step(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    /// Cell centres `r_i = (i - 1/2) h`.
    pub fn centres(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_r).map(|i| (i as f64 + 0.5) * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub well: AtomicWell,
    pub lambda: f64,
    pub grid: RadialGrid,
    pub e0: f64,
    /// Second eigenvalue of the radially symmetric channel.
    pub e1_radial: f64,
    /// Lowest eigenvalue of the angular momentum one channel.
    pub e_m1: f64,
    /// `min(e1_radial, e_m1) - e0`.
    pub gap: f64,
    /// `|E0(2 n_r) - E0(n_r)|`.
    pub grid_change: f64,
    /// Cell centres.
    pub radial_grid: Vec<f64>,
    /// `p₀(r)` at the cell centres, positive.
    pub u: Vec<f64>,
    /// `‖p₀‖_{L²(ℝ²)}`.
    pub norm: f64,
    pub rho: f64,
}

/// Symmetric tridiagonal matrix for `-(1/r)(r u')' + (m²/r²) u + λ²V₀ u`
/// in the variable `w = √r u` on a cell-centred grid, with regularity at 0
/// and `u = 0` at `r_max`.
struct Tridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

fn radial_operator(well: &AtomicWell, lambda: f64, grid: &RadialGrid, m: u32) -> Tridiag {
    let n = grid.n_r;
    let h = grid.step();
    let h2 = h * h;
    let r: Vec<f64> = grid.centres();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let lam2 = lambda * lambda;
    for i in 0..n {
        let r_lo = i as f64 * h;
        let r_hi = (i + 1) as f64 * h;
        // ghost value -u_n at the outer face enforces u(r_max) = 0
        let outer = if i + 1 == n { 2.0 * r_hi } else { r_hi };
        diag[i] = (outer + r_lo) / (r[i] * h2)
            + lam2 * well.profile(r[i])
            + (m * m) as f64 / (r[i] * r[i]);
        if i + 1 < n {
            off[i] = -r_hi / (h2 * (r[i] * r[i + 1]).sqrt());
        }
    }
    Tridiag { diag, off }
}

impl Tridiag {
    /// Number of eigenvalues strictly below `x` (Sturm count).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// `j`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an accurately known eigenvalue, by inverse iteration.
    fn eigenvector(&self, e: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = e - 1e-10 * (1.0 + e.abs());
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            // Thomas algorithm on (T - shift) y = x
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut piv = self.diag[0] - shift;
            c[0] = if n > 1 { self.off[0] / piv } else { 0.0 };
            d[0] = x[0] / piv;
            for i in 1..n {
                piv = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
                if i + 1 < n {
                    c[i] = self.off[i] / piv;
                }
                d[i] = (x[i] - self.off[i - 1] * d[i - 1]) / piv;
            }
            for i in (0..n - 1).rev() {
                d[i] -= c[i] * d[i + 1];
            }
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = d.into_iter().map(|v| v / norm).collect();
        }
        x
    }
}

fn check_inputs(well: &AtomicWell, lambda: f64, grid: &RadialGrid) -> Result<()> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be >= 1, got {lambda}")));
    }
    if grid.n_r < 200 {
        return Err(Error::InvalidInput(format!("n_r must be >= 200, got {}", grid.n_r)));
    }
    if !(grid.r_max >= well.r0 + 5.0 / lambda) {
        return Err(Error::InvalidInput(format!(
            "r_max = {} is below r0 + 5/lambda = {}",
            grid.r_max,
            well.r0 + 5.0 / lambda
        )));
    }
    Ok(())
}

/// Lowest eigenvalue only, for refinement checks.
pub fn ground_energy(well: &AtomicWell, lambda: f64, grid: &RadialGrid) -> f64 {
    radial_operator(well, lambda, grid, 0).eigenvalue(0)
}

/// Ground state of `-Δ + λ²V₀` restricted to radial functions.
pub fn ground_state(well: &AtomicWell, lambda: f64, grid: RadialGrid) -> Result<GroundState> {
    check_inputs(well, lambda, &grid)?;
    let t0 = radial_operator(well, lambda, &grid, 0);
    let e0 = t0.eigenvalue(0);
    if e0 >= 0.0 {
        return Err(Error::NoBoundState { energy: e0 });
    }
    let fine = RadialGrid { n_r: 2 * grid.n_r, ..grid };
    let grid_change = (ground_energy(well, lambda, &fine) - e0).abs();
    let allowed = 1e-6 * lambda * lambda;
    if grid_change > allowed {
        return Err(Error::GridTooCoarse { change: grid_change, allowed });
    }
    let e1_radial = t0.eigenvalue(1);
    let e_m1 = radial_operator(well, lambda, &grid, 1).eigenvalue(0);

    let r = grid.centres();
    let h = grid.step();
    let w = t0.eigenvector(e0);
    let sign = if w[0] < 0.0 { -1.0 } else { 1.0 };
    let mut u: Vec<f64> = w.iter().zip(&r).map(|(w, r)| sign * w / r.sqrt()).collect();
    let mass: f64 = 2.0 * PI * h * u.iter().zip(&r).map(|(u, r)| u * u * r).sum::<f64>();
    let scale = mass.sqrt().recip();
    u.iter_mut().for_each(|v| *v *= scale);
    let norm = (2.0 * PI * h * u.iter().zip(&r).map(|(u, r)| u * u * r).sum::<f64>()).sqrt();
    if let Some(bad) = u.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Eigensolver(format!(
            "ground state is not positive at r = {}",
            r[bad]
        )));
    }

    let mut gs = GroundState {
        well: *well,
        lambda,
        grid,
        e0,
        e1_radial,
        e_m1,
        gap: e1_radial.min(e_m1) - e0,
        grid_change,
        radial_grid: r,
        u,
        norm,
        rho: 0.0,
    };
    gs.rho = rho_lambda(&gs, well)?;
    Ok(gs)
}

impl GroundState {
    /// `p₀(r)` by linear interpolation of `ln u`; flat inside the first
    /// cell centre, zero beyond `r_max`.
    pub fn p0(&self, r: f64) -> f64 {
        self.ln_p0(r).exp()
    }

    pub fn ln_p0(&self, r: f64) -> f64 {
        let h = self.grid.step();
        let n = self.u.len();
        let s = r / h - 0.5;
        if s <= 0.0 {
            return self.u[0].ln();
        }
        if r >= self.grid.r_max {
            return f64::NEG_INFINITY;
        }
        let i = s.floor() as usize;
        if i + 1 >= n {
            // between the last centre and r_max: linear in u towards zero
            let t = (r - self.radial_grid[n - 1]) / (self.grid.r_max - self.radial_grid[n - 1]);
            return (self.u[n - 1] * (1.0 - t)).ln();
        }
        let t = s - i as f64;
        (1.0 - t) * self.u[i].ln() + t * self.u[i + 1].ln()
    }

    /// `E0/λ²`, the empirical constant in `E0 ≤ -C λ²`.
    pub fn energy_ratio(&self) -> f64 {
        self.e0 / (self.lambda * self.lambda)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ground state serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Angular nodes for the overlap integral; divisible by 6 so that the node
/// set is invariant under the rotations relating the six neighbour vectors.
const RHO_ANGLES: usize = 384;

/// `ρ_λ = λ² ∫_{|y|<r0} |V₀(y)| p₀(y) p₀(y + e_{A,1}) dy`.
pub fn rho_lambda(gs: &GroundState, well: &AtomicWell) -> Result<f64> {
    rho_lambda_shift(gs, well, build_geometry().e_a[0])
}

/// The overlap integral with an arbitrary neighbour vector `e`.
pub fn rho_lambda_shift(gs: &GroundState, well: &AtomicWell, e: Vec2) -> Result<f64> {
    let need = e.norm() + well.r0;
    if gs.grid.r_max < need {
        return Err(Error::InvalidInput(format!(
            "r_max = {} must be at least |e| + r0 = {need}",
            gs.grid.r_max
        )));
    }
    let radial = Rule::gauss_panels(&well.breakpoints(), 48, 8);
    let dtheta = 2.0 * PI / RHO_ANGLES as f64;
    let dirs: Vec<Vec2> = (0..RHO_ANGLES)
        .map(|j| Vec2::from_angle(j as f64 * dtheta))
        .collect();
    let lam2 = gs.lambda * gs.lambda;
    // Work relative to the largest log-integrand so tiny values survive.
    let mut logs = Vec::with_capacity(radial.nodes.len() * RHO_ANGLES);
    let mut wts = Vec::with_capacity(logs.capacity());
    for (r, w) in radial.nodes.iter().zip(&radial.weights) {
        let v = well.profile(*r).abs();
        if v == 0.0 {
            continue;
        }
        let base = v.ln() + gs.ln_p0(*r);
        for d in &dirs {
            let y = *r * *d;
            logs.push(base + gs.ln_p0((y + e).norm()));
            wts.push(w * r * dtheta);
        }
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Underflow { lambda: gs.lambda });
    }
    let sum: f64 = logs.iter().zip(&wts).map(|(l, w)| w * (l - top).exp()).sum();
    let log_rho = lam2.ln() + top + sum.ln();
    let rho = log_rho.exp();
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Underflow { lambda: gs.lambda });
    }
    Ok(rho)
}

/// A radial function sampled at quadrature nodes: `∫ g(r) dr ≈ Σ w_i g(r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFn {
    pub r: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialFn {
    pub fn from_rule(rule: Rule, f: impl Fn(f64) -> f64) -> Self {
        let values = rule.nodes.iter().map(|r| f(*r)).collect();
        RadialFn {
            r: rule.nodes,
            weights: rule.weights,
            values,
        }
    }

    /// The well profile on composite Gauss panels.
    pub fn from_well(well: &AtomicWell) -> Self {
        Self::from_rule(Rule::gauss_panels(&well.breakpoints(), 64, 8), |r| well.profile(r))
    }

    /// The ground state on composite Gauss panels over `[0, r_max]`.
    pub fn from_ground_state(gs: &GroundState, panels: usize) -> Self {
        let mut breaks = gs.well.breakpoints();
        breaks.push(gs.grid.r_max);
        Self::from_rule(Rule::gauss_panels(&breaks, panels, 8), |r| gs.p0(r))
    }
}

/// `2π ∫₀^∞ f(r) J₀(ξ r) r dr`, the Fourier transform of a radial function
/// on the plane.
pub fn hankel_transform(f: &RadialFn, xi: f64) -> f64 {
    2.0 * PI
        * f.r
            .iter()
            .zip(&f.weights)
            .zip(&f.values)
            .map(|((r, w), v)| w * v * r * j0(xi * r))
            .sum::<f64>()
}

/// Bound state energy of the sharp cylinder `V₀ = -1_{|x|<R}` with angular
/// momentum `m`; `branch = 1` is the lowest.
///
/// Solves the continuity of `u'/u` at `R` between `J_m(q r)` inside and the
/// decaying `K_m(κ r)` outside, `q² = λ² - |E|`, `κ² = |E|`.
pub fn cylinder_well_eigenvalue(lambda: f64, radius: f64, m: u32, branch: u32) -> Result<f64> {
    if branch == 0 || !(lambda > 0.0 && radius > 0.0) {
        return Err(Error::InvalidInput("need lambda, R > 0 and branch >= 1".into()));
    }
    let mi = m as i32;
    let f = |q: f64| {
        let kappa = (lambda * lambda - q * q).max(0.0).sqrt();
        let x = q * radius;
        q * jn_prime(mi, x) - kappa * kn_log_derivative(mi, kappa * radius) * jn(mi, x)
    };
    let samples = 4000;
    let qs: Vec<f64> = (0..=samples)
        .map(|i| lambda * (1e-9 + (1.0 - 2e-9) * i as f64 / samples as f64))
        .collect();
    let mut found = 0;
    let mut prev = (qs[0], f(qs[0]));
    for &q in &qs[1..] {
        let cur = (q, f(q));
        if prev.1 == 0.0 || prev.1.signum() != cur.1.signum() {
            found += 1;
            if found == branch {
                let (mut a, mut b) = (prev.0, cur.0);
                let mut fa = prev.1;
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = f(mid);
                    if fm == 0.0 || b - a < 1e-15 * lambda {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                let q = 0.5 * (a + b);
                return Ok(q * q - lambda * lambda);
            }
        }
        prev = cur;
    }
    Err(Error::NoRoot { m, branch })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump_gs(lambda: f64) -> GroundState {
        let w = AtomicWell::default_bump();
        ground_state(&w, lambda, RadialGrid::default_for(&w, lambda)).unwrap()
    }

    #[test]
    fn well_profiles() {
        let w = AtomicWell::default_bump();
        assert!((w.profile(0.0) + 1.0).abs() < 1e-15);
        assert_eq!(w.profile(w.r0), 0.0);
        for i in 0..1000 {
            let v = w.profile(i as f64 * 1e-3);
            assert!((-1.0..=0.0).contains(&v));
        }
        let c = AtomicWell::smoothed_cylinder(0.15, 0.01).unwrap();
        assert_eq!(c.profile(0.1), -1.0);
        assert!((c.profile(0.15) + 0.5).abs() < 1e-15);
        assert_eq!(c.profile(0.161), 0.0);
        assert!(AtomicWell::bump(0.3).is_err());
        assert!(AtomicWell::new(WellKind::SmoothBump, 0.25, RadiusBound::Relaxed).is_ok());
    }

    #[test]
    fn ground_state_basic_properties() {
        let gs = bump_gs(12.0);
        assert!((gs.norm - 1.0).abs() < 1e-8);
        assert!(gs.e0 < 0.0 && gs.e0 >= -144.0);
        assert!(gs.u.windows(2).all(|p| p[1] < p[0]));
        assert!(gs.gap > 0.0);
        assert!(gs.rho > 0.0);
        let back = GroundState::from_json(&gs.to_json()).unwrap();
        assert_eq!(back.e0, gs.e0);
        assert_eq!(back.u, gs.u);
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = AtomicWell::default_bump();
        let g = RadialGrid::default_for(&w, 10.0);
        assert!(ground_state(&w, 0.5, g).is_err());
        assert!(ground_state(&w, 10.0, RadialGrid { n_r: 100, ..g }).is_err());
        assert!(ground_state(&w, 10.0, RadialGrid { r_max: 0.3, ..g }).is_err());
    }

    #[test]
    fn coarse_grid_is_reported() {
        let w = AtomicWell::default_bump();
        let g = RadialGrid { n_r: 200, r_max: 1.4 };
        assert!(matches!(ground_state(&w, 20.0, g), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn energy_decreases_with_lambda() {
        let w = AtomicWell::default_bump();
        let es: Vec<f64> = [4.0, 8.0, 12.0, 16.0]
            .iter()
            .map(|l| ground_energy(&w, *l, &RadialGrid::default_for(&w, *l)))
            .collect();
        assert!(es.windows(2).all(|p| p[1] < p[0]));
    }

    /// Dense symmetric eigensolve of the same finite-difference operator in
    /// the non-symmetrised form `D⁻¹ S`, by Jacobi rotations on a small grid.
    #[test]
    fn bisection_matches_dense_oracle() {
        let w = AtomicWell::default_bump();
        let g = RadialGrid { n_r: 200, r_max: 1.4 };
        let t = radial_operator(&w, 20.0, &g, 0);
        let n = t.diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = t.diag[i];
            if i + 1 < n {
                a[i][i + 1] = t.off[i];
                a[i + 1][i] = t.off[i];
            }
        }
        for _sweep in 0..30 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[p][q] * a[p][q];
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let tt = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let tt = if theta == 0.0 { 1.0 } else { tt };
                    let c = 1.0 / (tt * tt + 1.0).sqrt();
                    let s = tt * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
            if off < 1e-22 {
                break;
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for j in 0..3 {
            let b = t.eigenvalue(j);
            assert!((b - ev[j]).abs() < 1e-8 * (1.0 + ev[j].abs()), "{b} vs {}", ev[j]);
        }
    }

    #[test]
    fn hankel_examples() {
        let disc = RadialFn::from_rule(Rule::gauss_panels(&[0.0, 0.3], 8, 8), |_| 1.0);
        assert!((hankel_transform(&disc, 0.0) - PI * 0.09).abs() < 1e-14);
        for xi in [0.5, 3.0, 20.0, 75.0] {
            let want = 2.0 * PI * 0.3 * crate::special::j1(xi * 0.3) / xi;
            assert!((hankel_transform(&disc, xi) - want).abs() < 1e-12, "xi={xi}");
        }
        let gauss = RadialFn::from_rule(Rule::gauss_panels(&[0.0, 12.0], 48, 8), |r| (-r * r).exp());
        assert!((hankel_transform(&gauss, 2.0) - PI * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cylinder_branches_are_ordered() {
        let e1 = cylinder_well_eigenvalue(40.0, 0.15, 0, 1).unwrap();
        let e2 = cylinder_well_eigenvalue(40.0, 0.15, 0, 2).unwrap();
        assert!(-1600.0 < e1 && e1 < e2 && e2 < 0.0);
        assert!(matches!(
            cylinder_well_eigenvalue(40.0, 0.15, 0, 9),
            Err(Error::NoRoot { .. })
        ));
    }

    /// The matching condition in the deep-well limit tends to the zeros of
    /// `J_m`.
    #[test]
    fn cylinder_deep_limit() {
        let r = 0.15;
        let e = cylinder_well_eigenvalue(4000.0, r, 0, 1).unwrap();
        let q = (e + 4000.0f64 * 4000.0).sqrt() * r;
        assert!((q - crate::special::J0_FIRST_ZERO).abs() < 2e-3 * crate::special::J0_FIRST_ZERO);
    }

    #[test]
    fn rho_independent_of_neighbour() {
        let gs = bump_gs(12.0);
        let g = build_geometry();
        let w = gs.well;
        let a = rho_lambda_shift(&gs, &w, g.e_a[0]).unwrap();
        for e in [g.e_a[1], g.e_a[2], g.e_b[0], g.e_b[1]] {
            let b = rho_lambda_shift(&gs, &w, e).unwrap();
            assert!(((a - b) / a).abs() < 1e-10);
        }
    }
}
