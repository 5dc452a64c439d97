//! Band structures of honeycomb Schrödinger operators `-Δ + λ²V` in the
//! strong-binding regime, compared against Wallace's two-band tight-binding
//! model.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: exact honeycomb geometry, Brillouin zone, rational edges.
//! * [`tightbinding`]: `γ(k)`, the Wallace dispersion and the 2×2 Bloch
//!   Hamiltonian.
//! * [`atomic`]: single radial wells, their ground state and the hopping
//!   scale `ρ_λ`.
//! * [`potential`]: lattice Fourier series of periodic potentials.
//! * [`bloch`]: the truncated plane-wave Floquet–Bloch solver and the
//!   Dirac-point, Fermi-velocity, gap and resolvent diagnostics built on it.
//! * [`edges`]: dual slices along rational edges and the no-fold check.
//! * [`eigen`]: dense and Davidson eigensolvers for the Bloch matrices.
//! * [`geomlemma`]: the finite grid computation behind the distance
//!   inequalities used to bound overlap integrals.

pub mod atomic;
pub mod bloch;
pub mod edges;
pub mod eigen;
pub mod error;
pub mod geomlemma;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod tightbinding;

pub use error::{Error, Result};
pub use lattice::{Mat2, Vec2};
pub use num_complex::Complex64;
