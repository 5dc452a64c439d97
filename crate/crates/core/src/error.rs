use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("indices ({a1}, {b1}) are not coprime")]
    NotCoprime { a1: i64, b1: i64 },

    #[error("no bound state: lowest radial eigenvalue {energy} is not negative")]
    NoBoundState { energy: f64 },

    #[error("radial grid too coarse: doubling n_r moved E0 by {change:e} (allowed {allowed:e})")]
    GridTooCoarse { change: f64, allowed: f64 },

    #[error("no sign change of the matching condition for m={m}, branch={branch}")]
    NoRoot { m: u32, branch: u32 },

    #[error("overlap integrand underflows the float range (lambda = {lambda})")]
    Underflow { lambda: f64 },

    #[error("potential coefficient ({m1}, {m2}) lies outside the stored cutoff {cutoff}")]
    MissingCoefficient { m1: i64, m2: i64, cutoff: usize },

    #[error("vertex pair is not degenerate: split {split:e} exceeds tolerance {tolerance:e}")]
    NotDegenerate { split: f64, tolerance: f64 },

    #[error("rotation does not preserve the truncated basis: leaked mass {leak:e}")]
    RotationLeak { leak: f64 },

    #[error("approximate Bloch modes are ill-conditioned: overlap {overlap}")]
    IllConditioned { overlap: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
