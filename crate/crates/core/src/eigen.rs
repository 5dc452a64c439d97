//! Lowest eigenpairs of dense Hermitian matrices.
//!
//! Small problems go to a full dense solve. Larger ones use a block
//! Davidson iteration preconditioned by the diagonal, which suits
//! plane-wave Hamiltonians whose diagonal is the kinetic energy.

use faer::{c64, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension handled by the dense solver under [`Solver::Auto`].
pub const DENSE_MAX: usize = 3721;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Lowest eigenvalues in ascending order and, if requested, the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigs {
    pub values: Vec<f64>,
    pub vectors: Option<Mat<c64>>,
}

pub fn lowest(h: &Mat<c64>, k: usize, want_vectors: bool, solver: Solver) -> Result<Eigs> {
    let n = h.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenvalues of a {n}x{n} matrix"
        )));
    }
    let dense = match solver {
        Solver::Dense => true,
        Solver::Iterative => false,
        Solver::Auto => n <= DENSE_MAX,
    };
    // Davidson needs room for a search space; tiny matrices go dense.
    if dense || n < 8 * (k + 2) {
        lowest_dense(h, k, want_vectors)
    } else {
        davidson(h, k, want_vectors)
    }
}

fn lowest_dense(h: &Mat<c64>, k: usize, want_vectors: bool) -> Result<Eigs> {
    if !want_vectors {
        let vals = h
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        return Ok(Eigs {
            values: vals[..k].to_vec(),
            vectors: None,
        });
    }
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let values = (0..k).map(|i| s[i].re).collect();
    let vectors = Mat::from_fn(h.nrows(), k, |i, j| u[(i, j)]);
    Ok(Eigs {
        values,
        vectors: Some(vectors),
    })
}

/// Deterministic pseudo-random numbers in `[-1, 1)`.
fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    2.0 * ((z >> 11) as f64 / (1u64 << 53) as f64) - 1.0
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalises `v` against `basis` twice and normalises it; `None` if
/// nothing is left.
fn orthonormalise(v: &mut [c64], basis: &[Vec<c64>]) -> Option<()> {
    let n0 = norm(v);
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    let nv = norm(v);
    if nv <= 1e-10 * n0.max(f64::MIN_POSITIVE) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Some(())
}

fn matvec(h: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    let n = h.nrows();
    let x = Mat::from_fn(n, 1, |i, _| v[i]);
    let y = h * &x;
    (0..n).map(|i| y[(i, 0)]).collect()
}

fn davidson(h: &Mat<c64>, k: usize, want_vectors: bool) -> Result<Eigs> {
    let n = h.nrows();
    let block = k + 2;
    let max_basis = (12 * block).min(n);
    let tol = 1e-10;
    let diag: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| diag[*a].total_cmp(&diag[*b]).then(a.cmp(b)));
    let mut seed = 0x5EED_u64;
    let mut basis: Vec<Vec<c64>> = Vec::new();
    let mut hbasis: Vec<Vec<c64>> = Vec::new();
    for &i in order.iter().take(block) {
        // small random admixture so no symmetry sector is missed
        let mut v: Vec<c64> = (0..n)
            .map(|_| c64::new(1e-3 * splitmix(&mut seed), 1e-3 * splitmix(&mut seed)))
            .collect();
        v[i] += c64::new(1.0, 0.0);
        if orthonormalise(&mut v, &basis).is_some() {
            hbasis.push(matvec(h, &v));
            basis.push(v);
        }
    }

    for _iter in 0..500 {
        let m = basis.len();
        let t = Mat::from_fn(m, m, |i, j| {
            let a = dot(&basis[i], &hbasis[j]);
            let b = dot(&basis[j], &hbasis[i]).conj();
            (a + b) * 0.5
        });
        let eig = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let theta: Vec<f64> = (0..m).map(|i| eig.S().column_vector()[i].re).collect();
        let y = eig.U();
        let nb = block.min(m);
        let mut ritz = Vec::with_capacity(nb);
        let mut hritz = Vec::with_capacity(nb);
        for j in 0..nb {
            let mut x = vec![c64::new(0.0, 0.0); n];
            let mut hx = vec![c64::new(0.0, 0.0); n];
            for i in 0..m {
                let c = y[(i, j)];
                x.iter_mut().zip(&basis[i]).for_each(|(a, b)| *a += c * b);
                hx.iter_mut().zip(&hbasis[i]).for_each(|(a, b)| *a += c * b);
            }
            ritz.push(x);
            hritz.push(hx);
        }
        let mut residuals = Vec::with_capacity(nb);
        let mut done = true;
        for j in 0..nb {
            let r: Vec<c64> = hritz[j]
                .iter()
                .zip(&ritz[j])
                .map(|(a, b)| a - b * theta[j])
                .collect();
            let rn = norm(&r);
            if j < k && rn > tol * theta[j].abs().max(1.0) {
                done = false;
            }
            residuals.push((rn, r));
        }
        if done {
            let values = theta[..k].to_vec();
            let vectors = want_vectors.then(|| Mat::from_fn(n, k, |i, j| ritz[j][i]));
            return Ok(Eigs { values, vectors });
        }
        if m + nb > max_basis {
            basis = Vec::with_capacity(max_basis);
            hbasis = Vec::with_capacity(max_basis);
            for (x, hx) in ritz.into_iter().zip(hritz) {
                basis.push(x);
                hbasis.push(hx);
            }
        }
        let mut added = 0;
        for (j, (rn, r)) in residuals.into_iter().enumerate() {
            if rn <= tol * theta[j].abs().max(1.0) {
                continue;
            }
            let mut t: Vec<c64> = r
                .iter()
                .zip(&diag)
                .map(|(ri, d)| {
                    let mut den = theta[j] - d;
                    if den.abs() < 1e-8 {
                        den = 1e-8f64.copysign(den);
                    }
                    ri / den
                })
                .collect();
            if orthonormalise(&mut t, &basis).is_some() {
                hbasis.push(matvec(h, &t));
                basis.push(t);
                added += 1;
            }
        }
        if added == 0 {
            let mut v: Vec<c64> = (0..n)
                .map(|_| c64::new(splitmix(&mut seed), splitmix(&mut seed)))
                .collect();
            if orthonormalise(&mut v, &basis).is_none() {
                return Err(Error::Eigensolver("Davidson search space exhausted".into()));
            }
            hbasis.push(matvec(h, &v));
            basis.push(v);
        }
    }
    Err(Error::Eigensolver("Davidson iteration did not converge".into()))
}
