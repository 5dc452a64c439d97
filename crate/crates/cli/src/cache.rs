//! On-disk cache of atomic ground states, keyed by a SHA-256 of the well,
//! λ and radial grid.

use std::fs;
use std::path::{Path, PathBuf};

use honeycomb_bands::atomic::{ground_state, AtomicWell, GroundState, RadialGrid};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::write_atomic;
use crate::Failure;

pub fn key(well: &AtomicWell, lambda: f64, grid: &RadialGrid) -> String {
    let doc = json!({ "well": well, "lambda": lambda, "grid": grid });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

fn path_for(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("ground-{key}.json"))
}

/// Returns the cached state if present and readable, solving and storing
/// it otherwise. A corrupt entry is recomputed.
pub fn ground_cached(
    dir: Option<&Path>,
    well: &AtomicWell,
    lambda: f64,
    grid: RadialGrid,
) -> Result<(GroundState, bool), Failure> {
    let Some(dir) = dir else {
        return Ok((ground_state(well, lambda, grid)?, false));
    };
    let path = path_for(dir, &key(well, lambda, &grid));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(gs) = GroundState::from_json(&text) {
            return Ok((gs, true));
        }
    }
    let gs = ground_state(well, lambda, grid)?;
    write_atomic(&path, gs.to_json().as_bytes())
        .map_err(|e| Failure::Config(format!("cannot write cache {}: {e}", path.display())))?;
    Ok((gs, false))
}
