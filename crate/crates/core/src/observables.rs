//! Derived quantities of steady states: populations, coherence maps and
//! length, optimized-to-uniform ratio maps, and the local energy
//! mismatch of a chain.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;

/// Denominators below this are treated as exactly zero.
const NEAR_ZERO: f64 = 1e-14;

/// Site populations `Re rho_nn`. Sums to one for any valid state.
pub fn populations(rho: &DensityMatrix) -> Vec<f64> {
    (0..rho.n_sites()).map(|k| rho.element(k, k).re).collect()
}

/// Magnitudes of the off-diagonal elements, `|rho_mn|` with the diagonal
/// zeroed. Symmetric and non-negative by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMap {
    pub magnitudes: DMatrix<f64>,
}

pub fn coherence_map(rho: &DensityMatrix) -> CoherenceMap {
    let n = rho.n_sites();
    let magnitudes = DMatrix::from_fn(n, n, |r, c| if r == c { 0.0 } else { rho.element(r, c).norm() });
    CoherenceMap { magnitudes }
}

/// Magnitude-weighted average distance of the coherences,
///
/// ```text
/// ell = sum_{m != n} |m-n| |rho_mn|  /  sum_{m != n} |rho_mn| .
/// ```
///
/// A diagonal state has no coherent extent; the degenerate `0/0` case is
/// defined as `0`.
pub fn coherence_length(rho: &DensityMatrix) -> f64 {
    let n = rho.n_sites();
    let mut weighted = 0.0;
    let mut total = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                let mag = rho.element(r, c).norm();
                weighted += (r as f64 - c as f64).abs() * mag;
                total += mag;
            }
        }
    }
    if total < NEAR_ZERO {
        0.0
    } else {
        weighted / total
    }
}

/// Element-wise `|rho_o| / |rho_u|` with the diagonal zeroed. Entries
/// where `|rho_u|` vanishes are reported as NaN so downstream consumers
/// can mask them instead of seeing infinities.
pub fn ratio_map(rho_o: &DensityMatrix, rho_u: &DensityMatrix) -> Result<DMatrix<f64>> {
    let n = rho_o.n_sites();
    if rho_u.n_sites() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho_u.n_sites() });
    }
    Ok(DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            return 0.0;
        }
        let denom = rho_u.element(r, c).norm();
        if denom < NEAR_ZERO {
            f64::NAN
        } else {
            rho_o.element(r, c).norm() / denom
        }
    }))
}

/// Local energy mismatch of the inner sites,
/// `delta_n = |e_n - e_{n-1}| + |e_n - e_{n+1}|` for `n = 2..N-1`
/// (1-based). The edge sites are excluded.
pub fn local_mismatch(energies: &[f64]) -> Result<Vec<f64>> {
    let n = energies.len();
    if n < 3 {
        return Err(Error::invalid(format!("local mismatch needs at least 3 sites, got {n}")));
    }
    Ok((1..n - 1)
        .map(|k| (energies[k] - energies[k - 1]).abs() + (energies[k] - energies[k + 1]).abs())
        .collect())
}
