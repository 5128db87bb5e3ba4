//! Chain specifications: site energies and power-law tunneling.
//!
//! A chain is a one-dimensional tight-binding system of `N` sites with
//! on-site energies `ε_n` and tunneling amplitudes that decay as a power
//! law with distance,
//!
//! ```text
//! J_{|n-m|} = j_max / |n-m|^alpha .
//! ```
//!
//! Two energy landscapes are provided: a descending ramp with constant
//! gap (Wannier-Stark setting) and i.i.d. uniform disorder on `[0, 1)`
//! (Anderson setting). All energies are dimensionless; `j_max` sets the
//! tunneling scale in the same units.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// A chain of `n_sites` sites with explicit on-site energies and
/// power-law tunneling `j_max / d^alpha` at site distance `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub energies: Vec<f64>,
    pub alpha: f64,
    pub j_max: f64,
}

impl ChainSpec {
    /// Build a chain from explicit energies. Fails unless `energies.len()
    /// == n_sites`, `alpha >= 0` and `j_max > 0` are all finite.
    pub fn new(energies: Vec<f64>, alpha: f64, j_max: f64) -> Result<Self> {
        let spec = ChainSpec { n_sites: energies.len(), energies, alpha, j_max };
        spec.validate()?;
        Ok(spec)
    }

    /// Check every invariant; used by `new` and by deserialization sites.
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::invalid(format!("n_sites must be >= 2, got {}", self.n_sites)));
        }
        if self.energies.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                got: self.energies.len(),
            });
        }
        if !self.energies.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid("energies must be finite"));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::invalid(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !self.j_max.is_finite() || self.j_max <= 0.0 {
            return Err(Error::invalid(format!("j_max must be finite and > 0, got {}", self.j_max)));
        }
        Ok(())
    }

    /// Tunneling matrix: entry `(n, m) = j_max / |n-m|^alpha` off the
    /// diagonal, zero on it. Exactly symmetric, all entries non-negative.
    pub fn tunneling_matrix(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        let mut j = DMatrix::zeros(n, n);
        for row in 0..n {
            for col in (row + 1)..n {
                let d = (col - row) as f64;
                let val = self.j_max / d.powf(self.alpha);
                j[(row, col)] = val;
                j[(col, row)] = val;
            }
        }
        j
    }

    /// Tight-binding Hamiltonian: energies on the diagonal, tunneling
    /// matrix off it. Real symmetric, hence Hermitian.
    pub fn hamiltonian(&self) -> DMatrix<C64> {
        let n = self.n_sites;
        let j = self.tunneling_matrix();
        DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(self.energies[r], 0.0)
            } else {
                C64::new(j[(r, c)], 0.0)
            }
        })
    }
}

/// Descending ramp: `energies[n] = offset - n * delta` (0-based), so the
/// first site sits at `offset` and the total drop is `(N-1) * delta`.
pub fn build_ramp(n_sites: usize, delta: f64, offset: f64, alpha: f64, j_max: f64) -> Result<ChainSpec> {
    if n_sites < 2 {
        return Err(Error::invalid(format!("ramp needs n_sites >= 2, got {n_sites}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("ramp gap delta must be positive, got {delta}")));
    }
    let energies = (0..n_sites).map(|n| offset - n as f64 * delta).collect();
    ChainSpec::new(energies, alpha, j_max)
}

/// Sample `n_sites` i.i.d. energies uniform on `[0, 1)` from a
/// deterministic stream. The stream is `ChaCha8` keyed by `master_seed`
/// with the realization index as the stream id, so ensembles can draw
/// realization `k` without generating realizations `0..k`.
pub fn sample_disorder_energies(n_sites: usize, master_seed: u64, realization: u64) -> Result<Vec<f64>> {
    if n_sites < 2 {
        return Err(Error::invalid(format!("disorder needs n_sites >= 2, got {n_sites}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization);
    Ok((0..n_sites).map(|_| rng.random::<f64>()).collect())
}

/// Disordered chain with energies from [`sample_disorder_energies`].
pub fn sample_disorder(
    n_sites: usize,
    master_seed: u64,
    realization: u64,
    alpha: f64,
    j_max: f64,
) -> Result<ChainSpec> {
    let energies = sample_disorder_energies(n_sites, master_seed, realization)?;
    ChainSpec::new(energies, alpha, j_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ramp_full_bias_endpoints() {
        let spec = build_ramp(12, 1.0 / 12.0, 0.0, 5.0, 0.1).unwrap();
        assert_eq!(spec.energies[0], 0.0);
        assert_relative_eq!(spec.energies[11], -11.0 / 12.0, max_relative = 1e-15);
        let drop = spec.energies[0] - spec.energies[11];
        assert_relative_eq!(drop, 11.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn ramp_half_bias_total_drop() {
        let spec = build_ramp(12, 0.5 / 12.0, 0.0, 3.0, 0.1).unwrap();
        let drop = spec.energies[0] - spec.energies[11];
        assert_relative_eq!(drop, 11.0 * 0.5 / 12.0, max_relative = 1e-15);
        assert!((drop - 0.458).abs() < 1e-3);
    }

    #[test]
    fn ramp_two_sites_with_offset() {
        let spec = build_ramp(2, 1.0, 5.0, 1.0, 0.1).unwrap();
        assert_eq!(spec.energies, vec![5.0, 4.0]);
    }

    #[test]
    fn ramp_rejects_bad_arguments() {
        assert!(build_ramp(1, 0.1, 0.0, 1.0, 0.1).is_err());
        assert!(build_ramp(4, 0.0, 0.0, 1.0, 0.1).is_err());
        assert!(build_ramp(4, -0.5, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn disorder_is_deterministic_per_seed() {
        let a = sample_disorder_energies(12, 7, 3).unwrap();
        let b = sample_disorder_energies(12, 7, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_disorder_energies(12, 7, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn disorder_values_in_unit_interval() {
        let e = sample_disorder_energies(12, 42, 0).unwrap();
        assert_eq!(e.len(), 12);
        assert!(e.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn disorder_pooled_mean_near_half() {
        // Law-of-large-numbers check on the chosen PRNG: 1e5 pooled draws.
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in 0..10_000u64 {
            for x in sample_disorder_energies(10, 123, r).unwrap() {
                assert!((0.0..1.0).contains(&x));
                sum += x;
                count += 1;
            }
        }
        assert_eq!(count, 100_000);
        let mean = sum / count as f64;
        assert!((mean - 0.5).abs() < 0.01, "pooled mean {mean} outside 0.5 +/- 0.01");
    }

    #[test]
    fn tunneling_entries_match_power_law() {
        let spec = ChainSpec::new(vec![0.0, 0.0, 0.0], 1.0, 0.1).unwrap();
        let j = spec.tunneling_matrix();
        assert_relative_eq!(j[(0, 1)], 0.1, max_relative = 1e-15);
        assert_relative_eq!(j[(0, 2)], 0.05, max_relative = 1e-15);

        let spec5 = ChainSpec::new(vec![0.0, 0.0, 0.0], 5.0, 0.1).unwrap();
        let j5 = spec5.tunneling_matrix();
        assert_relative_eq!(j5[(0, 2)], 0.1 / 32.0, max_relative = 1e-15);

        let spec0 = ChainSpec::new(vec![0.0; 4], 0.0, 0.1).unwrap();
        let j0 = spec0.tunneling_matrix();
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(j0[(r, c)], 0.1);
                }
            }
        }
    }

    #[test]
    fn tunneling_is_symmetric_nonnegative_zero_diagonal() {
        let spec = sample_disorder(9, 5, 0, 3.0, 0.1).unwrap();
        let j = spec.tunneling_matrix();
        for r in 0..9 {
            assert_eq!(j[(r, r)], 0.0);
            for c in 0..9 {
                assert_eq!(j[(r, c)], j[(c, r)]);
                assert!(j[(r, c)] >= 0.0);
            }
        }
    }

    #[test]
    fn short_range_second_neighbor_ratio() {
        // alpha = 5 keeps J2/J1 = 2^-5 = 0.03125 < 0.04: effectively
        // nearest-neighbor tunneling.
        let spec = ChainSpec::new(vec![0.0; 3], 5.0, 0.1).unwrap();
        let j = spec.tunneling_matrix();
        let ratio = j[(0, 2)] / j[(0, 1)];
        assert_relative_eq!(ratio, 2f64.powi(-5), max_relative = 1e-15);
        assert!(ratio < 0.04);
    }

    #[test]
    fn hamiltonian_two_site_block() {
        let delta = 0.25;
        let spec = ChainSpec::new(vec![0.0, -delta], 2.0, 0.1).unwrap();
        let h = spec.hamiltonian();
        assert_eq!(h[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(h[(1, 1)], C64::new(-delta, 0.0));
        assert_eq!(h[(0, 1)], C64::new(0.1, 0.0));
        assert_eq!(h[(1, 0)], C64::new(0.1, 0.0));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let spec = sample_disorder(8, 11, 2, 1.0, 0.1).unwrap();
        let h = spec.hamiltonian();
        let diff = (&h - h.adjoint()).norm();
        assert!(diff == 0.0, "hamiltonian not exactly Hermitian, diff {diff}");
    }

    #[test]
    fn spectrum_shifts_with_uniform_energy_offset() {
        let spec = sample_disorder(6, 3, 1, 3.0, 0.1).unwrap();
        let c = 0.7;
        let shifted = ChainSpec::new(
            spec.energies.iter().map(|e| e + c).collect(),
            spec.alpha,
            spec.j_max,
        )
        .unwrap();
        let mut ev_a: Vec<f64> = spec.hamiltonian().symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut ev_b: Vec<f64> = shifted.hamiltonian().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev_a.sort_by(f64::total_cmp);
        ev_b.sort_by(f64::total_cmp);
        for (a, b) in ev_a.iter().zip(&ev_b) {
            assert_relative_eq!(a + c, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn chain_spec_json_round_trip() {
        let spec = build_ramp(5, 0.2, 0.0, 3.0, 0.1).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ChainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        // Key names are part of the file format.
        for key in ["n_sites", "energies", "alpha", "j_max"] {
            assert!(json.contains(key), "missing key {key} in {json}");
        }
    }

    #[test]
    fn chain_spec_json_rejects_unknown_keys() {
        let json = r#"{"n_sites":2,"energies":[0.0,1.0],"alpha":1.0,"j_max":0.1,"extra":3}"#;
        assert!(serde_json::from_str::<ChainSpec>(json).is_err());
    }
}
