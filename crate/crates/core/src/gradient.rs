//! Flux gradients with respect to `log10 Gamma_n`.
//!
//! The steady state is defined implicitly by a linear system, so the
//! exact gradient comes from one adjoint solve plus a cheap contraction
//! per site; see [`crate::herm`]. A central finite-difference gradient
//! over the reference complex solver is kept as the validation oracle
//! and is never the production path.

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::herm::{HermGenerator, HermScratch};
use crate::lindblad::{build_liouvillian, flux, steady_state, NoiseProfile};

/// Default central-difference step in `log10 Gamma`.
pub const FD_DEFAULT_STEP: f64 = 1e-4;

/// Gradient of the steady-state flux with respect to `log10 Gamma_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxGradient {
    pub values: Vec<f64>,
}

/// Exact adjoint-sensitivity gradient of `eta` with respect to
/// `log10 Gamma_n` at the given noise profile. All rates must be
/// strictly positive.
pub fn flux_gradient(spec: &ChainSpec, noise: &NoiseProfile) -> Result<FluxGradient> {
    spec.validate()?;
    if noise.gammas.len() != spec.n_sites {
        return Err(Error::DimensionMismatch { expected: spec.n_sites, got: noise.gammas.len() });
    }
    let gen = HermGenerator::new(&spec.hamiltonian(), noise.gamma_l)?;
    let mut scratch = HermScratch::default();
    let (_, values) = gen.flux_and_log_gradient(&noise.gammas, &mut scratch)?;
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("gradient has non-finite components".into()));
    }
    Ok(FluxGradient { values })
}

/// Central finite-difference gradient in `log10 Gamma`, re-solving the
/// steady state through the reference complex path per perturbation.
pub fn fd_gradient(spec: &ChainSpec, noise: &NoiseProfile, step: f64) -> Result<FluxGradient> {
    spec.validate()?;
    if !(step > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be > 0, got {step}")));
    }
    if !noise.gammas.iter().all(|g| *g > 0.0) {
        return Err(Error::invalid("log-gradient requires all dephasing rates > 0"));
    }
    let h = spec.hamiltonian();
    let eval = |gammas: Vec<f64>| -> Result<f64> {
        let perturbed = NoiseProfile::new(gammas, noise.gamma_l)?;
        let rho = steady_state(&build_liouvillian(&h, &perturbed)?)?;
        Ok(flux(&rho, noise.gamma_l))
    };
    let mut values = Vec::with_capacity(spec.n_sites);
    for k in 0..spec.n_sites {
        let log_g = noise.gammas[k].log10();
        let mut up = noise.gammas.clone();
        up[k] = 10f64.powf(log_g + step);
        let mut down = noise.gammas.clone();
        down[k] = 10f64.powf(log_g - step);
        values.push((eval(up)? - eval(down)?) / (2.0 * step));
    }
    Ok(FluxGradient { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_ramp, sample_disorder};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_gradients_agree(adj: &[f64], fd: &[f64], rel: f64, abs_floor: f64) {
        for (k, (a, f)) in adj.iter().zip(fd).enumerate() {
            let diff = (a - f).abs();
            let ok = diff <= abs_floor || diff <= rel * f.abs().max(a.abs());
            assert!(ok, "component {k}: adjoint {a:.6e} vs fd {f:.6e} (diff {diff:.3e})");
        }
    }

    fn random_gammas(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| 10f64.powf(-4.0 + 4.0 * rng.random::<f64>())).collect()
    }

    #[test]
    fn adjoint_matches_finite_differences_on_random_configurations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        for alpha in [1.0, 3.0, 5.0] {
            for case in 0..4 {
                let spec = if case % 2 == 0 {
                    build_ramp(6, 1.0 / 6.0, 0.0, alpha, 0.1).unwrap()
                } else {
                    sample_disorder(6, 99 + case as u64, case as u64, alpha, 0.1).unwrap()
                };
                let noise = NoiseProfile::new(random_gammas(&mut rng, 6), 0.1).unwrap();
                let adj = flux_gradient(&spec, &noise).unwrap();
                let fd = fd_gradient(&spec, &noise, FD_DEFAULT_STEP).unwrap();
                assert_gradients_agree(&adj.values, &fd.values, 1e-4, 1e-6);
                checked += 1;
            }
        }
        assert_eq!(checked, 12);
    }

    #[test]
    fn fd_step_halving_improves_agreement() {
        let spec = build_ramp(5, 0.2, 0.0, 3.0, 0.1).unwrap();
        let noise = NoiseProfile::new(vec![0.08, 0.2, 0.05, 0.3, 0.1], 0.1).unwrap();
        let adj = flux_gradient(&spec, &noise).unwrap();
        let coarse = fd_gradient(&spec, &noise, 1e-3).unwrap();
        let fine = fd_gradient(&spec, &noise, 1e-4).unwrap();
        let err = |fd: &FluxGradient| -> f64 {
            fd.values
                .iter()
                .zip(&adj.values)
                .map(|(f, a)| (f - a).abs())
                .fold(0.0, f64::max)
        };
        assert!(
            err(&fine) < err(&coarse),
            "halving the step should reduce disagreement: {:.3e} vs {:.3e}",
            err(&fine),
            err(&coarse)
        );
    }

    #[test]
    fn chain_rule_against_raw_gamma_differences() {
        // d eta / d log10 G = ln(10) * G * d eta / d G.
        let spec = build_ramp(5, 0.2, 0.0, 1.0, 0.1).unwrap();
        let noise = NoiseProfile::new(vec![0.1, 0.25, 0.06, 0.18, 0.09], 0.1).unwrap();
        let adj = flux_gradient(&spec, &noise).unwrap();
        let h = spec.hamiltonian();
        for k in 0..5 {
            let dg = 1e-7 * noise.gammas[k];
            let eval = |g: f64| {
                let mut gs = noise.gammas.clone();
                gs[k] = g;
                let rho = steady_state(&build_liouvillian(&h, &NoiseProfile::new(gs, 0.1).unwrap()).unwrap()).unwrap();
                flux(&rho, 0.1)
            };
            let raw = (eval(noise.gammas[k] + dg) - eval(noise.gammas[k] - dg)) / (2.0 * dg);
            let expected = std::f64::consts::LN_10 * noise.gammas[k] * raw;
            assert_relative_eq!(adj.values[k], expected, max_relative = 1e-4, epsilon = 1e-9);
        }
    }

    #[test]
    fn gradient_vanishes_as_chain_decouples() {
        // With j_max -> 0 the chain decouples, the flux dies and so does
        // its dephasing sensitivity.
        let noise = NoiseProfile::new(vec![0.1, 0.2, 0.15, 0.12], 0.1).unwrap();
        let norm = |j_max: f64| {
            let spec = build_ramp(4, 0.25, 0.0, 5.0, j_max).unwrap();
            flux_gradient(&spec, &noise)
                .unwrap()
                .values
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()))
        };
        let g4 = norm(1e-4);
        let g5 = norm(1e-5);
        assert!(g5 < g4, "gradient should shrink with j_max: {g5:.3e} vs {g4:.3e}");
        assert!(g5 < 1e-9);
    }

    #[test]
    fn symmetric_chain_has_symmetric_gradient() {
        // Uniform energies, alpha = 0 (all-to-all equal tunneling) and
        // uniform dephasing: relabeling the interior sites is a symmetry,
        // so their gradient components coincide.
        let spec = ChainSpec::new(vec![0.3; 5], 0.0, 0.1).unwrap();
        let noise = NoiseProfile::uniform(5, 0.2, 0.1).unwrap();
        for grad in [
            flux_gradient(&spec, &noise).unwrap(),
            fd_gradient(&spec, &noise, FD_DEFAULT_STEP).unwrap(),
        ] {
            for k in 2..4 {
                assert_relative_eq!(grad.values[1], grad.values[k], max_relative = 1e-8, epsilon = 1e-12);
            }
        }
    }

    use crate::chain::ChainSpec;

    #[test]
    fn rejects_nonpositive_rates() {
        let spec = build_ramp(4, 0.25, 0.0, 1.0, 0.1).unwrap();
        let noise = NoiseProfile::new(vec![0.1, 0.0, 0.1, 0.1], 0.1).unwrap();
        assert!(flux_gradient(&spec, &noise).is_err());
        assert!(fd_gradient(&spec, &noise, 1e-4).is_err());
        let ok = NoiseProfile::uniform(4, 0.1, 0.1).unwrap();
        assert!(fd_gradient(&spec, &ok, 0.0).is_err());
    }
}
