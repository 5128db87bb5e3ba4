//! Browser bindings: a thin JSON facade over the transport simulator for
//! the static demo page.
//!
//! Each exported function returns a JSON string so the page needs no
//! generated TypeScript types; errors surface as rejected strings. The
//! compute kernels stay synchronous and are budgeted through explicit
//! step caps so the UI remains predictable.

use serde_json::json;
use wasm_bindgen::prelude::*;

use enaqt_core::chain::{build_ramp, sample_disorder, ChainSpec};
use enaqt_core::herm::{HermGenerator, HermScratch};
use enaqt_core::observables::{coherence_length, coherence_map, populations, ratio_map};
use enaqt_core::optimizer::{log_grid, optimize_local, scan_uniform, OptimizerConfig};

fn parse_system(system: &str, n_sites: usize, alpha: f64, seed: u64) -> Result<ChainSpec, String> {
    let spec = match system {
        "ramp" => build_ramp(n_sites, 1.0 / n_sites as f64, 0.0, alpha, 0.1),
        "half" => build_ramp(n_sites, 0.5 / n_sites as f64, 0.0, alpha, 0.1),
        "disorder" => sample_disorder(n_sites, seed, 0, alpha, 0.1),
        other => return Err(format!("unknown system {other:?} (expected ramp, half or disorder)")),
    };
    spec.map_err(|e| e.to_string())
}

fn budget_config(max_steps: usize) -> OptimizerConfig {
    OptimizerConfig { max_steps: max_steps.clamp(30, 50_000), ..OptimizerConfig::default() }
}

/// Uniform-dephasing flux curve with its refined peak.
pub fn scan_curve_json(system: &str, n_sites: usize, alpha: f64, seed: u64, points: usize) -> Result<String, String> {
    let spec = parse_system(system, n_sites, alpha, seed)?;
    let grid = log_grid(1e-4, 10.0, points.clamp(11, 201)).map_err(|e| e.to_string())?;
    let scan = scan_uniform(&spec, 0.1, &grid).map_err(|e| e.to_string())?;
    Ok(json!({
        "curve": scan.curve,
        "peak_gamma": scan.peak_gamma,
        "peak_flux": scan.peak_flux,
        "energies": spec.energies,
    })
    .to_string())
}

/// Site-optimized dephasing from the uniform peak: profile, populations,
/// coherence maps and the optimized-to-uniform ratio map.
pub fn optimize_profile_json(
    system: &str,
    n_sites: usize,
    alpha: f64,
    seed: u64,
    max_steps: usize,
) -> Result<String, String> {
    let spec = parse_system(system, n_sites, alpha, seed)?;
    let grid = log_grid(1e-4, 10.0, 41).map_err(|e| e.to_string())?;
    let scan = scan_uniform(&spec, 0.1, &grid).map_err(|e| e.to_string())?;
    let cfg = budget_config(max_steps);
    let result = optimize_local(&spec, 0.1, &vec![scan.peak_gamma; n_sites], &cfg)
        .map_err(|f| f.error.to_string())?;

    let gen = HermGenerator::new(&spec.hamiltonian(), 0.1).map_err(|e| e.to_string())?;
    let mut scratch = HermScratch::default();
    let rho_u = gen
        .steady_density(&vec![scan.peak_gamma; n_sites], &mut scratch)
        .map_err(|e| e.to_string())?;
    let rho_o = gen.steady_density(&result.gammas, &mut scratch).map_err(|e| e.to_string())?;

    let to_rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
    };
    let ratio = ratio_map(&rho_o, &rho_u).map_err(|e| e.to_string())?;
    // NaN is not valid JSON; masked ratio cells become null.
    let ratio_rows: Vec<Vec<Option<f64>>> = (0..ratio.nrows())
        .map(|r| {
            (0..ratio.ncols())
                .map(|c| {
                    let v = ratio[(r, c)];
                    v.is_finite().then_some(v)
                })
                .collect()
        })
        .collect();

    Ok(json!({
        "energies": spec.energies,
        "gamma_u": scan.peak_gamma,
        "eta_u": scan.peak_flux,
        "gammas_opt": result.gammas,
        "eta_opt": result.flux,
        "improvement": result.flux / scan.peak_flux - 1.0,
        "termination": result.termination,
        "steps": result.steps,
        "pop_uniform": populations(&rho_u),
        "pop_optimized": populations(&rho_o),
        "ell_u": coherence_length(&rho_u),
        "ell_opt": coherence_length(&rho_o),
        "coh_uniform": to_rows(&coherence_map(&rho_u).magnitudes),
        "coh_optimized": to_rows(&coherence_map(&rho_o).magnitudes),
        "ratio": ratio_rows,
    })
    .to_string())
}

/// Three-site flux landscape over a `(Gamma_2, Gamma_3)` log grid for one
/// tunneling exponent, site 1 noise-free.
pub fn three_site_landscape_json(alpha: f64, points: usize) -> Result<String, String> {
    let spec = build_ramp(3, 1.0 / 3.0, 0.0, alpha, 0.1).map_err(|e| e.to_string())?;
    let gen = HermGenerator::new(&spec.hamiltonian(), 0.1).map_err(|e| e.to_string())?;
    let mut scratch = HermScratch::default();
    let grid = log_grid(1e-4, 10.0, points.clamp(11, 101)).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut peak = (0.0, 0.0, f64::MIN);
    for &g3 in &grid {
        let mut row = Vec::with_capacity(grid.len());
        for &g2 in &grid {
            let eta = gen.flux(&[0.0, g2, g3], &mut scratch).map_err(|e| e.to_string())?;
            if eta > peak.2 {
                peak = (g2, g3, eta);
            }
            row.push(eta);
        }
        rows.push(row);
    }
    Ok(json!({
        "grid": grid,
        "eta": rows,
        "peak_gamma2": peak.0,
        "peak_gamma3": peak.1,
        "peak_flux": peak.2,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn scan_curve(system: &str, n_sites: usize, alpha: f64, seed: u64, points: usize) -> Result<String, JsValue> {
    scan_curve_json(system, n_sites, alpha, seed, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn optimize_profile(
    system: &str,
    n_sites: usize,
    alpha: f64,
    seed: u64,
    max_steps: usize,
) -> Result<String, JsValue> {
    optimize_profile_json(system, n_sites, alpha, seed, max_steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn three_site_landscape(alpha: f64, points: usize) -> Result<String, JsValue> {
    three_site_landscape_json(alpha, points).map_err(|e| JsValue::from_str(&e))
}
