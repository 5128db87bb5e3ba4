//! Implementations of the four subcommands: each resolves its inputs,
//! runs the core routines, and writes headered CSV/JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use enaqt_core::analytic3::{eta_lr, eta_nn, three_site_numeric_flux, ThreeSiteMode, ThreeSiteParams};
use enaqt_core::chain::ChainSpec;
use enaqt_core::ensemble::{
    correlate_mismatch, flux_vs_ell_boxplots, gamma_histogram, run_ensemble, summarize, AlphaSummary,
    EnsembleParams, EnsembleRun,
};
use enaqt_core::export;
use enaqt_core::herm::{HermGenerator, HermScratch};
use enaqt_core::lindblad::{build_liouvillian, steady_state, DensityMatrix, NoiseProfile};
use enaqt_core::observables::{coherence_length, coherence_map, populations, ratio_map};
use enaqt_core::optimizer::{log_grid, multi_start, optimize_local, scan_uniform, OptimizationResult};

use crate::config::{ResolvedConfig, SystemKind};
use crate::CliError;

fn alpha_tag(alpha: f64) -> String {
    if alpha.fract() == 0.0 {
        format!("{}", alpha as i64)
    } else {
        format!("{alpha}").replace('.', "p")
    }
}

fn write_file(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    fs::write(&path, content)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_json(out_dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_file(out_dir, name, &text)
}

fn config_value(cfg: &ResolvedConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Uniform-dephasing scan curves and refined peaks, one curve per alpha.
pub fn cmd_scan(cfg: &ResolvedConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = log_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points).map_err(CliError::usage_from)?;
    let mut written = Vec::new();
    let mut peaks = Vec::new();
    for &alpha in &cfg.alphas {
        let spec = cfg.chain(alpha).map_err(CliError::usage_from)?;
        let scan = scan_uniform(&spec, cfg.gamma_l, &grid).map_err(CliError::runtime_from)?;
        let csv = format!("{}{}", cfg.csv_header(), export::curve_csv(&scan.curve));
        written.push(write_file(out_dir, &format!("scan_alpha{}.csv", alpha_tag(alpha)), &csv)?);
        peaks.push(json!({
            "alpha": alpha,
            "gamma_u": scan.peak_gamma,
            "eta_u": scan.peak_flux,
        }));
    }
    written.push(write_json(
        out_dir,
        "scan_peaks.json",
        &json!({ "config": config_value(cfg), "peaks": peaks }),
    )?);
    Ok(written)
}

struct OptimizedStates {
    scan_gamma_u: f64,
    scan_eta_u: f64,
    result: OptimizationResult,
    rho_uniform: DensityMatrix,
    rho_optimized: DensityMatrix,
    rho_coherent: DensityMatrix,
}

fn optimize_one(cfg: &ResolvedConfig, spec: &ChainSpec, grid: &[f64]) -> Result<OptimizedStates, CliError> {
    let scan = scan_uniform(spec, cfg.gamma_l, grid).map_err(CliError::runtime_from)?;
    let result = match cfg.system {
        SystemKind::Ramp => multi_start(spec, cfg.gamma_l, cfg.starts, cfg.seed, &cfg.optimizer)
            .map_err(CliError::runtime_from)?,
        SystemKind::Disorder | SystemKind::File => {
            optimize_local(spec, cfg.gamma_l, &vec![scan.peak_gamma; spec.n_sites], &cfg.optimizer)
                .map_err(|f| CliError::runtime(f.error.to_string()))?
        }
    };

    let gen = HermGenerator::new(&spec.hamiltonian(), cfg.gamma_l).map_err(CliError::runtime_from)?;
    let mut scratch = HermScratch::default();
    let rho_uniform = gen
        .steady_density(&vec![scan.peak_gamma; spec.n_sites], &mut scratch)
        .map_err(CliError::runtime_from)?;
    let rho_optimized = gen.steady_density(&result.gammas, &mut scratch).map_err(CliError::runtime_from)?;
    // The zero-dephasing baseline is nearly degenerate; use the refined
    // reference solver.
    let coherent_noise =
        NoiseProfile::new(vec![0.0; spec.n_sites], cfg.gamma_l).map_err(CliError::runtime_from)?;
    let rho_coherent = build_liouvillian(&spec.hamiltonian(), &coherent_noise)
        .and_then(|liou| steady_state(&liou))
        .map_err(CliError::runtime_from)?;

    Ok(OptimizedStates {
        scan_gamma_u: scan.peak_gamma,
        scan_eta_u: scan.peak_flux,
        result,
        rho_uniform,
        rho_optimized,
        rho_coherent,
    })
}

/// Site-optimized dephasing profiles with populations, coherence maps and
/// ratio maps per alpha.
pub fn cmd_optimize(cfg: &ResolvedConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = log_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points).map_err(CliError::usage_from)?;
    let mut written = Vec::new();
    let mut summaries = Vec::new();
    for &alpha in &cfg.alphas {
        let tag = alpha_tag(alpha);
        let spec = cfg.chain(alpha).map_err(CliError::usage_from)?;
        let states = optimize_one(cfg, &spec, &grid)?;
        let header = cfg.csv_header();

        let profile = export::site_columns_csv(
            &["energy", "gamma_opt"],
            &[&spec.energies, &states.result.gammas],
        );
        written.push(write_file(out_dir, &format!("profile_alpha{tag}.csv"), &format!("{header}{profile}"))?);

        let pops = export::site_columns_csv(
            &["pop_coherent", "pop_uniform", "pop_optimized"],
            &[
                &populations(&states.rho_coherent),
                &populations(&states.rho_uniform),
                &populations(&states.rho_optimized),
            ],
        );
        written.push(write_file(out_dir, &format!("populations_alpha{tag}.csv"), &format!("{header}{pops}"))?);

        for (name, rho) in [
            ("coherent", &states.rho_coherent),
            ("uniform", &states.rho_uniform),
            ("optimized", &states.rho_optimized),
        ] {
            let map = export::matrix_csv(&coherence_map(rho).magnitudes);
            written.push(write_file(
                out_dir,
                &format!("coherence_{name}_alpha{tag}.csv"),
                &format!("{header}{map}"),
            )?);
            let dm = export::density_matrix_csv(rho);
            written.push(write_file(out_dir, &format!("rho_{name}_alpha{tag}.csv"), &format!("{header}{dm}"))?);
        }

        let ratios = ratio_map(&states.rho_optimized, &states.rho_uniform).map_err(CliError::runtime_from)?;
        written.push(write_file(
            out_dir,
            &format!("ratio_map_alpha{tag}.csv"),
            &format!("{header}{}", export::matrix_csv(&ratios)),
        )?);

        if let Some(trajectory) = &states.result.trajectory {
            written.push(write_file(
                out_dir,
                &format!("trajectory_alpha{tag}.csv"),
                &format!("{header}{}", export::trajectory_csv(trajectory)),
            )?);
        }

        summaries.push(json!({
            "alpha": alpha,
            "gamma_u": states.scan_gamma_u,
            "eta_u": states.scan_eta_u,
            "eta_opt": states.result.flux,
            "improvement": states.result.flux / states.scan_eta_u - 1.0,
            "ell_u": coherence_length(&states.rho_uniform),
            "ell_opt": coherence_length(&states.rho_optimized),
            "termination": states.result.termination,
            "steps": states.result.steps,
            "gammas_opt": states.result.gammas,
        }));
    }
    written.push(write_json(
        out_dir,
        "optimize_summary.json",
        &json!({ "config": config_value(cfg), "results": summaries }),
    )?);
    Ok(written)
}

#[derive(Serialize)]
struct SweepEntry {
    n_sites: usize,
    failures: usize,
    summaries: Vec<AlphaSummary>,
}

/// Disorder ensembles: records, histograms, boxplot data and summary
/// statistics, optionally swept over system sizes.
pub fn cmd_ensemble(cfg: &ResolvedConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if cfg.system != SystemKind::Disorder {
        return Err(CliError::usage("ensemble requires --system disorder".into()));
    }
    let sizes: Vec<usize> = if cfg.n_sweep { cfg.sweep_sizes.clone() } else { vec![cfg.n_sites] };
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for &n in &sizes {
        let params = EnsembleParams {
            n_realizations: cfg.realizations,
            n_sites: n,
            alphas: cfg.alphas.clone(),
            gamma_l: cfg.gamma_l,
            j_max: cfg.j_max,
            master_seed: cfg.seed,
            optimizer: cfg.optimizer.clone(),
            scan_lo: cfg.grid_lo,
            scan_hi: cfg.grid_hi,
            scan_points: cfg.grid_points,
        };
        let run = run_ensemble(&params).map_err(CliError::runtime_from)?;
        let suffix = if cfg.n_sweep { format!("_n{n}") } else { String::new() };
        written.push(write_file(out_dir, &format!("records{suffix}.ndjson"), &records_ndjson(cfg, &run)?)?);

        for &alpha in &cfg.alphas {
            let tag = alpha_tag(alpha);
            let header = cfg.csv_header();
            let hist = gamma_histogram(&run.records, alpha);
            written.push(write_file(
                out_dir,
                &format!("gamma_histogram_alpha{tag}{suffix}.csv"),
                &format!("{header}{}", export::histogram_csv(&hist)),
            )?);
            if let Ok((boxes, _)) = correlate_mismatch(&run.records, alpha) {
                written.push(write_file(
                    out_dir,
                    &format!("mismatch_boxplots_alpha{tag}{suffix}.csv"),
                    &format!("{header}{}", export::binned_boxplot_csv(&boxes)),
                )?);
            }
            if let Ok((boxes, _)) = flux_vs_ell_boxplots(&run.records, alpha) {
                written.push(write_file(
                    out_dir,
                    &format!("flux_ell_boxplots_alpha{tag}{suffix}.csv"),
                    &format!("{header}{}", export::binned_boxplot_csv(&boxes)),
                )?);
            }
        }

        entries.push(SweepEntry {
            n_sites: n,
            failures: run.failures.len(),
            summaries: summarize(&run.records),
        });
    }
    let summary_value = json!({
        "config": config_value(cfg),
        "runs": serde_json::to_value(&entries).map_err(|e| CliError::runtime(e.to_string()))?,
    });
    let name = if cfg.n_sweep { "size_sweep.json" } else { "ensemble_summary.json" };
    written.push(write_json(out_dir, name, &summary_value)?);
    Ok(written)
}

fn records_ndjson(cfg: &ResolvedConfig, run: &EnsembleRun) -> Result<String, CliError> {
    let mut out = String::new();
    let header = json!({
        "type": "header",
        "schema_version": enaqt_core::ensemble::RECORD_SCHEMA_VERSION,
        "config": config_value(cfg),
        "failures": run.failures,
    });
    out.push_str(&header.to_string());
    out.push('\n');
    for record in &run.records {
        out.push_str(&serde_json::to_string(record).map_err(|e| CliError::runtime(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// Three-site flux landscapes over `(Gamma_2, Gamma_3)` plus the
/// analytic-oracle comparison table.
pub fn cmd_analytic3(cfg: &ResolvedConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = log_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points).map_err(CliError::usage_from)?;
    let mut written = Vec::new();

    // Flux landscape of the exact power-law three-site chain, site 1
    // noise-free.
    for &alpha in &cfg.alphas {
        let spec = enaqt_core::build_ramp(3, default_three_site_delta(cfg), 0.0, alpha, cfg.j_max)
            .map_err(CliError::usage_from)?;
        let gen = HermGenerator::new(&spec.hamiltonian(), cfg.gamma_l).map_err(CliError::runtime_from)?;
        let mut scratch = HermScratch::default();
        let mut rows = Vec::with_capacity(grid.len() * grid.len());
        for &g2 in &grid {
            for &g3 in &grid {
                let eta = gen.flux(&[0.0, g2, g3], &mut scratch).map_err(CliError::runtime_from)?;
                rows.push((g2, g3, eta));
            }
        }
        let csv = format!("{}{}", cfg.csv_header(), export::landscape_csv(&rows));
        written.push(write_file(out_dir, &format!("landscape_alpha{}.csv", alpha_tag(alpha)), &csv)?);
    }

    // Oracle comparison: numeric vs second-order analytic flux while the
    // tunneling shrinks.
    let mut table = String::from("mode,j,gamma2,gamma3,eta_numeric,eta_analytic,rel_error\n");
    for mode in [ThreeSiteMode::NearestNeighbor, ThreeSiteMode::LongRange] {
        for j in [1e-2, 1e-3, 1e-4] {
            let gamma_l = j / 10.0;
            for g2 in [0.1, 0.3, 1.0] {
                for g3 in [0.1, 0.3, 1.0] {
                    let p = ThreeSiteParams { j1: j, j, delta: 0.3, gamma2: g2, gamma3: g3 };
                    let analytic = match mode {
                        ThreeSiteMode::NearestNeighbor => eta_nn(&p),
                        ThreeSiteMode::LongRange => eta_lr(&p),
                    }
                    .map_err(CliError::runtime_from)?;
                    let numeric = three_site_numeric_flux(&p, mode, gamma_l).map_err(CliError::runtime_from)?;
                    let rel = (numeric - analytic).abs() / analytic;
                    table.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        match mode {
                            ThreeSiteMode::NearestNeighbor => "nn",
                            ThreeSiteMode::LongRange => "lr",
                        },
                        export::fmt_f64(j),
                        export::fmt_f64(g2),
                        export::fmt_f64(g3),
                        export::fmt_f64(numeric),
                        export::fmt_f64(analytic),
                        export::fmt_f64(rel),
                    ));
                }
            }
        }
    }
    written.push(write_file(
        out_dir,
        "oracle_comparison.csv",
        &format!("{}{}", cfg.csv_header(), table),
    )?);
    Ok(written)
}

fn default_three_site_delta(cfg: &ResolvedConfig) -> f64 {
    // Uniform gap of the three-site ramp, scaled like the chain default.
    let full = 1.0 / 3.0;
    if cfg.half_bias {
        0.5 * full
    } else {
        full
    }
}
