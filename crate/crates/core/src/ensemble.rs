//! Disorder ensembles: generate realizations, optimize each, and compute
//! the aggregate statistics behind the ensemble figures.
//!
//! Each realization samples its on-site energies, locates the best
//! uniform dephasing rate by a scan, then runs the bounded ascent seeded
//! at that uniform optimum. Realizations carry independent derived
//! seeds, so they can run in parallel and in any order with bit-identical
//! results.

use serde::{Deserialize, Serialize};

use crate::chain::{sample_disorder_energies, ChainSpec};
use crate::error::{Error, Result};
use crate::herm::{HermGenerator, HermScratch};
use crate::map_indexed;
use crate::observables::{coherence_length, local_mismatch};
use crate::optimizer::{optimize_local, scan_uniform, OptimizerConfig, Termination};
use crate::stats::{boxplot_stats, mean, spearman, std_dev, BoxplotStats};

/// Schema version stamped into every persisted realization record.
pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// Per-tunneling-range results of one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBlock {
    pub alpha: f64,
    /// Best uniform dephasing rate and its flux.
    pub gamma_u: f64,
    pub eta_u: f64,
    /// Site-optimized rates and their flux.
    pub gammas_opt: Vec<f64>,
    pub eta_opt: f64,
    /// Coherence lengths under uniform / optimized dephasing.
    pub ell_u: f64,
    pub ell_opt: f64,
    pub termination: Termination,
    pub steps: usize,
}

/// One disorder realization: its energies and the per-alpha results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub schema_version: u32,
    /// Realization index: stream id of the master-seeded generator.
    pub seed: u64,
    pub energies: Vec<f64>,
    pub blocks: Vec<AlphaBlock>,
}

/// Parameters of an ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_realizations: usize,
    pub n_sites: usize,
    pub alphas: Vec<f64>,
    pub gamma_l: f64,
    pub j_max: f64,
    pub master_seed: u64,
    pub optimizer: OptimizerConfig,
    /// Uniform-scan grid bounds and size.
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_points: usize,
}

impl EnsembleParams {
    pub fn standard(n_realizations: usize, n_sites: usize, master_seed: u64) -> Self {
        EnsembleParams {
            n_realizations,
            n_sites,
            alphas: vec![1.0, 3.0, 5.0],
            gamma_l: 0.1,
            j_max: 0.1,
            master_seed,
            optimizer: OptimizerConfig::default(),
            scan_lo: 1e-4,
            scan_hi: 10.0,
            scan_points: 51,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::invalid("ensemble needs at least one realization"));
        }
        if self.alphas.is_empty() {
            return Err(Error::invalid("ensemble needs at least one alpha"));
        }
        self.optimizer.validate()
    }
}

/// Ensemble output: completed records plus any per-realization failures
/// (index and message), which are recorded rather than fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub records: Vec<RealizationRecord>,
    pub failures: Vec<(u64, String)>,
}

fn run_realization(params: &EnsembleParams, realization: u64) -> Result<RealizationRecord> {
    let energies = sample_disorder_energies(params.n_sites, params.master_seed, realization)?;
    let grid = crate::optimizer::log_grid(params.scan_lo, params.scan_hi, params.scan_points)?;
    let mut blocks = Vec::with_capacity(params.alphas.len());
    for &alpha in &params.alphas {
        let spec = ChainSpec::new(energies.clone(), alpha, params.j_max)?;
        let scan = scan_uniform(&spec, params.gamma_l, &grid)?;
        let opt = optimize_local(&spec, params.gamma_l, &vec![scan.peak_gamma; params.n_sites], &params.optimizer)
            .map_err(Error::from)?;

        let gen = HermGenerator::new(&spec.hamiltonian(), params.gamma_l)?;
        let mut scratch = HermScratch::default();
        let rho_u = gen.steady_density(&vec![scan.peak_gamma; params.n_sites], &mut scratch)?;
        let rho_o = gen.steady_density(&opt.gammas, &mut scratch)?;

        blocks.push(AlphaBlock {
            alpha,
            gamma_u: scan.peak_gamma,
            eta_u: scan.peak_flux,
            gammas_opt: opt.gammas,
            eta_opt: opt.flux,
            ell_u: coherence_length(&rho_u),
            ell_opt: coherence_length(&rho_o),
            termination: opt.termination,
            steps: opt.steps,
        });
    }
    Ok(RealizationRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        seed: realization,
        energies,
        blocks,
    })
}

/// Run the full ensemble. Deterministic for a fixed `master_seed`; each
/// realization derives its own stream, so execution order is free.
pub fn run_ensemble(params: &EnsembleParams) -> Result<EnsembleRun> {
    params.validate()?;
    let outcomes = map_indexed(params.n_realizations, |r| run_realization(params, r as u64));
    let mut records = Vec::with_capacity(params.n_realizations);
    let mut failures = Vec::new();
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(record) => records.push(record),
            Err(e) => failures.push((r as u64, e.to_string())),
        }
    }
    Ok(EnsembleRun { records, failures })
}

/// Aggregate statistics of one tunneling range across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub n_records: usize,
    /// Mean of the per-realization relative flux improvements
    /// `eta_opt / eta_u - 1`.
    pub mean_flux_improvement: f64,
    pub std_flux_improvement: f64,
    /// Mean of the per-realization relative coherence-length
    /// improvements `ell_opt / ell_u - 1`.
    pub mean_ell_improvement: f64,
    pub std_ell_improvement: f64,
    pub mean_gamma_u: f64,
    pub mean_eta_u: f64,
    pub mean_eta_opt: f64,
    pub mean_ell_u: f64,
    pub mean_ell_opt: f64,
    /// Fraction of realizations with `eta_opt >= eta_u`.
    pub frac_improved: f64,
    /// Spearman correlation between optimized rates and local energy
    /// mismatches, pooled over inner sites of all realizations.
    pub spearman_gamma_mismatch: f64,
    /// Spearman correlation between per-realization flux ratios and
    /// coherence-length ratios.
    pub spearman_flux_ell: f64,
    pub n_converged: usize,
    pub n_boundary: usize,
    pub n_max_steps: usize,
}

fn blocks_for(records: &[RealizationRecord], alpha: f64) -> Vec<&AlphaBlock> {
    records
        .iter()
        .flat_map(|r| r.blocks.iter().filter(move |b| b.alpha == alpha))
        .collect()
}

/// Pooled `(Gamma_opt, delta_loc)` pairs over the inner sites of every
/// realization at a given alpha.
pub fn pooled_mismatch_pairs(records: &[RealizationRecord], alpha: f64) -> Vec<(f64, f64)> {
    let mut pairs = Vec::new();
    for record in records {
        let Ok(mismatch) = local_mismatch(&record.energies) else { continue };
        for block in record.blocks.iter().filter(|b| b.alpha == alpha) {
            for (k, &delta) in mismatch.iter().enumerate() {
                // Inner site k+1 (0-based) pairs with mismatch entry k.
                pairs.push((block.gammas_opt[k + 1], delta));
            }
        }
    }
    pairs
}

/// Summarize an ensemble per alpha, in the order the alphas appear in the
/// records. The aggregation is a deterministic single pass over the
/// records and is independent of their order.
pub fn summarize(records: &[RealizationRecord]) -> Vec<AlphaSummary> {
    let mut alphas: Vec<f64> = Vec::new();
    for r in records {
        for b in &r.blocks {
            if !alphas.contains(&b.alpha) {
                alphas.push(b.alpha);
            }
        }
    }
    alphas.sort_by(f64::total_cmp);

    alphas
        .into_iter()
        .map(|alpha| {
            let blocks = blocks_for(records, alpha);
            let flux_ratio: Vec<f64> = blocks.iter().map(|b| b.eta_opt / b.eta_u).collect();
            let ell_ratio: Vec<f64> = blocks.iter().map(|b| b.ell_opt / b.ell_u).collect();
            let flux_improvement: Vec<f64> = flux_ratio.iter().map(|r| r - 1.0).collect();
            let ell_improvement: Vec<f64> = ell_ratio.iter().map(|r| r - 1.0).collect();

            let pairs = pooled_mismatch_pairs(records, alpha);
            let (gammas, mismatches): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

            AlphaSummary {
                alpha,
                n_records: blocks.len(),
                mean_flux_improvement: mean(&flux_improvement),
                std_flux_improvement: std_dev(&flux_improvement),
                mean_ell_improvement: mean(&ell_improvement),
                std_ell_improvement: std_dev(&ell_improvement),
                mean_gamma_u: mean(&blocks.iter().map(|b| b.gamma_u).collect::<Vec<_>>()),
                mean_eta_u: mean(&blocks.iter().map(|b| b.eta_u).collect::<Vec<_>>()),
                mean_eta_opt: mean(&blocks.iter().map(|b| b.eta_opt).collect::<Vec<_>>()),
                mean_ell_u: mean(&blocks.iter().map(|b| b.ell_u).collect::<Vec<_>>()),
                mean_ell_opt: mean(&blocks.iter().map(|b| b.ell_opt).collect::<Vec<_>>()),
                frac_improved: {
                    let improved = blocks.iter().filter(|b| b.eta_opt >= b.eta_u).count();
                    improved as f64 / blocks.len().max(1) as f64
                },
                spearman_gamma_mismatch: spearman(&gammas, &mismatches).unwrap_or(f64::NAN),
                spearman_flux_ell: spearman(&flux_ratio, &ell_ratio).unwrap_or(f64::NAN),
                n_converged: blocks.iter().filter(|b| b.termination == Termination::Converged).count(),
                n_boundary: blocks.iter().filter(|b| b.termination == Termination::BoundaryHit).count(),
                n_max_steps: blocks.iter().filter(|b| b.termination == Termination::MaxSteps).count(),
            }
        })
        .collect()
}

/// One bin of a binned boxplot: its center and the box statistics of the
/// values that fell into it. Empty bins are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedBox {
    pub bin_center: f64,
    pub count: usize,
    pub stats: BoxplotStats,
}

fn binned_boxplots(pairs: &[(f64, f64)], bin_width: f64, lo: f64, hi: f64) -> Vec<BinnedBox> {
    let n_bins = ((hi - lo) / bin_width).round() as usize;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for &(value, key) in pairs {
        if key < lo || !key.is_finite() {
            continue;
        }
        let idx = (((key - lo) / bin_width) as usize).min(n_bins.saturating_sub(1));
        bins[idx].push(value);
    }
    bins.into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty())
        .map(|(i, values)| BinnedBox {
            bin_center: lo + (i as f64 + 0.5) * bin_width,
            count: values.len(),
            stats: boxplot_stats(&values).expect("non-empty bin"),
        })
        .collect()
}

/// Bin width used for the mismatch boxplots.
pub const MISMATCH_BIN_WIDTH: f64 = 0.25;
/// Mismatch range covered by the bins: `delta_loc` of `U(0,1)` energies
/// lies in `[0, 2]`.
pub const MISMATCH_RANGE: (f64, f64) = (0.0, 2.0);

/// Correlate optimized dephasing with local energy mismatch at one alpha:
/// boxplots of `Gamma_opt` per mismatch bin plus the global Spearman
/// coefficient over the pooled pairs.
pub fn correlate_mismatch(records: &[RealizationRecord], alpha: f64) -> Result<(Vec<BinnedBox>, f64)> {
    let pairs = pooled_mismatch_pairs(records, alpha);
    if pairs.is_empty() {
        return Err(Error::invalid(format!("no records at alpha = {alpha}")));
    }
    let (gammas, mismatches): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let r = spearman(&gammas, &mismatches)?;
    let keyed: Vec<(f64, f64)> = pairs.into_iter().collect();
    Ok((binned_boxplots(&keyed, MISMATCH_BIN_WIDTH, MISMATCH_RANGE.0, MISMATCH_RANGE.1), r))
}

/// Bin width for the flux-ratio-vs-coherence-ratio boxplots.
pub const ELL_RATIO_BIN_WIDTH: f64 = 0.1;

/// Boxplots of flux improvements binned by coherence-length ratio, plus
/// the Spearman coefficient between the two ratios.
pub fn flux_vs_ell_boxplots(records: &[RealizationRecord], alpha: f64) -> Result<(Vec<BinnedBox>, f64)> {
    let blocks = blocks_for(records, alpha);
    if blocks.is_empty() {
        return Err(Error::invalid(format!("no records at alpha = {alpha}")));
    }
    let flux_ratio: Vec<f64> = blocks.iter().map(|b| b.eta_opt / b.eta_u).collect();
    let ell_ratio: Vec<f64> = blocks.iter().map(|b| b.ell_opt / b.ell_u).collect();
    let r = spearman(&flux_ratio, &ell_ratio)?;
    let pairs: Vec<(f64, f64)> = flux_ratio.into_iter().zip(ell_ratio).collect();
    let lo = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + 1e-12;
    let lo = (lo / ELL_RATIO_BIN_WIDTH).floor() * ELL_RATIO_BIN_WIDTH;
    let hi = (hi / ELL_RATIO_BIN_WIDTH).ceil() * ELL_RATIO_BIN_WIDTH;
    Ok((binned_boxplots(&pairs, ELL_RATIO_BIN_WIDTH, lo, hi), r))
}

/// Histogram bin width in `log10 Gamma` for optimized-rate histograms.
pub const GAMMA_HIST_BIN_WIDTH: f64 = 0.25;

/// Histogram of all optimized `log10 Gamma_n` values at one alpha over
/// `[-7, 0]`, as `(bin_center, count)`.
pub fn gamma_histogram(records: &[RealizationRecord], alpha: f64) -> Vec<(f64, usize)> {
    let lo = -7.0;
    let hi = 0.0;
    let n_bins = ((hi - lo) / GAMMA_HIST_BIN_WIDTH).round() as usize;
    let mut counts = vec![0usize; n_bins];
    for block in blocks_for(records, alpha) {
        for &g in &block.gammas_opt {
            let lg = g.log10().clamp(lo, hi);
            let idx = (((lg - lo) / GAMMA_HIST_BIN_WIDTH) as usize).min(n_bins - 1);
            counts[idx] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + (i as f64 + 0.5) * GAMMA_HIST_BIN_WIDTH, c))
        .collect()
}
