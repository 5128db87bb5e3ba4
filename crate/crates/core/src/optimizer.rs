//! Uniform-dephasing scans and bounded Adamax ascent over site-dependent
//! log-dephasing rates.
//!
//! The ascent runs in `log10 Gamma` with hard box bounds enforced by
//! clipping after every step. Stopping follows three conditions: every
//! gradient component below `grad_tol`, a bound reached (immediately in
//! strict mode, otherwise recorded while the interior coordinates keep
//! ascending), or the step budget exhausted. A minimum step count is
//! honored before any condition may fire.

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::herm::{HermGenerator, HermScratch};
use crate::lindblad::{build_liouvillian, flux, steady_state, NoiseProfile};
use crate::map_indexed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative precision of the refined uniform-scan peak.
const PEAK_REL_TOL: f64 = 1e-3;

/// Adamax hyperparameters, bounds and stopping rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Step scale in `log10 Gamma` units.
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Stop once every `|d eta / d log10 Gamma_n|` falls below this.
    pub grad_tol: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Stop at the first boundary contact instead of continuing along
    /// interior coordinates.
    pub strict_boundary_stop: bool,
    /// Keep per-step `(Gamma, eta)` snapshots in the result.
    pub record_trajectory: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            min_steps: 30,
            max_steps: 100_000,
            grad_tol: 1e-8,
            lower_bound: 1e-7,
            upper_bound: 1.0,
            strict_boundary_stop: false,
            record_trajectory: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower_bound > 0.0 && self.lower_bound < self.upper_bound) {
            return Err(Error::invalid(format!(
                "bounds must satisfy 0 < lower < upper, got [{}, {}]",
                self.lower_bound, self.upper_bound
            )));
        }
        if self.min_steps > self.max_steps {
            return Err(Error::invalid(format!(
                "min_steps {} exceeds max_steps {}",
                self.min_steps, self.max_steps
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid(format!("grad_tol must be > 0, got {}", self.grad_tol)));
        }
        if !(self.learning_rate > 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::invalid("learning_rate and epsilon must be > 0"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("beta1 and beta2 must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Why an optimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every gradient component fell below `grad_tol` in the interior.
    Converged,
    /// At least one rate sits on a bound; interior coordinates are
    /// stationary (or strict mode stopped at first contact).
    BoundaryHit,
    MaxSteps,
}

/// One `(Gamma, eta)` snapshot of the ascent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub flux: f64,
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub gammas: Vec<f64>,
    pub flux: f64,
    pub termination: Termination,
    pub steps: usize,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// A failed run, carrying whatever trajectory accumulated before the
/// failure.
#[derive(Debug)]
pub struct OptimizeFailure {
    pub error: Error,
    pub steps_completed: usize,
    pub partial_trajectory: Vec<TrajectoryPoint>,
}

impl From<OptimizeFailure> for Error {
    fn from(f: OptimizeFailure) -> Error {
        f.error
    }
}

/// A uniform-dephasing scan: the sampled curve plus the refined peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// `(Gamma, eta)` at every grid point, in grid order.
    pub curve: Vec<(f64, f64)>,
    pub peak_gamma: f64,
    pub peak_flux: f64,
}

/// Logarithmically spaced grid of `points` values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::invalid(format!(
            "log grid needs 0 < lo < hi and at least 2 points, got [{lo}, {hi}] x {points}"
        )));
    }
    let (la, lb) = (lo.log10(), hi.log10());
    Ok((0..points)
        .map(|k| 10f64.powf(la + (lb - la) * k as f64 / (points - 1) as f64))
        .collect())
}

/// Evaluate the flux with every site at the same dephasing rate across
/// `grid`, then refine the discrete peak by golden-section search between
/// its neighboring grid points (relative precision `1e-3` in Gamma).
/// A peak on the grid edge is returned unrefined.
pub fn scan_uniform(spec: &ChainSpec, gamma_l: f64, grid: &[f64]) -> Result<ScanResult> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("scan grid is empty"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) || grid[0] <= 0.0 {
        return Err(Error::invalid("scan grid must be strictly increasing and positive"));
    }
    let gen = HermGenerator::new(&spec.hamiltonian(), gamma_l)?;
    let mut scratch = HermScratch::default();
    let n = spec.n_sites;
    let mut gammas = vec![0.0; n];
    let mut eval = |g: f64, scratch: &mut HermScratch| -> Result<f64> {
        gammas.iter_mut().for_each(|x| *x = g);
        gen.flux(&gammas, scratch)
    };

    let mut curve = Vec::with_capacity(grid.len());
    for &g in grid {
        curve.push((g, eval(g, &mut scratch)?));
    }
    let peak_idx = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .expect("non-empty curve");

    let (peak_gamma, peak_flux) = if peak_idx == 0 || peak_idx + 1 == grid.len() {
        curve[peak_idx]
    } else {
        golden_section_max(
            grid[peak_idx - 1].log10(),
            grid[peak_idx + 1].log10(),
            |lg, s| eval(10f64.powf(lg), s),
            &mut scratch,
        )?
    };

    Ok(ScanResult { curve, peak_gamma, peak_flux })
}

/// Golden-section maximization over `log10 Gamma` in `[la, lb]`. Returns
/// the refined `(Gamma, eta)`.
fn golden_section_max<F>(
    mut la: f64,
    mut lb: f64,
    mut f: F,
    scratch: &mut HermScratch,
) -> Result<(f64, f64)>
where
    F: FnMut(f64, &mut HermScratch) -> Result<f64>,
{
    // Interval tolerance in log10 units equivalent to relative precision
    // PEAK_REL_TOL in Gamma.
    let tol = PEAK_REL_TOL / std::f64::consts::LN_10;
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut lc = lb - inv_phi * (lb - la);
    let mut ld = la + inv_phi * (lb - la);
    let mut fc = f(lc, scratch)?;
    let mut fd = f(ld, scratch)?;
    while lb - la > tol {
        if fc >= fd {
            lb = ld;
            ld = lc;
            fd = fc;
            lc = lb - inv_phi * (lb - la);
            fc = f(lc, scratch)?;
        } else {
            la = lc;
            lc = ld;
            fc = fd;
            ld = la + inv_phi * (lb - la);
            fd = f(ld, scratch)?;
        }
    }
    let (lx, fx) = if fc >= fd { (lc, fc) } else { (ld, fd) };
    Ok((10f64.powf(lx), fx))
}

/// Bounded Adamax ascent of the flux in `log10 Gamma` space from `init`.
///
/// The initial rates are clipped into the bounds before the first step.
/// The best-seen iterate is returned if the raw final iterate
/// underperforms it, so the result never loses to the (clipped) start.
/// The reported flux is recomputed through the reference complex solver
/// at the returned rates.
pub fn optimize_local(
    spec: &ChainSpec,
    gamma_l: f64,
    init: &[f64],
    cfg: &OptimizerConfig,
) -> std::result::Result<OptimizationResult, OptimizeFailure> {
    let fail_now = |error: Error| OptimizeFailure { error, steps_completed: 0, partial_trajectory: Vec::new() };
    spec.validate().map_err(fail_now)?;
    cfg.validate().map_err(fail_now)?;
    if init.len() != spec.n_sites {
        return Err(fail_now(Error::DimensionMismatch { expected: spec.n_sites, got: init.len() }));
    }
    if !init.iter().all(|g| g.is_finite() && *g > 0.0) {
        return Err(fail_now(Error::invalid("initial dephasing rates must be finite and > 0")));
    }

    let n = spec.n_sites;
    let gen = HermGenerator::new(&spec.hamiltonian(), gamma_l).map_err(fail_now)?;
    let mut scratch = HermScratch::default();

    let (lo, hi) = (cfg.lower_bound.log10(), cfg.upper_bound.log10());
    let mut theta: Vec<f64> = init.iter().map(|g| g.log10().clamp(lo, hi)).collect();
    let gammas_of = |theta: &[f64]| -> Vec<f64> { theta.iter().map(|t| 10f64.powf(*t)).collect() };

    let mut m = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut steps = 0usize;
    let mut trajectory: Vec<TrajectoryPoint> = Vec::new();
    let mut best_flux = f64::NEG_INFINITY;
    let mut best_gammas: Vec<f64> = gammas_of(&theta);
    let mut beta1_pow = 1.0;

    let (termination, final_eta) = loop {
        let gammas = gammas_of(&theta);
        let (eta, grad) = gen
            .flux_and_log_gradient(&gammas, &mut scratch)
            .map_err(|error| OptimizeFailure {
                error,
                steps_completed: steps,
                partial_trajectory: std::mem::take(&mut trajectory),
            })?;
        if cfg.record_trajectory {
            trajectory.push(TrajectoryPoint { step: steps, flux: eta, gammas: gammas.clone() });
        }
        if eta > best_flux {
            best_flux = eta;
            best_gammas = gammas.clone();
        }

        let interior_converged = grad.iter().all(|g| g.abs() < cfg.grad_tol);
        let at_bound = theta.iter().any(|t| *t <= lo || *t >= hi);
        // A bound coordinate pushed further outward is stationary under
        // clipping; combined with converged interior coordinates the run
        // cannot move again.
        let kkt_stationary = theta
            .iter()
            .zip(&grad)
            .all(|(t, g)| g.abs() < cfg.grad_tol || (*t >= hi && *g > 0.0) || (*t <= lo && *g < 0.0));

        if steps >= cfg.min_steps {
            if interior_converged {
                break (Termination::Converged, eta);
            }
            if at_bound && (cfg.strict_boundary_stop || kkt_stationary) {
                break (Termination::BoundaryHit, eta);
            }
        }
        if steps >= cfg.max_steps {
            break (Termination::MaxSteps, eta);
        }

        // Adamax update (infinity-norm variant of Adam), ascent direction.
        // Normalized steps have size ~lr even for vanishing gradients, so
        // a point already inside the stopping tolerance is left alone
        // (the step budget still advances toward min_steps).
        steps += 1;
        if !interior_converged {
            beta1_pow *= cfg.beta1;
            let lr_t = cfg.learning_rate / (1.0 - beta1_pow);
            for k in 0..n {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                u[k] = (cfg.beta2 * u[k]).max(grad[k].abs());
                theta[k] = (theta[k] + lr_t * m[k] / (u[k] + cfg.epsilon)).clamp(lo, hi);
            }
        }
    };

    // A converged run returns the iterate that satisfied the gradient
    // test. Otherwise monotone acceptance applies: if the raw final
    // iterate underperforms the best seen, return the best instead
    // (the first evaluation is the clipped start, so the result never
    // loses to it). The reported flux is recomputed through the
    // reference solver.
    let final_gammas = gammas_of(&theta);
    let best_gammas = if termination != Termination::Converged && best_flux > final_eta + 1e-12 {
        best_gammas
    } else {
        final_gammas
    };
    let noise = NoiseProfile::new(best_gammas.clone(), gamma_l).map_err(|error| OptimizeFailure {
        error,
        steps_completed: steps,
        partial_trajectory: trajectory.clone(),
    })?;
    let reference_flux = build_liouvillian(&spec.hamiltonian(), &noise)
        .and_then(|liou| steady_state(&liou))
        .map(|rho| flux(&rho, gamma_l))
        .map_err(|error| OptimizeFailure {
            error,
            steps_completed: steps,
            partial_trajectory: trajectory.clone(),
        })?;

    Ok(OptimizationResult {
        gammas: best_gammas,
        flux: reference_flux,
        termination,
        steps,
        trajectory: if cfg.record_trajectory { Some(trajectory) } else { None },
    })
}

/// Run `optimize_local` from `n_starts` initial profiles drawn
/// log-uniform over the bounds and return the best result. Start `s`
/// uses stream `s` of a ChaCha8 generator keyed by `seed`, so the draw
/// set is deterministic and prefix-stable: the first `k` starts of a
/// larger run coincide with a `k`-start run.
pub fn multi_start(
    spec: &ChainSpec,
    gamma_l: f64,
    n_starts: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    spec.validate()?;
    cfg.validate()?;
    if n_starts == 0 {
        return Err(Error::invalid("multi_start needs at least one start"));
    }
    let (lo, hi) = (cfg.lower_bound.log10(), cfg.upper_bound.log10());
    let n = spec.n_sites;

    let runs = map_indexed(n_starts, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let init: Vec<f64> = (0..n).map(|_| 10f64.powf(lo + (hi - lo) * rng.random::<f64>())).collect();
        optimize_local(spec, gamma_l, &init, cfg)
    });

    let mut best: Option<OptimizationResult> = None;
    let mut failures = 0usize;
    let mut first_error: Option<Error> = None;
    for run in runs {
        match run {
            Ok(res) => {
                // Strictly-greater keeps the lowest start index on ties.
                if best.as_ref().map_or(true, |b| res.flux > b.flux) {
                    best = Some(res);
                }
            }
            Err(fail) => {
                failures += 1;
                first_error.get_or_insert(fail.error);
            }
        }
    }
    best.ok_or_else(|| Error::AllStartsFailed {
        failed: failures,
        first: first_error.map(|e| e.to_string()).unwrap_or_default(),
    })
}
