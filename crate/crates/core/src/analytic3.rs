//! Closed-form second-order flux expressions for the three-site chain.
//!
//! For a uniform-gap three-site ramp with dephasing on sites 2 and 3 only
//! (`Gamma_1 = 0`) and tunneling weak compared to the gap and dephasing,
//! the steady-state flux admits closed forms to second order in the
//! tunneling energy: one for nearest-neighbor hopping (`J_2 = 0`) and one
//! for equal-strength long-range hopping (`J_2 = J_1 = J`). These serve
//! as an independent oracle for the numeric solver.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::herm::{HermGenerator, HermScratch};

type C64 = Complex<f64>;

/// Parameters of the analytically solvable three-site chain.
///
/// The chain has a uniform gap `delta = |e2 - e1| = |e3 - e2| > 0`,
/// dephasing `gamma2`, `gamma3` on sites 2 and 3 (`Gamma_1 = 0`), and
/// either nearest-neighbor tunneling `j1` (with `J_2 = 0`) or uniform
/// tunneling `j` on both neighbor pairs and the 1-3 link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSiteParams {
    /// Nearest-neighbor tunneling (NN case).
    pub j1: f64,
    /// Uniform tunneling (LR case).
    pub j: f64,
    /// Uniform gap between consecutive sites.
    pub delta: f64,
    /// Dephasing on the middle site.
    pub gamma2: f64,
    /// Dephasing on the exit site.
    pub gamma3: f64,
}

impl ThreeSiteParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::invalid(format!("delta must be > 0, got {}", self.delta)));
        }
        if self.gamma2 < 0.0 || self.gamma3 < 0.0 {
            return Err(Error::invalid("dephasing rates must be >= 0"));
        }
        Ok(())
    }
}

/// Which tunneling scheme the three-site chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeSiteMode {
    /// `J_2 = 0`: strictly nearest-neighbor tunneling.
    NearestNeighbor,
    /// `J_2 = J_1 = J`: equal tunneling on every pair.
    LongRange,
}

/// Second-order flux for nearest-neighbor tunneling:
///
/// ```text
/// eta = J1^2 * 4 G2 (G2 + G3)
///       / [ 4 d^2 (3 G2 + G3) + G2 (3 G2^2 + 5 G2 G3 + 2 G3^2) ] .
/// ```
pub fn eta_nn(p: &ThreeSiteParams) -> Result<f64> {
    p.validate()?;
    let (g2, g3, d2) = (p.gamma2, p.gamma3, p.delta * p.delta);
    let denom = 4.0 * d2 * (3.0 * g2 + g3) + g2 * (3.0 * g2 * g2 + 5.0 * g2 * g3 + 2.0 * g3 * g3);
    if denom == 0.0 {
        return Err(Error::invalid("eta_nn is degenerate: denominator vanishes (gamma2 = gamma3 = 0)"));
    }
    Ok(p.j1 * p.j1 * 4.0 * g2 * (g2 + g3) / denom)
}

/// Second-order flux for equal long-range tunneling `J = J1 = J2`:
///
/// ```text
/// eta = 8 [ G2 G3 (G2 + G3)^2 + 2 d^2 (4 G2^2 + 6 G2 G3 + G3^2) ] J^2
///       / { (16 d^2 + G3^2) [ 4 d^2 (3 G2 + G3) + G2 (3 G2^2 + 5 G2 G3 + 2 G3^2) ] } .
/// ```
pub fn eta_lr(p: &ThreeSiteParams) -> Result<f64> {
    p.validate()?;
    let (g2, g3, d2) = (p.gamma2, p.gamma3, p.delta * p.delta);
    let bracket = g2 * g3 * (g2 + g3) * (g2 + g3) + 2.0 * d2 * (4.0 * g2 * g2 + 6.0 * g2 * g3 + g3 * g3);
    let denom = (16.0 * d2 + g3 * g3)
        * (4.0 * d2 * (3.0 * g2 + g3) + g2 * (3.0 * g2 * g2 + 5.0 * g2 * g3 + 2.0 * g3 * g3));
    if denom == 0.0 {
        return Err(Error::invalid("eta_lr is degenerate: denominator vanishes (gamma2 = gamma3 = 0)"));
    }
    Ok(8.0 * bracket * p.j * p.j / denom)
}

/// Hamiltonian of the exact three-site chain for a mode: ramp energies
/// `(0, -delta, -2 delta)` with the mode's tunneling pattern.
pub fn three_site_hamiltonian(p: &ThreeSiteParams, mode: ThreeSiteMode) -> DMatrix<C64> {
    let (j1, j2) = match mode {
        ThreeSiteMode::NearestNeighbor => (p.j1, 0.0),
        ThreeSiteMode::LongRange => (p.j, p.j),
    };
    let mut h = DMatrix::<C64>::zeros(3, 3);
    for (k, e) in [0.0, -p.delta, -2.0 * p.delta].iter().enumerate() {
        h[(k, k)] = C64::new(*e, 0.0);
    }
    for (r, c, v) in [(0usize, 1usize, j1), (1, 2, j1), (0, 2, j2)] {
        h[(r, c)] = C64::new(v, 0.0);
        h[(c, r)] = C64::new(v, 0.0);
    }
    h
}

/// Numeric flux of the exact three-site chain with trapping rate
/// `gamma_l` and dephasing `(0, gamma2, gamma3)`.
pub fn three_site_numeric_flux(p: &ThreeSiteParams, mode: ThreeSiteMode, gamma_l: f64) -> Result<f64> {
    p.validate()?;
    let h = three_site_hamiltonian(p, mode);
    let gen = HermGenerator::new(&h, gamma_l)?;
    let mut scratch = HermScratch::default();
    gen.flux(&[0.0, p.gamma2, p.gamma3], &mut scratch)
}

/// Relative deviation of the numeric solve from the second-order analytic
/// flux, `|eta_num - eta_ana| / eta_ana`. The analytic forms assume
/// `J, gamma_l << delta, Gamma_{2,3}`, so `gamma_l` must be chosen small
/// against the tunneling for the comparison to be meaningful.
pub fn compare_to_numeric(p: &ThreeSiteParams, mode: ThreeSiteMode, gamma_l: f64) -> Result<f64> {
    let analytic = match mode {
        ThreeSiteMode::NearestNeighbor => eta_nn(p)?,
        ThreeSiteMode::LongRange => eta_lr(p)?,
    };
    let numeric = three_site_numeric_flux(p, mode, gamma_l)?;
    Ok((numeric - analytic).abs() / analytic)
}
