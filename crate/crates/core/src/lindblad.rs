//! Lindblad generator with site-local dephasing, its steady state, and
//! the population-flux figure of merit.
//!
//! The equation of motion is
//!
//! ```text
//! d rho / dt = -i [H, rho]
//!            + sum_n Gamma_n D[|n><n|](rho)
//!            + gamma_l  D[|1><N|](rho),        D[L](r) = L r L' - {L'L, r}/2
//! ```
//!
//! with a single trapping-renewal channel moving population from the last
//! site back to the first, so a nonzero steady-state current can flow.
//! The generator is represented as a dense complex matrix acting on
//! column-stacked density matrices: `vec(rho)[r + n*c] = rho[(r, c)]`,
//! i.e. columns are stacked in order. All superoperator identities in
//! this crate are written against that convention.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Hermiticity / trace tolerance for accepted density matrices.
pub const HERM_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted before a state is rejected as
/// non-positive. Finite-precision solves produce tiny negative
/// eigenvalues; anything below this is an error, never clipped.
pub const PSD_TOL: f64 = -1e-8;
/// Residual bound for the steady-state solve, relative to the generator
/// norm.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Two constrained solves with different replaced rows must agree to this
/// tolerance element-wise, or the nullspace is declared degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Per-site dephasing rates plus the end-to-end trapping-renewal rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    /// Dephasing rate of each site, `Gamma_n >= 0`.
    pub gammas: Vec<f64>,
    /// Trapping-renewal rate `gamma_l >= 0` of the jump `|1><N|`.
    pub gamma_l: f64,
}

impl NoiseProfile {
    pub fn new(gammas: Vec<f64>, gamma_l: f64) -> Result<Self> {
        let p = NoiseProfile { gammas, gamma_l };
        p.validate()?;
        Ok(p)
    }

    /// The same dephasing rate on every site.
    pub fn uniform(n_sites: usize, gamma: f64, gamma_l: f64) -> Result<Self> {
        Self::new(vec![gamma; n_sites], gamma_l)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma_l.is_finite() || self.gamma_l < 0.0 {
            return Err(Error::invalid(format!("gamma_l must be finite and >= 0, got {}", self.gamma_l)));
        }
        if !self.gammas.iter().all(|g| g.is_finite() && *g >= 0.0) {
            return Err(Error::invalid("all dephasing rates must be finite and >= 0"));
        }
        Ok(())
    }
}

/// A steady-state (or otherwise valid) density matrix: Hermitian,
/// unit-trace and positive semidefinite within tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validate and wrap a candidate state. The candidate must be
    /// Hermitian and unit-trace to `1e-10` and have minimum eigenvalue
    /// `>= -1e-8`; it is then projected onto the Hermitian subspace so
    /// downstream maps are exactly symmetric.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        let herm_dev = (&mat - mat.adjoint()).camax();
        if herm_dev > HERM_TOL {
            return Err(Error::Numerical(format!("state not Hermitian: deviation {herm_dev:.3e}")));
        }
        let trace_dev = (mat.trace() - C64::new(1.0, 0.0)).norm();
        if trace_dev > HERM_TOL {
            return Err(Error::Numerical(format!("state trace differs from 1 by {trace_dev:.3e}")));
        }
        let herm = (&mat + mat.adjoint()).scale(0.5);
        let min_eig = herm
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eig < PSD_TOL {
            return Err(Error::Numerical(format!("state not positive: min eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityMatrix { mat: herm })
    }

    pub fn n_sites(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    /// Population of the last site, `Re rho_NN`.
    pub fn last_population(&self) -> f64 {
        self.mat[(self.mat.nrows() - 1, self.mat.ncols() - 1)].re
    }
}

/// Column-stacking index of element `(row, col)` in an `n x n` matrix.
#[inline]
pub fn vec_index(n: usize, row: usize, col: usize) -> usize {
    row + n * col
}

/// The Lindblad generator as a dense matrix on column-stacked states.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n: usize,
    superop: DMatrix<C64>,
}

impl Liouvillian {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn superop(&self) -> &DMatrix<C64> {
        &self.superop
    }

    /// Apply the generator to a state: `d rho / dt`.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.n;
        let v = DVector::from_fn(n * n, |k, _| rho[(k % n, k / n)]);
        let out = &self.superop * v;
        DMatrix::from_fn(n, n, |r, c| out[vec_index(n, r, c)])
    }
}

/// Assemble the generator for Hamiltonian `h` and noise profile `noise`.
///
/// Site-local dephasing only touches coherences: it contributes
/// `-(Gamma_i + Gamma_j)/2` on the diagonal of the superoperator at
/// off-diagonal positions `(i, j)`. The trapping channel
/// `sqrt(gamma_l) |1><N|` feeds `rho_NN` into `rho_11` and drains the
/// last row and column.
pub fn build_liouvillian(h: &DMatrix<C64>, noise: &NoiseProfile) -> Result<Liouvillian> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    if noise.gammas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: noise.gammas.len() });
    }
    noise.validate()?;
    let herm_dev = (h - h.adjoint()).camax();
    if herm_dev > 1e-12 {
        return Err(Error::invalid(format!("hamiltonian not Hermitian: deviation {herm_dev:.3e}")));
    }

    let nn = n * n;
    let mut m = DMatrix::<C64>::zeros(nn, nn);
    let i_unit = C64::new(0.0, 1.0);

    // Unitary part: (d rho)_{ij} = -i sum_k H_{ik} rho_{kj} + i sum_l rho_{il} H_{lj}.
    for j in 0..n {
        for i in 0..n {
            let row = vec_index(n, i, j);
            for k in 0..n {
                m[(row, vec_index(n, k, j))] -= i_unit * h[(i, k)];
            }
            for l in 0..n {
                m[(row, vec_index(n, i, l))] += i_unit * h[(l, j)];
            }
        }
    }

    // Dephasing: coherence (i, j) decays at (Gamma_i + Gamma_j)/2.
    for j in 0..n {
        for i in 0..n {
            if i != j {
                let row = vec_index(n, i, j);
                m[(row, row)] -= C64::new(0.5 * (noise.gammas[i] + noise.gammas[j]), 0.0);
            }
        }
    }

    // Trapping-renewal |1><N|: gain into rho_11, decay of row/column N.
    let last = n - 1;
    let gl = noise.gamma_l;
    m[(vec_index(n, 0, 0), vec_index(n, last, last))] += C64::new(gl, 0.0);
    for j in 0..n {
        for i in 0..n {
            let row = vec_index(n, i, j);
            let mut damp = 0.0;
            if i == last {
                damp += 0.5 * gl;
            }
            if j == last {
                damp += 0.5 * gl;
            }
            if damp != 0.0 {
                m[(row, row)] -= C64::new(damp, 0.0);
            }
        }
    }

    Ok(Liouvillian { n, superop: m })
}

/// Neumaier-compensated accumulator: the running sum keeps a separate
/// low-order correction term, so residuals of ill-conditioned systems
/// are computed to roughly double-double accuracy.
#[derive(Clone, Copy, Default)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.hi + x;
        if self.hi.abs() >= x.abs() {
            self.lo += (self.hi - t) + x;
        } else {
            self.lo += (x - t) + self.hi;
        }
        self.hi = t;
    }

    /// Add `a * b` exactly, splitting the product into its rounded value
    /// and the FMA-recovered rounding error.
    #[inline]
    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.add(e);
    }

    #[inline]
    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Residual `b - a x` with compensated dot products.
fn compensated_residual(a: &DMatrix<C64>, x: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let m = a.nrows();
    let mut acc_re = vec![Compensated::default(); m];
    let mut acc_im = vec![Compensated::default(); m];
    for (i, bv) in b.iter().enumerate() {
        acc_re[i].add(bv.re);
        acc_im[i].add(bv.im);
    }
    for j in 0..m {
        let xj = x[j];
        for i in 0..m {
            let av = a[(i, j)];
            acc_re[i].add_product(-av.re, xj.re);
            acc_re[i].add_product(av.im, xj.im);
            acc_im[i].add_product(-av.re, xj.im);
            acc_im[i].add_product(-av.im, xj.re);
        }
    }
    DVector::from_fn(m, |i, _| C64::new(acc_re[i].value(), acc_im[i].value()))
}

/// Solve the constrained linear system: the generator with the row of
/// diagonal element `(diag_site, diag_site)` replaced by the trace-one
/// constraint.
///
/// The LU solution is polished by iterative refinement with compensated
/// residuals. Weakly dephased chains are close to having a second
/// steady state and their constrained systems become ill-conditioned;
/// refinement restores forward accuracy to machine level whenever
/// `cond * eps < 1`, which keeps the degeneracy test below meaningful.
fn constrained_solve(liou: &Liouvillian, diag_site: usize) -> Result<DVector<C64>> {
    let n = liou.n;
    let nn = n * n;
    let mut a = liou.superop.clone();
    let replaced = vec_index(n, diag_site, diag_site);
    for col in 0..nn {
        a[(replaced, col)] = C64::new(0.0, 0.0);
    }
    for k in 0..n {
        a[(replaced, vec_index(n, k, k))] = C64::new(1.0, 0.0);
    }
    let mut b = DVector::<C64>::zeros(nn);
    b[replaced] = C64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let mut x = lu
        .solve(&b)
        .ok_or_else(|| Error::Numerical("constrained steady-state system is singular".into()))?;

    let mut res_norm = f64::INFINITY;
    for _ in 0..4 {
        let r = compensated_residual(&a, &x, &b);
        let norm = r.camax();
        if !norm.is_finite() || norm >= res_norm {
            break;
        }
        res_norm = norm;
        let Some(delta) = lu.solve(&r) else { break };
        let step = delta.camax();
        x += delta;
        if step <= 1e-16 * x.camax() {
            break;
        }
    }
    Ok(x)
}

/// Steady state of the generator: the Hermitian unit-trace solution of
/// `L rho = 0`.
///
/// The vectorized generator is solved directly with one row replaced by
/// the trace-one constraint. Because the diagonal rows of a Lindblad
/// generator sum to zero, replacing a diagonal row loses no information
/// and the full residual `||L vec(rho)||` remains a meaningful check. A
/// second solve with a different replaced row detects a degenerate
/// (dimension > 1) nullspace: the two solutions then disagree.
pub fn steady_state(liou: &Liouvillian) -> Result<DensityMatrix> {
    let n = liou.n;
    let x = constrained_solve(liou, 0)?;
    let x2 = constrained_solve(liou, n - 1)?;

    let disagreement = (&x - &x2).camax();
    if disagreement > DEGENERACY_TOL {
        return Err(Error::DegenerateSteadyState(format!(
            "two trace-replacement solves disagree by {disagreement:.3e}"
        )));
    }

    let residual = (&liou.superop * &x).norm();
    let scale = liou.superop.norm();
    if residual > RESIDUAL_TOL * scale {
        return Err(Error::Numerical(format!(
            "steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e} * ||L|| = {:.3e}",
            RESIDUAL_TOL * scale
        )));
    }

    let rho = DMatrix::from_fn(n, n, |r, c| x[vec_index(n, r, c)]);
    DensityMatrix::new(rho)
}

/// Steady-state population flux out of the last site, `eta = gamma_l * Re rho_NN`.
pub fn flux(rho: &DensityMatrix, gamma_l: f64) -> f64 {
    gamma_l * rho.last_population()
}
