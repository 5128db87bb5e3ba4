//! Real Hermitian-basis representation of the transport generator.
//!
//! The Lindblad generator preserves Hermiticity, so instead of acting on
//! `N^2` complex components it can act on `N^2` *real* coordinates of a
//! Hermitian matrix: the `N` diagonal entries followed by interleaved
//! `(Re, Im)` parts of the upper-triangle entries. Solving the
//! steady-state system in this basis costs a quarter of the flops of the
//! complex vectorized solve and gives a transpose-solve for free, which
//! the adjoint gradient needs. The complex path in [`crate::lindblad`]
//! remains the reference implementation; the two are checked against
//! each other in tests.
//!
//! Site-local dephasing is diagonal in this basis: the `(r, c)`
//! coherence coordinates decay at `(Gamma_r + Gamma_c) / 2` and the
//! diagonal coordinates are untouched. The generator therefore splits as
//! `G(Gamma) = G0 + diag(w(Gamma))` with `G0` built once per chain.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;

type C64 = Complex<f64>;

const LN_10: f64 = std::f64::consts::LN_10;

/// Dense row-major LU factorization with partial pivoting, exposing both
/// `A x = b` and `A^T x = b` solves from one factorization.
#[derive(Debug)]
pub struct RealLu {
    dim: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl RealLu {
    /// Factor `a` (row-major `dim x dim`, consumed in place).
    pub fn factor(mut a: Vec<f64>, dim: usize) -> Result<Self> {
        assert_eq!(a.len(), dim * dim);
        let mut piv = vec![0usize; dim];
        for k in 0..dim {
            let mut p = k;
            let mut pmax = a[k * dim + k].abs();
            for i in (k + 1)..dim {
                let v = a[i * dim + k].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if !(pmax > 0.0) || !pmax.is_finite() {
                return Err(Error::Numerical(format!(
                    "singular generator matrix: pivot {pmax:.3e} at column {k}"
                )));
            }
            piv[k] = p;
            if p != k {
                for j in 0..dim {
                    a.swap(k * dim + j, p * dim + j);
                }
            }
            let pivot = a[k * dim + k];
            let (head, tail) = a.split_at_mut((k + 1) * dim);
            let row_k = &head[k * dim + k + 1..k * dim + dim];
            for i in 0..(dim - k - 1) {
                let row_i = &mut tail[i * dim + k..i * dim + dim];
                let l = row_i[0] / pivot;
                row_i[0] = l;
                for (x, &y) in row_i[1..].iter_mut().zip(row_k) {
                    *x -= l * y;
                }
            }
        }
        Ok(RealLu { dim, lu: a, piv })
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let m = self.dim;
        assert_eq!(b.len(), m);
        for k in 0..m {
            b.swap(k, self.piv[k]);
        }
        // L y = Pb (unit lower triangle).
        for i in 1..m {
            let row = &self.lu[i * m..i * m + i];
            let mut s = 0.0;
            for (l, x) in row.iter().zip(b.iter()) {
                s += l * x;
            }
            b[i] -= s;
        }
        // U x = y.
        for i in (0..m).rev() {
            let row = &self.lu[i * m..(i + 1) * m];
            let mut s = 0.0;
            for j in (i + 1)..m {
                s += row[j] * b[j];
            }
            b[i] = (b[i] - s) / row[i];
        }
    }

    /// Solve `A^T x = b` in place using the same factorization:
    /// `A^T = U^T L^T P`.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        let m = self.dim;
        assert_eq!(b.len(), m);
        // U^T z = b (lower triangular with U's diagonal).
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..i {
                s += self.lu[j * m + i] * b[j];
            }
            b[i] = (b[i] - s) / self.lu[i * m + i];
        }
        // L^T w = z (upper triangular, unit diagonal).
        for i in (0..m).rev() {
            let mut s = 0.0;
            for j in (i + 1)..m {
                s += self.lu[j * m + i] * b[j];
            }
            b[i] -= s;
        }
        // x = P^T w: undo the row swaps in reverse order.
        for k in (0..m).rev() {
            b.swap(k, self.piv[k]);
        }
    }
}

/// Reusable buffers for repeated solves with one [`HermGenerator`].
#[derive(Debug, Default, Clone)]
pub struct HermScratch {
    a: Vec<f64>,
    x: Vec<f64>,
    adj: Vec<f64>,
}

/// The transport generator in the real Hermitian basis, with the
/// trace-one constraint substituted into the first row.
#[derive(Debug, Clone)]
pub struct HermGenerator {
    n: usize,
    dim: usize,
    /// Row-major `dim x dim` matrix: unitary + trapping parts, row 0
    /// replaced by the trace row (ones over the diagonal coordinates).
    g0: Vec<f64>,
    /// Component index of the `Re` coordinate of pair `(r, c)`, `r < c`;
    /// the `Im` coordinate follows it. Entry `r * n + c`.
    pair_re: Vec<usize>,
    gamma_l: f64,
}

/// Coordinate layout: diagonal entries first, then `(Re, Im)` per pair.
#[inline]
fn pair_component(n: usize, r: usize, c: usize) -> usize {
    debug_assert!(r < c);
    // Pairs enumerated row-major over the strict upper triangle.
    let before = r * n - r * (r + 1) / 2;
    n + 2 * (before + (c - r - 1))
}

impl HermGenerator {
    /// Build the Gamma-independent part of the generator for Hamiltonian
    /// `h` and trapping rate `gamma_l`.
    pub fn new(h: &DMatrix<C64>, gamma_l: f64) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || n < 2 {
            return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
        }
        if !gamma_l.is_finite() || gamma_l < 0.0 {
            return Err(Error::invalid(format!("gamma_l must be finite and >= 0, got {gamma_l}")));
        }
        let herm_dev = (h - h.adjoint()).camax();
        if herm_dev > 1e-12 {
            return Err(Error::invalid(format!("hamiltonian not Hermitian: deviation {herm_dev:.3e}")));
        }

        let dim = n * n;
        let mut pair_re = vec![usize::MAX; n * n];
        for r in 0..n {
            for c in (r + 1)..n {
                pair_re[r * n + c] = pair_component(n, r, c);
            }
        }

        let mut g0 = vec![0.0; dim * dim];
        let mut basis = DMatrix::<C64>::zeros(n, n);
        let mut image = DMatrix::<C64>::zeros(n, n);
        for col in 0..dim {
            fill_basis_element(&mut basis, n, col, &pair_re);
            apply_base_generator(h, gamma_l, &basis, &mut image);
            // Decompose the (Hermitian) image into coordinates -> column.
            for d in 0..n {
                g0[d * dim + col] = image[(d, d)].re;
            }
            for r in 0..n {
                for c in (r + 1)..n {
                    let k = pair_re[r * n + c];
                    g0[k * dim + col] = image[(r, c)].re;
                    g0[(k + 1) * dim + col] = image[(r, c)].im;
                }
            }
            clear_basis_element(&mut basis, n, col, &pair_re);
        }

        // Trace-one constraint replaces the first diagonal row.
        for x in g0[0..dim].iter_mut() {
            *x = 0.0;
        }
        for d in 0..n {
            g0[d] = 1.0;
        }

        Ok(HermGenerator { n, dim, g0, pair_re, gamma_l })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    fn check_gammas(&self, gammas: &[f64]) -> Result<()> {
        if gammas.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: gammas.len() });
        }
        if !gammas.iter().all(|g| g.is_finite() && *g >= 0.0) {
            return Err(Error::invalid("all dephasing rates must be finite and >= 0"));
        }
        Ok(())
    }

    /// Solve for the steady-state coordinate vector, left in `scratch.x`.
    fn solve_steady(&self, gammas: &[f64], scratch: &mut HermScratch) -> Result<RealLu> {
        self.check_gammas(gammas)?;
        scratch.a.clear();
        scratch.a.extend_from_slice(&self.g0);
        // Dephasing is diagonal in this basis; row 0 is the trace row and
        // diagonal coordinates carry no dephasing, so no conflict.
        for r in 0..self.n {
            for c in (r + 1)..self.n {
                let k = self.pair_re[r * self.n + c];
                let w = 0.5 * (gammas[r] + gammas[c]);
                scratch.a[k * self.dim + k] -= w;
                scratch.a[(k + 1) * self.dim + (k + 1)] -= w;
            }
        }
        let lu = RealLu::factor(std::mem::take(&mut scratch.a), self.dim)?;
        scratch.x.clear();
        scratch.x.resize(self.dim, 0.0);
        scratch.x[0] = 1.0; // trace = 1
        lu.solve(&mut scratch.x);
        if !scratch.x.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("steady-state solve produced non-finite values".into()));
        }
        Ok(lu)
    }

    /// Steady-state flux `eta = gamma_l * rho_NN`.
    pub fn flux(&self, gammas: &[f64], scratch: &mut HermScratch) -> Result<f64> {
        let lu = self.solve_steady(gammas, scratch)?;
        scratch.a = lu.lu; // return the buffer
        Ok(self.gamma_l * scratch.x[self.n - 1])
    }

    /// Flux together with its exact gradient with respect to
    /// `log10 Gamma_n`, via one adjoint solve on the transposed system.
    ///
    /// Requires every `Gamma_n > 0` (log-space differentiation).
    pub fn flux_and_log_gradient(&self, gammas: &[f64], scratch: &mut HermScratch) -> Result<(f64, Vec<f64>)> {
        if !gammas.iter().all(|g| *g > 0.0) {
            return Err(Error::invalid("log-gradient requires all dephasing rates > 0"));
        }
        let lu = self.solve_steady(gammas, scratch)?;
        let eta = self.gamma_l * scratch.x[self.n - 1];

        // Adjoint: A^T lambda = c with c = gamma_l at the last diagonal
        // coordinate. Then d eta / d Gamma_k = -lambda^T (dA/dGamma_k) x,
        // and dA/dGamma_k is diagonal with -1/2 on coordinates of pairs
        // containing k.
        scratch.adj.clear();
        scratch.adj.resize(self.dim, 0.0);
        scratch.adj[self.n - 1] = self.gamma_l;
        lu.solve_transpose(&mut scratch.adj);

        let mut grad = vec![0.0; self.n];
        for r in 0..self.n {
            for c in (r + 1)..self.n {
                let k = self.pair_re[r * self.n + c];
                let contrib = 0.5
                    * (scratch.adj[k] * scratch.x[k] + scratch.adj[k + 1] * scratch.x[k + 1]);
                grad[r] += contrib;
                grad[c] += contrib;
            }
        }
        for (g, &gamma) in grad.iter_mut().zip(gammas) {
            *g *= LN_10 * gamma;
        }
        scratch.a = lu.lu;
        Ok((eta, grad))
    }

    /// Full validated steady-state density matrix via the fast solve.
    pub fn steady_density(&self, gammas: &[f64], scratch: &mut HermScratch) -> Result<DensityMatrix> {
        let lu = self.solve_steady(gammas, scratch)?;
        scratch.a = lu.lu;
        let n = self.n;
        let mut rho = DMatrix::<C64>::zeros(n, n);
        for d in 0..n {
            rho[(d, d)] = C64::new(scratch.x[d], 0.0);
        }
        for r in 0..n {
            for c in (r + 1)..n {
                let k = self.pair_re[r * n + c];
                let v = C64::new(scratch.x[k], scratch.x[k + 1]);
                rho[(r, c)] = v;
                rho[(c, r)] = v.conj();
            }
        }
        DensityMatrix::new(rho)
    }
}

/// Write basis element `col` into `basis` (assumed zero).
fn fill_basis_element(basis: &mut DMatrix<C64>, n: usize, col: usize, pair_re: &[usize]) {
    if col < n {
        basis[(col, col)] = C64::new(1.0, 0.0);
        return;
    }
    for r in 0..n {
        for c in (r + 1)..n {
            let k = pair_re[r * n + c];
            if col == k {
                basis[(r, c)] = C64::new(1.0, 0.0);
                basis[(c, r)] = C64::new(1.0, 0.0);
                return;
            }
            if col == k + 1 {
                basis[(r, c)] = C64::new(0.0, 1.0);
                basis[(c, r)] = C64::new(0.0, -1.0);
                return;
            }
        }
    }
    unreachable!("component index {col} out of range");
}

fn clear_basis_element(basis: &mut DMatrix<C64>, n: usize, col: usize, pair_re: &[usize]) {
    if col < n {
        basis[(col, col)] = C64::new(0.0, 0.0);
        return;
    }
    for r in 0..n {
        for c in (r + 1)..n {
            let k = pair_re[r * n + c];
            if col == k || col == k + 1 {
                basis[(r, c)] = C64::new(0.0, 0.0);
                basis[(c, r)] = C64::new(0.0, 0.0);
                return;
            }
        }
    }
}

/// `image = -i [h, b] + gamma_l (b_NN E_11 - (E_NN b + b E_NN) / 2)`.
fn apply_base_generator(h: &DMatrix<C64>, gamma_l: f64, b: &DMatrix<C64>, image: &mut DMatrix<C64>) {
    let n = h.nrows();
    let minus_i = C64::new(0.0, -1.0);
    let hb = h * b;
    let bh = b * h;
    for c in 0..n {
        for r in 0..n {
            image[(r, c)] = minus_i * (hb[(r, c)] - bh[(r, c)]);
        }
    }
    let last = n - 1;
    image[(0, 0)] += C64::new(gamma_l, 0.0) * b[(last, last)];
    for c in 0..n {
        image[(last, c)] -= C64::new(0.5 * gamma_l, 0.0) * b[(last, c)];
    }
    for r in 0..n {
        image[(r, last)] -= C64::new(0.5 * gamma_l, 0.0) * b[(r, last)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_ramp, sample_disorder};
    use crate::lindblad::{build_liouvillian, flux, steady_state, NoiseProfile};
    use approx::assert_relative_eq;

    #[test]
    fn real_lu_round_trips_random_systems() {
        let mut state = 88172645463325252u64;
        let mut next = move || {
            // xorshift64, enough for test fixtures
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for dim in [1usize, 2, 5, 17] {
            let a: Vec<f64> = (0..dim * dim).map(|_| next()).collect();
            let x_true: Vec<f64> = (0..dim).map(|_| next()).collect();
            let mut b = vec![0.0; dim];
            let mut bt = vec![0.0; dim];
            for i in 0..dim {
                for j in 0..dim {
                    b[i] += a[i * dim + j] * x_true[j];
                    bt[i] += a[j * dim + i] * x_true[j];
                }
            }
            let lu = RealLu::factor(a.clone(), dim).unwrap();
            lu.solve(&mut b);
            lu.solve_transpose(&mut bt);
            for i in 0..dim {
                assert_relative_eq!(b[i], x_true[i], epsilon = 1e-10, max_relative = 1e-10);
                assert_relative_eq!(bt[i], x_true[i], epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn real_lu_rejects_singular_matrix() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(RealLu::factor(a, 2).is_err());
    }

    #[test]
    fn fast_path_matches_complex_steady_state() {
        for (spec, gammas, gl) in [
            (
                build_ramp(5, 0.2, 0.0, 1.0, 0.1).unwrap(),
                vec![0.02, 0.3, 0.001, 0.7, 0.15],
                0.1,
            ),
            (
                sample_disorder(8, 17, 2, 5.0, 0.1).unwrap(),
                vec![0.1, 0.4, 0.002, 0.9, 0.05, 0.3, 0.08, 0.6],
                0.05,
            ),
        ] {
            let h = spec.hamiltonian();
            let noise = NoiseProfile::new(gammas.clone(), gl).unwrap();
            let reference = steady_state(&build_liouvillian(&h, &noise).unwrap()).unwrap();

            let gen = HermGenerator::new(&h, gl).unwrap();
            let mut scratch = HermScratch::default();
            let fast = gen.steady_density(&gammas, &mut scratch).unwrap();

            let diff = (reference.matrix() - fast.matrix()).camax();
            assert!(diff < 1e-11, "fast and reference steady states differ by {diff:.3e}");

            let eta_fast = gen.flux(&gammas, &mut scratch).unwrap();
            assert_relative_eq!(eta_fast, flux(&reference, gl), epsilon = 1e-13, max_relative = 1e-11);
        }
    }

    #[test]
    fn maximally_mixed_without_trapping() {
        let spec = build_ramp(6, 1.0 / 6.0, 0.0, 3.0, 0.1).unwrap();
        let gen = HermGenerator::new(&spec.hamiltonian(), 0.0).unwrap();
        let mut scratch = HermScratch::default();
        let rho = gen.steady_density(&vec![0.2; 6], &mut scratch).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expected = if r == c { 1.0 / 6.0 } else { 0.0 };
                assert_relative_eq!(rho.element(r, c).re, expected, epsilon = 1e-10);
            }
        }
    }
}
