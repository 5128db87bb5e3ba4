//! Steady-state quantum transport on one-dimensional chains with
//! site-local dephasing.
//!
//! The crate simulates single-particle transport through tight-binding
//! chains coupled to local dephasing environments and an end-to-end
//! trapping-renewal channel, and optimizes the per-site dephasing rates
//! to maximize the steady-state population flux. It provides:
//!
//! - [`chain`]: ramp and disordered chain construction, Hamiltonians;
//! - [`lindblad`]: the vectorized Lindblad generator, steady states, flux;
//! - [`herm`]: a real Hermitian-basis representation of the same
//!   generator used by the hot paths;
//! - [`observables`]: populations, coherence maps, coherence length,
//!   ratio maps, local energy mismatch;
//! - [`analytic3`]: closed-form three-site flux expressions serving as an
//!   independent oracle for the numeric solver;
//! - [`gradient`]: exact adjoint flux gradients with a finite-difference
//!   oracle;
//! - [`optimizer`]: uniform-dephasing scans and bounded Adamax ascent in
//!   log-dephasing space;
//! - [`ensemble`]: disorder ensembles and their summary statistics;
//! - [`stats`]: Spearman rank correlation, quartiles and boxplot data;
//! - [`export`]: CSV/JSON emitters for all figure-style data files.

pub mod analytic3;
pub mod chain;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod gradient;
pub mod herm;
pub mod lindblad;
pub mod observables;
pub mod optimizer;
pub mod stats;

pub use chain::{build_ramp, sample_disorder, ChainSpec};
pub use error::{Error, Result};
pub use lindblad::{build_liouvillian, flux, steady_state, DensityMatrix, Liouvillian, NoiseProfile};

/// Map `0..n` through `f`, in parallel when the `parallel` feature is on.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
