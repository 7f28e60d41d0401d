//! Exact and neural-network estimation of measured (Renyi) relative
//! entropies between finite-dimensional density operators.
//!
//! The crate is organized around the estimation pipeline:
//!
//! * [`opmat`] — dense complex Hermitian linear algebra: spectral
//!   decompositions, matrix functions, Frechet derivatives, tensor
//!   products and partial traces.
//! * [`states`] — density operators, the Thompson-metric class of state
//!   pairs, and seeded generators of benchmark pairs.
//! * [`oracle`] — ground-truth solvers for the convex variational
//!   programs defining the measured relative entropies, plus an
//!   independent measurement-search cross-check.
//! * [`circuits`] — parametrized unitaries, induced measurement
//!   distributions, outcome sampling and parameter grids.
//! * [`eigmodels`] — eigenvalue models (lookup tables, truncated ReLU
//!   networks, polynomials) and Bernstein approximation.
//! * [`qne`] — the hybrid estimator: empirical objectives, inner model
//!   optimization, outer grid search, copy accounting, risk curves.
//! * [`schur`] — Schur-Weyl sector decomposition of qubit registers and
//!   the compression/embedding channels for permutation-invariant
//!   states.

pub mod circuits;
pub mod eigmodels;
pub mod opmat;
pub mod oracle;
pub mod qne;
pub mod schur;
pub mod states;
pub mod stream;

mod error;

pub use error::{Error, Result};
