//! Numerical laboratory for spectra of large non-Hermitian random matrices.
//!
//! The crate samples i.i.d. and Ginibre ensembles, Hermitizes shifted matrices
//! to reach their singular-value spectra, solves the scalar self-consistent
//! equation for the deterministic resolvent approximation, evaluates the
//! log-determinant identity for linear eigenvalue statistics together with its
//! four-term decomposition, computes the limiting edge kernels of the complex
//! Ginibre ensemble, and runs seeded Monte Carlo experiments (local-law
//! scaling, edge density, universality of linear statistics, smallest
//! singular-value tails, interpolation flow) on top of that stack.
//!
//! Entry points:
//! - `examples/` holds one runnable program per capability; start there.
//! - the `circulaw` binary exposes the same runs as subcommands for scripting.
//! - each module is usable as a library on its own; `experiments` is the
//!   highest-level API.
//!
//! Everything is deterministic given (seed, stream): reruns reproduce output
//! files byte for byte, independent of thread count.

pub mod dyson;
pub mod ensemble;
pub mod girko;
pub mod kernel;
pub mod quad;
pub mod reference;
pub mod spectral;

pub use num_complex::Complex64;
