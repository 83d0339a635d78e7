//! Numerical kernels: tridiagonal eigensolver, scalar minimization,
//! nonlinear least squares and log-factorial helpers.

pub mod minimize;
pub mod nls;
pub mod special;
pub mod tridiag;

pub use minimize::{maximize_sampled, minimize_scalar, nelder_mead, ScalarMinimum, DEFAULT_X_TOL};
pub use nls::{nls_fit, nls_fit_with, FitLaw, FitMethod, FitModel, NlsOptions};
pub use special::{log_factorial, log_factorial_table, log_poisson_pmf};
pub use tridiag::{
    eigh_tridiagonal, eigh_tridiagonal_rows, eigvalsh_tridiagonal, EigenDecomposition, PartialEigenvectors,
    TridiagonalSym,
};
