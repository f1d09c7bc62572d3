//! Sparse storage and iterative solvers.

pub mod krylov;
pub mod sparse;

pub use krylov::{
    bicgstab, cg, gmres, solve_nonsym, solve_nonsym_from, solve_spd, Identity, Jacobi,
    Preconditioner, SolveReport, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use sparse::{axpy, dot, norm2, remove_mean, LinearOperator, SparseMatrix};
