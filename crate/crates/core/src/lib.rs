//! Finite element solver for the incompressible Navier-Stokes equations with
//! a BDF2 pressure-correction projection scheme, grad-div stabilization and
//! local projection stabilization of the streamline derivative (LPS-SU).
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] structured rectangular meshes, Dirichlet or periodic;
//! * [`fespace`] Taylor-Hood Q2/Q1 spaces, quadrature and the LPS coarse space;
//! * [`linalg`] CSR matrices and Krylov solvers;
//! * [`assembly`] all bilinear and trilinear forms of the scheme;
//! * [`stepper`] the time integrator (BDF1 start, BDF2 steps, projection);
//! * [`stokes_projector`] the grad-div stabilized Stokes interpolant;
//! * [`analysis`] error norms, convergence orders, energy spectra;
//! * [`cases`] manufactured-solution and Taylor-Green test problems;
//! * [`cli`] the batch front end behind the `lpsflow` binary.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod assembly;
pub mod cases;
pub mod cli;
pub mod error;
pub mod fespace;
pub mod linalg;
pub mod mesh;
pub mod stepper;
pub mod stokes_projector;

pub use error::{Error, Result};
