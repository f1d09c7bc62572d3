//! Assembly of the forms of the stabilized scheme.

pub mod forms;
pub mod lps;
pub mod mass_inverse;
pub mod params;
pub mod tensor;

pub use forms::{
    assemble_convection_skew, assemble_div_coupling, assemble_graddiv, assemble_lps_su,
    assemble_mass, assemble_pressure_laplacian, assemble_pressure_mass, assemble_stiffness,
    local_convection, AssembledOperators, CellPattern, LocalMatrices, MomentumTerms,
};
pub use lps::{
    averaged_direction, averaged_directions, fluctuation_apply, fluctuation_scalar, SuReference,
};
pub use mass_inverse::VelocityMassInverse;
pub use params::{tau_value, StabilizationParams, TauRule};
pub use tensor::{
    matrices_1d, pressure_laplace_solver, velocity_laplace_solver, Componentwise,
    TensorLaplaceSolver,
};

use crate::fespace::TaylorHoodSpace;

/// Load vector `(f, v)` for a velocity source evaluated at the quadrature points.
pub fn assemble_load(space: &TaylorHoodSpace, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
    let tab = space.tabulation();
    let n = space.num_q2_nodes();
    let mut out = vec![0.0; 2 * n];
    for cell in 0..space.num_cells() {
        let pts = space.points_at(tab, cell);
        let dofs = space.cell_q2(cell);
        for (q, p) in pts.iter().enumerate() {
            let fv = f(p[0], p[1]);
            let w = tab.jxw[q];
            for k in 0..9 {
                let s = w * tab.q2[q][k];
                out[dofs[k]] += s * fv[0];
                out[n + dofs[k]] += s * fv[1];
            }
        }
    }
    out
}

/// Pressure-side load `(g, q)` for a scalar source.
pub fn assemble_pressure_load(space: &TaylorHoodSpace, g: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let tab = space.tabulation();
    let mut out = vec![0.0; space.num_pressure_dofs()];
    for cell in 0..space.num_cells() {
        let pts = space.points_at(tab, cell);
        let dofs = space.cell_q1(cell);
        for (q, p) in pts.iter().enumerate() {
            let s = tab.jxw[q] * g(p[0], p[1]);
            for k in 0..4 {
                out[dofs[k]] += s * tab.q1[q][k];
            }
        }
    }
    out
}
