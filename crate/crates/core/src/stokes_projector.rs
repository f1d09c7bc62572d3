//! Grad-div stabilized discrete Stokes projection of a continuous pair `(u, p)`.
//!
//! Find `(w_h, r_h)` with the Dirichlet trace of `w_h` interpolating `u` and
//!
//! ```text
//! nu (grad w_h, grad v) + gamma (div w_h, div v) - (r_h, div v)
//!     = nu (grad u, grad v) + gamma (div u, div v) - (p, div v)
//! (div w_h, q) = (div u, q)
//! ```
//!
//! for all discrete `v` vanishing on the boundary and all zero-mean `q`. The
//! saddle point system is reduced to its pressure Schur complement, solved by
//! CG preconditioned by the lumped pressure mass. Inner CG solves for the
//! velocity block use exact tensor-product Laplacian inverses.

use crate::assembly::{
    assemble_div_coupling, assemble_graddiv, assemble_pressure_mass, assemble_stiffness,
    velocity_laplace_solver, Componentwise,
};
use crate::error::{Error, Result};
use crate::fespace::TaylorHoodSpace;
use crate::linalg::{cg, dot, norm2, LinearOperator, Preconditioner, SolveReport, SparseMatrix};

/// Value and gradient `[[du/dx, du/dy], [dv/dx, dv/dy]]` of a velocity field.
pub type VelocityWithGradient = ([f64; 2], [[f64; 2]; 2]);

#[derive(Debug, Clone)]
pub struct StokesProjection {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Report of the outer Schur-complement iteration.
    pub report: SolveReport,
    pub inner_iterations: usize,
}

/// Tolerances of the nested iteration.
#[derive(Debug, Clone, Copy)]
pub struct ProjectorTolerances {
    pub outer: f64,
    pub inner: f64,
    pub max_iter: usize,
}

/// Relative residual below which a stalled iteration is still accepted.
const STALL_ACCEPT: f64 = 1e-9;

impl Default for ProjectorTolerances {
    fn default() -> Self {
        Self {
            outer: 1e-11,
            inner: 1e-13,
            max_iter: 20000,
        }
    }
}

/// Velocity block restricted to free DOFs. On periodic meshes the two
/// constant fields span its kernel and are removed from solutions.
struct VelocityBlock {
    a: SparseMatrix,
    pc: Componentwise,
    periodic: bool,
    tol: f64,
    max_iter: usize,
    /// Norm the inner tolerance is measured against when right-hand sides
    /// arise from cancellation.
    scale: f64,
    iterations: std::cell::Cell<usize>,
    failed: std::cell::Cell<bool>,
}

/// Velocity block with per-component means removed from its output, which
/// keeps round-off out of the kernel on periodic meshes.
struct MeanFree<'a>(&'a SparseMatrix);

impl LinearOperator for MeanFree<'_> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.matvec(x, y);
        remove_component_means(y);
    }
}

impl VelocityBlock {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_scaled(b, self.scale)
    }

    /// Solve with the tolerance taken relative to `max(|b|, scale)`. Schur
    /// products pass zero so that they stay linear in their argument.
    fn solve_scaled(&self, b: &[f64], scale: f64) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        let mut rhs = b.to_vec();
        if self.periodic {
            remove_component_means(&mut rhs);
        }
        let bnorm = norm2(&rhs);
        let tol = if bnorm > 0.0 {
            self.tol * bnorm.max(scale) / bnorm
        } else {
            self.tol
        };
        let rep = if self.periodic {
            cg(
                &MeanFree(&self.a),
                &self.pc,
                &rhs,
                &mut x,
                tol,
                self.max_iter,
                false,
            )
        } else {
            cg(&self.a, &self.pc, &rhs, &mut x, tol, self.max_iter, false)
        };
        self.iterations.set(self.iterations.get() + rep.iterations);
        if !rep.converged && !(rep.residual <= STALL_ACCEPT) {
            self.failed.set(true);
        }
        if self.periodic {
            remove_component_means(&mut x);
        }
        x
    }
}

fn remove_component_means(x: &mut [f64]) {
    let n = x.len() / 2;
    for c in x.chunks_mut(n) {
        let m = c.iter().sum::<f64>() / n as f64;
        c.iter_mut().for_each(|v| *v -= m);
    }
}

struct Schur<'a> {
    b: &'a SparseMatrix,
    bt: &'a SparseMatrix,
    block: &'a VelocityBlock,
}

impl LinearOperator for Schur<'_> {
    fn dim(&self) -> usize {
        self.b.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z = self.block.solve_scaled(&self.bt.mul_vec(x), 0.0);
        self.b.matvec(&z, y);
    }
}

struct Diagonal(Vec<f64>);

impl Preconditioner for Diagonal {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.0) {
            *zi = ri / d;
        }
    }
}

/// Computes the grad-div stabilized Stokes projection of `(u, p)`.
///
/// `u` returns the velocity and its gradient; `p` the pressure. Right-hand
/// sides are integrated with a Gauss rule two orders above the space's.
pub fn stokes_project(
    space: &TaylorHoodSpace,
    gamma: f64,
    nu: f64,
    u: impl Fn(f64, f64) -> VelocityWithGradient,
    p: impl Fn(f64, f64) -> f64,
) -> Result<StokesProjection> {
    stokes_project_with(space, gamma, nu, u, p, ProjectorTolerances::default())
}

pub fn stokes_project_with(
    space: &TaylorHoodSpace,
    gamma: f64,
    nu: f64,
    u: impl Fn(f64, f64) -> VelocityWithGradient,
    p: impl Fn(f64, f64) -> f64,
    tol: ProjectorTolerances,
) -> Result<StokesProjection> {
    if !(nu > 0.0) || !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need nu > 0 and gamma >= 0, got nu = {nu}, gamma = {gamma}"
        )));
    }
    let nv = space.num_velocity_dofs();
    let np = space.num_pressure_dofs();
    let n2 = space.num_q2_nodes();
    let mask = space.dirichlet_dof_mask();
    let free: Vec<usize> = (0..nv).filter(|&i| !mask[i]).collect();
    let fixed: Vec<usize> = (0..nv).filter(|&i| mask[i]).collect();
    let all_p: Vec<usize> = (0..np).collect();

    // right-hand sides from the continuous pair
    let tab = space.tabulate(space.quadrature_order() + 2);
    let mut f = vec![0.0; nv];
    let mut g = vec![0.0; np];
    for cell in 0..space.num_cells() {
        let pts = space.points_at(&tab, cell);
        let vd = space.cell_q2(cell);
        let pd = space.cell_q1(cell);
        for (q, x) in pts.iter().enumerate() {
            let (_, grad) = u(x[0], x[1]);
            let pv = p(x[0], x[1]);
            let div = grad[0][0] + grad[1][1];
            let w = tab.jxw[q];
            for k in 0..9 {
                let dphi = tab.q2_grad[q][k];
                for c in 0..2 {
                    let lap = nu * (grad[c][0] * dphi[0] + grad[c][1] * dphi[1]);
                    f[c * n2 + vd[k]] += w * (lap + (gamma * div - pv) * dphi[c]);
                }
            }
            for k in 0..4 {
                g[pd[k]] += w * div * tab.q1[q][k];
            }
        }
    }

    let mut a_full = assemble_stiffness(space);
    a_full.scale(nu);
    let a_full = SparseMatrix::linear_combination(1.0, &a_full, gamma, &assemble_graddiv(space));
    let b_full = assemble_div_coupling(space);

    let mut velocity = vec![0.0; nv];
    let trace = space.interpolate_velocity(|x, y| u(x, y).0);
    for &k in &fixed {
        velocity[k] = trace[k];
    }
    // lift the boundary values
    let a_lift = a_full.mul_vec(&velocity);
    let b_lift = b_full.mul_vec(&velocity);
    let f_i: Vec<f64> = free.iter().map(|&k| f[k] - a_lift[k]).collect();
    let g_hat: Vec<f64> = g.iter().zip(&b_lift).map(|(a, b)| a - b).collect();

    let a = a_full.submatrix(&free, &free);
    let b = b_full.submatrix(&all_p, &free);
    let bt = b.transpose();
    let block = VelocityBlock {
        pc: Componentwise(velocity_laplace_solver(space)),
        a,
        periodic: space.mesh().is_periodic(),
        tol: tol.inner,
        max_iter: tol.max_iter,
        scale: norm2(&f_i),
        iterations: std::cell::Cell::new(0),
        failed: std::cell::Cell::new(false),
    };

    let a_inv_f = block.solve(&f_i);
    let ba = b.mul_vec(&a_inv_f);
    let rhs: Vec<f64> = g_hat.iter().zip(&ba).map(|(a, b)| a - b).collect();
    let rnorm = norm2(&rhs);
    let outer_tol = if rnorm > 0.0 {
        // size of the terms before cancellation
        let abs_f: Vec<f64> = a_inv_f.iter().map(|v| v.abs()).collect();
        let scale = norm2(&g_hat) + norm2(&b.abs_mul_vec(&abs_f));
        tol.outer * rnorm.max(scale) / rnorm
    } else {
        tol.outer
    };
    let schur = Schur {
        b: &b,
        bt: &bt,
        block: &block,
    };
    let pmass = assemble_pressure_mass(space);
    let lumped = pmass.mul_vec(&vec![1.0; np]);
    let mut r = vec![0.0; np];
    let report = cg(
        &schur,
        &Diagonal(lumped.clone()),
        &rhs,
        &mut r,
        outer_tol,
        tol.max_iter,
        true,
    );
    if !report.converged && !(report.residual <= STALL_ACCEPT) {
        return Err(Error::SolverFailure(format!("Stokes projection: {report}")));
    }
    let mut rhs_v = f_i;
    for (x, y) in rhs_v.iter_mut().zip(bt.mul_vec(&r)) {
        *x += y;
    }
    let w_i = block.solve(&rhs_v);
    if block.failed.get() {
        return Err(Error::SolverFailure(
            "Stokes projection: velocity block solve did not converge".into(),
        ));
    }
    for (&k, v) in free.iter().zip(&w_i) {
        velocity[k] = *v;
    }
    if space.mesh().is_periodic() {
        // the kernel of the velocity block is fixed by matching the exact means
        let ones = vec![1.0; n2];
        let mass = crate::assembly::assemble_mass(space);
        let weights = mass.mul_vec(&[ones.clone(), ones].concat());
        let area = space.mesh().area();
        let exact = crate::assembly::assemble_load(space, |x, y| u(x, y).0);
        for c in 0..2 {
            let range = c * n2..(c + 1) * n2;
            let target = exact[range.clone()].iter().sum::<f64>() / area;
            let current = dot(&weights[range.clone()], &velocity[range.clone()]) / area;
            velocity[range]
                .iter_mut()
                .for_each(|v| *v += target - current);
        }
    }
    let mean = dot(&lumped, &r) / space.mesh().area();
    r.iter_mut().for_each(|v| *v -= mean);
    Ok(StokesProjection {
        velocity,
        pressure: r,
        report,
        inner_iterations: block.iterations.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryKind, Mesh};

    fn space(kind: BoundaryKind) -> TaylorHoodSpace {
        TaylorHoodSpace::new(Mesh::new([0.0, 0.0], [1.0, 1.0], [4, 4], kind).unwrap())
    }

    #[test]
    fn zero_fields_project_to_zero() {
        let s = space(BoundaryKind::Dirichlet);
        let pr =
            stokes_project(&s, 1.0, 0.5, |_, _| ([0.0; 2], [[0.0; 2]; 2]), |_, _| 0.0).unwrap();
        assert!(pr.velocity.iter().chain(&pr.pressure).all(|v| *v == 0.0));
    }

    #[test]
    fn reproduces_discrete_pair() {
        // stream function x^2 y + y^3, a solenoidal field inside Q2
        let s = space(BoundaryKind::Dirichlet);
        let u = |x: f64, y: f64| {
            (
                [x * x + 3.0 * y * y, -2.0 * x * y],
                [[2.0 * x, 6.0 * y], [-2.0 * y, -2.0 * x]],
            )
        };
        let p = |x: f64, y: f64| x * y - 0.25;
        let pr = stokes_project(&s, 1.0, 0.3, u, p).unwrap();
        let ue = s.interpolate_velocity(|x, y| u(x, y).0);
        let pe = s.interpolate_pressure(p);
        let du = pr
            .velocity
            .iter()
            .zip(&ue)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let dp = pr
            .pressure
            .iter()
            .zip(&pe)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(du < 1e-8, "velocity {du}");
        assert!(dp < 1e-8, "pressure {dp}");
    }

    #[test]
    fn periodic_projection_of_trigonometric_pair() {
        let s = space(BoundaryKind::Periodic);
        let k = 2.0 * std::f64::consts::PI;
        let u = |x: f64, y: f64| {
            let (sx, cx, sy, cy) = ((k * x).sin(), (k * x).cos(), (k * y).sin(), (k * y).cos());
            (
                [cx * sy + 0.5, -sx * cy],
                [[-k * sx * sy, k * cx * cy], [-k * cx * cy, k * sx * sy]],
            )
        };
        let pr = stokes_project(&s, 1.0, 1.0, u, |_, _| 0.0).unwrap();
        let b = assemble_div_coupling(&s).mul_vec(&pr.velocity);
        assert!(b.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-9);
        // mean flow is kept
        let ux: f64 = pr.velocity[..s.num_q2_nodes()].iter().sum::<f64>() / s.num_q2_nodes() as f64;
        assert!((ux - 0.5).abs() < 1e-2);
    }
}
