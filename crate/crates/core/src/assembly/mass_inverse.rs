//! Exact inverse of the velocity mass matrix restricted to non-Dirichlet DOFs.
//!
//! On a structured mesh the scalar Q2 mass matrix is the Kronecker product
//! `M_y (x) M_x` of one-dimensional Q2 mass matrices, and removing the
//! boundary nodes keeps that structure. The inverse is applied line by line
//! with two small Cholesky factorizations.

use super::tensor::{matrices_1d, restrict};
use crate::error::{Error, Result};
use crate::fespace::TaylorHoodSpace;
use nalgebra::{Cholesky, DMatrix, Dyn};

#[derive(Debug, Clone)]
pub struct VelocityMassInverse {
    dims: [usize; 2],
    /// Free (non-Dirichlet) node range per axis in Q2 grid indices.
    free: [std::ops::Range<usize>; 2],
    chol: [Cholesky<f64, Dyn>; 2],
    num_nodes: usize,
}

impl VelocityMassInverse {
    pub fn new(space: &TaylorHoodSpace) -> Result<Self> {
        let mesh = space.mesh();
        let periodic = mesh.is_periodic();
        let cells = mesh.cells_per_axis();
        let size = mesh.cell_size();
        let dims = space.q2_dims();
        let mut chol = Vec::with_capacity(2);
        let mut free = Vec::with_capacity(2);
        for d in 0..2 {
            let (m, _) = matrices_1d(2, cells[d], size[d], periodic);
            let r = if periodic { 0..dims[d] } else { 1..dims[d] - 1 };
            if r.is_empty() {
                return Err(Error::InvalidArgument(
                    "mesh has no interior velocity nodes".into(),
                ));
            }
            let sub = restrict(&m, r.clone());
            chol.push(Cholesky::new(sub).ok_or(Error::SingularLocalMatrix(d))?);
            free.push(r);
        }
        let chol: [Cholesky<f64, Dyn>; 2] = [chol[0].clone(), chol[1].clone()];
        Ok(Self {
            dims,
            free: [free[0].clone(), free[1].clone()],
            chol,
            num_nodes: space.num_q2_nodes(),
        })
    }

    /// Returns `M_I^{-1} r_I` extended by zero on Dirichlet DOFs. Entries of
    /// `r` on Dirichlet DOFs are ignored.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; r.len()];
        self.apply_into(r, &mut out);
        out
    }

    pub fn apply_into(&self, r: &[f64], out: &mut [f64]) {
        let n = self.num_nodes;
        assert_eq!(r.len(), 2 * n);
        out.iter_mut().for_each(|v| *v = 0.0);
        let [rx, ry] = &self.free;
        let (nx, ny) = (rx.len(), ry.len());
        let mut grid = DMatrix::<f64>::zeros(nx, ny);
        for comp in 0..2 {
            let off = comp * n;
            for (jj, j) in ry.clone().enumerate() {
                for (ii, i) in rx.clone().enumerate() {
                    grid[(ii, jj)] = r[off + j * self.dims[0] + i];
                }
            }
            // x-direction solves on columns, then y-direction on rows
            self.chol[0].solve_mut(&mut grid);
            let mut t = grid.transpose();
            self.chol[1].solve_mut(&mut t);
            for (jj, j) in ry.clone().enumerate() {
                for (ii, i) in rx.clone().enumerate() {
                    out[off + j * self.dims[0] + i] = t[(jj, ii)];
                }
            }
        }
    }

    pub fn num_free_nodes(&self) -> usize {
        self.free[0].len() * self.free[1].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_mass;
    use crate::mesh::{BoundaryKind, Mesh};

    fn check(kind: BoundaryKind) {
        let mesh = Mesh::new([-1.0, 0.0], [2.0, 1.5], [3, 4], kind).unwrap();
        let space = TaylorHoodSpace::new(mesh);
        let minv = VelocityMassInverse::new(&space).unwrap();
        let m = assemble_mass(&space);
        let mask = space.dirichlet_dof_mask();
        let r: Vec<f64> = (0..space.num_velocity_dofs())
            .map(|i| {
                if mask[i] {
                    0.0
                } else {
                    (i as f64 * 0.731).sin()
                }
            })
            .collect();
        let x = minv.apply(&r);
        let mx = m.mul_vec(&x);
        for i in 0..r.len() {
            if mask[i] {
                assert_eq!(x[i], 0.0);
            } else {
                assert!((mx[i] - r[i]).abs() < 1e-12, "{i}: {} vs {}", mx[i], r[i]);
            }
        }
    }

    #[test]
    fn inverts_interior_mass_dirichlet() {
        check(BoundaryKind::Dirichlet);
    }

    #[test]
    fn inverts_mass_periodic() {
        check(BoundaryKind::Periodic);
    }
}
