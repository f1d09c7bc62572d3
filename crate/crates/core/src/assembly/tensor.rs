//! One-dimensional Lagrange matrices and tensor-product solvers for the
//! uniform grids used throughout.
//!
//! On a structured mesh the scalar Q_k stiffness matrix is
//! `K_y (x) M_x + M_y (x) K_x`, so it is diagonalized by the generalized
//! eigenvectors of the one-dimensional pencils `(K, M)`.

use crate::fespace::basis::{lagrange1, lagrange2};
use crate::fespace::quadrature::gauss_legendre;
use crate::fespace::TaylorHoodSpace;
use crate::linalg::Preconditioner;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Dense 1D mass and stiffness matrices of continuous Lagrange elements of
/// `degree` 1 or 2 on `cells` intervals of width `h`. Periodic matrices wrap
/// the last node onto the first.
pub fn matrices_1d(
    degree: usize,
    cells: usize,
    h: f64,
    periodic: bool,
) -> (DMatrix<f64>, DMatrix<f64>) {
    assert!(degree == 1 || degree == 2, "degree must be 1 or 2");
    let nloc = degree + 1;
    let n = if periodic {
        degree * cells
    } else {
        degree * cells + 1
    };
    let (x, w) = gauss_legendre(3);
    let mut ml = DMatrix::<f64>::zeros(nloc, nloc);
    let mut kl = DMatrix::<f64>::zeros(nloc, nloc);
    for (xq, wq) in x.iter().zip(&w) {
        let (v, d): (Vec<f64>, Vec<f64>) = if degree == 2 {
            let (v, d) = lagrange2(*xq);
            (v.to_vec(), d.to_vec())
        } else {
            let (v, d) = lagrange1(*xq);
            (v.to_vec(), d.to_vec())
        };
        for a in 0..nloc {
            for b in 0..nloc {
                ml[(a, b)] += 0.5 * h * wq * v[a] * v[b];
                kl[(a, b)] += 2.0 / h * wq * d[a] * d[b];
            }
        }
    }
    let mut m = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for e in 0..cells {
        for a in 0..nloc {
            for b in 0..nloc {
                let (i, j) = ((degree * e + a) % n, (degree * e + b) % n);
                m[(i, j)] += ml[(a, b)];
                k[(i, j)] += kl[(a, b)];
            }
        }
    }
    (m, k)
}

/// Square sub-block on a contiguous index range.
pub fn restrict(m: &DMatrix<f64>, range: std::ops::Range<usize>) -> DMatrix<f64> {
    m.view((range.start, range.start), (range.len(), range.len()))
        .into_owned()
}

/// Exact (pseudo-)inverse of `K_y (x) M_x + M_y (x) K_x + shift M_y (x) M_x`
/// on an `n_x x n_y` grid with x running fastest.
#[derive(Debug, Clone)]
pub struct TensorLaplaceSolver {
    vecs: [DMatrix<f64>; 2],
    inv_eig: DMatrix<f64>,
}

fn pencil(m: &DMatrix<f64>, k: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let l = m
        .clone()
        .cholesky()
        .expect("1D mass matrix is positive definite")
        .l();
    let linv_k = l.solve_lower_triangular(k).expect("triangular solve");
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .expect("triangular solve");
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let v = l
        .transpose()
        .solve_upper_triangular(&eig.eigenvectors)
        .expect("triangular solve");
    (v, eig.eigenvalues)
}

impl TensorLaplaceSolver {
    /// `m` and `k` are the 1D mass and stiffness matrices per axis.
    pub fn new(m: [&DMatrix<f64>; 2], k: [&DMatrix<f64>; 2], shift: f64) -> Self {
        let (vx, lx) = pencil(m[0], k[0]);
        let (vy, ly) = pencil(m[1], k[1]);
        let scale = lx.amax() + ly.amax() + shift.abs();
        let inv_eig = DMatrix::from_fn(lx.len(), ly.len(), |i, j| {
            let d = lx[i] + ly[j] + shift;
            if d.abs() <= 1e-12 * scale {
                0.0
            } else {
                1.0 / d
            }
        });
        Self {
            vecs: [vx, vy],
            inv_eig,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_eig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_eig.is_empty()
    }

    pub fn solve(&self, r: &[f64], out: &mut [f64]) {
        let (nx, ny) = self.inv_eig.shape();
        let rm = DMatrix::from_column_slice(nx, ny, r);
        let [vx, vy] = &self.vecs;
        let hat = vx.tr_mul(&rm) * vy;
        let hat = hat.component_mul(&self.inv_eig);
        let x = vx * hat * vy.transpose();
        out.copy_from_slice(x.as_slice());
    }
}

impl Preconditioner for TensorLaplaceSolver {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve(r, z);
    }
}

/// Pseudo-inverse of the Q1 pressure Laplacian with natural boundary conditions.
pub fn pressure_laplace_solver(space: &TaylorHoodSpace) -> TensorLaplaceSolver {
    let mesh = space.mesh();
    let (c, h, per) = (mesh.cells_per_axis(), mesh.cell_size(), mesh.is_periodic());
    let (mx, kx) = matrices_1d(1, c[0], h[0], per);
    let (my, ky) = matrices_1d(1, c[1], h[1], per);
    TensorLaplaceSolver::new([&mx, &my], [&kx, &ky], 0.0)
}

/// (Pseudo-)inverse of the scalar Q2 Laplacian on the non-Dirichlet nodes.
pub fn velocity_laplace_solver(space: &TaylorHoodSpace) -> TensorLaplaceSolver {
    let mesh = space.mesh();
    let (c, h, per) = (mesh.cells_per_axis(), mesh.cell_size(), mesh.is_periodic());
    let dims = space.q2_dims();
    let axis = |d: usize| {
        let (m, k) = matrices_1d(2, c[d], h[d], per);
        let r = if per { 0..dims[d] } else { 1..dims[d] - 1 };
        (restrict(&m, r.clone()), restrict(&k, r))
    };
    let (mx, kx) = axis(0);
    let (my, ky) = axis(1);
    TensorLaplaceSolver::new([&mx, &my], [&kx, &ky], 0.0)
}

/// Applies a scalar solver to each block of a component-blocked vector.
#[derive(Debug, Clone)]
pub struct Componentwise(pub TensorLaplaceSolver);

impl Preconditioner for Componentwise {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.0.len();
        for (rc, zc) in r.chunks(n).zip(z.chunks_mut(n)) {
            self.0.solve(rc, zc);
        }
    }
}
