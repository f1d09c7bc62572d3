//! Taylor-Hood Q2/Q1 spaces on structured quadrilateral meshes.
//!
//! Velocity DOFs are blocked by component: DOF `c * n_q2 + node` is the
//! `c`-th component at Q2 node `node`. Pressure DOFs are the mesh vertices.

pub mod basis;
pub mod quadrature;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, CellGeometry, Mesh};
pub use quadrature::QuadratureRule;

pub const DEFAULT_QUADRATURE_ORDER: usize = 4;

/// Shape function data of one cell at the points of a quadrature rule.
///
/// All cells of a structured mesh are congruent, so a single tabulation with
/// physical gradients serves every cell.
#[derive(Debug, Clone)]
pub struct CellTabulation {
    pub points: Vec<[f64; 2]>,
    /// Quadrature weights times the Jacobian determinant.
    pub jxw: Vec<f64>,
    pub q2: Vec<[f64; 9]>,
    pub q2_grad: Vec<[[f64; 2]; 9]>,
    pub q1: Vec<[f64; 4]>,
    pub q1_grad: Vec<[[f64; 2]; 4]>,
}

impl CellTabulation {
    pub fn new(rule: &QuadratureRule, geo: &CellGeometry) -> Self {
        let jac = geo.jacobian();
        let det = geo.jacobian_det();
        let n = rule.len();
        let mut tab = Self {
            points: rule.points.clone(),
            jxw: rule.weights.iter().map(|w| w * det).collect(),
            q2: Vec::with_capacity(n),
            q2_grad: Vec::with_capacity(n),
            q1: Vec::with_capacity(n),
            q1_grad: Vec::with_capacity(n),
        };
        for &p in &rule.points {
            let (v2, g2) = basis::q2(p);
            let (v1, g1) = basis::q1(p);
            tab.q2.push(v2);
            tab.q2_grad.push(g2.map(|g| [g[0] / jac[0], g[1] / jac[1]]));
            tab.q1.push(v1);
            tab.q1_grad.push(g1.map(|g| [g[0] / jac[0], g[1] / jac[1]]));
        }
        tab
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Values and physical gradients of all local basis functions at one point.
#[derive(Debug, Clone, Copy)]
pub struct BasisValues {
    pub q2: [f64; 9],
    pub q2_grad: [[f64; 2]; 9],
    pub q1: [f64; 4],
    pub q1_grad: [[f64; 2]; 4],
}

#[derive(Debug, Clone)]
pub struct TaylorHoodSpace {
    mesh: Mesh,
    q2_dims: [usize; 2],
    q2_coords: Vec<[f64; 2]>,
    cell_q2: Vec<[usize; 9]>,
    cell_q1: Vec<[usize; 4]>,
    dirichlet_nodes: Vec<usize>,
    dirichlet_mask: Vec<bool>,
    rule: QuadratureRule,
    tab: CellTabulation,
}

impl TaylorHoodSpace {
    pub fn new(mesh: Mesh) -> Self {
        Self::with_quadrature(mesh, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_quadrature(mesh: Mesh, order: usize) -> Self {
        let [nx, ny] = mesh.cells_per_axis();
        let periodic = mesh.is_periodic();
        let q2_dims = if periodic {
            [2 * nx, 2 * ny]
        } else {
            [2 * nx + 1, 2 * ny + 1]
        };
        let [hx, hy] = mesh.cell_size();
        let o = mesh.origin();
        let mut q2_coords = Vec::with_capacity(q2_dims[0] * q2_dims[1]);
        for j in 0..q2_dims[1] {
            for i in 0..q2_dims[0] {
                q2_coords.push([o[0] + 0.5 * i as f64 * hx, o[1] + 0.5 * j as f64 * hy]);
            }
        }
        let node = |i: usize, j: usize| (j % q2_dims[1]) * q2_dims[0] + (i % q2_dims[0]);
        let mut cell_q2 = Vec::with_capacity(mesh.num_cells());
        let mut cell_q1 = Vec::with_capacity(mesh.num_cells());
        for c in 0..mesh.num_cells() {
            let (ci, cj) = mesh.cell_ij(c);
            let mut dofs = [0; 9];
            for b in 0..3 {
                for a in 0..3 {
                    dofs[a + 3 * b] = node(2 * ci + a, 2 * cj + b);
                }
            }
            cell_q2.push(dofs);
            let v = mesh.connectivity()[c];
            cell_q1.push([v[0], v[1], v[3], v[2]]);
        }
        let mut dirichlet_mask = vec![false; q2_coords.len()];
        if mesh.boundary_kind() == BoundaryKind::Dirichlet {
            for j in 0..q2_dims[1] {
                for i in 0..q2_dims[0] {
                    if i == 0 || j == 0 || i + 1 == q2_dims[0] || j + 1 == q2_dims[1] {
                        dirichlet_mask[node(i, j)] = true;
                    }
                }
            }
        }
        let dirichlet_nodes = (0..q2_coords.len())
            .filter(|&k| dirichlet_mask[k])
            .collect();
        let rule = QuadratureRule::gauss(order);
        let tab = CellTabulation::new(&rule, &mesh.cell(0));
        Self {
            mesh,
            q2_dims,
            q2_coords,
            cell_q2,
            cell_q1,
            dirichlet_nodes,
            dirichlet_mask,
            rule,
            tab,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn num_cells(&self) -> usize {
        self.mesh.num_cells()
    }

    /// Number of scalar Q2 nodes.
    pub fn num_q2_nodes(&self) -> usize {
        self.q2_coords.len()
    }

    /// Q2 nodes per axis.
    pub fn q2_dims(&self) -> [usize; 2] {
        self.q2_dims
    }

    pub fn num_velocity_dofs(&self) -> usize {
        2 * self.q2_coords.len()
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn q2_coords(&self) -> &[[f64; 2]] {
        &self.q2_coords
    }

    pub fn q1_coords(&self) -> &[[f64; 2]] {
        self.mesh.vertices()
    }

    pub fn cell_q2(&self, cell: usize) -> &[usize; 9] {
        &self.cell_q2[cell]
    }

    pub fn cell_q1(&self, cell: usize) -> &[usize; 4] {
        &self.cell_q1[cell]
    }

    /// Local velocity DOFs: 9 x-components followed by 9 y-components.
    pub fn cell_velocity_dofs(&self, cell: usize) -> [usize; 18] {
        let n = self.num_q2_nodes();
        let q = &self.cell_q2[cell];
        let mut out = [0; 18];
        for k in 0..9 {
            out[k] = q[k];
            out[9 + k] = n + q[k];
        }
        out
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order
    }

    /// Tabulation for the space's own rule.
    pub fn tabulation(&self) -> &CellTabulation {
        &self.tab
    }

    /// Tabulation for another Gauss order (error norms, reference assembly).
    pub fn tabulate(&self, order: usize) -> CellTabulation {
        CellTabulation::new(&QuadratureRule::gauss(order), &self.mesh.cell(0))
    }

    /// Q2 nodes carrying Dirichlet conditions (empty for periodic meshes).
    pub fn dirichlet_nodes(&self) -> &[usize] {
        &self.dirichlet_nodes
    }

    pub fn is_dirichlet_node(&self, node: usize) -> bool {
        self.dirichlet_mask[node]
    }

    /// Dirichlet velocity DOFs, both components.
    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        let n = self.num_q2_nodes();
        self.dirichlet_nodes
            .iter()
            .copied()
            .chain(self.dirichlet_nodes.iter().map(|k| k + n))
            .collect()
    }

    /// Mask over velocity DOFs, `true` on Dirichlet DOFs.
    pub fn dirichlet_dof_mask(&self) -> Vec<bool> {
        let mut m = self.dirichlet_mask.clone();
        m.extend_from_slice(&self.dirichlet_mask);
        m
    }

    /// Dirichlet DOFs paired with the prescribed values of `g`.
    pub fn dirichlet_values(&self, g: impl Fn(f64, f64) -> [f64; 2]) -> Vec<(usize, f64)> {
        let n = self.num_q2_nodes();
        let mut out = Vec::with_capacity(2 * self.dirichlet_nodes.len());
        for &k in &self.dirichlet_nodes {
            let [x, y] = self.q2_coords[k];
            let v = g(x, y);
            out.push((k, v[0]));
            out.push((k + n, v[1]));
        }
        out
    }

    /// Values and physical gradients of all local basis functions at a
    /// reference point of `cell`.
    pub fn eval_basis(&self, cell: usize, xi: [f64; 2]) -> BasisValues {
        let jac = self.mesh.cell(cell).jacobian();
        let (q2, g2) = basis::q2(xi);
        let (q1, g1) = basis::q1(xi);
        BasisValues {
            q2,
            q2_grad: g2.map(|g| [g[0] / jac[0], g[1] / jac[1]]),
            q1,
            q1_grad: g1.map(|g| [g[0] / jac[0], g[1] / jac[1]]),
        }
    }

    /// Nodal interpolant of a velocity field.
    pub fn interpolate_velocity(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        let n = self.num_q2_nodes();
        let mut u = vec![0.0; 2 * n];
        for (k, &[x, y]) in self.q2_coords.iter().enumerate() {
            let v = f(x, y);
            u[k] = v[0];
            u[n + k] = v[1];
        }
        u
    }

    /// Nodal interpolant of a pressure field.
    pub fn interpolate_pressure(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.q1_coords().iter().map(|&[x, y]| f(x, y)).collect()
    }

    /// Interpolant of a scalar field into the Q2 space (one component).
    pub fn interpolate_q2(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.q2_coords.iter().map(|&[x, y]| f(x, y)).collect()
    }

    /// Velocity values at the quadrature points of `tab` on `cell`.
    pub fn velocity_at(&self, tab: &CellTabulation, cell: usize, u: &[f64]) -> Vec<[f64; 2]> {
        let n = self.num_q2_nodes();
        let dofs = &self.cell_q2[cell];
        tab.q2
            .iter()
            .map(|phi| {
                let mut v = [0.0; 2];
                for k in 0..9 {
                    v[0] += phi[k] * u[dofs[k]];
                    v[1] += phi[k] * u[n + dofs[k]];
                }
                v
            })
            .collect()
    }

    /// Velocity gradients `[[du/dx, du/dy], [dv/dx, dv/dy]]` at the points of `tab`.
    pub fn velocity_grad_at(
        &self,
        tab: &CellTabulation,
        cell: usize,
        u: &[f64],
    ) -> Vec<[[f64; 2]; 2]> {
        let n = self.num_q2_nodes();
        let dofs = &self.cell_q2[cell];
        tab.q2_grad
            .iter()
            .map(|g| {
                let mut out = [[0.0; 2]; 2];
                for k in 0..9 {
                    let (a, b) = (u[dofs[k]], u[n + dofs[k]]);
                    out[0][0] += g[k][0] * a;
                    out[0][1] += g[k][1] * a;
                    out[1][0] += g[k][0] * b;
                    out[1][1] += g[k][1] * b;
                }
                out
            })
            .collect()
    }

    pub fn pressure_at(&self, tab: &CellTabulation, cell: usize, p: &[f64]) -> Vec<f64> {
        let dofs = &self.cell_q1[cell];
        tab.q1
            .iter()
            .map(|phi| (0..4).map(|k| phi[k] * p[dofs[k]]).sum())
            .collect()
    }

    /// Physical coordinates of the points of `tab` on `cell`.
    pub fn points_at(&self, tab: &CellTabulation, cell: usize) -> Vec<[f64; 2]> {
        let geo = self.mesh.cell(cell);
        tab.points.iter().map(|&p| geo.map(p)).collect()
    }

    /// Point evaluation of a velocity DOF vector.
    pub fn eval_velocity(&self, u: &[f64], x: [f64; 2]) -> [f64; 2] {
        let (cell, xi) = self.mesh.locate(x);
        let (phi, _) = basis::q2(xi);
        let n = self.num_q2_nodes();
        let dofs = &self.cell_q2[cell];
        let mut v = [0.0; 2];
        for k in 0..9 {
            v[0] += phi[k] * u[dofs[k]];
            v[1] += phi[k] * u[n + dofs[k]];
        }
        v
    }

    pub fn eval_pressure(&self, p: &[f64], x: [f64; 2]) -> f64 {
        let (cell, xi) = self.mesh.locate(x);
        let (phi, _) = basis::q1(xi);
        let dofs = &self.cell_q1[cell];
        (0..4).map(|k| phi[k] * p[dofs[k]]).sum()
    }
}

/// Choice of the local coarse space `D_M` used by the fluctuation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoarseDegree {
    /// Piecewise constants.
    P0,
    /// Discontinuous bilinears per macro cell.
    #[default]
    Q1Discontinuous,
}

impl CoarseDegree {
    pub fn dim(self) -> usize {
        match self {
            CoarseDegree::P0 => 1,
            CoarseDegree::Q1Discontinuous => 4,
        }
    }

    /// Values of the `D_M` basis at a reference point.
    pub fn basis(self, xi: [f64; 2]) -> Vec<f64> {
        match self {
            CoarseDegree::P0 => vec![1.0],
            CoarseDegree::Q1Discontinuous => basis::q1(xi).0.to_vec(),
        }
    }
}

/// Scalar coarse space `D_M` on one macro cell, applied componentwise.
#[derive(Debug, Clone)]
pub struct CoarseProjectionSpace {
    degree: CoarseDegree,
    /// `D_M` basis at the quadrature points, row-major `(point, function)`.
    values: Vec<f64>,
    mass: nalgebra::DMatrix<f64>,
    mass_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl CoarseProjectionSpace {
    pub fn new(degree: CoarseDegree, tab: &CellTabulation) -> Result<Self> {
        let nd = degree.dim();
        let nq = tab.len();
        let mut values = Vec::with_capacity(nq * nd);
        for &p in &tab.points {
            values.extend(degree.basis(p));
        }
        let mut mass = nalgebra::DMatrix::<f64>::zeros(nd, nd);
        for q in 0..nq {
            for a in 0..nd {
                for b in 0..nd {
                    mass[(a, b)] += tab.jxw[q] * values[q * nd + a] * values[q * nd + b];
                }
            }
        }
        let mass_chol =
            nalgebra::Cholesky::new(mass.clone()).ok_or(Error::SingularLocalMatrix(0))?;
        Ok(Self {
            degree,
            values,
            mass,
            mass_chol,
        })
    }

    pub fn degree(&self) -> CoarseDegree {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree.dim()
    }

    /// Local mass matrix of `D_M` (identical on every cell of a structured mesh).
    pub fn local_mass(&self) -> &nalgebra::DMatrix<f64> {
        &self.mass
    }

    pub fn value(&self, point: usize, func: usize) -> f64 {
        self.values[point * self.dim() + func]
    }

    /// L2(M) projection of a scalar sampled at the quadrature points,
    /// returned as values at the same points.
    pub fn project(&self, tab: &CellTabulation, samples: &[f64]) -> Vec<f64> {
        let nd = self.dim();
        let mut rhs = nalgebra::DVector::<f64>::zeros(nd);
        for (q, s) in samples.iter().enumerate() {
            for a in 0..nd {
                rhs[a] += tab.jxw[q] * self.value(q, a) * s;
            }
        }
        let c = self.mass_chol.solve(&rhs);
        (0..samples.len())
            .map(|q| (0..nd).map(|a| c[a] * self.value(q, a)).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryKind;

    fn space(n: usize, kind: BoundaryKind) -> TaylorHoodSpace {
        TaylorHoodSpace::new(Mesh::new([-1.0, -1.0], [2.0, 2.0], [n, n], kind).unwrap())
    }

    #[test]
    fn dof_counts() {
        let s = space(2, BoundaryKind::Dirichlet);
        assert_eq!(s.num_q2_nodes(), 25);
        assert_eq!(s.num_velocity_dofs(), 50);
        assert_eq!(s.num_pressure_dofs(), 9);
        assert_eq!(s.dirichlet_nodes().len(), 16);
        let p = space(3, BoundaryKind::Periodic);
        assert_eq!(p.num_q2_nodes(), 36);
        assert_eq!(p.num_pressure_dofs(), 9);
        assert!(p.dirichlet_nodes().is_empty());
    }

    #[test]
    fn periodic_q2_multiplicity() {
        // vertex nodes are shared by 4 cells, edge midpoints by 2, centers by 1
        let s = space(3, BoundaryKind::Periodic);
        let mut mult = vec![0; s.num_q2_nodes()];
        for c in 0..s.num_cells() {
            for &k in s.cell_q2(c) {
                mult[k] += 1;
            }
        }
        let [nx, _] = s.q2_dims();
        for (k, m) in mult.iter().enumerate() {
            let (i, j) = (k % nx, k / nx);
            let expect = match (i % 2, j % 2) {
                (0, 0) => 4,
                (1, 1) => 1,
                _ => 2,
            };
            assert_eq!(*m, expect);
        }
    }

    #[test]
    fn cell_integral_of_one() {
        let s = space(4, BoundaryKind::Dirichlet);
        let total: f64 = s.tabulation().jxw.iter().sum();
        assert!((total - s.mesh().cell(0).measure).abs() < 1e-14);
    }

    #[test]
    fn q2_q2_q1_products_exact_with_default_order() {
        // degree 2+2+1 = 5 per axis, default order 4 integrates up to 7
        let s = space(1, BoundaryKind::Dirichlet);
        let hi = s.tabulate(8);
        let lo = s.tabulation();
        let f = |t: &CellTabulation| -> f64 {
            (0..t.len())
                .map(|q| t.jxw[q] * t.q2[q][1] * t.q2[q][7] * t.q1[q][2])
                .sum()
        };
        assert!((f(lo) - f(&hi)).abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_space() {
        let s = space(3, BoundaryKind::Dirichlet);
        let f = |x: f64, y: f64| [x * x * y * y - 0.3 * x * y + 2.0, x * y * y + 1.0];
        let u = s.interpolate_velocity(f);
        for &pt in &[[0.13, -0.77], [0.9, 0.05], [-0.44, 0.61]] {
            let v = s.eval_velocity(&u, pt);
            let e = f(pt[0], pt[1]);
            assert!((v[0] - e[0]).abs() < 1e-13 && (v[1] - e[1]).abs() < 1e-13);
        }
        let c = s.interpolate_velocity(|_, _| [3.0, -1.0]);
        assert!(c[..s.num_q2_nodes()].iter().all(|&v| v == 3.0));
        let p = s.interpolate_pressure(|x, y| 1.0 + 2.0 * x - y + 0.5 * x * y);
        assert!((s.eval_pressure(&p, [0.3, 0.2]) - (1.0 + 0.6 - 0.2 + 0.03)).abs() < 1e-14);
    }

    #[test]
    fn coarse_projection_reproduces_range() {
        let s = space(2, BoundaryKind::Dirichlet);
        let tab = s.tabulation();
        let dm = CoarseProjectionSpace::new(CoarseDegree::Q1Discontinuous, tab).unwrap();
        let pts = s.points_at(tab, 0);
        let w: Vec<f64> = pts
            .iter()
            .map(|p| 1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[1])
            .collect();
        let pw = dm.project(tab, &w);
        for (a, b) in w.iter().zip(&pw) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
