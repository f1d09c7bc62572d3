//! Global assembly of the bilinear and trilinear forms.
//!
//! Local velocity matrices are 18x18 with local index `c * 9 + k` for
//! component `c` and Q2 function `k`. Because all cells are congruent, the
//! constant-coefficient local matrices are computed once.

use super::lps::{averaged_direction, SuReference};
use super::params::StabilizationParams;
use crate::fespace::{CellTabulation, CoarseProjectionSpace, TaylorHoodSpace};
use crate::linalg::SparseMatrix;

/// Sparsity pattern of a cell-wise assembled matrix together with the
/// storage position of every local entry.
#[derive(Debug, Clone)]
pub struct CellPattern {
    template: SparseMatrix,
    rows: usize,
    cols: usize,
    positions: Vec<usize>,
}

impl CellPattern {
    pub fn new(
        nrows: usize,
        ncols: usize,
        ncells: usize,
        row_dofs: impl Fn(usize) -> Vec<usize>,
        col_dofs: impl Fn(usize) -> Vec<usize>,
    ) -> Self {
        let mut pattern = vec![Vec::new(); nrows];
        let mut cell_rows = Vec::with_capacity(ncells);
        let mut cell_cols = Vec::with_capacity(ncells);
        for c in 0..ncells {
            let r = row_dofs(c);
            let k = col_dofs(c);
            for &i in &r {
                pattern[i].extend_from_slice(&k);
            }
            cell_rows.push(r);
            cell_cols.push(k);
        }
        let template = SparseMatrix::from_pattern(nrows, ncols, pattern);
        let rows = cell_rows.first().map_or(0, |r| r.len());
        let cols = cell_cols.first().map_or(0, |c| c.len());
        let mut positions = Vec::with_capacity(ncells * rows * cols);
        for c in 0..ncells {
            for &i in &cell_rows[c] {
                for &j in &cell_cols[c] {
                    positions.push(template.position(i, j).expect("entry in pattern"));
                }
            }
        }
        Self {
            template,
            rows,
            cols,
            positions,
        }
    }

    pub fn velocity(space: &TaylorHoodSpace) -> Self {
        let n = space.num_velocity_dofs();
        let f = |c| space.cell_velocity_dofs(c).to_vec();
        Self::new(n, n, space.num_cells(), f, f)
    }

    pub fn coupling(space: &TaylorHoodSpace) -> Self {
        Self::new(
            space.num_pressure_dofs(),
            space.num_velocity_dofs(),
            space.num_cells(),
            |c| space.cell_q1(c).to_vec(),
            |c| space.cell_velocity_dofs(c).to_vec(),
        )
    }

    pub fn pressure(space: &TaylorHoodSpace) -> Self {
        let n = space.num_pressure_dofs();
        let f = |c| space.cell_q1(c).to_vec();
        Self::new(n, n, space.num_cells(), f, f)
    }

    pub fn zeros(&self) -> SparseMatrix {
        self.template.clone()
    }

    /// Adds the row-major local matrix of `cell` into `m`.
    pub fn add_local(&self, m: &mut SparseMatrix, cell: usize, local: &[f64]) {
        debug_assert_eq!(local.len(), self.rows * self.cols);
        let base = cell * self.rows * self.cols;
        let data = m.data_mut();
        for (k, v) in local.iter().enumerate() {
            data[self.positions[base + k]] += v;
        }
    }

    /// Assembles the same local matrix on every cell.
    pub fn assemble_uniform(&self, ncells: usize, local: &[f64]) -> SparseMatrix {
        let mut m = self.zeros();
        for c in 0..ncells {
            self.add_local(&mut m, c, local);
        }
        m
    }
}

/// Constant-coefficient local matrices of the reference cell.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    /// 9x9 scalar Q2 mass.
    pub mass9: [[f64; 9]; 9],
    /// 9x9 scalar Q2 stiffness.
    pub stiff9: [[f64; 9]; 9],
    /// 18x18 grad-div.
    pub graddiv: Vec<f64>,
    /// 4x18 coupling `(div v_j, q_i)`.
    pub coupling: Vec<f64>,
    /// 4x4 Q1 stiffness and mass.
    pub p_stiff: Vec<f64>,
    pub p_mass: Vec<f64>,
}

impl LocalMatrices {
    pub fn new(tab: &CellTabulation) -> Self {
        let mut lm = Self {
            mass9: [[0.0; 9]; 9],
            stiff9: [[0.0; 9]; 9],
            graddiv: vec![0.0; 18 * 18],
            coupling: vec![0.0; 4 * 18],
            p_stiff: vec![0.0; 16],
            p_mass: vec![0.0; 16],
        };
        for q in 0..tab.len() {
            let w = tab.jxw[q];
            let (v, g) = (&tab.q2[q], &tab.q2_grad[q]);
            for i in 0..9 {
                for j in 0..9 {
                    lm.mass9[i][j] += w * v[i] * v[j];
                    lm.stiff9[i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
            for ci in 0..2 {
                for i in 0..9 {
                    for cj in 0..2 {
                        for j in 0..9 {
                            lm.graddiv[(ci * 9 + i) * 18 + cj * 9 + j] += w * g[i][ci] * g[j][cj];
                        }
                    }
                }
            }
            let (pv, pg) = (&tab.q1[q], &tab.q1_grad[q]);
            for a in 0..4 {
                for cj in 0..2 {
                    for j in 0..9 {
                        lm.coupling[a * 18 + cj * 9 + j] += w * pv[a] * g[j][cj];
                    }
                }
                for b in 0..4 {
                    lm.p_stiff[a * 4 + b] += w * (pg[a][0] * pg[b][0] + pg[a][1] * pg[b][1]);
                    lm.p_mass[a * 4 + b] += w * pv[a] * pv[b];
                }
            }
        }
        lm
    }
}

fn block_diag(s: &[[f64; 9]; 9]) -> Vec<f64> {
    let mut out = vec![0.0; 18 * 18];
    for c in 0..2 {
        for i in 0..9 {
            for j in 0..9 {
                out[(c * 9 + i) * 18 + c * 9 + j] = s[i][j];
            }
        }
    }
    out
}

fn finalize(mut m: SparseMatrix) -> SparseMatrix {
    m.prune();
    m
}

/// Velocity mass matrix `(u, v)`.
pub fn assemble_mass(space: &TaylorHoodSpace) -> SparseMatrix {
    let lm = LocalMatrices::new(space.tabulation());
    finalize(
        CellPattern::velocity(space).assemble_uniform(space.num_cells(), &block_diag(&lm.mass9)),
    )
}

/// Vector Laplacian `(grad u, grad v)` without the viscosity.
pub fn assemble_stiffness(space: &TaylorHoodSpace) -> SparseMatrix {
    let lm = LocalMatrices::new(space.tabulation());
    finalize(
        CellPattern::velocity(space).assemble_uniform(space.num_cells(), &block_diag(&lm.stiff9)),
    )
}

/// Grad-div form `(div u, div v)` without `gamma`.
pub fn assemble_graddiv(space: &TaylorHoodSpace) -> SparseMatrix {
    let lm = LocalMatrices::new(space.tabulation());
    finalize(CellPattern::velocity(space).assemble_uniform(space.num_cells(), &lm.graddiv))
}

/// Divergence coupling `B_{ij} = (div v_j, q_i)`, pressure rows and
/// velocity columns.
pub fn assemble_div_coupling(space: &TaylorHoodSpace) -> SparseMatrix {
    let lm = LocalMatrices::new(space.tabulation());
    finalize(CellPattern::coupling(space).assemble_uniform(space.num_cells(), &lm.coupling))
}

pub fn assemble_pressure_laplacian(space: &TaylorHoodSpace) -> SparseMatrix {
    let lm = LocalMatrices::new(space.tabulation());
    finalize(CellPattern::pressure(space).assemble_uniform(space.num_cells(), &lm.p_stiff))
}

pub fn assemble_pressure_mass(space: &TaylorHoodSpace) -> SparseMatrix {
    let lm = LocalMatrices::new(space.tabulation());
    finalize(CellPattern::pressure(space).assemble_uniform(space.num_cells(), &lm.p_mass))
}

/// Local skew-symmetric convection block for the advecting field sampled at
/// the quadrature points: `C_ij = 1/2 [((w.grad) phi_j, phi_i) - ((w.grad) phi_i, phi_j)]`.
pub fn local_convection(tab: &CellTabulation, w: &[[f64; 2]]) -> [[f64; 9]; 9] {
    let mut a = [[0.0; 9]; 9];
    for q in 0..tab.len() {
        let jw = tab.jxw[q];
        let (v, g) = (&tab.q2[q], &tab.q2_grad[q]);
        let mut adv = [0.0; 9];
        for j in 0..9 {
            adv[j] = w[q][0] * g[j][0] + w[q][1] * g[j][1];
        }
        for i in 0..9 {
            let s = jw * v[i];
            for j in 0..9 {
                a[i][j] += s * adv[j];
            }
        }
    }
    let mut c = [[0.0; 9]; 9];
    for i in 0..9 {
        for j in 0..9 {
            c[i][j] = 0.5 * (a[i][j] - a[j][i]);
        }
    }
    c
}

/// Skew-symmetric convection matrix `C(w)` realizing
/// `c(w; u, v) = 1/2 [((w.grad) u, v) - ((w.grad) v, u)]`.
pub fn assemble_convection_skew(space: &TaylorHoodSpace, w: &[f64]) -> SparseMatrix {
    let pat = CellPattern::velocity(space);
    let tab = space.tabulation();
    let mut m = pat.zeros();
    for cell in 0..space.num_cells() {
        let wq = space.velocity_at(tab, cell, w);
        pat.add_local(&mut m, cell, &block_diag(&local_convection(tab, &wq)));
    }
    finalize(m)
}

/// LPS-SU matrix `s_h(w; u, v) = sum_M tau_M (kappa_M((w_M.grad) u), kappa_M((w_M.grad) v))_M`.
pub fn assemble_lps_su(
    space: &TaylorHoodSpace,
    coarse: &CoarseProjectionSpace,
    params: &StabilizationParams,
    nu: f64,
    w: &[f64],
) -> SparseMatrix {
    let pat = CellPattern::velocity(space);
    let su = SuReference::new(coarse, space.tabulation());
    let h = space.mesh().h();
    let mut m = pat.zeros();
    for cell in 0..space.num_cells() {
        let wm = averaged_direction(space, cell, w);
        let tau = params.tau(h, wm[0].hypot(wm[1]), nu);
        if tau == 0.0 {
            continue;
        }
        let mut blk = su.block(wm);
        blk.iter_mut().flatten().for_each(|v| *v *= tau);
        pat.add_local(&mut m, cell, &block_diag(&blk));
    }
    finalize(m)
}

/// Constant operators of a space plus the machinery to assemble the
/// per-step momentum matrix on a fixed pattern.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    pub graddiv: SparseMatrix,
    /// `(div v, q)`, pressure rows, velocity columns.
    pub coupling: SparseMatrix,
    pub coupling_t: SparseMatrix,
    pub pressure_laplacian: SparseMatrix,
    pub pressure_mass: SparseMatrix,
    pub local: LocalMatrices,
    pub su_reference: SuReference,
    pub coarse: CoarseProjectionSpace,
    pattern: CellPattern,
}

/// Which nonlinear contributions enter a momentum matrix.
#[derive(Debug, Clone, Copy)]
pub struct MomentumTerms<'a> {
    /// Coefficient of the mass matrix (e.g. `3 / (2 dt)`).
    pub mass: f64,
    pub nu: f64,
    pub params: &'a StabilizationParams,
    /// Advecting field for the skew convection; `None` drops convection.
    pub convection: Option<&'a [f64]>,
    /// Field defining the SU directions `w_M`; `None` drops SU.
    pub su: Option<&'a [f64]>,
}

impl AssembledOperators {
    pub fn new(space: &TaylorHoodSpace, coarse: CoarseProjectionSpace) -> Self {
        let tab = space.tabulation();
        let local = LocalMatrices::new(tab);
        let pattern = CellPattern::velocity(space);
        let ncell = space.num_cells();
        let coupling =
            finalize(CellPattern::coupling(space).assemble_uniform(ncell, &local.coupling));
        Self {
            mass: finalize(pattern.assemble_uniform(ncell, &block_diag(&local.mass9))),
            stiffness: finalize(pattern.assemble_uniform(ncell, &block_diag(&local.stiff9))),
            graddiv: finalize(pattern.assemble_uniform(ncell, &local.graddiv)),
            coupling_t: coupling.transpose(),
            coupling,
            pressure_laplacian: finalize(
                CellPattern::pressure(space).assemble_uniform(ncell, &local.p_stiff),
            ),
            pressure_mass: finalize(
                CellPattern::pressure(space).assemble_uniform(ncell, &local.p_mass),
            ),
            su_reference: SuReference::new(&coarse, tab),
            coarse,
            local,
            pattern,
        }
    }

    /// `mass M + nu K + gamma G + C(w) + S(w)` on the full velocity pattern
    /// (stored zeros are kept so the pattern is stable across steps).
    pub fn momentum_matrix(&self, space: &TaylorHoodSpace, terms: &MomentumTerms) -> SparseMatrix {
        let tab = space.tabulation();
        let h = space.mesh().h();
        let lm = &self.local;
        let gamma = terms.params.gamma;
        let mut scalar = [[0.0; 9]; 9];
        for i in 0..9 {
            for j in 0..9 {
                scalar[i][j] = terms.mass * lm.mass9[i][j] + terms.nu * lm.stiff9[i][j];
            }
        }
        let mut base = block_diag(&scalar);
        for (b, g) in base.iter_mut().zip(&lm.graddiv) {
            *b += gamma * g;
        }
        let mut m = self.pattern.zeros();
        let mut local = vec![0.0; 18 * 18];
        for cell in 0..space.num_cells() {
            local.copy_from_slice(&base);
            if let Some(w) = terms.convection {
                let wq = space.velocity_at(tab, cell, w);
                let c = local_convection(tab, &wq);
                add_block(&mut local, &c, 1.0);
            }
            if let Some(w) = terms.su {
                let wm = averaged_direction(space, cell, w);
                let tau = terms.params.tau(h, wm[0].hypot(wm[1]), terms.nu);
                if tau != 0.0 {
                    add_block(&mut local, &self.su_reference.block(wm), tau);
                }
            }
            self.pattern.add_local(&mut m, cell, &local);
        }
        m
    }
}

fn add_block(local: &mut [f64], blk: &[[f64; 9]; 9], scale: f64) {
    for c in 0..2 {
        for i in 0..9 {
            for j in 0..9 {
                local[(c * 9 + i) * 18 + c * 9 + j] += scale * blk[i][j];
            }
        }
    }
}
