//! Local projection machinery: cell-averaged streamline directions, the
//! fluctuation operator `kappa_M = id - pi_M` and the reference blocks of the
//! streamline-upwind stabilization.

use crate::fespace::{CellTabulation, CoarseProjectionSpace, TaylorHoodSpace};

/// Cell mean `u_M = |M|^{-1} \int_M u` of a velocity DOF vector.
pub fn averaged_direction(space: &TaylorHoodSpace, cell: usize, u: &[f64]) -> [f64; 2] {
    let tab = space.tabulation();
    let vals = space.velocity_at(tab, cell, u);
    let mut m = [0.0; 2];
    let mut area = 0.0;
    for (v, w) in vals.iter().zip(&tab.jxw) {
        m[0] += w * v[0];
        m[1] += w * v[1];
        area += w;
    }
    [m[0] / area, m[1] / area]
}

/// Averaged directions of all cells.
pub fn averaged_directions(space: &TaylorHoodSpace, u: &[f64]) -> Vec<[f64; 2]> {
    (0..space.num_cells())
        .map(|c| averaged_direction(space, c, u))
        .collect()
}

/// `kappa_M(w)` for a scalar sampled at the quadrature points of `tab`.
pub fn fluctuation_scalar(
    coarse: &CoarseProjectionSpace,
    tab: &CellTabulation,
    samples: &[f64],
) -> Vec<f64> {
    let proj = coarse.project(tab, samples);
    samples.iter().zip(&proj).map(|(s, p)| s - p).collect()
}

/// `kappa_M(w)` for a vector field sampled at the quadrature points, applied
/// componentwise.
pub fn fluctuation_apply(
    coarse: &CoarseProjectionSpace,
    tab: &CellTabulation,
    samples: &[[f64; 2]],
) -> Vec<[f64; 2]> {
    let x: Vec<f64> = samples.iter().map(|s| s[0]).collect();
    let y: Vec<f64> = samples.iter().map(|s| s[1]).collect();
    let kx = fluctuation_scalar(coarse, tab, &x);
    let ky = fluctuation_scalar(coarse, tab, &y);
    kx.into_iter().zip(ky).map(|(a, b)| [a, b]).collect()
}

/// Fluctuations of the scalar Q2 derivatives on the reference cell, combined
/// into `S_ab[i][j] = (kappa(d_a phi_i), kappa(d_b phi_j))_M`.
///
/// For a constant direction `w_M` the SU block of one component is
/// `tau (w_x^2 S_xx + w_x w_y (S_xy + S_yx) + w_y^2 S_yy)`.
#[derive(Debug, Clone)]
pub struct SuReference {
    pub sxx: [[f64; 9]; 9],
    pub sxy: [[f64; 9]; 9],
    pub syy: [[f64; 9]; 9],
}

impl SuReference {
    pub fn new(coarse: &CoarseProjectionSpace, tab: &CellTabulation) -> Self {
        let nq = tab.len();
        let mut kx = vec![[0.0; 9]; nq];
        let mut ky = vec![[0.0; 9]; nq];
        for j in 0..9 {
            let dx: Vec<f64> = tab.q2_grad.iter().map(|g| g[j][0]).collect();
            let dy: Vec<f64> = tab.q2_grad.iter().map(|g| g[j][1]).collect();
            let fx = fluctuation_scalar(coarse, tab, &dx);
            let fy = fluctuation_scalar(coarse, tab, &dy);
            for q in 0..nq {
                kx[q][j] = fx[q];
                ky[q][j] = fy[q];
            }
        }
        let mut r = Self {
            sxx: [[0.0; 9]; 9],
            sxy: [[0.0; 9]; 9],
            syy: [[0.0; 9]; 9],
        };
        for q in 0..nq {
            let w = tab.jxw[q];
            for i in 0..9 {
                for j in 0..9 {
                    r.sxx[i][j] += w * kx[q][i] * kx[q][j];
                    r.sxy[i][j] += w * kx[q][i] * ky[q][j];
                    r.syy[i][j] += w * ky[q][i] * ky[q][j];
                }
            }
        }
        r
    }

    /// Scalar 9x9 block `(kappa(w.grad phi_j), kappa(w.grad phi_i))` without tau.
    pub fn block(&self, w: [f64; 2]) -> [[f64; 9]; 9] {
        let mut out = [[0.0; 9]; 9];
        let (a, b) = (w[0], w[1]);
        for i in 0..9 {
            for j in 0..9 {
                out[i][j] = a * a * self.sxx[i][j]
                    + a * b * (self.sxy[i][j] + self.sxy[j][i])
                    + b * b * self.syy[i][j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::CoarseDegree;
    use crate::mesh::{BoundaryKind, Mesh};

    fn unit_space(n: usize) -> TaylorHoodSpace {
        TaylorHoodSpace::new(
            Mesh::new([0.0, 0.0], [1.0, 1.0], [n, n], BoundaryKind::Dirichlet).unwrap(),
        )
    }

    #[test]
    fn averaged_direction_examples() {
        let s = unit_space(1);
        let c = s.interpolate_velocity(|_, _| [2.0, 3.0]);
        let m = averaged_direction(&s, 0, &c);
        assert!((m[0] - 2.0).abs() < 1e-14 && (m[1] - 3.0).abs() < 1e-14);
        let lin = s.interpolate_velocity(|x, _| [x, 0.0]);
        let m = averaged_direction(&s, 0, &lin);
        assert!((m[0] - 0.5).abs() < 1e-14 && m[1].abs() < 1e-14);
        let z = vec![0.0; s.num_velocity_dofs()];
        assert_eq!(averaged_direction(&s, 0, &z), [0.0, 0.0]);
    }

    #[test]
    fn p0_fluctuation_is_mean_subtraction() {
        let s = unit_space(1);
        let tab = s.tabulation();
        let coarse = CoarseProjectionSpace::new(CoarseDegree::P0, tab).unwrap();
        let pts = s.points_at(tab, 0);
        let w: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let k = fluctuation_scalar(&coarse, tab, &w);
        for (kv, p) in k.iter().zip(&pts) {
            assert!((kv - (p[0] - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn fluctuation_is_idempotent_and_orthogonal() {
        let s = unit_space(2);
        let tab = s.tabulation();
        for deg in [CoarseDegree::P0, CoarseDegree::Q1Discontinuous] {
            let coarse = CoarseProjectionSpace::new(deg, tab).unwrap();
            let pts = s.points_at(tab, 3);
            let w: Vec<[f64; 2]> = pts
                .iter()
                .map(|p| [(3.0 * p[0]).sin() * p[1], (p[0] * p[1]).exp()])
                .collect();
            let k1 = fluctuation_apply(&coarse, tab, &w);
            let k2 = fluctuation_apply(&coarse, tab, &k1);
            for (a, b) in k1.iter().zip(&k2) {
                assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
            }
            for f in 0..coarse.dim() {
                for c in 0..2 {
                    let ip: f64 = (0..tab.len())
                        .map(|q| tab.jxw[q] * coarse.value(q, f) * k1[q][c])
                        .sum();
                    assert!(ip.abs() < 1e-10);
                }
            }
            // the range of pi_M is annihilated
            let d: Vec<[f64; 2]> = tab.points.iter().map(|_| [1.5, -2.0]).collect();
            assert!(fluctuation_apply(&coarse, tab, &d)
                .iter()
                .all(|v| v[0].abs() < 1e-13 && v[1].abs() < 1e-13));
        }
    }
}
