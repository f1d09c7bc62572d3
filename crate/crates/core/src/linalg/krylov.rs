//! Preconditioned Krylov solvers: CG for symmetric problems (optionally with
//! the constant vector as nullspace), BiCGStab and restarted GMRES otherwise.

use super::sparse::{axpy, dot, norm2, remove_mean, LinearOperator, SparseMatrix};
use std::fmt;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 5000;
pub const GMRES_RESTART: usize = 50;
/// CG gives up after this many iterations without a new smallest residual
/// and returns the best iterate seen.
pub const CG_STAGNATION_WINDOW: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`.
    pub residual: f64,
    pub converged: bool,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} after {} iterations, relative residual {:.3e}",
            if self.converged {
                "converged"
            } else {
                "not converged"
            },
            self.iterations,
            self.residual
        )
    }
}

/// Preconditioner application `z = P^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling. Zero diagonal entries are left unscaled.
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(diag: &[f64]) -> Self {
        Self {
            inv_diag: diag
                .iter()
                .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        }
    }

    pub fn from_matrix(a: &SparseMatrix) -> Self {
        Self::new(&a.diagonal())
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

/// Preconditioned conjugate gradients starting from `x`.
///
/// With `nullspace` set the operator is assumed singular with the constant
/// vector as kernel: the right-hand side, the preconditioned residuals and
/// the iterate are kept orthogonal to constants, and the result has zero mean.
pub fn cg(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    nullspace: bool,
) -> SolveReport {
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let mut b = b.to_vec();
    if nullspace {
        remove_mean(&mut b);
        remove_mean(x);
    }
    let bnorm = norm2(&b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return SolveReport {
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut r = residual(op, &b, x);
    if nullspace {
        remove_mean(&mut r);
    }
    let mut rel = norm2(&r) / bnorm;
    if rel <= tol {
        return SolveReport {
            iterations: 0,
            residual: rel,
            converged: true,
        };
    }
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    if nullspace {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut best = (rel, 0, x.to_vec());
    for it in 1..=max_iter {
        if it - best.1 > CG_STAGNATION_WINDOW {
            x.copy_from_slice(&best.2);
            let mut rt = residual(op, &b, x);
            if nullspace {
                remove_mean(&mut rt);
                remove_mean(x);
            }
            return SolveReport {
                iterations: it - 1,
                residual: norm2(&rt) / bnorm,
                converged: false,
            };
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return SolveReport {
                iterations: it,
                residual: rel,
                converged: false,
            };
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        if nullspace {
            remove_mean(&mut r);
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol {
            // confirm against the true residual to guard against drift
            let mut rt = residual(op, &b, x);
            if nullspace {
                remove_mean(&mut rt);
            }
            let true_rel = norm2(&rt) / bnorm;
            if true_rel <= tol {
                if nullspace {
                    remove_mean(x);
                }
                return SolveReport {
                    iterations: it,
                    residual: true_rel,
                    converged: true,
                };
            }
            r = rt;
            rel = true_rel;
        }
        if rel < best.0 {
            best.0 = rel;
            best.1 = it;
            best.2.copy_from_slice(x);
        }
        pc.apply(&r, &mut z);
        if nullspace {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    if best.0 < rel {
        x.copy_from_slice(&best.2);
        let mut rt = residual(op, &b, x);
        if nullspace {
            remove_mean(&mut rt);
        }
        rel = norm2(&rt) / bnorm;
    }
    if nullspace {
        remove_mean(x);
    }
    SolveReport {
        iterations: max_iter,
        residual: rel,
        converged: false,
    }
}

/// Right-preconditioned BiCGStab starting from `x`.
pub fn bicgstab(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> SolveReport {
    let n = op.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return SolveReport {
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut r = residual(op, b, x);
    let mut rel = norm2(&r) / bnorm;
    if rel <= tol {
        return SolveReport {
            iterations: 0,
            residual: rel,
            converged: true,
        };
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return SolveReport {
                iterations: it,
                residual: rel,
                converged: false,
            };
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pc.apply(&p, &mut y);
        op.apply(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            return SolveReport {
                iterations: it,
                residual: rel,
                converged: false,
            };
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) / bnorm <= tol {
            axpy(alpha, &y, x);
            let true_rel = norm2(&residual(op, b, x)) / bnorm;
            if true_rel <= tol {
                return SolveReport {
                    iterations: it,
                    residual: true_rel,
                    converged: true,
                };
            }
            r = residual(op, b, x);
            rel = true_rel;
            continue;
        }
        pc.apply(&s, &mut z);
        op.apply(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return SolveReport {
                iterations: it,
                residual: rel,
                converged: false,
            };
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol {
            let true_rel = norm2(&residual(op, b, x)) / bnorm;
            if true_rel <= tol {
                return SolveReport {
                    iterations: it,
                    residual: true_rel,
                    converged: true,
                };
            }
            r = residual(op, b, x);
            rel = true_rel;
        }
        if omega == 0.0 || !rel.is_finite() {
            return SolveReport {
                iterations: it,
                residual: rel,
                converged: false,
            };
        }
    }
    SolveReport {
        iterations: max_iter,
        residual: rel,
        converged: false,
    }
}

/// Right-preconditioned restarted GMRES starting from `x`.
pub fn gmres(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> SolveReport {
    let n = op.dim();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return SolveReport {
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let m = restart.max(1);
    let mut total = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    while total < max_iter {
        let r = residual(op, b, x);
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return SolveReport {
                iterations: total,
                residual: rel,
                converged: true,
            };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            pc.apply(&basis[k], &mut z);
            op.apply(&z, &mut w);
            for (j, vj) in basis.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                axpy(-h[j][k], vj, &mut w);
            }
            h[k + 1][k] = norm2(&w);
            for j in 0..k {
                let tmp = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = tmp;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= tol {
                break;
            }
            let wn = norm2(&w);
            if wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution
        let mut yv = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * yv[j];
            }
            yv[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in yv.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        pc.apply(&update, &mut z);
        axpy(1.0, &z, x);
        if k_used == 0 {
            break;
        }
    }
    let true_rel = norm2(&residual(op, b, x)) / bnorm;
    SolveReport {
        iterations: total,
        residual: true_rel,
        converged: true_rel <= tol,
    }
}

/// Solves a symmetric positive (semi)definite sparse system by Jacobi-CG from
/// a zero initial guess.
pub fn solve_spd(
    a: &SparseMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    nullspace: bool,
) -> (Vec<f64>, SolveReport) {
    let mut x = vec![0.0; b.len()];
    let rep = cg(
        a,
        &Jacobi::from_matrix(a),
        b,
        &mut x,
        tol,
        max_iter,
        nullspace,
    );
    (x, rep)
}

/// Solves a general sparse system: Jacobi-BiCGStab, falling back to
/// Jacobi-GMRES(50) from the last iterate if BiCGStab stalls or breaks down.
pub fn solve_nonsym(
    a: &SparseMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, SolveReport) {
    let mut x = vec![0.0; b.len()];
    let rep = solve_nonsym_from(a, b, &mut x, tol, max_iter);
    (x, rep)
}

/// Same as [`solve_nonsym`] starting from the guess in `x`.
pub fn solve_nonsym_from(
    a: &SparseMatrix,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> SolveReport {
    let pc = Jacobi::from_matrix(a);
    let guess = x.to_vec();
    let rep = bicgstab(a, &pc, b, x, tol, max_iter);
    if rep.converged {
        return rep;
    }
    log::debug!("BiCGStab {rep}; retrying with GMRES({GMRES_RESTART})");
    if !x.iter().all(|v| v.is_finite()) {
        x.copy_from_slice(&guess);
    }
    let g = gmres(a, &pc, b, x, tol, GMRES_RESTART, max_iter);
    SolveReport {
        iterations: rep.iterations + g.iterations,
        ..g
    }
}
