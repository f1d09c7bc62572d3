//! Error norms in space and time and experimental orders of convergence.

use crate::assembly::{averaged_direction, fluctuation_apply, StabilizationParams};
use crate::error::{Error, Result};
use crate::fespace::{CellTabulation, CoarseProjectionSpace, TaylorHoodSpace};
use crate::stokes_projector::VelocityWithGradient;

/// Spatial norms of a velocity error `u - u_h` at one time level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VelocityErrors {
    pub l2: f64,
    /// H1 seminorm.
    pub h1: f64,
    /// `||div(u - u_h)||_0`.
    pub div: f64,
    /// `(nu |e|_1^2 + gamma ||div e||^2 + sum_M tau_M ||kappa_M((w_M.grad) e)||^2)^{1/2}`.
    pub lps: f64,
}

/// Velocity error norms against an exact field with gradient.
///
/// `tab` fixes the quadrature and `coarse` must be built on the same
/// tabulation. The streamline directions `w_M` are the cell means of `w`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_errors(
    space: &TaylorHoodSpace,
    tab: &CellTabulation,
    coarse: &CoarseProjectionSpace,
    params: &StabilizationParams,
    nu: f64,
    uh: &[f64],
    w: &[f64],
    exact: impl Fn(f64, f64) -> VelocityWithGradient,
) -> VelocityErrors {
    let h = space.mesh().h();
    let (mut l2, mut h1, mut div, mut su) = (0.0, 0.0, 0.0, 0.0);
    for cell in 0..space.num_cells() {
        let pts = space.points_at(tab, cell);
        let vals = space.velocity_at(tab, cell, uh);
        let grads = space.velocity_grad_at(tab, cell, uh);
        let wm = averaged_direction(space, cell, w);
        let tau = params.tau(h, wm[0].hypot(wm[1]), nu);
        let mut streamline = Vec::with_capacity(pts.len());
        for (q, x) in pts.iter().enumerate() {
            let (ue, ge) = exact(x[0], x[1]);
            let jw = tab.jxw[q];
            let e = [ue[0] - vals[q][0], ue[1] - vals[q][1]];
            let mut ge_err = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    ge_err[a][b] = ge[a][b] - grads[q][a][b];
                }
            }
            l2 += jw * (e[0] * e[0] + e[1] * e[1]);
            h1 += jw * ge_err.iter().flatten().map(|v| v * v).sum::<f64>();
            let d = ge_err[0][0] + ge_err[1][1];
            div += jw * d * d;
            streamline.push([
                wm[0] * ge_err[0][0] + wm[1] * ge_err[0][1],
                wm[0] * ge_err[1][0] + wm[1] * ge_err[1][1],
            ]);
        }
        if tau > 0.0 {
            let k = fluctuation_apply(coarse, tab, &streamline);
            su += tau
                * k.iter()
                    .zip(&tab.jxw)
                    .map(|(v, jw)| jw * (v[0] * v[0] + v[1] * v[1]))
                    .sum::<f64>();
        }
    }
    let lps = (nu * h1 + params.gamma * div + su).max(0.0).sqrt();
    VelocityErrors {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
        div: div.sqrt(),
        lps,
    }
}

/// `||u - u_h||_0` alone.
pub fn velocity_l2_error(
    space: &TaylorHoodSpace,
    tab: &CellTabulation,
    uh: &[f64],
    exact: impl Fn(f64, f64) -> [f64; 2],
) -> f64 {
    let mut s = 0.0;
    for cell in 0..space.num_cells() {
        let pts = space.points_at(tab, cell);
        let vals = space.velocity_at(tab, cell, uh);
        for (q, x) in pts.iter().enumerate() {
            let ue = exact(x[0], x[1]);
            let e = [ue[0] - vals[q][0], ue[1] - vals[q][1]];
            s += tab.jxw[q] * (e[0] * e[0] + e[1] * e[1]);
        }
    }
    s.sqrt()
}

/// LPS norm of a discrete velocity with streamline directions from `w`.
/// `coarse` must be built on the space's own tabulation.
pub fn lps_norm(
    space: &TaylorHoodSpace,
    coarse: &CoarseProjectionSpace,
    params: &StabilizationParams,
    nu: f64,
    u: &[f64],
    w: &[f64],
) -> f64 {
    velocity_errors(
        space,
        space.tabulation(),
        coarse,
        params,
        nu,
        u,
        w,
        |_, _| ([0.0; 2], [[0.0; 2]; 2]),
    )
    .lps
}

/// `||(p - p_h) - mean(p - p_h)||_0`, so that neither pressure needs to be
/// normalized beforehand.
pub fn pressure_l2_error(
    space: &TaylorHoodSpace,
    tab: &CellTabulation,
    ph: &[f64],
    exact: impl Fn(f64, f64) -> f64,
) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    for cell in 0..space.num_cells() {
        let pts = space.points_at(tab, cell);
        let vals = space.pressure_at(tab, cell, ph);
        for (q, x) in pts.iter().enumerate() {
            let e = exact(x[0], x[1]) - vals[q];
            s1 += tab.jxw[q] * e;
            s2 += tab.jxw[q] * e * e;
        }
    }
    (s2 - s1 * s1 / space.mesh().area()).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeNorm {
    /// `(dt sum_n a_n^2)^{1/2}`.
    L2,
    /// `max_n a_n`.
    Linf,
}

pub fn discrete_time_norm(values: &[f64], dt: f64, kind: TimeNorm) -> f64 {
    match kind {
        TimeNorm::L2 => (dt * values.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        TimeNorm::Linf => values.iter().copied().fold(0.0, f64::max),
    }
}

/// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn eoc(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && h_fine > 0.0) {
        return Err(Error::InvalidArgument(
            "errors and step sizes must be positive".into(),
        ));
    }
    if !(h_coarse > h_fine) {
        return Err(Error::InvalidArgument(format!(
            "h_coarse = {h_coarse} must exceed h_fine = {h_fine}"
        )));
    }
    Ok((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln())
}

/// Space-time error norms of one refinement level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LevelErrors {
    pub h: f64,
    pub dt: f64,
    /// `l^inf(L^2)` velocity.
    pub velocity_l2: f64,
    /// `l^2(H^1)` velocity.
    pub velocity_h1: f64,
    /// `l^2(L^2)` divergence.
    pub divergence: f64,
    /// `l^2(LPS)` velocity.
    pub lps: f64,
    /// `l^2(L^2)` pressure.
    pub pressure: f64,
}

impl LevelErrors {
    pub const NORM_NAMES: [&'static str; 5] =
        ["u_linf_l2", "u_l2_h1", "div_l2_l2", "u_l2_lps", "p_l2_l2"];

    pub fn norms(&self) -> [f64; 5] {
        [
            self.velocity_l2,
            self.velocity_h1,
            self.divergence,
            self.lps,
            self.pressure,
        ]
    }
}

/// Collects per-step spatial errors of one run.
#[derive(Debug, Clone, Default)]
pub struct ErrorAccumulator {
    l2: Vec<f64>,
    h1: Vec<f64>,
    div: Vec<f64>,
    lps: Vec<f64>,
    p: Vec<f64>,
}

impl ErrorAccumulator {
    pub fn push(&mut self, u: VelocityErrors, p: f64) {
        self.l2.push(u.l2);
        self.h1.push(u.h1);
        self.div.push(u.div);
        self.lps.push(u.lps);
        self.p.push(p);
    }

    pub fn len(&self) -> usize {
        self.l2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l2.is_empty()
    }

    pub fn finish(&self, h: f64, dt: f64) -> LevelErrors {
        LevelErrors {
            h,
            dt,
            velocity_l2: discrete_time_norm(&self.l2, dt, TimeNorm::Linf),
            velocity_h1: discrete_time_norm(&self.h1, dt, TimeNorm::L2),
            divergence: discrete_time_norm(&self.div, dt, TimeNorm::L2),
            lps: discrete_time_norm(&self.lps, dt, TimeNorm::L2),
            pressure: discrete_time_norm(&self.p, dt, TimeNorm::L2),
        }
    }
}

/// Errors of a refinement ladder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub levels: Vec<LevelErrors>,
}

impl ErrorReport {
    pub fn new(levels: Vec<LevelErrors>) -> Self {
        Self { levels }
    }

    /// Orders between level `i - 1` and `i` for every norm, measured against
    /// whichever of `h` and `dt` changed. `None` for the first level and for
    /// pairs where both or neither changed.
    pub fn eoc_table(&self) -> Vec<Option<[f64; 5]>> {
        let mut out = vec![None];
        for w in self.levels.windows(2) {
            let (c, f) = (&w[0], &w[1]);
            let dh = !same(c.h, f.h);
            let dt = !same(c.dt, f.dt);
            let step = match (dh, dt) {
                (true, false) => Some((c.h, f.h)),
                (false, true) => Some((c.dt, f.dt)),
                _ => None,
            };
            out.push(step.map(|(sc, sf)| {
                let (ec, ef) = (c.norms(), f.norms());
                let mut r = [f64::NAN; 5];
                for k in 0..5 {
                    r[k] = eoc(ec[k], ef[k], sc, sf).unwrap_or(f64::NAN);
                }
                r
            }));
        }
        out.truncate(self.levels.len());
        out
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_examples() {
        assert!((eoc(0.1, 0.025, 0.2, 0.1).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(eoc(0.3, 0.3, 0.2, 0.1).unwrap(), 0.0);
        assert!((eoc(0.08, 0.01, 0.2, 0.1).unwrap() - 3.0).abs() < 1e-12);
        assert!(eoc(0.0, 0.1, 0.2, 0.1).is_err());
        assert!(eoc(0.1, 0.1, 0.1, 0.2).is_err());
    }

    #[test]
    fn time_norm_examples() {
        let a = vec![0.5; 8];
        assert!((discrete_time_norm(&a, 0.25, TimeNorm::L2) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            discrete_time_norm(&[1.0, 3.0, 2.0], 0.1, TimeNorm::Linf),
            3.0
        );
    }

    #[test]
    fn eoc_table_needs_exactly_one_change() {
        let lv = |h: f64, dt: f64, e: f64| LevelErrors {
            h,
            dt,
            velocity_l2: e,
            velocity_h1: e,
            divergence: e,
            lps: e,
            pressure: e,
        };
        let r = ErrorReport::new(vec![
            lv(0.2, 0.1, 0.4),
            lv(0.1, 0.1, 0.1),
            lv(0.05, 0.05, 0.01),
        ]);
        let t = r.eoc_table();
        assert!(t[0].is_none());
        assert!((t[1].unwrap()[0] - 2.0).abs() < 1e-12);
        assert!(t[2].is_none());
    }
}
