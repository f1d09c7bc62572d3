//! Time integration: BDF1 start, BDF2 convection-diffusion steps in the
//! eliminated form and the discrete pressure projection.
//!
//! One step computes a tentative velocity `u~^n` from
//!
//! ```text
//! (D_t u~^n, v) + nu (grad u~^n, grad v) + c(u~^n; u~^n, v) + s_h(u~^n; u~^n, v)
//!     + gamma (div u~^n, div v) = (f^n, v) + (p*, div v)
//! ```
//!
//! and then projects it. With `B` the divergence coupling and `M_I` the
//! velocity mass matrix on non-Dirichlet DOFs the projection solves
//! `B M_I^{-1} B^T phi = -(1/c) B u~^n` and sets `u^n = u~^n + c M_I^{-1} B^T phi`,
//! which makes `u^n` discretely divergence free and the `M`-orthogonal
//! projection of `u~^n`.

use crate::assembly::{
    assemble_load, pressure_laplace_solver, AssembledOperators, MomentumTerms, StabilizationParams,
    TensorLaplaceSolver, VelocityMassInverse,
};
use crate::error::{Error, Result};
use crate::fespace::{CoarseDegree, CoarseProjectionSpace, TaylorHoodSpace};
use crate::linalg::{cg, dot, norm2, solve_nonsym_from, solve_spd, LinearOperator, SparseMatrix};

/// Space-time vector field `(x, y, t) -> R^2`.
pub type VectorField = dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync;

/// `(3 u^n - 4 u^{n-1} + u^{n-2}) / (2 dt)`.
pub fn bdf_time_derivative(u: &[f64], u1: &[f64], u2: &[f64], dt: f64) -> Vec<f64> {
    assert!(dt > 0.0, "time step must be positive");
    let s = 1.0 / (2.0 * dt);
    u.iter()
        .zip(u1)
        .zip(u2)
        .map(|((a, b), c)| s * (3.0 * a - 4.0 * b + c))
        .collect()
}

/// `(7 p^{n-1} - 5 p^{n-2} + p^{n-3}) / 3`.
pub fn pressure_extrapolation(p1: &[f64], p2: &[f64], p3: &[f64]) -> Vec<f64> {
    p1.iter()
        .zip(p2)
        .zip(p3)
        .map(|((a, b), c)| (7.0 * a - 5.0 * b + c) / 3.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeVariant {
    Incremental,
    Rotational { chi: f64 },
}

impl SchemeVariant {
    pub fn chi(self) -> f64 {
        match self {
            SchemeVariant::Incremental => 0.0,
            SchemeVariant::Rotational { chi } => chi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardMode {
    /// Reassemble `C(w) + S(w)` at every sweep and iterate to tolerance.
    FixedPoint,
    /// Freeze `w = 2 u^{n-1} - u^{n-2}`; one linear solve per step.
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub max_sweeps: usize,
    pub tol: f64,
    pub mode: PicardMode,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 25,
            tol: 1e-9,
            mode: PicardMode::FixedPoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    pub momentum: f64,
    pub projection: f64,
    pub max_iter: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            momentum: 1e-12,
            projection: 1e-12,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    pub variant: SchemeVariant,
    pub picard: PicardConfig,
    pub solver: SolverTolerances,
    /// Drops convection and the streamline term, leaving a linear Stokes-type step.
    pub convection: bool,
}

impl SchemeConfig {
    pub fn new(dt: f64, t0: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t0,
            t_end,
            variant: SchemeVariant::Incremental,
            picard: PicardConfig::default(),
            solver: SolverTolerances::default(),
            convection: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_variant(mut self, variant: SchemeVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidArgument(format!(
                "empty time interval [{}, {}]",
                self.t0, self.t_end
            )));
        }
        let len = self.t_end - self.t0;
        let n = (len / self.dt).round();
        if n < 1.0 || (n * self.dt - len).abs() > 1e-9 * len {
            return Err(Error::InvalidArgument(format!(
                "time step {} does not divide the interval length {len}",
                self.dt
            )));
        }
        if let SchemeVariant::Rotational { chi } = self.variant {
            if !(chi >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "chi must be non-negative, got {chi}"
                )));
            }
        }
        if self.picard.max_sweeps == 0 || !(self.picard.tol > 0.0) {
            return Err(Error::InvalidArgument("invalid Picard settings".into()));
        }
        Ok(())
    }

    pub fn num_steps(&self) -> usize {
        ((self.t_end - self.t0) / self.dt).round() as usize
    }
}

/// Solution history of the scheme. Index 0 of each history is the most recent level.
#[derive(Debug, Clone)]
pub struct TimeState {
    pub step: usize,
    pub time: f64,
    /// `[u~^n, u~^{n-1}]`.
    pub u_tilde: [Vec<f64>; 2],
    /// `[u^n, u^{n-1}, u^{n-2}]`.
    pub u: [Vec<f64>; 3],
    /// `[p^n, p^{n-1}, p^{n-2}, p^{n-3}]`.
    pub p: [Vec<f64>; 4],
    /// Projection increments `[phi^n, phi^{n-1}]`.
    pub phi: [Vec<f64>; 2],
}

impl TimeState {
    /// Initial state `u~^0 = u^0`, `p^0` at time `t0`.
    pub fn new(u0: Vec<f64>, p0: Vec<f64>, t0: f64) -> Self {
        let np = p0.len();
        Self {
            step: 0,
            time: t0,
            u_tilde: [u0.clone(), u0.clone()],
            u: [u0.clone(), u0.clone(), u0],
            p: [p0.clone(), p0.clone(), p0.clone(), p0],
            phi: [vec![0.0; np], vec![0.0; np]],
        }
    }

    pub fn velocity(&self) -> &[f64] {
        &self.u[0]
    }

    pub fn tentative_velocity(&self) -> &[f64] {
        &self.u_tilde[0]
    }

    pub fn pressure(&self) -> &[f64] {
        &self.p[0]
    }

    fn push(&mut self, u_tilde: Vec<f64>, proj: Projection, time: f64) {
        self.u_tilde.rotate_right(1);
        self.u_tilde[0] = u_tilde;
        self.u.rotate_right(1);
        self.u[0] = proj.velocity;
        self.p.rotate_right(1);
        self.p[0] = proj.pressure;
        self.phi.rotate_right(1);
        self.phi[0] = proj.increment;
        self.step += 1;
        self.time = time;
    }
}

/// Diagnostics of one completed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub picard_sweeps: usize,
    pub solver_iterations: usize,
    /// `||div u~^n||_0`.
    pub divergence: f64,
    /// `1/2 ||u^n||_0^2`.
    pub kinetic_energy: f64,
}

impl StepRecord {
    pub const CSV_HEADER: &'static str =
        "step,time,picard_sweeps,solver_iterations,div_tentative,kinetic_energy";
}

/// Result of the momentum step.
#[derive(Debug, Clone)]
pub struct MomentumSolve {
    pub velocity: Vec<f64>,
    pub sweeps: usize,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Result of the projection step.
#[derive(Debug, Clone)]
pub struct Projection {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub increment: Vec<f64>,
    pub iterations: usize,
}

/// `B M_I^{-1} B^T` on pressure vectors.
struct ProjectionOperator<'a> {
    b: &'a SparseMatrix,
    bt: &'a SparseMatrix,
    minv: &'a VelocityMassInverse,
}

impl LinearOperator for ProjectionOperator<'_> {
    fn dim(&self) -> usize {
        self.b.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = self.bt.mul_vec(x);
        let z = self.minv.apply(&g);
        self.b.matvec(&z, y);
    }
}

/// The discretized problem together with the scheme settings.
pub struct Stepper {
    space: TaylorHoodSpace,
    ops: AssembledOperators,
    minv: VelocityMassInverse,
    laplace: TensorLaplaceSolver,
    pressure_weights: Vec<f64>,
    nu: f64,
    params: StabilizationParams,
    config: SchemeConfig,
    forcing: Option<Box<VectorField>>,
    boundary: Option<Box<VectorField>>,
}

impl Stepper {
    pub fn new(
        space: TaylorHoodSpace,
        coarse: CoarseDegree,
        nu: f64,
        params: StabilizationParams,
        config: SchemeConfig,
    ) -> Result<Self> {
        config.validate()?;
        if !(nu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "viscosity must be positive, got {nu}"
            )));
        }
        let coarse = CoarseProjectionSpace::new(coarse, space.tabulation())?;
        let ops = AssembledOperators::new(&space, coarse);
        let minv = VelocityMassInverse::new(&space)?;
        let ones = vec![1.0; space.num_pressure_dofs()];
        let pressure_weights = ops.pressure_mass.mul_vec(&ones);
        let laplace = pressure_laplace_solver(&space);
        Ok(Self {
            space,
            ops,
            minv,
            laplace,
            pressure_weights,
            nu,
            params,
            config,
            forcing: None,
            boundary: None,
        })
    }

    pub fn with_forcing(mut self, f: Box<VectorField>) -> Self {
        self.forcing = Some(f);
        self
    }

    /// Dirichlet velocity data; homogeneous when unset. Ignored on periodic meshes.
    pub fn with_boundary(mut self, g: Box<VectorField>) -> Self {
        self.boundary = Some(g);
        self
    }

    pub fn space(&self) -> &TaylorHoodSpace {
        &self.space
    }

    pub fn operators(&self) -> &AssembledOperators {
        &self.ops
    }

    pub fn mass_inverse(&self) -> &VelocityMassInverse {
        &self.minv
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn params(&self) -> &StabilizationParams {
        &self.params
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Integral mean of a pressure DOF vector.
    pub fn pressure_mean(&self, p: &[f64]) -> f64 {
        dot(&self.pressure_weights, p) / self.space.mesh().area()
    }

    pub fn remove_pressure_mean(&self, p: &mut [f64]) {
        let m = self.pressure_mean(p);
        p.iter_mut().for_each(|v| *v -= m);
    }

    pub fn kinetic_energy(&self, u: &[f64]) -> f64 {
        0.5 * self.ops.mass.bilinear(u, u)
    }

    pub fn divergence_norm(&self, u: &[f64]) -> f64 {
        self.ops.graddiv.bilinear(u, u).max(0.0).sqrt()
    }

    /// `sup_q |(div u, q)| / ||q||_0` over zero-mean discrete pressures.
    pub fn discrete_divergence(&self, u: &[f64]) -> f64 {
        let mut r = self.ops.coupling.mul_vec(u);
        let w = &self.pressure_weights;
        // closest multiple of M_p 1 in the M_p^{-1} norm
        let c = r.iter().sum::<f64>() / self.space.mesh().area();
        for (ri, wi) in r.iter_mut().zip(w) {
            *ri -= c * wi;
        }
        let (z, _) = solve_spd(&self.ops.pressure_mass, &r, 1e-13, 5000, false);
        dot(&r, &z).max(0.0).sqrt()
    }

    pub fn load(&self, t: f64) -> Vec<f64> {
        match &self.forcing {
            Some(f) => assemble_load(&self.space, |x, y| f(x, y, t)),
            None => vec![0.0; self.space.num_velocity_dofs()],
        }
    }

    pub fn dirichlet_data(&self, t: f64) -> Vec<(usize, f64)> {
        match &self.boundary {
            Some(g) => self.space.dirichlet_values(|x, y| g(x, y, t)),
            None => self
                .space
                .dirichlet_dofs()
                .into_iter()
                .map(|k| (k, 0.0))
                .collect(),
        }
    }

    /// Solves `(alpha M + nu K + gamma G + C(w) + S(w)) u = rhs_history + F + B^T p*`
    /// for the tentative velocity. `alpha` is the leading BDF coefficient,
    /// `history` the mass-weighted remainder of the discrete derivative, `guess`
    /// the Picard start and `frozen` the advecting field in extrapolated mode.
    pub fn convection_diffusion_step(
        &self,
        alpha: f64,
        history: &[f64],
        p_star: &[f64],
        time: f64,
        guess: &[f64],
        frozen: &[f64],
    ) -> Result<MomentumSolve> {
        let mut base = self.ops.mass.mul_vec(history);
        let load = self.load(time);
        let bt_p = self.ops.coupling_t.mul_vec(p_star);
        for ((b, l), g) in base.iter_mut().zip(&load).zip(&bt_p) {
            *b += l + g;
        }
        let bc = self.dirichlet_data(time);
        let mut w = guess.to_vec();
        for &(k, g) in &bc {
            w[k] = g;
        }
        let picard = self.config.picard;
        let tol = self.config.solver;
        let mut residuals = Vec::new();
        let mut iterations = 0;
        let mut sweeps = 0;
        let linear = !self.config.convection || picard.mode == PicardMode::Extrapolated;
        loop {
            let field: Option<&[f64]> = match (self.config.convection, picard.mode) {
                (false, _) => None,
                (true, PicardMode::FixedPoint) => Some(&w),
                (true, PicardMode::Extrapolated) => Some(frozen),
            };
            let terms = MomentumTerms {
                mass: alpha,
                nu: self.nu,
                params: &self.params,
                convection: field,
                su: field,
            };
            let mut a = self.ops.momentum_matrix(&self.space, &terms);
            let mut rhs = base.clone();
            a.apply_dirichlet(&mut rhs, &bc);
            let bnorm = norm2(&rhs);
            let aw = a.mul_vec(&w);
            let res = if bnorm > 0.0 {
                norm2(&rhs.iter().zip(&aw).map(|(b, x)| b - x).collect::<Vec<_>>()) / bnorm
            } else {
                norm2(&aw)
            };
            residuals.push(res);
            if res <= picard.tol || (linear && sweeps == 1) {
                break;
            }
            if sweeps == picard.max_sweeps {
                return Err(Error::PicardFailure {
                    sweeps,
                    residual: res,
                });
            }
            let rep = solve_nonsym_from(&a, &rhs, &mut w, tol.momentum, tol.max_iter);
            iterations += rep.iterations;
            if !rep.converged {
                return Err(Error::SolverFailure(format!(
                    "momentum solve at t = {time}: {rep}"
                )));
            }
            sweeps += 1;
        }
        if residuals.len() >= 3 {
            let r = &residuals[residuals.len() - 3..];
            if r[1] > r[0] || r[2] > r[1] {
                log::warn!("Picard residuals not monotone at t = {time}: {r:?}");
            }
        }
        Ok(MomentumSolve {
            velocity: w,
            sweeps,
            iterations,
            residuals,
        })
    }

    /// Projects `u_tilde` with recovery factor `c` (`2 dt / 3` for BDF2, `dt`
    /// for BDF1) and updates the pressure from `p_prev`.
    pub fn projection_step(&self, u_tilde: &[f64], p_prev: &[f64], c: f64) -> Result<Projection> {
        let b = &self.ops.coupling;
        let div = b.mul_vec(u_tilde);
        let rhs: Vec<f64> = div.iter().map(|v| -v / c).collect();
        let op = ProjectionOperator {
            b,
            bt: &self.ops.coupling_t,
            minv: &self.minv,
        };
        let mut phi = vec![0.0; rhs.len()];
        let tol = self.config.solver;
        let rep = cg(
            &op,
            &self.laplace,
            &rhs,
            &mut phi,
            tol.projection,
            tol.max_iter,
            true,
        );
        if !rep.converged {
            return Err(Error::SolverFailure(format!("pressure projection: {rep}")));
        }
        let lift = self.minv.apply(&self.ops.coupling_t.mul_vec(&phi));
        let velocity: Vec<f64> = u_tilde.iter().zip(&lift).map(|(u, l)| u + c * l).collect();
        let mut pressure: Vec<f64> = p_prev.iter().zip(&phi).map(|(p, f)| p + f).collect();
        let chi = self.config.variant.chi();
        if let SchemeVariant::Rotational { .. } = self.config.variant {
            if chi != 0.0 {
                let (d, drep) =
                    solve_spd(&self.ops.pressure_mass, &div, 1e-14, tol.max_iter, false);
                if !drep.converged && drep.residual > 1e-12 {
                    return Err(Error::SolverFailure(format!("pressure mass solve: {drep}")));
                }
                for (p, di) in pressure.iter_mut().zip(&d) {
                    *p -= chi * self.nu * di;
                }
            }
        }
        self.remove_pressure_mean(&mut pressure);
        Ok(Projection {
            velocity,
            pressure,
            increment: phi,
            iterations: rep.iterations,
        })
    }

    /// First step with BDF1.
    pub fn bdf1_startup(&self, state: &mut TimeState) -> Result<StepRecord> {
        assert_eq!(state.step, 0, "startup must be the first step");
        let dt = self.config.dt;
        let t = state.time + dt;
        let u0 = state.u[0].clone();
        let history: Vec<f64> = u0.iter().map(|v| v / dt).collect();
        let mom = self.convection_diffusion_step(1.0 / dt, &history, &state.p[0], t, &u0, &u0)?;
        let proj = self.projection_step(&mom.velocity, &state.p[0], dt)?;
        Ok(self.finish(state, mom, proj, t))
    }

    /// One BDF2 step for `n >= 2`.
    pub fn bdf2_step(&self, state: &mut TimeState) -> Result<StepRecord> {
        assert!(state.step >= 1, "BDF2 needs a completed startup step");
        let dt = self.config.dt;
        let t = state.time + dt;
        let (ut1, ut2) = (&state.u_tilde[0], &state.u_tilde[1]);
        let history: Vec<f64> = ut1
            .iter()
            .zip(ut2)
            .map(|(a, b)| (4.0 * a - b) / (2.0 * dt))
            .collect();
        let p_star = self.extrapolated_pressure(state);
        let guess: Vec<f64> = ut1.iter().zip(ut2).map(|(a, b)| 2.0 * a - b).collect();
        let frozen: Vec<f64> = state.u[0]
            .iter()
            .zip(&state.u[1])
            .map(|(a, b)| 2.0 * a - b)
            .collect();
        let mom =
            self.convection_diffusion_step(1.5 / dt, &history, &p_star, t, &guess, &frozen)?;
        let proj = self.projection_step(&mom.velocity, &state.p[0], 2.0 * dt / 3.0)?;
        Ok(self.finish(state, mom, proj, t))
    }

    /// Pressure entering the momentum step of the eliminated form.
    pub fn extrapolated_pressure(&self, state: &TimeState) -> Vec<f64> {
        let p = &state.p;
        match (self.config.variant, state.step) {
            (_, 0) => p[0].clone(),
            (SchemeVariant::Incremental, 1) => {
                p[0].iter().zip(&p[1]).map(|(a, b)| 2.0 * a - b).collect()
            }
            (SchemeVariant::Incremental, _) => pressure_extrapolation(&p[0], &p[1], &p[2]),
            (SchemeVariant::Rotational { .. }, 1) => {
                p[0].iter().zip(&state.phi[0]).map(|(a, f)| a + f).collect()
            }
            (SchemeVariant::Rotational { .. }, _) => p[0]
                .iter()
                .zip(&state.phi[0])
                .zip(&state.phi[1])
                .map(|((a, f1), f2)| a + (4.0 * f1 - f2) / 3.0)
                .collect(),
        }
    }

    fn finish(
        &self,
        state: &mut TimeState,
        mom: MomentumSolve,
        proj: Projection,
        t: f64,
    ) -> StepRecord {
        let divergence = self.divergence_norm(&mom.velocity);
        let kinetic_energy = self.kinetic_energy(&proj.velocity);
        let iterations = mom.iterations + proj.iterations;
        state.push(mom.velocity, proj, t);
        StepRecord {
            step: state.step,
            time: t,
            picard_sweeps: mom.sweeps,
            solver_iterations: iterations,
            divergence,
            kinetic_energy,
        }
    }

    /// Advances by one step, using BDF1 for the very first one.
    pub fn advance(&self, state: &mut TimeState) -> Result<StepRecord> {
        if state.step == 0 {
            self.bdf1_startup(state)
        } else {
            self.bdf2_step(state)
        }
    }

    /// Runs all steps of the configured interval, calling `observe` after each.
    pub fn run(
        &self,
        state: &mut TimeState,
        mut observe: impl FnMut(&TimeState, &StepRecord),
    ) -> Result<Vec<StepRecord>> {
        let n = self.config.num_steps();
        let mut log = Vec::with_capacity(n);
        while state.step < n {
            let rec = self.advance(state)?;
            observe(state, &rec);
            log.push(rec);
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::TauRule;
    use crate::mesh::{BoundaryKind, Mesh};

    #[test]
    fn bdf_derivative_is_exact_on_quadratics() {
        let dt = 0.1;
        let f = |t: f64| vec![t * t, 3.0 * t - 1.0];
        let d = bdf_time_derivative(&f(1.0), &f(0.9), &f(0.8), dt);
        assert!((d[0] - 2.0).abs() < 1e-12);
        assert!((d[1] - 3.0).abs() < 1e-12);
        let c = bdf_time_derivative(&[2.0], &[2.0], &[2.0], dt);
        assert_eq!(c, vec![0.0]);
    }

    #[test]
    fn pressure_extrapolation_weights() {
        assert_eq!(
            pressure_extrapolation(&[1.0], &[0.0], &[0.0]),
            vec![7.0 / 3.0]
        );
        assert_eq!(
            pressure_extrapolation(&[0.0], &[1.0], &[0.0]),
            vec![-5.0 / 3.0]
        );
        assert_eq!(
            pressure_extrapolation(&[0.0], &[0.0], &[1.0]),
            vec![1.0 / 3.0]
        );
        let p = pressure_extrapolation(&[4.0], &[3.0], &[2.0]);
        assert!((p[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::new(0.1, 0.0, 1.0).is_ok());
        assert!(SchemeConfig::new(0.3, 0.0, 1.0).is_err());
        assert!(SchemeConfig::new(-0.1, 0.0, 1.0).is_err());
        assert!(SchemeConfig::new(0.1, 1.0, 1.0).is_err());
        let c = SchemeConfig::new(0.1, 0.0, 1.0)
            .unwrap()
            .with_variant(SchemeVariant::Rotational { chi: -1.0 });
        assert!(c.validate().is_err());
        assert_eq!(SchemeConfig::new(0.1, 0.0, 1.0).unwrap().num_steps(), 10);
    }

    fn small(kind: BoundaryKind, config: SchemeConfig) -> Stepper {
        let mesh = Mesh::new([0.0, 0.0], [1.0, 1.0], [3, 3], kind).unwrap();
        let space = TaylorHoodSpace::new(mesh);
        Stepper::new(
            space,
            CoarseDegree::Q1Discontinuous,
            0.1,
            StabilizationParams::new(1.0, TauRule::SuHalf).unwrap(),
            config,
        )
        .unwrap()
    }

    #[test]
    fn zero_problem_stays_zero() {
        let s = small(
            BoundaryKind::Dirichlet,
            SchemeConfig::new(0.1, 0.0, 0.4).unwrap(),
        );
        let mut st = TimeState::new(
            vec![0.0; s.space().num_velocity_dofs()],
            vec![0.0; s.space().num_pressure_dofs()],
            0.0,
        );
        let log = s.run(&mut st, |_, _| {}).unwrap();
        assert_eq!(log.len(), 4);
        assert!(st.u.iter().flatten().all(|v| *v == 0.0));
        assert!(st.p.iter().flatten().all(|v| *v == 0.0));
        assert!(log.iter().all(|r| r.kinetic_energy == 0.0));
    }

    #[test]
    fn projection_makes_divergence_free_and_contracts() {
        let s = small(
            BoundaryKind::Dirichlet,
            SchemeConfig::new(0.1, 0.0, 1.0).unwrap(),
        );
        let mask = s.space().dirichlet_dof_mask();
        let ut: Vec<f64> = (0..mask.len())
            .map(|i| if mask[i] { 0.0 } else { (1.7 * i as f64).sin() })
            .collect();
        let p0 = vec![0.0; s.space().num_pressure_dofs()];
        let proj = s.projection_step(&ut, &p0, 0.1).unwrap();
        let before = s.discrete_divergence(&ut);
        let after = s.discrete_divergence(&proj.velocity);
        assert!(after <= 1e-8 * before, "{after} vs {before}");
        assert!(s.kinetic_energy(&proj.velocity) <= s.kinetic_energy(&ut) * (1.0 + 1e-8));
        assert!(s.pressure_mean(&proj.pressure).abs() < 1e-12);
        // a divergence-free field is left alone
        let again = s.projection_step(&proj.velocity, &p0, 0.1).unwrap();
        let diff = proj
            .velocity
            .iter()
            .zip(&again.velocity)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10);
        assert!(again.pressure.iter().all(|p| p.abs() < 1e-8));
    }

    #[test]
    fn history_rotates() {
        let mut st = TimeState::new(vec![0.0; 2], vec![0.0; 1], 0.0);
        for k in 1..=4 {
            let proj = Projection {
                velocity: vec![k as f64; 2],
                pressure: vec![k as f64],
                increment: vec![1.0],
                iterations: 0,
            };
            st.push(vec![k as f64; 2], proj, k as f64);
        }
        assert_eq!(st.p[0], vec![4.0]);
        assert_eq!(st.p[3], vec![1.0]);
        assert_eq!(st.u[2], vec![2.0; 2]);
        assert_eq!(st.u_tilde[1], vec![3.0; 2]);
        assert_eq!(st.step, 4);
    }

    #[test]
    fn linear_step_takes_one_sweep() {
        let mut cfg = SchemeConfig::new(0.1, 0.0, 0.2).unwrap();
        cfg.convection = false;
        let s = small(BoundaryKind::Dirichlet, cfg)
            .with_forcing(Box::new(|x, y, _| [x * y, 1.0 - x]))
            .with_boundary(Box::new(|x, _, t| [t * x, 0.0]));
        let mut st = TimeState::new(
            vec![0.0; s.space().num_velocity_dofs()],
            vec![0.0; s.space().num_pressure_dofs()],
            0.0,
        );
        let log = s.run(&mut st, |_, _| {}).unwrap();
        assert!(log.iter().all(|r| r.picard_sweeps == 1));
    }
}
