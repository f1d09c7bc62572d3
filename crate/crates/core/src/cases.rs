//! Test problems: a manufactured solution on `[-1, 1]^2` and the periodic
//! two-dimensional Taylor-Green vortex, with drivers that run them.

use crate::analysis::{
    pressure_l2_error, velocity_errors, velocity_l2_error, ErrorAccumulator, LevelErrors,
};
use crate::assembly::StabilizationParams;
use crate::error::Result;
use crate::fespace::{CoarseDegree, CoarseProjectionSpace, TaylorHoodSpace};
use crate::mesh::{BoundaryKind, Mesh};
use crate::stepper::{
    PicardConfig, SchemeConfig, SchemeVariant, SolverTolerances, StepRecord, Stepper, TimeState,
};
use crate::stokes_projector::{stokes_project, VelocityWithGradient};
use std::f64::consts::PI;

pub const MMS_ORIGIN: [f64; 2] = [-1.0, -1.0];
pub const MMS_EXTENT: [f64; 2] = [2.0, 2.0];

/// Velocity of the manufactured solution with its gradient.
///
/// `u = (sin(1-x) sin(y+t), -cos(1-x) cos(y+t))`, which is solenoidal.
pub fn mms_velocity(x: f64, y: f64, t: f64) -> VelocityWithGradient {
    let (s, c) = (1.0 - x).sin_cos();
    let (ss, cc) = (y + t).sin_cos();
    ([s * ss, -c * cc], [[-c * ss, s * cc], [-s * cc, c * ss]])
}

/// `-cos(1-x) sin(y+t)` before removing its mean.
pub fn mms_pressure_raw(x: f64, y: f64, t: f64) -> f64 {
    -(1.0 - x).cos() * (y + t).sin()
}

/// Mean of the raw pressure over `[-1, 1]^2`.
pub fn mms_pressure_mean(t: f64) -> f64 {
    -0.5 * 2f64.sin() * 1f64.sin() * t.sin()
}

/// Exact velocity and zero-mean pressure.
pub fn mms_exact(x: f64, y: f64, t: f64) -> ([f64; 2], f64) {
    (
        mms_velocity(x, y, t).0,
        mms_pressure_raw(x, y, t) - mms_pressure_mean(t),
    )
}

/// `f = u_t - nu lap u + (u.grad) u + grad p` for the manufactured pair.
pub fn mms_forcing(x: f64, y: f64, t: f64, nu: f64) -> [f64; 2] {
    let (s, c) = (1.0 - x).sin_cos();
    let (ss, cc) = (y + t).sin_cos();
    [
        s * cc + 2.0 * nu * s * ss - s * c - s * ss,
        c * ss - 2.0 * nu * c * cc - ss * cc - c * cc,
    ]
}

pub fn mms_boundary(x: f64, y: f64, t: f64) -> [f64; 2] {
    mms_velocity(x, y, t).0
}

/// 2D Taylor-Green vortex in `[0, a]^2` with amplitude `b`:
/// `u = b (cos kx sin ky, -sin kx cos ky) e^{-2 nu k^2 t}`,
/// `p = -(b^2/4)(cos 2kx + cos 2ky) e^{-4 nu k^2 t}`, `k = 2 pi / a`.
pub fn tgv_exact(x: f64, y: f64, t: f64, nu: f64, a: f64, b: f64) -> (VelocityWithGradient, f64) {
    let k = 2.0 * PI / a;
    let decay = (-2.0 * nu * k * k * t).exp();
    let (sx, cx) = (k * x).sin_cos();
    let (sy, cy) = (k * y).sin_cos();
    let amp = b * decay;
    let u = [amp * cx * sy, -amp * sx * cy];
    let g = [
        [-amp * k * sx * sy, amp * k * cx * cy],
        [-amp * k * cx * cy, amp * k * sx * sy],
    ];
    let p = -0.25 * b * b * decay * decay * ((2.0 * k * x).cos() + (2.0 * k * y).cos());
    ((u, g), p)
}

pub fn tgv_initial(x: f64, y: f64, a: f64, b: f64) -> ([f64; 2], f64) {
    let ((u, _), p) = tgv_exact(x, y, 0.0, 0.0, a, b);
    (u, p)
}

/// `(b^2 a^2 / 4) exp(-16 pi^2 nu t / a^2)`.
pub fn tgv_exact_energy(t: f64, nu: f64, a: f64, b: f64) -> f64 {
    0.25 * b * b * a * a * (-16.0 * PI * PI * nu * t / (a * a)).exp()
}

/// Discretization and scheme settings shared by the drivers.
#[derive(Debug, Clone, Copy)]
pub struct RunSetup {
    pub cells: usize,
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    pub variant: SchemeVariant,
    pub params: StabilizationParams,
    pub coarse: CoarseDegree,
    pub picard: PicardConfig,
    pub solver: SolverTolerances,
    /// Gauss order used for error integrals.
    pub error_quadrature: usize,
}

impl RunSetup {
    pub fn new(cells: usize, dt: f64, t_end: f64) -> Self {
        Self {
            cells,
            dt,
            t0: 0.0,
            t_end,
            variant: SchemeVariant::Incremental,
            params: StabilizationParams::default(),
            coarse: CoarseDegree::default(),
            picard: PicardConfig::default(),
            solver: SolverTolerances::default(),
            error_quadrature: 6,
        }
    }

    fn scheme(&self) -> Result<SchemeConfig> {
        let mut cfg = SchemeConfig::new(self.dt, self.t0, self.t_end)?.with_variant(self.variant);
        cfg.picard = self.picard;
        cfg.solver = self.solver;
        Ok(cfg)
    }
}

/// Manufactured-solution problem at a given viscosity.
#[derive(Debug, Clone, Copy)]
pub struct MmsCase {
    pub nu: f64,
}

/// Outcome of one run with known exact solution.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub errors: LevelErrors,
    pub log: Vec<StepRecord>,
    pub state: TimeState,
}

impl MmsCase {
    pub fn from_reynolds(re: f64) -> Self {
        Self { nu: 1.0 / re }
    }

    pub fn mesh(&self, cells: usize) -> Result<Mesh> {
        Mesh::new(
            MMS_ORIGIN,
            MMS_EXTENT,
            [cells, cells],
            BoundaryKind::Dirichlet,
        )
    }

    pub fn stepper(&self, setup: &RunSetup) -> Result<Stepper> {
        let space = TaylorHoodSpace::new(self.mesh(setup.cells)?);
        let nu = self.nu;
        Ok(
            Stepper::new(space, setup.coarse, nu, setup.params, setup.scheme()?)?
                .with_forcing(Box::new(move |x, y, t| mms_forcing(x, y, t, nu)))
                .with_boundary(Box::new(mms_boundary)),
        )
    }

    /// Initial data from the Stokes projection of the exact pair at `t0`.
    pub fn initial_state(&self, stepper: &Stepper, t0: f64) -> Result<TimeState> {
        let proj = stokes_project(
            stepper.space(),
            stepper.params().gamma,
            self.nu,
            |x, y| mms_velocity(x, y, t0),
            |x, y| mms_exact(x, y, t0).1,
        )?;
        Ok(TimeState::new(proj.velocity, proj.pressure, t0))
    }

    /// Runs the scheme and accumulates errors over all steps: the L2 velocity
    /// error of the projected `u^n`, the other velocity norms of `u~^n` and the
    /// pressure error of `p^n`.
    pub fn run(&self, setup: &RunSetup) -> Result<RunOutcome> {
        self.run_observed(setup, |_, _| {})
    }

    /// As [`Self::run`], additionally calling `extra` after every step.
    pub fn run_observed(
        &self,
        setup: &RunSetup,
        mut extra: impl FnMut(&TimeState, &StepRecord),
    ) -> Result<RunOutcome> {
        let stepper = self.stepper(setup)?;
        let mut state = self.initial_state(&stepper, setup.t0)?;
        let space = stepper.space();
        let tab = space.tabulate(setup.error_quadrature);
        let coarse = CoarseProjectionSpace::new(setup.coarse, &tab)?;
        let mut acc = ErrorAccumulator::default();
        let nu = self.nu;
        let log = stepper.run(&mut state, |st, rec| {
            let t = st.time;
            let ut = st.tentative_velocity();
            let mut ve =
                velocity_errors(space, &tab, &coarse, &setup.params, nu, ut, ut, |x, y| {
                    mms_velocity(x, y, t)
                });
            ve.l2 = velocity_l2_error(space, &tab, st.velocity(), |x, y| mms_velocity(x, y, t).0);
            let pe =
                pressure_l2_error(space, &tab, st.pressure(), |x, y| mms_pressure_raw(x, y, t));
            acc.push(ve, pe);
            extra(st, rec);
        })?;
        Ok(RunOutcome {
            errors: acc.finish(space.mesh().h(), setup.dt),
            log,
            state,
        })
    }
}

/// Periodic Taylor-Green problem.
#[derive(Debug, Clone, Copy)]
pub struct TgvCase {
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    /// Spectrum sampling points per direction.
    pub spectrum_grid: usize,
}

impl Default for TgvCase {
    fn default() -> Self {
        Self {
            a: 2.0 * PI,
            b: 1.0,
            nu: 1e-3,
            spectrum_grid: 64,
        }
    }
}

impl TgvCase {
    pub fn end_time(&self) -> f64 {
        10.0 / self.b
    }

    pub fn mesh(&self, cells: usize) -> Result<Mesh> {
        Mesh::new(
            [0.0, 0.0],
            [self.a, self.a],
            [cells, cells],
            BoundaryKind::Periodic,
        )
    }

    pub fn stepper(&self, setup: &RunSetup) -> Result<Stepper> {
        let space = TaylorHoodSpace::new(self.mesh(setup.cells)?);
        Stepper::new(space, setup.coarse, self.nu, setup.params, setup.scheme()?)
    }

    pub fn initial_state(&self, stepper: &Stepper, t0: f64) -> Result<TimeState> {
        let (a, b, nu) = (self.a, self.b, self.nu);
        let proj = stokes_project(
            stepper.space(),
            stepper.params().gamma,
            nu,
            |x, y| tgv_exact(x, y, t0, nu, a, b).0,
            |x, y| tgv_exact(x, y, t0, nu, a, b).1,
        )?;
        Ok(TimeState::new(proj.velocity, proj.pressure, t0))
    }

    pub fn run(&self, setup: &RunSetup) -> Result<RunOutcome> {
        self.run_observed(setup, |_, _| {})
    }

    /// As [`Self::run`], additionally calling `extra` after every step.
    pub fn run_observed(
        &self,
        setup: &RunSetup,
        mut extra: impl FnMut(&TimeState, &StepRecord),
    ) -> Result<RunOutcome> {
        let stepper = self.stepper(setup)?;
        let mut state = self.initial_state(&stepper, setup.t0)?;
        let space = stepper.space();
        let tab = space.tabulate(setup.error_quadrature);
        let coarse = CoarseProjectionSpace::new(setup.coarse, &tab)?;
        let mut acc = ErrorAccumulator::default();
        let (a, b, nu) = (self.a, self.b, self.nu);
        let log = stepper.run(&mut state, |st, rec| {
            let t = st.time;
            let ut = st.tentative_velocity();
            let exact = |x: f64, y: f64| tgv_exact(x, y, t, nu, a, b);
            let mut ve =
                velocity_errors(space, &tab, &coarse, &setup.params, nu, ut, ut, |x, y| {
                    exact(x, y).0
                });
            ve.l2 = velocity_l2_error(space, &tab, st.velocity(), |x, y| exact(x, y).0 .0);
            let pe = pressure_l2_error(space, &tab, st.pressure(), |x, y| exact(x, y).1);
            acc.push(ve, pe);
            extra(st, rec);
        })?;
        Ok(RunOutcome {
            errors: acc.finish(space.mesh().h(), setup.dt),
            log,
            state,
        })
    }
}
