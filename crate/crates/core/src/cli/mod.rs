//! Batch front end: convergence ladders, single runs and spectrum jobs.

mod config;
mod output;

pub use config::{CaseKind, RunConfig, SchemeKind};
pub use output::{fmt_f64, output_path, spectrum_gnuplot, vtk_snapshot, CsvTable};

use crate::analysis::{energy_spectrum, sample_velocity_grid, ErrorReport, LevelErrors};
use crate::cases::{tgv_exact_energy, tgv_initial, MmsCase, RunOutcome, RunSetup};
use crate::error::{Error, Result};
use crate::fespace::TaylorHoodSpace;
use crate::stepper::{StepRecord, TimeState};
use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "lpsflow",
    version,
    about = "Projection-scheme Navier-Stokes experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refinement ladder in space or time with an error/EOC table.
    Converge(Overrides),
    /// One simulation with a per-step log and optional VTK snapshots.
    Run(Overrides),
    /// Energy spectrum of a periodic run at its final time.
    Spectrum(Overrides),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Flat `key = value` file applied before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub re: Option<f64>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tend: Option<f64>,
    /// Comma separated cell counts.
    #[arg(long)]
    pub space_levels: Option<String>,
    /// Comma separated step sizes.
    #[arg(long)]
    pub time_levels: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub vtk: bool,
    /// Any other config key, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags: [(&str, Option<String>); 11] = [
            ("case", self.case.clone()),
            ("re", self.re.map(|v| v.to_string())),
            ("scheme", self.scheme.clone()),
            ("chi", self.chi.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("tau", self.tau.clone()),
            ("cells", self.cells.map(|v| v.to_string())),
            ("dt", self.dt.map(|v| v.to_string())),
            ("tend", self.tend.map(|v| v.to_string())),
            ("space_levels", self.space_levels.clone()),
            ("time_levels", self.time_levels.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if self.vtk {
            cfg.emit_vtk = true;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got '{kv}'")))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Process exit code for an error: 1 for configuration problems, 2 for
/// solver failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SolverFailure(_) | Error::PicardFailure { .. } | Error::SingularLocalMatrix(_) => 2,
        _ => 1,
    }
}

/// Files written by a command.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn execute<I, T>(args: I) -> Result<Written>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    dispatch(&cli)
}

pub fn dispatch(cli: &Cli) -> Result<Written> {
    match &cli.command {
        Command::Converge(o) => cmd_converge(&o.resolve()?),
        Command::Run(o) => cmd_run(&o.resolve()?),
        Command::Spectrum(o) => cmd_spectrum(&o.resolve()?),
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    Ok(())
}

fn run_case(
    cfg: &RunConfig,
    setup: &RunSetup,
    extra: impl FnMut(&TimeState, &StepRecord),
) -> Result<RunOutcome> {
    match cfg.case {
        CaseKind::Mms => MmsCase { nu: cfg.nu() }.run_observed(setup, extra),
        CaseKind::Tgv2d => cfg.tgv().run_observed(setup, extra),
    }
}

fn with_threads<T: Send>(cfg: &RunConfig, job: impl FnOnce() -> T + Send) -> Result<T> {
    if cfg.threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(job))
}

/// Error table of a ladder: `h, dt`, the five norms and, with more than one
/// level, their EOCs against the previous level.
pub fn convergence_table(levels: &[LevelErrors]) -> Result<CsvTable> {
    let names = LevelErrors::NORM_NAMES;
    let with_eoc = levels.len() > 1;
    let mut header = vec!["h".to_string(), "dt".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    if with_eoc {
        header.extend(names.iter().map(|n| format!("eoc_{n}")));
    }
    let mut table = CsvTable::new(header);
    let report = ErrorReport::new(levels.to_vec());
    let eocs = if with_eoc {
        report.eoc_table()
    } else {
        vec![None; levels.len()]
    };
    for (l, e) in levels.iter().zip(eocs) {
        let mut row = vec![fmt_f64(l.h), fmt_f64(l.dt)];
        row.extend(l.norms().iter().map(|v| fmt_f64(*v)));
        if with_eoc {
            match e {
                Some(e) => row.extend(e.iter().map(|v| fmt_f64(*v))),
                None => row.extend(std::iter::repeat_n(String::new(), names.len())),
            }
        }
        table.push(row)?;
    }
    Ok(table)
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<Written> {
    let ladder = cfg.ladder()?;
    prepare_out(cfg)?;
    let setups = ladder
        .iter()
        .map(|&(c, dt)| cfg.setup(c, dt))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<LevelErrors>> = with_threads(cfg, || {
        setups
            .par_iter()
            .map(|s| {
                info!("level cells = {}, dt = {}", s.cells, s.dt);
                run_case(cfg, s, |_, _| {}).map(|o| o.errors)
            })
            .collect()
    })?;
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;
    let table = convergence_table(&levels)?;
    let path = output_path(&cfg.out, "convergence.csv")?;
    table.write(&path)?;
    info!("wrote {}", path.display());
    Ok(Written { files: vec![path] })
}

fn step_row(r: &StepRecord) -> Vec<String> {
    vec![
        r.step.to_string(),
        fmt_f64(r.time),
        r.picard_sweeps.to_string(),
        r.solver_iterations.to_string(),
        fmt_f64(r.divergence),
        fmt_f64(r.kinetic_energy),
    ]
}

pub fn cmd_run(cfg: &RunConfig) -> Result<Written> {
    prepare_out(cfg)?;
    let setup = cfg.setup(cfg.cells, cfg.dt)?;
    let mut written = Written::default();
    let outcome = if cfg.emit_vtk {
        let space = TaylorHoodSpace::new(match cfg.case {
            CaseKind::Mms => MmsCase { nu: cfg.nu() }.mesh(cfg.cells)?,
            CaseKind::Tgv2d => cfg.tgv().mesh(cfg.cells)?,
        });
        let mut io_error = None;
        let mut files = Vec::new();
        let out = run_case(cfg, &setup, |st, rec| {
            if rec.step % cfg.vtk_stride != 0 || io_error.is_some() {
                return;
            }
            let res = output_path(&cfg.out, &format!("fields_{:06}.vtk", rec.step)).and_then(|p| {
                std::fs::write(
                    &p,
                    vtk_snapshot(&space, st.velocity(), st.pressure(), st.time),
                )?;
                Ok(p)
            });
            match res {
                Ok(p) => files.push(p),
                Err(e) => io_error = Some(e),
            }
        })?;
        if let Some(e) = io_error {
            return Err(e);
        }
        written.files.extend(files);
        out
    } else {
        run_case(cfg, &setup, |_, _| {})?
    };
    let mut log = CsvTable::new(StepRecord::CSV_HEADER.split(','));
    for r in &outcome.log {
        log.push(step_row(r))?;
    }
    let path = output_path(&cfg.out, "run.csv")?;
    log.write(&path)?;
    written.files.insert(0, path);
    let errors = convergence_table(std::slice::from_ref(&outcome.errors))?;
    let path = output_path(&cfg.out, "errors.csv")?;
    errors.write(&path)?;
    written.files.insert(1, path);
    Ok(written)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Written> {
    if cfg.case != CaseKind::Tgv2d {
        return Err(Error::Config(
            "spectrum needs a periodic case (case = tgv2d)".into(),
        ));
    }
    prepare_out(cfg)?;
    let tgv = cfg.tgv();
    let setup = cfg.setup(cfg.cells, cfg.dt)?;
    let m = tgv.spectrum_grid;
    let (ux, uy, time, energy) = if cfg.t_end > cfg.t0 {
        let stepper = tgv.stepper(&setup)?;
        let mut state = tgv.initial_state(&stepper, cfg.t0)?;
        stepper.run(&mut state, |_, _| {})?;
        let (ux, uy) = sample_velocity_grid(stepper.space(), state.velocity(), m);
        let ke = stepper.kinetic_energy(state.velocity());
        (ux, uy, state.time, ke)
    } else {
        let space = TaylorHoodSpace::new(tgv.mesh(cfg.cells)?);
        let u = space.interpolate_velocity(|x, y| tgv_initial(x, y, tgv.a, tgv.b).0);
        let (ux, uy) = sample_velocity_grid(&space, &u, m);
        let ke = tgv_exact_energy(cfg.t0, tgv.nu, tgv.a, tgv.b);
        (ux, uy, cfg.t0, ke)
    };
    let spec = energy_spectrum(&ux, &uy, m, tgv.a)?;
    info!(
        "t = {time}: shell sum {:.12e}, sampled energy {:.12e}, finite element energy {:.12e}",
        spec.shell_sum(),
        spec.total_energy,
        energy
    );
    let mut table = CsvTable::new(["k", "E"]);
    for (k, e) in spec.shells() {
        table.push(vec![k.to_string(), fmt_f64(e)])?;
    }
    let csv = output_path(&cfg.out, "spectrum.csv")?;
    table.write(&csv)?;
    let anchor = spec
        .shells()
        .find(|&(k, e)| k > 0 && e > 0.0)
        .map(|(k, e)| (k as f64, e));
    let gp = output_path(&cfg.out, "spectrum.gp")?;
    std::fs::write(
        &gp,
        spectrum_gnuplot("spectrum.csv", "spectrum.png", anchor),
    )?;
    Ok(Written {
        files: vec![csv, gp],
    })
}
