//! Flat `key = value` run configuration.

use crate::assembly::{StabilizationParams, TauRule};
use crate::cases::{RunSetup, TgvCase};
use crate::error::{Error, Result};
use crate::fespace::CoarseDegree;
use crate::stepper::{PicardConfig, PicardMode, SchemeVariant, SolverTolerances};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Mms,
    Tgv2d,
}

impl FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mms" => Ok(CaseKind::Mms),
            "tgv2d" | "tgv" => Ok(CaseKind::Tgv2d),
            _ => Err(Error::Config(format!("unknown case '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Incremental,
    Rotational,
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incremental" => Ok(SchemeKind::Incremental),
            "rotational" => Ok(SchemeKind::Rotational),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

/// Everything a batch job needs. Unset viscosity falls back to the case
/// default (`1` for mms, `1e-3` for tgv2d).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseKind,
    pub nu: Option<f64>,
    pub scheme: SchemeKind,
    pub chi: f64,
    pub gamma: f64,
    pub tau: TauRule,
    pub coarse: CoarseDegree,
    pub cells: usize,
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    pub space_levels: Vec<usize>,
    pub time_levels: Vec<f64>,
    pub out: PathBuf,
    pub emit_vtk: bool,
    pub vtk_stride: usize,
    pub picard: PicardConfig,
    pub solver: SolverTolerances,
    pub tgv_a: f64,
    pub tgv_b: f64,
    pub spectrum_grid: usize,
    /// Worker threads for ladders; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tgv = TgvCase::default();
        Self {
            case: CaseKind::Mms,
            nu: None,
            scheme: SchemeKind::Incremental,
            chi: 1.0,
            gamma: 1.0,
            tau: TauRule::SuHalf,
            coarse: CoarseDegree::default(),
            cells: 8,
            dt: 1e-3,
            t0: 0.0,
            t_end: 1.0,
            space_levels: Vec::new(),
            time_levels: Vec::new(),
            out: PathBuf::from("out"),
            emit_vtk: false,
            vtk_stride: 100,
            picard: PicardConfig::default(),
            solver: SolverTolerances::default(),
            tgv_a: tgv.a,
            tgv_b: tgv.b,
            spectrum_grid: tgv.spectrum_grid,
            threads: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "bad boolean '{value}' for key '{key}'"
        ))),
    }
}

impl RunConfig {
    /// Applies one setting. Keys accept `-` and `_` interchangeably.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "case" => self.case = value.parse()?,
            "re" => {
                let re: f64 = parse(k, value)?;
                if !(re > 0.0) {
                    return Err(Error::Config(format!("re must be positive, got {re}")));
                }
                self.nu = Some(1.0 / re);
            }
            "nu" => self.nu = Some(parse(k, value)?),
            "scheme" => self.scheme = value.parse()?,
            "chi" => self.chi = parse(k, value)?,
            "gamma" => self.gamma = parse(k, value)?,
            "tau" => self.tau = value.parse()?,
            "coarse" => {
                self.coarse = match value {
                    "p0" => CoarseDegree::P0,
                    "q1disc" | "q1_discontinuous" => CoarseDegree::Q1Discontinuous,
                    _ => return Err(Error::Config(format!("unknown coarse space '{value}'"))),
                }
            }
            "cells" => self.cells = parse(k, value)?,
            "dt" => self.dt = parse(k, value)?,
            "t0" => self.t0 = parse(k, value)?,
            "tend" | "t_end" | "t" => self.t_end = parse(k, value)?,
            "space_levels" => self.space_levels = parse_list(k, value)?,
            "time_levels" => self.time_levels = parse_list(k, value)?,
            "out" => self.out = PathBuf::from(value),
            "vtk" | "emit_vtk" => self.emit_vtk = parse_bool(k, value)?,
            "vtk_stride" => self.vtk_stride = parse(k, value)?,
            "picard_mode" => {
                self.picard.mode = match value {
                    "fixed_point" | "picard" => PicardMode::FixedPoint,
                    "extrapolated" => PicardMode::Extrapolated,
                    _ => return Err(Error::Config(format!("unknown picard mode '{value}'"))),
                }
            }
            "picard_max_sweeps" => self.picard.max_sweeps = parse(k, value)?,
            "picard_tol" => self.picard.tol = parse(k, value)?,
            "momentum_tol" => self.solver.momentum = parse(k, value)?,
            "projection_tol" => self.solver.projection = parse(k, value)?,
            "max_iter" => self.solver.max_iter = parse(k, value)?,
            "tgv_a" => self.tgv_a = parse(k, value)?,
            "tgv_b" => self.tgv_b = parse(k, value)?,
            "spectrum_grid" => self.spectrum_grid = parse(k, value)?,
            "threads" => self.threads = parse(k, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.parse_str(&text)?;
        Ok(cfg)
    }

    pub fn nu(&self) -> f64 {
        self.nu.unwrap_or(match self.case {
            CaseKind::Mms => 1.0,
            CaseKind::Tgv2d => TgvCase::default().nu,
        })
    }

    pub fn variant(&self) -> SchemeVariant {
        match self.scheme {
            SchemeKind::Incremental => SchemeVariant::Incremental,
            SchemeKind::Rotational => SchemeVariant::Rotational { chi: self.chi },
        }
    }

    pub fn tgv(&self) -> TgvCase {
        TgvCase {
            a: self.tgv_a,
            b: self.tgv_b,
            nu: self.nu(),
            spectrum_grid: self.spectrum_grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("nu", self.nu()),
            ("dt", self.dt),
            ("tgv_a", self.tgv_a),
            ("picard_tol", self.picard.tol),
            ("momentum_tol", self.solver.momentum),
            ("projection_tol", self.solver.projection),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma >= 0.0) || !(self.chi >= 0.0) || !(self.tgv_b >= 0.0) {
            return Err(Error::Config(
                "gamma, chi and tgv_b must be non-negative".into(),
            ));
        }
        if self.cells == 0 || self.space_levels.contains(&0) {
            return Err(Error::Config("cell counts must be positive".into()));
        }
        if self.time_levels.iter().any(|dt| !(*dt > 0.0)) {
            return Err(Error::Config("time levels must be positive".into()));
        }
        if !(self.t_end >= self.t0) {
            return Err(Error::Config(format!(
                "tend = {} precedes t0 = {}",
                self.t_end, self.t0
            )));
        }
        if self.picard.max_sweeps == 0 || self.solver.max_iter == 0 || self.vtk_stride == 0 {
            return Err(Error::Config(
                "picard_max_sweeps, max_iter and vtk_stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Run setup for one level.
    pub fn setup(&self, cells: usize, dt: f64) -> Result<RunSetup> {
        let mut s = RunSetup::new(cells, dt, self.t_end);
        s.t0 = self.t0;
        s.variant = self.variant();
        s.params = StabilizationParams::new(self.gamma, self.tau)?;
        s.coarse = self.coarse;
        s.picard = self.picard;
        s.solver = self.solver;
        Ok(s)
    }

    /// `(cells, dt)` per level of a convergence job.
    pub fn ladder(&self) -> Result<Vec<(usize, f64)>> {
        let space = self.space_levels.len();
        let time = self.time_levels.len();
        if space > 1 && time > 1 {
            return Err(Error::Config(
                "only one of space_levels and time_levels may vary".into(),
            ));
        }
        let levels = if space > 1 || (space == 1 && time <= 1) {
            let dt = self.time_levels.first().copied().unwrap_or(self.dt);
            self.space_levels.iter().map(|&c| (c, dt)).collect()
        } else if time >= 1 {
            let cells = self.space_levels.first().copied().unwrap_or(self.cells);
            self.time_levels.iter().map(|&dt| (cells, dt)).collect()
        } else {
            vec![(self.cells, self.dt)]
        };
        Ok(levels)
    }
}
