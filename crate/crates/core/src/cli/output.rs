//! CSV tables, gnuplot scripts and legacy VTK snapshots.

use crate::error::{Error, Result};
use crate::fespace::TaylorHoodSpace;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Full-precision scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rectangular table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} fields, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Log-log plot of a `k,E` table with a `k^{-5/3}` guide anchored at the
/// first shell with energy.
pub fn spectrum_gnuplot(csv_name: &str, png_name: &str, anchor: Option<(f64, f64)>) -> String {
    let (k0, e0) = anchor.unwrap_or((1.0, 1.0));
    let mut s = String::new();
    let _ = writeln!(s, "set terminal pngcairo size 800,600");
    let _ = writeln!(s, "set output '{png_name}'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'k'");
    let _ = writeln!(s, "set ylabel 'E(k)'");
    let _ = writeln!(s, "set key top right");
    let _ = writeln!(
        s,
        "ref(k) = {} * (k / {})**(-5.0/3.0)",
        fmt_f64(e0),
        fmt_f64(k0)
    );
    let _ = writeln!(
        s,
        "plot '{csv_name}' every ::1 using 1:($2 > 0 ? $2 : 1/0) with linespoints title 'E(k)', \\"
    );
    let _ = writeln!(s, "     ref(x) with lines dashtype 2 title 'k^{{-5/3}}'");
    s
}

/// Velocity and pressure sampled on the Q2 node lattice, closed on periodic
/// meshes, as legacy ASCII structured points.
pub fn vtk_snapshot(space: &TaylorHoodSpace, u: &[f64], p: &[f64], time: f64) -> String {
    let mesh = space.mesh();
    let [nx, ny] = mesh.cells_per_axis();
    let o = mesh.origin();
    let e = mesh.extent();
    let (px, py) = (2 * nx + 1, 2 * ny + 1);
    let (hx, hy) = (e[0] / (px - 1) as f64, e[1] / (py - 1) as f64);
    let mut vel = String::new();
    let mut pre = String::new();
    for j in 0..py {
        for i in 0..px {
            let x = [o[0] + i as f64 * hx, o[1] + j as f64 * hy];
            let v = space.eval_velocity(u, x);
            let _ = writeln!(vel, "{} {} 0", fmt_f64(v[0]), fmt_f64(v[1]));
            let _ = writeln!(pre, "{}", fmt_f64(space.eval_pressure(p, x)));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "lpsflow t={}", fmt_f64(time));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {px} {py} 1");
    let _ = writeln!(s, "ORIGIN {} {} 0", fmt_f64(o[0]), fmt_f64(o[1]));
    let _ = writeln!(s, "SPACING {} {} 1", fmt_f64(hx), fmt_f64(hy));
    let _ = writeln!(s, "POINT_DATA {}", px * py);
    let _ = writeln!(s, "VECTORS u double");
    s.push_str(&vel);
    let _ = writeln!(s, "SCALARS p double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    s.push_str(&pre);
    s
}

/// Joins `name` to `dir`, refusing names that would leave it.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf> {
    let p = Path::new(name);
    if p.components().count() != 1
        || !matches!(p.components().next(), Some(std::path::Component::Normal(_)))
    {
        return Err(Error::InvalidArgument(format!(
            "bad output file name '{name}'"
        )));
    }
    Ok(dir.join(p))
}
