//! Shell-binned kinetic energy spectra of periodic velocity fields.

use crate::error::{Error, Result};
use crate::fespace::TaylorHoodSpace;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Shell energies `E(k)` for `k = 0, 1, ...`.
    pub energy: Vec<f64>,
    /// `1/2 (a/m)^2 sum |u|^2` over the sampling grid.
    pub total_energy: f64,
    /// Grid points per direction.
    pub grid: usize,
    pub box_length: f64,
}

impl SpectrumReport {
    pub fn shells(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.energy.iter().copied().enumerate()
    }

    pub fn shell_sum(&self) -> f64 {
        self.energy.iter().sum()
    }
}

fn fft2(data: &mut [Complex<f64>], m: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(m);
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        fft.process(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
}

/// Energy spectrum of a velocity field sampled on an `m x m` periodic grid of
/// a box of side `a`; samples are row-major with index `j * m + i` for the
/// point `(i a/m, j a/m)`.
///
/// Wavenumber `k` (integer vector with entries in `[-m/2, m/2)`) contributes
/// `1/2 (a^2 / m^4) |U_k|^2` to shell `floor(|k| + 1/2)`, where `U` is the
/// unnormalized DFT, so that shell energies sum to `1/2 (a/m)^2 sum |u|^2`.
pub fn energy_spectrum(ux: &[f64], uy: &[f64], m: usize, a: f64) -> Result<SpectrumReport> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "sampling grid size {m} is not a power of two"
        )));
    }
    if ux.len() != m * m || uy.len() != m * m {
        return Err(Error::InvalidArgument(format!(
            "expected {} samples per component",
            m * m
        )));
    }
    let mut planner = FftPlanner::new();
    let kmax = ((m / 2) as f64 * std::f64::consts::SQRT_2 + 0.5).floor() as usize;
    let mut energy = vec![0.0; kmax + 1];
    let scale = 0.5 * a * a / (m as f64).powi(4);
    for comp in [ux, uy] {
        let mut data: Vec<Complex<f64>> = comp.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft2(&mut data, m, &mut planner);
        for j in 0..m {
            let ky = wavenumber(j, m);
            for i in 0..m {
                let kx = wavenumber(i, m);
                let shell = ((kx * kx + ky * ky).sqrt() + 0.5).floor() as usize;
                energy[shell] += scale * data[j * m + i].norm_sqr();
            }
        }
    }
    let total_energy =
        0.5 * (a / m as f64).powi(2) * ux.iter().chain(uy).map(|v| v * v).sum::<f64>();
    Ok(SpectrumReport {
        energy,
        total_energy,
        grid: m,
        box_length: a,
    })
}

/// Integer wavenumber of DFT index `i`, in `[-m/2, m/2)`.
fn wavenumber(i: usize, m: usize) -> f64 {
    if i < m / 2 {
        i as f64
    } else {
        i as f64 - m as f64
    }
}

/// Samples a velocity DOF vector at the `m x m` grid points `origin + (i, j) a/m`.
pub fn sample_velocity_grid(space: &TaylorHoodSpace, u: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let o = space.mesh().origin();
    let e = space.mesh().extent();
    let mut ux = Vec::with_capacity(m * m);
    let mut uy = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            let x = [
                o[0] + e[0] * i as f64 / m as f64,
                o[1] + e[1] * j as f64 / m as f64,
            ];
            let v = space.eval_velocity(u, x);
            ux.push(v[0]);
            uy.push(v[1]);
        }
    }
    (ux, uy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_grids() {
        assert!(energy_spectrum(&[0.0; 36], &[0.0; 36], 6, 1.0).is_err());
        assert!(energy_spectrum(&[0.0; 15], &[0.0; 16], 4, 1.0).is_err());
    }

    #[test]
    fn zero_field() {
        let r = energy_spectrum(&[0.0; 64], &[0.0; 64], 8, 2.0).unwrap();
        assert!(r.energy.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn single_mode_lands_in_shell_one() {
        let (m, a) = (16, 2.0 * PI);
        let ux: Vec<f64> = (0..m * m)
            .map(|k| (2.0 * PI * (k % m) as f64 / m as f64).sin())
            .collect();
        let r = energy_spectrum(&ux, &vec![0.0; m * m], m, a).unwrap();
        // grid kinetic energy of sin: 1/2 * (a/m)^2 * m^2 / 2 = a^2 / 4
        assert!((r.energy[1] - a * a / 4.0).abs() < 1e-12);
        assert!(r
            .energy
            .iter()
            .enumerate()
            .all(|(k, e)| k == 1 || e.abs() < 1e-20));
        assert!((r.shell_sum() - r.total_energy).abs() < 1e-12 * r.total_energy);
    }
}
