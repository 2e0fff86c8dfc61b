//! Discrete Fourier transforms on periodic grids.
//!
//! Coefficients are normalized so that `Σ_k |c_k|² = |f|²_{L²}` with the grid
//! quadrature `h^d Σ |f_j|²`, and mode `k` has angular wavevector
//! `ξ_k = 2π k / L` with `k ∈ [-M/2, M/2)^d`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::field::Grid;

/// In-place d-dimensional FFT (unnormalized) of row-major data.
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan: Arc<dyn Fft<f64>> = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(m) {
                plan.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * m;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, z) in line.iter_mut().enumerate() {
                    *z = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, z) in line.iter().enumerate() {
                    data[base + j * stride] = *z;
                }
            }
        }
    }
}

/// Signed integer wavenumber of FFT bin `i` on `m` points, in `[-m/2, m/2)`.
pub fn wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// Parseval-normalized Fourier coefficients of a grid function.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(grid: &Grid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.len());
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut coeffs, grid.dim(), grid.points(), false);
        let norm = grid.length().powf(0.5 * grid.dim() as f64) / grid.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= norm);
        Self {
            grid: *grid,
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Zero-mode coefficient, `L^{d/2}` times the grid mean.
    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn wavevector(&self, flat: usize, out: &mut [f64]) {
        wavevector(&self.grid, flat, out)
    }

    /// Applies a real multiplier `m(ξ)` and transforms back to grid values.
    pub fn synthesize<F>(&self, multiplier: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut xi = vec![0.0; self.grid.dim()];
        let mut data: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(flat, c)| {
                wavevector(&self.grid, flat, &mut xi);
                c * multiplier(&xi)
            })
            .collect();
        fft_nd(&mut data, self.grid.dim(), self.grid.points(), true);
        let norm = 1.0 / self.grid.length().powf(0.5 * self.grid.dim() as f64);
        data.iter().map(|z| z.re * norm).collect()
    }
}

pub(crate) fn wavevector(grid: &Grid, flat: usize, out: &mut [f64]) {
    let m = grid.points();
    let scale = TAU / grid.length();
    let mut rest = flat;
    for axis in (0..grid.dim()).rev() {
        out[axis] = scale * wavenumber(rest % m, m) as f64;
        rest /= m;
    }
}

/// `|ξ|` for every flat index of the grid.
pub(crate) fn abs_wavevectors(grid: &Grid) -> Vec<f64> {
    let mut xi = vec![0.0; grid.dim()];
    (0..grid.len())
        .map(|flat| {
            wavevector(grid, flat, &mut xi);
            xi.iter().map(|k| k * k).sum::<f64>().sqrt()
        })
        .collect()
}
