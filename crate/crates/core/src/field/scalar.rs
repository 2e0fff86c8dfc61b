use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Values outside a declared support box must be smaller than this.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Axis-aligned closed box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SupportBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension(format!(
                "support box corners have {} and {} coordinates",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidGeometry("support box has lo > hi".into()));
        }
        Ok(Self { lo, hi })
    }

    /// The whole fundamental cell of a grid.
    pub fn whole(grid: &Grid) -> Self {
        let half = 0.5 * grid.length();
        Self {
            lo: vec![-half; grid.dim()],
            hi: vec![half; grid.dim()],
        }
    }

    pub fn around(center: &[f64], half_width: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (a, b))| *xi >= a - tol && *xi <= b + tol)
    }

    /// True when the box fits inside `[-L/2, L/2]^d` of the grid.
    pub fn fits(&self, grid: &Grid) -> bool {
        let half = 0.5 * grid.length();
        self.lo.iter().all(|&a| a >= -half) && self.hi.iter().all(|&b| b <= half)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    pub fn translate(&self, shift: &[f64]) -> Self {
        Self {
            lo: self.lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(shift).map(|(b, s)| b + s).collect(),
        }
    }

    /// Image under `x -> center + lam * x`.
    pub fn scale_about(&self, lam: f64, center: &[f64]) -> Self {
        Self {
            lo: self.lo.iter().zip(center).map(|(a, c)| c + lam * a).collect(),
            hi: self.hi.iter().zip(center).map(|(b, c)| c + lam * b).collect(),
        }
    }
}

/// Real samples of a function on a periodic grid, with the box that carries
/// its support.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    support: SupportBox,
    mean: f64,
}

impl ScalarField {
    /// Checks the length and support discipline of `values`.
    pub fn new(grid: Grid, values: Vec<f64>, support: SupportBox) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if support.dim() != grid.dim() {
            return Err(Error::Dimension(format!(
                "support box is {}-dimensional on a {}-dimensional grid",
                support.dim(),
                grid.dim()
            )));
        }
        if !support.fits(&grid) {
            return Err(Error::InvalidGeometry(
                "support box leaves the fundamental cell".into(),
            ));
        }
        let mut x = vec![0.0; grid.dim()];
        let tol = 0.5 * grid.spacing() * 1e-9;
        for (flat, v) in values.iter().enumerate() {
            if v.abs() >= SUPPORT_TOL {
                grid.node(flat, &mut x);
                if !support.contains(&x, tol) {
                    return Err(Error::InvalidGeometry(format!(
                        "value {v:e} at {x:?} lies outside the declared support"
                    )));
                }
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self {
            grid,
            values,
            support,
            mean,
        })
    }

    /// Field with no declared support restriction.
    pub fn periodic(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let support = SupportBox::whole(&grid);
        Self::new(grid, values, support)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            support: SupportBox::whole(&grid),
            grid,
            mean: 0.0,
        }
    }

    /// Samples `f` at every node. Values outside `support` are forced to 0.
    pub fn from_fn<F>(grid: Grid, support: SupportBox, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let tol = 0.5 * grid.spacing() * 1e-9;
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; grid.dim()],
                |x, flat| {
                    grid.node(flat, x);
                    if support.contains(x, tol) {
                        f(x)
                    } else {
                        0.0
                    }
                },
            )
            .collect();
        Self::new(grid, values, support)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }

    /// Grid mean, recorded at construction.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, self.grid.cell_volume(), p)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Subtracts the grid mean. The result is supported on the whole cell.
    pub fn subtract_mean(&self) -> Self {
        let values = self.values.iter().map(|v| v - self.mean).collect::<Vec<_>>();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Self {
            grid: self.grid,
            values,
            support: SupportBox::whole(&self.grid),
            mean,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            support: self.support.clone(),
            mean: self.mean * factor,
        }
    }

    /// Pointwise sum; the support is the bounding box of both supports.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.grid, values, self.support.union(&other.support))
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Self::periodic(self.grid, values)
    }

    /// Cyclic shift by whole grid cells. The support box is dropped to the
    /// whole cell since a shifted box may wrap.
    pub fn roll(&self, shift: &[isize]) -> Self {
        let g = self.grid;
        let m = g.points() as isize;
        let mut values = vec![0.0; g.len()];
        let mut idx = vec![0usize; g.dim()];
        for (flat, v) in self.values.iter().enumerate() {
            g.unravel(flat, &mut idx);
            for (i, s) in idx.iter_mut().zip(shift) {
                *i = (*i as isize + s).rem_euclid(m) as usize;
            }
            values[g.ravel(&idx)] = *v;
        }
        Self {
            grid: g,
            values,
            support: SupportBox::whole(&g),
            mean: self.mean,
        }
    }
}

pub(crate) fn lp_norm(values: &[f64], cell: f64, p: f64) -> f64 {
    if p == 2.0 {
        return (cell * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    (cell * values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Relative L² size of the spectral divergence below which a field counts as
/// divergence-free.
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// A vector field sampled on a grid, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
    divergence_free: bool,
}

impl VectorField {
    /// When `divergence_free` is set the spectral divergence is checked.
    pub fn new(grid: Grid, components: Vec<Vec<f64>>, divergence_free: bool) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::Dimension(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Dimension("component length mismatch".into()));
        }
        let field = Self {
            grid,
            components,
            divergence_free: false,
        };
        if divergence_free {
            let rel = field.relative_divergence();
            if rel >= DIVERGENCE_TOL {
                return Err(Error::InvalidParameter(format!(
                    "field flagged divergence-free has relative divergence {rel:e}"
                )));
            }
        }
        Ok(Self {
            divergence_free,
            ..field
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    /// `|div u|_{L²} / |∇u|_{L²}`, computed spectrally; 0 for the zero field.
    pub fn relative_divergence(&self) -> f64 {
        let spectra: Vec<Spectrum> = self
            .components
            .iter()
            .map(|c| Spectrum::of(&self.grid, c))
            .collect();
        let mut div_sq = 0.0;
        let mut grad_sq = 0.0;
        let n = self.grid.len();
        let mut xi = vec![0.0; self.grid.dim()];
        for flat in 0..n {
            spectra[0].wavevector(flat, &mut xi);
            let mut d = num_complex::Complex64::new(0.0, 0.0);
            for (axis, s) in spectra.iter().enumerate() {
                let c = s.coeffs()[flat];
                d += c * xi[axis];
                grad_sq += c.norm_sqr() * xi.iter().map(|k| k * k).sum::<f64>();
            }
            div_sq += d.norm_sqr();
        }
        if grad_sq == 0.0 {
            0.0
        } else {
            (div_sq / grad_sq).sqrt()
        }
    }
}
