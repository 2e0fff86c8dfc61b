//! Homogeneous fractional Sobolev norms on periodic grids.
//!
//! The multiplier norms use the conventions of [`crate::spectral`]:
//! `|f|²_{Ḣˢ} = Σ_{k≠0} |ξ_k|^{2s} |c_k|²`. The Gagliardo form is a direct
//! double sum over node pairs with minimum-image distances and is only meant
//! for small grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{lp_norm, Cube, Grid, ScalarField, VectorField};
use crate::spectral::{abs_wavevectors, Spectrum};

/// Relative size of the zero mode, compared with the L² norm, above which a
/// field counts as having nonzero mean.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub p: f64,
}

impl SobolevIndex {
    pub fn hilbert(s: f64) -> Self {
        Self { s, p: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Multiplier,
    Gagliardo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Multiplier => "multiplier",
            Method::Gagliardo => "gagliardo",
        }
    }
}

/// A measured norm. `value` is `+inf` when the norm is infinite, as for
/// negative orders applied to fields with nonzero mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub index: SobolevIndex,
    pub method: Method,
}

impl NormValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

fn has_mean(spectrum: &Spectrum, l2: f64) -> bool {
    spectrum.zero_mode().norm() > ZERO_MEAN_TOL * l2
}

fn weighted_sum(spectrum: &Spectrum, abs_xi: &[f64], s: f64) -> f64 {
    spectrum
        .coeffs()
        .iter()
        .zip(abs_xi)
        .skip(1)
        .map(|(c, k)| k.powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
}

/// `|f|_{Ḣˢ}` through the Fourier multiplier `|ξ|ˢ`.
///
/// For `s = 0` this is the grid L² norm. For `s < 0` the zero mode is
/// excluded and a field with nonzero mean has infinite norm.
pub fn hs_norm(f: &ScalarField, s: f64) -> NormValue {
    let index = SobolevIndex::hilbert(s);
    let value = if s == 0.0 {
        f.l2_norm()
    } else {
        let spectrum = Spectrum::of(f.grid(), f.values());
        if s < 0.0 && has_mean(&spectrum, f.l2_norm()) {
            f64::INFINITY
        } else {
            weighted_sum(&spectrum, &abs_wavevectors(f.grid()), s).sqrt()
        }
    };
    NormValue {
        value,
        index,
        method: Method::Multiplier,
    }
}

/// Ḣˢ norms at several orders from a single transform. The zero mode is
/// always dropped, so this measures the fluctuation `f - mean(f)`.
pub fn hs_norms_of_fluctuation(f: &ScalarField, orders: &[f64]) -> Vec<NormValue> {
    let spectrum = Spectrum::of(f.grid(), f.values());
    let abs_xi = abs_wavevectors(f.grid());
    orders
        .iter()
        .map(|&s| NormValue {
            value: weighted_sum(&spectrum, &abs_xi, s).sqrt(),
            index: SobolevIndex::hilbert(s),
            method: Method::Multiplier,
        })
        .collect()
}

/// Borrowed scalar or vector field for [`wsp_norm`].
#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Vector(&'a VectorField),
}

impl<'a> From<&'a ScalarField> for FieldRef<'a> {
    fn from(f: &'a ScalarField) -> Self {
        FieldRef::Scalar(f)
    }
}

impl<'a> From<&'a VectorField> for FieldRef<'a> {
    fn from(f: &'a VectorField) -> Self {
        FieldRef::Vector(f)
    }
}

fn component_wsp(grid: &Grid, values: &[f64], s: f64, p: f64) -> f64 {
    if s == 0.0 {
        return lp_norm(values, grid.cell_volume(), p);
    }
    let spectrum = Spectrum::of(grid, values);
    if s < 0.0 && has_mean(&spectrum, lp_norm(values, grid.cell_volume(), 2.0)) {
        return f64::INFINITY;
    }
    let g = spectrum.synthesize(|xi| {
        let k2: f64 = xi.iter().map(|k| k * k).sum();
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(0.5 * s)
        }
    });
    lp_norm(&g, grid.cell_volume(), p)
}

/// `|f|_{Ẇ^{s,p}}`: grid Lᵖ norm of the inverse transform of `|ξ|ˢ f̂`.
/// Vector fields combine their component norms in ℓ².
pub fn wsp_norm<'a>(f: impl Into<FieldRef<'a>>, s: f64, p: f64) -> Result<NormValue> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::UnsupportedIndex(format!(
            "integrability p must lie in (1, ∞), got {p}"
        )));
    }
    let value = match f.into() {
        FieldRef::Scalar(sf) => component_wsp(sf.grid(), sf.values(), s, p),
        FieldRef::Vector(vf) => vf
            .components()
            .iter()
            .map(|c| component_wsp(vf.grid(), c, s, p).powi(2))
            .sum::<f64>()
            .sqrt(),
    };
    Ok(NormValue {
        value,
        index: SobolevIndex { s, p },
        method: Method::Multiplier,
    })
}

fn check_gagliardo_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::UnsupportedIndex(format!(
            "Gagliardo seminorm needs 0 < s < 1, got {s}"
        )));
    }
    Ok(())
}

/// Direct double sum `(h^{2d} Σ_{x≠y} |f(x)-f(y)|² / |x-y|^{d+2s})^{1/2}`
/// with the minimum-image distance.
pub fn gagliardo_seminorm(f: &ScalarField, s: f64) -> Result<NormValue> {
    check_gagliardo_order(s)?;
    let g = *f.grid();
    let d = g.dim();
    let m = g.points();
    let h = g.spacing();
    let values = f.values();
    let exponent = -0.5 * (d as f64 + 2.0 * s);
    let total: f64 = (1..g.len())
        .into_par_iter()
        .map_init(
            || (vec![0usize; d], vec![0usize; d]),
            |(off, idx), o| {
                g.unravel(o, off);
                let r2: f64 = off
                    .iter()
                    .map(|&k| {
                        let dx = g.min_image(k as f64 * h);
                        dx * dx
                    })
                    .sum();
                let weight = r2.powf(exponent);
                let mut acc = 0.0;
                for (flat, v) in values.iter().enumerate() {
                    g.unravel(flat, idx);
                    let mut other = 0usize;
                    for (i, k) in idx.iter().zip(off.iter()) {
                        other = other * m + (i + k) % m;
                    }
                    let diff = values[other] - v;
                    acc += diff * diff;
                }
                weight * acc
            },
        )
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(NormValue {
        value: (total * g.cell_volume().powi(2)).sqrt(),
        index: SobolevIndex::hilbert(s),
        method: Method::Gagliardo,
    })
}

/// Gagliardo double sum restricted to node pairs that both lie in `region`.
pub fn gagliardo_seminorm_on(f: &ScalarField, s: f64, region: &Cube) -> Result<NormValue> {
    check_gagliardo_order(s)?;
    let g = *f.grid();
    if region.dim() != g.dim() {
        return Err(Error::Dimension("region and field dimensions differ".into()));
    }
    let d = g.dim();
    let inside: Vec<(Vec<f64>, f64)> = (0..g.len())
        .filter_map(|flat| {
            let x = g.node_vec(flat);
            region.contains_point(&x).then(|| (x, f.values()[flat]))
        })
        .collect();
    let exponent = -0.5 * (d as f64 + 2.0 * s);
    let total: f64 = inside
        .par_iter()
        .enumerate()
        .map(|(i, (x, fx))| {
            let mut acc = 0.0;
            for (y, fy) in &inside[i + 1..] {
                let r2: f64 = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| {
                        let dx = g.min_image(a - b);
                        dx * dx
                    })
                    .sum();
                acc += (fx - fy).powi(2) * r2.powf(exponent);
            }
            2.0 * acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(NormValue {
        value: (total * g.cell_volume().powi(2)).sqrt(),
        index: SobolevIndex::hilbert(s),
        method: Method::Gagliardo,
    })
}

/// Norm of `f(·/λ)` from the norm of `f`: `λ^{d/p - s}` times the base value.
pub fn rescaled_norm(base: &NormValue, lam: f64, d: usize) -> Result<NormValue> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rescaling factor must be positive, got {lam}"
        )));
    }
    let exponent = d as f64 / base.index.p - base.index.s;
    Ok(NormValue {
        value: lam.powf(exponent) * base.value,
        ..*base
    })
}

/// Interpolation bound `|f|_{s₁}^θ |f|_{s₂}^{1-θ}` with `s = θ s₁ + (1-θ) s₂`.
pub fn interpolation_bound(n1: &NormValue, n2: &NormValue, s: f64) -> Result<f64> {
    let (s1, s2) = (n1.index.s, n2.index.s);
    if !(s1 < s && s < s2) {
        return Err(Error::InvalidParameter(format!(
            "order {s} must lie strictly between {s1} and {s2}"
        )));
    }
    let theta = (s2 - s) / (s2 - s1);
    Ok(n1.value.powf(theta) * n2.value.powf(1.0 - theta))
}

/// Surface area of the unit sphere `S^{d-1} ⊂ ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2),
    }
}

/// Per-piece data for the almost-orthogonality bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PieceNorms {
    /// `|f_n|²_{Ḣˢ}`
    pub hs_sq: f64,
    /// `|f_n|²_{L²}`
    pub l2_sq: f64,
    /// Distance from the support of `f_n` to the complement of its region.
    pub lam: f64,
}

/// `Σ_n [ |f_n|²_{Ḣˢ} - (C_d/s) λ_n^{-2s} |f_n|²_{L²} ]` with
/// `C_d = |S^{d-1}|`. Lower bound for `|Σ f_n|²_{Ḣˢ}` when the regions are
/// pairwise disjoint.
pub fn orthogonality_lower_bound(pieces: &[PieceNorms], s: f64, d: usize) -> Result<f64> {
    check_gagliardo_order(s).map_err(|_| {
        Error::InvalidParameter(format!("almost orthogonality needs 0 < s < 1, got {s}"))
    })?;
    let cd = sphere_area(d);
    pieces.iter().try_fold(0.0, |acc, piece| {
        if !(piece.lam > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "separation must be positive, got {}",
                piece.lam
            )));
        }
        Ok(acc + piece.hs_sq - cd / s * piece.lam.powf(-2.0 * s) * piece.l2_sq)
    })
}
