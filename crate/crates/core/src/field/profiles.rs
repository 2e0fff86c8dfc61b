//! Smooth compactly supported test functions and the lift of planar fields
//! to higher dimension.

use super::{Grid, ScalarField, SupportBox};
use crate::error::{Error, Result};

/// Standard mollifier profile `exp(1 - 1/(1 - q))` for `q = |x|²/R² < 1`,
/// normalized to 1 at the center.
pub fn mollifier(q: f64) -> f64 {
    if q >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - q)).exp()
    }
}

/// C^∞ transition from 0 at `t <= 0` to 1 at `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let g = |u: f64| (-1.0 / u).exp();
    let a = g(t);
    a / (a + g(1.0 - t))
}

/// Radial cutoff: 1 on `r <= inner`, 0 on `r >= outer`, smooth in between.
pub fn radial_cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - r) / (outer - inner))
}

fn bump_value(grid: &Grid, x: &[f64], center: &[f64], radius: f64, amplitude: f64) -> f64 {
    let r2: f64 = x
        .iter()
        .zip(center)
        .map(|(a, c)| {
            let d = grid.min_image(a - c);
            d * d
        })
        .sum();
    amplitude * mollifier(r2 / (radius * radius))
}

fn check_bump(grid: &Grid, center: &[f64], radius: f64) -> Result<()> {
    if center.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "center has {} coordinates on a {}-dimensional grid",
            center.len(),
            grid.dim()
        )));
    }
    if !(radius > 0.0 && radius < 0.5 * grid.length()) {
        return Err(Error::InvalidGeometry(format!(
            "bump radius must lie in (0, L/2), got {radius}"
        )));
    }
    Ok(())
}

fn bump_support(grid: &Grid, center: &[f64], radius: f64) -> SupportBox {
    let b = SupportBox::around(center, radius);
    if b.fits(grid) {
        b
    } else {
        SupportBox::whole(grid)
    }
}

/// Smooth bump `amplitude · exp(1 - 1/(1 - |x-c|²/R²))` with periodic
/// (minimum-image) distance, equal to `amplitude` at the center.
pub fn make_bump(grid: &Grid, center: &[f64], radius: f64, amplitude: f64) -> Result<ScalarField> {
    check_bump(grid, center, radius)?;
    let support = bump_support(grid, center, radius);
    let c = center.to_vec();
    ScalarField::from_fn(*grid, support, move |x| {
        bump_value(grid, x, &c, radius, amplitude)
    })
}

/// Bump multiplied by `sin(2πk x_axis / L)`; for a center with zero
/// `axis` coordinate the product is odd in that coordinate, so its mean
/// vanishes.
pub fn make_modulated_bump(
    grid: &Grid,
    center: &[f64],
    radius: f64,
    amplitude: f64,
    axis: usize,
    wavenumber: u32,
) -> Result<ScalarField> {
    check_bump(grid, center, radius)?;
    if axis >= grid.dim() {
        return Err(Error::Dimension(format!(
            "axis {axis} out of range for dimension {}",
            grid.dim()
        )));
    }
    let support = bump_support(grid, center, radius);
    let c = center.to_vec();
    let k = std::f64::consts::TAU * f64::from(wavenumber) / grid.length();
    ScalarField::from_fn(*grid, support, move |x| {
        bump_value(grid, x, &c, radius, amplitude) * (k * (x[axis] - c[axis])).sin()
    })
}

/// Mean-zero pair of opposite bumps at `center ± offset`.
pub fn make_dipole(
    grid: &Grid,
    center: &[f64],
    offset: &[f64],
    radius: f64,
    amplitude: f64,
) -> Result<ScalarField> {
    let plus: Vec<f64> = center.iter().zip(offset).map(|(c, o)| c + o).collect();
    let minus: Vec<f64> = center.iter().zip(offset).map(|(c, o)| c - o).collect();
    check_bump(grid, &plus, radius)?;
    check_bump(grid, &minus, radius)?;
    let support = bump_support(grid, &plus, radius).union(&bump_support(grid, &minus, radius));
    ScalarField::from_fn(*grid, support, move |x| {
        bump_value(grid, x, &plus, radius, amplitude) - bump_value(grid, x, &minus, radius, amplitude)
    })
}

/// Lifts a planar field to `d` dimensions as `f(x₁, x₂) · η(x₃, …, x_d)`,
/// with `η` radial, equal to 1 on the ball of radius `cutoff_inner` and
/// vanishing outside the ball of radius `cutoff_outer`.
pub fn extend_to_dimension(
    field2d: &ScalarField,
    cutoff_inner: f64,
    cutoff_outer: f64,
    d: usize,
) -> Result<ScalarField> {
    if d < 3 {
        return Err(Error::Dimension(format!(
            "extension needs d >= 3, got {d}"
        )));
    }
    let plane = field2d.grid();
    if plane.dim() != 2 {
        return Err(Error::Dimension(format!(
            "expected a planar field, got dimension {}",
            plane.dim()
        )));
    }
    if !(cutoff_inner > 0.0 && cutoff_inner < cutoff_outer && cutoff_outer <= 0.5 * plane.length())
    {
        return Err(Error::InvalidGeometry(format!(
            "cutoff radii must satisfy 0 < {cutoff_inner} < {cutoff_outer} <= L/2"
        )));
    }
    let grid = Grid::new(d, plane.points(), plane.length())?;
    let m = plane.points();
    let tail = m.pow((d - 2) as u32);
    let eta: Vec<f64> = {
        let tail_grid = Grid::new(d - 2, m, plane.length())?;
        (0..tail)
            .map(|flat| {
                let z = tail_grid.node_vec(flat);
                let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                radial_cutoff(r, cutoff_inner, cutoff_outer)
            })
            .collect()
    };
    let mut values = Vec::with_capacity(grid.len());
    for &v in field2d.values() {
        values.extend(eta.iter().map(|e| v * e));
    }
    let mut lo = field2d.support().lo.clone();
    let mut hi = field2d.support().hi.clone();
    lo.extend(std::iter::repeat(-cutoff_outer).take(d - 2));
    hi.extend(std::iter::repeat(cutoff_outer).take(d - 2));
    ScalarField::new(grid, values, SupportBox::new(lo, hi)?)
}
