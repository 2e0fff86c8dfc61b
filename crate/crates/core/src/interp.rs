//! Periodic tensor-product quintic (six-point Lagrange) interpolation.

use crate::field::{Grid, ScalarField};

const STENCIL: usize = 6;

/// Lagrange weights on the nodes `-2, …, 3` for a fractional position
/// `t ∈ [0, 1)` measured from node 0.
fn weights(t: f64) -> [f64; STENCIL] {
    let mut w = [0.0; STENCIL];
    for (j, wj) in w.iter_mut().enumerate() {
        let xj = j as f64 - 2.0;
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 0..STENCIL {
            if m != j {
                let xm = m as f64 - 2.0;
                num *= t - xm;
                den *= xj - xm;
            }
        }
        *wj = num / den;
    }
    w
}

/// Evaluates the periodic quintic interpolant of `values` at `x`.
pub fn interpolate(grid: &Grid, values: &[f64], x: &[f64]) -> f64 {
    let d = grid.dim();
    let m = grid.points() as i64;
    let h = grid.spacing();
    let half = 0.5 * grid.length();
    let mut base = [0i64; 8];
    let mut w = [[0.0; STENCIL]; 8];
    assert!(d <= 8, "interpolation supports at most 8 dimensions");
    for axis in 0..d {
        let u = (x[axis] + half) / h;
        let i0 = u.floor();
        base[axis] = i0 as i64;
        w[axis] = weights(u - i0);
    }
    // Odometer over the 6^d stencil.
    let mut digits = [0usize; 8];
    let mut total = 0.0;
    loop {
        let mut flat = 0usize;
        let mut weight = 1.0;
        for axis in 0..d {
            let i = (base[axis] + digits[axis] as i64 - 2).rem_euclid(m) as usize;
            flat = flat * m as usize + i;
            weight *= w[axis][digits[axis]];
        }
        total += weight * values[flat];
        let mut axis = d;
        loop {
            if axis == 0 {
                return total;
            }
            axis -= 1;
            digits[axis] += 1;
            if digits[axis] < STENCIL {
                break;
            }
            digits[axis] = 0;
        }
    }
}

impl ScalarField {
    /// Periodic quintic interpolant at an arbitrary point.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        interpolate(self.grid(), self.values(), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SupportBox;
    use std::f64::consts::TAU;

    #[test]
    fn weights_partition_unity() {
        for t in [0.0, 0.25, 0.5, 0.9] {
            let s: f64 = weights(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(weights(0.0), [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn reproduces_nodes() {
        let g = Grid::unit(2, 16).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64).sqrt()).collect();
        for flat in [0, 17, 100, 255] {
            let x = g.node_vec(flat);
            assert!((interpolate(&g, &vals, &x) - vals[flat]).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_function_accuracy() {
        let g = Grid::unit(2, 64).unwrap();
        let f = ScalarField::from_fn(g, SupportBox::whole(&g), |x| {
            (TAU * x[0]).sin() * (TAU * 2.0 * x[1]).cos()
        })
        .unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in [(0.0123, -0.377), (0.49, 0.31), (-0.5, 0.0999), (0.777, 1.3)] {
            let exact = (TAU * a).sin() * (TAU * 2.0 * b).cos();
            worst = worst.max((f.interpolate(&[a, b]) - exact).abs());
        }
        assert!(worst < 1e-6, "interpolation error {worst}");
    }
}
