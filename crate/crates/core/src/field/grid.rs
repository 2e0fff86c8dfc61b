use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the cube `[-L/2, L/2)^d`.
///
/// Node `i` along each axis sits at `-L/2 + i h` with `h = L / M`, so the
/// origin is always a node (index `M/2`). Values are stored row-major with
/// the last axis varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("grid dimension must be at least 1".into()));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "points per side must be a power of two >= 4, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "side length must be positive, got {length}"
            )));
        }
        Ok(Self {
            dim,
            points,
            length,
        })
    }

    /// Grid on the unit cube.
    pub fn unit(dim: usize, points: usize) -> Result<Self> {
        Self::new(dim, points, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of nodes, `M^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Physical coordinates of the node at a flat position.
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = self.coord(rest % self.points);
            rest /= self.points;
        }
    }

    pub fn node_vec(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.node(flat, &mut x);
        x
    }

    /// Wraps a coordinate into `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let half = 0.5 * self.length;
        (x + half).rem_euclid(self.length) - half
    }

    /// Minimum-image displacement between two coordinates.
    pub fn min_image(&self, dx: f64) -> f64 {
        dx - self.length * (dx / self.length).round()
    }
}
