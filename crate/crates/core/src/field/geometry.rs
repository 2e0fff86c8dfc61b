use serde::{Deserialize, Serialize};

use super::SupportBox;
use crate::error::{Error, Result};

/// Open axis-aligned cube given by its center and side length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "cube side must be positive, got {side}"
            )));
        }
        Ok(Self { center, side })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        let h = self.half();
        x.iter().zip(&self.center).all(|(xi, c)| (xi - c).abs() < h)
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        other
            .center
            .iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() + other.half() <= self.half() + 1e-15 * self.side)
    }

    pub fn intersects(&self, other: &Cube) -> bool {
        other
            .center
            .iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() < self.half() + other.half())
    }

    /// Euclidean distance between the closures of two cubes (0 if they meet).
    pub fn distance_to(&self, other: &Cube) -> f64 {
        other
            .center
            .iter()
            .zip(&self.center)
            .map(|(a, c)| ((a - c).abs() - self.half() - other.half()).max(0.0))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn as_box(&self) -> SupportBox {
        SupportBox::around(&self.center, self.half())
    }
}

/// Distance from `support` to the complement of `container`.
///
/// For concentric cubes of sides `λ` and `3λ` this is `λ`.
pub fn cube_distance_to_complement(support: &Cube, container: &Cube) -> Result<f64> {
    if support.dim() != container.dim() {
        return Err(Error::Dimension(
            "cubes of different dimension".to_string(),
        ));
    }
    if !container.contains_cube(support) {
        return Err(Error::InvalidGeometry(
            "support cube is not contained in the container".into(),
        ));
    }
    let gap = support
        .center
        .iter()
        .zip(&container.center)
        .map(|(s, c)| container.half() - ((s - c).abs() + support.half()))
        .fold(f64::INFINITY, f64::min);
    Ok(gap.max(0.0))
}
