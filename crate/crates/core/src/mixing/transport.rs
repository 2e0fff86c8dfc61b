use rayon::prelude::*;

use super::flow::{FlowMap, VelocityPath};
use crate::error::{Error, Result};
use crate::field::{ScalarField, SupportBox};

/// Reach of the six-point interpolation stencil, in grid cells.
const STENCIL_REACH: f64 = 3.0;

/// How the initial datum is continued outside the fundamental cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Periodic continuation (the torus).
    Periodic,
    /// Zero outside the datum's support box (the whole space).
    Free,
}

/// `ρ(t, x) = ρ̄(X(t, ·)⁻¹ x)` evaluated pointwise, with `ρ̄` interpolated
/// from its grid samples.
#[derive(Debug, Clone, Copy)]
pub struct TransportedField<'a> {
    pub datum: &'a ScalarField,
    pub flow: &'a FlowMap,
    pub t: f64,
    pub extension: Extension,
}

impl<'a> TransportedField<'a> {
    pub fn new(datum: &'a ScalarField, flow: &'a FlowMap, t: f64, extension: Extension) -> Result<Self> {
        if datum.grid().dim() != flow.dim {
            return Err(Error::Dimension(format!(
                "datum is {}-dimensional, protocol is {}-dimensional",
                datum.grid().dim(),
                flow.dim
            )));
        }
        let span = flow.span();
        if !(t >= 0.0 && t <= span * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange { t, span });
        }
        Ok(Self {
            datum,
            flow,
            t: t.min(span),
            extension,
        })
    }

    /// Support box of the datum's interpolant.
    pub fn datum_reach(&self) -> SupportBox {
        let pad = STENCIL_REACH * self.datum.grid().spacing();
        let s = self.datum.support();
        SupportBox {
            lo: s.lo.iter().map(|a| a - pad).collect(),
            hi: s.hi.iter().map(|b| b + pad).collect(),
        }
    }

    /// Box that contains the support of `ρ(t, ·)`.
    pub fn support_bound(&self) -> SupportBox {
        self.flow
            .support_bound(&self.datum_reach(), self.t)
            .expect("time checked at construction")
    }

    /// Evaluates at `x`, using `scratch` (length `d`) for the foot point.
    pub fn eval_with(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        scratch.copy_from_slice(x);
        self.flow
            .pullback(self.t, scratch)
            .expect("time checked at construction");
        if self.extension == Extension::Free && !self.datum_reach().contains(scratch, 0.0) {
            return 0.0;
        }
        self.datum.interpolate(scratch)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; x.len()];
        self.eval_with(x, &mut scratch)
    }
}

/// Transports `rho0` along `flow` to time `t` by composing the exact
/// inverse shear maps at every node and interpolating `rho0` at the feet.
pub fn exact_solution_at(rho0: &ScalarField, flow: &FlowMap, t: f64) -> Result<ScalarField> {
    let tf = TransportedField::new(rho0, flow, t, Extension::Periodic)?;
    if tf.t == 0.0 {
        return Ok(rho0.clone());
    }
    let grid = *rho0.grid();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; grid.dim()], vec![0.0; grid.dim()]),
            |(x, foot), flat| {
                grid.node(flat, x);
                tf.eval_with(x, foot)
            },
        )
        .collect();
    let bound = tf.support_bound();
    let support = if bound.fits(&grid) && !rho0.support().eq(&SupportBox::whole(&grid)) {
        bound
    } else {
        SupportBox::whole(&grid)
    };
    ScalarField::new(grid, values, support)
}

/// Semi-Lagrangian transport: each step traces characteristics backward
/// over `dt` with classical RK4 and interpolates the previous state with
/// the periodic quintic interpolant.
///
/// Fails with a configuration error when the CFL number
/// `max|u| dt / h` exceeds 1 on some step.
pub fn advect_semi_lagrangian<V: VelocityPath + ?Sized>(
    rho0: &ScalarField,
    velocity: &V,
    dt: f64,
    steps: usize,
) -> Result<ScalarField> {
    let grid = *rho0.grid();
    let d = grid.dim();
    if velocity.dim() != d {
        return Err(Error::Dimension("velocity and datum dimensions differ".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Configuration(format!("time step must be positive, got {dt}")));
    }
    let h = grid.spacing();
    for n in 0..steps {
        let t0 = n as f64 * dt;
        let cfl = velocity.max_speed(t0, t0 + dt) * dt / h;
        if cfl > 1.0 {
            return Err(Error::Configuration(format!(
                "CFL number {cfl:.3} exceeds 1 on step {n}"
            )));
        }
    }
    let mut current = rho0.values().to_vec();
    for n in 0..steps {
        let t0 = n as f64 * dt;
        let t1 = t0 + dt;
        // Keep stage times inside the open step so piecewise-steady paths
        // pick the step that owns this interval.
        let eps = 1e-9 * dt;
        let clamp = |t: f64| t.clamp(t0 + eps, t1 - eps);
        let prev = current;
        current = (0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; d], vec![[0.0; 4]; d], vec![0.0; d], vec![0.0; d]),
                |(x, k, stage, u), flat| {
                    grid.node(flat, x);
                    // Backward in time: dX/dσ = -u(t1 - σ, X).
                    let times = [clamp(t1), clamp(t1 - 0.5 * dt), clamp(t1 - 0.5 * dt), clamp(t0)];
                    let coef = [0.0, 0.5, 0.5, 1.0];
                    for s in 0..4 {
                        for i in 0..d {
                            stage[i] = if s == 0 { x[i] } else { x[i] - coef[s] * dt * k[i][s - 1] };
                        }
                        velocity.velocity(times[s], stage, u);
                        for i in 0..d {
                            k[i][s] = u[i];
                        }
                    }
                    for i in 0..d {
                        stage[i] =
                            x[i] - dt / 6.0 * (k[i][0] + 2.0 * k[i][1] + 2.0 * k[i][2] + k[i][3]);
                    }
                    crate::interp::interpolate(&grid, &prev, stage)
                },
            )
            .collect();
    }
    ScalarField::periodic(grid, current)
}
