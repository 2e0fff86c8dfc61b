use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::{radial_cutoff, Grid, SupportBox, VectorField};

/// Periodic shear profile `g(θ)` with `max |g| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    #[default]
    Sine,
    /// `arg(1 + κ e^{iθ}) / asin κ` with `κ = 0.9`: an analytic sawtooth.
    SawtoothSmoothed,
}

const SAWTOOTH_KAPPA: f64 = 0.9;

impl Profile {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Profile::Sine => theta.sin(),
            Profile::SawtoothSmoothed => {
                let k = SAWTOOTH_KAPPA;
                (k * theta.sin()).atan2(1.0 + k * theta.cos()) / k.asin()
            }
        }
    }
}

/// Smooth cutoff in the coordinates transverse to the shear direction:
/// 1 where every such `|x_j| <= inner`, 0 once any `|x_j| >= outer`.
/// It never depends on the sheared coordinate, so the field stays
/// divergence-free and its flow stays explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    fn eval(&self, x: &[f64], axis: usize) -> f64 {
        x.iter()
            .enumerate()
            .filter(|(j, _)| *j != axis)
            .map(|(_, xj)| radial_cutoff(xj.abs(), self.inner, self.outer))
            .product()
    }
}

/// Steady shear `u = a · g(2πk x_t + φ) · χ(x) · e_axis` held for `duration`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearStep {
    pub axis: usize,
    pub transverse: usize,
    pub amplitude: f64,
    pub phase: f64,
    pub duration: f64,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default = "one")]
    pub wavenumber: u32,
    #[serde(default)]
    pub cutoff: Option<Cutoff>,
}

fn one() -> u32 {
    1
}

impl ShearStep {
    /// Velocity component along `axis` at `x`.
    pub fn speed_at(&self, x: &[f64]) -> f64 {
        let theta = TAU * self.wavenumber as f64 * x[self.transverse] + self.phase;
        let chi = self.cutoff.map_or(1.0, |c| c.eval(x, self.axis));
        self.amplitude * self.profile.eval(theta) * chi
    }

    /// Exact flow for time `tau`: only the `axis` coordinate moves, by
    /// `tau · u(x)`, since `u` does not depend on it.
    pub fn advance(&self, x: &mut [f64], tau: f64) {
        x[self.axis] += tau * self.speed_at(x);
    }

    fn touches(&self, b: &SupportBox) -> bool {
        match self.cutoff {
            None => true,
            Some(c) => (0..b.dim())
                .filter(|&j| j != self.axis)
                .all(|j| b.lo[j] < c.outer && b.hi[j] > -c.outer),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Piecewise-steady shear protocol on `[0, span]`. Every step has an
/// explicit flow, so `X(t, ·)` and its inverse are evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowMap {
    pub dim: usize,
    pub steps: Vec<ShearStep>,
    pub direction: Direction,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl FlowMap {
    pub fn new(dim: usize, steps: Vec<ShearStep>) -> Result<Self> {
        for s in &steps {
            if s.axis >= dim || s.transverse >= dim || s.axis == s.transverse {
                return Err(Error::InvalidParameter(format!(
                    "shear axes ({}, {}) invalid in dimension {dim}",
                    s.axis, s.transverse
                )));
            }
            if !(s.duration > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "step duration must be positive, got {}",
                    s.duration
                )));
            }
        }
        Ok(Self {
            dim,
            steps,
            direction: Direction::Forward,
            seed: None,
        })
    }

    pub fn span(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    /// Start times of the steps followed by the end of the span.
    pub fn step_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.steps {
            t += s.duration;
            out.push(t);
        }
        out
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let span = self.span();
        let slack = 1e-12 * span.max(1.0);
        if !(t >= -slack && t <= span + slack) {
            return Err(Error::OutOfRange { t, span });
        }
        Ok(t.clamp(0.0, span))
    }

    /// `(step index, time spent in it)` for each step active before `t`.
    fn active(&self, t: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        let mut start = 0.0;
        self.steps.iter().enumerate().map_while(move |(j, s)| {
            if start >= t {
                return None;
            }
            let tau = (t - start).min(s.duration);
            start += s.duration;
            Some((j, tau))
        })
    }

    /// `X(t, x)`, in place.
    pub fn forward(&self, t: f64, x: &mut [f64]) -> Result<()> {
        let t = self.check_time(t)?;
        for (j, tau) in self.active(t) {
            self.steps[j].advance(x, tau);
        }
        Ok(())
    }

    /// `X(t, ·)⁻¹ x`, in place: the active steps undone in reverse order.
    pub fn pullback(&self, t: f64, x: &mut [f64]) -> Result<()> {
        let t = self.check_time(t)?;
        let active: Vec<(usize, f64)> = self.active(t).collect();
        for &(j, tau) in active.iter().rev() {
            self.steps[j].advance(x, -tau);
        }
        Ok(())
    }

    /// Path that undoes this one: steps reversed with negated amplitudes.
    pub fn inverse(&self) -> Self {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| ShearStep {
                amplitude: -s.amplitude,
                ..s.clone()
            })
            .collect();
        Self {
            dim: self.dim,
            steps,
            direction: match self.direction {
                Direction::Forward => Direction::Inverse,
                Direction::Inverse => Direction::Forward,
            },
            seed: self.seed,
        }
    }

    /// Index of the step that is active at time `t`; step boundaries belong
    /// to the later step, the end of the span to the last one.
    pub fn step_at(&self, t: f64) -> Option<usize> {
        if self.steps.is_empty() {
            return None;
        }
        let mut start = 0.0;
        for (j, s) in self.steps.iter().enumerate() {
            if t < start + s.duration {
                return Some(j);
            }
            start += s.duration;
        }
        Some(self.steps.len() - 1)
    }

    /// Largest `|u|` over the whole protocol.
    pub fn max_speed(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.amplitude.abs())
            .fold(0.0, f64::max)
    }

    /// Uniform Lipschitz bound `max_j 2π k_j |a_j|` (cutoff-free steps).
    pub fn lipschitz_bound(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| TAU * s.wavenumber as f64 * s.amplitude.abs())
            .fold(0.0, f64::max)
    }

    pub fn has_cutoff(&self) -> bool {
        self.steps.iter().any(|s| s.cutoff.is_some())
    }

    /// Box containing `X(t, B)` for a box `B`. Each step can only push
    /// points along its axis by at most `|a| τ`, and only if `B` reaches the
    /// region where the step's cutoff is nonzero.
    pub fn support_bound(&self, initial: &SupportBox, t: f64) -> Result<SupportBox> {
        let t = self.check_time(t)?;
        let mut b = initial.clone();
        for (j, tau) in self.active(t) {
            let s = &self.steps[j];
            if s.touches(&b) {
                let reach = s.amplitude.abs() * tau;
                b.lo[s.axis] -= reach;
                b.hi[s.axis] += reach;
            }
        }
        Ok(b)
    }

    /// The velocity at time `t` sampled on a grid.
    pub fn velocity_field(&self, grid: &Grid, t: f64) -> Result<VectorField> {
        if grid.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "protocol is {}-dimensional, grid is {}-dimensional",
                self.dim,
                grid.dim()
            )));
        }
        let t = self.check_time(t)?;
        let mut comps = vec![vec![0.0; grid.len()]; self.dim];
        if let Some(j) = self.step_at(t) {
            let s = &self.steps[j];
            let mut x = vec![0.0; self.dim];
            for (flat, u) in comps[s.axis].iter_mut().enumerate() {
                grid.node(flat, &mut x);
                *u = s.speed_at(&x);
            }
        }
        VectorField::new(*grid, comps, true)
    }
}

/// Time-dependent velocity for the semi-Lagrangian solver.
pub trait VelocityPath: Sync {
    fn dim(&self) -> usize;

    /// Velocity at `(t, x)` written into `out`.
    fn velocity(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Upper bound on `|u|` over `[t0, t1]`.
    fn max_speed(&self, t0: f64, t1: f64) -> f64;
}

impl VelocityPath for FlowMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn velocity(&self, t: f64, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|u| *u = 0.0);
        if let Some(j) = self.step_at(t) {
            if t <= self.span() {
                let s = &self.steps[j];
                out[s.axis] = s.speed_at(x);
            }
        }
    }

    fn max_speed(&self, t0: f64, t1: f64) -> f64 {
        let mut start = 0.0;
        let mut m: f64 = 0.0;
        for s in &self.steps {
            let end = start + s.duration;
            if end > t0 && start < t1 {
                m = m.max(s.amplitude.abs());
            }
            start = end;
        }
        m
    }
}

/// Geometric refinement of the shear wavenumber: every `every` steps the
/// wavenumber is multiplied by `factor` and the amplitude divided by it, so
/// the Lipschitz constant stays fixed while higher derivatives grow
/// exponentially in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub factor: u32,
    pub every: usize,
}

/// Parameters of an alternating shear protocol with seeded phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub seed: u64,
    pub total_time: f64,
    pub step_duration: f64,
    pub amplitude: f64,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default = "one")]
    pub wavenumber: u32,
    #[serde(default)]
    pub cutoff: Option<Cutoff>,
    #[serde(default)]
    pub refinement: Option<Refinement>,
}

fn two() -> usize {
    2
}

impl ProtocolSpec {
    pub fn new(seed: u64, total_time: f64, step_duration: f64, amplitude: f64) -> Self {
        Self {
            seed,
            total_time,
            step_duration,
            amplitude,
            dim: 2,
            profile: Profile::Sine,
            wavenumber: 1,
            cutoff: None,
            refinement: None,
        }
    }

    pub fn build(&self) -> Result<FlowMap> {
        if !(self.step_duration > 0.0) || !(self.total_time > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "total time ({}) and step duration ({}) must be positive",
                self.total_time, self.step_duration
            )));
        }
        if self.dim < 2 {
            return Err(Error::Dimension("shear protocols need d >= 2".into()));
        }
        if self.wavenumber == 0 {
            return Err(Error::InvalidParameter("wavenumber must be >= 1".into()));
        }
        if let Some(r) = self.refinement {
            if r.factor < 1 || r.every == 0 {
                return Err(Error::InvalidParameter(
                    "refinement needs factor >= 1 and every >= 1".into(),
                ));
            }
        }
        let n = ((self.total_time / self.step_duration) - 1e-9).ceil().max(1.0) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut steps = Vec::with_capacity(n);
        for j in 0..n {
            let duration = if j + 1 == n {
                self.total_time - (n - 1) as f64 * self.step_duration
            } else {
                self.step_duration
            };
            let level = self
                .refinement
                .map_or(1u64, |r| (r.factor as u64).pow((j / r.every) as u32));
            let axis = j % self.dim;
            steps.push(ShearStep {
                axis,
                transverse: (axis + 1) % self.dim,
                amplitude: self.amplitude / level as f64,
                phase: TAU * rng.gen::<f64>(),
                duration,
                profile: self.profile,
                wavenumber: self.wavenumber * level as u32,
                cutoff: self.cutoff,
            });
        }
        let mut flow = FlowMap::new(self.dim, steps)?;
        flow.seed = Some(self.seed);
        Ok(flow)
    }
}

/// Alternating sine shears on the periodic unit square with phases drawn
/// from `seed` and a fixed amplitude.
pub fn build_mixing_protocol(
    seed: u64,
    total_time: f64,
    step_duration: f64,
    amplitude: f64,
) -> Result<FlowMap> {
    ProtocolSpec::new(seed, total_time, step_duration, amplitude).build()
}
