use serde::{Deserialize, Serialize};

use super::flow::{FlowMap, Profile, ProtocolSpec};
use super::rates::{
    estimate_constants, fit_exponential_rate, measure_mixing, velocity_norm_series,
    MixerConstants, MixingRecord, RateEstimate,
};
use crate::error::{Error, Result};
use crate::field::{make_modulated_bump, Grid, ScalarField};

/// A seeded mixing run: protocol, datum, resolution and the orders to
/// record. The default is the reference desk-scale experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixingExperiment {
    pub protocol: ProtocolSpec,
    pub grid_points: usize,
    /// Radius of the bump carrying the datum.
    pub datum_radius: f64,
    /// Modulation wavenumber along `x₁`; the datum is a bump times
    /// `sin(2πk x₁)`, so its mean is zero.
    pub datum_wavenumber: u32,
    pub orders: Vec<f64>,
    /// `c` is read off the decay of `Ḣ^{-s_ref}`.
    pub s_ref: f64,
    /// Lower bound used for `b` when the velocity norms do not grow.
    pub b_floor: f64,
    /// Orders `r > 1` of `Ẇ^{r,2}` velocity norms to record.
    pub velocity_orders: Vec<f64>,
}

pub const DEFAULT_SEED: u64 = 26;

impl Default for MixingExperiment {
    fn default() -> Self {
        let mut protocol = ProtocolSpec::new(DEFAULT_SEED, 1.0, 0.05, 1.5);
        protocol.profile = Profile::SawtoothSmoothed;
        Self {
            protocol,
            grid_points: 256,
            datum_radius: 0.25,
            datum_wavenumber: 2,
            orders: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            s_ref: 0.5,
            b_floor: 1.0,
            velocity_orders: vec![2.0],
        }
    }
}

/// Outcome of [`MixingExperiment::run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingRun {
    pub record: MixingRecord,
    /// Fit of the `Ḣ^{-1}` series, when the record has it.
    pub h_minus_one: Option<RateEstimate>,
    pub constants: Option<MixerConstants>,
}

impl MixingExperiment {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.protocol.seed = seed;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::unit(self.protocol.dim, self.grid_points)
    }

    pub fn datum(&self) -> Result<ScalarField> {
        let grid = self.grid()?;
        let center = vec![0.0; grid.dim()];
        make_modulated_bump(&grid, &center, self.datum_radius, 1.0, 0, self.datum_wavenumber)
    }

    pub fn flow(&self) -> Result<FlowMap> {
        self.protocol.build()
    }

    /// Sampling times: every step boundary of the protocol.
    pub fn sample_times(&self) -> Result<Vec<f64>> {
        Ok(self.flow()?.step_times())
    }

    /// Measures the norms at every sample time, fits the `Ḣ^{-1}` decay and
    /// estimates the mixer constants. A series that does not decay (for
    /// instance with zero amplitude) yields no constants.
    pub fn run(&self) -> Result<MixingRun> {
        if !(self.s_ref > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference order must be positive, got {}",
                self.s_ref
            )));
        }
        let flow = self.flow()?;
        let rho0 = self.datum()?;
        let times = flow.step_times();
        let record = measure_mixing(&rho0, &flow, &times, &self.orders)?;
        let h_minus_one = match record.series(-1.0) {
            Some(v) => Some(fit_exponential_rate(&record.times, &v)?),
            None => None,
        };
        let grid = self.grid()?;
        let velocity = self
            .velocity_orders
            .iter()
            .map(|&r| {
                let norms = velocity_norm_series(&flow, &grid, r, 2.0, &times)?;
                Ok((r, norms.into_iter().map(|n| n.value).collect()))
            })
            .collect::<Result<Vec<(f64, Vec<f64>)>>>()?;
        let constants = match estimate_constants(&record, self.s_ref, &velocity, self.b_floor) {
            Ok(k) => Some(k),
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(MixingRun {
            record,
            h_minus_one,
            constants,
        })
    }
}
