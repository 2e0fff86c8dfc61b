mod experiment;
mod flow;
mod rates;
mod transport;

pub use experiment::{MixingExperiment, MixingRun, DEFAULT_SEED};
pub use flow::{
    build_mixing_protocol, Cutoff, Direction, FlowMap, Profile, ProtocolSpec, Refinement,
    ShearStep, VelocityPath,
};
pub use rates::{
    estimate_constants, fit_exponential_rate, gronwall_lower_bound, measure_mixing,
    velocity_norm_series, MixerConstants, MixingRecord, OrderConstant, RateEstimate,
};
pub use transport::{advect_semi_lagrangian, exact_solution_at, Extension, TransportedField};
