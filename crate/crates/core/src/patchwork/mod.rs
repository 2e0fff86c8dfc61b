mod conditions;
mod schedule;
mod truncated;

pub use conditions::{
    blowup_time, evaluate_condition, hs_lower_bound_partial_sums, hs_lower_bound_series,
    ConditionCertificate, ConditionId, ConditionParams,
};
pub use schedule::{
    make_piece, place_cubes, theorem1_schedule, theorem2_schedule, ConstructionParams, PieceSpec,
    Schedule,
};
pub use truncated::{
    evaluate_truncated_solution, BasePair, PieceField, TruncatedSolution, MIN_CELLS_PER_PIECE,
};
