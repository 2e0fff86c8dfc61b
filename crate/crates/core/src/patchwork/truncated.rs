use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::{make_piece, PieceSpec, Schedule};
use crate::error::{Error, Result};
use crate::field::{make_modulated_bump, Cube, Grid, ScalarField, SupportBox};
use crate::mixing::{
    estimate_constants, measure_mixing, Cutoff, Extension, FlowMap, MixerConstants, ProtocolSpec,
    TransportedField,
};

/// Smallest number of grid cells a piece's `λ_n` may span.
pub const MIN_CELLS_PER_PIECE: f64 = 4.0;

/// Mixing pair confined to the unit cube: slow shears that vanish once a
/// transverse coordinate leaves `[-1/4, 1/4]`, and a modulated bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasePair {
    pub protocol: ProtocolSpec,
    pub grid_points: usize,
    pub datum_radius: f64,
    pub datum_wavenumber: u32,
}

impl Default for BasePair {
    fn default() -> Self {
        let mut protocol = ProtocolSpec::new(22, 3.0, 0.1, 0.15);
        protocol.cutoff = Some(Cutoff {
            inner: 0.125,
            outer: 0.25,
        });
        Self {
            protocol,
            grid_points: 128,
            datum_radius: 0.2,
            datum_wavenumber: 2,
        }
    }
}

impl BasePair {
    pub fn build(&self) -> Result<(FlowMap, ScalarField)> {
        let flow = self.protocol.build()?;
        let grid = Grid::unit(self.protocol.dim, self.grid_points)?;
        let center = vec![0.0; grid.dim()];
        let datum =
            make_modulated_bump(&grid, &center, self.datum_radius, 1.0, 0, self.datum_wavenumber)?;
        Ok((flow, datum))
    }

    /// Decay constants of the base pair itself, `c` read off `Ḣ^{-s}` at
    /// every step boundary. The shears are steady within steps, so `b` is
    /// left at 1.
    pub fn measure_constants(&self, s: f64) -> Result<MixerConstants> {
        let (flow, datum) = self.build()?;
        let record = measure_mixing(&datum, &flow, &flow.step_times(), &[-s, 0.0])?;
        estimate_constants(&record, s, &[], 1.0)
    }
}

/// One rescaled piece sampled on the window grid.
#[derive(Debug, Clone)]
pub struct PieceField {
    pub spec: PieceSpec,
    pub field: ScalarField,
}

/// `θ_N(t, ·)` on a window together with its pieces.
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub window: Cube,
    pub t: f64,
    pub total: ScalarField,
    pub pieces: Vec<PieceField>,
}

/// Samples `θ_N(t, x) = Σ_{n≤N} γ_n ρ(t/τ_n, (x - x_n)/λ_n)` on `grid`,
/// whose cell is identified with `window` (node `y` sits at
/// `window.center + y`).
///
/// The base pair lives on the unit cube: its datum is given on a grid of
/// side 1, and its support must stay inside `[-1/2, 1/2]^d` up to the
/// largest rescaled time, so each piece stays inside its own cube.
pub fn evaluate_truncated_solution(
    schedule: &Schedule,
    base_flow: &FlowMap,
    base_datum: &ScalarField,
    big_n: u64,
    t: f64,
    window: &Cube,
    grid: &Grid,
) -> Result<TruncatedSolution> {
    let d = grid.dim();
    if schedule.dim() != d || window.dim() != d || base_datum.grid().dim() != d {
        return Err(Error::Dimension(
            "schedule, window, grid and base datum must share a dimension".into(),
        ));
    }
    if (grid.length() - window.side).abs() > 1e-12 * window.side {
        return Err(Error::InvalidGeometry(format!(
            "grid side {} differs from window side {}",
            grid.length(),
            window.side
        )));
    }
    if (base_datum.grid().length() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidGeometry("base datum must live on the unit cube".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let unit = SupportBox::around(&vec![0.0; d], 0.5);
    let mut pieces = Vec::new();
    for n in 1..=big_n {
        let spec = make_piece(schedule, n)?;
        if !window.intersects(&spec.cube()) {
            continue;
        }
        if spec.lambda < MIN_CELLS_PER_PIECE * grid.spacing() {
            return Err(Error::Resolution(format!(
                "piece {n} has lambda = {:.3e}, under {MIN_CELLS_PER_PIECE} cells of size {:.3e}; \
                 shrink the window or lower N",
                spec.lambda,
                grid.spacing()
            )));
        }
        let local_t = t / spec.tau;
        let tf = TransportedField::new(base_datum, base_flow, local_t, Extension::Free)?;
        let reach = tf.support_bound();
        if !(0..d).all(|i| reach.lo[i] >= unit.lo[i] && reach.hi[i] <= unit.hi[i]) {
            return Err(Error::InvalidGeometry(format!(
                "base solution leaves the unit cube by time {local_t}"
            )));
        }
        let field = sample_piece(&spec, &tf, &reach, window, grid)?;
        pieces.push(PieceField { spec, field });
    }
    let mut total = ScalarField::zeros(*grid);
    for p in &pieces {
        total = total.add(&p.field)?;
    }
    Ok(TruncatedSolution {
        window: window.clone(),
        t,
        total,
        pieces,
    })
}

fn sample_piece(
    spec: &PieceSpec,
    tf: &TransportedField<'_>,
    reach: &SupportBox,
    window: &Cube,
    grid: &Grid,
) -> Result<ScalarField> {
    let d = grid.dim();
    // Support of the piece in window coordinates.
    let lo: Vec<f64> = (0..d)
        .map(|i| spec.center[i] + spec.lambda * reach.lo[i] - window.center[i])
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|i| spec.center[i] + spec.lambda * reach.hi[i] - window.center[i])
        .collect();
    let support = SupportBox { lo, hi };
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; d], vec![0.0; d], vec![0.0; d]),
            |(y, base, scratch), flat| {
                grid.node(flat, y);
                if !support.contains(y, 0.0) {
                    return 0.0;
                }
                for i in 0..d {
                    y[i] += window.center[i];
                }
                spec.to_base(y, base);
                spec.gamma * tf.eval_with(base, scratch)
            },
        )
        .collect();
    let support = if support.fits(grid) {
        support
    } else {
        SupportBox::whole(grid)
    };
    ScalarField::new(*grid, values, support)
}
