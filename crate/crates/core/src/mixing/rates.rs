use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use super::flow::FlowMap;
use super::transport::exact_solution_at;
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};
use crate::sobolev::{hs_norms_of_fluctuation, wsp_norm, NormValue};

/// Least-squares fit of `log v = log_prefactor + rate · t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

pub fn fit_exponential_rate(times: &[f64], values: &[f64]) -> Result<RateEstimate> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: times.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "exponential fit needs finite positive values, got {v}"
        )));
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let tm = times.iter().sum::<f64>() / n;
    let ym = logs.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in times.iter().zip(&logs) {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let rate = sxy / sxx;
    // Relative to the scale of the data so rounding noise in a flat series
    // does not register as variance.
    let flat = syy <= 1e-24 * n * (1.0 + ym * ym);
    let (rate, r_squared) = if flat {
        (0.0, 1.0)
    } else {
        (rate, (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
    };
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RateEstimate {
        rate,
        log_prefactor: ym - rate * tm,
        r_squared,
        window: (lo, hi),
    })
}

/// `‖ρ‖²_{L²} / ‖ρ‖_{Ḣ^{-s}}`, a lower bound for `‖ρ‖_{Ḣˢ}`.
pub fn gronwall_lower_bound(l2: f64, neg_norm: f64) -> Result<f64> {
    if !(neg_norm > 0.0) {
        return Err(Error::Domain(format!(
            "negative-order norm must be positive, got {neg_norm}"
        )));
    }
    Ok(l2 * l2 / neg_norm)
}

/// `‖u(t, ·)‖_{Ẇ^{r,p}}` of the protocol's velocity at each sample time.
pub fn velocity_norm_series(
    flow: &FlowMap,
    grid: &Grid,
    r: f64,
    p: f64,
    sample_times: &[f64],
) -> Result<Vec<NormValue>> {
    sample_times
        .iter()
        .map(|&t| {
            let u = flow.velocity_field(grid, t)?;
            wsp_norm(&u, r, p)
        })
        .collect()
}

/// Ḣˢ norms of the fluctuation of `ρ(t, ·)` at a list of times and orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingRecord {
    pub seed: Option<u64>,
    pub times: Vec<f64>,
    pub orders: Vec<f64>,
    /// `norms[i][j]` is the order-`orders[j]` norm at `times[i]`.
    pub norms: Vec<Vec<f64>>,
}

impl MixingRecord {
    pub fn series(&self, order: f64) -> Option<Vec<f64>> {
        let j = self.orders.iter().position(|&s| s == order)?;
        Some(self.norms.iter().map(|row| row[j]).collect())
    }

    /// CSV with columns `t,s,norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,norm\n");
        for (t, row) in self.times.iter().zip(&self.norms) {
            for (s, v) in self.orders.iter().zip(row) {
                let _ = writeln!(out, "{t:.16e},{s:.16e},{v:.16e}");
            }
        }
        out
    }
}

/// Transports `rho0` exactly and records fluctuation norms at each time.
pub fn measure_mixing(
    rho0: &ScalarField,
    flow: &FlowMap,
    times: &[f64],
    orders: &[f64],
) -> Result<MixingRecord> {
    let norms = times
        .par_iter()
        .map(|&t| {
            let rho = exact_solution_at(rho0, flow, t)?;
            Ok(hs_norms_of_fluctuation(&rho, orders)
                .into_iter()
                .map(|n| n.value)
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(MixingRecord {
        seed: flow.seed,
        times: times.to_vec(),
        orders: orders.to_vec(),
        norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderConstant {
    pub order: f64,
    pub value: f64,
}

/// Rate constants of a mixer: `b` and `B_r` bound the growth of the
/// velocity's higher norms, `c` and `Ĉ_s` the decay of negative norms of
/// the transported datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixerConstants {
    pub b: f64,
    pub c: f64,
    pub b_r: Vec<OrderConstant>,
    /// `Ĉ_s` indexed by `s > 0`, bounding `‖ρ(t)‖_{Ḣ^{-s}} ≤ Ĉ_s e^{-sct}`.
    pub c_hat: Vec<OrderConstant>,
    /// `Ĉ_0 = ‖ρ̄‖_{L²}`.
    pub c0: f64,
    pub seed: Option<u64>,
    pub window: (f64, f64),
}

impl MixerConstants {
    pub fn new(b: f64, c: f64, c0: f64, c_hat: Vec<OrderConstant>) -> Result<Self> {
        let ok = b > 0.0 && c > 0.0 && c0 > 0.0 && c_hat.iter().all(|o| o.order > 0.0 && o.value > 0.0);
        if !ok {
            return Err(Error::Domain(format!(
                "mixer constants must be positive (b = {b}, c = {c}, Ĉ_0 = {c0})"
            )));
        }
        Ok(Self {
            b,
            c,
            b_r: Vec::new(),
            c_hat,
            c0,
            seed: None,
            window: (0.0, f64::INFINITY),
        })
    }

    pub fn c_hat_at(&self, s: f64) -> Option<f64> {
        self.c_hat.iter().find(|o| o.order == s).map(|o| o.value)
    }

    /// `C_s = Ĉ_0² / Ĉ_s`.
    pub fn c_s(&self, s: f64) -> Option<f64> {
        self.c_hat_at(s).map(|ch| self.c0 * self.c0 / ch)
    }
}

/// Measures `c` from the decay of `‖ρ(t)‖_{Ḣ^{-s_ref}}`, then the envelopes
/// `Ĉ_s = max_t ‖ρ(t)‖_{Ḣ^{-s}} e^{sct}` for every negative order in the
/// record. `b` is the larger of `b_floor` and the fitted growth rates of
/// the supplied velocity series; `B_r` is the matching envelope.
pub fn estimate_constants(
    record: &MixingRecord,
    s_ref: f64,
    velocity: &[(f64, Vec<f64>)],
    b_floor: f64,
) -> Result<MixerConstants> {
    let neg = record
        .series(-s_ref)
        .ok_or_else(|| Error::InvalidParameter(format!("record lacks order {}", -s_ref)))?;
    let fit = fit_exponential_rate(&record.times, &neg)?;
    let c = -fit.rate / s_ref;
    let c0 = record
        .series(0.0)
        .and_then(|v| v.first().copied())
        .ok_or_else(|| Error::InvalidParameter("record lacks order 0".into()))?;
    let mut c_hat = Vec::new();
    for &order in record.orders.iter().filter(|&&o| o < 0.0) {
        let s = -order;
        let value = record
            .series(order)
            .expect("order taken from the record")
            .iter()
            .zip(&record.times)
            .map(|(v, t)| v * (s * c * t).exp())
            .fold(0.0, f64::max);
        c_hat.push(OrderConstant { order: s, value });
    }
    let mut b = b_floor;
    for (r, vals) in velocity.iter().filter(|(r, _)| *r > 1.0) {
        let f = fit_exponential_rate(&record.times, vals)?;
        b = b.max(f.rate / (r - 1.0));
    }
    let b_r = velocity
        .iter()
        .map(|(r, vals)| OrderConstant {
            order: *r,
            value: vals
                .iter()
                .zip(&record.times)
                .map(|(v, t)| v * (-(r - 1.0) * b * t).exp())
                .fold(0.0, f64::max),
        })
        .collect();
    let mut k = MixerConstants::new(b, c, c0, c_hat)?;
    k.b_r = b_r;
    k.seed = record.seed;
    k.window = fit.window;
    Ok(k)
}
