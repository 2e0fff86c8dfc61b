use serde::{Deserialize, Serialize};
use std::fmt;

use super::schedule::Schedule;
use crate::error::{Error, Result};
use crate::mixing::MixerConstants;
use crate::series::{classify, classify_bounded, product_and_power, ExpPolySeries, Verdict};
use crate::sobolev::sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    A,
    B,
    #[serde(rename = "B-tilde")]
    BTilde,
    #[serde(rename = "B-hat")]
    BHat,
    C,
    #[serde(rename = "C-tilde")]
    CTilde,
    #[serde(rename = "C-hat")]
    CHat,
    D,
}

impl ConditionId {
    pub const ALL: [ConditionId; 8] = [
        ConditionId::A,
        ConditionId::B,
        ConditionId::BTilde,
        ConditionId::BHat,
        ConditionId::C,
        ConditionId::CTilde,
        ConditionId::CHat,
        ConditionId::D,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::A => "A",
            ConditionId::B => "B",
            ConditionId::BTilde => "B-tilde",
            ConditionId::BHat => "B-hat",
            ConditionId::C => "C",
            ConditionId::CTilde => "C-tilde",
            ConditionId::CHat => "C-hat",
            ConditionId::D => "D",
        }
    }

    /// Verdict under which the condition is met. Every condition asks for
    /// a finite series or bounded sequence except (D), which asks for
    /// divergence.
    pub fn wanted(&self) -> Verdict {
        match self {
            ConditionId::BTilde | ConditionId::CTilde => Verdict::Bounded,
            ConditionId::D => Verdict::Divergent,
            _ => Verdict::Convergent,
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditionId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown condition {s:?}")))
    }
}

/// Parameters a condition may depend on. Unused ones are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConditionParams {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl ConditionParams {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            ..Default::default()
        }
    }

    pub fn s(mut self, v: f64) -> Self {
        self.s = Some(v);
        self
    }
    pub fn t(mut self, v: f64) -> Self {
        self.t = Some(v);
        self
    }
    pub fn r(mut self, v: f64) -> Self {
        self.r = Some(v);
        self
    }
    pub fn p(mut self, v: f64) -> Self {
        self.p = Some(v);
        self
    }
    pub fn sigma(mut self, v: f64) -> Self {
        self.sigma = Some(v);
        self
    }
    pub fn b(mut self, v: f64) -> Self {
        self.b = Some(v);
        self
    }
    pub fn c(mut self, v: f64) -> Self {
        self.c = Some(v);
        self
    }
}

fn need(v: Option<f64>, name: &str, id: ConditionId) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParameter(format!("condition {id} needs parameter {name}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCertificate {
    pub condition: ConditionId,
    pub verdict: Verdict,
    pub series: ExpPolySeries,
    pub params: ConditionParams,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConditionCertificate {
    /// Whether the verdict is the one the construction needs.
    pub fn holds(&self) -> bool {
        self.verdict == self.condition.wanted()
    }
}

/// `exp(coef / τ_n)` as an exp-polynomial factor. Needs `τ_n = a n^{-m}`
/// with a positive integer `m`.
fn exp_of_reciprocal_tau(tau: &ExpPolySeries, coef: f64) -> Result<ExpPolySeries> {
    if coef == 0.0 {
        return Ok(ExpPolySeries::power(1.0, 0.0));
    }
    let m = -tau.k;
    if !tau.q.is_empty() || m < 1.0 || m.fract() != 0.0 {
        return Err(Error::UnsupportedSchedule(format!(
            "exp(const/tau_n) needs tau_n = a n^(-m) with integer m >= 1, got c = {}, k = {}, q = {:?}",
            tau.c, tau.k, tau.q
        )));
    }
    Ok(ExpPolySeries::power(1.0, 0.0).with_exp_monomial(coef / tau.c, m as usize))
}

/// Assembles the series behind a condition and classifies it exactly.
pub fn evaluate_condition(
    schedule: &Schedule,
    id: ConditionId,
    params: &ConditionParams,
) -> Result<ConditionCertificate> {
    let d = params.d as f64;
    if params.d < 1 {
        return Err(Error::Dimension("condition needs d >= 1".into()));
    }
    let (lam, tau, gam) = (&schedule.lambda, &schedule.tau, &schedule.gamma);
    let series = match id {
        ConditionId::A => lam.clone(),
        ConditionId::B => {
            let r = need(params.r, "r", id)?;
            let p = need(params.p, "p", id)?;
            let b = need(params.b, "b", id)?;
            let t = need(params.t, "t", id)?;
            let growth = exp_of_reciprocal_tau(tau, (r - 1.0) * b * t)?;
            product_and_power(
                &[lam.clone(), tau.clone(), growth],
                &[1.0 - r + d / p, -1.0, 1.0],
            )?
        }
        ConditionId::BTilde => product_and_power(&[lam.clone(), tau.clone()], &[1.0, -1.0])?,
        ConditionId::BHat => {
            let p = need(params.p, "p", id)?;
            product_and_power(&[lam.clone(), tau.clone()], &[d / p, -1.0])?
        }
        ConditionId::C => {
            let sigma = need(params.sigma, "sigma", id)?;
            product_and_power(&[gam.clone(), lam.clone()], &[1.0, 0.5 * d - sigma])?
        }
        ConditionId::CTilde => gam.clone(),
        ConditionId::CHat => product_and_power(&[gam.clone(), lam.clone()], &[1.0, 0.5 * d])?,
        ConditionId::D => {
            let s = need(params.s, "s", id)?;
            let t = need(params.t, "t", id)?;
            let c = need(params.c, "c", id)?;
            if !(s > 0.0) || !(t >= 0.0) || !(c > 0.0) {
                return Err(Error::Domain(format!(
                    "condition D needs s > 0, t >= 0, c > 0 (s = {s}, t = {t}, c = {c})"
                )));
            }
            let growth = exp_of_reciprocal_tau(tau, 2.0 * s * c * t)?;
            product_and_power(&[gam.clone(), lam.clone(), growth], &[2.0, d - 2.0 * s, 1.0])?
        }
    };
    let cls = match id {
        ConditionId::BTilde | ConditionId::CTilde => classify_bounded(&series),
        _ => classify(&series),
    };
    Ok(ConditionCertificate {
        condition: id,
        verdict: cls.verdict,
        series,
        params: *params,
        reason: cls.reason,
        seed: None,
    })
}

/// Time `(σ - s)αT / (sc)` after which the Ḣˢ norm is infinite; 0 when
/// `s > σ`.
pub fn blowup_time(s: f64, sigma: f64, alpha: f64, c: f64, t_final: f64) -> Result<f64> {
    if !(s > 0.0) || !(c > 0.0) {
        return Err(Error::Domain(format!("need s > 0 and c > 0, got s = {s}, c = {c}")));
    }
    if s > sigma {
        return Ok(0.0);
    }
    Ok((sigma - s) * alpha * t_final / (s * c))
}

/// Partial sums `Σ_{n≤N} γ_n² λ_n^{d-2s} [C_s² e^{2sct/τ_n} - C_d Ĉ_0² / s]`
/// for `N = 1, …, big_n`, with `C_d = |S^{d-1}|`. Saturates to `+inf`.
pub fn hs_lower_bound_partial_sums(
    schedule: &Schedule,
    s: f64,
    t: f64,
    big_n: u64,
    constants: &MixerConstants,
    d: usize,
) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("need 0 < s < 1, got {s}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("need t >= 0, got {t}")));
    }
    if big_n < 1 {
        return Err(Error::Index("N must be at least 1".into()));
    }
    let cs = constants.c_s(s).ok_or_else(|| {
        Error::InvalidParameter(format!("mixer constants carry no C_s for s = {s}"))
    })?;
    let penalty = sphere_area(d) * constants.c0 * constants.c0 / s;
    let mut sums = Vec::with_capacity(big_n as usize);
    let mut acc = 0.0_f64;
    for n in 1..=big_n {
        let log_scale =
            2.0 * schedule.gamma.log_term(n) + (d as f64 - 2.0 * s) * schedule.lambda.log_term(n);
        let growth = 2.0 * s * constants.c * t / schedule.tau.term(n);
        let gain = log_scale + 2.0 * cs.ln() + growth;
        let term = if gain > 709.0 {
            f64::INFINITY
        } else {
            gain.exp() - (log_scale + penalty.ln()).exp()
        };
        acc += term;
        sums.push(acc);
    }
    Ok(sums)
}

/// Last of [`hs_lower_bound_partial_sums`].
pub fn hs_lower_bound_series(
    schedule: &Schedule,
    s: f64,
    t: f64,
    big_n: u64,
    constants: &MixerConstants,
    d: usize,
) -> Result<f64> {
    Ok(*hs_lower_bound_partial_sums(schedule, s, t, big_n, constants, d)?
        .last()
        .expect("N >= 1"))
}
