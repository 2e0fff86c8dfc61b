use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Cube;
use crate::series::{classify, ExpPolySeries, Verdict};

/// Parameters of the finite-regularity construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub d: usize,
    pub r: f64,
    pub p: f64,
    pub sigma: f64,
    pub t_final: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu_bar: f64,
}

impl ConstructionParams {
    /// Derives `β = 1 - r + d/p`, the default `α = 2(r-1)b/β` and
    /// `μ̄ = 1 - cβ/(cβ + (r-1)b)` from the mixer rates `b`, `c`.
    pub fn new(d: usize, r: f64, p: f64, sigma: f64, t_final: f64, b: f64, c: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Dimension(format!("construction needs d >= 2, got {d}")));
        }
        if !(r >= 1.0) || !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need r >= 1 and 1 < p < inf, got r = {r}, p = {p}"
            )));
        }
        if !(sigma >= 0.0) || !(t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need sigma >= 0 and T > 0, got sigma = {sigma}, T = {t_final}"
            )));
        }
        if !(b > 0.0 && c > 0.0) {
            return Err(Error::Domain(format!("rates must be positive, got b = {b}, c = {c}")));
        }
        let beta = 1.0 - r + d as f64 / p;
        if r > 1.0 && p >= d as f64 / (r - 1.0) {
            return Err(Error::LipschitzEmbedding {
                p,
                bound: d as f64 / (r - 1.0),
            });
        }
        let growth = (r - 1.0) * b;
        let mu_bar = 1.0 / (1.0 + c * beta / growth);
        let params = Self {
            d,
            r,
            p,
            sigma,
            t_final,
            alpha: 2.0 * growth / beta,
            beta,
            mu_bar,
        };
        if params.alpha > 0.0 {
            Ok(params)
        } else {
            Err(Error::InvalidParameter(
                "default alpha vanishes for r = 1; supply one with with_alpha".into(),
            ))
        }
    }

    /// Replaces `α`, which must exceed `(r-1)b/β`.
    pub fn with_alpha(mut self, alpha: f64, b: f64) -> Result<Self> {
        let bound = self.alpha_lower_bound(b);
        if !(alpha > bound && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must exceed (r-1)b/beta = {bound}"
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn alpha_lower_bound(&self, b: f64) -> f64 {
        (self.r - 1.0) * b / self.beta
    }

    /// Ratio `s/σ` above which the chosen `α` produces blow-up before `T`:
    /// `α / (α + c)`. It tends to `μ̄` as `α` decreases to its lower bound.
    pub fn blowup_threshold(&self, c: f64) -> f64 {
        self.alpha / (self.alpha + c)
    }
}

/// Scale, time and amplitude sequences of the patchwork, with the cubes
/// laid along one axis toward an accumulation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub lambda: ExpPolySeries,
    pub tau: ExpPolySeries,
    pub gamma: ExpPolySeries,
    pub accumulation_point: Vec<f64>,
    pub axis: usize,
    pub params: Option<ConstructionParams>,
}

/// Rescale-and-translate recipe for one piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub n: u64,
    pub lambda: f64,
    pub tau: f64,
    pub gamma: f64,
    pub center: Vec<f64>,
}

impl PieceSpec {
    /// The cube `Q_n` of side `3λ_n`.
    pub fn cube(&self) -> Cube {
        Cube {
            center: self.center.clone(),
            side: 3.0 * self.lambda,
        }
    }

    /// Cube of side `λ_n` holding the support of `ρ_n`.
    pub fn support_cube(&self) -> Cube {
        Cube {
            center: self.center.clone(),
            side: self.lambda,
        }
    }

    /// `(λ/τ) ‖u‖_∞`.
    pub fn velocity_sup(&self, base_sup: f64) -> f64 {
        self.lambda / self.tau * base_sup
    }

    /// `γ ‖ρ̄‖_∞`.
    pub fn datum_sup(&self, base_sup: f64) -> f64 {
        self.gamma * base_sup
    }

    /// Maps a physical point to the base pair's coordinates.
    pub fn to_base(&self, x: &[f64], out: &mut [f64]) {
        for ((o, xi), c) in out.iter_mut().zip(x).zip(&self.center) {
            *o = (xi - c) / self.lambda;
        }
    }
}

impl Schedule {
    pub fn new(
        lambda: ExpPolySeries,
        tau: ExpPolySeries,
        gamma: ExpPolySeries,
        accumulation_point: Vec<f64>,
    ) -> Result<Self> {
        for (name, s) in [("lambda", &lambda), ("tau", &tau), ("gamma", &gamma)] {
            if !(s.c > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must have a positive coefficient"
                )));
            }
        }
        if lambda.n0 != 1 || tau.n0 != 1 || gamma.n0 != 1 {
            return Err(Error::Alignment(1, lambda.n0.max(tau.n0).max(gamma.n0)));
        }
        if accumulation_point.is_empty() {
            return Err(Error::Dimension("accumulation point has no coordinates".into()));
        }
        Ok(Self {
            lambda,
            tau,
            gamma,
            accumulation_point,
            axis: 0,
            params: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.accumulation_point.len()
    }

    pub fn with_accumulation_point(mut self, point: Vec<f64>) -> Self {
        self.accumulation_point = point;
        self
    }

    /// `(λ_n, τ_n, γ_n)`.
    pub fn at(&self, n: u64) -> (f64, f64, f64) {
        (self.lambda.term(n), self.tau.term(n), self.gamma.term(n))
    }

    fn check_placement(&self) -> Result<()> {
        let v = classify(&self.lambda);
        if v.verdict == Verdict::Divergent {
            return Err(Error::InfeasiblePlacement(format!(
                "sum of lambda_n diverges ({})",
                v.reason
            )));
        }
        Ok(())
    }

    /// Offset of the center of `Q_n` from the accumulation point along the
    /// placement axis: `6 Σ_{m>n} λ_m + 1.5 λ_n`. Consecutive cubes are
    /// separated by gaps of `3λ_{n+1}`.
    fn offsets(&self, big_n: u64) -> Result<Vec<f64>> {
        self.check_placement()?;
        let tails = tail_sums(&self.lambda, big_n);
        Ok((1..=big_n)
            .map(|n| 6.0 * tails[n as usize] + 1.5 * self.lambda.term(n))
            .collect())
    }

    fn center_at(&self, offset: f64) -> Vec<f64> {
        let mut c = self.accumulation_point.clone();
        c[self.axis] += offset;
        c
    }

    /// A fixed cube containing every `Q_n`.
    pub fn container(&self) -> Result<Cube> {
        self.check_placement()?;
        let total = tail_sums(&self.lambda, 0)[0];
        let lam_max = (1..=64).map(|n| self.lambda.term(n)).fold(0.0, f64::max);
        let side = (6.0 * total).max(3.0 * lam_max) * (1.0 + 1e-12);
        Ok(Cube {
            center: self.center_at(3.0 * total),
            side,
        })
    }
}

/// `Σ_{m>n} a_m` for `n = 0..=big_n`, summed backward from a cutoff
/// where further terms are negligible. Power-law tails get an integral
/// remainder.
fn tail_sums(a: &ExpPolySeries, big_n: u64) -> Vec<f64> {
    const CAP: u64 = 2_000_000;
    let mut terms: Vec<f64> = Vec::new();
    let mut running = 0.0;
    let mut m = 1u64;
    loop {
        let t = a.term(m);
        terms.push(t);
        running += t;
        let negligible = t <= 1e-18 * running && a.log_term(m + 1) < a.log_term(m);
        if (m > big_n && negligible) || m >= CAP {
            break;
        }
        m += 1;
    }
    let last = terms.len() as f64;
    let remainder = if a.leading().is_none() && a.k < -1.0 {
        a.c * last.powf(a.k + 1.0) / (-a.k - 1.0)
    } else {
        0.0
    };
    let mut tails = vec![0.0; terms.len() + 1];
    tails[terms.len()] = remainder;
    for i in (0..terms.len()).rev() {
        tails[i] = tails[i + 1] + terms[i];
    }
    tails.truncate(big_n as usize + 1);
    // tails[i] is Σ_{m>i}.
    tails
}

/// `τ_n = n^{-3}`, `λ_n = e^{-n}`, `γ_n = e^{-n²}` in the plane.
pub fn theorem1_schedule() -> Schedule {
    Schedule::new(
        ExpPolySeries::geometric(-1.0),
        ExpPolySeries::power(1.0, -3.0),
        ExpPolySeries::new(1.0, 0.0, vec![0.0, -1.0], 1),
        vec![0.0, 0.0],
    )
    .expect("fixed schedule is valid")
}

/// `τ_n = 1/n`, `λ_n = e^{-αTn}`, `γ_n = n^{-2} e^{α(d/2 - σ)Tn}`.
pub fn theorem2_schedule(params: &ConstructionParams, b: f64, c: f64) -> Result<Schedule> {
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("rates must be positive, got b = {b}, c = {c}")));
    }
    let bound = params.alpha_lower_bound(b);
    if !(params.alpha > bound) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {} must exceed (r-1)b/beta = {bound}",
            params.alpha
        )));
    }
    let at = params.alpha * params.t_final;
    let mut s = Schedule::new(
        ExpPolySeries::geometric(-at),
        ExpPolySeries::power(1.0, -1.0),
        ExpPolySeries::new(1.0, -2.0, vec![at * (0.5 * params.d as f64 - params.sigma)], 1),
        vec![0.0; params.d],
    )?;
    s.params = Some(*params);
    Ok(s)
}

/// The `n`-th piece of the patchwork.
pub fn make_piece(schedule: &Schedule, n: u64) -> Result<PieceSpec> {
    if n < 1 {
        return Err(Error::Index("pieces are numbered from 1".into()));
    }
    let offset = *schedule.offsets(n)?.last().expect("n >= 1");
    let (lambda, tau, gamma) = schedule.at(n);
    Ok(PieceSpec {
        n,
        lambda,
        tau,
        gamma,
        center: schedule.center_at(offset),
    })
}

/// The cubes `Q_1, …, Q_N`.
pub fn place_cubes(schedule: &Schedule, big_n: u64) -> Result<Vec<Cube>> {
    let offsets = schedule.offsets(big_n)?;
    Ok(offsets
        .iter()
        .enumerate()
        .map(|(i, &o)| Cube {
            center: schedule.center_at(o),
            side: 3.0 * schedule.lambda.term(i as u64 + 1),
        })
        .collect())
}
