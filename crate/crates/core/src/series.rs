//! Exact convergence certificates for exp-polynomial series
//! `Σ_{n≥n₀} c · n^k · exp(q₁ n + q₂ n² + … + q_m n^m)`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Term family `c · n^k · exp(Σ_j q_j n^j)`; `q[0]` multiplies `n¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolySeries {
    pub c: f64,
    pub k: f64,
    pub q: Vec<f64>,
    pub n0: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Bounded,
    Unbounded,
}

impl Verdict {
    /// Convergent and bounded are the "finite" outcomes.
    pub fn is_finite(&self) -> bool {
        matches!(self, Verdict::Convergent | Verdict::Bounded)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Bounded => "bounded",
            Verdict::Unbounded => "unbounded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub reason: String,
}

impl ExpPolySeries {
    pub fn new(c: f64, k: f64, q: Vec<f64>, n0: u64) -> Self {
        let mut s = Self { c, k, q, n0 };
        s.trim();
        s
    }

    /// `c · n^k`.
    pub fn power(c: f64, k: f64) -> Self {
        Self::new(c, k, Vec::new(), 1)
    }

    /// `exp(rate · n)`.
    pub fn geometric(rate: f64) -> Self {
        Self::new(1.0, 0.0, vec![rate], 1)
    }

    fn trim(&mut self) {
        while self.q.last() == Some(&0.0) {
            self.q.pop();
        }
    }

    /// Degree and coefficient of the leading exponent monomial.
    pub fn leading(&self) -> Option<(usize, f64)> {
        self.q
            .iter()
            .enumerate()
            .rev()
            .find(|(_, a)| **a != 0.0)
            .map(|(j, a)| (j + 1, *a))
    }

    pub fn exponent_at(&self, n: f64) -> f64 {
        self.q
            .iter()
            .enumerate()
            .map(|(j, a)| a * n.powi(j as i32 + 1))
            .sum()
    }

    /// `ln |term(n)|`, `-inf` when `c = 0`.
    pub fn log_term(&self, n: u64) -> f64 {
        let nf = n as f64;
        self.c.abs().ln() + self.k * nf.ln() + self.exponent_at(nf)
    }

    pub fn term(&self, n: u64) -> f64 {
        self.c.signum() * self.log_term(n).exp()
    }

    /// Multiplies by `exp(coef · n^degree)`.
    pub fn with_exp_monomial(mut self, coef: f64, degree: usize) -> Self {
        assert!(degree >= 1, "constant exponent belongs in c");
        if self.q.len() < degree {
            self.q.resize(degree, 0.0);
        }
        self.q[degree - 1] += coef;
        self.trim();
        self
    }

    pub fn with_start(mut self, n0: u64) -> Self {
        self.n0 = n0;
        self
    }
}

/// Exact verdict on convergence of `Σ term(n)`.
pub fn classify(series: &ExpPolySeries) -> Classification {
    if series.c == 0.0 {
        return Classification {
            verdict: Verdict::Convergent,
            reason: "c = 0: every term vanishes".into(),
        };
    }
    match series.leading() {
        Some((m, a)) if a > 0.0 => Classification {
            verdict: Verdict::Divergent,
            reason: format!("leading exponent coefficient q_{m} = {a} > 0: terms grow without bound"),
        },
        Some((m, a)) => Classification {
            verdict: Verdict::Convergent,
            reason: format!(
                "leading exponent coefficient q_{m} = {a} < 0: terms decay faster than any power"
            ),
        },
        None if series.k < -1.0 => Classification {
            verdict: Verdict::Convergent,
            reason: format!("no exponential part and power k = {} < -1 (p-series)", series.k),
        },
        None => Classification {
            verdict: Verdict::Divergent,
            reason: format!(
                "no exponential part and power k = {} >= -1 (p-series)",
                series.k
            ),
        },
    }
}

/// Exact verdict on boundedness of the sequence `term(n)`.
pub fn classify_bounded(sequence: &ExpPolySeries) -> Classification {
    if sequence.c == 0.0 {
        return Classification {
            verdict: Verdict::Bounded,
            reason: "c = 0: identically zero".into(),
        };
    }
    match sequence.leading() {
        Some((m, a)) if a > 0.0 => Classification {
            verdict: Verdict::Unbounded,
            reason: format!("leading exponent coefficient q_{m} = {a} > 0"),
        },
        Some((m, a)) => Classification {
            verdict: Verdict::Bounded,
            reason: format!("leading exponent coefficient q_{m} = {a} < 0: terms tend to 0"),
        },
        None if sequence.k <= 0.0 => Classification {
            verdict: Verdict::Bounded,
            reason: format!("no exponential part and power k = {} <= 0", sequence.k),
        },
        None => Classification {
            verdict: Verdict::Unbounded,
            reason: format!("no exponential part and power k = {} > 0", sequence.k),
        },
    }
}

/// `ln` of the largest finite double; terms beyond this saturate.
const LOG_MAX: f64 = 709.782712893384;

/// `Σ_{n=n₀}^{N} term(n)` with compensated summation. Returns `+inf` (or
/// `-inf` for negative `c`) once a term or the running sum overflows.
pub fn partial_sum(series: &ExpPolySeries, big_n: u64) -> Result<f64> {
    if big_n < series.n0 {
        return Err(Error::Index(format!(
            "partial sum bound N = {big_n} is below the start index {}",
            series.n0
        )));
    }
    if series.c == 0.0 {
        return Ok(0.0);
    }
    let sign = series.c.signum();
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for n in series.n0..=big_n {
        let lt = series.log_term(n);
        if lt > LOG_MAX {
            return Ok(sign * f64::INFINITY);
        }
        let t = lt.exp();
        let next = sum + t;
        if next.is_infinite() {
            return Ok(sign * f64::INFINITY);
        }
        // Neumaier compensation.
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    Ok(sign * (sum + comp))
}

/// `Π_i s_i^{e_i}`: `c` multiplies with powers, `k` and `q` combine linearly.
pub fn product_and_power(series: &[ExpPolySeries], exponents: &[f64]) -> Result<ExpPolySeries> {
    if series.len() != exponents.len() {
        return Err(Error::InvalidParameter(format!(
            "{} series but {} exponents",
            series.len(),
            exponents.len()
        )));
    }
    let Some(first) = series.first() else {
        return Ok(ExpPolySeries::power(1.0, 0.0));
    };
    let n0 = first.n0;
    let mut c = 1.0;
    let mut k = 0.0;
    let mut q: Vec<f64> = Vec::new();
    for (s, &e) in series.iter().zip(exponents) {
        if s.n0 != n0 {
            return Err(Error::Alignment(n0, s.n0));
        }
        c *= if e == 1.0 { s.c } else { s.c.powf(e) };
        k += e * s.k;
        if q.len() < s.q.len() {
            q.resize(s.q.len(), 0.0);
        }
        for (acc, a) in q.iter_mut().zip(&s.q) {
            *acc += e * a;
        }
    }
    Ok(ExpPolySeries::new(c, k, q, n0))
}
