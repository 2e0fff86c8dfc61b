use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use regloss::field::Grid;
use regloss::mixing::{exact_solution_at, gronwall_lower_bound, MixerConstants, MixingExperiment};
use regloss::patchwork::{
    blowup_time, evaluate_condition, evaluate_truncated_solution, hs_lower_bound_partial_sums, hs_lower_bound_series,
    theorem1_schedule, theorem2_schedule, ConditionCertificate, ConditionId, ConditionParams,
    ConstructionParams, Schedule,
};
use regloss::series::Verdict;
use regloss::sobolev::{
    gagliardo_seminorm, hs_norm, hs_norms_of_fluctuation, orthogonality_lower_bound, PieceNorms,
};

use crate::config::{ExperimentConfig, Mode};
use crate::error::Result;

/// Smallest `r²` at which a seed counts as mixing exponentially.
pub const R2_THRESHOLD: f64 = 0.98;

/// One entry of `norms.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    pub order: f64,
    pub method: String,
    pub value: f64,
}

/// One entry of `sweep.csv`; unused columns stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub t: f64,
    pub n: Option<u64>,
    pub partial_sum: Option<f64>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub label: String,
    pub value: String,
    /// `None` for purely informative lines.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub mode: Mode,
    pub norms: Vec<NormRow>,
    pub certificates: Vec<ConditionCertificate>,
    pub sweep: Vec<SweepRow>,
    pub summary: Vec<SummaryLine>,
}

impl ReportBundle {
    pub fn empty(mode: Mode) -> Self {
        Self {
            mode,
            norms: Vec::new(),
            certificates: Vec::new(),
            sweep: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.iter().all(|l| l.pass != Some(false))
    }

    fn info(&mut self, label: impl Into<String>, value: impl Into<String>) {
        self.summary.push(SummaryLine {
            label: label.into(),
            value: value.into(),
            pass: None,
        });
    }

    fn verdict(&mut self, label: impl Into<String>, value: impl Into<String>, pass: bool) {
        self.summary.push(SummaryLine {
            label: label.into(),
            value: value.into(),
            pass: Some(pass),
        });
    }
}

fn g(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs the experiment selected by `config.mode`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportBundle> {
    config.validate()?;
    match config.mode {
        Mode::Mix => run_mix(config),
        Mode::Norms => run_norms(config),
        Mode::CertifyThm1 => run_theorem1(config),
        Mode::CertifyThm2 => run_theorem2(config),
        Mode::LowerBoundSweep => run_sweep(config),
        Mode::TruncatedSolution => run_solve(config),
    }
}

fn measured_constants(mixer: &MixingExperiment) -> Result<MixerConstants> {
    let run = mixer.run()?;
    run.constants.ok_or_else(|| {
        regloss::error::Error::Domain(format!(
            "seed {} does not mix; no rate constants available",
            mixer.protocol.seed
        ))
        .into()
    })
}

fn run_mix(config: &ExperimentConfig) -> Result<ReportBundle> {
    let mut out = ReportBundle::empty(Mode::Mix);
    let mut seeds = vec![config.mixer.protocol.seed];
    for &s in &config.extra_seeds {
        if !seeds.contains(&s) {
            seeds.push(s);
        }
    }
    for (i, &seed) in seeds.iter().enumerate() {
        let exp = config.mixer.clone().with_seed(seed);
        let run = exp.run()?;
        let rec = &run.record;
        if i == 0 {
            for (t, row) in rec.times.iter().zip(&rec.norms) {
                for (s, v) in rec.orders.iter().zip(row) {
                    out.norms.push(NormRow {
                        t: *t,
                        order: *s,
                        method: "multiplier".into(),
                        value: *v,
                    });
                }
            }
        }
        for &order in &rec.orders {
            let series = rec.series(order).expect("order from the record");
            if series.iter().any(|v| !(*v > 0.0)) {
                out.info(format!("seed {seed} order {order} rate"), "undefined (zero norm)");
                continue;
            }
            let fit = regloss::mixing::fit_exponential_rate(&rec.times, &series)?;
            out.info(
                format!("seed {seed} order {order} rate"),
                format!("{} (r2 {})", g(fit.rate), g(fit.r_squared)),
            );
        }
        if let Some(fit) = run.h_minus_one {
            out.verdict(
                format!("seed {seed} exponential H^-1 decay (r2 >= {R2_THRESHOLD})"),
                format!("rate {}, r2 {}", g(fit.rate), g(fit.r_squared)),
                fit.rate < 0.0 && fit.r_squared >= R2_THRESHOLD,
            );
        }
        if let Some(l2) = rec.series(0.0) {
            let drift = l2.iter().map(|v| (v / l2[0] - 1.0).abs()).fold(0.0, f64::max);
            out.verdict(format!("seed {seed} L2 drift <= 1e-3"), g(drift), drift <= 1e-3);
        }
        if let (Some(l2), Some(neg), Some(pos)) =
            (rec.series(0.0), rec.series(-1.0), rec.series(1.0))
        {
            let mut gap = f64::INFINITY;
            for k in 0..l2.len() {
                let lb = gronwall_lower_bound(l2[k], neg[k])?;
                gap = gap.min((pos[k] - lb) / lb);
            }
            out.verdict(
                format!("seed {seed} H^1 above l2^2/H^-1 at every sample"),
                format!("min relative gap {}", g(gap)),
                gap >= -1e-9,
            );
        }
        if let Some(k) = &run.constants {
            out.info(
                format!("seed {seed} constants"),
                format!(
                    "b {}, c {}, C0 {}, window [{}, {}]",
                    g(k.b),
                    g(k.c),
                    g(k.c0),
                    g(k.window.0),
                    g(k.window.1)
                ),
            );
            for o in &k.c_hat {
                out.info(format!("seed {seed} C_hat_{}", o.order), g(o.value));
            }
            for o in &k.b_r {
                out.info(format!("seed {seed} B_{}", o.order), g(o.value));
            }
        } else {
            out.info(format!("seed {seed} constants"), "none (no decay)");
        }
    }
    Ok(out)
}

fn run_norms(config: &ExperimentConfig) -> Result<ReportBundle> {
    let mut out = ReportBundle::empty(Mode::Norms);
    let exp = &config.mixer;
    let flow = exp.flow()?;
    let rho0 = exp.datum()?;
    let orders = &config.norms.orders;
    let times = flow.step_times();
    let gagliardo = exp.grid_points <= config.norms.gagliardo_max_points && exp.protocol.dim == 2;
    let rows: Vec<Vec<NormRow>> = times
        .par_iter()
        .map(|&t| {
            let rho = exact_solution_at(&rho0, &flow, t)?;
            let mut rows: Vec<NormRow> = hs_norms_of_fluctuation(&rho, orders)
                .into_iter()
                .map(|n| NormRow {
                    t,
                    order: n.index.s,
                    method: "multiplier".into(),
                    value: n.value,
                })
                .collect();
            if gagliardo {
                for &s in orders.iter().filter(|s| **s > 0.0 && **s < 1.0) {
                    rows.push(NormRow {
                        t,
                        order: s,
                        method: "gagliardo".into(),
                        value: gagliardo_seminorm(&rho, s)?.value,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let norms: Vec<NormRow> = rows.into_iter().flatten().collect();
    let lookup = |t: f64, s: f64, m: &str| {
        norms
            .iter()
            .find(|r| r.t == t && r.order == s && r.method == m)
            .map(|r| r.value)
    };
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for &t in &times {
        let Some(l2) = lookup(t, 0.0, "multiplier") else { continue };
        for &s in orders.iter().filter(|s| **s > 0.0) {
            if let (Some(p), Some(n)) = (lookup(t, s, "multiplier"), lookup(t, -s, "multiplier")) {
                worst = worst.min((p * n - l2 * l2) / (l2 * l2));
                checked += 1;
            }
        }
    }
    if checked > 0 {
        out.verdict(
            "H^s x H^-s >= L2^2 at every sample",
            format!("{checked} checks, min relative gap {}", g(worst)),
            worst >= -1e-9,
        );
    }
    if gagliardo {
        for &s in orders.iter().filter(|s| **s > 0.0 && **s < 1.0) {
            let ratios: Vec<f64> = times
                .iter()
                .filter_map(|&t| Some(lookup(t, s, "gagliardo")? / lookup(t, s, "multiplier")?))
                .collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0, f64::max);
            out.info(format!("gagliardo/multiplier ratio at s = {s}"), format!("[{}, {}]", g(lo), g(hi)));
        }
    }
    out.norms = norms;
    Ok(out)
}

fn push_certificate(
    out: &mut ReportBundle,
    schedule: &Schedule,
    id: ConditionId,
    params: ConditionParams,
    seed: Option<u64>,
) -> Result<bool> {
    let mut cert = evaluate_condition(schedule, id, &params)?;
    cert.seed = seed;
    let holds = cert.holds();
    out.certificates.push(cert);
    Ok(holds)
}

fn rate_c(explicit: Option<f64>, mixer: &MixingExperiment) -> Result<(f64, Option<MixerConstants>)> {
    match explicit {
        Some(c) => Ok((c, None)),
        None => {
            let k = measured_constants(mixer)?;
            Ok((k.c, Some(k)))
        }
    }
}

fn run_theorem1(config: &ExperimentConfig) -> Result<ReportBundle> {
    let mut out = ReportBundle::empty(Mode::CertifyThm1);
    let cfg = &config.theorem1;
    let (c, measured) = rate_c(cfg.c, &config.mixer)?;
    let seed = measured.as_ref().map(|k| k.seed).unwrap_or(None);
    out.info("c", format!("{} ({})", g(c), if measured.is_some() { "measured" } else { "given" }));
    if let Some(s) = seed {
        out.info("mixer seed", s.to_string());
    }
    let sch = theorem1_schedule();
    let tally = |out: &mut ReportBundle, d: usize, id: ConditionId, holds: Vec<bool>| {
        let ok = holds.iter().filter(|h| **h).count();
        out.verdict(
            format!("d = {d}: condition {id}"),
            format!("{ok} of {} certified", holds.len()),
            ok == holds.len(),
        );
    };
    for &d in &cfg.dims {
        let p0 = ConditionParams::new(d);
        let mut h = Vec::new();
        h.push(push_certificate(&mut out, &sch, ConditionId::A, p0, seed)?);
        tally(&mut out, d, ConditionId::A, std::mem::take(&mut h));
        for &p in &cfg.p_values {
            h.push(push_certificate(&mut out, &sch, ConditionId::BHat, p0.p(p), seed)?);
        }
        tally(&mut out, d, ConditionId::BHat, std::mem::take(&mut h));
        h.push(push_certificate(&mut out, &sch, ConditionId::BTilde, p0, seed)?);
        tally(&mut out, d, ConditionId::BTilde, std::mem::take(&mut h));
        for &sigma in &cfg.sigma_values {
            h.push(push_certificate(&mut out, &sch, ConditionId::C, p0.sigma(sigma), seed)?);
        }
        tally(&mut out, d, ConditionId::C, std::mem::take(&mut h));
        h.push(push_certificate(&mut out, &sch, ConditionId::CTilde, p0, seed)?);
        tally(&mut out, d, ConditionId::CTilde, std::mem::take(&mut h));
        for &s in &cfg.s_grid {
            for &t in &cfg.t_grid {
                let holds = push_certificate(&mut out, &sch, ConditionId::D, p0.s(s).t(t).c(c), seed)?;
                // At t = 0 the datum is smooth and (D) converges.
                h.push(if t > 0.0 { holds } else { !holds });
                let verdict = out.certificates.last().map(|c| c.verdict);
                out.sweep.push(SweepRow {
                    s,
                    t,
                    n: None,
                    partial_sum: None,
                    verdict,
                });
            }
        }
        tally(&mut out, d, ConditionId::D, std::mem::take(&mut h));
    }
    Ok(out)
}

fn run_theorem2(config: &ExperimentConfig) -> Result<ReportBundle> {
    let mut out = ReportBundle::empty(Mode::CertifyThm2);
    let cfg = &config.theorem2;
    let (c, measured) = rate_c(cfg.c, &config.mixer)?;
    let b = cfg.b.unwrap_or(c);
    let seed = measured.as_ref().map(|k| k.seed).unwrap_or(None);
    let mut params = ConstructionParams::new(cfg.d, cfg.r, cfg.p, cfg.sigma, cfg.t_final, b, c)?;
    if let Some(alpha) = cfg.alpha {
        params = params.with_alpha(alpha, b)?;
    }
    out.info("b", g(b));
    out.info("c", format!("{} ({})", g(c), if measured.is_some() { "measured" } else { "given" }));
    if let Some(s) = seed {
        out.info("mixer seed", s.to_string());
    }
    out.info("beta", g(params.beta));
    out.info("mu_bar", g(params.mu_bar));
    out.info("alpha", g(params.alpha));
    let threshold = params.blowup_threshold(c);
    out.info("blow-up threshold alpha/(alpha+c)", g(threshold));
    let sch = theorem2_schedule(&params, b, c)?;
    let d = cfg.d;
    let p0 = ConditionParams::new(d);
    let t_final = cfg.t_final;
    let fixed = [
        (ConditionId::A, p0),
        (ConditionId::B, p0.r(cfg.r).p(cfg.p).b(b).t(t_final)),
        (ConditionId::BTilde, p0),
        (ConditionId::C, p0.sigma(cfg.sigma)),
        (ConditionId::CHat, p0),
    ];
    for (id, p) in fixed {
        let holds = push_certificate(&mut out, &sch, id, p, seed)?;
        out.verdict(format!("condition {id}"), if holds { "certified" } else { "not certified" }, holds);
    }
    let n = cfg.s_samples;
    let mut disagree = 0;
    let mut literal = 0;
    for i in 1..=n {
        let s = cfg.sigma * i as f64 / (n + 1) as f64;
        push_certificate(&mut out, &sch, ConditionId::D, p0.s(s).t(t_final).c(c), seed)?;
        let verdict = out.certificates.last().map(|c| c.verdict);
        let diverges = verdict == Some(Verdict::Divergent);
        let early = blowup_time(s, cfg.sigma, params.alpha, c, t_final)? < t_final;
        if diverges != early || diverges != (s / cfg.sigma > threshold) {
            disagree += 1;
        }
        if diverges != (s / cfg.sigma > params.mu_bar) {
            literal += 1;
        }
        out.sweep.push(SweepRow {
            s,
            t: t_final,
            n: None,
            partial_sum: None,
            verdict,
        });
    }
    out.verdict(
        "condition D at T vs blowup_time vs threshold",
        format!("{disagree} disagreements over {n} values of s"),
        disagree == 0,
    );
    out.info(
        "condition D at T vs s/sigma > mu_bar",
        format!("{literal} disagreements (mu_bar is the limit of the threshold as alpha decreases to its lower bound)"),
    );
    Ok(out)
}

fn run_sweep(config: &ExperimentConfig) -> Result<ReportBundle> {
    let mut out = ReportBundle::empty(Mode::LowerBoundSweep);
    let cfg = &config.sweep;
    let mut mixer = config.mixer.clone();
    for s in cfg.s_grid.iter().map(|s| -s).chain([0.0, -mixer.s_ref]) {
        if !mixer.orders.contains(&s) {
            mixer.orders.push(s);
        }
    }
    let k = measured_constants(&mixer)?;
    out.info(
        "constants",
        format!("c {}, C0 {}, seed {:?}", g(k.c), g(k.c0), k.seed),
    );
    let sch = theorem1_schedule();
    let cells: Vec<(f64, f64)> = cfg
        .s_grid
        .iter()
        .flat_map(|&s| cfg.t_grid.iter().map(move |&t| (s, t)))
        .collect();
    let sums: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(s, t)| hs_lower_bound_partial_sums(&sch, s, t, cfg.n_max, &k, cfg.d))
        .collect::<regloss::error::Result<_>>()?;
    for ((s, t), partial) in cells.iter().zip(&sums) {
        for (i, v) in partial.iter().enumerate() {
            out.sweep.push(SweepRow {
                s: *s,
                t: *t,
                n: Some(i as u64 + 1),
                partial_sum: Some(*v),
                verdict: None,
            });
        }
        let monotone = partial.windows(2).all(|w| w[1] >= w[0]);
        let first = partial.iter().position(|v| *v > cfg.threshold).map(|i| i + 1);
        let label = format!("s = {s}, t = {t}");
        if *t > 0.0 {
            out.verdict(
                format!("{label}: monotone and exceeds {:e}", cfg.threshold),
                match first {
                    Some(n) => format!("monotone {monotone}, first N = {n}"),
                    None => format!("monotone {monotone}, not exceeded up to N = {}", cfg.n_max),
                },
                monotone && first.is_some(),
            );
        } else {
            out.info(
                format!("{label}: partial sum at N = {}", cfg.n_max),
                g(*partial.last().expect("n_max >= 1")),
            );
        }
    }
    Ok(out)
}

fn run_solve(config: &ExperimentConfig) -> Result<ReportBundle> {
    let mut out = ReportBundle::empty(Mode::TruncatedSolution);
    let cfg = &config.solve;
    let sch = theorem1_schedule();
    let (flow, datum) = cfg.base.build()?;
    let constants = cfg.base.measure_constants(cfg.s)?;
    out.info(
        "base pair constants",
        format!("c {}, C0 {}, C_hat {}", g(constants.c), g(constants.c0), g(constants.c_hat[0].value)),
    );
    let window = sch.container()?;
    let grid = Grid::new(flow.dim, cfg.grid_points, window.side)?;
    let d = flow.dim;
    for &t in &cfg.times {
        let sol = evaluate_truncated_solution(&sch, &flow, &datum, cfg.pieces, t, &window, &grid)?;
        let mut disjoint = true;
        for i in 0..sol.pieces.len() {
            for j in i + 1..sol.pieces.len() {
                let prod = sol.pieces[i].field.product(&sol.pieces[j].field)?;
                disjoint &= prod.values().iter().all(|v| *v == 0.0);
            }
        }
        let pieces: Vec<PieceNorms> = sol
            .pieces
            .iter()
            .map(|p| {
                let sup = p.field.support();
                let half = 1.5 * p.spec.lambda;
                let lam = (0..d)
                    .map(|i| {
                        let c = p.spec.center[i] - window.center[i];
                        (sup.lo[i] - (c - half)).min(c + half - sup.hi[i])
                    })
                    .fold(f64::INFINITY, f64::min);
                PieceNorms {
                    hs_sq: hs_norm(&p.field, cfg.s).value.powi(2),
                    l2_sq: p.field.l2_norm().powi(2),
                    lam,
                }
            })
            .collect();
        let bound = orthogonality_lower_bound(&pieces, cfg.s, d)?;
        let direct = hs_norm(&sol.total, cfg.s).value;
        out.norms.push(NormRow {
            t,
            order: cfg.s,
            method: "multiplier".into(),
            value: direct,
        });
        out.norms.push(NormRow {
            t,
            order: cfg.s,
            method: "orthogonality-bound-squared".into(),
            value: bound,
        });
        out.verdict(
            format!("t = {t}: pieces disjoint"),
            format!("{} pieces", sol.pieces.len()),
            disjoint,
        );
        let series = hs_lower_bound_series(&sch, cfg.s, t, cfg.pieces, &constants, d)?;
        out.norms.push(NormRow {
            t,
            order: cfg.s,
            method: "series-bound-squared".into(),
            value: series,
        });
        out.verdict(
            format!("t = {t}: |theta_N|^2 >= orthogonality bound >= series bound"),
            format!("{} >= {} >= {}", g(direct * direct), g(bound), g(series)),
            direct * direct >= bound && bound >= series,
        );
    }
    Ok(out)
}
