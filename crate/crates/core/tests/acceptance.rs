mod common;

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use regloss::field::{make_bump, make_modulated_bump, Cube, Grid, ScalarField, SupportBox};
use regloss::mixing::{
    advect_semi_lagrangian, exact_solution_at, gronwall_lower_bound, MixerConstants,
    MixingExperiment, MixingRun,
};
use regloss::patchwork::{
    blowup_time, evaluate_condition, evaluate_truncated_solution, hs_lower_bound_partial_sums,
    hs_lower_bound_series,
    theorem1_schedule, theorem2_schedule, BasePair, ConditionId, ConditionParams,
    ConstructionParams,
};
use regloss::series::{classify, Verdict};
use regloss::sobolev::{
    gagliardo_seminorm, gagliardo_seminorm_on, hs_norm, interpolation_bound,
    orthogonality_lower_bound, rescaled_norm, sphere_area, PieceNorms,
};

use common::{field_corpus, numeric_verdict, rel_l2_diff, series_corpus};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = Result<Outcome, String>;

fn outcome(pass: bool, detail: String) -> Check {
    Ok(Outcome { pass, detail })
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn c1_single_mode() -> Check {
    let start = Instant::now();
    let g = Grid::unit(2, 256).map_err(e)?;
    let f = ScalarField::from_fn(g, SupportBox::whole(&g), |x| (TAU * x[0]).sin()).map_err(e)?;
    let mut worst: f64 = 0.0;
    for s in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let want = TAU.powf(s) / 2f64.sqrt();
        worst = worst.max((hs_norm(&f, s).value - want).abs() / want);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-10 && secs < 1.0,
        format!("max rel err {worst:.2e}, {secs:.3} s"),
    )
}

fn rescale_errors(m: usize) -> Result<Vec<f64>, String> {
    let g = Grid::unit(2, m).map_err(e)?;
    let base = make_modulated_bump(&g, &[0.0, 0.0], 0.1, 1.0, 0, 1).map_err(e)?;
    let half = make_modulated_bump(&g, &[0.0, 0.0], 0.05, 1.0, 0, 2).map_err(e)?;
    [0.25, 0.5, 0.75]
        .iter()
        .map(|&s| {
            let pred = rescaled_norm(&hs_norm(&base, s), 0.5, 2).map_err(e)?.value;
            Ok((hs_norm(&half, s).value - pred).abs() / pred)
        })
        .collect()
}

fn c2_scaling() -> Check {
    let e256 = rescale_errors(256)?;
    let e512 = rescale_errors(512)?;
    let ok = e256.iter().all(|v| *v <= 1e-3) && e256.iter().zip(&e512).all(|(a, b)| b < a);
    outcome(
        ok,
        format!("rel err M=256 [{}], M=512 [{}]", sci(&e256), sci(&e512)),
    )
}

const TRIPLES: [(f64, f64, f64); 10] = [
    (-1.0, 0.0, 1.0),
    (-1.0, -0.5, 0.0),
    (-0.5, 0.25, 1.0),
    (0.0, 0.5, 1.0),
    (0.0, 1.0, 2.0),
    (0.25, 0.5, 0.75),
    (-1.0, 0.5, 2.0),
    (0.5, 1.5, 2.0),
    (-0.75, -0.25, 0.5),
    (1.0, 1.25, 2.0),
];

fn c3_interpolation() -> Check {
    let g = Grid::unit(2, 64).map_err(e)?;
    let corpus = field_corpus(&g, 3, 20);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for f in &corpus {
        for &(s1, s, s2) in &TRIPLES {
            let bound = interpolation_bound(&hs_norm(f, s1), &hs_norm(f, s2), s).map_err(e)?;
            let direct = hs_norm(f, s).value;
            if direct > bound * (1.0 + 1e-10) {
                violations += 1;
            }
            min_slack = min_slack.min((bound - direct) / bound);
        }
    }
    let mut worst_eq: f64 = 0.0;
    for k in 1..=3 {
        let f = ScalarField::from_fn(g, SupportBox::whole(&g), |x| {
            (TAU * k as f64 * x[1] + 0.3).sin()
        })
        .map_err(e)?;
        for &(s1, s, s2) in &TRIPLES {
            let bound = interpolation_bound(&hs_norm(&f, s1), &hs_norm(&f, s2), s).map_err(e)?;
            let direct = hs_norm(&f, s).value;
            worst_eq = worst_eq.max((bound - direct).abs() / direct);
        }
    }
    outcome(
        violations == 0 && worst_eq <= 1e-12,
        format!(
            "{violations} violations over {} checks (min rel slack {min_slack:.2e}), single-mode equality err {worst_eq:.2e}",
            corpus.len() * TRIPLES.len()
        ),
    )
}

fn c4_orthogonality() -> Check {
    let g = Grid::unit(2, 64).map_err(e)?;
    let r = 0.1;
    let centers = [[-0.25, -0.25], [0.25, 0.25]];
    let f: Vec<ScalarField> = centers
        .iter()
        .map(|c| make_bump(&g, c, r, 1.0))
        .collect::<regloss::error::Result<_>>()
        .map_err(e)?;
    let sum = f[0].add(&f[1]).map_err(e)?;
    // Private regions: disjoint cubes of side 1/2 around each bump.
    let lam = 0.25 - r;
    let mut ok = true;
    let mut notes = Vec::new();
    for s in [0.25, 0.5, 0.75] {
        let pieces: Vec<PieceNorms> = f
            .iter()
            .map(|fi| PieceNorms {
                hs_sq: hs_norm(fi, s).value.powi(2),
                l2_sq: fi.l2_norm().powi(2),
                lam,
            })
            .collect();
        let bound = orthogonality_lower_bound(&pieces, s, 2).map_err(e)?;
        let direct = hs_norm(&sum, s).value.powi(2);
        let gpieces: Vec<PieceNorms> = f
            .iter()
            .zip(&pieces)
            .map(|(fi, p)| Ok(PieceNorms { hs_sq: gagliardo_seminorm(fi, s)?.value.powi(2), ..*p }))
            .collect::<regloss::error::Result<_>>()
            .map_err(e)?;
        let gbound = orthogonality_lower_bound(&gpieces, s, 2).map_err(e)?;
        let gdirect = gagliardo_seminorm(&sum, s).map_err(e)?.value.powi(2);
        // Single piece localized to its private cube.
        let region = Cube::new(centers[0].to_vec(), 0.5).map_err(e)?;
        let full = gagliardo_seminorm(&f[0], s).map_err(e)?.value.powi(2);
        let local = gagliardo_seminorm_on(&f[0], s, &region).map_err(e)?.value.powi(2);
        let loc_rhs = local + sphere_area(2) / s * lam.powf(-2.0 * s) * f[0].l2_norm().powi(2);
        ok &= direct >= bound && gdirect >= gbound && full <= loc_rhs;
        notes.push(format!(
            "s={s}: {direct:.3e}>={bound:.3e}, gag {gdirect:.3e}>={gbound:.3e}, loc {full:.3e}<={loc_rhs:.3e}"
        ));
    }
    outcome(ok, notes.join("; "))
}

fn c5_conservation(run: &MixingRun, exp: &MixingExperiment) -> Check {
    let l2 = run.record.series(0.0).ok_or("record lacks order 0")?;
    let exact_drift = l2.iter().map(|v| (v / l2[0] - 1.0).abs()).fold(0.0, f64::max);
    let flow = exp.flow().map_err(e)?;
    let rho0 = exp.datum().map_err(e)?;
    let dt = 1e-3;
    let steps = (flow.span() / dt).round() as usize;
    let sl = advect_semi_lagrangian(&rho0, &flow, dt, steps).map_err(e)?;
    let sl_drift = (sl.l2_norm() / rho0.l2_norm() - 1.0).abs();
    let exact_end = exact_solution_at(&rho0, &flow, flow.span()).map_err(e)?;
    let sl_vs_exact = rel_l2_diff(&sl, &exact_end);
    let step = flow.steps[0].duration;
    let one_sl = advect_semi_lagrangian(&rho0, &flow, dt, (step / dt).round() as usize).map_err(e)?;
    let one_exact = exact_solution_at(&rho0, &flow, step).map_err(e)?;
    let single = rel_l2_diff(&one_sl, &one_exact);
    outcome(
        exact_drift <= 1e-3 && sl_drift < 1e-2 && single < 1e-4,
        format!(
            "exact L2 drift {exact_drift:.2e}, semi-Lagrangian drift {sl_drift:.2e} \
             (vs exact {sl_vs_exact:.2e}), single step {single:.2e}"
        ),
    )
}

fn c6_mixing(run: &MixingRun) -> Check {
    let fit = run.h_minus_one.ok_or("no H^-1 fit")?;
    let l2 = run.record.series(0.0).ok_or("no L2")?;
    let neg = run.record.series(-1.0).ok_or("no H^-1")?;
    let pos = run.record.series(1.0).ok_or("no H^1")?;
    let mut worst = f64::INFINITY;
    for i in 0..l2.len() {
        let lb = gronwall_lower_bound(l2[i], neg[i]).map_err(e)?;
        worst = worst.min((pos[i] - lb) / lb);
    }
    let k = run.constants.as_ref().ok_or("no mixer constants")?;
    outcome(
        fit.r_squared >= 0.98 && fit.rate < 0.0 && worst >= -1e-9,
        format!(
            "H^-1 rate {:.4}, r2 {:.4}, min rel gap H^1 vs bound {worst:.2e}; fitted c {:.4}, b {:.4}, seed {:?}",
            fit.rate, fit.r_squared, k.c, k.b, k.seed
        ),
    )
}

fn c7_theorem1() -> Check {
    let start = Instant::now();
    let sch = theorem1_schedule();
    let c = 1.0;
    let mut total = 0;
    let mut failed = Vec::new();
    let mut check = |id: ConditionId, p: ConditionParams| -> Result<(), String> {
        let cert = evaluate_condition(&sch, id, &p).map_err(e)?;
        total += 1;
        if !cert.holds() {
            failed.push(format!("{id} {p:?}"));
        }
        Ok(())
    };
    for d in [2, 3] {
        check(ConditionId::A, ConditionParams::new(d))?;
        check(ConditionId::BTilde, ConditionParams::new(d))?;
        check(ConditionId::CTilde, ConditionParams::new(d))?;
        for p in [1.5, 2.0, 4.0, 8.0] {
            check(ConditionId::BHat, ConditionParams::new(d).p(p))?;
        }
        for sigma in [0.5, 1.0, 2.0, 10.0] {
            check(ConditionId::C, ConditionParams::new(d).sigma(sigma))?;
        }
        for i in 1..=9 {
            for t in [0.01, 0.1, 1.0] {
                check(ConditionId::D, ConditionParams::new(d).s(i as f64 / 10.0).t(t).c(c))?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failed.is_empty() && secs < 1.0,
        format!("{} of {total} certificates as required, {secs:.3} s {failed:?}", total - failed.len()),
    )
}

fn c8_theorem2(k: &MixerConstants) -> Check {
    let (b, c) = (k.c, k.c);
    let (sigma, t_final) = (1.0, 1.0);
    let params = ConstructionParams::new(3, 2.0, 2.0, sigma, t_final, b, c).map_err(e)?;
    let exact = params.beta == 0.5 && params.mu_bar == 2.0 / 3.0;
    let sample: Vec<f64> = (1..=100).map(|i| sigma * i as f64 / 101.0).collect();
    let disagreements = |p: &ConstructionParams, literal: bool| -> Result<usize, String> {
        let sch = theorem2_schedule(p, b, c).map_err(e)?;
        let mut bad = 0;
        for &s in &sample {
            let cert = evaluate_condition(
                &sch,
                ConditionId::D,
                &ConditionParams::new(3).s(s).t(t_final).c(c),
            )
            .map_err(e)?;
            let diverges = cert.verdict == Verdict::Divergent;
            let early = blowup_time(s, sigma, p.alpha, c, t_final).map_err(e)? < t_final;
            let threshold = if literal { p.mu_bar } else { p.blowup_threshold(c) };
            if diverges != early || diverges != (s / sigma > threshold) {
                bad += 1;
            }
        }
        Ok(bad)
    };
    let at_default = disagreements(&params, false)?;
    let near = params
        .with_alpha((1.0 + 1e-9) * params.alpha_lower_bound(b), b)
        .map_err(e)?;
    let at_boundary = disagreements(&near, true)?;
    let literal_default = disagreements(&params, true)?;
    outcome(
        exact && at_default == 0 && at_boundary == 0,
        format!(
            "beta {}, mu_bar {}; default alpha {:.4}: {at_default} disagreements vs threshold {:.4}; \
             alpha at lower bound: {at_boundary} disagreements vs mu_bar \
             ({literal_default} vs mu_bar at default alpha)",
            params.beta,
            params.mu_bar,
            params.alpha,
            params.blowup_threshold(c)
        ),
    )
}

fn c9_witness(k: &MixerConstants) -> Check {
    let sch = theorem1_schedule();
    let sums = hs_lower_bound_partial_sums(&sch, 0.5, 0.1, 30, k, 2).map_err(e)?;
    let monotone = sums.windows(2).all(|w| w[1] >= w[0]);
    let first = sums.iter().position(|v| *v > 1e6).map(|i| i + 1);
    let at0 = hs_lower_bound_partial_sums(&sch, 0.5, 0.0, 100, k, 2).map_err(e)?;
    let (s50, s100) = (at0[49], at0[99]);
    let converged = (s100 - s50).abs() <= 1e-12 * s100.abs().max(1.0);
    outcome(
        monotone && first.is_some() && converged,
        format!(
            "t=0.1: monotone {monotone}, first N with sum > 1e6: {first:?}; t=0: S50 {s50:.6e}, S100 {s100:.6e}"
        ),
    )
}

fn c10_truncated() -> Check {
    let start = Instant::now();
    let sch = theorem1_schedule();
    let base = BasePair::default();
    let (flow, datum) = base.build().map_err(e)?;
    let window = sch.container().map_err(e)?;
    let grid = Grid::new(2, 512, window.side).map_err(e)?;
    let s = 0.5;
    let k = base.measure_constants(s).map_err(e)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for t in [0.0, 0.05, 0.1] {
        let sol = evaluate_truncated_solution(&sch, &flow, &datum, 3, t, &window, &grid)
            .map_err(e)?;
        let mut disjoint = sol.pieces.len() == 3;
        for i in 0..sol.pieces.len() {
            for j in i + 1..sol.pieces.len() {
                let prod = sol.pieces[i].field.product(&sol.pieces[j].field).map_err(e)?;
                disjoint &= prod.values().iter().all(|v| *v == 0.0);
            }
        }
        let pieces: Vec<PieceNorms> = sol
            .pieces
            .iter()
            .map(|p| {
                let sup = p.field.support();
                let half = 1.5 * p.spec.lambda;
                let lam = (0..2)
                    .map(|i| {
                        let c = p.spec.center[i] - window.center[i];
                        (sup.lo[i] - (c - half)).min(c + half - sup.hi[i])
                    })
                    .fold(f64::INFINITY, f64::min);
                PieceNorms {
                    hs_sq: hs_norm(&p.field, s).value.powi(2),
                    l2_sq: p.field.l2_norm().powi(2),
                    lam,
                }
            })
            .collect();
        let bound = orthogonality_lower_bound(&pieces, s, 2).map_err(e)?;
        let direct = hs_norm(&sol.total, s).value.powi(2);
        let series = hs_lower_bound_series(&sch, s, t, 3, &k, 2).map_err(e)?;
        ok &= disjoint && direct >= bound && bound >= series;
        notes.push(format!(
            "t={t}: {direct:.4e} >= {bound:.4e} >= {series:.4e}, disjoint {disjoint}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 300.0, format!("{}; {secs:.1} s", notes.join("; ")))
}

fn c11_classifier() -> Check {
    let corpus = series_corpus(11, 50);
    let mut bad = Vec::new();
    for (i, s) in corpus.iter().enumerate() {
        if numeric_verdict(s) != Some(classify(s).verdict) {
            bad.push(i);
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} disagreements on {} series {bad:?}", bad.len(), corpus.len()),
    )
}

fn report(id: u32, name: &str, r: Check, failures: &mut u32) {
    match r {
        Ok(o) => {
            println!(
                "criterion {id:>2} [{name}]: {} ({})",
                if o.pass { "PASS" } else { "FAIL" },
                o.detail
            );
            if !o.pass {
                *failures += 1;
            }
        }
        Err(err) => {
            println!("criterion {id:>2} [{name}]: FAIL (error: {err})");
            *failures += 1;
        }
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    report(1, "single-mode norms", c1_single_mode(), &mut failures);
    report(2, "scaling law", c2_scaling(), &mut failures);
    report(3, "interpolation inequality", c3_interpolation(), &mut failures);
    report(4, "almost orthogonality", c4_orthogonality(), &mut failures);
    let exp = MixingExperiment::default();
    let run = exp.run();
    let constants = run
        .as_ref()
        .ok()
        .and_then(|r| r.constants.clone())
        .ok_or_else(|| "default mixing run produced no constants".to_string());
    match &run {
        Ok(run) => {
            report(5, "conservation", c5_conservation(run, &exp), &mut failures);
            report(6, "exponential mixing", c6_mixing(run), &mut failures);
        }
        Err(err) => {
            report(5, "conservation", Err(e(err)), &mut failures);
            report(6, "exponential mixing", Err(e(err)), &mut failures);
        }
    }
    report(7, "theorem 1 certificates", c7_theorem1(), &mut failures);
    report(
        8,
        "theorem 2 certificates",
        constants.clone().and_then(|k| c8_theorem2(&k)),
        &mut failures,
    );
    report(
        9,
        "norm-growth witness",
        constants.and_then(|k| c9_witness(&k)),
        &mut failures,
    );
    report(10, "truncated patched solution", c10_truncated(), &mut failures);
    report(11, "series classifier vs oracle", c11_classifier(), &mut failures);
    if failures == 0 {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria fail");
        ExitCode::FAILURE
    }
}
