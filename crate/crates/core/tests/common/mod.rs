#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use regloss::field::{make_bump, make_dipole, make_modulated_bump, Grid, ScalarField, SupportBox};
use regloss::series::{partial_sum, ExpPolySeries, Verdict};

/// Randomized exp-polynomial series: degree `m ∈ {1, 2, 3}` with leading
/// coefficient of modulus in `[0.5, 3]`, lower coefficients, `k` and `c`
/// drawn from `[-3, 3]` (with `c > 0`).
pub fn series_corpus(seed: u64, count: usize) -> Vec<ExpPolySeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(1..=3usize);
            let mut q: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lead = rng.gen_range(0.5..3.0);
            q[m - 1] = if rng.gen_bool(0.5) { lead } else { -lead };
            let k = rng.gen_range(-3.0..3.0);
            let c = rng.gen_range(0.01..3.0);
            ExpPolySeries::new(c, k, q, 1)
        })
        .collect()
}

/// Verdict read off partial sums at `10³` and `10⁴`; `None` when the
/// numbers fit neither pattern.
pub fn numeric_verdict(s: &ExpPolySeries) -> Option<Verdict> {
    let a = partial_sum(s, 1_000).unwrap();
    let b = partial_sum(s, 10_000).unwrap();
    if b.is_infinite() || b > 10.0 * a {
        Some(Verdict::Divergent)
    } else if (b - a).abs() < 1e-6 * b.abs() {
        Some(Verdict::Convergent)
    } else {
        None
    }
}

/// Smooth periodic fields with zero mean: random trigonometric
/// polynomials, modulated bumps and dipoles.
pub fn field_corpus(grid: &Grid, seed: u64, count: usize) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| match i % 3 {
            0 => {
                let modes: Vec<(f64, f64, f64, f64)> = (0..4)
                    .map(|_| {
                        (
                            rng.gen_range(-4..=4) as f64,
                            rng.gen_range(1..=4) as f64,
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(0.0..TAU),
                        )
                    })
                    .collect();
                ScalarField::from_fn(*grid, SupportBox::whole(grid), |x| {
                    modes
                        .iter()
                        .map(|(k1, k2, a, ph)| a * (TAU * (k1 * x[0] + k2 * x[1]) + ph).sin())
                        .sum()
                })
                .unwrap()
            }
            1 => {
                let c = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
                let r = rng.gen_range(0.12..0.25);
                let k = rng.gen_range(1..=3);
                let mut f = make_modulated_bump(grid, &c, r, 1.0, 0, k).unwrap();
                f = f.subtract_mean();
                f
            }
            _ => {
                let r = rng.gen_range(0.08..0.15);
                let off = [rng.gen_range(0.18..0.25), rng.gen_range(-0.1..0.1)];
                make_dipole(grid, &[0.0, 0.0], &off, r, rng.gen_range(0.5..2.0)).unwrap()
            }
        })
        .collect()
}

/// Five bumps with different centers and radii.
pub fn bump_corpus(grid: &Grid) -> Vec<ScalarField> {
    [
        ([0.0, 0.0], 0.2),
        ([0.1, -0.05], 0.25),
        ([-0.2, 0.15], 0.15),
        ([0.05, 0.2], 0.3),
        ([-0.1, -0.1], 0.22),
    ]
    .iter()
    .map(|(c, r)| make_bump(grid, c, *r, 1.0).unwrap())
    .collect()
}

pub fn rel_l2_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
