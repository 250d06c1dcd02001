#![allow(dead_code)]

pub mod oracle;

use fracuq::fractional::{BasisSpec, FractionalOrder};
use fracuq::pgsolver::{DeterministicProblem, Forcing, OperatorMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random forcing of the form Σ c_i t^{i} sin(...) with a spatial bump.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    n: usize,
    ms: &[usize],
    mode: OperatorMode,
    gamma: f64,
) -> DeterministicProblem {
    let alpha = rng.random_range(0.2..0.8);
    let betas: Vec<f64> = ms.iter().map(|_| rng.random_range(1.2..1.9)).collect();
    let ks: Vec<f64> = ms.iter().map(|_| rng.random_range(0.5..2.0)).collect();
    let intervals: Vec<(f64, f64)> = ms
        .iter()
        .map(|_| {
            let a = rng.random_range(-1.5..0.0);
            (a, a + rng.random_range(0.5..2.5))
        })
        .collect();
    let horizon = rng.random_range(0.5..2.0);
    let c: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(1.0..3.0)];
    let iv = intervals.clone();
    let h = Forcing::from_fn(format!("random:{c:?}"), move |t, x| {
        let mut v = c[0] + c[1] * t + (c[2] * t).sin();
        for (xj, (a, b)) in x.iter().zip(&iv) {
            v *= 1.0 + (xj - a) * (b - xj) + 0.3 * xj;
        }
        v
    });
    let basis = BasisSpec::new(n, ms.to_vec(), alpha / 2.0, horizon, intervals).unwrap();
    DeterministicProblem::new(
        FractionalOrder::temporal(alpha).unwrap(),
        betas.iter().map(|&b| FractionalOrder::spatial(b).unwrap()).collect(),
        ks,
        basis,
        h,
    )
    .unwrap()
    .with_gamma(gamma)
    .unwrap()
    .with_mode(mode)
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// L² norm on [0, T] of `f` by Gauss-Legendre.
pub fn l2_time(horizon: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = fracuq::orthopoly::gauss_legendre(60).unwrap();
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&e, &w)| {
            let v = f((e + 1.0) * horizon / 2.0);
            w * v * v * horizon / 2.0
        })
        .sum::<f64>()
        .sqrt()
}
