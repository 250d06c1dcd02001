//! Brute-force evaluation of the Riemann-Liouville definition: a graded
//! composite Gauss-Legendre fractional integral followed by a five-point
//! finite difference.

use fracuq::fractional::{
    frac_deriv_modal_legendre, modal_legendre, polyfrac_first, polyfrac_frac_deriv, polyfrac_second,
    rl_frac_deriv_power, ModalKind, PolyFracKind, Side,
};
use fracuq::orthopoly::gauss_legendre;
use fracuq::special::gamma;

/// `∫_0^Z g(z) dz` with panels graded geometrically toward both ends.
pub fn graded(zmax: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(20).unwrap();
    let mut breaks = vec![0.0];
    let levels = 40;
    for k in (1..=levels).rev() {
        breaks.push(0.5 * zmax * 0.5_f64.powi(k));
    }
    for k in 0..=levels {
        breaks.push(zmax - 0.5 * zmax * 0.5_f64.powi(k));
    }
    breaks.push(zmax);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let h = 0.5 * (hi - lo);
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&x, &wt)| wt * h * g(lo + h * (x + 1.0)))
                .sum::<f64>()
        })
        .sum()
}

/// Left fractional integral of order `1 - σ` on [-1, x]; `r = (x-s)`, `z = r^{1-σ}`.
pub fn left_integral(u: &dyn Fn(f64) -> f64, sigma: f64, x: f64) -> f64 {
    let e = 1.0 - sigma;
    let zmax = (x + 1.0).powf(e);
    graded(zmax, &|z| u(x - z.powf(1.0 / e))) / (e * gamma(e))
}

pub fn right_integral(u: &dyn Fn(f64) -> f64, sigma: f64, x: f64) -> f64 {
    let e = 1.0 - sigma;
    let zmax = (1.0 - x).powf(e);
    graded(zmax, &|z| u(x + z.powf(1.0 / e))) / (e * gamma(e))
}

pub fn five_point(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-3;
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

pub fn oracle(side: Side, u: &dyn Fn(f64) -> f64, sigma: f64, x: f64) -> f64 {
    match side {
        Side::Left => five_point(&|y| left_integral(u, sigma, y), x),
        Side::Right => -five_point(&|y| right_integral(u, sigma, y), x),
    }
}

/// One spot check: label, closed form, oracle value.
pub type Spot = (String, f64, f64);

pub fn power_spots() -> Vec<Spot> {
    let mut out = Vec::new();
    for &(sigma, p) in &[(0.3, 0.3), (0.5, 1.7), (0.8, 3.25), (0.45, 0.0)] {
        for &x in &[-0.6, 0.1, 0.7] {
            for side in [Side::Left, Side::Right] {
                let u = move |s: f64| match side {
                    Side::Left => (1.0 + s).powf(p),
                    Side::Right => (1.0 - s).powf(p),
                };
                let got = rl_frac_deriv_power(side, sigma, p, x).unwrap();
                out.push((format!("power {side:?} σ={sigma} p={p} x={x}"), got, oracle(side, &u, sigma, x)));
            }
        }
    }
    out
}

pub fn polyfrac_spots() -> Vec<Spot> {
    let mut out = Vec::new();
    for &tau in &[0.25, 0.6] {
        for n in 1..=5 {
            for &eta in &[-0.5, 0.0, 0.5] {
                let first = move |s: f64| polyfrac_first(n, tau, s);
                let got = polyfrac_frac_deriv(PolyFracKind::First, n, tau, tau, eta).unwrap();
                out.push((format!("ψ_{n} τ={tau} η={eta}"), got, oracle(Side::Left, &first, tau, eta)));

                let second = move |s: f64| polyfrac_second(n, tau, s);
                let got = polyfrac_frac_deriv(PolyFracKind::Second, n, tau, tau, eta).unwrap();
                out.push((format!("Ψ_{n} τ={tau} η={eta}"), got, oracle(Side::Right, &second, tau, eta)));
            }
        }
    }
    let tau = 0.3;
    for &sigma in &[0.15, 0.55] {
        for n in 1..=4 {
            for &eta in &[-0.5, 0.5] {
                let first = move |s: f64| polyfrac_first(n, tau, s);
                let got = polyfrac_frac_deriv(PolyFracKind::First, n, tau, sigma, eta).unwrap();
                out.push((format!("ψ_{n} σ={sigma} η={eta}"), got, oracle(Side::Left, &first, sigma, eta)));
            }
        }
    }
    out
}

pub fn modal_spots() -> Vec<Spot> {
    let mut cases = vec![(2usize, 0.75, 0.3)];
    for m in 1..=5 {
        for &(mu, xi) in &[(0.55, -0.4), (0.9, 0.6)] {
            cases.push((m, mu, xi));
        }
    }
    let mut out = Vec::new();
    for (m, mu, xi) in cases {
        for kind in [ModalKind::Basis, ModalKind::Test] {
            let u = move |s: f64| modal_legendre(kind, m, s);
            for side in [Side::Left, Side::Right] {
                let got = frac_deriv_modal_legendre(kind, side, mu, m, xi);
                out.push((format!("φ_{m} {kind:?} {side:?} μ={mu} ξ={xi}"), got, oracle(side, &u, mu, xi)));
            }
        }
    }
    out
}

/// Relative discrepancy with an absolute floor of one.
pub fn spot_error(s: &Spot) -> f64 {
    (s.1 - s.2).abs() / s.2.abs().max(1.0)
}
