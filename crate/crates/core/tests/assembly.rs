mod common;

use common::{max_rel_diff, random_problem, rng};
use fracuq::fractional::{modal_legendre, BasisScaling, BasisSpec, ModalKind};
use fracuq::orthopoly::gauss_legendre;
use fracuq::pgsolver::{
    assemble, evaluate, evaluate_grid, manufactured_problem, solve_fast, spatial_mass, ManufacturedCase,
    OperatorMode, SpectralSolution,
};

#[test]
fn spatial_mass_matches_quadrature() {
    let (a, b) = (-0.5, 2.0);
    let m = spatial_mass(9, a, b, BasisScaling::default());
    let rule = gauss_legendre(64).unwrap();
    for r in 1..=9 {
        for c in 1..=9 {
            let q = (b - a) / 2.0
                * rule.integrate(|x| modal_legendre(ModalKind::Basis, c, x) * modal_legendre(ModalKind::Test, r, x));
            assert!((m[(r - 1, c - 1)] - q).abs() < 1e-12, "({r},{c})");
            if r.abs_diff(c) != 0 && r.abs_diff(c) != 2 {
                assert_eq!(m[(r - 1, c - 1)], 0.0);
            }
        }
    }
    // hand expansion of (P2 - P0)(P4 - P2) = -‖P2‖² = -2/5, times σ_1 σ̃_3 = 1·(-1) and (b-a)/2
    assert!((m[(2, 0)] - (-0.4 * -1.0 * 1.25)).abs() < 1e-15);
}

#[test]
fn two_sided_stiffness_symmetric_and_mass_symmetric() {
    let mut r = rng(19);
    for _ in 0..4 {
        let p = random_problem(&mut r, 5, &[9, 6], OperatorMode::TwoSided, 0.0);
        let sys = assemble(&p, 0).unwrap();
        for (s, m) in sys.s_space.iter().zip(&sys.m_space) {
            let n = s.nrows();
            let scale = (0..n).map(|i| s[(i, i)].abs()).fold(0.0, f64::max);
            for i in 0..n {
                for j in 0..n {
                    assert!((s[(i, j)] - s[(j, i)]).abs() <= 1e-12 * scale);
                    assert_eq!(m[(i, j)], m[(j, i)]);
                }
            }
        }
    }
}

#[test]
fn scaling_changes_coefficients_not_field() {
    let mut r = rng(23);
    let p = random_problem(&mut r, 5, &[6], OperatorMode::TwoSided, 1.0);
    let base = solve_fast(&assemble(&p, 0).unwrap()).unwrap();
    let scaled_basis = p
        .basis()
        .clone()
        .with_scaling(BasisScaling {
            temporal_trial: 2.0,
            temporal_test: -0.7,
            spatial_trial: 1.5,
            spatial_test: 3.0,
        })
        .unwrap();
    let q = p.clone().with_basis(scaled_basis).unwrap();
    let scaled = solve_fast(&assemble(&q, 0).unwrap()).unwrap();
    assert!(max_rel_diff(scaled.coefficients(), base.coefficients()) > 0.1);
    let (a, b) = p.basis().spatial_intervals()[0];
    let horizon = p.basis().horizon();
    let ts: Vec<f64> = (0..=10).map(|i| horizon * i as f64 / 10.0).collect();
    let xs: Vec<f64> = (0..=10).map(|i| a + (b - a) * i as f64 / 10.0).collect();
    let u0 = evaluate_grid(&base, &ts, std::slice::from_ref(&xs)).unwrap();
    let u1 = evaluate_grid(&scaled, &ts, &[xs]).unwrap();
    let scale = u0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (x, y) in u0.iter().zip(&u1) {
        assert!((x - y).abs() <= 1e-12 * scale.max(1.0), "{x} {y}");
    }
}

#[test]
fn tiny_reaction_is_negligible() {
    let mut r = rng(29);
    let p = random_problem(&mut r, 5, &[6], OperatorMode::LeftOnly, 0.0);
    let a = solve_fast(&assemble(&p, 0).unwrap()).unwrap();
    let b = solve_fast(&assemble(&p.clone().with_gamma(1e-16).unwrap(), 0).unwrap()).unwrap();
    assert!(max_rel_diff(b.coefficients(), a.coefficients()) < 1e-12);
}

#[test]
fn evaluation_boundaries_and_single_mode() {
    let mut r = rng(31);
    let p = random_problem(&mut r, 4, &[5], OperatorMode::TwoSided, 0.0);
    let sol = solve_fast(&assemble(&p, 0).unwrap()).unwrap();
    let (a, b) = p.basis().spatial_intervals()[0];
    let horizon = p.basis().horizon();
    assert_eq!(evaluate(&sol, 0.0, &[0.5 * (a + b)]).unwrap(), 0.0);
    assert!(evaluate(&sol, horizon, &[a]).unwrap().abs() < 1e-13);
    assert!(evaluate(&sol, horizon, &[b]).unwrap().abs() < 1e-13);
    assert!(evaluate(&sol, horizon * 1.5, &[a]).is_err());
    assert!(evaluate(&sol, 0.5, &[b + 1.0]).is_err());

    let mut coeffs = vec![0.0; 20];
    coeffs[0] = 1.0;
    let single = SpectralSolution::new(coeffs, p.basis().clone(), p.alpha(), p.beta(), String::new()).unwrap();
    let (t, x) = (0.3 * horizon, a + 0.7 * (b - a));
    let eta = 2.0 * t / horizon - 1.0;
    let xi = 2.0 * (x - a) / (b - a) - 1.0;
    let want = fracuq::fractional::polyfrac_first(1, p.basis().tau(), eta) * modal_legendre(ModalKind::Basis, 1, xi);
    assert!((evaluate(&single, t, &[x]).unwrap() - want).abs() < 1e-15);
}

fn onesided_error(n: usize, m: usize) -> f64 {
    let (alpha, beta) = (0.5, 1.5);
    let basis = BasisSpec::new(n, vec![m], alpha / 2.0, 1.0, vec![(-1.0, 1.0)]).unwrap();
    let (p, exact) = manufactured_problem(ManufacturedCase::PdeOneSided, alpha, Some(beta), 1.0, basis).unwrap();
    let sol = solve_fast(&assemble(&p, 0).unwrap()).unwrap();
    let rule = gauss_legendre(40).unwrap();
    let pts: Vec<f64> = rule.nodes().to_vec();
    let ts: Vec<f64> = pts.iter().map(|e| (e + 1.0) / 2.0).collect();
    let u = evaluate_grid(&sol, &ts, std::slice::from_ref(&pts)).unwrap();
    let mut err = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        for (j, &x) in pts.iter().enumerate() {
            let d = u[i * pts.len() + j] - exact(t, &[x]);
            err += 0.5 * rule.weights()[i] * rule.weights()[j] * d * d;
        }
    }
    err.sqrt()
}

#[test]
fn spatial_spectral_decay() {
    let ms = [4, 6, 8, 12, 16];
    let errs: Vec<f64> = ms.iter().map(|&m| onesided_error(8, m)).collect();
    println!("one-sided errors: {errs:?}");
    for w in errs.windows(2) {
        assert!(w[1] < w[0]);
    }
    let mean_drop = (errs[0].log10() - errs[4].log10()) / 4.0;
    assert!(mean_drop >= 0.3, "mean log10 drop {mean_drop}");
}

#[test]
fn manufactured_exact_vanishes_on_boundary() {
    let basis = BasisSpec::new(4, vec![4], 0.25, 1.0, vec![(-1.0, 1.0)]).unwrap();
    let (_, exact) = manufactured_problem(ManufacturedCase::PdeOneSided, 0.5, Some(1.5), 1.0, basis).unwrap();
    assert_eq!(exact(0.0, &[0.3]), 0.0);
    assert_eq!(exact(0.7, &[-1.0]), 0.0);
    assert!(exact(0.7, &[1.0]).abs() < 1e-14);
}
