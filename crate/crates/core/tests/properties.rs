mod common;

use std::sync::Arc;

use common::{max_rel_diff, random_problem, rng};
use fracuq::cli::config::{BasisSection, ForcingCase, ProblemSection, SamplingSection};
use fracuq::cli::{parse_config, serialize_config, ExperimentConfig};
use fracuq::fractional::{frac_deriv_modal_legendre, rl_frac_deriv_power, ModalKind, Side};
use fracuq::noise::{realize, NoiseSpec, Q_BOUND};
use fracuq::orthopoly::{gauss_jacobi, jacobi_eval, JacobiParams};
use fracuq::pgsolver::{assemble, solve_direct, solve_fast, OperatorMode};
use fracuq::randomspace::{monte_carlo_point, monte_carlo_set, smolyak_grid, tensor_grid, Dimension, RandomParameterSpace};
use fracuq::special::gamma;
use fracuq::uq::{pairwise_sum, run_mcs, run_pcm, FnModel, ObservationGrid, StochasticProblem};
use proptest::prelude::*;

fn box_space(bounds: &[(f64, f64)]) -> RandomParameterSpace {
    RandomParameterSpace::new(
        bounds
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| Dimension { name: format!("z{i}"), lo, hi })
            .collect(),
    )
    .unwrap()
}

fn bounds(max_dims: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, 0.1..4.0f64).prop_map(|(lo, w)| (lo, lo + w)), 1..=max_dims)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobi_rule_mass_and_orthogonality(a in -0.9..2.0f64, b in -0.9..2.0f64, m in 1usize..14) {
        let p = JacobiParams::new(a, b).unwrap();
        let rule = gauss_jacobi(p, m).unwrap();
        let mass = 2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
        let total: f64 = rule.weights().iter().sum();
        prop_assert!((total - mass).abs() <= 1e-12 * mass);
        prop_assert!(rule.weights().iter().all(|&w| w > 0.0));
        prop_assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        for i in 0..m {
            for j in (i + 1)..(2 * m - i).min(2 * m) {
                let q = rule.integrate(|x| jacobi_eval(p, i, x) * jacobi_eval(p, j, x));
                let scale = rule.integrate(|x| jacobi_eval(p, i, x).powi(2)).sqrt()
                    * rule.integrate(|x| jacobi_eval(p, j, x).powi(2)).sqrt();
                prop_assert!(q.abs() <= 1e-10 * scale.max(1.0), "i={} j={} q={}", i, j, q);
            }
        }
    }

    #[test]
    fn power_rule_reflection(sigma in 0.05..0.95f64, p in 0.0..4.0f64, x in -0.95..0.95f64) {
        let left = rl_frac_deriv_power(Side::Left, sigma, p, x).unwrap();
        let right = rl_frac_deriv_power(Side::Right, sigma, p, -x).unwrap();
        prop_assert!((left - right).abs() <= 1e-12 * left.abs().max(1.0));
    }

    #[test]
    fn modal_reflection(m in 1usize..10, mu in 0.05..0.95f64, xi in -0.95..0.95f64, test in any::<bool>()) {
        // φ_m(-ξ) = (-1)^{m+1} φ_m(ξ)
        let kind = if test { ModalKind::Test } else { ModalKind::Basis };
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        let left = frac_deriv_modal_legendre(kind, Side::Left, mu, m, xi);
        let right = frac_deriv_modal_legendre(kind, Side::Right, mu, m, -xi);
        prop_assert!((left - sign * right).abs() <= 1e-9 * left.abs().max(1.0), "{} vs {}", left, sign * right);
    }

    #[test]
    fn noise_paths_vanish_at_the_ends(
        length in 0.2..5.0f64,
        corr in 0.05..2.0f64,
        amp in 0.1..3.0f64,
        q in prop::collection::vec(-Q_BOUND..Q_BOUND, 1..8),
    ) {
        let spec = NoiseSpec::new(length, corr, q.len(), amp).unwrap();
        let f = realize(&spec, &q).unwrap();
        prop_assert!(f.eval(0.0).abs() <= 1e-14 * amp);
        prop_assert!(f.eval(length).abs() <= 1e-13 * amp);
    }

    #[test]
    fn smolyak_weights_normalized_and_nodes_inside(b in bounds(4), w in 1usize..4) {
        let space = box_space(&b);
        let grid = smolyak_grid(&space, w).unwrap();
        prop_assert!((grid.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(grid.points().iter().all(|p| space.contains(p)));
        for (j, d) in space.dims().iter().enumerate() {
            prop_assert!((grid.expectation(|p| p[j]) - d.midpoint()).abs() <= 1e-12 * d.midpoint().abs().max(1.0));
        }
    }

    #[test]
    fn monte_carlo_points_are_indexed_streams(b in bounds(5), seed in any::<u64>(), count in 2usize..40) {
        let space = box_space(&b);
        let set = monte_carlo_set(&space, count, seed).unwrap();
        for (i, p) in set.points().iter().enumerate() {
            prop_assert_eq!(p, &monte_carlo_point(&space, seed, i as u64));
            prop_assert!(space.contains(p));
        }
    }

    #[test]
    fn pairwise_sum_matches_naive(terms in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 3), 1..60)) {
        let naive: Vec<f64> = (0..3).map(|j| terms.iter().map(|t| t[j]).sum()).collect();
        let tree = pairwise_sum(terms, 3);
        for (a, b) in tree.iter().zip(&naive) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn statistics_of_a_constant(c in -5.0..5.0f64, b in bounds(3), q in 1usize..4, seed in any::<u64>()) {
        let space = box_space(&b);
        let grid = ObservationGrid::gauss(1.0, &[], 3, 0).unwrap();
        let model = FnModel(move |_: &[f64], g: &ObservationGrid| Ok(vec![c; g.len()]));
        let problem = StochasticProblem::new(space.clone(), Arc::new(model), grid);
        let nodes = tensor_grid(&space, &vec![q; b.len()]).unwrap();
        let pcm = run_pcm(&problem, &nodes).unwrap();
        let mcs = run_mcs(&problem, 5, seed).unwrap();
        for r in [&pcm, &mcs] {
            prop_assert!(r.mean.iter().all(|m| (m - c).abs() <= 1e-13 * c.abs().max(1.0)));
            prop_assert!(r.std.iter().all(|s| *s <= 1e-12 * c.abs().max(1.0)));
        }
    }

    #[test]
    fn config_round_trip(
        alpha in 0.05..0.95f64,
        beta in 1.05..1.95f64,
        n in 1usize..12,
        m in 1usize..16,
        samples in prop::option::of(2usize..100_000),
        seed in prop::option::of(any::<u64>()),
    ) {
        let cfg = ExperimentConfig {
            problem: ProblemSection {
                case: Some(ForcingCase::Unit),
                alpha: Some(alpha),
                beta: Some(vec![beta]),
                domain: Some(vec![[-1.0, 2.5]]),
                ..ProblemSection::default()
            },
            basis: BasisSection { n: Some(n), m: Some(vec![m]), ..BasisSection::default() },
            sampling: SamplingSection { samples, seed, ..SamplingSection::default() },
            ..ExperimentConfig::default()
        };
        let text = serialize_config(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fast_solver_matches_direct(
        seed in any::<u64>(),
        n in 2usize..7,
        ms in prop::collection::vec(2usize..7, 1..=2),
        left in any::<bool>(),
        gamma in prop_oneof![Just(0.0), 0.1..2.0f64],
    ) {
        let mode = if left { OperatorMode::LeftOnly } else { OperatorMode::TwoSided };
        let p = random_problem(&mut rng(seed), n, &ms, mode, gamma);
        let sys = assemble(&p, 0).unwrap();
        let fast = solve_fast(&sys).unwrap();
        let direct = solve_direct(&sys).unwrap();
        prop_assert!(max_rel_diff(fast.coefficients(), direct.coefficients()) < 1e-10);
    }

    #[test]
    fn solution_is_linear_in_the_load(seed in any::<u64>(), scale in -4.0..4.0f64) {
        let p = random_problem(&mut rng(seed), 4, &[5], OperatorMode::TwoSided, 0.5);
        let sys = assemble(&p, 0).unwrap();
        let base = solve_fast(&sys).unwrap();
        let scaled = sys.with_load(sys.load.iter().map(|v| scale * v).collect()).unwrap();
        let u = solve_fast(&scaled).unwrap();
        let want: Vec<f64> = base.coefficients().iter().map(|v| scale * v).collect();
        let norm = want.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let diff = u.coefficients().iter().zip(&want).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        prop_assert!(diff <= 1e-12 * norm.max(1e-300));
    }
}
