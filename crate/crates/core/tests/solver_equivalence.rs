mod common;

use common::{max_rel_diff, random_problem, rng};
use fracuq::pgsolver::{assemble, solve_direct, solve_fast, OperatorMode};
use rand::Rng;

#[test]
fn fast_matches_direct_over_random_matrix() {
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for shape in [vec![4, 4], vec![6, 8], vec![4, 4, 4], vec![5, 3, 6]] {
        for mode in [OperatorMode::TwoSided, OperatorMode::LeftOnly] {
            for gamma in [0.0, 1.0] {
                let p = random_problem(&mut r, shape[0], &shape[1..], mode, gamma);
                let sys = assemble(&p, 0).unwrap();
                let d = solve_direct(&sys).unwrap();
                let f = solve_fast(&sys).unwrap();
                let e = max_rel_diff(f.coefficients(), d.coefficients());
                println!("{shape:?} {mode} γ={gamma}: {e:.2e}");
                worst = worst.max(e);
            }
        }
    }
    assert!(worst < 1e-10, "worst {worst:e}");
}

#[test]
fn random_load_residual() {
    let mut r = rng(11);
    let p = random_problem(&mut r, 4, &[4, 4], OperatorMode::TwoSided, 0.0);
    let sys = assemble(&p, 0).unwrap();
    let load: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
    let sys = sys.with_load(load.clone()).unwrap();
    let u = solve_direct(&sys).unwrap();
    let a = sys.dense_operator();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..64 {
        let av: f64 = (0..64).map(|j| a[(i, j)] * u.coefficients()[j]).sum();
        num += (av - load[i]).powi(2);
        den += load[i] * load[i];
    }
    assert!((num / den).sqrt() < 1e-10);

    let doubled = sys.with_load(load.iter().map(|v| 2.0 * v).collect()).unwrap();
    let u2 = solve_direct(&doubled).unwrap();
    let twice: Vec<f64> = u.coefficients().iter().map(|v| 2.0 * v).collect();
    assert!(max_rel_diff(u2.coefficients(), &twice) < 1e-12);
}

#[test]
fn fast_solver_beats_direct_at_32() {
    let mut r = rng(3);
    let p = random_problem(&mut r, 32, &[32], OperatorMode::TwoSided, 0.0);
    let sys = assemble(&p, 0).unwrap();
    let t0 = std::time::Instant::now();
    let f = solve_fast(&sys).unwrap();
    let fast = t0.elapsed();
    let t0 = std::time::Instant::now();
    let d = solve_direct(&sys).unwrap();
    let direct = t0.elapsed();
    println!("fast {fast:?} direct {direct:?} diff {:.2e}", max_rel_diff(f.coefficients(), d.coefficients()));
    assert!(fast < direct);
}
