use fracuq::orthopoly::{gauss_jacobi, JacobiParams};

/// Composite two-point Gauss on `panels` equal panels of [lo, hi].
fn composite(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / panels as f64;
    let g = 0.5 / 3.0_f64.sqrt();
    (0..panels)
        .map(|i| {
            let c = lo + (i as f64 + 0.5) * h;
            0.5 * h * (f(c - g * h) + f(c + g * h))
        })
        .sum()
}

#[test]
fn gauss_jacobi_against_panel_oracle() {
    let (a, b) = (0.25, -0.25);
    let rule = gauss_jacobi(JacobiParams::new(a, b).unwrap(), 8).unwrap();
    let got = rule.integrate(|x| x * x);
    // y^4 substitutions at each end remove the endpoint singularities.
    // the vanishing factor is written as y^4 directly to avoid cancellation
    let left = composite(0.0, 1.0, 50_000, |y| {
        let x = -1.0 + y.powi(4);
        (1.0 - x).powf(a) * y.powf(4.0 * b) * x * x * 4.0 * y.powi(3)
    });
    let right = composite(0.0, 1.0, 50_000, |y| {
        let x = 1.0 - y.powi(4);
        y.powf(4.0 * a) * (1.0 + x).powf(b) * x * x * 4.0 * y.powi(3)
    });
    let want = left + right;
    assert!((got - want).abs() < 1e-10, "{got} vs {want}");
}
