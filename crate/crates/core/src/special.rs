//! Gamma-function helpers shared by the quadrature and fractional modules.

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `Γ(x)`; poles at the nonpositive integers return `±inf` like `tgamma`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `1 / Γ(x)`, which is entire: zero at the nonpositive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / libm::tgamma(x)
    }
}

/// `Γ(a) / Γ(b)`.
///
/// Positive arguments go through log-Gamma differences so that ratios like
/// `Γ(n + τ) / Γ(n)` stay finite for `n` in the hundreds.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        (ln_gamma(a) - ln_gamma(b)).exp()
    } else {
        gamma(a) * recip_gamma(b)
    }
}

/// Euler Beta function `B(a, b)` for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}
