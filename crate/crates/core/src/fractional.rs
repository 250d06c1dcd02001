//! Riemann-Liouville derivatives in closed form, and the trial/test families
//! of the space-time Petrov-Galerkin discretization.
//!
//! Everything here lives on the reference interval `[-1, 1]`. Moving to a
//! physical interval `[a, b]` multiplies an order-`σ` derivative by
//! [`affine_scale`]`(σ, a, b) = (2 / (b - a))^σ`.
//!
//! Temporal functions are Jacobi poly-fractonomials:
//! `ψ_n(η) = (1+η)^τ P_{n-1}^{-τ,τ}(η)` (first kind, vanishes at `η = -1`) and
//! `Ψ_k(η) = (1-η)^τ P_{k-1}^{τ,-τ}(η)` (second kind, vanishes at `η = 1`).
//! Spatial functions are modal Legendre differences `P_{m+1} - P_{m-1}`,
//! scaled by `2 + (-1)^m` (trial) or `2(-1)^m + 1` (test).

use thiserror::Error;

use crate::orthopoly::{jacobi_eval, legendre_eval, JacobiParams};
use crate::special::{gamma_ratio, recip_gamma};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FractionalError {
    #[error("power exponent must exceed -1, got {0}")]
    PowerDomain(f64),
    #[error("derivative order must be positive and finite, got {0}")]
    InvalidOrder(f64),
    #[error("poly-fractonomial derivative order must lie in (0, 1), got {0}")]
    UnsupportedOrder(f64),
    #[error("Caputo power rule is only defined here for order in (0, 1) and exponent 0 or > 0")]
    CaputoDomain,
    #[error("interval must satisfy a < b, got [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error("{kind:?} fractional order {value} outside its admissible range")]
    OrderRange { kind: OrderKind, value: f64 },
    #[error("tuning parameter τ must lie in (0, 1), got {0}")]
    Tau(f64),
    #[error("basis index must be at least 1")]
    ZeroIndex,
    #[error("invalid basis specification: {0}")]
    Basis(String),
}

/// Which end of the interval the derivative integrates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolyFracKind {
    /// `(1+η)^τ P_{n-1}^{-τ,τ}`: temporal trial functions.
    First,
    /// `(1-η)^τ P_{k-1}^{τ,-τ}`: temporal test functions.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModalKind {
    Basis,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    /// `α ∈ (0, 1)`
    Temporal,
    /// `β ∈ (1, 2)`
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    value: f64,
    kind: OrderKind,
}

impl FractionalOrder {
    pub fn new(value: f64, kind: OrderKind) -> Result<Self, FractionalError> {
        let ok = match kind {
            OrderKind::Temporal => value > 0.0 && value < 1.0,
            OrderKind::Spatial => value > 1.0 && value < 2.0,
        };
        if ok {
            Ok(Self { value, kind })
        } else {
            Err(FractionalError::OrderRange { kind, value })
        }
    }

    pub fn temporal(value: f64) -> Result<Self, FractionalError> {
        Self::new(value, OrderKind::Temporal)
    }

    pub fn spatial(value: f64) -> Result<Self, FractionalError> {
        Self::new(value, OrderKind::Spatial)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }
}

/// Multipliers on the trial/test scaling constants.
///
/// The defaults reproduce `σ_n = σ̃_k = 1` in time and the modal constants in
/// space. Any nonzero values give the same reconstructed solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisScaling {
    pub temporal_trial: f64,
    pub temporal_test: f64,
    pub spatial_trial: f64,
    pub spatial_test: f64,
}

impl Default for BasisScaling {
    fn default() -> Self {
        Self {
            temporal_trial: 1.0,
            temporal_test: 1.0,
            spatial_trial: 1.0,
            spatial_test: 1.0,
        }
    }
}

/// Resolution and geometry of the space-time expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    temporal_count: usize,
    spatial_counts: Vec<usize>,
    tau: f64,
    horizon: f64,
    spatial_intervals: Vec<(f64, f64)>,
    scaling: BasisScaling,
}

impl BasisSpec {
    pub fn new(
        temporal_count: usize,
        spatial_counts: Vec<usize>,
        tau: f64,
        horizon: f64,
        spatial_intervals: Vec<(f64, f64)>,
    ) -> Result<Self, FractionalError> {
        if temporal_count == 0 || spatial_counts.contains(&0) {
            return Err(FractionalError::Basis("all mode counts must be >= 1".into()));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(FractionalError::Tau(tau));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FractionalError::Basis(format!("time horizon must be positive, got {horizon}")));
        }
        if spatial_counts.len() != spatial_intervals.len() {
            return Err(FractionalError::Basis(format!(
                "{} spatial counts but {} intervals",
                spatial_counts.len(),
                spatial_intervals.len()
            )));
        }
        for &(a, b) in &spatial_intervals {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(FractionalError::EmptyInterval(a, b));
            }
        }
        Ok(Self {
            temporal_count,
            spatial_counts,
            tau,
            horizon,
            spatial_intervals,
            scaling: BasisScaling::default(),
        })
    }

    /// Pure-time basis on `[0, T]` (no spatial dimensions).
    pub fn temporal_only(temporal_count: usize, tau: f64, horizon: f64) -> Result<Self, FractionalError> {
        Self::new(temporal_count, Vec::new(), tau, horizon, Vec::new())
    }

    pub fn with_scaling(mut self, scaling: BasisScaling) -> Result<Self, FractionalError> {
        let s = [
            scaling.temporal_trial,
            scaling.temporal_test,
            scaling.spatial_trial,
            scaling.spatial_test,
        ];
        if s.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(FractionalError::Basis("scaling multipliers must be finite and nonzero".into()));
        }
        self.scaling = scaling;
        Ok(self)
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self, FractionalError> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(FractionalError::Tau(tau));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn temporal_count(&self) -> usize {
        self.temporal_count
    }

    pub fn spatial_counts(&self) -> &[usize] {
        &self.spatial_counts
    }

    pub fn spatial_dims(&self) -> usize {
        self.spatial_counts.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn spatial_intervals(&self) -> &[(f64, f64)] {
        &self.spatial_intervals
    }

    pub fn scaling(&self) -> BasisScaling {
        self.scaling
    }

    /// Shape of the coefficient tensor, time first.
    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.temporal_count)
            .chain(self.spatial_counts.iter().copied())
            .collect()
    }

    pub fn unknowns(&self) -> usize {
        self.shape().iter().product()
    }
}

/// `(2 / (b - a))^σ`, the factor picked up by an order-`σ` derivative when
/// `[-1, 1]` is mapped onto `[a, b]`.
pub fn affine_scale(sigma: f64, a: f64, b: f64) -> Result<f64, FractionalError> {
    if !(b > a) {
        return Err(FractionalError::EmptyInterval(a, b));
    }
    Ok((2.0 / (b - a)).powf(sigma))
}

/// Riemann-Liouville derivative of order `σ` of a power of the distance to
/// the integration endpoint.
///
/// Left: `D^σ (1+x)^p = Γ(p+1)/Γ(p+1-σ) (1+x)^{p-σ}`.
/// Right: `D^σ (1-x)^p = Γ(p+1)/Γ(p+1-σ) (1-x)^{p-σ}`.
pub fn rl_frac_deriv_power(side: Side, sigma: f64, p: f64, x: f64) -> Result<f64, FractionalError> {
    if !(p > -1.0) {
        return Err(FractionalError::PowerDomain(p));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(FractionalError::InvalidOrder(sigma));
    }
    let r = match side {
        Side::Left => 1.0 + x,
        Side::Right => 1.0 - x,
    };
    let coeff = gamma_ratio(p + 1.0, 1.0) * recip_gamma(p + 1.0 - sigma);
    if coeff == 0.0 {
        return Ok(0.0);
    }
    Ok(coeff * r.powf(p - sigma))
}

/// Caputo derivative of order `σ ∈ (0, 1)` of `(1 ± x)^p` for `p = 0` or `p > 0`.
///
/// Differs from the Riemann-Liouville value by `u(endpoint) (1±x)^{-σ} / Γ(1-σ)`.
pub fn caputo_frac_deriv_power(side: Side, sigma: f64, p: f64, x: f64) -> Result<f64, FractionalError> {
    if !(sigma > 0.0 && sigma < 1.0) || !(p >= 0.0) {
        return Err(FractionalError::CaputoDomain);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    rl_frac_deriv_power(side, sigma, p, x)
}

/// `ψ_n^τ(η) = (1+η)^τ P_{n-1}^{-τ,τ}(η)`.
pub fn polyfrac_first(n: usize, tau: f64, eta: f64) -> f64 {
    debug_assert!(n >= 1);
    let p = JacobiParams::new(-tau, tau).expect("τ in (0,1)");
    (1.0 + eta).max(0.0).powf(tau) * jacobi_eval(p, n - 1, eta)
}

/// `Ψ_k^τ(η) = (1-η)^τ P_{k-1}^{τ,-τ}(η)`.
pub fn polyfrac_second(k: usize, tau: f64, eta: f64) -> f64 {
    debug_assert!(k >= 1);
    let p = JacobiParams::new(tau, -tau).expect("τ in (0,1)");
    (1.0 - eta).max(0.0).powf(tau) * jacobi_eval(p, k - 1, eta)
}

/// Order-`σ` derivative of a poly-fractonomial with the singular factor removed.
///
/// For the first kind (left derivative),
/// `D^σ ψ_n = Γ(n+τ)/Γ(n+τ-σ) (1+η)^{τ-σ} P_{n-1}^{σ-τ,τ-σ}(η)`;
/// this returns everything but `(1+η)^{τ-σ}`. The second kind mirrors it with
/// the right derivative and `(1-η)^{τ-σ}`. When `σ = τ` the result is the
/// Legendre polynomial `Γ(n+τ)/Γ(n) P_{n-1}`.
pub fn polyfrac_deriv_regular(kind: PolyFracKind, n: usize, tau: f64, sigma: f64, eta: f64) -> f64 {
    let ratio = gamma_ratio(n as f64 + tau, n as f64 + tau - sigma);
    let d = sigma - tau;
    let params = match kind {
        PolyFracKind::First => JacobiParams::new(d, -d),
        PolyFracKind::Second => JacobiParams::new(-d, d),
    }
    .expect("|σ - τ| < 1");
    ratio * jacobi_eval(params, n - 1, eta)
}

/// Riemann-Liouville derivative of order `σ ∈ (0, 1)` of a poly-fractonomial:
/// left-sided for the first kind, right-sided for the second.
///
/// The solver only ever asks for `σ = τ`, where the result is a polynomial.
pub fn polyfrac_frac_deriv(
    kind: PolyFracKind,
    n: usize,
    tau: f64,
    sigma: f64,
    eta: f64,
) -> Result<f64, FractionalError> {
    if n == 0 {
        return Err(FractionalError::ZeroIndex);
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(FractionalError::Tau(tau));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(FractionalError::UnsupportedOrder(sigma));
    }
    let regular = polyfrac_deriv_regular(kind, n, tau, sigma, eta);
    let excess = tau - sigma;
    if excess == 0.0 {
        return Ok(regular);
    }
    let r = match kind {
        PolyFracKind::First => 1.0 + eta,
        PolyFracKind::Second => 1.0 - eta,
    };
    Ok(r.powf(excess) * regular)
}

/// Modal scaling constant: `2 + (-1)^m` for trial functions, `2(-1)^m + 1` for test functions.
pub fn modal_scale(kind: ModalKind, m: usize) -> f64 {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    match kind {
        ModalKind::Basis => 2.0 + sign,
        ModalKind::Test => 2.0 * sign + 1.0,
    }
}

/// `c · (P_{m+1}(ξ) - P_{m-1}(ξ))` with the modal scaling `c` of `kind`.
pub fn modal_legendre(kind: ModalKind, m: usize, xi: f64) -> f64 {
    debug_assert!(m >= 1);
    modal_scale(kind, m) * (legendre_eval(m + 1, xi) - legendre_eval(m - 1, xi))
}

/// Regular (polynomial) factor of the order-`μ` derivative of a modal function.
///
/// Uses `D_left^μ P_n = Γ(n+1)/Γ(n+1-μ) (1+ξ)^{-μ} P_n^{μ,-μ}` and its mirror
/// `D_right^μ P_n = Γ(n+1)/Γ(n+1-μ) (1-ξ)^{-μ} P_n^{-μ,μ}`; the singular
/// `(1 ± ξ)^{-μ}` is left out.
pub fn modal_deriv_regular(kind: ModalKind, side: Side, mu: f64, m: usize, xi: f64) -> f64 {
    let params = match side {
        Side::Left => JacobiParams::new(mu, -mu),
        Side::Right => JacobiParams::new(-mu, mu),
    }
    .expect("μ in (0,1)");
    let term = |n: usize| gamma_ratio(n as f64 + 1.0, n as f64 + 1.0 - mu) * jacobi_eval(params, n, xi);
    modal_scale(kind, m) * (term(m + 1) - term(m - 1))
}

/// Order-`μ` Riemann-Liouville derivative of a modal Legendre function.
///
/// At the singular endpoint (`ξ = -1` for the left side, `ξ = 1` for the
/// right) this returns an infinity carrying the sign of the regular factor.
pub fn frac_deriv_modal_legendre(kind: ModalKind, side: Side, mu: f64, m: usize, xi: f64) -> f64 {
    let regular = modal_deriv_regular(kind, side, mu, m, xi);
    let r = match side {
        Side::Left => 1.0 + xi,
        Side::Right => 1.0 - xi,
    };
    if r <= 0.0 {
        return f64::INFINITY.copysign(regular);
    }
    r.powf(-mu) * regular
}
