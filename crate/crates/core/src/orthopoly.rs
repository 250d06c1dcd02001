//! Legendre and Jacobi polynomials, and Gauss-Legendre / Gauss-Jacobi rules.
//!
//! Rules are built from the symmetric tridiagonal Jacobi matrix of the
//! three-term recurrence (Golub-Welsch). The eigenvalues are then polished
//! by Newton's method on `P_m^{a,b}` and the weights are taken from the
//! closed-form Christoffel numbers, evaluated with log-Gamma differences.

use faer::{Mat, Side};
use thiserror::Error;

use crate::special::{beta, ln_gamma};

/// Largest number of points (and therefore polynomial degree) a rule may have.
pub const MAX_POINTS: usize = 512;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITERS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("Jacobi parameters must exceed -1, got a = {a}, b = {b}")]
    InvalidParams { a: f64, b: f64 },
    #[error("a quadrature rule needs at least one point")]
    Empty,
    #[error("requested {0} points, above the cap of {MAX_POINTS}")]
    TooManyPoints(usize),
    #[error("tridiagonal eigen-solve failed for the {0}-point rule")]
    EigenFailure(usize),
    #[error("Newton polishing of node {index} did not reach {NEWTON_TOL:e} (last step {step:e})")]
    NoConvergence { index: usize, step: f64 },
}

/// Exponents of the Jacobi weight `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    a: f64,
    b: f64,
}

impl JacobiParams {
    pub fn new(a: f64, b: f64) -> Result<Self, QuadratureError> {
        if a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite() {
            Ok(Self { a, b })
        } else {
            Err(QuadratureError::InvalidParams { a, b })
        }
    }

    pub const LEGENDRE: Self = Self { a: 0.0, b: 0.0 };

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `∫_{-1}^{1} (1 - x)^a (1 + x)^b dx = 2^{a+b+1} B(a+1, b+1)`.
    pub fn total_mass(&self) -> f64 {
        (self.a + self.b + 1.0).exp2() * beta(self.a + 1.0, self.b + 1.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.a == self.b
    }
}

/// Value of the degree-`n` Legendre polynomial at `x`.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    let (mut p_prev, mut p) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

/// Value of `P_n^{a,b}(x)` from the Jacobi three-term recurrence.
pub fn jacobi_eval(p: JacobiParams, n: usize, x: f64) -> f64 {
    jacobi_pair(p, n, x).1
}

/// Returns `(P_{n-1}, P_n)`; the first entry is 0 when `n == 0`.
fn jacobi_pair(p: JacobiParams, n: usize, x: f64) -> (f64, f64) {
    let (a, b) = (p.a, p.b);
    if n == 0 {
        return (0.0, 1.0);
    }
    let mut p_prev = 1.0;
    let mut p_cur = 0.5 * (a + b + 2.0) * x + 0.5 * (a - b);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c1 = 2.0 * (kf + 1.0) * (kf + a + b + 1.0) * s;
        let c2 = (s + 1.0) * (s * (s + 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (kf + a) * (kf + b) * (s + 2.0);
        let next = (c2 * p_cur - c3 * p_prev) / c1;
        p_prev = p_cur;
        p_cur = next;
    }
    (p_prev, p_cur)
}

/// `d/dx P_n^{a,b}(x) = (n + a + b + 1)/2 · P_{n-1}^{a+1,b+1}(x)`.
pub fn jacobi_deriv(p: JacobiParams, n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let shifted = JacobiParams {
        a: p.a + 1.0,
        b: p.b + 1.0,
    };
    0.5 * (n as f64 + p.a + p.b + 1.0) * jacobi_eval(shifted, n - 1, x)
}

/// Nodes and weights of a Gauss rule on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    params: JacobiParams,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`, i.e. `∫ f(x) (1-x)^a (1+x)^b dx` for polynomial `f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Nodes and weights affinely carried to `[lo, hi]` (weights include the Jacobian).
    pub fn mapped(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (hi - lo);
        let nodes = self.nodes.iter().map(|&x| lo + half * (x + 1.0)).collect();
        let weights = self.weights.iter().map(|&w| w * half).collect();
        (nodes, weights)
    }
}

/// `m`-point Gauss-Legendre rule, exact for degree `≤ 2m - 1`.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule, QuadratureError> {
    gauss_jacobi(JacobiParams::LEGENDRE, m)
}

/// `m`-point Gauss-Jacobi rule for `(1-x)^a (1+x)^b`, exact for degree `≤ 2m - 1`.
pub fn gauss_jacobi(p: JacobiParams, m: usize) -> Result<QuadratureRule, QuadratureError> {
    if m == 0 {
        return Err(QuadratureError::Empty);
    }
    if m > MAX_POINTS {
        return Err(QuadratureError::TooManyPoints(m));
    }
    let mut nodes = tridiagonal_nodes(p, m)?;
    for (index, x) in nodes.iter_mut().enumerate() {
        *x = polish(p, m, *x, index)?;
    }
    nodes.sort_by(|a, b| a.total_cmp(b));

    // Christoffel numbers:
    // w_i = 2^{a+b+1} Γ(m+a+1) Γ(m+b+1) / (Γ(m+a+b+1) m!) / ((1 - x_i²) P_m'(x_i)²)
    let (a, b) = (p.a, p.b);
    let mf = m as f64;
    let log_c = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(mf + a + 1.0)
        + ln_gamma(mf + b + 1.0)
        - ln_gamma(mf + a + b + 1.0)
        - ln_gamma(mf + 1.0);
    let c = log_c.exp();
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let d = jacobi_deriv(p, m, x);
            c / ((1.0 - x * x) * d * d)
        })
        .collect();

    if p.is_symmetric() {
        symmetrize(&mut nodes, &mut weights);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        params: p,
    })
}

fn tridiagonal_nodes(p: JacobiParams, m: usize) -> Result<Vec<f64>, QuadratureError> {
    let (a, b) = (p.a, p.b);
    if m == 1 {
        return Ok(vec![(b - a) / (a + b + 2.0)]);
    }
    let mut jm = Mat::<f64>::zeros(m, m);
    for n in 0..m {
        let nf = n as f64;
        let s = 2.0 * nf + a + b;
        jm[(n, n)] = if n == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if n + 1 < m {
            // off-diagonal for the (n, n+1) pair, indexed by k = n + 1
            let k = nf + 1.0;
            let sk = 2.0 * k + a + b;
            let off2 = if n == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + a + b)
                    / (sk * sk * (sk + 1.0) * (sk - 1.0))
            };
            let off = off2.sqrt();
            jm[(n, n + 1)] = off;
            jm[(n + 1, n)] = off;
        }
    }
    let evd = jm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| QuadratureError::EigenFailure(m))?;
    let s = evd.S();
    Ok((0..m).map(|i| s[i].clamp(-1.0, 1.0)).collect())
}

fn polish(p: JacobiParams, m: usize, mut x: f64, index: usize) -> Result<f64, QuadratureError> {
    let mut step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERS {
        let f = jacobi_eval(p, m, x);
        let d = jacobi_deriv(p, m, x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        step = f / d;
        x -= step;
        if step.abs() <= NEWTON_TOL * 1e-1 {
            break;
        }
    }
    if step.abs() <= NEWTON_TOL && x.abs() < 1.0 {
        Ok(x)
    } else {
        Err(QuadratureError::NoConvergence { index, step })
    }
}

/// Enforces exact mirror symmetry for symmetric weights; the middle node of an
/// odd rule becomes exactly zero.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let m = nodes.len();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
}
