//! Space-time Petrov-Galerkin discretization of
//! `D_t^α u - Σ_j k_j (D_left^{β_j} + D_right^{β_j}) u + γ u = h + f`
//! with zero initial data and homogeneous Dirichlet boundaries, plus the
//! direct (dense Kronecker) and fast (eigen-decomposition) solvers.
//!
//! Matrix rows are test indices and columns trial indices. Coefficient
//! tensors are row-major with the temporal index slowest.

use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, MatRef, Side as FaerSide};
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fractional::{
    affine_scale, modal_deriv_regular, modal_legendre, modal_scale, polyfrac_deriv_regular, polyfrac_first,
    rl_frac_deriv_power, BasisScaling, BasisSpec, FractionalError, FractionalOrder, ModalKind, OrderKind,
    PolyFracKind, Side,
};
use crate::orthopoly::{gauss_jacobi, gauss_legendre, jacobi_eval, JacobiParams, QuadratureError, QuadratureRule};
use crate::tensor::{mode_product, multi_mode_product};

/// Largest system the dense direct solver will build.
pub const DIRECT_UNKNOWN_LIMIT: usize = 20_000;
/// Relative threshold below which an eigenvalue combination counts as resonant.
pub const RESONANCE_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum PgError {
    #[error(transparent)]
    Fractional(#[from] FractionalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("problem mismatch: {0}")]
    Mismatch(String),
    #[error("{unknowns} unknowns exceed the direct-solver limit of {limit}")]
    TooLarge { unknowns: usize, limit: usize },
    #[error("singular system: smallest pivot {pivot:e} (largest {largest:e})")]
    Singular { pivot: f64, largest: f64 },
    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
    #[error("resonant system: min |Λ| = {min:e} against max |Λ| = {max:e}")]
    Resonance { min: f64, max: f64 },
    #[error("point ({t}, {x:?}) lies outside the space-time domain")]
    OutOfDomain { t: f64, x: Vec<f64> },
    #[error("malformed solution record: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OperatorMode {
    #[default]
    TwoSided,
    LeftOnly,
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorMode::TwoSided => "two_sided",
            OperatorMode::LeftOnly => "left_only",
        })
    }
}

pub type SpaceTimeFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One additive piece of the deterministic forcing `h`.
///
/// `time_power` and `space_powers` describe an endpoint singularity
/// `t^p Π (x_j - a_j)^{p_j}` times a smooth factor. The load quadrature then
/// absorbs the singular part into a Gauss-Jacobi weight and only ever sees
/// the smooth remainder. Zero powers are always safe.
#[derive(Clone)]
pub struct ForcingTerm {
    func: SpaceTimeFn,
    time_power: f64,
    space_powers: Vec<f64>,
}

impl ForcingTerm {
    pub fn new(func: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            func: Arc::new(func),
            time_power: 0.0,
            space_powers: Vec::new(),
        }
    }

    pub fn with_powers(mut self, time_power: f64, space_powers: Vec<f64>) -> Self {
        self.time_power = time_power;
        self.space_powers = space_powers;
        self
    }

    fn space_power(&self, j: usize) -> f64 {
        self.space_powers.get(j).copied().unwrap_or(0.0)
    }
}

/// Deterministic forcing `h(t, x)`: a labelled sum of terms.
///
/// The label takes part in the problem fingerprint, so two forcings that
/// differ must carry different labels.
#[derive(Clone)]
pub struct Forcing {
    label: String,
    terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn zero() -> Self {
        Self {
            label: "zero".into(),
            terms: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, terms: Vec<ForcingTerm>) -> Self {
        Self {
            label: label.into(),
            terms,
        }
    }

    pub fn from_fn(label: impl Into<String>, func: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, vec![ForcingTerm::new(func)])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        self.terms.iter().map(|term| (term.func)(t, x)).sum()
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forcing")
            .field("label", &self.label)
            .field("terms", &self.terms.len())
            .finish()
    }
}

/// Space-independent additive forcing `f(t)`.
#[derive(Clone)]
pub struct TimeForcing {
    label: String,
    func: TimeFn,
}

impl TimeForcing {
    pub fn new(label: impl Into<String>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            func: Arc::new(func),
        }
    }

    pub fn from_arc(label: impl Into<String>, func: TimeFn) -> Self {
        Self {
            label: label.into(),
            func,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.func)(t)
    }
}

impl fmt::Debug for TimeForcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeForcing").field("label", &self.label).finish()
    }
}

/// One realization of the fractional PDE.
#[derive(Debug, Clone)]
pub struct DeterministicProblem {
    alpha: FractionalOrder,
    beta: Vec<FractionalOrder>,
    k: Vec<f64>,
    gamma: f64,
    mode: OperatorMode,
    basis: BasisSpec,
    forcing_h: Forcing,
    forcing_f: Option<TimeForcing>,
}

impl DeterministicProblem {
    pub fn new(
        alpha: FractionalOrder,
        beta: Vec<FractionalOrder>,
        k: Vec<f64>,
        basis: BasisSpec,
        forcing_h: Forcing,
    ) -> Result<Self, PgError> {
        if alpha.kind() != OrderKind::Temporal {
            return Err(PgError::Mismatch("α must be a temporal order".into()));
        }
        if beta.iter().any(|b| b.kind() != OrderKind::Spatial) {
            return Err(PgError::Mismatch("every β_j must be a spatial order".into()));
        }
        let d = basis.spatial_dims();
        if beta.len() != d || k.len() != d {
            return Err(PgError::Mismatch(format!(
                "basis has {d} spatial dimensions but {} orders and {} coefficients",
                beta.len(),
                k.len()
            )));
        }
        if k.iter().any(|&kj| !(kj > 0.0 && kj.is_finite())) {
            return Err(PgError::Mismatch("diffusion coefficients must be positive".into()));
        }
        Ok(Self {
            alpha,
            beta,
            k,
            gamma: 0.0,
            mode: OperatorMode::TwoSided,
            basis,
            forcing_h,
            forcing_f: None,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self, PgError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(PgError::Mismatch(format!("reaction coefficient must be >= 0, got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: OperatorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_noise(mut self, f: TimeForcing) -> Self {
        self.forcing_f = Some(f);
        self
    }

    pub fn with_basis(mut self, basis: BasisSpec) -> Result<Self, PgError> {
        if basis.spatial_dims() != self.beta.len() {
            return Err(PgError::Mismatch("basis dimension changed".into()));
        }
        self.basis = basis;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn beta(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.value()).collect()
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn forcing_h(&self) -> &Forcing {
        &self.forcing_h
    }

    pub fn forcing_f(&self) -> Option<&TimeForcing> {
        self.forcing_f.as_ref()
    }

    /// Total forcing `h(t, x) + f(t)`.
    pub fn forcing(&self, t: f64, x: &[f64]) -> f64 {
        self.forcing_h.eval(t, x) + self.forcing_f.as_ref().map_or(0.0, |f| f.eval(t))
    }

    /// SHA-256 over every input that influences the discrete solution.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |tag: &str, v: f64| {
            h.update(tag.as_bytes());
            h.update(v.to_bits().to_le_bytes());
        };
        put("alpha", self.alpha.value());
        for b in &self.beta {
            put("beta", b.value());
        }
        for k in &self.k {
            put("k", *k);
        }
        put("gamma", self.gamma);
        let b = &self.basis;
        put("N", b.temporal_count() as f64);
        for m in b.spatial_counts() {
            put("M", *m as f64);
        }
        put("tau", b.tau());
        put("T", b.horizon());
        for (lo, hi) in b.spatial_intervals() {
            put("a", *lo);
            put("b", *hi);
        }
        let s = b.scaling();
        for v in [s.temporal_trial, s.temporal_test, s.spatial_trial, s.spatial_test] {
            put("scale", v);
        }
        for term in &self.forcing_h.terms {
            put("tp", term.time_power);
            for p in &term.space_powers {
                put("sp", *p);
            }
        }
        h.update(self.mode.to_string().as_bytes());
        h.update(b"h:");
        h.update(self.forcing_h.label.as_bytes());
        if let Some(f) = &self.forcing_f {
            h.update(b"f:");
            h.update(f.label.as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Matrices and load tensor of one realization.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub s_t: Mat<f64>,
    pub m_t: Mat<f64>,
    pub s_space: Vec<Mat<f64>>,
    pub m_space: Vec<Mat<f64>>,
    pub load: Vec<f64>,
    pub gamma: f64,
    pub mode: OperatorMode,
    basis: BasisSpec,
    alpha: f64,
    beta: Vec<f64>,
    fingerprint: String,
}

impl AssembledSystem {
    pub fn shape(&self) -> Vec<usize> {
        self.basis.shape()
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Copy with a different load tensor (same shape).
    pub fn with_load(&self, load: Vec<f64>) -> Result<Self, PgError> {
        if load.len() != self.load.len() {
            return Err(PgError::Mismatch("load tensor size".into()));
        }
        let mut s = self.clone();
        s.load = load;
        Ok(s)
    }

    /// Dense Kronecker-sum operator acting on `vec(Û)`.
    pub fn dense_operator(&self) -> Mat<f64> {
        let d = self.m_space.len();
        let kron_all = |first: &Mat<f64>, swap: Option<usize>| {
            let mut acc = first.clone();
            for j in 0..d {
                let m = match swap {
                    Some(s) if s == j => &self.s_space[j],
                    _ => &self.m_space[j],
                };
                acc = kron(&acc, m);
            }
            acc
        };
        let mut a = kron_all(&self.s_t, None);
        for j in 0..d {
            a += kron_all(&self.m_t, Some(j));
        }
        if self.gamma != 0.0 {
            a += kron_all(&self.m_t, None) * faer::Scale(self.gamma);
        }
        a
    }
}

fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Expansion coefficients `û_{n, m_1, …, m_d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    coefficients: Vec<f64>,
    basis: BasisSpec,
    alpha: f64,
    beta: Vec<f64>,
    fingerprint: String,
}

impl SpectralSolution {
    pub fn new(coefficients: Vec<f64>, basis: BasisSpec, alpha: f64, beta: Vec<f64>, fingerprint: String) -> Result<Self, PgError> {
        if coefficients.len() != basis.unknowns() {
            return Err(PgError::Mismatch(format!(
                "{} coefficients for a basis of {} functions",
                coefficients.len(),
                basis.unknowns()
            )));
        }
        Ok(Self {
            coefficients,
            basis,
            alpha,
            beta,
            fingerprint,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Text record: a header of `key value...` lines, then one coefficient per line.
    pub fn to_text(&self) -> String {
        let b = &self.basis;
        let s = b.scaling();
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        out.push_str("fracuq-solution 1\n");
        out.push_str(&format!("fingerprint {}\n", self.fingerprint));
        out.push_str(&format!("N {}\n", b.temporal_count()));
        out.push_str(&format!("M {}\n", join(&mut b.spatial_counts().iter().map(|m| m.to_string()))));
        out.push_str(&format!("alpha {:e}\n", self.alpha));
        out.push_str(&format!("beta {}\n", join(&mut self.beta.iter().map(|v| format!("{v:e}")))));
        out.push_str(&format!("tau {:e}\n", b.tau()));
        out.push_str(&format!("T {:e}\n", b.horizon()));
        out.push_str(&format!(
            "domain {}\n",
            join(&mut b.spatial_intervals().iter().map(|(lo, hi)| format!("{lo:e} {hi:e}")))
        ));
        out.push_str(&format!(
            "scaling {:e} {:e} {:e} {:e}\n",
            s.temporal_trial, s.temporal_test, s.spatial_trial, s.spatial_test
        ));
        out.push_str(&format!("coefficients {}\n", self.coefficients.len()));
        for c in &self.coefficients {
            out.push_str(&format!("{c:e}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PgError> {
        let bad = |m: &str| PgError::Format(m.to_string());
        let mut lines = text.lines();
        if lines.next() != Some("fracuq-solution 1") {
            return Err(bad("missing header"));
        }
        let mut field = |key: &str| -> Result<Vec<String>, PgError> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(PgError::Format(format!("expected `{key}`")));
            }
            Ok(parts.map(str::to_string).collect())
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| PgError::Format(format!("bad number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| PgError::Format(format!("bad integer `{s}`")));
        let fingerprint = field("fingerprint")?.join("");
        let n = int(field("N")?.first().ok_or_else(|| bad("N"))?)?;
        let m = field("M")?.iter().map(|s| int(s)).collect::<Result<Vec<_>, _>>()?;
        let alpha = num(field("alpha")?.first().ok_or_else(|| bad("alpha"))?)?;
        let beta = field("beta")?.iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
        let tau = num(field("tau")?.first().ok_or_else(|| bad("tau"))?)?;
        let horizon = num(field("T")?.first().ok_or_else(|| bad("T"))?)?;
        let dom = field("domain")?.iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
        if dom.len() % 2 != 0 {
            return Err(bad("odd number of domain bounds"));
        }
        let intervals = dom.chunks(2).map(|c| (c[0], c[1])).collect();
        let sc = field("scaling")?.iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
        if sc.len() != 4 {
            return Err(bad("scaling needs four values"));
        }
        let count = int(field("coefficients")?.first().ok_or_else(|| bad("coefficients"))?)?;
        let coefficients = lines.take(count).map(|l| num(l.trim())).collect::<Result<Vec<_>, _>>()?;
        if coefficients.len() != count {
            return Err(bad("truncated coefficient list"));
        }
        let basis = BasisSpec::new(n, m, tau, horizon, intervals)?.with_scaling(BasisScaling {
            temporal_trial: sc[0],
            temporal_test: sc[1],
            spatial_trial: sc[2],
            spatial_test: sc[3],
        })?;
        Self::new(coefficients, basis, alpha, beta, fingerprint)
    }
}

fn default_points(basis: &BasisSpec, boost: usize) -> usize {
    let mmax = basis.spatial_counts().iter().copied().max().unwrap_or(0);
    basis.temporal_count().max(mmax) + 10 + boost
}

/// Temporal stiffness and mass matrices on `[0, T]`.
fn temporal_matrices(basis: &BasisSpec, alpha: f64, nq: usize) -> Result<(Mat<f64>, Mat<f64>), PgError> {
    let n = basis.temporal_count();
    let tau = basis.tau();
    let sigma = alpha / 2.0;
    let horizon = basis.horizon();
    let sc = basis.scaling();
    let trial_test = sc.temporal_trial * sc.temporal_test;

    // Both half-derivatives carry (1 ± η)^{τ-σ}; absorb them into the weight.
    let excess = tau - sigma;
    let stiff_rule = if excess == 0.0 {
        gauss_legendre(nq)?
    } else {
        gauss_jacobi(JacobiParams::new(excess, excess)?, nq)?
    };
    let stiff_scale = trial_test * horizon / 2.0 * affine_scale(alpha, 0.0, horizon)?;
    let dl: Vec<Vec<f64>> = (1..=n)
        .map(|i| {
            stiff_rule
                .nodes()
                .iter()
                .map(|&x| polyfrac_deriv_regular(PolyFracKind::First, i, tau, sigma, x))
                .collect()
        })
        .collect();
    let dr: Vec<Vec<f64>> = (1..=n)
        .map(|i| {
            stiff_rule
                .nodes()
                .iter()
                .map(|&x| polyfrac_deriv_regular(PolyFracKind::Second, i, tau, sigma, x))
                .collect()
        })
        .collect();
    let w = stiff_rule.weights();
    let s_t = Mat::from_fn(n, n, |k, j| {
        stiff_scale * (0..w.len()).map(|q| w[q] * dl[j][q] * dr[k][q]).sum::<f64>()
    });

    // ψ_n Ψ_k = (1+η)^τ (1-η)^τ × polynomials.
    let mass_rule = gauss_jacobi(JacobiParams::new(tau, tau)?, nq)?;
    let pf = JacobiParams::new(-tau, tau)?;
    let ps = JacobiParams::new(tau, -tau)?;
    let mass_scale = trial_test * horizon / 2.0;
    let pn: Vec<Vec<f64>> = (0..n)
        .map(|i| mass_rule.nodes().iter().map(|&x| jacobi_eval(pf, i, x)).collect())
        .collect();
    let pk: Vec<Vec<f64>> = (0..n)
        .map(|i| mass_rule.nodes().iter().map(|&x| jacobi_eval(ps, i, x)).collect())
        .collect();
    let w = mass_rule.weights();
    let m_t = Mat::from_fn(n, n, |k, j| {
        mass_scale * (0..w.len()).map(|q| w[q] * pn[j][q] * pk[k][q]).sum::<f64>()
    });
    Ok((s_t, m_t))
}

/// Closed-form spatial mass matrix for the modal basis on `[a, b]`.
pub fn spatial_mass(m_count: usize, a: f64, b: f64, scaling: BasisScaling) -> Mat<f64> {
    let jac = (b - a) / 2.0 * scaling.spatial_trial * scaling.spatial_test;
    Mat::from_fn(m_count, m_count, |r0, m0| {
        let (r, m) = (r0 + 1, m0 + 1);
        let base = if r == m {
            2.0 / (2.0 * m as f64 + 3.0) + 2.0 / (2.0 * m as f64 - 1.0)
        } else if r.abs_diff(m) == 2 {
            -2.0 / (2.0 * r.min(m) as f64 + 3.0)
        } else {
            0.0
        };
        base * jac * modal_scale(ModalKind::Basis, m) * modal_scale(ModalKind::Test, r)
    })
}

fn spatial_stiffness(
    m_count: usize,
    beta: f64,
    k: f64,
    (a, b): (f64, f64),
    mode: OperatorMode,
    scaling: BasisScaling,
    nq: usize,
) -> Result<Mat<f64>, PgError> {
    let mu = beta / 2.0;
    // (1+ξ)^{-μ}(1-ξ)^{-μ} from the two half-derivatives.
    let rule = gauss_jacobi(JacobiParams::new(-mu, -mu)?, nq)?;
    let scale = -k * (b - a) / 2.0 * affine_scale(beta, a, b)? * scaling.spatial_trial * scaling.spatial_test;
    let eval = |kind, side| -> Vec<Vec<f64>> {
        (1..=m_count)
            .map(|m| rule.nodes().iter().map(|&x| modal_deriv_regular(kind, side, mu, m, x)).collect())
            .collect()
    };
    let trial_l = eval(ModalKind::Basis, Side::Left);
    let test_r = eval(ModalKind::Test, Side::Right);
    let (trial_r, test_l) = match mode {
        OperatorMode::TwoSided => (eval(ModalKind::Basis, Side::Right), eval(ModalKind::Test, Side::Left)),
        OperatorMode::LeftOnly => (Vec::new(), Vec::new()),
    };
    let w = rule.weights();
    Ok(Mat::from_fn(m_count, m_count, |r, m| {
        let mut acc: f64 = (0..w.len()).map(|q| w[q] * trial_l[m][q] * test_r[r][q]).sum();
        if mode == OperatorMode::TwoSided {
            acc += (0..w.len()).map(|q| w[q] * trial_r[m][q] * test_l[r][q]).sum::<f64>();
        }
        scale * acc
    }))
}

/// Moves quadrature to (1+η)^p-weighted rules when the integrand has that factor.
fn rule_with_left_power(right: f64, p: f64, nq: usize) -> Result<QuadratureRule, PgError> {
    if right == 0.0 && p == 0.0 {
        Ok(gauss_legendre(nq)?)
    } else {
        Ok(gauss_jacobi(JacobiParams::new(right, p)?, nq)?)
    }
}

fn load_tensor(problem: &DeterministicProblem, nq: usize) -> Result<Vec<f64>, PgError> {
    let basis = &problem.basis;
    let n = basis.temporal_count();
    let tau = basis.tau();
    let horizon = basis.horizon();
    let sc = basis.scaling();
    let shape = basis.shape();
    let d = basis.spatial_dims();
    let mut load = vec![0.0; basis.unknowns()];
    let ps = JacobiParams::new(tau, -tau)?;
    // Ψ_k / (1-η)^τ, sampled at temporal nodes.
    let time_test = |rule: &QuadratureRule| {
        Mat::from_fn(n, rule.len(), |k, q| sc.temporal_test * jacobi_eval(ps, k, rule.nodes()[q]))
    };
    let jac_t = horizon / 2.0;

    for term in &problem.forcing_h.terms {
        let pt = term.time_power;
        let trule = rule_with_left_power(tau, pt, nq)?;
        let srules = (0..d)
            .map(|j| rule_with_left_power(0.0, term.space_power(j), nq))
            .collect::<Result<Vec<_>, _>>()?;
        // physical node coordinates and weight-corrected samples
        let times: Vec<f64> = trule.nodes().iter().map(|&e| (e + 1.0) * jac_t).collect();
        let xs: Vec<Vec<f64>> = srules
            .iter()
            .zip(basis.spatial_intervals())
            .map(|(r, &(a, b))| r.nodes().iter().map(|&e| a + (e + 1.0) * (b - a) / 2.0).collect())
            .collect();
        let mut grid_shape = vec![trule.len()];
        grid_shape.extend(srules.iter().map(|r| r.len()));
        let total: usize = grid_shape.iter().product();
        let mut samples = vec![0.0; total];
        let mut idx = vec![0usize; d + 1];
        let mut x = vec![0.0; d];
        for s in samples.iter_mut() {
            let it = idx[0];
            let mut wprod = trule.weights()[it] / (1.0 + trule.nodes()[it]).powf(pt);
            for j in 0..d {
                let q = idx[j + 1];
                x[j] = xs[j][q];
                wprod *= srules[j].weights()[q] / (1.0 + srules[j].nodes()[q]).powf(term.space_power(j));
            }
            *s = wprod * (term.func)(times[it], &x);
            for a in (0..=d).rev() {
                idx[a] += 1;
                if idx[a] < grid_shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let mut mats = vec![time_test(&trule)];
        for (j, r) in srules.iter().enumerate() {
            let (lo, hi) = basis.spatial_intervals()[j];
            let jac = (hi - lo) / 2.0;
            mats.push(Mat::from_fn(shape[j + 1], r.len(), |m, q| {
                jac * sc.spatial_test * modal_legendre(ModalKind::Test, m + 1, r.nodes()[q])
            }));
        }
        let refs: Vec<MatRef<'_, f64>> = mats.iter().map(|m| m.as_ref()).collect();
        let (contrib, _) = multi_mode_product(&samples, &grid_shape, &refs);
        for (l, c) in load.iter_mut().zip(contrib) {
            *l += jac_t * c;
        }
    }

    if let Some(f) = &problem.forcing_f {
        // Separable: (∫ f Ψ_k dt) ⊗ Π_j ∫ Φ_r dx_j, and only r = 1 survives in space.
        let trule = gauss_jacobi(JacobiParams::new(tau, 0.0)?, nq + 20)?;
        let tvec: Vec<f64> = (0..n)
            .map(|k| {
                jac_t
                    * trule
                        .nodes()
                        .iter()
                        .zip(trule.weights())
                        .map(|(&e, &w)| w * f.eval((e + 1.0) * jac_t) * sc.temporal_test * jacobi_eval(ps, k, e))
                        .sum::<f64>()
            })
            .collect();
        let space_factor: f64 = basis
            .spatial_intervals()
            .iter()
            .map(|&(a, b)| (b - a) / 2.0 * sc.spatial_test * modal_scale(ModalKind::Test, 1) * -2.0)
            .product();
        let stride: usize = shape[1..].iter().product();
        for (k, tv) in tvec.iter().enumerate() {
            // every spatial index equal to the first mode
            load[k * stride] += tv * space_factor;
        }
    }
    Ok(load)
}

/// Builds the matrices and load of the Petrov-Galerkin system.
pub fn assemble(problem: &DeterministicProblem, quadrature_boost: usize) -> Result<AssembledSystem, PgError> {
    let basis = &problem.basis;
    let nq = default_points(basis, quadrature_boost);
    let (s_t, m_t) = temporal_matrices(basis, problem.alpha(), nq)?;
    let mut s_space = Vec::with_capacity(basis.spatial_dims());
    let mut m_space = Vec::with_capacity(basis.spatial_dims());
    for j in 0..basis.spatial_dims() {
        let mj = basis.spatial_counts()[j];
        let iv = basis.spatial_intervals()[j];
        m_space.push(spatial_mass(mj, iv.0, iv.1, basis.scaling()));
        s_space.push(spatial_stiffness(
            mj,
            problem.beta[j].value(),
            problem.k[j],
            iv,
            problem.mode,
            basis.scaling(),
            nq,
        )?);
    }
    let load = load_tensor(problem, nq)?;
    Ok(AssembledSystem {
        s_t,
        m_t,
        s_space,
        m_space,
        load,
        gamma: problem.gamma,
        mode: problem.mode,
        basis: basis.clone(),
        alpha: problem.alpha(),
        beta: problem.beta(),
        fingerprint: problem.fingerprint(),
    })
}

fn into_solution(system: &AssembledSystem, coefficients: Vec<f64>) -> Result<SpectralSolution, PgError> {
    SpectralSolution::new(
        coefficients,
        system.basis.clone(),
        system.alpha,
        system.beta.clone(),
        system.fingerprint.clone(),
    )
}

/// Dense pivoted-LU solve of the Kronecker system. Meant as an oracle.
pub fn solve_direct(system: &AssembledSystem) -> Result<SpectralSolution, PgError> {
    let unknowns = system.load.len();
    if unknowns > DIRECT_UNKNOWN_LIMIT {
        return Err(PgError::TooLarge {
            unknowns,
            limit: DIRECT_UNKNOWN_LIMIT,
        });
    }
    let a = system.dense_operator();
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let diag: Vec<f64> = (0..unknowns).map(|i| u[(i, i)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    let pivot = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(pivot > largest * f64::EPSILON * unknowns as f64) || !largest.is_finite() {
        return Err(PgError::Singular { pivot, largest });
    }
    let rhs = Mat::from_fn(unknowns, 1, |i, _| system.load[i]);
    let x = lu.solve(&rhs);
    into_solution(system, (0..unknowns).map(|i| x[(i, 0)]).collect())
}

/// Eigenvalues with forward (`vectors`) and inverse-side (`projector`) maps:
/// `projector · B · vectors = I` for the pencil's right-hand matrix `B`.
struct Pencil {
    values: Vec<Complex64>,
    vectors: Mat<Complex64>,
    projector: Mat<Complex64>,
}

fn to_complex(m: MatRef<'_, f64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// General pencil `A e = λ B e` through the eigen-decomposition of `B^{-1} A`.
fn general_pencil(a: &Mat<f64>, b: &Mat<f64>) -> Result<Pencil, PgError> {
    let binv_a = b.partial_piv_lu().solve(a);
    let evd = binv_a
        .eigen()
        .map_err(|e| PgError::Eigen(format!("{e:?}")))?;
    let vectors: Mat<Complex64> = evd.U().to_owned();
    let values: Vec<Complex64> = (0..a.nrows()).map(|i| evd.S()[i]).collect();
    let be = to_complex(b.as_ref()) * &vectors;
    let projector = be.partial_piv_lu().inverse();
    if (0..projector.nrows()).any(|i| (0..projector.ncols()).any(|j| !projector[(i, j)].norm().is_finite())) {
        return Err(PgError::Eigen("defective eigenvector basis".into()));
    }
    Ok(Pencil {
        values,
        vectors,
        projector,
    })
}

/// Symmetric pencil `S e = λ M e` where `D M` is positive definite for the
/// diagonal sign matrix `D = sign(diag M)` and `D S` is symmetric.
fn signed_symmetric_pencil(s: &Mat<f64>, m: &Mat<f64>) -> Option<Pencil> {
    let n = m.nrows();
    let sign: Vec<f64> = (0..n).map(|i| m[(i, i)].signum()).collect();
    let dm = Mat::from_fn(n, n, |i, j| sign[i] * m[(i, j)]);
    let ds = Mat::from_fn(n, n, |i, j| 0.5 * (sign[i] * s[(i, j)] + sign[j] * s[(j, i)]));
    let llt = dm.llt(FaerSide::Lower).ok()?;
    let l = llt.L().to_owned();
    // C = L^{-1} (DS) L^{-T}
    let linv = l.partial_piv_lu().inverse();
    let c = &linv * &ds * linv.transpose();
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c.self_adjoint_eigen(FaerSide::Lower).ok()?;
    let y = evd.U();
    let e = linv.transpose() * y;
    let values = (0..n).map(|i| Complex64::new(evd.S()[i], 0.0)).collect();
    // Eᵀ D M E = I, so Eᵀ D inverts M E.
    let projector = Mat::from_fn(n, n, |i, j| Complex64::new(e[(j, i)] * sign[j], 0.0));
    Some(Pencil {
        values,
        vectors: to_complex(e.as_ref()),
        projector,
    })
}

/// Diagonalizes each factor pair and solves the Kronecker system in closed form.
pub fn solve_fast(system: &AssembledSystem) -> Result<SpectralSolution, PgError> {
    // temporal: M_T e = λ S_T e
    let temporal = general_pencil(&system.m_t, &system.s_t)?;
    let mut spatial = Vec::with_capacity(system.m_space.len());
    for (s, m) in system.s_space.iter().zip(&system.m_space) {
        let p = match system.mode {
            OperatorMode::TwoSided => signed_symmetric_pencil(s, m).map(Ok),
            OperatorMode::LeftOnly => None,
        }
        .unwrap_or_else(|| general_pencil(s, m))?;
        spatial.push(p);
    }

    let shape = system.shape();
    let load: Vec<Complex64> = system.load.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut projectors = vec![temporal.projector.as_ref()];
    projectors.extend(spatial.iter().map(|p| p.projector.as_ref()));
    let (mut g, _) = multi_mode_product(&load, &shape, &projectors);

    // Λ = 1 + γ λ_n + λ_n Σ_j λ_{m_j}, visited in row-major order.
    let total = g.len();
    let mut lambda = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; shape.len()];
    for l in lambda.iter_mut() {
        let ln = temporal.values[idx[0]];
        let sum: Complex64 = spatial.iter().enumerate().map(|(j, p)| p.values[idx[j + 1]]).sum();
        *l = Complex64::new(1.0, 0.0) + ln * system.gamma + ln * sum;
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    let max = lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let min = lambda.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    if !(min >= RESONANCE_TOL * max) {
        return Err(PgError::Resonance { min, max });
    }
    for (gi, li) in g.iter_mut().zip(&lambda) {
        *gi /= li;
    }
    let mut vectors = vec![temporal.vectors.as_ref()];
    vectors.extend(spatial.iter().map(|p| p.vectors.as_ref()));
    let (u, _) = multi_mode_product(&g, &shape, &vectors);
    into_solution(system, u.into_iter().map(|c| c.re).collect())
}

fn time_to_ref(t: f64, horizon: f64) -> f64 {
    (2.0 * t / horizon - 1.0).clamp(-1.0, 1.0)
}

fn space_to_ref(x: f64, (a, b): (f64, f64)) -> f64 {
    (2.0 * (x - a) / (b - a) - 1.0).clamp(-1.0, 1.0)
}

fn in_domain(basis: &BasisSpec, t: f64, x: &[f64]) -> bool {
    let tol = 1e-12;
    let ht = basis.horizon();
    if !(t >= -tol * ht && t <= ht * (1.0 + tol)) || x.len() != basis.spatial_dims() {
        return false;
    }
    x.iter().zip(basis.spatial_intervals()).all(|(&xi, &(a, b))| {
        let pad = tol * (b - a);
        xi >= a - pad && xi <= b + pad
    })
}

fn temporal_row(basis: &BasisSpec, t: f64) -> Vec<f64> {
    let eta = time_to_ref(t, basis.horizon());
    let s = basis.scaling().temporal_trial;
    (1..=basis.temporal_count())
        .map(|n| s * polyfrac_first(n, basis.tau(), eta))
        .collect()
}

fn spatial_row(basis: &BasisSpec, j: usize, x: f64) -> Vec<f64> {
    let xi = space_to_ref(x, basis.spatial_intervals()[j]);
    let s = basis.scaling().spatial_trial;
    (1..=basis.spatial_counts()[j])
        .map(|m| s * modal_legendre(ModalKind::Basis, m, xi))
        .collect()
}

/// `u_N(t, x)`.
pub fn evaluate(solution: &SpectralSolution, t: f64, x: &[f64]) -> Result<f64, PgError> {
    let basis = &solution.basis;
    if !in_domain(basis, t, x) {
        return Err(PgError::OutOfDomain { t, x: x.to_vec() });
    }
    let mut data = solution.coefficients.clone();
    let mut shape = basis.shape();
    // Contract the last axis first so the data stays contiguous.
    for axis in (0..shape.len()).rev() {
        let row = if axis == 0 {
            temporal_row(basis, t)
        } else {
            spatial_row(basis, axis - 1, x[axis - 1])
        };
        let m = Mat::from_fn(1, row.len(), |_, j| row[j]);
        let (d, s) = mode_product(&data, &shape, axis, m.as_ref());
        data = d;
        shape = s;
    }
    Ok(data[0])
}

/// `u_N` on the tensor grid `times × xs[0] × … × xs[d-1]`, row-major.
pub fn evaluate_grid(solution: &SpectralSolution, times: &[f64], xs: &[Vec<f64>]) -> Result<Vec<f64>, PgError> {
    let basis = &solution.basis;
    if xs.len() != basis.spatial_dims() {
        return Err(PgError::Mismatch("grid dimension".into()));
    }
    for &t in times {
        let probe: Vec<f64> = basis.spatial_intervals().iter().map(|iv| iv.0).collect();
        if !in_domain(basis, t, &probe) {
            return Err(PgError::OutOfDomain { t, x: probe });
        }
    }
    let mut mats = vec![{
        let rows: Vec<Vec<f64>> = times.iter().map(|&t| temporal_row(basis, t)).collect();
        Mat::from_fn(times.len(), basis.temporal_count(), |i, n| rows[i][n])
    }];
    for (j, pts) in xs.iter().enumerate() {
        let mut probe_t = vec![0.0; basis.spatial_dims()];
        for &x in pts {
            probe_t[j] = x;
            for (i, iv) in basis.spatial_intervals().iter().enumerate() {
                if i != j {
                    probe_t[i] = iv.0;
                }
            }
            if !in_domain(basis, 0.0, &probe_t) {
                return Err(PgError::OutOfDomain { t: 0.0, x: probe_t });
            }
        }
        let rows: Vec<Vec<f64>> = pts.iter().map(|&x| spatial_row(basis, j, x)).collect();
        mats.push(Mat::from_fn(pts.len(), basis.spatial_counts()[j], |i, m| rows[i][m]));
    }
    let refs: Vec<MatRef<'_, f64>> = mats.iter().map(|m| m.as_ref()).collect();
    Ok(multi_mode_product(&solution.coefficients, &basis.shape(), &refs).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManufacturedCase {
    /// `u = (α/2) t^{3+α/2}`, no spatial dimension.
    IvpPower,
    /// `u = t^{3+α/2} ((x-a)^{3+β/2} - (x-a)^{4+β/2}/(b-a))`, one dimension, left derivative only.
    PdeOneSided,
}

pub type ExactSolution = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Closed-form exact solution of a manufactured case.
pub fn manufactured_exact(case: ManufacturedCase, alpha: f64, beta: Option<f64>, interval: Option<(f64, f64)>) -> ExactSolution {
    let tau = alpha / 2.0;
    match case {
        ManufacturedCase::IvpPower => Arc::new(move |t, _| tau * t.powf(3.0 + tau)),
        ManufacturedCase::PdeOneSided => {
            let mu = beta.unwrap_or(1.5) / 2.0;
            let (a, b) = interval.unwrap_or((-1.0, 1.0));
            Arc::new(move |t, x| {
                let s = (x[0] - a).max(0.0);
                t.powf(3.0 + tau) * (s.powf(3.0 + mu) - s.powf(4.0 + mu) / (b - a))
            })
        }
    }
}

/// Manufactured problem with forcing obtained from the fractional power rule,
/// together with its exact solution.
///
/// `k` is the diffusion coefficient of the one-sided case (ignored for the IVP).
pub fn manufactured_problem(
    case: ManufacturedCase,
    alpha: f64,
    beta: Option<f64>,
    k: f64,
    basis: BasisSpec,
) -> Result<(DeterministicProblem, ExactSolution), PgError> {
    let a_ord = FractionalOrder::temporal(alpha)?;
    let horizon = basis.horizon();
    let tau = alpha / 2.0;
    let t_scale = affine_scale(alpha, 0.0, horizon)?;
    // D_t^α t^p on [0, T] through the reference interval.
    let time_deriv = move |p: f64, t: f64| -> f64 {
        let eta = time_to_ref(t, horizon);
        (horizon / 2.0).powf(p) * t_scale * rl_frac_deriv_power(Side::Left, alpha, p, eta).unwrap_or(0.0)
    };
    match case {
        ManufacturedCase::IvpPower => {
            if basis.spatial_dims() != 0 {
                return Err(PgError::Mismatch("the IVP case has no spatial dimension".into()));
            }
            let p = 3.0 + tau;
            let term = ForcingTerm::new(move |t, _| tau * time_deriv(p, t)).with_powers(p - alpha, Vec::new());
            let label = format!("manufactured:ivp_power:{:x}", alpha.to_bits());
            let problem = DeterministicProblem::new(a_ord, Vec::new(), Vec::new(), basis, Forcing::new(label, vec![term]))?;
            Ok((problem, manufactured_exact(case, alpha, None, None)))
        }
        ManufacturedCase::PdeOneSided => {
            if basis.spatial_dims() != 1 {
                return Err(PgError::Mismatch("the one-sided case has exactly one spatial dimension".into()));
            }
            let beta = beta.ok_or_else(|| PgError::Mismatch("the one-sided case needs β".into()))?;
            let b_ord = FractionalOrder::spatial(beta)?;
            let mu = beta / 2.0;
            let (a, b) = basis.spatial_intervals()[0];
            let len = b - a;
            let x_scale = affine_scale(beta, a, b)?;
            // D_left^β (x-a)^p on [a, b] through the reference interval.
            let space_deriv = move |p: f64, x: f64| -> f64 {
                let xi = space_to_ref(x, (a, b));
                (len / 2.0).powf(p) * x_scale * rl_frac_deriv_power(Side::Left, beta, p, xi).unwrap_or(0.0)
            };
            let profile = move |x: f64| {
                let s = (x - a).max(0.0);
                s.powf(3.0 + mu) - s.powf(4.0 + mu) / len
            };
            let pt = 3.0 + tau;
            let time_term = ForcingTerm::new(move |t, x| time_deriv(pt, t) * profile(x[0]))
                .with_powers(pt - alpha, vec![3.0 + mu]);
            let space_term = ForcingTerm::new(move |t, x| {
                -k * t.powf(pt) * (space_deriv(3.0 + mu, x[0]) - space_deriv(4.0 + mu, x[0]) / len)
            })
            .with_powers(pt, vec![3.0 + mu - beta]);
            let label = format!(
                "manufactured:pde_onesided:{:x}:{:x}:{:x}",
                alpha.to_bits(),
                beta.to_bits(),
                k.to_bits()
            );
            let problem = DeterministicProblem::new(
                a_ord,
                vec![b_ord],
                vec![k],
                basis,
                Forcing::new(label, vec![time_term, space_term]),
            )?
            .with_mode(OperatorMode::LeftOnly);
            Ok((problem, manufactured_exact(case, alpha, Some(beta), Some((a, b)))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ivp(alpha: f64, n: usize) -> (DeterministicProblem, ExactSolution) {
        let basis = BasisSpec::temporal_only(n, alpha / 2.0, 1.0).unwrap();
        manufactured_problem(ManufacturedCase::IvpPower, alpha, None, 1.0, basis).unwrap()
    }

    #[test]
    fn temporal_stiffness_is_diagonal() {
        let (p, _) = ivp(0.6, 6);
        let sys = assemble(&p, 0).unwrap();
        let mut diag: f64 = 0.0;
        let mut off: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let v = sys.s_t[(i, j)].abs();
                if i == j {
                    diag = diag.max(v);
                } else {
                    off = off.max(v);
                }
            }
        }
        assert!(off / diag < 1e-12, "{off:e} / {diag:e}");
    }

    #[test]
    fn ivp_exact_in_trial_space() {
        for &alpha in &[0.3, 0.5, 0.7] {
            let (p, exact) = ivp(alpha, 4);
            let sys = assemble(&p, 0).unwrap();
            let sol = solve_fast(&sys).unwrap();
            let rule = gauss_legendre(40).unwrap();
            let err: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&e, &w)| {
                    let t = (e + 1.0) / 2.0;
                    let d = evaluate(&sol, t, &[]).unwrap() - exact(t, &[]);
                    0.5 * w * d * d
                })
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-10, "alpha={alpha} err={err:e}");
        }
    }

    #[test]
    fn zero_forcing_gives_zero_load() {
        let basis = BasisSpec::new(4, vec![5], 0.3, 1.0, vec![(0.0, 2.0)]).unwrap();
        let p = DeterministicProblem::new(
            FractionalOrder::temporal(0.6).unwrap(),
            vec![FractionalOrder::spatial(1.4).unwrap()],
            vec![1.0],
            basis,
            Forcing::zero(),
        )
        .unwrap();
        let sys = assemble(&p, 0).unwrap();
        assert!(sys.load.iter().all(|&v| v == 0.0));
        let sol = solve_direct(&sys).unwrap();
        assert!(sol.coefficients().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn text_record_round_trip() {
        let (p, _) = ivp(0.5, 4);
        let sol = solve_fast(&assemble(&p, 0).unwrap()).unwrap();
        let back = SpectralSolution::from_text(&sol.to_text()).unwrap();
        assert_eq!(back, sol);
        assert!(SpectralSolution::from_text("garbage").is_err());
    }

    #[test]
    fn direct_guard() {
        let basis = BasisSpec::new(200, vec![101], 0.3, 1.0, vec![(0.0, 1.0)]).unwrap();
        let p = DeterministicProblem::new(
            FractionalOrder::temporal(0.6).unwrap(),
            vec![FractionalOrder::spatial(1.4).unwrap()],
            vec![1.0],
            basis,
            Forcing::zero(),
        )
        .unwrap();
        let sys = AssembledSystem {
            s_t: Mat::zeros(1, 1),
            m_t: Mat::zeros(1, 1),
            s_space: vec![],
            m_space: vec![],
            load: vec![0.0; p.basis().unknowns()],
            gamma: 0.0,
            mode: OperatorMode::TwoSided,
            basis: p.basis().clone(),
            alpha: 0.6,
            beta: vec![1.4],
            fingerprint: p.fingerprint(),
        };
        assert!(matches!(solve_direct(&sys), Err(PgError::TooLarge { .. })));
    }

    #[test]
    fn fingerprint_tracks_inputs() {
        let (a, _) = ivp(0.5, 4);
        let (b, _) = ivp(0.5, 4);
        let (c, _) = ivp(0.5000001, 4);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        let g = a.clone().with_gamma(1.0).unwrap();
        assert_ne!(a.fingerprint(), g.fingerprint());
    }
}
