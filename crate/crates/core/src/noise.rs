//! Sine-Fourier Karhunen-Loève model of the additive noise `f(t; ω)`.
//!
//! `f(t) = (ε / μ_f) Σ_{k≤M} a_k sin(2πkt/T) Q_k` with independent
//! `Q_k ~ U[-√3, √3]` (zero mean, unit variance) and `μ_f` the maximum over
//! `t` of the standard deviation of the untruncated-amplitude series.

use std::f64::consts::PI;

use thiserror::Error;

use crate::pgsolver::TimeForcing;

/// Number of modes treated as the whole process in [`energy_fraction`].
pub const ENERGY_TAIL_MODES: usize = 10_000;
const GRID_POINTS: usize = 10_001;
const GOLDEN_TOL: f64 = 1e-10;

pub const Q_BOUND: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("process length T must be positive, got {0}")]
    Length(f64),
    #[error("correlation length A must be positive, got {0}")]
    Correlation(f64),
    #[error("truncation length must be at least 1")]
    NoModes,
    #[error("amplitude ε must be finite and nonnegative, got {0}")]
    Amplitude(f64),
    #[error("{got} random coefficients supplied for {expected} modes")]
    Arity { expected: usize, got: usize },
    #[error("coefficient q_{index} = {value} outside [-√3, √3]")]
    OutOfRange { index: usize, value: f64 },
}

/// `a_k = 2/(√T ℓ²) [1 + (2πk/(Tℓ))²]^{-1}` for `k = 1..=m`, with `ℓ = T/A`.
pub fn kl_coefficients(length: f64, correlation: f64, m: usize) -> Result<Vec<f64>, NoiseError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(NoiseError::Length(length));
    }
    if !(correlation > 0.0 && correlation.is_finite()) {
        return Err(NoiseError::Correlation(correlation));
    }
    if m == 0 {
        return Err(NoiseError::NoModes);
    }
    let ell = length / correlation;
    let pre = 2.0 / (length.sqrt() * ell * ell);
    Ok((1..=m)
        .map(|k| {
            let r = 2.0 * PI * k as f64 / (length * ell);
            pre / (1.0 + r * r)
        })
        .collect())
}

fn variance_at(length: f64, a: &[f64], t: f64) -> f64 {
    a.iter()
        .enumerate()
        .map(|(i, ak)| {
            let s = (2.0 * PI * (i + 1) as f64 * t / length).sin();
            ak * ak * s * s
        })
        .sum()
}

/// `max_t sqrt(Σ a_k² sin²(2πkt/T))`: uniform grid, then golden-section refinement.
pub fn normalization(length: f64, a: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let h = length / (GRID_POINTS - 1) as f64;
    let (best, _) = (0..GRID_POINTS)
        .map(|i| (i, variance_at(length, a, i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let mut lo = (best as f64 - 1.0).max(0.0) * h;
    let mut hi = (best as f64 + 1.0).min((GRID_POINTS - 1) as f64) * h;
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = variance_at(length, a, c);
    let mut fd = variance_at(length, a, d);
    while hi - lo > GOLDEN_TOL {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = variance_at(length, a, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = variance_at(length, a, d);
        }
    }
    let refined = variance_at(length, a, 0.5 * (lo + hi));
    let grid_max = variance_at(length, a, best as f64 * h);
    refined.max(grid_max).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    length: f64,
    correlation: f64,
    amplitude: f64,
    coefficients: Vec<f64>,
    mu: f64,
}

impl NoiseSpec {
    pub fn new(length: f64, correlation: f64, modes: usize, amplitude: f64) -> Result<Self, NoiseError> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(NoiseError::Amplitude(amplitude));
        }
        let coefficients = kl_coefficients(length, correlation, modes)?;
        let mu = normalization(length, &coefficients);
        Ok(Self {
            length,
            correlation,
            amplitude,
            coefficients,
            mu,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn correlation(&self) -> f64 {
        self.correlation
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Default for NoiseSpec {
    /// `T = 1`, `A = T/2`, four modes, `ε = 1`.
    fn default() -> Self {
        Self::new(1.0, 0.5, 4, 1.0).expect("default noise parameters are valid")
    }
}

/// `Σ_{k≤m} a_k² / Σ_{k≤K∞} a_k²`.
pub fn energy_fraction(spec: &NoiseSpec, m: usize) -> f64 {
    let all = kl_coefficients(spec.length, spec.correlation, ENERGY_TAIL_MODES).expect("spec already validated");
    let total: f64 = all.iter().rev().map(|a| a * a).sum();
    let head: f64 = all.iter().take(m.min(ENERGY_TAIL_MODES)).rev().map(|a| a * a).sum();
    head / total
}

/// One sample path of the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    length: f64,
    /// `(ε/μ_f) a_k q_k`
    weights: Vec<f64>,
}

impl NoiseRealization {
    pub fn eval(&self, t: f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * (2.0 * PI * (i + 1) as f64 * t / self.length).sin())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Wraps the path as solver forcing; the label encodes the exact weights.
    pub fn to_forcing(&self) -> TimeForcing {
        let label = std::iter::once(format!("noise:{:x}", self.length.to_bits()))
            .chain(self.weights.iter().map(|w| format!("{:x}", w.to_bits())))
            .collect::<Vec<_>>()
            .join(":");
        let me = self.clone();
        TimeForcing::new(label, move |t| me.eval(t))
    }
}

pub fn realize(spec: &NoiseSpec, q: &[f64]) -> Result<NoiseRealization, NoiseError> {
    if q.len() != spec.modes() {
        return Err(NoiseError::Arity {
            expected: spec.modes(),
            got: q.len(),
        });
    }
    if let Some((index, &value)) = q.iter().enumerate().find(|(_, v)| !(v.abs() <= Q_BOUND * (1.0 + 1e-12))) {
        return Err(NoiseError::OutOfRange { index, value });
    }
    let scale = if spec.amplitude == 0.0 { 0.0 } else { spec.amplitude / spec.mu };
    Ok(NoiseRealization {
        length: spec.length,
        weights: spec.coefficients.iter().zip(q).map(|(a, qk)| scale * a * qk).collect(),
    })
}
