//! Monte Carlo and probabilistic-collocation drivers over a parametrized
//! family of fractional problems.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::fractional::{BasisSpec, FractionalError, FractionalOrder};
use crate::noise::{realize, NoiseError, NoiseSpec};
use crate::orthopoly::gauss_legendre;
use crate::pgsolver::{
    assemble, evaluate_grid, manufactured_exact, manufactured_problem, solve_fast, DeterministicProblem, Forcing,
    ManufacturedCase, OperatorMode, PgError, SpectralSolution,
};
use crate::randomspace::{monte_carlo_point, RandomParameterSpace, SampleSet, SpaceError};

/// Largest negative variance silently clamped to zero (relative to `max(1, E[u²])`).
pub const VARIANCE_FLOOR: f64 = 1e-14;
/// Fraction of Monte Carlo samples allowed to fail before the run aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Error)]
pub enum UqError {
    #[error(transparent)]
    Solver(#[from] PgError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Fractional(#[from] FractionalError),
    #[error("{0}")]
    Invalid(String),
    #[error("{failed} of {total} samples failed (first: {first})")]
    TooManyFailures { failed: usize, total: usize, first: String },
    #[error("collocation node {index} failed: {source}")]
    NodeFailure { index: usize, source: Box<UqError> },
    #[error("variance {value:e} at grid point {index} is below the numerical floor")]
    NegativeVariance { index: usize, value: f64 },
    #[error("field has {got} values, grid has {expected}")]
    Shape { expected: usize, got: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Tensor grid of observation points with L² quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationGrid {
    times: Vec<f64>,
    time_weights: Vec<f64>,
    xs: Vec<Vec<f64>>,
    x_weights: Vec<Vec<f64>>,
}

impl ObservationGrid {
    /// Gauss-Legendre points in every direction; exact L² norms for smooth fields.
    pub fn gauss(horizon: f64, intervals: &[(f64, f64)], nt: usize, nx: usize) -> Result<Self, UqError> {
        let map = |lo: f64, hi: f64, n: usize| -> Result<(Vec<f64>, Vec<f64>), UqError> {
            let r = gauss_legendre(n).map_err(PgError::from)?;
            Ok(r.mapped(lo, hi))
        };
        let (times, time_weights) = map(0.0, horizon, nt)?;
        let mut xs = Vec::new();
        let mut x_weights = Vec::new();
        for &(a, b) in intervals {
            let (x, w) = map(a, b, nx)?;
            xs.push(x);
            x_weights.push(w);
        }
        Ok(Self {
            times,
            time_weights,
            xs,
            x_weights,
        })
    }

    /// Equispaced points including the endpoints, trapezoid weights.
    pub fn uniform(horizon: f64, intervals: &[(f64, f64)], nt: usize, nx: usize) -> Result<Self, UqError> {
        if nt < 2 || (nx < 2 && !intervals.is_empty()) {
            return Err(UqError::Invalid("uniform grids need at least two points per axis".into()));
        }
        let line = |lo: f64, hi: f64, n: usize| {
            let h = (hi - lo) / (n - 1) as f64;
            let pts: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
            let w: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
            (pts, w)
        };
        let (times, time_weights) = line(0.0, horizon, nt);
        let (xs, x_weights) = intervals.iter().map(|&(a, b)| line(a, b, nx)).unzip();
        Ok(Self {
            times,
            time_weights,
            xs,
            x_weights,
        })
    }

    /// Arbitrary points with caller-supplied weights.
    pub fn custom(times: Vec<f64>, time_weights: Vec<f64>, xs: Vec<Vec<f64>>, x_weights: Vec<Vec<f64>>) -> Result<Self, UqError> {
        if times.len() != time_weights.len() || xs.len() != x_weights.len() || xs.iter().zip(&x_weights).any(|(a, b)| a.len() != b.len()) {
            return Err(UqError::Invalid("grid points and weights differ in length".into()));
        }
        Ok(Self {
            times,
            time_weights,
            xs,
            x_weights,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.times.len() * self.xs.iter().map(Vec::len).product::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Visits every grid point in row-major order (time slowest).
    pub fn for_each_point(&self, mut f: impl FnMut(usize, f64, &[f64], f64)) {
        let mut x = vec![0.0; self.xs.len()];
        let mut idx = vec![0usize; self.xs.len()];
        let per_t: usize = self.xs.iter().map(Vec::len).product();
        for (it, (&t, &wt)) in self.times.iter().zip(&self.time_weights).enumerate() {
            idx.iter_mut().for_each(|i| *i = 0);
            for j in 0..per_t {
                let mut w = wt;
                for a in 0..x.len() {
                    x[a] = self.xs[a][idx[a]];
                    w *= self.x_weights[a][idx[a]];
                }
                f(it * per_t + j, t, &x, w);
                for a in (0..idx.len()).rev() {
                    idx[a] += 1;
                    if idx[a] < self.xs[a].len() {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_point(|i, _, _, w| out[i] = w);
        out
    }

    pub fn l2_norm(&self, field: &[f64]) -> f64 {
        self.weights().iter().zip(field).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    }
}

/// Maps a point of the random space to an observed field.
pub trait Model: Send + Sync {
    fn evaluate(&self, xi: &[f64], grid: &ObservationGrid) -> Result<Vec<f64>, UqError>;
}

/// Wraps a closure as a [`Model`].
pub struct FnModel<F>(pub F);

impl<F> Model for FnModel<F>
where
    F: Fn(&[f64], &ObservationGrid) -> Result<Vec<f64>, UqError> + Send + Sync,
{
    fn evaluate(&self, xi: &[f64], grid: &ObservationGrid) -> Result<Vec<f64>, UqError> {
        (self.0)(xi, grid)
    }
}

/// Deterministic forcing used by a template.
#[derive(Debug, Clone)]
pub enum TemplateForcing {
    /// Manufactured `h` rebuilt for each sampled `(α, β)`.
    Manufactured(ManufacturedCase),
    /// Fixed `h`, independent of the random point.
    Given(Forcing),
}

/// Rule turning `ξ = (α, β_1..β_d, Q_1..Q_M)` into a deterministic problem.
#[derive(Debug, Clone)]
pub struct FractionalTemplate {
    pub forcing: TemplateForcing,
    pub temporal_count: usize,
    pub spatial_counts: Vec<usize>,
    pub horizon: f64,
    pub intervals: Vec<(f64, f64)>,
    pub k: Vec<f64>,
    pub gamma: f64,
    pub mode: OperatorMode,
    /// Fixed `τ`; `None` means `α/2` for each sample.
    pub tau: Option<f64>,
    pub noise: Option<NoiseSpec>,
    pub quadrature_boost: usize,
}

impl FractionalTemplate {
    pub fn spatial_dims(&self) -> usize {
        self.spatial_counts.len()
    }

    pub fn noise_modes(&self) -> usize {
        self.noise.as_ref().map_or(0, |n| n.modes())
    }

    /// Expected length of `ξ`.
    pub fn dimension(&self) -> usize {
        1 + self.spatial_dims() + self.noise_modes()
    }

    pub fn problem_at(&self, xi: &[f64]) -> Result<DeterministicProblem, UqError> {
        if xi.len() != self.dimension() {
            return Err(UqError::Shape {
                expected: self.dimension(),
                got: xi.len(),
            });
        }
        let d = self.spatial_dims();
        let alpha = xi[0];
        let betas = &xi[1..1 + d];
        let q = &xi[1 + d..];
        let tau = self.tau.unwrap_or(alpha / 2.0);
        let basis = BasisSpec::new(
            self.temporal_count,
            self.spatial_counts.clone(),
            tau,
            self.horizon,
            self.intervals.clone(),
        )?;
        let problem = match &self.forcing {
            TemplateForcing::Manufactured(case) => {
                let k = self.k.first().copied().unwrap_or(1.0);
                manufactured_problem(*case, alpha, betas.first().copied(), k, basis)?.0
            }
            TemplateForcing::Given(h) => DeterministicProblem::new(
                FractionalOrder::temporal(alpha)?,
                betas.iter().map(|&b| FractionalOrder::spatial(b)).collect::<Result<_, _>>()?,
                self.k.clone(),
                basis,
                h.clone(),
            )?
            .with_mode(self.mode),
        };
        let mut problem = problem.with_gamma(self.gamma)?;
        if let Some(noise) = &self.noise {
            let path = realize(noise, q)?;
            if !path.is_zero() {
                problem = problem.with_noise(path.to_forcing());
            }
        }
        Ok(problem)
    }
}

/// In-memory solution store keyed by problem fingerprint, optionally mirrored
/// to a directory of text records.
#[derive(Debug, Default)]
pub struct SolutionCache {
    map: Mutex<HashMap<String, SpectralSolution>>,
    dir: Option<PathBuf>,
    hits: Mutex<usize>,
}

impl SolutionCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self, UqError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir: Some(dir),
            ..Self::default()
        })
    }

    pub fn hits(&self) -> usize {
        *self.hits.lock().expect("cache lock")
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.sol")))
    }

    pub fn get(&self, key: &str) -> Option<SpectralSolution> {
        let found = self.map.lock().expect("cache lock").get(key).cloned().or_else(|| {
            let text = std::fs::read_to_string(self.path(key)?).ok()?;
            let sol = SpectralSolution::from_text(&text).ok()?;
            (sol.fingerprint() == key).then_some(sol)
        });
        if found.is_some() {
            *self.hits.lock().expect("cache lock") += 1;
        }
        found
    }

    pub fn put(&self, solution: &SpectralSolution) -> Result<(), UqError> {
        let key = solution.fingerprint().to_string();
        if let Some(path) = self.path(&key) {
            let mut f = std::fs::File::create(path)?;
            f.write_all(solution.to_text().as_bytes())?;
        }
        self.map.lock().expect("cache lock").insert(key, solution.clone());
        Ok(())
    }
}

/// Solves the templated problem for each `ξ` and samples it on the grid.
pub struct PdeModel {
    template: FractionalTemplate,
    cache: Option<Arc<SolutionCache>>,
}

impl PdeModel {
    pub fn new(template: FractionalTemplate) -> Self {
        Self { template, cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<SolutionCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn template(&self) -> &FractionalTemplate {
        &self.template
    }

    pub fn solve(&self, xi: &[f64]) -> Result<SpectralSolution, UqError> {
        let problem = self.template.problem_at(xi)?;
        let key = problem.fingerprint();
        if let Some(sol) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return Ok(sol);
        }
        let sol = solve_fast(&assemble(&problem, self.template.quadrature_boost)?)?;
        if let Some(c) = &self.cache {
            c.put(&sol)?;
        }
        Ok(sol)
    }
}

impl Model for PdeModel {
    fn evaluate(&self, xi: &[f64], grid: &ObservationGrid) -> Result<Vec<f64>, UqError> {
        let sol = self.solve(xi)?;
        Ok(evaluate_grid(&sol, grid.times(), grid.xs())?)
    }
}

/// A random space, a model over it and where to observe the output.
pub struct StochasticProblem {
    pub space: RandomParameterSpace,
    pub model: Arc<dyn Model>,
    pub grid: ObservationGrid,
}

impl StochasticProblem {
    pub fn new(space: RandomParameterSpace, model: Arc<dyn Model>, grid: ObservationGrid) -> Self {
        Self { space, model, grid }
    }

    /// Templated PDE family; checks that `ξ` has the template's layout.
    pub fn pde(space: RandomParameterSpace, model: PdeModel, grid: ObservationGrid) -> Result<Self, UqError> {
        if space.len() != model.template.dimension() {
            return Err(UqError::Shape {
                expected: model.template.dimension(),
                got: space.len(),
            });
        }
        Ok(Self::new(space, Arc::new(model), grid))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub samples: usize,
    pub provenance: String,
    pub seed: Option<u64>,
    pub wall_time: Duration,
    pub threads: usize,
    pub failed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticsResult {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// L² norm of each sample's field over the grid; NaN for failed samples.
    pub sample_norms: Vec<f64>,
    pub grid: ObservationGrid,
    pub meta: RunMetadata,
}

impl StatisticsResult {
    /// CSV columns `t, x_1..x_d, mean, std`, in grid order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), UqError> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.grid.xs().len();
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|j| format!("x_{j}")));
        header.push("mean".into());
        header.push("std".into());
        w.write_record(&header)?;
        let mut rows = Vec::with_capacity(self.mean.len());
        self.grid.for_each_point(|i, t, x, _| {
            let mut row = vec![format!("{t:e}")];
            row.extend(x.iter().map(|v| format!("{v:e}")));
            row.push(format!("{:e}", self.mean[i]));
            row.push(format!("{:e}", self.std[i]));
            rows.push(row);
        });
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sums equal-length vectors by adjacent pairs, level by level. The grouping
/// depends only on the number of terms, never on scheduling.
pub fn pairwise_sum(mut terms: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    if terms.is_empty() {
        return vec![0.0; len];
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            }
            next.push(a);
        }
        terms = next;
    }
    terms.pop().expect("one term left")
}

fn sqrt_with_floor(var: &[f64], scale: &[f64]) -> Result<Vec<f64>, UqError> {
    var.iter()
        .zip(scale)
        .enumerate()
        .map(|(index, (&v, &s))| {
            if v >= 0.0 {
                Ok(v.sqrt())
            } else if v >= -VARIANCE_FLOOR * s.max(1.0) {
                Ok(0.0)
            } else {
                Err(UqError::NegativeVariance { index, value: v })
            }
        })
        .collect()
}

/// Monte Carlo estimate of mean and (unbiased) standard deviation from `count` samples.
pub fn run_mcs(problem: &StochasticProblem, count: usize, seed: u64) -> Result<StatisticsResult, UqError> {
    if count < 2 {
        return Err(UqError::Invalid("Monte Carlo needs at least two samples".into()));
    }
    let start = Instant::now();
    faer::set_global_parallelism(faer::Par::Seq);
    let results: Vec<Result<Vec<f64>, UqError>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let xi = monte_carlo_point(&problem.space, seed, i);
            problem.model.evaluate(&xi, &problem.grid)
        })
        .collect();
    let len = problem.grid.len();
    let mut failed = Vec::new();
    let mut first_error = None;
    let mut fields = Vec::with_capacity(count);
    let mut norms = Vec::with_capacity(count);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(f) if f.len() == len => {
                norms.push(problem.grid.l2_norm(&f));
                fields.push(f);
            }
            Ok(f) => return Err(UqError::Shape { expected: len, got: f.len() }),
            Err(e) => {
                failed.push(i);
                norms.push(f64::NAN);
                first_error.get_or_insert(e.to_string());
            }
        }
    }
    if !failed.is_empty() && failed.len() as f64 >= MAX_FAILURE_FRACTION * count as f64 {
        return Err(UqError::TooManyFailures {
            failed: failed.len(),
            total: count,
            first: first_error.unwrap_or_default(),
        });
    }
    let used = fields.len() as f64;
    let mean: Vec<f64> = pairwise_sum(fields.clone(), len).into_iter().map(|s| s / used).collect();
    let squares: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| f.iter().zip(&mean).map(|(u, m)| (u - m) * (u - m)).collect())
        .collect();
    let var: Vec<f64> = pairwise_sum(squares, len).into_iter().map(|s| s / (used - 1.0)).collect();
    let std = var.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(StatisticsResult {
        mean,
        std,
        sample_norms: norms,
        grid: problem.grid.clone(),
        meta: RunMetadata {
            samples: count,
            provenance: format!("monte_carlo(seed={seed}, K={count})"),
            seed: Some(seed),
            wall_time: start.elapsed(),
            threads: rayon::current_num_threads(),
            failed,
        },
    })
}

/// Collocation estimate `E[u] = Σ w_i u(ξ_i)`, `σ² = Σ w_i (u(ξ_i) - E[u])²`.
pub fn run_pcm(problem: &StochasticProblem, nodes: &SampleSet) -> Result<StatisticsResult, UqError> {
    if !nodes.is_weighted() {
        return Err(UqError::Invalid("collocation needs a weighted node set".into()));
    }
    let start = Instant::now();
    faer::set_global_parallelism(faer::Par::Seq);
    let len = problem.grid.len();
    let fields = nodes
        .points()
        .par_iter()
        .enumerate()
        .map(|(index, xi)| {
            let f = problem
                .model
                .evaluate(xi, &problem.grid)
                .map_err(|e| UqError::NodeFailure { index, source: Box::new(e) })?;
            if f.len() != len {
                return Err(UqError::Shape { expected: len, got: f.len() });
            }
            Ok(f)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let w = nodes.weights();
    let weighted = |g: &dyn Fn(&[f64]) -> Vec<f64>| -> Vec<f64> {
        pairwise_sum(
            fields
                .iter()
                .zip(w)
                .map(|(f, &wi)| g(f).into_iter().map(|v| wi * v).collect())
                .collect(),
            len,
        )
    };
    let mean = weighted(&|f| f.to_vec());
    let var = weighted(&|f| f.iter().zip(&mean).map(|(u, m)| (u - m) * (u - m)).collect());
    let second = weighted(&|f| f.iter().map(|u| u * u).collect());
    let std = sqrt_with_floor(&var, &second)?;
    Ok(StatisticsResult {
        mean,
        std,
        sample_norms: fields.iter().map(|f| problem.grid.l2_norm(f)).collect(),
        grid: problem.grid.clone(),
        meta: RunMetadata {
            samples: nodes.len(),
            provenance: nodes.provenance().to_string(),
            seed: None,
            wall_time: start.elapsed(),
            threads: rayon::current_num_threads(),
            failed: Vec::new(),
        },
    })
}

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_MAX_POINTS: usize = 512;

/// `E[u_ext]` on the grid by Gauss-Legendre quadrature over `α` (and `β`),
/// doubling the order until successive values agree to 1e-12.
///
/// Noise dimensions do not enter: the noise has zero mean and the problem is linear.
pub fn exact_expectation_oracle(
    forcing: &TemplateForcing,
    space: &RandomParameterSpace,
    grid: &ObservationGrid,
    interval: Option<(f64, f64)>,
) -> Result<Vec<f64>, UqError> {
    let case = match forcing {
        TemplateForcing::Manufactured(case) => *case,
        TemplateForcing::Given(_) => {
            return Err(UqError::Invalid("no exact solution for a non-manufactured problem".into()))
        }
    };
    let uses_beta = case == ManufacturedCase::PdeOneSided;
    let dims = if uses_beta { 2 } else { 1 };
    if space.len() < dims {
        return Err(UqError::Invalid("space lacks the fractional-order dimensions".into()));
    }
    let alpha_dim = &space.dims()[0];
    let beta_dim = space.dims().get(1).filter(|_| uses_beta);
    let estimate = |n: usize| -> Result<Vec<f64>, UqError> {
        let rule = gauss_legendre(n).map_err(PgError::from)?;
        let line = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
            if hi == lo {
                vec![(lo, 1.0)]
            } else {
                rule.nodes().iter().zip(rule.weights()).map(|(&x, &w)| (lo + (x + 1.0) * (hi - lo) / 2.0, w / 2.0)).collect()
            }
        };
        let alphas = line(alpha_dim.lo, alpha_dim.hi);
        let betas = beta_dim.map_or(vec![(0.0, 1.0)], |b| line(b.lo, b.hi));
        let mut out = vec![0.0; grid.len()];
        for &(a, wa) in &alphas {
            for &(b, wb) in &betas {
                let u = manufactured_exact(case, a, uses_beta.then_some(b), interval);
                grid.for_each_point(|i, t, x, _| out[i] += wa * wb * u(t, x));
            }
        }
        Ok(out)
    };
    let mut n = 8;
    let mut prev = estimate(n)?;
    loop {
        n *= 2;
        let next = estimate(n)?;
        let diff = next.iter().zip(&prev).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
        if diff < ORACLE_TOL {
            return Ok(next);
        }
        if n >= ORACLE_MAX_POINTS {
            return Err(UqError::Invalid(format!("oracle did not settle: last change {diff:e}")));
        }
        prev = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2_mean: f64,
    pub max_mean: f64,
    pub l2_std: Option<f64>,
    pub max_std: Option<f64>,
}

/// L² (grid-weighted) and max norms of `mean - reference`, and of the std
/// against `reference_std` when given.
pub fn error_report(
    result: &StatisticsResult,
    reference: &[f64],
    reference_std: Option<&[f64]>,
) -> Result<ErrorReport, UqError> {
    let n = result.mean.len();
    if reference.len() != n || reference_std.is_some_and(|r| r.len() != n) {
        return Err(UqError::Shape {
            expected: n,
            got: reference.len(),
        });
    }
    let diff = |a: &[f64], b: &[f64]| -> (f64, f64) {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        (result.grid.l2_norm(&d), d.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    };
    let (l2_mean, max_mean) = diff(&result.mean, reference);
    let std_part = reference_std.map(|r| diff(&result.std, r));
    Ok(ErrorReport {
        l2_mean,
        max_mean,
        l2_std: std_part.map(|p| p.0),
        max_std: std_part.map(|p| p.1),
    })
}

/// Seed of the `r`-th independent replicate of a study keyed by `seed`.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    seed.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_is_exact_for_small_integers() {
        let terms: Vec<Vec<f64>> = (0..37).map(|i| vec![i as f64, 1.0]).collect();
        assert_eq!(pairwise_sum(terms, 2), vec![666.0, 37.0]);
        assert_eq!(pairwise_sum(Vec::new(), 3), vec![0.0; 3]);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() + 0.5).abs() < 1e-14);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn grid_weights_measure_domain() {
        let g = ObservationGrid::gauss(2.0, &[(0.0, 3.0)], 5, 4).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 6.0).abs() < 1e-13);
        let u = ObservationGrid::uniform(1.0, &[], 11, 0).unwrap();
        assert!((u.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(u.len(), 11);
    }

    #[test]
    fn variance_floor() {
        assert_eq!(sqrt_with_floor(&[-1e-15], &[0.5]).unwrap(), vec![0.0]);
        assert!(sqrt_with_floor(&[-1e-6], &[1.0]).is_err());
    }
}
