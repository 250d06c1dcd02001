//! The random parameter space `Γ = Π_i [lo_i, hi_i]` with uniform marginals,
//! and the sample sets used to explore it: Monte Carlo draws, full tensor
//! Gauss-Legendre grids and isotropic Smolyak sparse grids.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::noise::Q_BOUND;
use crate::orthopoly::{gauss_legendre, QuadratureError};

pub const TENSOR_POINT_LIMIT: usize = 1_000_000;
pub const SMOLYAK_POINT_LIMIT: usize = 10_000_000;
/// Coordinates closer than this are merged into one sparse-grid node.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("dimension `{name}` has invalid interval [{lo}, {hi}]")]
    Interval { name: String, lo: f64, hi: f64 },
    #[error("space has no dimensions")]
    Empty,
    #[error("expected {expected} entries, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("grid would have {count} points, above the limit of {limit}")]
    TooLarge { count: usize, limit: usize },
    #[error("interpolation needs a tensor grid, got {0}")]
    Provenance(String),
    #[error("interpolation nodes in dimension {0} are not distinct")]
    RepeatedNodes(usize),
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl Dimension {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn map(&self, unit: f64) -> f64 {
        self.lo + (self.hi - self.lo) * unit
    }
}

/// Product of independent uniform marginals.
///
/// A collapsed interval (`lo == hi`) is allowed and behaves as a point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomParameterSpace {
    dims: Vec<Dimension>,
}

impl RandomParameterSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self, SpaceError> {
        if dims.is_empty() {
            return Err(SpaceError::Empty);
        }
        for d in &dims {
            if !(d.lo.is_finite() && d.hi.is_finite() && d.lo <= d.hi) {
                return Err(SpaceError::Interval {
                    name: d.name.clone(),
                    lo: d.lo,
                    hi: d.hi,
                });
            }
        }
        Ok(Self { dims })
    }

    /// `alpha`, `beta_1..beta_d`, then `Q_1..Q_m` on `[-√3, √3]`.
    pub fn fractional(alpha: (f64, f64), betas: &[(f64, f64)], noise_modes: usize) -> Result<Self, SpaceError> {
        let mut dims = vec![Dimension {
            name: "alpha".into(),
            lo: alpha.0,
            hi: alpha.1,
        }];
        for (j, &(lo, hi)) in betas.iter().enumerate() {
            dims.push(Dimension {
                name: format!("beta_{}", j + 1),
                lo,
                hi,
            });
        }
        for k in 0..noise_modes {
            dims.push(Dimension {
                name: format!("Q_{}", k + 1),
                lo: -Q_BOUND,
                hi: Q_BOUND,
            });
        }
        Self::new(dims)
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Joint density at `point` (zero outside Γ); collapsed dimensions are skipped.
    pub fn density(&self, point: &[f64]) -> f64 {
        if !self.contains(point) {
            return 0.0;
        }
        self.dims
            .iter()
            .filter(|d| d.width() > 0.0)
            .map(|d| 1.0 / d.width())
            .product()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dims.len() && point.iter().zip(&self.dims).all(|(&x, d)| x >= d.lo && x <= d.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    MonteCarlo { seed: u64, count: usize },
    Tensor { orders: Vec<usize> },
    Smolyak { level: usize, dims: usize, rule: String },
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::MonteCarlo { seed, count } => write!(f, "monte_carlo(seed={seed}, K={count})"),
            Provenance::Tensor { orders } => write!(f, "tensor(orders={orders:?})"),
            Provenance::Smolyak { level, dims, rule } => write!(f, "smolyak(w={level}, N={dims}, rule={rule})"),
        }
    }
}

/// Points in Γ with optional probability weights (empty for Monte Carlo sets).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    provenance: Provenance,
}

impl SampleSet {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        !self.weights.is_empty()
    }

    /// `Σ w_i g(ξ_i)` for weighted sets, the sample mean otherwise.
    pub fn expectation(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        if self.is_weighted() {
            self.points.iter().zip(&self.weights).map(|(p, w)| w * g(p)).sum()
        } else {
            self.points.iter().map(|p| g(p)).sum::<f64>() / self.points.len() as f64
        }
    }

    /// CSV rows `xi_1, …, xi_N, weight, index`; the weight is blank for unweighted sets.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SpaceError> {
        let mut w = csv::Writer::from_writer(out);
        let dims = self.points.first().map_or(0, |p| p.len());
        let mut header: Vec<String> = (1..=dims).map(|i| format!("xi_{i}")).collect();
        header.push("weight".into());
        header.push("index".into());
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            row.push(self.weights.get(i).map_or(String::new(), |v| format!("{v:e}")));
            row.push(i.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Gauss-Legendre nodes on the unit interval with weights summing to 1.
fn unit_rule(m: usize) -> Result<(Vec<f64>, Vec<f64>), SpaceError> {
    let rule = gauss_legendre(m)?;
    Ok((
        rule.nodes().iter().map(|x| 0.5 * (x + 1.0)).collect(),
        rule.weights().iter().map(|w| 0.5 * w).collect(),
    ))
}

/// Full tensor product of per-dimension Gauss-Legendre rules; last dimension fastest.
pub fn tensor_grid(space: &RandomParameterSpace, orders: &[usize]) -> Result<SampleSet, SpaceError> {
    if orders.len() != space.len() {
        return Err(SpaceError::Arity {
            expected: space.len(),
            got: orders.len(),
        });
    }
    let count = orders
        .iter()
        .try_fold(1usize, |acc, &o| acc.checked_mul(o))
        .unwrap_or(usize::MAX);
    if count > TENSOR_POINT_LIMIT {
        return Err(SpaceError::TooLarge {
            count,
            limit: TENSOR_POINT_LIMIT,
        });
    }
    let rules = orders.iter().map(|&o| unit_rule(o)).collect::<Result<Vec<_>, _>>()?;
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; orders.len()];
    for _ in 0..count {
        points.push(idx.iter().zip(&rules).zip(space.dims()).map(|((&i, r), d)| d.map(r.0[i])).collect());
        weights.push(idx.iter().zip(&rules).map(|(&i, r)| r.1[i]).product());
        for a in (0..idx.len()).rev() {
            idx[a] += 1;
            if idx[a] < orders[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(SampleSet {
        points,
        weights,
        provenance: Provenance::Tensor {
            orders: orders.to_vec(),
        },
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Level multi-indices `i ≥ 1` with `lo ≤ |i| ≤ hi`, in lexicographic order.
fn level_indices(dims: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn rec(dims: usize, lo: usize, hi: usize, prefix: &mut Vec<usize>, sum: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dims {
            if sum >= lo && sum <= hi {
                out.push(prefix.clone());
            }
            return;
        }
        let remaining = dims - prefix.len() - 1;
        let mut i = 1;
        while sum + i + remaining <= hi {
            prefix.push(i);
            rec(dims, lo, hi, prefix, sum + i, out);
            prefix.pop();
            i += 1;
        }
    }
    let mut out = Vec::new();
    rec(dims, lo, hi, &mut Vec::new(), 0, &mut out);
    out
}

/// Number of 1D points at Smolyak level `i`.
pub fn smolyak_points_at_level(i: usize) -> usize {
    2 * i - 1
}

fn smolyak_terms(space: &RandomParameterSpace, w: usize) -> Result<Vec<(Vec<f64>, f64)>, SpaceError> {
    let n = space.len();
    let q = w + n;
    let lo = n.max((q + 1).saturating_sub(n));
    let indices = level_indices(n, lo, q);
    let raw: usize = indices
        .iter()
        .map(|ix| ix.iter().map(|&i| smolyak_points_at_level(i)).product::<usize>())
        .sum();
    if raw > SMOLYAK_POINT_LIMIT {
        return Err(SpaceError::TooLarge {
            count: raw,
            limit: SMOLYAK_POINT_LIMIT,
        });
    }
    let rules = (1..=w + 1)
        .map(|i| unit_rule(smolyak_points_at_level(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut terms = Vec::with_capacity(raw);
    for ix in &indices {
        let total: usize = ix.iter().sum();
        let sign = if (q - total) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * binomial(n - 1, q - total);
        let sizes: Vec<usize> = ix.iter().map(|&i| smolyak_points_at_level(i)).collect();
        let count: usize = sizes.iter().product();
        let mut pos = vec![0usize; n];
        for _ in 0..count {
            let point: Vec<f64> = (0..n).map(|a| space.dims()[a].map(rules[ix[a] - 1].0[pos[a]])).collect();
            let weight: f64 = coeff * (0..n).map(|a| rules[ix[a] - 1].1[pos[a]]).product::<f64>();
            terms.push((point, weight));
            for a in (0..n).rev() {
                pos[a] += 1;
                if pos[a] < sizes[a] {
                    break;
                }
                pos[a] = 0;
            }
        }
    }
    Ok(terms)
}

fn smolyak_set(terms: Vec<(Vec<f64>, f64)>, w: usize, n: usize) -> SampleSet {
    let total: f64 = terms.iter().map(|(_, w)| w).sum();
    let (points, weights) = terms.into_iter().map(|(p, w)| (p, w / total)).unzip();
    SampleSet {
        points,
        weights,
        provenance: Provenance::Smolyak {
            level: w,
            dims: n,
            rule: "gauss-legendre(2i-1)".into(),
        },
    }
}

/// Isotropic Smolyak grid `A(w, Ν)` by the combination technique over
/// Gauss-Legendre rules with `2i - 1` points at level `i`.
///
/// Nodes shared between tensor terms are merged and their signed weights
/// summed; the result is sorted by coordinate.
pub fn smolyak_grid(space: &RandomParameterSpace, w: usize) -> Result<SampleSet, SpaceError> {
    let mut merged: BTreeMap<Vec<i64>, (Vec<f64>, f64)> = BTreeMap::new();
    for (point, weight) in smolyak_terms(space, w)? {
        let key: Vec<i64> = point.iter().map(|x| (x / MERGE_TOL).round() as i64).collect();
        merged.entry(key).or_insert_with(|| (point, 0.0)).1 += weight;
    }
    Ok(smolyak_set(merged.into_values().collect(), w, space.len()))
}

/// Every node of every tensor term of the combination, before merging.
pub fn smolyak_unmerged(space: &RandomParameterSpace, w: usize) -> Result<SampleSet, SpaceError> {
    Ok(smolyak_set(smolyak_terms(space, w)?, w, space.len()))
}

/// Uniform draw of sample `index`, independent of how samples are scheduled.
pub fn monte_carlo_point(space: &RandomParameterSpace, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    space.dims().iter().map(|d| d.map(rng.random::<f64>())).collect()
}

/// `count` i.i.d. uniform points; sample `i` uses stream `i` of a ChaCha8
/// generator keyed by `seed`, so the set does not depend on thread count.
pub fn monte_carlo_set(space: &RandomParameterSpace, count: usize, seed: u64) -> Result<SampleSet, SpaceError> {
    if count == 0 {
        return Err(SpaceError::NoSamples);
    }
    let points = (0..count as u64)
        .into_par_iter()
        .map(|i| monte_carlo_point(space, seed, i))
        .collect();
    Ok(SampleSet {
        points,
        weights: Vec::new(),
        provenance: Provenance::MonteCarlo { seed, count },
    })
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            1.0 / nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| nodes[j] - xk)
                .product::<f64>()
        })
        .collect()
}

/// Lagrange basis values `ℓ_j(x)` by the second barycentric form.
fn lagrange_row(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(hit) = nodes.iter().position(|&n| n == x) {
        let mut row = vec![0.0; nodes.len()];
        row[hit] = 1.0;
        return row;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(&n, &b)| b / (x - n)).collect();
    let sum: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / sum).collect()
}

/// Tensor-product Lagrange interpolant through `values` on a tensor grid.
pub fn lagrange_interpolate(nodes: &SampleSet, values: &[f64], xi: &[f64]) -> Result<f64, SpaceError> {
    let orders = match &nodes.provenance {
        Provenance::Tensor { orders } => orders.clone(),
        other => return Err(SpaceError::Provenance(other.to_string())),
    };
    if values.len() != nodes.len() {
        return Err(SpaceError::Arity {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    if xi.len() != orders.len() {
        return Err(SpaceError::Arity {
            expected: orders.len(),
            got: xi.len(),
        });
    }
    let strides = crate::tensor::strides(&orders);
    let mut data = values.to_vec();
    let mut shape = orders.clone();
    for axis in (0..orders.len()).rev() {
        let line: Vec<f64> = (0..orders[axis]).map(|i| nodes.points[i * strides[axis]][axis]).collect();
        let row = if line.len() == 1 {
            vec![1.0]
        } else {
            let mut sorted = line.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(SpaceError::RepeatedNodes(axis));
            }
            lagrange_row(&line, &barycentric_weights(&line), xi[axis])
        };
        let m = faer::Mat::from_fn(1, row.len(), |_, j| row[j]);
        let (d, s) = crate::tensor::mode_product(&data, &shape, axis, m.as_ref());
        data = d;
        shape = s;
    }
    Ok(data[0])
}
