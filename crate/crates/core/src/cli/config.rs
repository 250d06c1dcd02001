//! Experiment configuration: a strict TOML document with flat sections.
//!
//! Every field is optional; the accessors on [`ExperimentConfig`] apply the
//! documented defaults (see [`reference_document`]).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pgsolver::OperatorMode;

pub const DEFAULT_SEED: u64 = 2017;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 1.5;
pub const DEFAULT_ALPHA_INTERVAL: [f64; 2] = [0.1, 0.9];
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_TENSOR_ORDER: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Solve,
    Mcs,
    Pcm,
    Grid,
    Convergence,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Solve => "solve",
            Kind::Mcs => "mcs",
            Kind::Pcm => "pcm",
            Kind::Grid => "grid",
            Kind::Convergence => "convergence",
        })
    }
}

/// Right-hand side `h(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForcingCase {
    /// Manufactured `u = (α/2) t^{3+α/2}`, no space.
    #[default]
    IvpPower,
    /// Manufactured one-sided problem in one space dimension.
    PdeOneSided,
    Zero,
    Unit,
    TSquared,
    SinPiT,
}

impl ForcingCase {
    pub fn is_manufactured(self) -> bool {
        matches!(self, ForcingCase::IvpPower | ForcingCase::PdeOneSided)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    TwoSided,
    LeftOnly,
}

impl From<ModeName> for OperatorMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::TwoSided => OperatorMode::TwoSided,
            ModeName::LeftOnly => OperatorMode::LeftOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Temporal basis size.
    N,
    /// Spatial basis size (every dimension).
    M,
    /// Monte Carlo sample count.
    Samples,
    /// Tensor collocation points per dimension.
    Tensor,
    /// Smolyak level.
    Smolyak,
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sweep::N => "n",
            Sweep::M => "m",
            Sweep::Samples => "samples",
            Sweep::Tensor => "tensor",
            Sweep::Smolyak => "smolyak",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridLayout {
    Gauss,
    Uniform,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<ForcingCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_interval: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_intervals: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_mode: Option<ModeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_boost: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tensor_orders: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smolyak_w: Option<usize>,
    /// Generic `U[-1, 1]^dimension` space for `grid`, instead of the problem's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<usize>>,
    /// Independent Monte Carlo replicates per sample count (RMS error reported).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_scripts: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observe_nt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observe_nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observation: Option<GridLayout>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub problem: ProblemSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub basis: BasisSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub noise: NoiseSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sampling: SamplingSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub convergence: ConvergenceSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputSection,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// Sampling strategy of a stochastic run.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    MonteCarlo { samples: usize, seed: u64 },
    Tensor(Vec<usize>),
    Smolyak(usize),
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line assigning `key`, or 0 when the key is absent.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(0, |i| i + 1)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parses `text` for a given subcommand; a `kind` key, when present, must agree.
pub fn parse_config_for(text: &str, command: Option<Kind>) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    if let Some(cmd) = command {
        match cfg.kind {
            Some(k) if k != cmd => {
                return Err(ConfigError::Invalid {
                    line: line_of_key(text, "kind"),
                    message: format!("config is for `{k}` but the `{cmd}` command was run"),
                })
            }
            _ => cfg.kind = Some(cmd),
        }
    }
    cfg.validate().map_err(|(key, message)| ConfigError::Invalid {
        line: line_of_key(text, key),
        message,
    })?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configuration is always representable")
}

type Check = Result<(), (&'static str, String)>;

fn check_interval(key: &'static str, iv: [f64; 2], lo: f64, hi: f64) -> Check {
    if !(iv[0] <= iv[1] && iv[0] > lo && iv[1] < hi) {
        return Err((key, format!("interval [{}, {}] must be ordered and inside ({lo}, {hi})", iv[0], iv[1])));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn kind(&self) -> Kind {
        self.kind.unwrap_or(Kind::Solve)
    }

    pub fn case(&self) -> ForcingCase {
        self.problem.case.unwrap_or_default()
    }

    /// Number of spatial dimensions implied by the case and domain.
    pub fn spatial_dims(&self) -> usize {
        match self.case() {
            ForcingCase::IvpPower => 0,
            ForcingCase::PdeOneSided => 1,
            _ => self.problem.domain.as_ref().map_or(0, Vec::len),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.problem.horizon.unwrap_or(1.0)
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        match &self.problem.domain {
            Some(d) => d.iter().map(|iv| (iv[0], iv[1])).collect(),
            None => vec![(-1.0, 1.0); self.spatial_dims()],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.problem
            .alpha
            .or(self.problem.alpha_interval.map(|iv| 0.5 * (iv[0] + iv[1])))
            .unwrap_or(DEFAULT_ALPHA)
    }

    pub fn alpha_interval(&self) -> (f64, f64) {
        match (self.problem.alpha_interval, self.problem.alpha) {
            (Some(iv), _) => (iv[0], iv[1]),
            (None, Some(a)) => (a, a),
            (None, None) => (DEFAULT_ALPHA_INTERVAL[0], DEFAULT_ALPHA_INTERVAL[1]),
        }
    }

    pub fn betas(&self) -> Vec<f64> {
        let d = self.spatial_dims();
        match (&self.problem.beta, &self.problem.beta_intervals) {
            (Some(b), _) => b.clone(),
            (None, Some(ivs)) => ivs.iter().map(|iv| 0.5 * (iv[0] + iv[1])).collect(),
            (None, None) => vec![DEFAULT_BETA; d],
        }
    }

    pub fn beta_intervals(&self) -> Vec<(f64, f64)> {
        match (&self.problem.beta_intervals, &self.problem.beta) {
            (Some(ivs), _) => ivs.iter().map(|iv| (iv[0], iv[1])).collect(),
            (None, Some(b)) => b.iter().map(|&v| (v, v)).collect(),
            (None, None) => vec![(DEFAULT_BETA, DEFAULT_BETA); self.spatial_dims()],
        }
    }

    pub fn k(&self) -> Vec<f64> {
        self.problem.k.clone().unwrap_or_else(|| vec![1.0; self.spatial_dims()])
    }

    pub fn gamma(&self) -> f64 {
        self.problem.gamma.unwrap_or(0.0)
    }

    pub fn mode(&self) -> OperatorMode {
        match (self.problem.operator_mode, self.case()) {
            (Some(m), _) => m.into(),
            (None, ForcingCase::PdeOneSided) => OperatorMode::LeftOnly,
            (None, _) => OperatorMode::TwoSided,
        }
    }

    pub fn temporal_count(&self) -> usize {
        self.basis.n.unwrap_or(4)
    }

    pub fn spatial_counts(&self) -> Vec<usize> {
        let d = self.spatial_dims();
        match &self.basis.m {
            Some(m) if m.len() == 1 && d > 1 => vec![m[0]; d],
            Some(m) => m.clone(),
            None => vec![8; d],
        }
    }

    pub fn quadrature_boost(&self) -> usize {
        self.basis.quadrature_boost.unwrap_or(0)
    }

    pub fn noise_modes(&self) -> usize {
        self.noise.modes.unwrap_or(0)
    }

    pub fn noise_length(&self) -> f64 {
        self.noise.length.unwrap_or_else(|| self.horizon())
    }

    pub fn noise_correlation(&self) -> f64 {
        self.noise.correlation.unwrap_or_else(|| self.noise_length() / 2.0)
    }

    pub fn noise_amplitude(&self) -> f64 {
        self.noise.amplitude.unwrap_or(1.0)
    }

    pub fn seed(&self) -> u64 {
        self.sampling.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Random-space dimension of a stochastic run.
    pub fn stochastic_dims(&self) -> usize {
        1 + self.spatial_dims() + self.noise_modes()
    }

    pub fn strategy(&self) -> Strategy {
        let s = &self.sampling;
        if let Some(w) = s.smolyak_w {
            Strategy::Smolyak(w)
        } else if let Some(o) = &s.tensor_orders {
            let n = self.sampling.dimension.unwrap_or_else(|| self.stochastic_dims());
            Strategy::Tensor(if o.len() == 1 { vec![o[0]; n] } else { o.clone() })
        } else if s.samples.is_some() || self.kind() == Kind::Mcs {
            Strategy::MonteCarlo {
                samples: s.samples.unwrap_or(DEFAULT_SAMPLES),
                seed: self.seed(),
            }
        } else {
            let n = self.sampling.dimension.unwrap_or_else(|| self.stochastic_dims());
            Strategy::Tensor(vec![DEFAULT_TENSOR_ORDER; n])
        }
    }

    pub fn plot_scripts(&self) -> bool {
        self.output.plot_scripts.unwrap_or(true)
    }

    pub fn cache(&self) -> bool {
        self.output.cache.unwrap_or(true)
    }

    pub fn observe_nt(&self) -> usize {
        self.output.observe_nt.unwrap_or(16)
    }

    pub fn observe_nx(&self) -> usize {
        self.output.observe_nx.unwrap_or(16)
    }

    pub fn observation(&self) -> GridLayout {
        self.output.observation.unwrap_or(GridLayout::Gauss)
    }

    pub fn replicates(&self) -> usize {
        self.convergence.replicates.unwrap_or(1)
    }

    fn validate(&self) -> Check {
        let p = &self.problem;
        let d = self.spatial_dims();
        if p.alpha.is_some() && p.alpha_interval.is_some() {
            return Err(("alpha_interval", "set either alpha or alpha_interval, not both".into()));
        }
        if p.beta.is_some() && p.beta_intervals.is_some() {
            return Err(("beta_intervals", "set either beta or beta_intervals, not both".into()));
        }
        if let Some(a) = p.alpha {
            check_interval("alpha", [a, a], 0.0, 1.0)?;
        }
        if let Some(iv) = p.alpha_interval {
            check_interval("alpha_interval", iv, 0.0, 1.0)?;
        }
        for b in p.beta.iter().flatten() {
            check_interval("beta", [*b, *b], 1.0, 2.0)?;
        }
        for iv in p.beta_intervals.iter().flatten() {
            check_interval("beta_intervals", *iv, 1.0, 2.0)?;
        }
        if let Some(dom) = &p.domain {
            if dom.iter().any(|iv| !(iv[0] < iv[1]) || !iv[0].is_finite() || !iv[1].is_finite()) {
                return Err(("domain", "every domain interval needs finite a < b".into()));
            }
            if self.case() == ForcingCase::IvpPower && !dom.is_empty() {
                return Err(("domain", "the ivp_power case has no spatial domain".into()));
            }
            if dom.len() != d {
                return Err(("domain", format!("{d} spatial dimension(s) expected, {} given", dom.len())));
            }
        }
        let arity = |key: &'static str, n: Option<usize>| -> Check {
            match n {
                Some(n) if n != d => Err((key, format!("{d} value(s) expected, {n} given"))),
                _ => Ok(()),
            }
        };
        arity("beta", p.beta.as_ref().map(Vec::len))?;
        arity("beta_intervals", p.beta_intervals.as_ref().map(Vec::len))?;
        arity("k", p.k.as_ref().map(Vec::len))?;
        if let Some(m) = &self.basis.m {
            if !(m.len() == d || (m.len() == 1 && d > 0)) {
                return Err(("m", format!("{d} spatial basis size(s) expected, {} given", m.len())));
            }
            if m.contains(&0) {
                return Err(("m", "basis sizes must be positive".into()));
            }
        }
        if self.basis.n == Some(0) {
            return Err(("n", "basis sizes must be positive".into()));
        }
        if p.horizon.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(("horizon", "horizon must be positive".into()));
        }
        if p.gamma.is_some_and(|g| !(g >= 0.0 && g.is_finite())) {
            return Err(("gamma", "gamma must be finite and nonnegative".into()));
        }
        if self.case() == ForcingCase::PdeOneSided && p.operator_mode == Some(ModeName::TwoSided) {
            return Err(("operator_mode", "the pde_one_sided case uses the left-only operator".into()));
        }
        let n = &self.noise;
        if n.length.is_some_and(|v| !(v > 0.0)) || n.correlation.is_some_and(|v| !(v > 0.0)) {
            return Err(("length", "noise length and correlation must be positive".into()));
        }
        if n.amplitude.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
            return Err(("amplitude", "noise amplitude must be finite and nonnegative".into()));
        }
        let s = &self.sampling;
        let chosen = [s.samples.is_some(), s.tensor_orders.is_some(), s.smolyak_w.is_some()];
        if chosen.iter().filter(|&&c| c).count() > 1 {
            let key = if s.smolyak_w.is_some() { "smolyak_w" } else { "tensor_orders" };
            return Err((key, "conflicting sampling strategy".into()));
        }
        if s.samples.is_some_and(|k| k < 2) {
            return Err(("samples", "Monte Carlo needs at least two samples".into()));
        }
        if s.tensor_orders.as_ref().is_some_and(|o| o.is_empty() || o.contains(&0)) {
            return Err(("tensor_orders", "tensor orders must be positive".into()));
        }
        if s.dimension == Some(0) {
            return Err(("dimension", "dimension must be positive".into()));
        }
        if let Some(o) = &s.tensor_orders {
            let want = s.dimension.unwrap_or_else(|| self.stochastic_dims());
            if o.len() != 1 && o.len() != want {
                return Err(("tensor_orders", format!("{want} orders expected, {} given", o.len())));
            }
        }
        match self.kind() {
            Kind::Mcs if matches!(self.strategy(), Strategy::Tensor(_) | Strategy::Smolyak(_)) => {
                return Err(("kind", "mcs runs take `samples`, not collocation nodes".into()))
            }
            Kind::Pcm if matches!(self.strategy(), Strategy::MonteCarlo { .. }) => {
                return Err(("kind", "pcm runs take `tensor_orders` or `smolyak_w`".into()))
            }
            Kind::Convergence if self.convergence.sweep.is_none() => {
                return Err(("sweep", "convergence runs need a sweep".into()))
            }
            _ => {}
        }
        if let Some(values) = &self.convergence.values {
            if values.is_empty() {
                return Err(("values", "sweep needs at least one value".into()));
            }
        }
        if self.convergence.replicates == Some(0) {
            return Err(("replicates", "at least one replicate".into()));
        }
        if self.output.observe_nt == Some(0) || self.output.observe_nx == Some(0) {
            return Err(("observe_nt", "observation grids need points".into()));
        }
        Ok(())
    }
}

/// Annotated document listing every key with its default, all commented out.
pub fn reference_document() -> String {
    format!(
        r#"# fracuq experiment configuration; every key is optional.
# kind = "solve"                 # solve | mcs | pcm | grid | convergence

[problem]
# case = "ivp_power"             # ivp_power | pde_one_sided | zero | unit | t_squared | sin_pi_t
# alpha = {DEFAULT_ALPHA}                    # deterministic runs; midpoint of alpha_interval when unset
# alpha_interval = [{}, {}]      # stochastic runs; [alpha, alpha] when only alpha is set
# beta = [{DEFAULT_BETA}]                   # one per spatial dimension
# beta_intervals = [[1.2, 1.8]]
# k = [1.0]
# gamma = 0.0
# operator_mode = "two_sided"    # left_only is the default for pde_one_sided
# domain = [[-1.0, 1.0]]         # required for non-manufactured cases with space
# horizon = 1.0

[basis]
# n = 4
# m = [8]                        # one value is broadcast to every dimension
# tau = 0.25                   # default alpha/2
# quadrature_boost = 0

[noise]
# modes = 0                      # 0 disables the additive noise
# length = horizon
# correlation = length/2
# amplitude = 1.0

[sampling]                     # at most one of samples / tensor_orders / smolyak_w
# seed = {DEFAULT_SEED}
# samples = {DEFAULT_SAMPLES}               # mcs default
# tensor_orders = [{DEFAULT_TENSOR_ORDER}]          # pcm default, broadcast when one value
# smolyak_w = 2
# dimension = 2                # grid only: generic U[-1,1]^dimension space

[convergence]
# sweep = "n"                  # n | m | samples | tensor | smolyak
# values = [2, 3, 4]
# replicates = 1

[output]
# dir = "fracuq-out"             # overridden by FRACUQ_OUT_DIR, then --out
# plot_scripts = true
# cache = true
# observe_nt = 16
# observe_nx = 16
# observation = "gauss"          # gauss | uniform
"#,
        DEFAULT_ALPHA_INTERVAL[0], DEFAULT_ALPHA_INTERVAL[1]
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_defaults_to_ivp_solve() {
        let c = parse_config("").unwrap();
        assert_eq!(c.kind(), Kind::Solve);
        assert_eq!(c.case(), ForcingCase::IvpPower);
        assert_eq!(c.spatial_dims(), 0);
        assert_eq!(c.alpha(), 0.5);
        assert_eq!(c.temporal_count(), 4);
    }

    #[test]
    fn reference_document_is_the_default() {
        assert_eq!(parse_config(&reference_document()).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn interval_round_trips() {
        let c = parse_config("kind = \"pcm\"\n[problem]\nalpha_interval = [0.1, 0.9]\n").unwrap();
        let again = parse_config(&serialize_config(&c)).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.alpha_interval(), (0.1, 0.9));
    }

    #[test]
    fn conflicting_strategy_is_rejected_with_line() {
        let text = "kind = \"pcm\"\n[sampling]\ntensor_orders = [3]\nsmolyak_w = 2\n";
        match parse_config(text) {
            Err(ConfigError::Invalid { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("conflicting sampling strategy"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let err = parse_config("[problem]\nalpha = 0.4\nalhpa = 0.3\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("alhpa"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("[problem\n"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn invalid_values() {
        assert!(parse_config("[problem]\nalpha = 1.2\n").is_err());
        assert!(parse_config("[problem]\ncase = \"pde_one_sided\"\nbeta = [1.5, 1.6]\n").is_err());
        assert!(parse_config("[problem]\ncase = \"zero\"\ndomain = [[1.0, -1.0]]\n").is_err());
        assert!(parse_config("kind = \"mcs\"\n[sampling]\nsmolyak_w = 1\n").is_err());
        assert!(parse_config("kind = \"convergence\"\n").is_err());
    }

    #[test]
    fn command_kind_must_agree() {
        let c = parse_config_for("", Some(Kind::Mcs)).unwrap();
        assert_eq!(c.kind(), Kind::Mcs);
        assert!(matches!(
            parse_config_for("\nkind = \"pcm\"\n", Some(Kind::Mcs)),
            Err(ConfigError::Invalid { line: 2, .. })
        ));
    }

    #[test]
    fn strategy_defaults() {
        let mcs = parse_config("kind = \"mcs\"\n").unwrap();
        assert_eq!(mcs.strategy(), Strategy::MonteCarlo { samples: 1000, seed: 2017 });
        let pcm = parse_config("kind = \"pcm\"\n[problem]\ncase = \"pde_one_sided\"\n").unwrap();
        assert_eq!(pcm.strategy(), Strategy::Tensor(vec![10, 10]));
        let b = parse_config("kind = \"pcm\"\n[sampling]\ntensor_orders = [5]\n[noise]\nmodes = 4\n").unwrap();
        assert_eq!(b.strategy(), Strategy::Tensor(vec![5; 5]));
    }
}
