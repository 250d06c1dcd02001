//! Batch front end: configuration-driven experiments writing CSV tables,
//! run manifests and plotting scripts.

pub mod config;
mod scripts;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{parse_config, parse_config_for, reference_document, serialize_config, ConfigError, ExperimentConfig, Kind, Strategy, Sweep};
use config::{ForcingCase, GridLayout};

use crate::noise::{NoiseError, NoiseSpec};
use crate::pgsolver::{assemble, evaluate_grid, manufactured_exact, solve_direct, solve_fast, Forcing, ManufacturedCase, PgError};
use crate::randomspace::{monte_carlo_set, smolyak_grid, tensor_grid, Dimension, RandomParameterSpace, SampleSet, SpaceError};
use crate::uq::{
    error_report, exact_expectation_oracle, loglog_slope, replicate_seed, run_mcs, run_pcm, FractionalTemplate, ObservationGrid, PdeModel,
    SolutionCache, StatisticsResult, StochasticProblem, TemplateForcing, UqError,
};

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "FRACUQ_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "fracuq-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Uq(#[from] UqError),
    #[error(transparent)]
    Solver(#[from] PgError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("thread pool: {0}")]
    Threads(String),
}

/// Command-line overrides layered on top of the configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub check_direct: bool,
    pub threads: Option<usize>,
}

/// What a command produced: the output directory, files written and the
/// scalar records also stored in `report.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub kind: Kind,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub records: Vec<(String, String)>,
}

impl RunSummary {
    pub fn record(&self, key: &str) -> Option<&str> {
        self.records.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// `--out`, then the environment override, then the config, then a default.
pub fn resolve_out_dir(cli: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    PathBuf::from(cfg.output.dir.as_deref().unwrap_or(DEFAULT_OUT_DIR))
}

/// Parses `text`, then runs `command` in a thread pool of the requested size.
pub fn run_text(command: Kind, text: &str, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let mut cfg = parse_config_for(text, Some(command))?;
    if let Some(seed) = opts.seed {
        cfg.sampling.seed = Some(seed);
    }
    let hash = hex(&Sha256::digest(text.as_bytes()));
    match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Threads(e.to_string()))?;
            pool.install(|| run(&cfg, &hash, opts))
        }
        None => run(&cfg, &hash, opts),
    }
}

pub fn run(cfg: &ExperimentConfig, config_hash: &str, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let mut out = Output::new(resolve_out_dir(opts.out.as_deref(), cfg))?;
    let start = Instant::now();
    match cfg.kind() {
        Kind::Solve => cmd_solve(cfg, opts, &mut out)?,
        Kind::Mcs => cmd_mcs(cfg, &mut out)?,
        Kind::Pcm => cmd_pcm(cfg, &mut out)?,
        Kind::Grid => cmd_grid(cfg, &mut out)?,
        Kind::Convergence => cmd_convergence(cfg, &mut out)?,
    }
    out.text("config.toml", &serialize_config(cfg))?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "tool = fracuq {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "kind = {}", cfg.kind());
    let _ = writeln!(manifest, "config_sha256 = {config_hash}");
    let _ = writeln!(manifest, "canonical_config_sha256 = {}", hex(&Sha256::digest(serialize_config(cfg).as_bytes())));
    let _ = writeln!(manifest, "seed = {}", cfg.seed());
    let _ = writeln!(manifest, "threads = {}", rayon::current_num_threads());
    for (k, v) in &out.provenance {
        let _ = writeln!(manifest, "{k} = {v}");
    }
    let _ = writeln!(manifest, "wall_time_s = {:.6}", start.elapsed().as_secs_f64());
    out.text("manifest.txt", &manifest)?;
    let report: String = out.records.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    out.text("report.txt", &report)?;
    Ok(RunSummary {
        kind: cfg.kind(),
        out_dir: out.dir,
        files: out.files,
        records: out.records,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
    records: Vec<(String, String)>,
    provenance: Vec<(String, String)>,
}

impl Output {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(Self {
            dir,
            files: Vec::new(),
            records: Vec::new(),
            provenance: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn create(&mut self, name: &str) -> Result<fs::File, CliError> {
        let p = self.path(name);
        fs::File::create(&p).map_err(|source| CliError::Io { path: p, source })
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let p = self.path(name);
        fs::write(&p, body).map_err(|source| CliError::Io { path: p, source })
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.records.push((key.to_string(), value.to_string()));
    }

    fn provenance(&mut self, key: &str, value: impl ToString) {
        self.provenance.push((key.to_string(), value.to_string()));
    }
}

fn fmt_e(v: f64) -> String {
    format!("{v:e}")
}

fn template_forcing(cfg: &ExperimentConfig) -> TemplateForcing {
    match cfg.case() {
        ForcingCase::IvpPower => TemplateForcing::Manufactured(ManufacturedCase::IvpPower),
        ForcingCase::PdeOneSided => TemplateForcing::Manufactured(ManufacturedCase::PdeOneSided),
        ForcingCase::Zero => TemplateForcing::Given(Forcing::zero()),
        ForcingCase::Unit => TemplateForcing::Given(Forcing::from_fn("unit", |_, _| 1.0)),
        ForcingCase::TSquared => TemplateForcing::Given(Forcing::from_fn("t_squared", |t, _| t * t)),
        ForcingCase::SinPiT => TemplateForcing::Given(Forcing::from_fn("sin_pi_t", |t, _| (std::f64::consts::PI * t).sin())),
    }
}

fn manufactured_case(cfg: &ExperimentConfig) -> Option<ManufacturedCase> {
    match cfg.case() {
        ForcingCase::IvpPower => Some(ManufacturedCase::IvpPower),
        ForcingCase::PdeOneSided => Some(ManufacturedCase::PdeOneSided),
        _ => None,
    }
}

/// Builds the template from the configuration (noise included when `modes > 0`).
pub fn template(cfg: &ExperimentConfig) -> Result<FractionalTemplate, CliError> {
    let noise = match cfg.noise_modes() {
        0 => None,
        m => Some(NoiseSpec::new(cfg.noise_length(), cfg.noise_correlation(), m, cfg.noise_amplitude())?),
    };
    Ok(FractionalTemplate {
        forcing: template_forcing(cfg),
        temporal_count: cfg.temporal_count(),
        spatial_counts: cfg.spatial_counts(),
        horizon: cfg.horizon(),
        intervals: cfg.domain(),
        k: cfg.k(),
        gamma: cfg.gamma(),
        mode: cfg.mode(),
        tau: cfg.basis.tau,
        noise,
        quadrature_boost: cfg.quadrature_boost(),
    })
}

/// Random space `(α, β_1..β_d, Q_1..Q_M)` of a stochastic run.
pub fn random_space(cfg: &ExperimentConfig) -> Result<RandomParameterSpace, CliError> {
    Ok(RandomParameterSpace::fractional(cfg.alpha_interval(), &cfg.beta_intervals(), cfg.noise_modes())?)
}

pub fn observation_grid(cfg: &ExperimentConfig) -> Result<ObservationGrid, CliError> {
    let domain = cfg.domain();
    let (nt, nx) = (cfg.observe_nt(), cfg.observe_nx());
    Ok(match cfg.observation() {
        GridLayout::Gauss => ObservationGrid::gauss(cfg.horizon(), &domain, nt, nx)?,
        GridLayout::Uniform => ObservationGrid::uniform(cfg.horizon(), &domain, nt.max(2), nx.max(2))?,
    })
}

fn deterministic_point(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut xi = vec![cfg.alpha()];
    xi.extend(cfg.betas());
    xi.extend(std::iter::repeat_n(0.0, cfg.noise_modes()));
    xi
}

fn exact_field(cfg: &ExperimentConfig, alpha: f64, beta: Option<f64>, grid: &ObservationGrid) -> Option<Vec<f64>> {
    let case = manufactured_case(cfg)?;
    let u = manufactured_exact(case, alpha, beta, cfg.domain().first().copied());
    let mut out = vec![0.0; grid.len()];
    grid.for_each_point(|i, t, x, _| out[i] = u(t, x));
    Some(out)
}

fn write_field_csv(out: &mut Output, name: &str, grid: &ObservationGrid, columns: &[(&str, &[f64])]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out.create(name)?);
    let mut header = vec!["t".to_string()];
    header.extend((1..=grid.xs().len()).map(|j| format!("x_{j}")));
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    let mut rows = Vec::with_capacity(grid.len());
    grid.for_each_point(|i, t, x, _| {
        let mut row = vec![fmt_e(t)];
        row.extend(x.iter().map(|&v| fmt_e(v)));
        row.extend(columns.iter().map(|(_, c)| fmt_e(c[i])));
        rows.push(row);
    });
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|source| CliError::Io { path: out.dir.join(name), source })?;
    Ok(())
}

fn max_rel_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn cmd_solve(cfg: &ExperimentConfig, opts: &RunOptions, out: &mut Output) -> Result<(), CliError> {
    let tpl = template(cfg)?;
    let grid = observation_grid(cfg)?;
    let problem = tpl.problem_at(&deterministic_point(cfg))?;
    let system = assemble(&problem, tpl.quadrature_boost)?;
    let t0 = Instant::now();
    let sol = solve_fast(&system)?;
    out.record("fast_solve_s", format!("{:.6}", t0.elapsed().as_secs_f64()));
    out.record("unknowns", system.basis().unknowns());
    out.record("fingerprint", sol.fingerprint());
    if opts.check_direct {
        let t1 = Instant::now();
        let direct = solve_direct(&system)?;
        out.record("direct_max_rel_discrepancy", fmt_e(max_rel_discrepancy(sol.coefficients(), direct.coefficients())));
        out.record("direct_solve_s", format!("{:.6}", t1.elapsed().as_secs_f64()));
    }
    let field = evaluate_grid(&sol, grid.times(), grid.xs())?;
    out.record("l2_norm", fmt_e(grid.l2_norm(&field)));
    match exact_field(cfg, cfg.alpha(), cfg.betas().first().copied(), &grid) {
        Some(exact) => {
            let err: Vec<f64> = field.iter().zip(&exact).map(|(u, e)| u - e).collect();
            out.record("l2_error", fmt_e(grid.l2_norm(&err)));
            out.record("max_error", fmt_e(err.iter().fold(0.0_f64, |m, v| m.max(v.abs()))));
            write_field_csv(out, "solution.csv", &grid, &[("u", &field), ("exact", &exact), ("error", &err)])?;
        }
        None => write_field_csv(out, "solution.csv", &grid, &[("u", &field)])?,
    }
    out.text("coefficients.txt", &sol.to_text())?;
    out.provenance("problem_fingerprint", sol.fingerprint());
    if cfg.plot_scripts() {
        out.text("plot_solution.py", &scripts::solution(grid.xs().len()))?;
    }
    Ok(())
}

fn stochastic_problem(cfg: &ExperimentConfig, cache: Option<Arc<SolutionCache>>) -> Result<StochasticProblem, CliError> {
    let mut model = PdeModel::new(template(cfg)?);
    if let Some(c) = cache {
        model = model.with_cache(c);
    }
    Ok(StochasticProblem::pde(random_space(cfg)?, model, observation_grid(cfg)?)?)
}

fn oracle(cfg: &ExperimentConfig, problem: &StochasticProblem) -> Result<Option<Vec<f64>>, CliError> {
    if manufactured_case(cfg).is_none() {
        return Ok(None);
    }
    Ok(Some(exact_expectation_oracle(
        &template_forcing(cfg),
        &problem.space,
        &problem.grid,
        cfg.domain().first().copied(),
    )?))
}

fn write_statistics(cfg: &ExperimentConfig, out: &mut Output, res: &StatisticsResult, reference: Option<&[f64]>) -> Result<(), CliError> {
    res.write_csv(out.create("statistics.csv")?)?;
    out.record("samples", res.meta.samples);
    out.record("failed_samples", res.meta.failed.len());
    out.record("max_std", fmt_e(res.std.iter().fold(0.0_f64, |m, v| m.max(*v))));
    out.record("l2_mean", fmt_e(res.grid.l2_norm(&res.mean)));
    out.record("l2_std", fmt_e(res.grid.l2_norm(&res.std)));
    out.record("wall_time_s", format!("{:.6}", res.meta.wall_time.as_secs_f64()));
    if let Some(r) = reference {
        let rep = error_report(res, r, None)?;
        out.record("l2_mean_error", fmt_e(rep.l2_mean));
        out.record("max_mean_error", fmt_e(rep.max_mean));
    }
    out.provenance("sampling", &res.meta.provenance);
    let mut w = csv::Writer::from_writer(out.create("samples.csv")?);
    w.write_record(["index", "l2_norm"])?;
    for (i, n) in res.sample_norms.iter().enumerate() {
        w.write_record([i.to_string(), fmt_e(*n)])?;
    }
    w.flush().map_err(|source| CliError::Io { path: out.dir.join("samples.csv"), source })?;
    if cfg.plot_scripts() {
        out.text("plot_statistics.py", &scripts::statistics(res.grid.xs().len()))?;
    }
    Ok(())
}

fn cmd_mcs(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let Strategy::MonteCarlo { samples, seed } = cfg.strategy() else {
        return Err(CliError::Usage("mcs needs a Monte Carlo sample count".into()));
    };
    let problem = stochastic_problem(cfg, None)?;
    let res = run_mcs(&problem, samples, seed)?;
    let reference = oracle(cfg, &problem)?;
    write_statistics(cfg, out, &res, reference.as_deref())
}

fn collocation_nodes(space: &RandomParameterSpace, strategy: &Strategy) -> Result<SampleSet, CliError> {
    Ok(match strategy {
        Strategy::Tensor(orders) => tensor_grid(space, orders)?,
        Strategy::Smolyak(w) => smolyak_grid(space, *w)?,
        Strategy::MonteCarlo { .. } => return Err(CliError::Usage("collocation needs tensor_orders or smolyak_w".into())),
    })
}

fn solution_cache(cfg: &ExperimentConfig, out: &Output) -> Result<Option<Arc<SolutionCache>>, CliError> {
    if !cfg.cache() {
        return Ok(None);
    }
    Ok(Some(Arc::new(SolutionCache::on_disk(out.dir.join("cache"))?)))
}

fn cmd_pcm(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let cache = solution_cache(cfg, out)?;
    let problem = stochastic_problem(cfg, cache.clone())?;
    let nodes = collocation_nodes(&problem.space, &cfg.strategy())?;
    nodes.write_csv(out.create("nodes.csv")?)?;
    let res = run_pcm(&problem, &nodes)?;
    let reference = oracle(cfg, &problem)?;
    if let Some(c) = &cache {
        out.record("cache_hits", c.hits());
    }
    write_statistics(cfg, out, &res, reference.as_deref())
}

fn grid_space(cfg: &ExperimentConfig) -> Result<RandomParameterSpace, CliError> {
    match cfg.sampling.dimension {
        Some(n) => Ok(RandomParameterSpace::new(
            (1..=n)
                .map(|i| Dimension {
                    name: format!("xi_{i}"),
                    lo: -1.0,
                    hi: 1.0,
                })
                .collect(),
        )?),
        None => random_space(cfg),
    }
}

fn cmd_grid(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let space = grid_space(cfg)?;
    let set = match cfg.strategy() {
        Strategy::MonteCarlo { samples, seed } => monte_carlo_set(&space, samples, seed)?,
        s => collocation_nodes(&space, &s)?,
    };
    set.write_csv(out.create("nodes.csv")?)?;
    out.record("dimension", space.len());
    out.record("points", set.len());
    if set.is_weighted() {
        out.record("weight_sum", fmt_e(set.weights().iter().sum::<f64>()));
    }
    out.provenance("sampling", set.provenance());
    Ok(())
}

struct SweepRow {
    value: usize,
    cost: usize,
    error: Option<f64>,
    mean: Vec<f64>,
    std: Option<Vec<f64>>,
}

fn sweep_values(cfg: &ExperimentConfig, sweep: Sweep) -> Vec<usize> {
    cfg.convergence.values.clone().unwrap_or_else(|| match sweep {
        Sweep::N => vec![2, 3, 4, 5, 6],
        Sweep::M => vec![4, 6, 8, 12, 16],
        Sweep::Samples => vec![100, 1000, 10000],
        Sweep::Tensor => (2..=10).collect(),
        Sweep::Smolyak => vec![1, 2],
    })
}

fn cmd_convergence(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let sweep = cfg.convergence.sweep.ok_or_else(|| CliError::Usage("convergence runs need a sweep".into()))?;
    let values = sweep_values(cfg, sweep);
    let grid = observation_grid(cfg)?;
    let mut rows = Vec::with_capacity(values.len());
    match sweep {
        Sweep::N | Sweep::M => {
            for &v in &values {
                let mut c = cfg.clone();
                if sweep == Sweep::N {
                    c.basis.n = Some(v);
                } else {
                    c.basis.m = Some(vec![v; cfg.spatial_dims().max(1)]);
                }
                let tpl = template(&c)?;
                let problem = tpl.problem_at(&deterministic_point(&c))?;
                let system = assemble(&problem, tpl.quadrature_boost)?;
                let sol = solve_fast(&system)?;
                let field = evaluate_grid(&sol, grid.times(), grid.xs())?;
                let error = exact_field(&c, c.alpha(), c.betas().first().copied(), &grid).map(|e| {
                    let d: Vec<f64> = field.iter().zip(&e).map(|(u, x)| u - x).collect();
                    grid.l2_norm(&d)
                });
                rows.push(SweepRow {
                    value: v,
                    cost: system.basis().unknowns(),
                    error,
                    mean: field,
                    std: None,
                });
            }
        }
        Sweep::Samples => {
            let problem = stochastic_problem(cfg, None)?;
            let reference = oracle(cfg, &problem)?;
            for &k in &values {
                let mut sq = 0.0;
                let mut first: Option<StatisticsResult> = None;
                for r in 0..cfg.replicates() as u64 {
                    let res = run_mcs(&problem, k, replicate_seed(cfg.seed(), r))?;
                    if let Some(refm) = &reference {
                        sq += error_report(&res, refm, None)?.l2_mean.powi(2);
                    }
                    first.get_or_insert(res);
                }
                let res = first.expect("at least one replicate");
                rows.push(SweepRow {
                    value: k,
                    cost: k,
                    error: reference.as_ref().map(|_| (sq / cfg.replicates() as f64).sqrt()),
                    mean: res.mean,
                    std: Some(res.std),
                });
            }
        }
        Sweep::Tensor | Sweep::Smolyak => {
            let cache = solution_cache(cfg, out)?;
            let problem = stochastic_problem(cfg, cache)?;
            let reference = oracle(cfg, &problem)?;
            for &v in &values {
                let strategy = if sweep == Sweep::Tensor {
                    Strategy::Tensor(vec![v; problem.space.len()])
                } else {
                    Strategy::Smolyak(v)
                };
                let nodes = collocation_nodes(&problem.space, &strategy)?;
                let res = run_pcm(&problem, &nodes)?;
                let error = match &reference {
                    Some(r) => Some(error_report(&res, r, None)?.l2_mean),
                    None => None,
                };
                rows.push(SweepRow {
                    value: v,
                    cost: nodes.len(),
                    error,
                    mean: res.mean,
                    std: Some(res.std),
                });
            }
        }
    }
    let finest = rows.iter().max_by_key(|r| r.value).expect("sweep has values");
    let rel = |a: &[f64], b: &[f64]| -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let n = grid.l2_norm(b);
        if n == 0.0 {
            grid.l2_norm(&d)
        } else {
            grid.l2_norm(&d) / n
        }
    };
    let mut w = csv::Writer::from_writer(out.create("convergence.csv")?);
    w.write_record(["sweep", "value", "cost", "l2_error", "rel_mean_vs_finest", "rel_std_vs_finest"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), fmt_e);
    let mut separation = None;
    for r in &rows {
        let rm = rel(&r.mean, &finest.mean);
        let rs = match (&r.std, &finest.std) {
            (Some(a), Some(b)) => Some(rel(a, b)),
            _ => None,
        };
        if r.value != finest.value && matches!(sweep, Sweep::Smolyak | Sweep::Tensor) && separation.is_none() {
            separation = Some((rm, rs.unwrap_or(f64::NAN)));
        }
        w.write_record([sweep.to_string(), r.value.to_string(), r.cost.to_string(), opt(r.error), fmt_e(rm), opt(rs)])?;
    }
    w.flush().map_err(|source| CliError::Io { path: out.dir.join("convergence.csv"), source })?;
    out.record("sweep", sweep);
    out.record("rows", rows.len());
    if let Some(last) = rows.last().and_then(|r| r.error) {
        out.record("final_l2_error", fmt_e(last));
    }
    let fit: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.error.filter(|e| *e > 0.0).map(|e| (r.value as f64, e))).collect();
    if rows.len() >= 2 && fit.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        if let Some(s) = loglog_slope(&x, &y) {
            out.record("loglog_slope", format!("{s:.6}"));
        }
    }
    if let Some((rm, rs)) = separation {
        out.record("mean_ratio", fmt_e(rm));
        out.record("std_ratio", fmt_e(rs));
        out.record("separation", fmt_e(rs / rm));
    }
    out.provenance("sweep", format!("{sweep}:{values:?}"));
    if sweep == Sweep::Samples {
        out.provenance("replicates", cfg.replicates());
    }
    if cfg.plot_scripts() {
        out.text("plot_convergence.py", scripts::CONVERGENCE)?;
    }
    Ok(())
}
