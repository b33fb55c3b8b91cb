//! Deterministic Monte Carlo engine for power and null-distribution experiments.
//!
//! Repetitions are split into fixed-size chunks; chunk `i` draws from
//! `RngStream(seed, i)` and reports integer counts, so every estimate is independent of
//! the number of worker threads and of scheduling order.

mod table;

use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combiners::{check_gamma, CombinerId};
use crate::error::{Error, Result};
use crate::evalues::{merge_f64, BayesFactorSpec, MergeRule, NullKind, PriorSupport};
use crate::models::{sample_theta_into, ModelSpec, PatternSpec, RngStream};
use crate::numerics::Probability;

pub use table::{ResultRow, ResultTable};

pub const DEFAULT_REPETITIONS: u64 = 100_000;
pub const DEFAULT_CHUNK_SIZE: u64 = 1024;

/// A combination pipeline: a p-value combiner, or Bayes-factor e-values merged and calibrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "fisher")]
    Fisher,
    #[serde(rename = "stouffer")]
    Stouffer,
    #[serde(rename = "minimum")]
    Minimum,
    #[serde(rename = "bonferroni")]
    Bonferroni,
    #[serde(rename = "e-product")]
    EProduct,
    #[serde(rename = "e-mean")]
    EArithMean,
    /// Harmonic mean of e-values. Not a valid e-merging function; diagnostic only.
    #[serde(rename = "e-harmonic")]
    EHarmMean,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Fisher,
        Method::Stouffer,
        Method::Minimum,
        Method::Bonferroni,
        Method::EProduct,
        Method::EArithMean,
        Method::EHarmMean,
    ];

    /// Every method whose combined p-value is guaranteed valid.
    pub const VALID: [Method; 6] = [
        Method::Fisher,
        Method::Stouffer,
        Method::Minimum,
        Method::Bonferroni,
        Method::EProduct,
        Method::EArithMean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fisher => "fisher",
            Method::Stouffer => "stouffer",
            Method::Minimum => "minimum",
            Method::Bonferroni => "bonferroni",
            Method::EProduct => "e-product",
            Method::EArithMean => "e-mean",
            Method::EHarmMean => "e-harmonic",
        }
    }

    pub fn combiner(self) -> Option<CombinerId> {
        match self {
            Method::Fisher => Some(CombinerId::Fisher),
            Method::Stouffer => Some(CombinerId::Stouffer),
            Method::Minimum => Some(CombinerId::Minimum),
            Method::Bonferroni => Some(CombinerId::Bonferroni),
            _ => None,
        }
    }

    pub fn merge_rule(self) -> Option<MergeRule> {
        match self {
            Method::EProduct => Some(MergeRule::Product),
            Method::EArithMean => Some(MergeRule::ArithMean),
            Method::EHarmMean => Some(MergeRule::HarmMean),
            _ => None,
        }
    }

    pub fn is_valid(self) -> bool {
        self != Method::EHarmMean
    }
}

impl From<CombinerId> for Method {
    fn from(c: CombinerId) -> Self {
        match c {
            CombinerId::Fisher => Method::Fisher,
            CombinerId::Stouffer => Method::Stouffer,
            CombinerId::Minimum => Method::Minimum,
            CombinerId::Bonferroni => Method::Bonferroni,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Ok(c) = lower.parse::<CombinerId>() {
            return Ok(c.into());
        }
        match lower.as_str() {
            "e-product" | "eproduct" => Ok(Method::EProduct),
            "e-mean" | "emean" => Ok(Method::EArithMean),
            "e-harmonic" | "eharmonic" => Ok(Method::EHarmMean),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub pattern: PatternSpec,
    pub gamma: usize,
    pub methods: Vec<Method>,
    pub alpha: Probability,
    pub repetitions: u64,
    pub seed: u64,
    pub chunk_size: u64,
    /// Worker threads; `None` uses the global rayon pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
    pub priors: PriorSupport,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, pattern: PatternSpec, gamma: usize, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            model,
            pattern,
            gamma,
            methods,
            alpha: Probability(0.05),
            repetitions: DEFAULT_REPETITIONS,
            seed: 0,
            chunk_size: DEFAULT_CHUNK_SIZE,
            workers: None,
            priors: PriorSupport::default(),
        }
    }

    pub fn with_repetitions(mut self, repetitions: u64) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: Probability) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_pattern(mut self, pattern: PatternSpec) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn with_gamma(mut self, gamma: usize) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma, self.pattern.s())?;
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("at least one method is required".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be positive".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidParameter("chunk size must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("worker count must be positive".into()));
        }
        Ok(())
    }

    /// The Bayes factor used by e-value pipelines: composite null iff some null is conservative.
    pub fn bayes_factor_spec(&self) -> Result<BayesFactorSpec> {
        let kind = if self.pattern.is_conservative() { NullKind::Composite } else { NullKind::Simple };
        BayesFactorSpec::with_priors(self.model, self.pattern.r, kind, self.priors)
    }
}

/// A Monte Carlo probability estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub method: Method,
    pub estimate: Probability,
    pub std_error: f64,
    pub repetitions: u64,
}

impl SimResult {
    pub fn from_count(method: Method, count: u64, repetitions: u64) -> Self {
        let p = count as f64 / repetitions as f64;
        SimResult {
            method,
            estimate: Probability(p),
            std_error: (p * (1.0 - p) / repetitions as f64).sqrt(),
            repetitions,
        }
    }
}

/// Per-repetition evaluator shared by all experiments.
struct Pipeline<'a> {
    cfg: &'a ExperimentConfig,
    bf: Option<BayesFactorSpec>,
}

struct Scratch {
    theta: Vec<f64>,
    p: Vec<Probability>,
    e: Vec<f64>,
}

impl<'a> Pipeline<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let bf = if cfg.methods.iter().any(|m| m.merge_rule().is_some()) {
            Some(cfg.bayes_factor_spec()?)
        } else {
            None
        };
        Ok(Pipeline { cfg, bf })
    }

    fn scratch(&self) -> Scratch {
        let s = self.cfg.pattern.s();
        Scratch { theta: vec![0.0; s], p: vec![Probability::ZERO; s], e: vec![0.0; s] }
    }

    /// Draws one repetition and writes each method's combined p-value into `out`.
    fn draw(&self, rng: &mut RngStream, sc: &mut Scratch, out: &mut [f64]) -> Result<()> {
        let cfg = self.cfg;
        sample_theta_into(&cfg.pattern, rng, &mut sc.theta);
        for (slot, &theta) in sc.p.iter_mut().zip(&sc.theta) {
            *slot = Probability(cfg.model.p_from_uniform(theta, rng.uniform()).clamp(0.0, 1.0));
        }
        sc.p.sort_by(|a, b| a.0.total_cmp(&b.0));
        let keep = cfg.pattern.s() - cfg.gamma + 1;
        if let Some(bf) = &self.bf {
            for (e, p) in sc.e.iter_mut().zip(&sc.p) {
                *e = bf.adjusted(p.0);
            }
            sc.e.sort_by(f64::total_cmp);
        }
        for (slot, method) in out.iter_mut().zip(&cfg.methods) {
            *slot = match (method.combiner(), method.merge_rule()) {
                (Some(c), _) => c.combine(&sc.p[cfg.gamma - 1..])?.0,
                (_, Some(rule)) => (1.0 / merge_f64(&sc.e[..keep], rule)).min(1.0),
                _ => unreachable!("every method is a combiner or a merge rule"),
            };
        }
        Ok(())
    }

    /// Runs every chunk, handing each repetition's combined p-values to `visit`.
    fn run<T, V>(&self, init: impl Fn() -> T + Sync, visit: V) -> Result<Vec<T>>
    where
        T: Send,
        V: Fn(&mut T, &[f64]) + Sync,
    {
        let cfg = self.cfg;
        let chunks = cfg.repetitions.div_ceil(cfg.chunk_size);
        let work = || {
            (0..chunks)
                .into_par_iter()
                .map(|i| {
                    let n = cfg.chunk_size.min(cfg.repetitions - i * cfg.chunk_size);
                    let mut rng = RngStream::new(cfg.seed, i);
                    let mut sc = self.scratch();
                    let mut out = vec![0.0; cfg.methods.len()];
                    let mut acc = init();
                    for _ in 0..n {
                        self.draw(&mut rng, &mut sc, &mut out)?;
                        visit(&mut acc, &out);
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<T>>>()
        };
        match cfg.workers {
            None => work(),
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?
                .install(work),
        }
    }
}

/// Estimates `P(combined p <= alpha)` for every method.
fn rejection_rates(cfg: &ExperimentConfig) -> Result<Vec<SimResult>> {
    let pipeline = Pipeline::new(cfg)?;
    let alpha = cfg.alpha.0;
    let k = cfg.methods.len();
    let per_chunk = pipeline.run(
        || vec![0u64; k],
        |acc, out| {
            for (c, &v) in acc.iter_mut().zip(out) {
                *c += (v <= alpha) as u64;
            }
        },
    )?;
    let mut counts = vec![0u64; k];
    for chunk in per_chunk {
        for (c, v) in counts.iter_mut().zip(chunk) {
            *c += v;
        }
    }
    Ok(cfg
        .methods
        .iter()
        .zip(counts)
        .map(|(&m, c)| SimResult::from_count(m, c, cfg.repetitions))
        .collect())
}

/// Power `P_θ(combined p <= α)` of every configured method.
pub fn run_power(cfg: &ExperimentConfig) -> Result<Vec<SimResult>> {
    if cfg.pattern.false_null_count() < cfg.gamma {
        warn!(
            "pattern {} has {} false nulls, fewer than gamma = {}: the partial conjunction null is true",
            cfg.pattern.label,
            cfg.pattern.false_null_count(),
            cfg.gamma
        );
    }
    rejection_rates(cfg)
}

/// Each estimate divided by the largest one. All-zero input maps to all zeros with a warning.
pub fn relative_power(results: &[SimResult]) -> Result<Vec<(Method, f64)>> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("relative power needs at least one result".into()));
    }
    let best = results.iter().map(|r| r.estimate.0).fold(0.0, f64::max);
    if best == 0.0 {
        warn!("all power estimates are zero; relative power set to 0");
        return Ok(results.iter().map(|r| (r.method, 0.0)).collect());
    }
    Ok(results.iter().map(|r| (r.method, r.estimate.0 / best)).collect())
}

/// The pattern with its first `count` zero entries replaced by `-1`.
pub fn conservative_pattern(base: &PatternSpec, count: usize) -> Result<PatternSpec> {
    base.replace_zeros(count, -1.0, format!("{}+{count}", base.label))
}

/// Ecdf at `alpha` of each method's combined p-value after making `conservative_count` nulls conservative.
pub fn run_null_ecdf(cfg: &ExperimentConfig, conservative_count: usize) -> Result<Vec<SimResult>> {
    let pattern = conservative_pattern(&cfg.pattern, conservative_count)?;
    if pattern.false_null_count() >= cfg.gamma {
        warn!("pattern {} makes the partial conjunction null false", pattern.label);
    }
    rejection_rates(&cfg.clone().with_pattern(pattern))
}

/// Ecdf values of one method on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcdfCurve {
    pub method: Method,
    pub grid: Vec<f64>,
    pub values: Vec<SimResult>,
}

/// Ecdf of each method's combined p-value at every grid point, from one pass over the repetitions.
pub fn run_ecdf_curve(cfg: &ExperimentConfig, grid: &[Probability]) -> Result<Vec<EcdfCurve>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("ecdf grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0].0 > w[1].0) {
        return Err(Error::InvalidParameter("ecdf grid must be sorted ascending".into()));
    }
    let pipeline = Pipeline::new(cfg)?;
    let t: Vec<f64> = grid.iter().map(|g| g.0).collect();
    let k = cfg.methods.len();
    let bins = t.len() + 1;
    // hist[m][j] counts values v with t[j-1] < v <= t[j]; the last bin holds v > max grid.
    let per_chunk = pipeline.run(
        || vec![0u64; k * bins],
        |acc, out| {
            for (m, &v) in out.iter().enumerate() {
                let j = t.partition_point(|&x| x < v);
                acc[m * bins + j] += 1;
            }
        },
    )?;
    let mut hist = vec![0u64; k * bins];
    for chunk in per_chunk {
        for (h, v) in hist.iter_mut().zip(chunk) {
            *h += v;
        }
    }
    Ok(cfg
        .methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let mut cum = 0;
            let values = (0..t.len())
                .map(|j| {
                    cum += hist[m * bins + j];
                    SimResult::from_count(method, cum, cfg.repetitions)
                })
                .collect();
            EcdfCurve { method, grid: t.clone(), values }
        })
        .collect())
}

/// Results of one `γ` in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaPoint {
    pub gamma: usize,
    pub results: Vec<SimResult>,
    pub relative: Vec<f64>,
}

/// Runs `run_power` for each `γ` with the same seed, so all `γ` share their random draws.
pub fn gamma_sweep(cfg: &ExperimentConfig, gammas: &[usize]) -> Result<Vec<GammaPoint>> {
    for &g in gammas {
        check_gamma(g, cfg.pattern.s())?;
    }
    gammas
        .iter()
        .map(|&gamma| {
            let results = run_power(&cfg.clone().with_gamma(gamma))?;
            let relative = relative_power(&results)?.into_iter().map(|(_, r)| r).collect();
            Ok(GammaPoint { gamma, results, relative })
        })
        .collect()
}
