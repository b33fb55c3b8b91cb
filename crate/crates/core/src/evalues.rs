//! Bayes factors as e-values, their null-expectation adjustment, e-merging and calibration.
//!
//! The Bayes factor of a single p-value compares a uniform prior on `(0, 5r]` (alternative)
//! against either the point `θ = 0` (simple null) or a uniform prior on `[−3r, 0]`
//! (composite null). Under a simple null it is an e-value as is; under a composite null it
//! is divided by its expectation at `θ = 0`, which is the largest null expectation.
//!
//! Both models admit closed forms. With `w = Φ⁻¹(1 − p)` and `k = θ/σ`, the Normal-model
//! density is `exp(wk − k²/2)`, whose integral over an interval of `k` is a difference of
//! normal cdfs. The Beta-model integrand `(1 + θ) a^θ` integrates to
//! `B·E1(B ln a) + B²·E2(B ln a)` with `E1(x) = (eˣ − 1)/x` and `E2(x) = (x eˣ − eˣ + 1)/x²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combiners::check_gamma;
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::numerics::{
    integrate, ln_std_normal_cdf, ln_std_normal_interval, std_normal_pdf, std_normal_quantile_f64, Probability,
    QuadratureConfig,
};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A nonnegative, possibly infinite, e-value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EValue(f64);

impl EValue {
    pub const ONE: EValue = EValue(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 {
            Ok(EValue(value))
        } else {
            Err(Error::Domain(format!("an e-value must be >= 0, got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for EValue {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        EValue::new(value)
    }
}

impl From<EValue> for f64 {
    fn from(e: EValue) -> f64 {
        e.0
    }
}

impl fmt::Display for EValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullKind {
    /// Point null `θ = 0`.
    Simple,
    /// Uniform prior on `[−null_lower·r, 0]`.
    Composite,
}

/// Prior supports as multiples of `r`: alternative `(0, alt_upper·r]`, composite null
/// `[−null_lower·r, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSupport {
    pub alt_upper: f64,
    pub null_lower: f64,
}

impl Default for PriorSupport {
    fn default() -> Self {
        PriorSupport { alt_upper: 5.0, null_lower: 3.0 }
    }
}

/// A Bayes factor for one p-value together with its cached null-expectation constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesFactorSpec {
    model: ModelSpec,
    r: f64,
    null_kind: NullKind,
    priors: PriorSupport,
    null_expectation: f64,
}

impl BayesFactorSpec {
    /// Builds the spec with the default priors, computing `E₀[BF]` for composite nulls.
    pub fn new(model: ModelSpec, r: f64, null_kind: NullKind) -> Result<Self> {
        Self::with_priors(model, r, null_kind, PriorSupport::default())
    }

    pub fn with_priors(model: ModelSpec, r: f64, null_kind: NullKind, priors: PriorSupport) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("signal strength r must be > 0, got {r}")));
        }
        for (name, v) in [("alt_upper", priors.alt_upper), ("null_lower", priors.null_lower)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("prior support {name} must be > 0, got {v}")));
            }
        }
        let mut spec = BayesFactorSpec { model, r, null_kind, priors, null_expectation: 1.0 };
        if null_kind == NullKind::Composite {
            let e0 = null_expectation_by_quadrature(&spec, &null_expectation_config())?;
            if e0 < 1.0 - 1e-8 {
                return Err(Error::Domain(format!("composite null expectation {e0} is below 1")));
            }
            spec.null_expectation = e0;
        }
        Ok(spec)
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn null_kind(&self) -> NullKind {
        self.null_kind
    }

    pub fn priors(&self) -> PriorSupport {
        self.priors
    }

    /// Upper end `alt_upper·r` of the alternative prior.
    pub fn alt_upper(&self) -> f64 {
        self.priors.alt_upper * self.r
    }

    /// Lower end `−null_lower·r` of the composite null prior.
    pub fn null_lower(&self) -> f64 {
        -self.priors.null_lower * self.r
    }

    /// Cached `E₀[BF]`; exactly 1 for a simple null.
    pub fn null_expectation(&self) -> f64 {
        self.null_expectation
    }

    /// Unadjusted Bayes factor at `p` as a plain float. Never fails.
    #[inline]
    pub fn bf(&self, p: f64) -> f64 {
        match self.model {
            ModelSpec::Beta => self.beta_bf(p.ln(), (-p).ln_1p()),
            ModelSpec::Normal { sigma } => self.normal_bf(-std_normal_quantile_f64(p), sigma),
        }
    }

    /// Adjusted e-value `BF(p) / E₀[BF]` as a plain float.
    #[inline]
    pub fn adjusted(&self, p: f64) -> f64 {
        self.bf(p) / self.null_expectation
    }

    /// Bayes factor at the p-value `Φ(−w)`, evaluated without forming `p`.
    fn bf_at_w(&self, w: f64) -> f64 {
        match self.model {
            ModelSpec::Beta => self.beta_bf(ln_std_normal_cdf(-w), ln_std_normal_cdf(w)),
            ModelSpec::Normal { sigma } => self.normal_bf(w, sigma),
        }
    }

    fn beta_bf(&self, ln_p: f64, ln_q: f64) -> f64 {
        let b = self.alt_upper();
        let num = beta_mixture_integral(b, ln_q) / b;
        match self.null_kind {
            NullKind::Simple => num,
            NullKind::Composite => {
                let c = -self.null_lower();
                let den = beta_mixture_integral(c, ln_p) / c;
                if den == 0.0 {
                    f64::INFINITY
                } else {
                    num / den
                }
            }
        }
    }

    fn normal_bf(&self, w: f64, sigma: f64) -> f64 {
        if w == f64::INFINITY {
            return f64::INFINITY;
        }
        if w == f64::NEG_INFINITY {
            return 0.0;
        }
        let a = self.alt_upper() / sigma;
        let ln_num = ln_std_normal_interval(-w, a - w);
        match self.null_kind {
            NullKind::Simple => ((sigma / self.alt_upper()).ln() + LN_SQRT_2PI + 0.5 * w * w + ln_num).exp(),
            NullKind::Composite => {
                let c = -self.null_lower() / sigma;
                let ln_den = ln_std_normal_interval(-c - w, -w);
                (self.priors.null_lower / self.priors.alt_upper) * (ln_num - ln_den).exp()
            }
        }
    }
}

/// `∫₀^B (1 + θ) e^{θ l} dθ` for `l <= 0`.
fn beta_mixture_integral(b: f64, l: f64) -> f64 {
    if l == f64::NEG_INFINITY {
        return 0.0;
    }
    let x = b * l;
    let (e1, e2) = if x.abs() < 0.5 {
        // E1 = Σ xⁿ/(n+1)!, E2 = Σ xⁿ/(n!(n+2))
        let (mut e1, mut e2) = (0.0, 0.0);
        let mut pow_over_fact = 1.0; // xⁿ/n!
        for n in 0..24 {
            let nf = n as f64;
            e1 += pow_over_fact / (nf + 1.0);
            e2 += pow_over_fact / (nf + 2.0);
            pow_over_fact *= x / (nf + 1.0);
        }
        (e1, e2)
    } else {
        let em1 = x.exp_m1();
        (em1 / x, (x * x.exp() - em1) / (x * x))
    };
    b * e1 + b * b * e2
}

fn null_expectation_config() -> QuadratureConfig {
    QuadratureConfig { abs_tol: 1e-12, rel_tol: 1e-11, max_subdivisions: 4096 }
}

/// Integrates `f` over `[lo, hi]` split at the given interior points.
fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, breaks: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    let mut points: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|&b| b > lo && b < hi))
        .chain(std::iter::once(hi))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut total = 0.0;
    for pair in points.windows(2) {
        total += integrate(&mut f, pair[0], pair[1], cfg)?;
    }
    Ok(total)
}

/// `E_θ[BF]` for data from `f_θ`, by quadrature in `w = Φ⁻¹(1 − p)`.
///
/// Substituting `p = Φ(−w)` turns the endpoint singularities in `p` into Gaussian tails.
pub fn expected_bayes_factor(spec: &BayesFactorSpec, theta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (shift, a) = match spec.model {
        ModelSpec::Beta => (0.0, 0.0),
        ModelSpec::Normal { sigma } => (theta / sigma, spec.alt_upper() / sigma),
    };
    let lo = (-12.0f64).min(shift - 12.0);
    let hi = 12.0f64.max(a + 12.0).max(shift + 12.0);
    let model = spec.model;
    let integrand = |w: f64| {
        let bf = spec.bf_at_w(w);
        if bf == 0.0 {
            return 0.0;
        }
        let weight = match model {
            ModelSpec::Normal { .. } => std_normal_pdf(w - shift),
            ModelSpec::Beta => beta_density_at_w(theta, w) * std_normal_pdf(w),
        };
        if weight == 0.0 {
            0.0
        } else {
            bf * weight
        }
    };
    integrate_pieces(integrand, lo, hi, &[-6.0, 0.0, 6.0, a, shift], cfg)
}

/// Beta-model density at `p = Φ(−w)`, using `ln p` and `ln(1 − p)` from the normal tails.
fn beta_density_at_w(theta: f64, w: f64) -> f64 {
    if theta <= 0.0 {
        (1.0 - theta) * (-theta * ln_std_normal_cdf(-w)).exp()
    } else {
        (1.0 + theta) * (theta * ln_std_normal_cdf(w)).exp()
    }
}

/// `E₀[BF] = ∫₀¹ BF(p) dp` by quadrature, regardless of the null kind.
pub fn null_expectation_by_quadrature(spec: &BayesFactorSpec, cfg: &QuadratureConfig) -> Result<f64> {
    expected_bayes_factor(spec, 0.0, cfg)
}

/// The cached adjustment constant `E₀[BF]`.
pub fn null_expectation(spec: &BayesFactorSpec) -> f64 {
    spec.null_expectation
}

/// Unadjusted Bayes factor at `p`, from the closed forms.
pub fn bayes_factor(spec: &BayesFactorSpec, p: Probability) -> Result<EValue> {
    Ok(EValue(spec.bf(p.value())))
}

/// Unadjusted Bayes factor at `p` by direct quadrature of the model density over both priors.
pub fn bayes_factor_quadrature(spec: &BayesFactorSpec, p: Probability, cfg: &QuadratureConfig) -> Result<EValue> {
    let model = spec.model;
    let density = |theta: f64| model.density(theta, p);
    let upper = spec.alt_upper();
    let num = integrate(density, 0.0, upper, cfg)? / upper;
    let den = match spec.null_kind {
        NullKind::Simple => 1.0,
        NullKind::Composite => {
            let lower = spec.null_lower();
            integrate(density, lower, 0.0, cfg)? / -lower
        }
    };
    let value = if den == 0.0 { f64::INFINITY } else { num / den };
    EValue::new(value)
}

/// `BF(p) / E₀[BF]`, an e-value for the marginal null.
pub fn adjusted_e(spec: &BayesFactorSpec, p: Probability) -> EValue {
    EValue(spec.adjusted(p.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeRule {
    Product,
    ArithMean,
    /// Not a valid e-merging function in general; kept for comparison only.
    HarmMean,
}

impl MergeRule {
    pub fn name(self) -> &'static str {
        match self {
            MergeRule::Product => "product",
            MergeRule::ArithMean => "mean",
            MergeRule::HarmMean => "harmonic",
        }
    }
}

impl fmt::Display for MergeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MergeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "product" | "prod" => Ok(MergeRule::Product),
            "mean" | "arithmetic" | "arith-mean" => Ok(MergeRule::ArithMean),
            "harmonic" | "harm-mean" => Ok(MergeRule::HarmMean),
            other => Err(Error::InvalidParameter(format!("unknown merge rule '{other}'"))),
        }
    }
}

/// Merges raw e-values. `0 · ∞` is taken as 0 in the product.
pub(crate) fn merge_f64(e: &[f64], rule: MergeRule) -> f64 {
    let k = e.len() as f64;
    match rule {
        MergeRule::Product => {
            if e.contains(&0.0) {
                0.0
            } else {
                e.iter().product()
            }
        }
        MergeRule::ArithMean => e.iter().sum::<f64>() / k,
        MergeRule::HarmMean => {
            if e.contains(&0.0) {
                0.0
            } else {
                k / e.iter().map(|x| 1.0 / x).sum::<f64>()
            }
        }
    }
}

pub fn e_merge(e: &[EValue], rule: MergeRule) -> Result<EValue> {
    if e.is_empty() {
        return Err(Error::InvalidParameter("cannot merge an empty set of e-values".into()));
    }
    let raw: Vec<f64> = e.iter().map(|x| x.0).collect();
    Ok(EValue(merge_f64(&raw, rule)))
}

/// E-value for `H_s^γ`: merges the `s − γ + 1` smallest e-values.
pub fn partial_conjunction_e(e: &[EValue], gamma: usize, rule: MergeRule) -> Result<EValue> {
    check_gamma(gamma, e.len())?;
    let mut sorted = e.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    e_merge(&sorted[..e.len() - gamma + 1], rule)
}

/// Markov calibration `min(1, 1/e)`, with `1/0 = ∞` and `1/∞ = 0`.
pub fn e_to_p(e: EValue) -> Probability {
    Probability((1.0 / e.0).min(1.0))
}
