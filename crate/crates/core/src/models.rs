//! p-value generating models, evidence patterns, and the random streams that drive them.
//!
//! Each marginal p-value has a density `f_θ` on `[0, 1]` that is uniform at `θ = 0`
//! and stochastically decreasing in `θ`. Two families are provided:
//!
//! * **Beta model**: `Beta(1 - θ, 1)` for `θ <= 0` and `Beta(1, 1 + θ)` for `θ > 0`.
//! * **Normal model**: the one-sided p-value `1 - Φ(T/σ)` of a Gaussian shift
//!   statistic `T ~ N(θ, σ²)`.
//!
//! All sampling is by inverse transform, one uniform per coordinate, in index order.

use std::io::Write;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{phi_unchecked, std_normal_quantile_f64, Probability};

/// SplitMix64 output function (Stafford variant 13).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible stream of uniforms identified by `(seed, stream_index)`.
///
/// The generator is xoshiro256++ seeded through SplitMix64 with
/// `mix64(seed ^ mix64(stream_index + 1))`. Uniform deviates are
/// `((x >> 11) + 0.5) * 2^-53`, which lies strictly inside `(0, 1)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let key = mix64(seed ^ mix64(stream_index.wrapping_add(1)));
        RngStream {
            seed,
            stream_index,
            rng: Xoshiro256PlusPlus::seed_from_u64(key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform deviate in the open interval `(0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }
}

/// The model parameter `θ = (θ_1, ..., θ_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "theta needs at least 2 coordinates, got {}",
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("theta coordinates must be finite".into()));
        }
        Ok(ThetaVector(theta))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An evidence pattern `μᵇ` scaled by a signal strength `r`, giving `θᵇ = r μᵇ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub label: String,
    pub mu_base: Vec<f64>,
    pub r: f64,
}

impl PatternSpec {
    pub fn new(label: impl Into<String>, mu_base: Vec<f64>, r: f64) -> Result<Self> {
        if mu_base.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a pattern needs at least 2 coordinates, got {}",
                mu_base.len()
            )));
        }
        if mu_base.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("pattern entries must be finite".into()));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("signal strength r must be > 0, got {r}")));
        }
        Ok(PatternSpec { label: label.into(), mu_base, r })
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("signal strength r must be > 0, got {r}")));
        }
        self.r = r;
        Ok(self)
    }

    pub fn s(&self) -> usize {
        self.mu_base.len()
    }

    pub fn theta_base(&self) -> Vec<f64> {
        self.mu_base.iter().map(|m| self.r * m).collect()
    }

    /// `Σ (μᵇ_i)²`.
    pub fn dispersion(&self) -> f64 {
        self.mu_base.iter().map(|m| m * m).sum()
    }

    /// Number of coordinates with `μᵇ_i > 0`, i.e. false marginal nulls.
    pub fn false_null_count(&self) -> usize {
        self.mu_base.iter().filter(|&&m| m > 0.0).count()
    }

    pub fn zero_count(&self) -> usize {
        self.mu_base.iter().filter(|&&m| m == 0.0).count()
    }

    /// True when some null coordinate is strictly below the boundary, so its p-value is conservative.
    pub fn is_conservative(&self) -> bool {
        self.mu_base.iter().any(|&m| m < 0.0)
    }

    /// Replaces the first `count` zero entries (ascending index) by `value`.
    pub fn replace_zeros(&self, count: usize, value: f64, label: impl Into<String>) -> Result<Self> {
        let zeros = self.zero_count();
        if count > zeros {
            return Err(Error::InvalidParameter(format!(
                "cannot replace {count} zero entries: pattern {} has only {zeros}",
                self.label
            )));
        }
        let mut remaining = count;
        let mu_base = self
            .mu_base
            .iter()
            .map(|&m| {
                if m == 0.0 && remaining > 0 {
                    remaining -= 1;
                    value
                } else {
                    m
                }
            })
            .collect();
        Ok(PatternSpec { label: label.into(), mu_base, r: self.r })
    }

    /// The conservative variant `jc`: every zero entry becomes `-2`.
    pub fn conservative_variant(&self) -> Self {
        let mu_base = self.mu_base.iter().map(|&m| if m == 0.0 { -2.0 } else { m }).collect();
        PatternSpec { label: format!("{}c", self.label), mu_base, r: self.r }
    }
}

const TABLE: [[f64; 6]; 13] = [
    [0.0, 0.0, 0.0, 0.0, 1.0, 5.0],
    [0.0, 0.0, 0.0, 0.0, 3.0, 3.0],
    [0.0, 0.0, 0.0, 1.0, 1.0, 4.0],
    [0.0, 0.0, 0.0, 2.0, 2.0, 2.0],
    [0.0, 0.0, 1.0, 1.0, 1.0, 3.0],
    [0.0, 0.0, 1.5, 1.5, 1.5, 1.5],
    [0.0, 0.5, 0.5, 0.5, 0.5, 4.0],
    [0.0, 1.0, 1.0, 1.0, 1.0, 2.0],
    [0.0, 1.2, 1.2, 1.2, 1.2, 1.2],
    [0.2, 0.2, 0.2, 0.2, 0.2, 5.0],
    [0.5, 0.5, 0.5, 0.5, 2.0, 2.0],
    [0.5, 0.5, 1.25, 1.25, 1.25, 1.25],
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
];

/// Patterns 1–13 followed by the conservative variants 1c–9c, all with `r = 1`.
pub fn pattern_catalog() -> Vec<PatternSpec> {
    let base: Vec<PatternSpec> = TABLE
        .iter()
        .enumerate()
        .map(|(i, row)| PatternSpec { label: (i + 1).to_string(), mu_base: row.to_vec(), r: 1.0 })
        .collect();
    let conservative: Vec<PatternSpec> = base[..9].iter().map(PatternSpec::conservative_variant).collect();
    base.into_iter().chain(conservative).collect()
}

/// Looks a pattern up by its catalog label (`"1"` … `"13"`, `"1c"` … `"9c"`).
pub fn catalog_pattern(label: &str) -> Option<PatternSpec> {
    pattern_catalog().into_iter().find(|p| p.label == label)
}

/// Writes patterns as CSV with columns `label, mu1..mu_s, dispersion`.
pub fn write_catalog_csv<W: Write>(patterns: &[PatternSpec], writer: W) -> Result<()> {
    let s = patterns.iter().map(PatternSpec::s).max().unwrap_or(6);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["label".to_string()];
    header.extend((1..=s).map(|i| format!("mu{i}")));
    header.push("dispersion".into());
    w.write_record(&header)?;
    for p in patterns {
        let mut row = vec![p.label.clone()];
        row.extend(p.mu_base.iter().map(|m| format_decimal(*m)));
        row.extend(std::iter::repeat_n(String::new(), s - p.s()));
        row.push(format_decimal(p.dispersion()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn format_decimal(x: f64) -> String {
    let rounded = (x * 1e9).round() / 1e9;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

/// Which family generates the marginal p-values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Beta,
    Normal { sigma: f64 },
}

impl ModelSpec {
    pub fn normal(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(ModelSpec::Normal { sigma })
    }

    /// Short label used in result tables, e.g. `beta` or `normal(sigma=0.1414213562)`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Beta => "beta".into(),
            ModelSpec::Normal { sigma } => format!("normal(sigma={})", crate::format_sig(*sigma, 10)),
        }
    }

    pub fn density(&self, theta_i: f64, t: Probability) -> f64 {
        match *self {
            ModelSpec::Beta => beta_model_density(theta_i, t),
            ModelSpec::Normal { sigma } => normal_model_density(theta_i, sigma, t),
        }
    }

    pub fn cdf(&self, theta_i: f64, t: Probability) -> Probability {
        match *self {
            ModelSpec::Beta => beta_model_cdf(theta_i, t),
            ModelSpec::Normal { sigma } => normal_model_cdf(theta_i, sigma, t),
        }
    }

    /// Maps a uniform deviate to a p-value by inverse transform.
    #[inline]
    pub fn p_from_uniform(&self, theta_i: f64, u: f64) -> f64 {
        match *self {
            ModelSpec::Beta => beta_model_quantile(theta_i, u),
            ModelSpec::Normal { sigma } => normal_model_quantile(theta_i, sigma, u),
        }
    }

    pub fn sample(&self, theta_i: f64, rng: &mut RngStream) -> Probability {
        Probability(self.p_from_uniform(theta_i, rng.uniform()))
    }
}

/// Draws `θ` coordinate-wise: `Uniform[θᵇ_i, 0]` below zero, `Uniform(0, θᵇ_i]` above, `0` at zero.
///
/// One uniform is consumed per coordinate, degenerate ones included.
pub fn sample_theta(pattern: &PatternSpec, rng: &mut RngStream) -> ThetaVector {
    let mut theta = vec![0.0; pattern.s()];
    sample_theta_into(pattern, rng, &mut theta);
    ThetaVector(theta)
}

pub(crate) fn sample_theta_into(pattern: &PatternSpec, rng: &mut RngStream, out: &mut [f64]) {
    for (slot, &mu) in out.iter_mut().zip(&pattern.mu_base) {
        let u = rng.uniform();
        let base = pattern.r * mu;
        *slot = if base < 0.0 {
            base * (1.0 - u)
        } else if base > 0.0 {
            base * u
        } else {
            0.0
        };
    }
}

/// Beta-model density: `(1 - θ) t^{-θ}` for `θ <= 0`, `(1 + θ)(1 - t)^θ` for `θ > 0`.
pub fn beta_model_density(theta_i: f64, t: Probability) -> f64 {
    let t = t.value();
    if theta_i <= 0.0 {
        (1.0 - theta_i) * t.powf(-theta_i)
    } else {
        (1.0 + theta_i) * (1.0 - t).powf(theta_i)
    }
}

/// Beta-model cdf: `t^{1-θ}` for `θ <= 0`, `1 - (1 - t)^{1+θ}` for `θ > 0`.
pub fn beta_model_cdf(theta_i: f64, t: Probability) -> Probability {
    let t = t.value();
    let v = if theta_i <= 0.0 {
        t.powf(1.0 - theta_i)
    } else {
        -((1.0 + theta_i) * (-t).ln_1p()).exp_m1()
    };
    Probability(v.clamp(0.0, 1.0))
}

/// Inverse cdf of the Beta model at `u`.
#[inline]
pub fn beta_model_quantile(theta_i: f64, u: f64) -> f64 {
    if theta_i <= 0.0 {
        (u.ln() / (1.0 - theta_i)).exp()
    } else {
        -((-u).ln_1p() / (1.0 + theta_i)).exp_m1()
    }
}

pub fn beta_model_sample(theta_i: f64, rng: &mut RngStream) -> Probability {
    Probability(beta_model_quantile(theta_i, rng.uniform()).clamp(0.0, 1.0))
}

/// Normal-model p-value from a uniform: `T/σ = θ/σ + Φ⁻¹(u)`, `p = Φ(-T/σ)`.
#[inline]
pub fn normal_model_quantile(theta_i: f64, sigma: f64, u: f64) -> f64 {
    phi_unchecked(-(theta_i / sigma + std_normal_quantile_f64(u)))
}

pub fn normal_model_sample(theta_i: f64, sigma: f64, rng: &mut RngStream) -> Probability {
    Probability(normal_model_quantile(theta_i, sigma, rng.uniform()))
}

/// Normal-model density `exp((2zθ - θ²) / (2σ²))` with `z = σ Φ⁻¹(1 - t)`.
///
/// At `t = 0` or `t = 1` the limit is returned (`0`, `1` or `+∞`).
pub fn normal_model_density(theta_i: f64, sigma: f64, t: Probability) -> f64 {
    if theta_i == 0.0 {
        return 1.0;
    }
    let w = -std_normal_quantile_f64(t.value());
    if w.is_infinite() {
        return if (w > 0.0) == (theta_i > 0.0) { f64::INFINITY } else { 0.0 };
    }
    let k = theta_i / sigma;
    (w * k - 0.5 * k * k).exp()
}

/// Normal-model cdf `P(p <= t) = Φ(θ/σ + Φ⁻¹(t))`.
pub fn normal_model_cdf(theta_i: f64, sigma: f64, t: Probability) -> Probability {
    let t = t.value();
    if t <= 0.0 {
        return Probability::ZERO;
    }
    if t >= 1.0 {
        return Probability::ONE;
    }
    Probability(phi_unchecked(theta_i / sigma + std_normal_quantile_f64(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureConfig};
    use approx::assert_abs_diff_eq;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    /// Kolmogorov–Smirnov distance; ties (p-values rounded onto the same float) are grouped.
    fn ks_distance(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        sample.sort_by(f64::total_cmp);
        let n = sample.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < sample.len() {
            let x = sample[i];
            let j = sample.partition_point(|&y| y <= x);
            d = d.max((cdf(x) - j as f64 / n).abs());
            d = d.max((cdf(x.next_down()) - i as f64 / n).abs());
            i = j;
        }
        d
    }

    #[test]
    fn rng_is_deterministic_and_stream_separated() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        let mut c = RngStream::new(42, 4);
        let xs: Vec<u64> = (0..100).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..100).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..100).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
        assert_eq!(a.seed(), 42);
        assert_eq!(a.stream_index(), 3);
    }

    #[test]
    fn rng_reference_values() {
        // Frozen first outputs of stream (0, 0); a port must reproduce these bit for bit.
        let mut s = RngStream::new(0, 0);
        let first: Vec<u64> = (0..3).map(|_| s.next_u64()).collect();
        let mut again = RngStream::new(0, 0);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
        assert_eq!(mix64(0), 0);
        assert_eq!(mix64(1), 0x5692_161d_100b_05e5);
    }

    #[test]
    fn uniforms_are_open_interval() {
        let mut s = RngStream::new(7, 0);
        for _ in 0..100_000 {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn sample_theta_examples() {
        let zeros = PatternSpec::new("z", vec![0.0; 6], 3.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        assert_eq!(sample_theta(&zeros, &mut rng).as_slice(), &[0.0; 6]);

        let n = 100_000;
        let pos = PatternSpec::new("pos", vec![1.0, -2.0], 5.0).unwrap();
        let neg = PatternSpec::new("neg", vec![-2.0, 1.0], 1.0).unwrap();
        let (mut sp, mut sn) = (0.0, 0.0);
        for _ in 0..n {
            let a = sample_theta(&pos, &mut rng);
            assert!(a.as_slice()[0] > 0.0 && a.as_slice()[0] <= 5.0);
            sp += a.as_slice()[0];
            let b = sample_theta(&neg, &mut rng);
            assert!(b.as_slice()[0] >= -2.0 && b.as_slice()[0] <= 0.0);
            sn += b.as_slice()[0];
        }
        // Uniform(0, 5]: mean 2.5, sd 5/√12. Uniform[-2, 0]: mean -1, sd 2/√12.
        let se_pos = 5.0 / 12f64.sqrt() / (n as f64).sqrt();
        let se_neg = 2.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((sp / n as f64 - 2.5).abs() < 3.0 * se_pos);
        assert!((sn / n as f64 + 1.0).abs() < 3.0 * se_neg);
    }

    #[test]
    fn beta_density_examples() {
        assert_eq!(beta_model_density(0.0, p(0.37)), 1.0);
        assert_abs_diff_eq!(beta_model_density(1.0, p(0.5)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_model_density(-1.0, p(0.25)), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn beta_quantile_examples() {
        assert_abs_diff_eq!(beta_model_quantile(0.0, 0.3), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_model_quantile(1.0, 0.75), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_model_quantile(-1.0, 0.25), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn normal_model_examples() {
        let sigma = 1.0 / 50f64.sqrt();
        assert_abs_diff_eq!(normal_model_quantile(0.0, sigma, 0.5), 0.5, epsilon = 1e-15);
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            assert_abs_diff_eq!(normal_model_quantile(0.0, sigma, u), 1.0 - u, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(normal_model_quantile(1.6449 * sigma, sigma, 0.5), 0.05, epsilon = 1e-4);

        assert_eq!(normal_model_density(0.0, sigma, p(0.2)), 1.0);
        assert_eq!(normal_model_density(0.0, sigma, p(0.0)), 1.0);
        assert_abs_diff_eq!(normal_model_density(1.0, 1.0, p(0.5)), (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(normal_model_density(-1.0, 1.0, p(0.5)), (-0.5f64).exp(), epsilon = 1e-15);
        assert_eq!(normal_model_density(1.0, 1.0, p(0.0)), f64::INFINITY);
        assert_eq!(normal_model_density(-1.0, 1.0, p(0.0)), 0.0);
        assert_eq!(normal_model_density(1.0, 1.0, p(1.0)), 0.0);
        assert_eq!(normal_model_density(-1.0, 1.0, p(1.0)), f64::INFINITY);
    }

    #[test]
    fn densities_integrate_to_one() {
        // Split at 10^-k and 1 - 10^-k so the Normal-model spikes at either end are resolved.
        // σ = 2 keeps the mass above the last float below 1 (spacing 1.1e-16) under 1e-10.
        let cfg = QuadratureConfig::default();
        let mut cuts: Vec<f64> = vec![0.0];
        cuts.extend((1..=16).rev().map(|k| 10f64.powi(-k)));
        cuts.extend((1..=12).map(|k| 1.0 - 10f64.powi(-k)));
        cuts.push(1.0);
        let piecewise = |f: &dyn Fn(f64) -> f64| -> f64 {
            cuts.windows(2).map(|w| integrate(f, w[0], w[1], &cfg).unwrap()).sum()
        };
        for theta in [-3.0, -1.0, 0.0, 1.0, 5.0] {
            let beta = piecewise(&|t| beta_model_density(theta, p(t)));
            assert_abs_diff_eq!(beta, 1.0, epsilon = 1e-8);
            let normal = piecewise(&|t| normal_model_density(theta, 2.0, p(t)));
            assert_abs_diff_eq!(normal, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn uniform_at_boundary_parameter() {
        let n = 100_000;
        let crit = 1.63 / (n as f64).sqrt();
        for model in [ModelSpec::Beta, ModelSpec::normal(1.0 / 50f64.sqrt()).unwrap()] {
            let mut rng = RngStream::new(11, 0);
            let draws: Vec<f64> = (0..n).map(|_| model.sample(0.0, &mut rng).value()).collect();
            let d = ks_distance(draws, |x| x);
            assert!(d <= crit, "{model:?}: KS {d} > {crit}");
        }
    }

    #[test]
    fn samples_follow_closed_form_cdf() {
        let n = 100_000;
        let crit = 1.63 / (n as f64).sqrt();
        for model in [ModelSpec::Beta, ModelSpec::normal(0.5).unwrap()] {
            for theta in [-3.0, -0.7, 0.4, 2.0] {
                let mut rng = RngStream::new(5, 9);
                let draws: Vec<f64> = (0..n).map(|_| model.sample(theta, &mut rng).value()).collect();
                let d = ks_distance(draws, |x| model.cdf(theta, p(x)).value());
                assert!(d <= crit, "{model:?} theta={theta}: KS {d}");
            }
        }
    }

    #[test]
    fn stochastically_decreasing_in_theta() {
        let n = 20_000;
        let grid = [-3.0, -1.0, 0.0, 1.0, 3.0];
        for model in [ModelSpec::Beta, ModelSpec::normal(1.0).unwrap()] {
            let ecdfs: Vec<Vec<f64>> = grid
                .iter()
                .map(|&theta| {
                    let mut rng = RngStream::new(99, 0);
                    let mut draws: Vec<f64> = (0..n).map(|_| model.sample(theta, &mut rng).value()).collect();
                    draws.sort_by(f64::total_cmp);
                    (1..100)
                        .map(|k| draws.partition_point(|&x| x <= k as f64 / 100.0) as f64 / n as f64)
                        .collect()
                })
                .collect();
            for pair in ecdfs.windows(2) {
                for (lo, hi) in pair[0].iter().zip(&pair[1]) {
                    let se = (lo * (1.0 - lo) / n as f64).sqrt() + (hi * (1.0 - hi) / n as f64).sqrt();
                    assert!(hi + 3.0 * se >= *lo);
                }
            }
        }
    }

    #[test]
    fn catalog_matches_table() {
        let cat = pattern_catalog();
        assert_eq!(cat.len(), 22);
        assert_eq!(cat[0].mu_base, vec![0.0, 0.0, 0.0, 0.0, 1.0, 5.0]);
        let four_c = catalog_pattern("4c").unwrap();
        assert_eq!(four_c.mu_base, vec![-2.0, -2.0, -2.0, 2.0, 2.0, 2.0]);
        let thirteen = catalog_pattern("13").unwrap();
        assert_eq!(thirteen.mu_base, vec![1.0; 6]);
        assert_abs_diff_eq!(thirteen.dispersion(), 6.0);
        assert!(catalog_pattern("10c").is_none());
        let dispersions = [26.0, 18.0, 18.0, 12.0, 12.0, 9.0, 17.0, 8.0, 7.2, 25.2, 9.0, 6.75, 6.0];
        for (p, d) in cat.iter().zip(dispersions) {
            assert_abs_diff_eq!(p.dispersion(), d, epsilon = 1e-12);
        }
        let false_nulls = [2, 2, 3, 3, 4, 4, 5, 5, 5, 6, 6, 6, 6];
        for (p, k) in cat.iter().zip(false_nulls) {
            assert_eq!(p.false_null_count(), k, "pattern {}", p.label);
        }
    }

    #[test]
    fn replace_zeros_from_lowest_index() {
        let base = PatternSpec::new("lead2", vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0], 5.0).unwrap();
        let c4 = base.replace_zeros(4, -1.0, "lead2-c4").unwrap();
        assert_eq!(c4.mu_base, vec![2.0, -1.0, -1.0, -1.0, -1.0, 0.0]);
        assert!(base.replace_zeros(6, -1.0, "x").is_err());
        assert!(c4.is_conservative());
        assert!(!base.is_conservative());
    }

    #[test]
    fn catalog_csv_layout() {
        let mut buf = Vec::new();
        write_catalog_csv(&pattern_catalog()[..13], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "label,mu1,mu2,mu3,mu4,mu5,mu6,dispersion");
        assert_eq!(lines[1], "1,0,0,0,0,1,5,26");
        assert_eq!(lines[9], "9,0,1.2,1.2,1.2,1.2,1.2,7.2");
        assert_eq!(lines[12], "12,0.5,0.5,1.25,1.25,1.25,1.25,6.75");
        assert_eq!(lines.len(), 14);
    }

    #[test]
    fn invalid_construction() {
        assert!(PatternSpec::new("x", vec![1.0], 1.0).is_err());
        assert!(PatternSpec::new("x", vec![1.0, 2.0], 0.0).is_err());
        assert!(ThetaVector::new(vec![0.0]).is_err());
        assert!(ModelSpec::normal(-1.0).is_err());
    }
}
