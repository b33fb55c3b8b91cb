//! Special functions and quadrature used by the combiners and Bayes factors.
//!
//! Everything here is a pure function of its arguments. Accuracy targets are
//! absolute unless stated otherwise:
//!
//! | function              | target                                   |
//! |-----------------------|------------------------------------------|
//! | [`std_normal_cdf`]    | 1e-12 absolute, ~1 ulp relative in tails |
//! | [`std_normal_quantile`] | round trip within 1e-12 in probability |
//! | [`chi2_cdf`]          | 1e-12 absolute, even degrees of freedom  |
//! | [`beta_1_n_cdf`]      | a few ulp, stable for small `t`          |

mod normal;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use normal::{
    ln_std_normal_cdf, ln_std_normal_interval, std_normal_cdf, std_normal_pdf,
    std_normal_quantile, std_normal_quantile_f64, std_normal_sf,
};
pub(crate) use normal::phi_unchecked;
pub use quadrature::{integrate, integrate_with_estimate, QuadratureConfig, QuadratureEstimate};

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(pub(crate) f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::NotAProbability { value })
        }
    }

    /// Clamps into `[0, 1]`. NaN is rejected.
    pub fn saturating(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::Domain("NaN is not a probability".into()));
        }
        Ok(Probability(value.clamp(0.0, 1.0)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - self`.
    #[inline]
    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Cdf of the chi-square distribution with an even number of degrees of freedom.
///
/// For `dof = 2k` this is the Erlang cdf `1 - exp(-x/2) sum_{j<k} (x/2)^j / j!`.
/// The lower tail is summed directly (series in `x/2`) when `x/2 < k`, otherwise the
/// survival sum is used, so neither branch loses digits to cancellation.
pub fn chi2_cdf(x: f64, dof: u32) -> Result<Probability> {
    let k = even_dof_shape(dof)?;
    let h = half_statistic(x)?;
    if h.is_infinite() {
        return Ok(Probability::ONE);
    }
    if h < k as f64 {
        Ok(Probability(erlang_lower(h, k).min(1.0)))
    } else {
        Ok(Probability((1.0 - erlang_upper(h, k)).clamp(0.0, 1.0)))
    }
}

/// Survival function `1 - chi2_cdf(x, dof)`, accurate in the upper tail.
pub fn chi2_sf(x: f64, dof: u32) -> Result<Probability> {
    let k = even_dof_shape(dof)?;
    let h = half_statistic(x)?;
    if h.is_infinite() {
        return Ok(Probability::ZERO);
    }
    if h < k as f64 {
        Ok(Probability((1.0 - erlang_lower(h, k)).clamp(0.0, 1.0)))
    } else {
        Ok(Probability(erlang_upper(h, k).min(1.0)))
    }
}

fn even_dof_shape(dof: u32) -> Result<u32> {
    if dof == 0 || !dof.is_multiple_of(2) {
        return Err(Error::UnsupportedParameter(format!(
            "chi-square cdf is only implemented for even positive degrees of freedom, got {dof}"
        )));
    }
    Ok(dof / 2)
}

fn half_statistic(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("chi-square statistic is NaN".into()));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("chi-square statistic must be >= 0, got {x}")));
    }
    Ok(0.5 * x)
}

/// `exp(-h) sum_{j<k} h^j / j!`, summed in log space so that large `h` underflows gracefully.
fn erlang_upper(h: f64, k: u32) -> f64 {
    if h == 0.0 {
        return 1.0;
    }
    if k == 1 {
        return (-h).exp();
    }
    let ln_h = h.ln();
    // The largest term has index k - 1 whenever h >= k - 1.
    let mut ln_terms = Vec::with_capacity(k as usize);
    let mut ln_fact = 0.0;
    for j in 0..k {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        ln_terms.push(j as f64 * ln_h - ln_fact - h);
    }
    let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ln_terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp()
}

/// `exp(-h) sum_{j>=k} h^j / j!` via the convergent series of the regularized lower gamma.
fn erlang_lower(h: f64, k: u32) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    if k == 1 {
        return -(-h).exp_m1();
    }
    // P(k, h) = h^k e^{-h} / k! * sum_{n>=0} h^n / ((k+1)...(k+n))
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    loop {
        term *= h / (k as f64 + n);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        n += 1.0;
    }
    let ln_kfact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    (k as f64 * h.ln() - h - ln_kfact + sum.ln()).exp()
}

/// Cdf of `Beta(1, n)` at `t`, i.e. `1 - (1 - t)^n`.
pub fn beta_1_n_cdf(t: Probability, n: u32) -> Probability {
    if n == 0 {
        return Probability::ONE;
    }
    let t = t.value();
    if t >= 1.0 {
        return Probability::ONE;
    }
    let v = -(n as f64 * (-t).ln_1p()).exp_m1();
    Probability(v.clamp(0.0, 1.0))
}
