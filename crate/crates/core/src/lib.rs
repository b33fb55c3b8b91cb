//! Valid combined p-values and e-values for the partial conjunction hypothesis
//! `H_s^γ` ("at most γ − 1 of s null hypotheses are false"), plus a deterministic
//! Monte Carlo engine for comparing their power and conservativeness.
//!
//! ```
//! use replic::{partial_conjunction_p, CombinerId, Probability};
//!
//! let p: Vec<Probability> = [0.01, 0.2, 1.0, 1.0, 1.0, 1.0]
//!     .iter()
//!     .map(|&v| Probability::new(v).unwrap())
//!     .collect();
//! let combined = partial_conjunction_p(&p, 2, CombinerId::Minimum).unwrap();
//! assert!((combined.value() - 0.67232).abs() < 1e-12);
//! ```

pub mod combiners;
pub mod error;
pub mod evalues;
pub mod models;
pub mod numerics;
pub mod presets;
pub mod sim;

pub use combiners::{partial_conjunction_p, CombinerId};
pub use error::{Error, Result};
pub use evalues::{
    adjusted_e, bayes_factor, e_merge, e_to_p, null_expectation, partial_conjunction_e, BayesFactorSpec, EValue,
    MergeRule, NullKind, PriorSupport,
};
pub use models::{pattern_catalog, ModelSpec, PatternSpec, RngStream, ThetaVector};
pub use numerics::{Probability, QuadratureConfig};
pub use sim::{ExperimentConfig, Method, SimResult};

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
///
/// Plain decimal notation is used for magnitudes in `[1e-5, 1e10)`, scientific otherwise.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format has an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    if (-5..10).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        let rounded: f64 = sci.parse().expect("scientific format parses back");
        trim_zeros(format!("{:.*}", decimals, rounded))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exponent)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
