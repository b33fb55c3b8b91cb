//! Base combination functions `g` for the global null and the partial conjunction wrapper.
//!
//! A valid combined p-value for `H_s^γ` is obtained by applying a valid global-null
//! combiner to the `s − γ + 1` largest p-values `p_(γ), ..., p_(s)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{beta_1_n_cdf, chi2_sf, phi_unchecked, std_normal_quantile_f64, Probability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinerId {
    Fisher,
    Stouffer,
    Minimum,
    Bonferroni,
}

impl CombinerId {
    pub const ALL: [CombinerId; 4] = [
        CombinerId::Fisher,
        CombinerId::Stouffer,
        CombinerId::Minimum,
        CombinerId::Bonferroni,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CombinerId::Fisher => "fisher",
            CombinerId::Stouffer => "stouffer",
            CombinerId::Minimum => "minimum",
            CombinerId::Bonferroni => "bonferroni",
        }
    }

    /// Applies the base combiner `g` to all of `p`.
    pub fn combine(self, p: &[Probability]) -> Result<Probability> {
        match self {
            CombinerId::Fisher => fisher_g(p),
            CombinerId::Stouffer => stouffer_g(p),
            CombinerId::Minimum => minimum_g(p),
            CombinerId::Bonferroni => bonferroni_g(p),
        }
    }
}

impl fmt::Display for CombinerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CombinerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fisher" => Ok(CombinerId::Fisher),
            "stouffer" => Ok(CombinerId::Stouffer),
            "minimum" | "min" => Ok(CombinerId::Minimum),
            "bonferroni" => Ok(CombinerId::Bonferroni),
            other => Err(Error::InvalidParameter(format!("unknown combiner '{other}'"))),
        }
    }
}

fn non_empty(p: &[Probability]) -> Result<()> {
    if p.is_empty() {
        Err(Error::InvalidParameter("cannot combine an empty set of p-values".into()))
    } else {
        Ok(())
    }
}

/// Fisher: `1 − F_{χ²_{2k}}(−2 Σ ln p_i)`.
pub fn fisher_g(p: &[Probability]) -> Result<Probability> {
    non_empty(p)?;
    if p.iter().any(|x| x.value() == 0.0) {
        return Ok(Probability::ZERO);
    }
    let statistic: f64 = -2.0 * p.iter().map(|x| x.value().ln()).sum::<f64>();
    chi2_sf(statistic.max(0.0), 2 * p.len() as u32)
}

/// Stouffer: `1 − Φ(k^{-1/2} Σ Φ⁻¹(1 − p_i))`.
///
/// A p-value of 0 contributes `+∞` and one of 1 contributes `−∞`; both at once is an error.
pub fn stouffer_g(p: &[Probability]) -> Result<Probability> {
    non_empty(p)?;
    let has_zero = p.iter().any(|x| x.value() == 0.0);
    let has_one = p.iter().any(|x| x.value() == 1.0);
    match (has_zero, has_one) {
        (true, true) => {
            return Err(Error::Indeterminate(
                "Stouffer statistic is ∞ − ∞ when p-values of both 0 and 1 are present".into(),
            ))
        }
        (true, false) => return Ok(Probability::ZERO),
        (false, true) => return Ok(Probability::ONE),
        (false, false) => {}
    }
    // Φ⁻¹(1 − p) = −Φ⁻¹(p) keeps precision for small p.
    let z: f64 = -p.iter().map(|x| std_normal_quantile_f64(x.value())).sum::<f64>();
    Ok(Probability(phi_unchecked(-z / (p.len() as f64).sqrt())))
}

/// Minimum: `F_{Beta(1,k)}(min p_i) = 1 − (1 − min p)^k`.
pub fn minimum_g(p: &[Probability]) -> Result<Probability> {
    non_empty(p)?;
    Ok(beta_1_n_cdf(min_of(p), p.len() as u32))
}

/// Bonferroni: `min(1, k · min p_i)`.
pub fn bonferroni_g(p: &[Probability]) -> Result<Probability> {
    non_empty(p)?;
    Ok(Probability((p.len() as f64 * min_of(p).value()).min(1.0)))
}

fn min_of(p: &[Probability]) -> Probability {
    p.iter().copied().fold(Probability::ONE, |a, b| if b.value() < a.value() { b } else { a })
}

pub(crate) fn check_gamma(gamma: usize, s: usize) -> Result<()> {
    if gamma == 0 || gamma > s {
        Err(Error::GammaOutOfRange { gamma, s })
    } else {
        Ok(())
    }
}

/// Combined p-value for `H_s^γ`: `g(p_(γ), ..., p_(s))`.
pub fn partial_conjunction_p(p: &[Probability], gamma: usize, method: CombinerId) -> Result<Probability> {
    check_gamma(gamma, p.len())?;
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| a.value().total_cmp(&b.value()));
    method.combine(&sorted[gamma - 1..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::std_normal_cdf;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ps(v: &[f64]) -> Vec<Probability> {
        v.iter().map(|&x| Probability::new(x).unwrap()).collect()
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(fisher_g(&ps(&[1.0, 1.0])).unwrap().value(), 1.0);
        // survival of χ²₄ at 2 ln 4: e^{-ln 4}(1 + ln 4)
        let oracle = 0.25 * (1.0 + 4f64.ln());
        assert_abs_diff_eq!(fisher_g(&ps(&[0.5, 0.5])).unwrap().value(), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(fisher_g(&ps(&[0.5, 0.5])).unwrap().value(), 0.596574, epsilon = 1e-6);
        assert_eq!(fisher_g(&ps(&[0.0, 0.9])).unwrap().value(), 0.0);
    }

    #[test]
    fn stouffer_examples() {
        assert_abs_diff_eq!(stouffer_g(&ps(&[0.3])).unwrap().value(), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(stouffer_g(&ps(&[0.5, 0.5])).unwrap().value(), 0.5, epsilon = 1e-15);
        let z = 2.0 * 1.281_551_565_544_600_5 / 2f64.sqrt();
        let oracle = 1.0 - std_normal_cdf(z).unwrap().value();
        assert_abs_diff_eq!(stouffer_g(&ps(&[0.1, 0.1])).unwrap().value(), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(stouffer_g(&ps(&[0.1, 0.1])).unwrap().value(), 0.03497, epsilon = 1e-4);
        assert_eq!(stouffer_g(&ps(&[0.0, 0.4])).unwrap().value(), 0.0);
        assert_eq!(stouffer_g(&ps(&[1.0, 0.4])).unwrap().value(), 1.0);
        assert!(matches!(stouffer_g(&ps(&[0.0, 1.0])), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn minimum_and_bonferroni_examples() {
        assert_eq!(minimum_g(&ps(&[0.0, 0.5])).unwrap().value(), 0.0);
        assert_abs_diff_eq!(
            minimum_g(&ps(&[0.1, 0.5, 0.9, 0.2, 0.3])).unwrap().value(),
            0.40951,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(minimum_g(&ps(&[0.7])).unwrap().value(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(bonferroni_g(&ps(&[0.1, 0.5, 0.9, 0.2, 0.3])).unwrap().value(), 0.5, epsilon = 1e-15);
        assert_eq!(bonferroni_g(&ps(&[0.3, 0.5, 0.9, 0.4, 0.3])).unwrap().value(), 1.0);
        assert_abs_diff_eq!(bonferroni_g(&ps(&[0.2])).unwrap().value(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn empty_input_is_rejected() {
        for id in CombinerId::ALL {
            assert!(id.combine(&[]).is_err());
        }
    }

    #[test]
    fn partial_conjunction_examples() {
        let p = ps(&[0.01, 0.2, 1.0, 1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(
            partial_conjunction_p(&p, 2, CombinerId::Minimum).unwrap().value(),
            1.0 - 0.8f64.powi(5),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(partial_conjunction_p(&p, 2, CombinerId::Minimum).unwrap().value(), 0.67232, epsilon = 1e-12);
        assert_eq!(partial_conjunction_p(&p, 2, CombinerId::Bonferroni).unwrap().value(), 1.0);
        let q = ps(&[0.3, 0.02, 0.5, 0.11]);
        for id in CombinerId::ALL {
            let (a, b) = (partial_conjunction_p(&q, 1, id).unwrap(), id.combine(&q).unwrap());
            assert_abs_diff_eq!(a.value(), b.value(), epsilon = 1e-15);
        }
        assert!(matches!(
            partial_conjunction_p(&q, 0, CombinerId::Fisher),
            Err(Error::GammaOutOfRange { gamma: 0, s: 4 })
        ));
        assert!(matches!(
            partial_conjunction_p(&q, 5, CombinerId::Fisher),
            Err(Error::GammaOutOfRange { gamma: 5, s: 4 })
        ));
    }

    #[test]
    fn single_input_identity() {
        for i in 0..=1000 {
            let x = ps(&[i as f64 / 1000.0]);
            for id in [CombinerId::Fisher, CombinerId::Stouffer, CombinerId::Minimum] {
                assert_abs_diff_eq!(id.combine(&x).unwrap().value(), x[0].value(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for id in CombinerId::ALL {
            assert_eq!(id.name().parse::<CombinerId>().unwrap(), id);
        }
        assert!("pearson".parse::<CombinerId>().is_err());
    }

    fn interior() -> impl Strategy<Value = f64> {
        // Open interval keeps Stouffer away from its ∞ − ∞ case.
        1e-12..(1.0 - 1e-12)
    }

    proptest! {
        #[test]
        fn monotone_in_each_coordinate(
            v in prop::collection::vec(interior(), 2..8),
            idx in 0usize..8,
            bump in 0.0f64..0.5,
            gamma in 1usize..8,
        ) {
            let idx = idx % v.len();
            let gamma = 1 + (gamma - 1) % v.len();
            let mut w = v.clone();
            w[idx] = (w[idx] + bump).min(1.0 - 1e-12);
            for id in CombinerId::ALL {
                let a = partial_conjunction_p(&ps(&v), gamma, id).unwrap().value();
                let b = partial_conjunction_p(&ps(&w), gamma, id).unwrap().value();
                prop_assert!(b >= a - 1e-12, "{id}: {a} -> {b}");
            }
        }

        #[test]
        fn permutation_invariant(v in prop::collection::vec(interior(), 2..8), seed in any::<u64>(), gamma in 1usize..8) {
            let gamma = 1 + (gamma - 1) % v.len();
            let mut w = v.clone();
            // deterministic shuffle
            let mut state = seed;
            for i in (1..w.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                w.swap(i, j);
            }
            for id in CombinerId::ALL {
                let a = partial_conjunction_p(&ps(&v), gamma, id).unwrap();
                let b = partial_conjunction_p(&ps(&w), gamma, id).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
