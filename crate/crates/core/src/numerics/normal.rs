use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

use super::Probability;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal cdf `Φ(x)`.
///
/// Evaluated as `erfc(-x/√2)/2` so that the lower tail keeps full relative precision.
pub fn std_normal_cdf(x: f64) -> Result<Probability> {
    if x.is_nan() {
        return Err(Error::Domain("standard normal cdf of NaN".into()));
    }
    Ok(Probability(phi_unchecked(x)))
}

/// Standard normal survival function `1 - Φ(x) = Φ(-x)`.
pub fn std_normal_sf(x: f64) -> Result<Probability> {
    std_normal_cdf(-x)
}

#[inline]
pub(crate) fn phi_unchecked(x: f64) -> f64 {
    (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).min(1.0)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn ln_std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x > 0.0 {
        return (-phi_unchecked(-x)).ln_1p();
    }
    if x > -37.0 {
        return phi_unchecked(x).ln();
    }
    // Φ(x) = φ(x) R(-x) with the Mills ratio R from its continued fraction.
    -0.5 * x * x - LN_SQRT_2PI + mills_ratio(-x).ln()
}

/// Mills ratio `(1 - Φ(t)) / φ(t)` for large positive `t`, by backward recurrence.
fn mills_ratio(t: f64) -> f64 {
    let mut acc = t;
    for k in (1..=60).rev() {
        acc = t + k as f64 / acc;
    }
    1.0 / acc
}

/// `ln(Φ(hi) - Φ(lo))` for `lo <= hi`, computed on whichever side of zero keeps precision.
pub fn ln_std_normal_interval(lo: f64, hi: f64) -> f64 {
    if lo.is_nan() || hi.is_nan() {
        return f64::NAN;
    }
    if lo >= hi {
        return f64::NEG_INFINITY;
    }
    if hi <= 0.0 {
        let upper = ln_std_normal_cdf(hi);
        let lower = ln_std_normal_cdf(lo);
        upper + (-(lower - upper).exp_m1()).ln()
    } else if lo >= 0.0 {
        ln_std_normal_interval(-hi, -lo)
    } else {
        (-(phi_unchecked(lo) + phi_unchecked(-hi))).ln_1p()
    }
}

// Wichura (1988), algorithm AS 241, PPND16.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_545_925,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Standard normal quantile `Φ⁻¹(u)`; `Φ⁻¹(0) = -∞` and `Φ⁻¹(1) = +∞`.
pub fn std_normal_quantile(u: Probability) -> f64 {
    std_normal_quantile_f64(u.value())
}

/// Unchecked variant of [`std_normal_quantile`] for hot loops. NaN in, NaN out.
pub fn std_normal_quantile_f64(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let q = u - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { u } else { 1.0 - u };
    let mut r = (-tail.ln()).sqrt();
    let v = if r <= 5.0 {
        r -= 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        r -= 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Φ by direct Simpson integration of the density from 0, for |x| <= 6.
    fn phi_by_simpson(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let mut s = std_normal_pdf(0.0) + std_normal_pdf(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * std_normal_pdf(i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0).unwrap().value(), 0.5);
        assert_eq!(std_normal_cdf(f64::INFINITY).unwrap().value(), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY).unwrap().value(), 0.0);
        assert_abs_diff_eq!(std_normal_cdf(1.6449).unwrap().value(), 0.95, epsilon = 1e-4);
        assert!(std_normal_cdf(f64::NAN).is_err());
    }

    #[test]
    fn cdf_matches_simpson_oracle() {
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            assert_abs_diff_eq!(std_normal_cdf(x).unwrap().value(), phi_by_simpson(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn cdf_high_precision_values() {
        // 50-digit references
        let cases = [
            (-1.0, 0.158_655_253_931_457_05),
            (-3.0, 1.349_898_031_630_094_5e-3),
            (-10.0, 7.619_853_024_160_526_7e-24),
            (-30.0, 4.906_713_927_148_187_1e-198),
        ];
        for (x, want) in cases {
            let got = std_normal_cdf(x).unwrap().value();
            assert!(((got - want) / want).abs() < 1e-13, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(std_normal_quantile(p(0.5)), 0.0);
        assert_eq!(std_normal_quantile(p(1.0)), f64::INFINITY);
        assert_eq!(std_normal_quantile(p(0.0)), f64::NEG_INFINITY);
        // Newton iteration on Φ(x) = 0.9 as an independent oracle.
        let mut x: f64 = 1.0;
        for _ in 0..50 {
            x -= (std_normal_cdf(x).unwrap().value() - 0.9) / std_normal_pdf(x);
        }
        assert_abs_diff_eq!(std_normal_quantile(p(0.9)), x, epsilon = 1e-12);
        assert_abs_diff_eq!(std_normal_quantile(p(0.9)), 1.281552, epsilon = 1e-6);
    }

    #[test]
    fn quantile_round_trip_in_probability() {
        let mut u = 1e-300;
        while u < 0.5 {
            let back = std_normal_cdf(std_normal_quantile(p(u))).unwrap().value();
            assert!((back - u).abs() <= 1e-12, "u={u}");
            assert!((back - u).abs() <= 1e-11 * u, "relative u={u}");
            u *= 3.7;
        }
        for i in 1..10_000 {
            let u = i as f64 / 10_000.0;
            let back = std_normal_cdf(std_normal_quantile(p(u))).unwrap().value();
            assert!((back - u).abs() <= 1e-12, "u={u}");
        }
        let u = 1.0 - 1e-15;
        let back = std_normal_cdf(std_normal_quantile(p(u))).unwrap().value();
        assert!((back - u).abs() <= 1e-12);
    }

    #[test]
    fn quantile_of_cdf_round_trip() {
        // Above ~5.8 the value Φ(x) sits within a few ulp of 1 and cannot carry x to 1e-8,
        // so the upper half is checked through the survival function instead.
        for i in -8000..=5500 {
            let x = i as f64 / 1000.0;
            let back = std_normal_quantile(std_normal_cdf(x).unwrap());
            assert!((back - x).abs() <= 1e-8, "x={x} back={back}");
        }
        for i in 0..=8000 {
            let x = i as f64 / 1000.0;
            let back = -std_normal_quantile(std_normal_sf(x).unwrap());
            assert!((back - x).abs() <= 1e-8, "x={x} back={back}");
        }
    }

    #[test]
    fn cdf_is_monotone() {
        let mut prev = 0.0;
        for i in -5000..=5000 {
            let v = std_normal_cdf(i as f64 * 0.002).unwrap().value();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn log_cdf_is_continuous_across_branches() {
        let left = ln_std_normal_cdf(-37.0 + 1e-9);
        let right = ln_std_normal_cdf(-37.0 - 1e-9);
        assert!((left - right).abs() < 1e-6);
        assert_abs_diff_eq!(ln_std_normal_cdf(0.0), 0.5_f64.ln(), epsilon = 1e-15);
        // ln Φ(-40) from a 50-digit reference
        assert_abs_diff_eq!(ln_std_normal_cdf(-40.0), -804.608_442_013_754, epsilon = 1e-9);
        assert!(ln_std_normal_cdf(10.0) < 0.0 && ln_std_normal_cdf(10.0) > -1e-22);
    }

    #[test]
    fn log_interval_matches_direct_difference() {
        let pairs = [(-1.0, 2.0), (-3.0, -1.0), (0.5, 4.0), (-0.2, 0.1), (f64::NEG_INFINITY, 0.0)];
        for (lo, hi) in pairs {
            let direct = (phi_unchecked(hi) - phi_unchecked(lo)).ln();
            assert_abs_diff_eq!(ln_std_normal_interval(lo, hi), direct, epsilon = 1e-12);
        }
        // deep tails: both endpoints far in the lower tail
        let v = ln_std_normal_interval(-50.0, -45.0);
        assert_abs_diff_eq!(v, ln_std_normal_cdf(-45.0), epsilon = 1e-12);
        assert_eq!(ln_std_normal_interval(1.0, 1.0), f64::NEG_INFINITY);
    }
}
