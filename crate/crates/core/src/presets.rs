//! Named experiment designs.
//!
//! | name          | experiment   | model                 | r    | γ     | patterns                 |
//! |---------------|--------------|-----------------------|------|-------|--------------------------|
//! | `fig1`        | power        | Beta                  | 1    | 2     | 1–13, 1c–9c              |
//! | `fig2`        | power        | Beta                  | 5    | 2     | 1–13, 1c–9c              |
//! | `fig3`        | power        | Normal, σ = 1/√50     | 0.5σ | 2     | 1–13, 1c–9c              |
//! | `fig4`        | power        | Normal, σ = 1/√50     | 1.5σ | 2     | 1–13, 1c–9c              |
//! | `fig5`        | γ sweep      | Beta                  | 10   | 1–5   | 7, 7c                    |
//! | `fig6`        | γ sweep      | Normal, σ = 1/√50     | 3σ   | 1–5   | 7, 7c                    |
//! | `fig7`        | ecdf curves  | Beta                  | 5    | 2     | (2,−1,0,0,0,0), (2,−1,−1,−1,−1,0) |
//! | `null-beta`   | null ecdf    | Beta                  | 5    | 2     | zeros, (2,0,…,0) + 0…k conservative |
//! | `null-normal` | null ecdf    | Normal, σ = 1/√50     | 1.5σ | 2     | zeros, (2,0,…,0) + 0…k conservative |
//!
//! The ecdf-curve patterns are the base `(2,0,…,0)` with one and four zeros replaced by −1.
//! Full-scale runs use 100 000 repetitions (10 000 for `fig7`); the desk default is 10 000.

use serde::Serialize;

use crate::models::{pattern_catalog, ModelSpec, PatternSpec};
use crate::sim::Method;

/// Default standard deviation of the Normal model.
pub const DEFAULT_SIGMA: f64 = 0.141_421_356_237_309_5;

/// Repetitions used when neither the preset's full scale nor `--reps` is requested.
pub const DESK_REPETITIONS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    Power,
    GammaSweep,
    NullEcdf,
    EcdfCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub model: ModelSpec,
    pub r: f64,
    /// Patterns already scaled by `r`. For null-ecdf presets these are the bases.
    pub patterns: Vec<PatternSpec>,
    pub gammas: Vec<usize>,
    pub methods: Vec<Method>,
    /// Conservative replacement counts (null-ecdf presets only; capped per base at its zero count).
    pub conservative_counts: Vec<usize>,
    /// Ecdf grid (curve presets only).
    pub grid: Vec<f64>,
    pub full_repetitions: u64,
}

pub const PRESET_NAMES: [&str; 9] =
    ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "null-beta", "null-normal"];

fn display_methods() -> Vec<Method> {
    vec![Method::Fisher, Method::Stouffer, Method::Minimum, Method::EProduct]
}

fn scaled(patterns: Vec<PatternSpec>, r: f64) -> Vec<PatternSpec> {
    patterns.into_iter().map(|p| PatternSpec { r, ..p }).collect()
}

fn catalog_subset(labels: &[&str]) -> Vec<PatternSpec> {
    let catalog = pattern_catalog();
    labels
        .iter()
        .map(|l| catalog.iter().find(|p| p.label == *l).expect("label is in the catalog").clone())
        .collect()
}

/// The two null-ecdf bases: all zeros, and one false null of strength 2.
pub fn null_bases(r: f64) -> Vec<PatternSpec> {
    vec![
        PatternSpec { label: "zeros".into(), mu_base: vec![0.0; 6], r },
        PatternSpec { label: "lead2".into(), mu_base: vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0], r },
    ]
}

fn power_preset(name: &'static str, model: ModelSpec, r: f64) -> Preset {
    Preset {
        name,
        kind: PresetKind::Power,
        model,
        r,
        patterns: scaled(pattern_catalog(), r),
        gammas: vec![2],
        methods: display_methods(),
        conservative_counts: vec![],
        grid: vec![],
        full_repetitions: 100_000,
    }
}

fn sweep_preset(name: &'static str, model: ModelSpec, r: f64) -> Preset {
    Preset {
        name,
        kind: PresetKind::GammaSweep,
        model,
        r,
        patterns: scaled(catalog_subset(&["7", "7c"]), r),
        gammas: (1..=5).collect(),
        methods: display_methods(),
        conservative_counts: vec![],
        grid: vec![],
        full_repetitions: 100_000,
    }
}

fn null_preset(name: &'static str, model: ModelSpec, r: f64) -> Preset {
    Preset {
        name,
        kind: PresetKind::NullEcdf,
        model,
        r,
        patterns: null_bases(r),
        gammas: vec![2],
        methods: display_methods(),
        conservative_counts: (0..=6).collect(),
        grid: vec![],
        full_repetitions: 100_000,
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let normal = ModelSpec::Normal { sigma: DEFAULT_SIGMA };
    let p = match name {
        "fig1" => power_preset("fig1", ModelSpec::Beta, 1.0),
        "fig2" => power_preset("fig2", ModelSpec::Beta, 5.0),
        "fig3" => power_preset("fig3", normal, 0.5 * DEFAULT_SIGMA),
        "fig4" => power_preset("fig4", normal, 1.5 * DEFAULT_SIGMA),
        "fig5" => sweep_preset("fig5", ModelSpec::Beta, 10.0),
        "fig6" => sweep_preset("fig6", normal, 3.0 * DEFAULT_SIGMA),
        "fig7" => {
            let base = &null_bases(5.0)[1];
            let patterns = [1, 4]
                .iter()
                .map(|&k| base.replace_zeros(k, -1.0, format!("lead2+{k}")).expect("base has five zeros"))
                .collect();
            Preset {
                name: "fig7",
                kind: PresetKind::EcdfCurve,
                model: ModelSpec::Beta,
                r: 5.0,
                patterns,
                gammas: vec![2],
                methods: vec![Method::Fisher, Method::Stouffer, Method::Minimum],
                conservative_counts: vec![],
                grid: (1..=100).map(|i| i as f64 / 100.0).collect(),
                full_repetitions: 10_000,
            }
        }
        "null-beta" => null_preset("null-beta", ModelSpec::Beta, 5.0),
        "null-normal" => null_preset("null-normal", normal, 1.5 * DEFAULT_SIGMA),
        _ => return None,
    };
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            assert!(p.patterns.iter().all(|q| q.r == p.r));
        }
        assert!(preset("fig8").is_none());
    }

    #[test]
    fn preset_parameters() {
        assert_eq!(preset("fig1").unwrap().patterns.len(), 22);
        assert!((DEFAULT_SIGMA - 1.0 / 50f64.sqrt()).abs() < 1e-16);
        let fig7 = preset("fig7").unwrap();
        assert_eq!(fig7.patterns[0].mu_base, vec![2.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(fig7.patterns[1].mu_base, vec![2.0, -1.0, -1.0, -1.0, -1.0, 0.0]);
        let fig6 = preset("fig6").unwrap();
        assert_eq!(fig6.patterns[1].mu_base, vec![-2.0, 0.5, 0.5, 0.5, 0.5, 4.0]);
        assert_eq!(fig6.gammas, vec![1, 2, 3, 4, 5]);
    }
}
