use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use replic::models::catalog_pattern;
use replic::presets::{preset, null_bases, PresetKind, DEFAULT_SIGMA, DESK_REPETITIONS, PRESET_NAMES};
use replic::sim::{gamma_sweep, run_ecdf_curve, run_null_ecdf, run_power, ResultTable};
use replic::{
    e_to_p, format_sig, partial_conjunction_e, partial_conjunction_p, pattern_catalog, CombinerId, EValue,
    ExperimentConfig, MergeRule, Method, ModelSpec, PatternSpec, Probability,
};

use crate::args::{ExperimentArgs, Format};
use crate::error::{usage, CliError};
use crate::svg::{line_chart, Series};

pub const OUT_DIR_ENV: &str = "REPLIC_OUT_DIR";

type Result<T> = std::result::Result<T, CliError>;

fn parse_list<T>(list: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    list.split(',')
        .map(str::trim)
        .map(|tok| parse(tok).ok_or_else(|| usage(format!("invalid {what} '{tok}'"))))
        .collect()
}

fn parse_f64(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `3`, `1,2,4` or `0..5` (inclusive).
fn parse_counts(spec: &str, what: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = spec.split_once("..") {
        let bound = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("invalid {what} '{t}'")));
        let (lo, hi) = (bound(a)?, bound(b.trim_start_matches('='))?);
        if lo > hi {
            return Err(usage(format!("invalid {what} range '{spec}'")));
        }
        return Ok((lo..=hi).collect());
    }
    parse_list(spec, what, |t| t.parse().ok())
}

pub fn combine(p: &str, gamma: usize, method: &str) -> Result<String> {
    let id: CombinerId = method.parse().map_err(|_| usage(format!("unknown method '{method}' (fisher, stouffer, minimum, bonferroni)")))?;
    let p = parse_list(p, "p-value", |t| parse_f64(t).and_then(|v| Probability::new(v).ok()))?;
    check_gamma(gamma, p.len())?;
    if p.len() < 2 {
        return Err(usage("at least two p-values are required"));
    }
    Ok(format_sig(partial_conjunction_p(&p, gamma, id)?.value(), 10))
}

pub fn combine_e(e: &str, gamma: usize, rule: &str) -> Result<String> {
    let rule: MergeRule = rule.parse().map_err(|_| usage(format!("unknown rule '{rule}' (product, mean, harmonic)")))?;
    let e = parse_list(e, "e-value", |t| t.parse::<f64>().ok().and_then(|v| EValue::new(v).ok()))?;
    check_gamma(gamma, e.len())?;
    if e.len() < 2 {
        return Err(usage("at least two e-values are required"));
    }
    let merged = partial_conjunction_e(&e, gamma, rule)?;
    Ok(format!("e {}\np {}", format_sig(merged.value(), 10), format_sig(e_to_p(merged).value(), 10)))
}

fn check_gamma(gamma: usize, s: usize) -> Result<()> {
    if gamma == 0 || gamma > s {
        return Err(usage(format!("gamma must satisfy 1 <= gamma <= {s}, got {gamma}")));
    }
    Ok(())
}

pub fn patterns(conservative: bool, out: Option<&Path>) -> Result<Vec<String>> {
    let selected: Vec<PatternSpec> = pattern_catalog()
        .into_iter()
        .filter(|p| p.label.ends_with('c') == conservative)
        .collect();
    let mut buf = Vec::new();
    replic::models::write_catalog_csv(&selected, &mut buf)?;
    match out {
        None => Ok(vec![String::from_utf8(buf).expect("csv output is utf-8")]),
        Some(dir) => {
            let name = if conservative { "patterns-conservative.csv" } else { "patterns.csv" };
            let path = write_output(dir, name, &buf)?;
            Ok(vec![format!("wrote {}", path.display())])
        }
    }
}

/// An experiment design after preset expansion and flag parsing.
#[derive(Debug, Clone)]
struct Design {
    kind: PresetKind,
    name: String,
    model: ModelSpec,
    r: f64,
    patterns: Vec<PatternSpec>,
    gammas: Vec<usize>,
    methods: Vec<Method>,
    counts: Vec<usize>,
    grid: Vec<f64>,
    alpha: f64,
    reps: u64,
    seed: u64,
}

impl Design {
    fn header(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut h = format!(
            "# replic {} design={} model={} r={} gamma={} alpha={} reps={} seed={} methods={}",
            command_name(self.kind),
            self.name,
            self.model.label(),
            self.r,
            join(self.gammas.iter().map(|g| g.to_string()).collect()),
            self.alpha,
            self.reps,
            self.seed,
            join(self.methods.iter().map(|m| m.name().to_string()).collect()),
        );
        let patterns = join(self.patterns.iter().map(|p| p.label.clone()).collect());
        match self.kind {
            PresetKind::NullEcdf => {
                h += &format!(" bases={patterns} conservative={}", join(self.counts.iter().map(|c| c.to_string()).collect()));
            }
            PresetKind::EcdfCurve => {
                h += &format!(
                    " patterns={patterns} grid={}..{} ({} points)",
                    self.grid[0],
                    self.grid[self.grid.len() - 1],
                    self.grid.len()
                );
            }
            _ => h += &format!(" patterns={patterns}"),
        }
        h
    }

    fn config(&self, pattern: &PatternSpec, gamma: usize, workers: Option<usize>) -> Result<ExperimentConfig> {
        let alpha = Probability::new(self.alpha).map_err(|_| usage(format!("invalid alpha '{}'", self.alpha)))?;
        let cfg = ExperimentConfig::new(self.model, pattern.clone(), gamma, self.methods.clone())
            .with_alpha(alpha)
            .with_repetitions(self.reps)
            .with_seed(self.seed)
            .with_workers(workers);
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn command_name(kind: PresetKind) -> &'static str {
    match kind {
        PresetKind::Power => "power",
        PresetKind::GammaSweep => "gamma-sweep",
        PresetKind::NullEcdf => "null-ecdf",
        PresetKind::EcdfCurve => "ecdf-curve",
    }
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    parse_list(list, "method", |t| t.parse().ok())
}

fn parse_model(args: &ExperimentArgs) -> Result<ModelSpec> {
    let name = args.model.as_deref().ok_or_else(|| usage("--model is required without --preset"))?;
    match name {
        "beta" => {
            if args.sigma.is_some() {
                return Err(usage("--sigma only applies to --model normal"));
            }
            Ok(ModelSpec::Beta)
        }
        "normal" => {
            let sigma = args.sigma.unwrap_or(DEFAULT_SIGMA);
            ModelSpec::normal(sigma).map_err(|_| usage(format!("invalid sigma '{sigma}'")))
        }
        other => Err(usage(format!("unknown model '{other}' (beta, normal)"))),
    }
}

fn parse_r(tok: &str, model: ModelSpec) -> Result<f64> {
    let bad = || usage(format!("invalid r '{tok}'"));
    let r = match (tok.strip_suffix("sigma"), model) {
        (Some(k), ModelSpec::Normal { sigma }) => parse_f64(k).ok_or_else(bad)? * sigma,
        (Some(_), ModelSpec::Beta) => return Err(usage(format!("r '{tok}' in sigma units needs --model normal"))),
        (None, _) => parse_f64(tok).ok_or_else(bad)?,
    };
    if r > 0.0 {
        Ok(r)
    } else {
        Err(bad())
    }
}

fn parse_pattern(tok: &str, r: f64) -> Result<PatternSpec> {
    if let Some(p) = catalog_pattern(tok) {
        return Ok(p.with_r(r)?);
    }
    if tok.contains(',') {
        let mu = parse_list(tok, "pattern entry", parse_f64)?;
        return PatternSpec::new("custom", mu, r).map_err(|e| usage(format!("pattern '{tok}': {e}")));
    }
    Err(usage(format!("unknown pattern '{tok}' (catalog label or comma-separated vector)")))
}

fn parse_base(tok: &str, r: f64) -> Result<PatternSpec> {
    if let Some(b) = null_bases(r).into_iter().find(|b| b.label == tok) {
        return Ok(b);
    }
    let p = parse_pattern(tok, r)?;
    if p.false_null_count() > 1 || p.mu_base.iter().any(|&m| m < 0.0) {
        return Err(usage(format!("base '{tok}' must have at most one positive entry and no negative entries")));
    }
    Ok(p)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = if parts.len() == 3 {
        let v = parse_list(&parts.join(","), "grid bound", parse_f64)?;
        let (start, step, end) = (v[0], v[1], v[2]);
        if !(step > 0.0 && start <= end) {
            return Err(usage(format!("invalid grid '{spec}'")));
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| ((start + step * i as f64) * 1e12).round() / 1e12).collect()
    } else {
        parse_list(spec, "grid point", parse_f64)?
    };
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(format!("grid '{spec}' must be increasing values in [0, 1]")));
    }
    Ok(grid)
}

fn resolve(kind: PresetKind, args: &ExperimentArgs) -> Result<Design> {
    if let Some(name) = &args.preset {
        let p = preset(name)
            .ok_or_else(|| usage(format!("unknown preset '{name}'; available: {}", PRESET_NAMES.join(", "))))?;
        if p.kind != kind {
            return Err(usage(format!("preset '{name}' is a {} design; run it with `replic {}`", command_name(p.kind), command_name(p.kind))));
        }
        let reps = match (args.reps, args.full) {
            (Some(r), _) => r,
            (None, true) => p.full_repetitions,
            (None, false) => DESK_REPETITIONS,
        };
        let methods = match &args.methods {
            Some(m) => parse_methods(m)?,
            None => p.methods.clone(),
        };
        return Ok(Design {
            kind,
            name: name.clone(),
            model: p.model,
            r: p.r,
            patterns: p.patterns,
            gammas: p.gammas,
            methods,
            counts: p.conservative_counts,
            grid: p.grid,
            alpha: args.alpha.unwrap_or(0.05),
            reps,
            seed: args.seed,
        });
    }
    if args.full {
        return Err(usage("--full needs --preset"));
    }

    let model = parse_model(args)?;
    let r = parse_r(args.r.as_deref().ok_or_else(|| usage("--r is required without --preset"))?, model)?;
    let methods = match &args.methods {
        Some(m) => parse_methods(m)?,
        None => vec![Method::Fisher, Method::Stouffer, Method::Minimum, Method::EProduct],
    };
    let gammas = match (&args.gamma, kind) {
        (Some(g), _) => parse_counts(g, "gamma")?,
        (None, PresetKind::GammaSweep) => vec![],
        (None, _) => return Err(usage("--gamma is required without --preset")),
    };
    if kind != PresetKind::GammaSweep && gammas.len() != 1 {
        return Err(usage("--gamma takes a single value here"));
    }

    let mut counts = vec![];
    let mut grid = vec![];
    let patterns = match kind {
        PresetKind::NullEcdf => {
            if !args.pattern.is_empty() {
                return Err(usage("null-ecdf takes --base, not --pattern"));
            }
            let base = parse_base(args.base.as_deref().ok_or_else(|| usage("--base is required for null-ecdf"))?, r)?;
            counts = parse_counts(args.conservative.as_deref().unwrap_or("0"), "conservative count")?;
            if let Some(&c) = counts.iter().find(|&&c| c > base.zero_count()) {
                return Err(usage(format!("conservative count {c} exceeds the {} zero entries of base '{}'", base.zero_count(), base.label)));
            }
            vec![base]
        }
        PresetKind::EcdfCurve => {
            grid = parse_grid(args.grid.as_deref().unwrap_or("0.01:0.01:1"))?;
            match (&args.base, args.pattern.is_empty()) {
                (Some(_), false) => return Err(usage("ecdf-curve takes either --base or --pattern")),
                (Some(b), true) => {
                    let base = parse_base(b, r)?;
                    let counts = parse_counts(args.conservative.as_deref().unwrap_or("0"), "conservative count")?;
                    counts
                        .iter()
                        .map(|&c| replic::sim::conservative_pattern(&base, c).map_err(|e| usage(e.to_string())))
                        .collect::<Result<Vec<_>>>()?
                }
                (None, _) => args.pattern.iter().map(|t| parse_pattern(t, r)).collect::<Result<_>>()?,
            }
        }
        _ => {
            if args.base.is_some() || args.conservative.is_some() {
                return Err(usage(format!("--base and --conservative do not apply to {}", command_name(kind))));
            }
            args.pattern.iter().map(|t| parse_pattern(t, r)).collect::<Result<_>>()?
        }
    };
    if patterns.is_empty() {
        return Err(usage("--pattern is required without --preset"));
    }
    if kind == PresetKind::GammaSweep && args.pattern.len() > 1 {
        return Err(usage("gamma-sweep takes one --pattern"));
    }
    let gammas = if gammas.is_empty() { (1..=patterns[0].s()).collect() } else { gammas };
    if kind != PresetKind::EcdfCurve && args.grid.is_some() {
        return Err(usage("--grid only applies to ecdf-curve"));
    }
    Ok(Design {
        kind,
        name: "custom".into(),
        model,
        r,
        patterns,
        gammas,
        methods,
        counts,
        grid,
        alpha: args.alpha.unwrap_or(0.05),
        reps: args.reps.unwrap_or(DESK_REPETITIONS),
        seed: args.seed,
    })
}

fn out_dir(args: &ExperimentArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })?;
    std::fs::File::create(&path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|source| CliError::Output { path: path.clone(), source })?;
    Ok(path)
}

/// Runs an experiment subcommand; returns the lines to print.
pub fn experiment(kind: PresetKind, args: &ExperimentArgs) -> Result<Vec<String>> {
    let design = resolve(kind, args)?;
    let header = design.header();
    // Validate every configuration before any simulation starts.
    let mut configs = vec![];
    for pattern in &design.patterns {
        for &gamma in &design.gammas {
            configs.push(design.config(pattern, gamma, args.workers)?);
        }
    }
    let grid: Vec<Probability> = design
        .grid
        .iter()
        .map(|&t| Probability::new(t).map_err(|_| usage(format!("invalid grid point '{t}'"))))
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new();
    let mut plots: Vec<(String, String)> = vec![];
    match kind {
        PresetKind::Power => {
            for cfg in &configs {
                info!("power: pattern {} gamma {}", cfg.pattern.label, cfg.gamma);
                table.push_power(cfg, &run_power(cfg)?)?;
            }
            if args.plot {
                let labels: Vec<String> = design.patterns.iter().map(|p| p.label.clone()).collect();
                let series = design
                    .methods
                    .iter()
                    .map(|&m| Series {
                        name: m.name().into(),
                        values: table.rows.iter().filter(|r| r.method == m).map(|r| r.relative_power.unwrap_or(0.0)).collect(),
                    })
                    .collect::<Vec<_>>();
                let title = format!("Relative power, {} r={} gamma={}", design.model.label(), format_sig(design.r, 4), design.gammas[0]);
                plots.push(("".into(), line_chart(&title, "pattern", "relative power", &labels, &series, 1.0)));
            }
        }
        PresetKind::GammaSweep => {
            let mut series = vec![];
            for pattern in &design.patterns {
                let cfg = design.config(pattern, design.gammas[0], args.workers)?;
                info!("gamma sweep: pattern {}", pattern.label);
                let sweep = gamma_sweep(&cfg, &design.gammas)?;
                for (k, &m) in design.methods.iter().enumerate() {
                    series.push(Series {
                        name: format!("{} ({})", m.name(), pattern.label),
                        values: sweep.iter().map(|g| g.relative[k]).collect(),
                    });
                }
                table.push_gamma_sweep(&cfg, &sweep);
            }
            if args.plot {
                let labels: Vec<String> = design.gammas.iter().map(|g| g.to_string()).collect();
                let title = format!("Relative power across gamma, {} r={}", design.model.label(), format_sig(design.r, 4));
                plots.push(("".into(), line_chart(&title, "gamma", "relative power", &labels, &series, 1.0)));
            }
        }
        PresetKind::NullEcdf => {
            let mut series = vec![];
            let mut labels = vec![];
            for cfg in &configs {
                let counts: Vec<usize> = design.counts.iter().copied().filter(|&c| c <= cfg.pattern.zero_count()).collect();
                let mut per_method = vec![vec![]; design.methods.len()];
                for &count in &counts {
                    info!("null ecdf: base {} count {count}", cfg.pattern.label);
                    let results = run_null_ecdf(cfg, count)?;
                    for (k, r) in results.iter().enumerate() {
                        per_method[k].push(r.estimate.value());
                    }
                    table.push_null_ecdf(cfg, count, &results);
                }
                if counts.len() > labels.len() {
                    labels = counts.iter().map(|c| c.to_string()).collect();
                }
                for (k, &m) in design.methods.iter().enumerate() {
                    series.push(Series { name: format!("{} ({})", m.name(), cfg.pattern.label), values: per_method[k].clone() });
                }
            }
            if args.plot {
                let y_max = series.iter().flat_map(|s| s.values.iter().copied()).fold(design.alpha, f64::max) * 1.1;
                let title = format!("Ecdf at alpha={} under true nulls, {} r={}", design.alpha, design.model.label(), format_sig(design.r, 4));
                plots.push(("".into(), line_chart(&title, "conservative nulls", "ecdf(alpha)", &labels, &series, y_max)));
            }
        }
        PresetKind::EcdfCurve => {
            for cfg in &configs {
                info!("ecdf curve: pattern {}", cfg.pattern.label);
                let curves = run_ecdf_curve(cfg, &grid)?;
                table.push_curves(cfg, &curves);
                if args.plot {
                    let labels: Vec<String> = design.grid.iter().map(|t| format_sig(*t, 3)).collect();
                    let series: Vec<Series> = curves
                        .iter()
                        .map(|c| Series { name: c.method.name().into(), values: c.values.iter().map(|v| v.estimate.value()).collect() })
                        .collect();
                    let title = format!("Ecdf of combined p-values, pattern {} ({} r={})", cfg.pattern.label, design.model.label(), format_sig(design.r, 4));
                    plots.push((format!("-{}", cfg.pattern.label), line_chart(&title, "t", "ecdf(t)", &labels, &series, 1.0)));
                }
            }
        }
    }

    let stem = format!("{}-{}", command_name(kind), design.name);
    let dir = out_dir(args);
    let mut lines = vec![header.clone()];
    let (ext, bytes) = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            ("csv", buf)
        }
        Format::Json => {
            let metadata = serde_json::json!({
                "command": command_name(kind),
                "design": design.name,
                "header": header,
                "model": design.model,
                "r": design.r,
                "gammas": design.gammas,
                "alpha": design.alpha,
                "repetitions": design.reps,
                "seed": design.seed,
                "methods": design.methods,
                "patterns": design.patterns,
            });
            let mut buf = Vec::new();
            table.write_json(&mut buf, &metadata)?;
            ("json", buf)
        }
    };
    let path = write_output(&dir, &format!("{stem}.{ext}"), &bytes)?;
    lines.push(format!("wrote {}", path.display()));
    for (suffix, svg) in plots {
        let path = write_output(&dir, &format!("{stem}{suffix}.svg"), svg.as_bytes())?;
        lines.push(format!("wrote {}", path.display()));
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_specs() {
        assert_eq!(parse_counts("0..3", "x").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_counts("2,4", "x").unwrap(), vec![2, 4]);
        assert!(parse_counts("3..1", "x").is_err());
        assert!(parse_counts("a", "x").is_err());
    }

    #[test]
    fn r_in_sigma_units() {
        let normal = ModelSpec::normal(0.5).unwrap();
        assert_eq!(parse_r("3sigma", normal).unwrap(), 1.5);
        assert_eq!(parse_r("0.2", normal).unwrap(), 0.2);
        assert!(parse_r("1sigma", ModelSpec::Beta).is_err());
        assert!(parse_r("-1", ModelSpec::Beta).is_err());
    }

    #[test]
    fn grid_specs() {
        let g = parse_grid("0.05:0.05:0.95").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[18], 0.95);
        assert_eq!(parse_grid("0.01:0.01:1").unwrap().len(), 100);
        assert!(parse_grid("0.5,0.2").is_err());
    }

    #[test]
    fn combine_names_offending_token() {
        let err = combine("0.1,abc,0.3", 1, "fisher").unwrap_err();
        assert!(err.to_string().contains("'abc'"));
        let err = combine("0.1,1.5", 1, "fisher").unwrap_err();
        assert!(err.to_string().contains("'1.5'"));
    }
}
