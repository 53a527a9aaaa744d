//! The registered experiments: thin orchestration between config, the check
//! functions, and tabular output.

use std::path::PathBuf;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::checks::{
    check_eq31, check_lemma15, check_thm11, check_thm12, check_union, log_grid, sample_transform,
    uniform_summary, CheckId, RatioSummary, SweepGrid, TransformSample, TransformTarget,
    VerificationRecord,
};
use crate::experiment::{
    runner, Experiment, ExperimentConfig, GridConfig, RunContext, RunOutput,
};
use crate::geometry::{fit_power_law, max_slab};
use crate::lattice::{discrepancy_profile, log_spaced_ks, predicted_exponent, standard_ks};
use crate::oscillatory::BodyTransform;
use crate::surface::catalog::{make_catalog_patch, make_closed_body, BodyConfig, PatchConfig};
use crate::surface::{validate_patch, AmbientFn, ClosedBody, ConvexPatch, Direction, ScalarFn};
use crate::{Error, Result};

fn fnum(x: f64) -> String {
    format!("{x}")
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(m),
        other => Error::Config(other.to_string()),
    }
}

/// Build (and gate) the configured patch, falling back to a named default.
fn config_patch(config: &ExperimentConfig, default: &str, seed: u64) -> Result<ConvexPatch> {
    let cfg = config.patch.clone().unwrap_or(PatchConfig {
        name: default.into(),
        ..PatchConfig::default()
    });
    let patch = make_catalog_patch(&cfg).map_err(config_error)?;
    let report = validate_patch(&patch, 400, seed)?;
    if !report.pass() {
        return Err(Error::Config(format!(
            "patch '{}' failed validation: {}",
            patch.name(),
            report.failed_checks().join(", ")
        )));
    }
    Ok(patch)
}

fn config_body(config: &ExperimentConfig, default: &str) -> Result<ClosedBody> {
    let cfg = config.body.clone().unwrap_or(BodyConfig {
        name: default.into(),
        ..BodyConfig::default()
    });
    make_closed_body(&cfg).map_err(config_error)
}

/// Decay exponent the catalog expects for a body: n/2 for the curved ones,
/// 1/p per flat axis for the superellipse family.
fn default_alpha(body: &ClosedBody, config: &ExperimentConfig) -> Result<f64> {
    if let Some(alpha) = config.alpha {
        return Ok(alpha);
    }
    let p = config.body.as_ref().and_then(|b| b.p).unwrap_or(4.0);
    match body.name() {
        "disk" | "ellipse" | "two_disk_union" | "square" => Ok(0.5),
        "superellipse" => Ok(1.0 / p),
        "superellipsoid" => Ok(2.0 / p),
        "ball" => Ok(1.0),
        other => Err(Error::Config(format!(
            "no default decay exponent for body '{other}'; set alpha"
        ))),
    }
}

fn fixed_direction(config: &ExperimentConfig, n: usize) -> Result<Direction> {
    match &config.direction {
        Some(comps) => {
            if comps.len() != n + 1 {
                return Err(Error::Config(format!(
                    "direction needs {} components, got {}",
                    n + 1,
                    comps.len()
                )));
            }
            Direction::new(comps).map_err(config_error)
        }
        None => {
            let mut comps = vec![0.0; n + 1];
            comps[n] = 1.0;
            Ok(Direction::new(&comps).unwrap())
        }
    }
}

fn sweep_grid(
    config: &ExperimentConfig,
    n: usize,
    dirs: usize,
    t_range: (f64, f64),
    ppd: usize,
) -> Result<SweepGrid> {
    let (dirs, t_range, ppd) = config.grid.resolve(dirs, t_range, ppd)?;
    SweepGrid::new(n, dirs, t_range, ppd).map_err(config_error)
}

fn standard_sweep(config: &ExperimentConfig, n: usize) -> Result<SweepGrid> {
    let reference = SweepGrid::standard(n).map_err(config_error)?;
    let (lo, hi) = (
        reference.frequencies()[0],
        *reference.frequencies().last().unwrap(),
    );
    sweep_grid(config, n, reference.directions().len(), (lo, hi), 24)
}

fn direction_value(v: &Direction) -> Value {
    Value::Array(v.components().iter().map(|&c| Value::from(c)).collect())
}

fn grid_value(grid: &SweepGrid) -> Value {
    let mut m = Map::new();
    m.insert(
        "directions".into(),
        Value::from(grid.directions().len() as u64),
    );
    m.insert("t_lo".into(), Value::from(grid.frequencies()[0]));
    m.insert(
        "t_hi".into(),
        Value::from(*grid.frequencies().last().unwrap()),
    );
    m.insert(
        "frequencies".into(),
        Value::from(grid.frequencies().len() as u64),
    );
    Value::Object(m)
}

fn ratio_header(n: usize) -> Vec<String> {
    let mut header = vec!["theorem".to_string()];
    for i in 1..=n + 1 {
        header.push(format!("v{i}"));
    }
    header.extend(["t", "lhs", "rhs", "ratio", "est_error"].map(String::from));
    header
}

fn ratio_row(r: &VerificationRecord) -> Vec<String> {
    let mut row = vec![r.check.token().to_string()];
    row.extend(r.v.components().iter().map(|&c| fnum(c)));
    row.extend([
        fnum(r.t),
        fnum(r.lhs),
        fnum(r.rhs),
        fnum(r.ratio),
        fnum(r.est_error),
    ]);
    row
}

fn exhaustion_warnings(records: &[VerificationRecord]) -> Vec<String> {
    records
        .iter()
        .filter(|r| r.exhausted)
        .map(|r| {
            format!(
                "quadrature budget exhausted: {} at v={:?}, t={}",
                r.check.token(),
                r.v.components(),
                r.t
            )
        })
        .collect()
}

/// Shared summary fields of one ratio sweep.
fn ratio_summary_fields(map: &mut Map<String, Value>, summary: &RatioSummary) {
    map.insert("sup_ratio".into(), Value::from(summary.sup_ratio));
    map.insert(
        "sup_direction".into(),
        direction_value(&summary.sup_location.0),
    );
    map.insert("sup_t".into(), Value::from(summary.sup_location.1));
    map.insert("trend".into(), Value::from(summary.trend));
    map.insert(
        "zero_rhs_violations".into(),
        Value::from(summary.zero_rhs_violations as u64),
    );
    map.insert(
        "exhausted_records".into(),
        Value::from(summary.exhausted_records as u64),
    );
    map.insert(
        "records".into(),
        Value::from(summary.records.len() as u64),
    );
}

/// Sup of |transform| per frequency, for envelope fits: samples arrive
/// direction-major over a fixed frequency column.
fn per_frequency_sup(samples: &[TransformSample], freqs: &[f64]) -> Vec<(f64, f64)> {
    let mut sups = vec![0.0f64; freqs.len()];
    for (i, s) in samples.iter().enumerate() {
        let j = i % freqs.len();
        sups[j] = sups[j].max(s.lhs);
    }
    freqs.iter().copied().zip(sups).collect()
}

/// Least-squares power-law of positive samples, or None when the data cannot
/// support one (too few positive points or too narrow a range).
fn optional_fit(samples: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let positive: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, v)| t > 0.0 && v > 0.0 && v.is_finite())
        .collect();
    fit_power_law(&positive)
        .ok()
        .map(|f| (f.alpha, f.c, f.residual))
}

fn opt_value(x: Option<f64>) -> Value {
    x.map(Value::from).unwrap_or(Value::Null)
}

pub struct Decay;

impl Experiment for Decay {
    fn name(&self) -> &'static str {
        "decay"
    }

    fn describe(&self) -> &'static str {
        "|transform(tv)| over a direction × frequency grid, with a power-law envelope fit"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        if config.patch.is_some() && config.body.is_some() {
            return Err(Error::Config(
                "decay takes a patch or a body, not both".into(),
            ));
        }
        let patch;
        let body;
        let target = if config.patch.is_some() {
            patch = config_patch(config, "paraboloid", ctx.seed)?;
            TransformTarget::Patch(&patch)
        } else {
            body = config_body(config, "disk")?;
            TransformTarget::Body(&body)
        };
        let n = match target {
            TransformTarget::Patch(p) => p.n(),
            TransformTarget::Body(b) => b.n(),
        };
        let grid = sweep_grid(config, n, 64, (10.0, 1e4), 12)?;
        let samples = sample_transform(target, &grid)?;

        let header = {
            let mut h: Vec<String> = (1..=n + 1).map(|i| format!("v{i}")).collect();
            h.extend(["t", "value", "est_error"].map(String::from));
            h
        };
        let rows = samples
            .iter()
            .map(|s| {
                let mut row: Vec<String> = s.v.components().iter().map(|&c| fnum(c)).collect();
                row.extend([fnum(s.t), fnum(s.lhs), fnum(s.est_error)]);
                row
            })
            .collect();

        let envelope = per_frequency_sup(&samples, grid.frequencies());
        let fit = optional_fit(&envelope);
        let mut summary = Map::new();
        summary.insert("target".into(), Value::from(match target {
            TransformTarget::Patch(p) => p.name().to_string(),
            TransformTarget::Body(b) => b.name().to_string(),
        }));
        summary.insert("grid".into(), grid_value(&grid));
        summary.insert("alpha_fit".into(), opt_value(fit.map(|f| f.0)));
        summary.insert("envelope_c".into(), opt_value(fit.map(|f| f.1)));
        summary.insert("fit_residual".into(), opt_value(fit.map(|f| f.2)));
        summary.insert(
            "sup_value".into(),
            Value::from(samples.iter().fold(0.0f64, |m, s| m.max(s.lhs))),
        );
        let warnings: Vec<String> = samples
            .iter()
            .filter(|s| s.exhausted)
            .map(|s| {
                format!(
                    "quadrature budget exhausted at v={:?}, t={}",
                    s.v.components(),
                    s.t
                )
            })
            .collect();
        Ok(RunOutput {
            header,
            rows,
            summary,
            pass: true,
            warnings,
        })
    }
}

pub struct Slab;

impl Experiment for Slab {
    fn name(&self) -> &'static str {
        "slab"
    }

    fn describe(&self) -> &'static str {
        "maximal slab measure of width 1/t along one direction, with its decay exponent"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        let body = config_body(config, "disk")?;
        let v = fixed_direction(config, body.n())?;
        let (_, (lo, hi), ppd) = config.grid.resolve(1, (1e2, 1e6), 12)?;
        if hi / lo < 100.0 * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "slab exponent fits need two decades of frequencies, got [{lo}, {hi}]"
            )));
        }
        let ts = log_grid(lo, hi, ppd);
        let mut rows = Vec::with_capacity(ts.len());
        let mut samples = Vec::with_capacity(ts.len());
        for &t in &ts {
            let measure = max_slab(&body, &v, t)?;
            rows.push(vec![fnum(t), fnum(measure)]);
            samples.push((t, measure));
        }
        let fit = fit_power_law(&samples)?;
        let pass = match config.alpha {
            Some(requested) => (fit.alpha - requested).abs() <= config.thresholds.slab_alpha_tol,
            None => true,
        };

        let mut summary = Map::new();
        summary.insert("body".into(), Value::from(body.name().to_string()));
        summary.insert("direction".into(), direction_value(&v));
        summary.insert("alpha_fit".into(), Value::from(fit.alpha));
        summary.insert("envelope_c".into(), Value::from(fit.c));
        summary.insert("fit_residual".into(), Value::from(fit.residual));
        summary.insert("alpha_requested".into(), opt_value(config.alpha));
        summary.insert(
            "slab_alpha_tol".into(),
            Value::from(config.thresholds.slab_alpha_tol),
        );
        summary.insert("t_lo".into(), Value::from(lo));
        summary.insert("t_hi".into(), Value::from(hi));
        Ok(RunOutput {
            header: ["t", "measure"].map(String::from).to_vec(),
            rows,
            summary,
            pass,
            warnings: Vec::new(),
        })
    }
}

/// Tangent-slab and carved-slab sweeps share everything but the check call
/// and the carving.
fn slab_bound_run(
    ctx: &RunContext,
    check: CheckId,
    carve: Option<&str>,
) -> Result<RunOutput> {
    let config = ctx.config;
    let mut patch = config_patch(config, "paraboloid", ctx.seed)?;
    if let Some(preset) = carve {
        let carving = carving_preset(preset, patch.r0());
        patch = patch.with_carving(carving);
    }
    let grid = standard_sweep(config, patch.n())?;
    let run = |g: &SweepGrid| match check {
        CheckId::Thm11 => check_thm11(&patch, g),
        _ => check_thm12(&patch, g),
    };
    let base = run(&grid)?;
    let doubled = run(&grid.doubled())?;
    let growth = if base.sup_ratio > 0.0 {
        (doubled.sup_ratio - base.sup_ratio) / base.sup_ratio
    } else {
        0.0
    };
    let thresholds = &config.thresholds;
    let pass = base.trend <= thresholds.trend_max
        && growth <= thresholds.doubling_max
        && base.zero_rhs_violations == 0;

    let mut summary = Map::new();
    summary.insert("check".into(), Value::from(check.token()));
    summary.insert("patch".into(), Value::from(patch.name().to_string()));
    if let Some(preset) = carve {
        summary.insert("carving".into(), Value::from(preset));
    }
    summary.insert("grid".into(), grid_value(&grid));
    ratio_summary_fields(&mut summary, &base);
    summary.insert("doubled_sup_ratio".into(), Value::from(doubled.sup_ratio));
    summary.insert("doubling_growth".into(), Value::from(growth));
    summary.insert("doubling_max".into(), Value::from(thresholds.doubling_max));
    summary.insert("trend_max".into(), Value::from(thresholds.trend_max));

    let warnings = exhaustion_warnings(&base.records);
    Ok(RunOutput {
        header: ratio_header(patch.n()),
        rows: base.records.iter().map(ratio_row).collect(),
        summary,
        pass,
        warnings,
    })
}

fn carving_preset(name: &str, r0: f64) -> Vec<ScalarFn> {
    match name {
        // Keep the left half-domain x₀ < 0.
        "half" => vec![Arc::new(|x: [f64; 2]| x[0]) as ScalarFn],
        // Two polynomials that are strictly negative on the whole domain;
        // the carved set is the full patch.
        "noop" => vec![
            Arc::new(move |x: [f64; 2]| x[0] * x[0] + x[1] * x[1] - 4.0 * r0 * r0) as ScalarFn,
            Arc::new(move |x: [f64; 2]| -(x[0] * x[0] + x[1] * x[1]) - 4.0 * r0 * r0) as ScalarFn,
        ],
        // Never negative: the carved set is empty and the transform vanishes.
        _ => vec![Arc::new(|x: [f64; 2]| x[0] * x[0] + x[1] * x[1] + 1.0) as ScalarFn],
    }
}

pub struct Thm11;

impl Experiment for Thm11 {
    fn name(&self) -> &'static str {
        "thm11"
    }

    fn describe(&self) -> &'static str {
        "transform against the tangent slab of width 1/t on an analytic patch"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        if ctx.config.carving.is_some() {
            return Err(Error::Config(
                "the tangent-slab check takes no carving; use thm12".into(),
            ));
        }
        slab_bound_run(ctx, CheckId::Thm11, None)
    }
}

pub struct Thm12;

impl Experiment for Thm12 {
    fn name(&self) -> &'static str {
        "thm12"
    }

    fn describe(&self) -> &'static str {
        "carved transform against the dyadic slab sum (presets: half, noop, empty)"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let preset = ctx.config.carving.as_deref().unwrap_or("half");
        slab_bound_run(ctx, CheckId::Thm12, Some(preset))
    }
}

pub struct Uniform;

impl Experiment for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn describe(&self) -> &'static str {
        "|transform| against t^{−α}, plus the α+0.1 negative control on the same samples"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        if config.patch.is_some() && config.body.is_some() {
            return Err(Error::Config(
                "uniform decay takes a patch or a body, not both".into(),
            ));
        }
        let patch;
        let body;
        let target;
        let alpha;
        if config.patch.is_some() {
            patch = config_patch(config, "paraboloid", ctx.seed)?;
            target = TransformTarget::Patch(&patch);
            alpha = config.alpha.ok_or_else(|| {
                Error::Config("uniform decay on a patch needs an explicit alpha".into())
            })?;
        } else {
            body = config_body(config, "disk")?;
            alpha = default_alpha(&body, config)?;
            target = TransformTarget::Body(&body);
        }
        let n = match target {
            TransformTarget::Patch(p) => p.n(),
            TransformTarget::Body(b) => b.n(),
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "uniform decay exponent must lie in (0, 1), got {alpha}"
            )));
        }
        let grid = standard_sweep(config, n)?;
        let samples = sample_transform(target, &grid)?;
        let check = match target {
            TransformTarget::Patch(_) => CheckId::Thm13,
            TransformTarget::Body(_) => CheckId::Thm14Part1,
        };
        let main = uniform_summary(check, &samples, alpha)?;
        let control_alpha = alpha + 0.1;
        let control = if control_alpha < 1.0 {
            Some(uniform_summary(check, &samples, control_alpha)?)
        } else {
            None
        };

        let thresholds = &config.thresholds;
        let control_failed = control.as_ref().map(|c| c.trend > thresholds.trend_max);
        let pass = main.trend <= thresholds.trend_max
            && main.zero_rhs_violations == 0
            && control_failed.unwrap_or(true);

        let mut summary = Map::new();
        summary.insert("check".into(), Value::from(check.token()));
        summary.insert("target".into(), Value::from(match target {
            TransformTarget::Patch(p) => p.name().to_string(),
            TransformTarget::Body(b) => b.name().to_string(),
        }));
        summary.insert("grid".into(), grid_value(&grid));
        summary.insert("alpha".into(), Value::from(alpha));
        ratio_summary_fields(&mut summary, &main);
        summary.insert("c_prime".into(), Value::from(main.sup_ratio));
        summary.insert("trend_max".into(), Value::from(thresholds.trend_max));
        summary.insert(
            "negative_alpha".into(),
            control.as_ref().map(|_| Value::from(control_alpha)).unwrap_or(Value::Null),
        );
        summary.insert(
            "negative_trend".into(),
            control.as_ref().map(|c| Value::from(c.trend)).unwrap_or(Value::Null),
        );
        summary.insert(
            "negative_control_failed".into(),
            control_failed.map(Value::from).unwrap_or(Value::Null),
        );

        let warnings = exhaustion_warnings(&main.records);
        Ok(RunOutput {
            header: ratio_header(n),
            rows: main.records.iter().map(ratio_row).collect(),
            summary,
            pass,
            warnings,
        })
    }
}

pub struct Lemma15;

impl Experiment for Lemma15 {
    fn name(&self) -> &'static str {
        "lemma15"
    }

    fn describe(&self) -> &'static str {
        "sublevel converse: slab measures against A·ε^δ with A from the measured envelope"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        let body = config_body(config, "disk")?;
        let v = fixed_direction(config, body.n())?;
        let delta = match config.delta {
            Some(d) => d,
            None => default_alpha(&body, config)?,
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!(
                "sublevel exponent must lie in (0, 1), got {delta}"
            )));
        }
        let (_, (t_lo, t_hi), ppd) = config.grid.resolve(1, (10.0, 1e3), 6)?;
        let t_grid = log_grid(t_lo, t_hi, ppd);
        let eps_grid = log_grid(1e-6, 1e-2, 5);

        // Measure the envelope constant before asserting it as a premise.
        let one: AmbientFn = Arc::new(|_| 1.0);
        let transform = BodyTransform::new(&body, &one, &v)?;
        let mut a = 0.0f64;
        for &t in &t_grid {
            let out = transform.eval(t)?;
            a = a.max(out.value.norm() * t.powf(delta));
        }
        if !(a > 0.0) {
            return Err(Error::Parameter(
                "the transform vanished on the whole premise grid".into(),
            ));
        }
        let report = check_lemma15(&body, &v, a, delta, &eps_grid, &t_grid)?;

        let thresholds = &config.thresholds;
        let pass = report.premise_ok
            && report.stability <= thresholds.stability_max
            && report.slabs.zero_rhs_violations == 0;

        let mut summary = Map::new();
        summary.insert("body".into(), Value::from(body.name().to_string()));
        summary.insert("direction".into(), direction_value(&v));
        summary.insert("delta".into(), Value::from(delta));
        summary.insert("envelope_a".into(), Value::from(a));
        summary.insert("c_delta".into(), Value::from(report.c_delta));
        summary.insert("stability".into(), Value::from(report.stability));
        summary.insert(
            "stability_max".into(),
            Value::from(thresholds.stability_max),
        );
        summary.insert("premise_ok".into(), Value::from(report.premise_ok));
        summary.insert("eps_lo".into(), Value::from(eps_grid[0]));
        summary.insert("eps_hi".into(), Value::from(*eps_grid.last().unwrap()));
        summary.insert("t_lo".into(), Value::from(t_lo));
        summary.insert("t_hi".into(), Value::from(t_hi));
        summary.insert(
            "envelope_trend".into(),
            Value::from(report.envelope.trend),
        );

        // Premise rows first, then the sublevel rows with t := 1/ε; the
        // theorem column tells them apart.
        let mut rows: Vec<Vec<String>> = report.envelope.records.iter().map(ratio_row).collect();
        rows.extend(report.slabs.records.iter().map(ratio_row));
        let mut warnings = exhaustion_warnings(&report.envelope.records);
        warnings.extend(exhaustion_warnings(&report.slabs.records));
        Ok(RunOutput {
            header: ratio_header(body.n()),
            rows,
            summary,
            pass,
            warnings,
        })
    }
}

pub struct Eq31;

impl Experiment for Eq31 {
    fn name(&self) -> &'static str {
        "eq31"
    }

    fn describe(&self) -> &'static str {
        "two-sided tangent-slab bound for plane curves, with and without the log factor"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        let body = config_body(config, "disk")?;
        if body.n() != 1 {
            return Err(Error::Config(format!(
                "the curve bound needs a plane body, got '{}' with n={}",
                body.name(),
                body.n()
            )));
        }
        let grid = standard_sweep(config, 1)?;
        let report = check_eq31(&body, &grid)?;
        let thresholds = &config.thresholds;
        let pass = report.logged.trend <= thresholds.trend_max
            && report.logged.sup_ratio.is_finite()
            && report.log_free.sup_ratio.is_finite()
            && report.logged.zero_rhs_violations == 0;

        let mut summary = Map::new();
        summary.insert("body".into(), Value::from(body.name().to_string()));
        summary.insert("grid".into(), grid_value(&grid));
        ratio_summary_fields(&mut summary, &report.logged);
        summary.insert("trend_max".into(), Value::from(thresholds.trend_max));
        summary.insert(
            "log_free_sup_ratio".into(),
            Value::from(report.log_free.sup_ratio),
        );
        summary.insert(
            "log_free_trend".into(),
            Value::from(report.log_free.trend),
        );

        let warnings = exhaustion_warnings(&report.logged.records);
        Ok(RunOutput {
            header: ratio_header(1),
            rows: report.logged.records.iter().map(ratio_row).collect(),
            summary,
            pass,
            warnings,
        })
    }
}

pub struct Union;

impl Experiment for Union {
    fn name(&self) -> &'static str {
        "union"
    }

    fn describe(&self) -> &'static str {
        "boundary transform of a union of bodies against t^{−α}"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        let body = config_body(config, "two_disk_union")?;
        let alpha = default_alpha(&body, config)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "union decay exponent must lie in (0, 1), got {alpha}"
            )));
        }
        let grid = sweep_grid(config, body.n(), 128, (10.0, 1e4), 24)?;
        let summary_run = check_union(&[&body], alpha, &grid)?;
        let thresholds = &config.thresholds;
        let pass = summary_run.trend <= thresholds.trend_max
            && summary_run.zero_rhs_violations == 0;

        let mut summary = Map::new();
        summary.insert("body".into(), Value::from(body.name().to_string()));
        summary.insert("alpha".into(), Value::from(alpha));
        summary.insert("grid".into(), grid_value(&grid));
        ratio_summary_fields(&mut summary, &summary_run);
        summary.insert("trend_max".into(), Value::from(thresholds.trend_max));

        let warnings = exhaustion_warnings(&summary_run.records);
        Ok(RunOutput {
            header: ratio_header(body.n()),
            rows: summary_run.records.iter().map(ratio_row).collect(),
            summary,
            pass,
            warnings,
        })
    }
}

pub struct Lattice;

impl Experiment for Lattice {
    fn name(&self) -> &'static str {
        "lattice"
    }

    fn describe(&self) -> &'static str {
        "exact lattice counts of dilations and the discrepancy envelope exponent"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let config = ctx.config;
        let body = config_body(config, "disk")?;
        let ks = match &config.lattice_grid {
            Some(g) => {
                if g.count < 50 {
                    return Err(Error::Config(format!(
                        "a discrepancy profile needs at least 50 dilations, got {}",
                        g.count
                    )));
                }
                log_spaced_ks(g.k_lo, g.k_hi, g.count).map_err(config_error)?
            }
            None => standard_ks(body.n()).map_err(config_error)?,
        };
        let alpha = default_alpha(&body, config)?;
        let predicted = predicted_exponent(body.n(), alpha).map_err(config_error)?;
        let profile = discrepancy_profile(&body, &ks)?;
        let margin = config.thresholds.lattice_margin;
        let theorem_pass = profile.fitted_exponent <= predicted + margin;
        // A control body is supposed to defeat the convex prediction.
        let pass = if body.is_control() {
            !theorem_pass
        } else {
            theorem_pass
        };

        let last = profile.rows.last().unwrap();
        let density_gap =
            (last.count as f64 / (last.k as f64).powi(body.n() as i32 + 1) - body.volume()).abs();
        let mut summary = Map::new();
        summary.insert("body".into(), Value::from(body.name().to_string()));
        summary.insert("control".into(), Value::from(body.is_control()));
        summary.insert("alpha".into(), Value::from(alpha));
        summary.insert("predicted_exponent".into(), Value::from(predicted));
        summary.insert(
            "empirical_exponent".into(),
            Value::from(profile.fitted_exponent),
        );
        summary.insert("lattice_margin".into(), Value::from(margin));
        summary.insert("theorem_pass".into(), Value::from(theorem_pass));
        summary.insert(
            "sign_changes".into(),
            Value::from(profile.sign_changes() as u64),
        );
        summary.insert("final_density_gap".into(), Value::from(density_gap));
        summary.insert("volume".into(), Value::from(body.volume()));
        summary.insert("k_lo".into(), Value::from(ks[0]));
        summary.insert("k_hi".into(), Value::from(*ks.last().unwrap()));
        summary.insert("k_count".into(), Value::from(ks.len() as u64));

        let rows = profile
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.count.to_string(),
                    fnum(r.main),
                    fnum(r.disc),
                ]
            })
            .collect();
        Ok(RunOutput {
            header: ["k", "N", "main", "disc"].map(String::from).to_vec(),
            rows,
            summary,
            pass,
            warnings: Vec::new(),
        })
    }
}

pub struct FullReport;

/// Fixed battery of desk-scale sub-runs; grid overrides in the config are
/// ignored so the battery stays comparable run to run.
fn battery() -> Vec<(&'static str, ExperimentConfig)> {
    fn body(name: &str) -> Option<BodyConfig> {
        Some(BodyConfig {
            name: name.into(),
            ..BodyConfig::default()
        })
    }
    fn grid(directions: usize, t_lo: f64, t_hi: f64, ppd: usize) -> GridConfig {
        GridConfig {
            directions: Some(directions),
            t_lo: Some(t_lo),
            t_hi: Some(t_hi),
            points_per_decade: Some(ppd),
        }
    }
    let base = ExperimentConfig::default();
    let mut runs = Vec::new();
    runs.push(("01-decay-disk", ExperimentConfig {
        experiment: "decay".into(),
        body: body("disk"),
        grid: grid(32, 10.0, 1e3, 12),
        ..base.clone()
    }));
    runs.push(("02-slab-disk", ExperimentConfig {
        experiment: "slab".into(),
        body: body("disk"),
        alpha: Some(0.5),
        ..base.clone()
    }));
    runs.push(("03-slab-superellipse", ExperimentConfig {
        experiment: "slab".into(),
        body: body("superellipse"),
        alpha: Some(0.25),
        ..base.clone()
    }));
    runs.push(("04-thm11-paraboloid", ExperimentConfig {
        experiment: "thm11".into(),
        grid: grid(48, 10.0, 1e3, 8),
        ..base.clone()
    }));
    runs.push(("05-thm12-half-paraboloid", ExperimentConfig {
        experiment: "thm12".into(),
        carving: Some("half".into()),
        grid: grid(48, 10.0, 1e3, 8),
        ..base.clone()
    }));
    runs.push(("06-uniform-disk", ExperimentConfig {
        experiment: "uniform".into(),
        body: body("disk"),
        grid: grid(64, 10.0, 1e4, 12),
        ..base.clone()
    }));
    runs.push(("07-uniform-superellipse", ExperimentConfig {
        experiment: "uniform".into(),
        body: body("superellipse"),
        grid: grid(64, 10.0, 1e4, 12),
        ..base.clone()
    }));
    runs.push(("08-lemma15-disk", ExperimentConfig {
        experiment: "lemma15".into(),
        body: body("disk"),
        ..base.clone()
    }));
    runs.push(("09-eq31-disk", ExperimentConfig {
        experiment: "eq31".into(),
        body: body("disk"),
        grid: grid(64, 10.0, 1e4, 12),
        ..base.clone()
    }));
    runs.push(("10-eq31-ellipse", ExperimentConfig {
        experiment: "eq31".into(),
        body: Some(BodyConfig {
            name: "ellipse".into(),
            a: Some(1.0),
            b: Some(0.25),
            ..BodyConfig::default()
        }),
        grid: grid(64, 10.0, 1e4, 12),
        ..base.clone()
    }));
    runs.push(("11-union", ExperimentConfig {
        experiment: "union".into(),
        grid: grid(48, 10.0, 1e3, 24),
        ..base.clone()
    }));
    runs.push(("12-lattice-disk", ExperimentConfig {
        experiment: "lattice".into(),
        body: body("disk"),
        ..base.clone()
    }));
    runs.push(("13-lattice-superellipse", ExperimentConfig {
        experiment: "lattice".into(),
        body: body("superellipse"),
        ..base.clone()
    }));
    runs.push(("14-lattice-square", ExperimentConfig {
        experiment: "lattice".into(),
        body: body("square"),
        ..base.clone()
    }));
    runs
}

impl Experiment for FullReport {
    fn name(&self) -> &'static str {
        "full-report"
    }

    fn describe(&self) -> &'static str {
        "fixed battery of sub-runs plus a consolidated report.md"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let mut rows = Vec::new();
        let mut run_list = Vec::new();
        let mut all_pass = true;
        let mut warnings = Vec::new();
        for (label, sub_config) in battery() {
            let sub_dir: PathBuf = ctx.out_dir.join(label);
            let experiment = super::find_experiment(&sub_config.experiment)?;
            let sub_ctx = RunContext {
                config: &sub_config,
                seed: ctx.seed,
                out_dir: &sub_dir,
            };
            let output = experiment.run(&sub_ctx)?;
            runner::write_run(&sub_dir, &sub_config, ctx.seed, &output)?;
            all_pass &= output.pass;
            for w in &output.warnings {
                warnings.push(format!("{label}: {w}"));
            }
            rows.push(vec![
                label.to_string(),
                sub_config.experiment.clone(),
                output.pass.to_string(),
            ]);
            let mut entry = Map::new();
            entry.insert("label".into(), Value::from(label));
            entry.insert("experiment".into(), Value::from(sub_config.experiment));
            entry.insert("pass".into(), Value::from(output.pass));
            run_list.push(Value::Object(entry));
        }
        super::generate_report(ctx.out_dir)?;

        let mut summary = Map::new();
        summary.insert("runs".into(), Value::Array(run_list));
        summary.insert("all_pass".into(), Value::from(all_pass));
        Ok(RunOutput {
            header: ["label", "experiment", "pass"].map(String::from).to_vec(),
            rows,
            summary,
            pass: all_pass,
            warnings,
        })
    }
}
