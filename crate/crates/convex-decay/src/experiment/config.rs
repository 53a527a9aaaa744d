//! JSON experiment configuration: what to run, on which shape, over which
//! grid, against which thresholds.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::surface::catalog::{BodyConfig, PatchConfig};
use crate::{Error, Result};

pub const EXPERIMENT_NAMES: [&str; 10] = [
    "decay",
    "slab",
    "thm11",
    "thm12",
    "uniform",
    "lemma15",
    "eq31",
    "union",
    "lattice",
    "full-report",
];

/// Overrides for a direction × frequency sweep; unset fields fall back to the
/// experiment's own defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub directions: Option<usize>,
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub points_per_decade: Option<usize>,
}

impl GridConfig {
    /// Fill in experiment defaults and validate ordering.
    pub fn resolve(
        &self,
        directions: usize,
        t_range: (f64, f64),
        ppd: usize,
    ) -> Result<(usize, (f64, f64), usize)> {
        let dirs = self.directions.unwrap_or(directions);
        let lo = self.t_lo.unwrap_or(t_range.0);
        let hi = self.t_hi.unwrap_or(t_range.1);
        let ppd = self.points_per_decade.unwrap_or(ppd);
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::Config(format!(
                "frequency range must be ordered and positive, got [{lo}, {hi}]"
            )));
        }
        if dirs == 0 || ppd == 0 {
            return Err(Error::Config(
                "direction count and points per decade must be positive".into(),
            ));
        }
        Ok((dirs, (lo, hi), ppd))
    }
}

/// Dilation ladder for lattice runs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeGridConfig {
    pub k_lo: u64,
    pub k_hi: u64,
    pub count: usize,
}

/// Every pass/fail constant the experiments consult. These are echoed into
/// both summary.json and manifest.json so no verdict rests on a hidden
/// number.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Maximum acceptable slope of the log ratio envelope.
    pub trend_max: f64,
    /// Maximum relative spread (width over mean) of the sublevel constant
    /// across the lowest two width decades; 0.20 is ±10% about the center.
    pub stability_max: f64,
    /// Maximum relative growth of sup_ratio when the frequency grid doubles.
    pub doubling_max: f64,
    /// Allowed gap between a fitted slab exponent and its requested value.
    pub slab_alpha_tol: f64,
    /// Slack added to the predicted discrepancy exponent.
    pub lattice_margin: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            trend_max: 0.05,
            stability_max: 0.20,
            doubling_max: 0.20,
            slab_alpha_tol: 0.02,
            lattice_margin: 0.03,
        }
    }
}

/// One experiment request, loadable from JSON. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub patch: Option<PatchConfig>,
    pub body: Option<BodyConfig>,
    pub grid: GridConfig,
    pub lattice_grid: Option<LatticeGridConfig>,
    pub thresholds: Thresholds,
    /// Decay exponent for uniform/union runs; the appropriate slab exponent
    /// for lattice runs. Defaults are per-body.
    pub alpha: Option<f64>,
    /// Sublevel exponent for lemma15 runs.
    pub delta: Option<f64>,
    /// Carving preset for thm12: "half", "noop" or "empty".
    pub carving: Option<String>,
    /// Fixed direction for slab and lemma15 runs (n+1 components).
    pub direction: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            patch: None,
            body: None,
            grid: GridConfig::default(),
            lattice_grid: None,
            thresholds: Thresholds::default(),
            alpha: None,
            delta: None,
            carving: None,
            direction: None,
            output: None,
            seed: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENT_NAMES.contains(&self.experiment.as_str()) {
            return Err(Error::Config(format!(
                "unknown experiment '{}'; expected one of {}",
                self.experiment,
                EXPERIMENT_NAMES.join(", ")
            )));
        }
        if let Some(carving) = &self.carving {
            if !["half", "noop", "empty"].contains(&carving.as_str()) {
                return Err(Error::Config(format!(
                    "unknown carving preset '{carving}'; expected half, noop or empty"
                )));
            }
        }
        if let Some(g) = &self.lattice_grid {
            if g.k_lo == 0 || g.k_hi <= g.k_lo || g.count < 2 {
                return Err(Error::Config(format!(
                    "bad lattice ladder [{}, {}] × {}",
                    g.k_lo, g.k_hi, g.count
                )));
            }
        }
        for (name, value) in [
            ("trend_max", self.thresholds.trend_max),
            ("stability_max", self.thresholds.stability_max),
            ("doubling_max", self.thresholds.doubling_max),
            ("slab_alpha_tol", self.thresholds.slab_alpha_tol),
            ("lattice_margin", self.thresholds.lattice_margin),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "threshold {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}
