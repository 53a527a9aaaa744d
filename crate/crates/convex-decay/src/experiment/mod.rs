//! Named, config-driven experiment registry used by the CLI.
//!
//! Every pipeline in the crate is wrapped as an [`Experiment`]: a named
//! strategy that reads an [`ExperimentConfig`], runs a sweep, and returns
//! rows plus a summary with a single pass verdict. The CLI selects one by
//! name through [`find_experiment`] and hands the result to the runner,
//! which owns all file output.

mod config;
mod report;
mod runner;
mod runs;

use std::path::Path;

use serde_json::{Map, Value};

pub use config::{
    ExperimentConfig, GridConfig, LatticeGridConfig, Thresholds, EXPERIMENT_NAMES,
};
pub use report::generate_report;
pub use runner::run_to_dir;

use crate::{Error, Result};

/// Everything an experiment may consult. `out_dir` exists for composite
/// experiments that lay out sub-runs; ordinary experiments never touch it.
pub struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub out_dir: &'a Path,
}

/// In-memory result of one experiment: the CSV table, the summary object,
/// the verdict, and any warnings (budget exhaustion and the like). Nothing
/// here has touched the filesystem yet.
pub struct RunOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Map<String, Value>,
    pub pass: bool,
    pub warnings: Vec<String>,
}

pub trait Experiment: Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn run(&self, ctx: &RunContext) -> Result<RunOutput>;
}

/// All registered experiments, in catalog order.
pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(runs::Decay),
        Box::new(runs::Slab),
        Box::new(runs::Thm11),
        Box::new(runs::Thm12),
        Box::new(runs::Uniform),
        Box::new(runs::Lemma15),
        Box::new(runs::Eq31),
        Box::new(runs::Union),
        Box::new(runs::Lattice),
        Box::new(runs::FullReport),
    ]
}

pub fn find_experiment(name: &str) -> Result<Box<dyn Experiment>> {
    registry()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::UnknownName(format!("experiment '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_matches_the_config_schema() {
        let names: Vec<&str> = registry().iter().map(|e| e.name()).collect();
        assert_eq!(names, EXPERIMENT_NAMES);
        for exp in registry() {
            assert!(!exp.describe().is_empty());
        }
        assert!(find_experiment("lattice").is_ok());
        assert!(find_experiment("thm99").is_err());
    }
}
