//! Executes one experiment and owns all of its file output.
//!
//! Nothing is written until the run has finished, so a failed run leaves no
//! partial records, and a malformed config never creates the output
//! directory at all. All numbers are formatted with the shortest-round-trip
//! float formatter and JSON objects keep sorted keys, so identical inputs
//! produce byte-identical files regardless of thread count.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::experiment::{find_experiment, ExperimentConfig, RunContext, RunOutput};
use crate::surface::catalog::{BODY_NAMES, PATCH_NAMES};
use crate::Result;

/// Run the configured experiment into `out_dir`; returns its pass verdict.
pub fn run_to_dir(config: &ExperimentConfig, out_dir: &Path, seed: u64) -> Result<bool> {
    config.validate()?;
    let experiment = find_experiment(&config.experiment)?;
    let ctx = RunContext {
        config,
        seed,
        out_dir,
    };
    let output = experiment.run(&ctx)?;
    write_run(out_dir, config, seed, &output)?;
    Ok(output.pass)
}

/// Write records.csv, summary.json and manifest.json for one finished run.
pub(crate) fn write_run(
    dir: &Path,
    config: &ExperimentConfig,
    seed: u64,
    output: &RunOutput,
) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut csv = String::new();
    csv.push_str(&output.header.join(","));
    csv.push('\n');
    for row in &output.rows {
        debug_assert_eq!(row.len(), output.header.len());
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    fs::write(dir.join("records.csv"), csv)?;

    let mut summary = output.summary.clone();
    summary.insert("experiment".into(), Value::from(config.experiment.clone()));
    summary.insert("pass".into(), Value::from(output.pass));
    summary.insert(
        "warnings".into(),
        Value::Array(output.warnings.iter().map(|w| Value::from(w.clone())).collect()),
    );
    summary.insert("thresholds".into(), thresholds_value(config));
    fs::write(dir.join("summary.json"), pretty(&Value::Object(summary)))?;

    let mut manifest = Map::new();
    manifest.insert("experiment".into(), Value::from(config.experiment.clone()));
    manifest.insert(
        "config".into(),
        serde_json::to_value(config).expect("config serializes"),
    );
    manifest.insert("seed".into(), Value::from(seed));
    manifest.insert("thresholds".into(), thresholds_value(config));
    let mut catalog = Map::new();
    catalog.insert(
        "crate_version".into(),
        Value::from(env!("CARGO_PKG_VERSION")),
    );
    catalog.insert(
        "patches".into(),
        Value::Array(PATCH_NAMES.iter().map(|&n| Value::from(n)).collect()),
    );
    catalog.insert(
        "bodies".into(),
        Value::Array(BODY_NAMES.iter().map(|&n| Value::from(n)).collect()),
    );
    manifest.insert("catalog".into(), Value::Object(catalog));
    fs::write(dir.join("manifest.json"), pretty(&Value::Object(manifest)))?;
    Ok(())
}

fn thresholds_value(config: &ExperimentConfig) -> Value {
    serde_json::to_value(config.thresholds).expect("thresholds serialize")
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    text
}
