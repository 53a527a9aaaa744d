//! Consolidates a directory of finished runs into report.md plus two-column
//! .dat files for log-log plots.
//!
//! The input directory is expected to hold one subdirectory per run (the
//! layout `full-report` produces); each subdirectory contributes its
//! summary.json and records.csv. Corrupt runs are listed in the report and
//! skipped, and the whole pass is deterministic: subdirectories are visited
//! in name order and all numbers are re-emitted with the shortest-round-trip
//! formatter, so rerunning on the same inputs is byte-identical.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::{Error, Result};

struct RunDigest {
    label: String,
    experiment: String,
    summary: Map<String, Value>,
    records: Option<Records>,
}

struct Records {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub fn generate_report(dir: &Path) -> Result<()> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("cannot read report directory {dir:?}: {e}")))?;
    let mut labels: Vec<String> = entries
        .filter_map(|entry| {
            let entry = entry.ok()?;
            if entry.file_type().ok()?.is_dir() {
                Some(entry.file_name().to_string_lossy().into_owned())
            } else {
                None
            }
        })
        .collect();
    labels.sort();

    let mut digests = Vec::new();
    let mut problems = Vec::new();
    for label in labels {
        let run_dir = dir.join(&label);
        let summary_path = run_dir.join("summary.json");
        if !summary_path.exists() {
            continue;
        }
        let summary: Map<String, Value> = match fs::read_to_string(&summary_path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string()))
        {
            Ok(Value::Object(map)) => map,
            Ok(_) => {
                problems.push(format!("{label}: summary.json is not an object"));
                continue;
            }
            Err(e) => {
                problems.push(format!("{label}: unreadable summary.json ({e})"));
                continue;
            }
        };
        let experiment = match summary.get("experiment").and_then(Value::as_str) {
            Some(name) => name.to_string(),
            None => {
                problems.push(format!("{label}: summary.json names no experiment"));
                continue;
            }
        };
        let records = match fs::read_to_string(run_dir.join("records.csv")) {
            Ok(text) => parse_records(&text),
            Err(_) => {
                problems.push(format!("{label}: records.csv missing"));
                None
            }
        };
        digests.push(RunDigest {
            label,
            experiment,
            summary,
            records,
        });
    }
    if digests.is_empty() && problems.is_empty() {
        return Err(Error::Config(format!(
            "no run summaries found under {dir:?}"
        )));
    }

    let mut dat_files = Vec::new();
    for digest in &digests {
        if let Some(records) = &digest.records {
            if let Some((name, columns)) = plot_data(&digest.label, &digest.experiment, records) {
                let path = dir.join(&name);
                fs::write(&path, columns)?;
                dat_files.push((name, digest.label.clone()));
            }
        }
    }

    let mut md = String::from("# Experiment report\n\n");
    md.push_str("| run | experiment | case | sup_ratio | trend | pass |\n");
    md.push_str("|---|---|---|---|---|---|\n");
    for digest in &digests {
        let case = ["target", "body", "patch"]
            .iter()
            .find_map(|k| digest.summary.get(*k).and_then(Value::as_str))
            .unwrap_or("—");
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            digest.label,
            digest.experiment,
            case,
            cell(digest.summary.get("sup_ratio")),
            cell(digest.summary.get("trend")),
            cell(digest.summary.get("pass")),
        ));
    }

    for digest in &digests {
        md.push_str(&format!("\n## {}\n\n", digest.label));
        for (key, value) in &digest.summary {
            md.push_str(&format!("- {key}: {}\n", cell(Some(value))));
        }
    }

    if !dat_files.is_empty() {
        md.push_str("\n## Plot data\n\n");
        for (name, label) in &dat_files {
            md.push_str(&format!("- `{name}` — {label}\n"));
        }
    }
    if !problems.is_empty() {
        md.push_str("\n## Problems\n\n");
        for problem in &problems {
            md.push_str(&format!("- {problem}\n"));
        }
    }
    fs::write(dir.join("report.md"), md)?;
    Ok(())
}

fn parse_records(text: &str) -> Option<Records> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next()?.split(',').map(String::from).collect();
    let rows = lines
        .map(|line| line.split(',').map(String::from).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    if rows.iter().any(|row| row.len() != header.len()) {
        return None;
    }
    Some(Records { header, rows })
}

/// Markdown cell for a summary value: strings bare, everything else compact
/// JSON.
fn cell(value: Option<&Value>) -> String {
    match value {
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => "—".to_string(),
    }
}

/// Two-column plot data for one run; which columns depends on the
/// experiment. Returns the file name and its contents.
fn plot_data(label: &str, experiment: &str, records: &Records) -> Option<(String, String)> {
    let column = |name: &str| records.header.iter().position(|h| h == name);
    let to_f = |s: &String| s.parse::<f64>().ok();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    match experiment {
        "slab" => {
            let (t, m) = (column("t")?, column("measure")?);
            for row in &records.rows {
                pairs.push((to_f(&row[t])?, to_f(&row[m])?));
            }
        }
        "lattice" => {
            let (k, d) = (column("k")?, column("disc")?);
            for row in &records.rows {
                pairs.push((to_f(&row[k])?, to_f(&row[d])?.abs()));
            }
        }
        "decay" => {
            let (t, v) = (column("t")?, column("value")?);
            group_max(records, t, v, None, &mut pairs)?;
        }
        "thm11" | "thm12" | "uniform" | "union" | "lemma15" | "eq31" => {
            let (t, r) = (column("t")?, column("ratio")?);
            let keep: Option<(usize, &[&str])> = match experiment {
                "lemma15" => Some((column("theorem")?, &["lemma15"][..])),
                _ => None,
            };
            group_max(records, t, r, keep, &mut pairs)?;
        }
        _ => return None,
    }
    if pairs.is_empty() {
        return None;
    }
    let mut out = String::new();
    for (x, y) in pairs {
        out.push_str(&format!("{x} {y}\n"));
    }
    Some((format!("{label}.dat"), out))
}

/// Per-t maximum of one column, preserving first-appearance order of t.
fn group_max(
    records: &Records,
    t_col: usize,
    y_col: usize,
    keep: Option<(usize, &[&str])>,
    pairs: &mut Vec<(f64, f64)>,
) -> Option<()> {
    let mut order: Vec<f64> = Vec::new();
    let mut best: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    for row in &records.rows {
        if let Some((col, tokens)) = keep {
            if !tokens.contains(&row[col].as_str()) {
                continue;
            }
        }
        let t = row[t_col].parse::<f64>().ok()?;
        let y = row[y_col].parse::<f64>().ok()?;
        match best.entry(t.to_bits()) {
            std::collections::hash_map::Entry::Occupied(mut entry) => {
                let current = entry.get_mut();
                *current = current.max(y);
            }
            std::collections::hash_map::Entry::Vacant(entry) => {
                order.push(t);
                entry.insert(y);
            }
        }
    }
    for t in order {
        pairs.push((t, best[&t.to_bits()]));
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_to_dir, ExperimentConfig};

    #[test]
    fn report_covers_runs_and_reruns_identically() {
        let dir = tempfile::tempdir().unwrap();
        let lattice = ExperimentConfig::from_json(
            r#"{
                "experiment": "lattice",
                "body": {"name": "disk"},
                "lattice_grid": {"k_lo": 5, "k_hi": 400, "count": 60}
            }"#,
        )
        .unwrap();
        run_to_dir(&lattice, &dir.path().join("lattice-disk"), 0).unwrap();
        let slab = ExperimentConfig::from_json(
            r#"{
                "experiment": "slab",
                "body": {"name": "disk"},
                "alpha": 0.5,
                "grid": {"t_lo": 100.0, "t_hi": 10000.0, "points_per_decade": 8}
            }"#,
        )
        .unwrap();
        run_to_dir(&slab, &dir.path().join("slab-disk"), 0).unwrap();
        fs::create_dir(dir.path().join("broken")).unwrap();
        fs::write(dir.path().join("broken/summary.json"), b"{ not json").unwrap();

        generate_report(dir.path()).unwrap();
        let report = fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(report.contains("| lattice-disk | lattice | disk |"));
        assert!(report.contains("| slab-disk | slab | disk |"));
        assert!(report.contains("## Problems"));
        assert!(report.contains("broken: unreadable summary.json"));

        let disc = fs::read_to_string(dir.path().join("lattice-disk.dat")).unwrap();
        assert_eq!(disc.lines().count(), 60);
        assert!(disc.lines().all(|l| l.split(' ').count() == 2));
        let slab_dat = fs::read_to_string(dir.path().join("slab-disk.dat")).unwrap();
        assert_eq!(slab_dat.lines().count(), 17);

        let before = fs::read(dir.path().join("report.md")).unwrap();
        generate_report(dir.path()).unwrap();
        assert_eq!(before, fs::read(dir.path().join("report.md")).unwrap());
    }

    #[test]
    fn a_directory_without_summaries_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            generate_report(dir.path()),
            Err(Error::Config(_))
        ));
        fs::create_dir(dir.path().join("empty-run")).unwrap();
        assert!(generate_report(dir.path()).is_err());
    }
}
