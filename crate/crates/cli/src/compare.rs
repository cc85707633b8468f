use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use terragait_core::ingest::write_atomic;
use terragait_core::metrics::sample_mean;
use terragait_core::pipeline::TrialSummary;
use terragait_core::ComparisonReport;

use crate::config::{stamp, LoadedReferences};
use crate::{Failure, Settings};

/// Every `summary.json` below `root`, in sorted path order.
fn find_summaries(root: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if root.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let entries = std::fs::read_dir(&dir).with_context(|| format!("reading {}", dir.display()))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "summary.json") {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Participant id to per-metric mean over that participant's trials.
fn participant_means(root: &Path) -> anyhow::Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let mut trials: BTreeMap<String, Vec<TrialSummary>> = BTreeMap::new();
    for path in find_summaries(root)? {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let s = TrialSummary::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        trials.entry(s.participant_id.clone()).or_default().push(s);
    }
    if trials.is_empty() {
        bail!("no summary.json found under {}", root.display());
    }
    Ok(trials
        .into_iter()
        .map(|(id, list)| {
            let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for s in &list {
                for (k, v) in &s.metrics {
                    values.entry(k.clone()).or_default().push(*v);
                }
            }
            (id, values.into_iter().map(|(k, v)| (k, sample_mean(&v))).collect())
        })
        .collect())
}

fn label_of(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn run(
    set_a: &Path,
    set_b: &Path,
    label_a: Option<String>,
    label_b: Option<String>,
    s: &Settings,
) -> Result<(), Failure> {
    let (a, b) = (participant_means(set_a)?, participant_means(set_b)?);
    let label_a = label_a.unwrap_or_else(|| label_of(set_a));
    let label_b = label_b.unwrap_or_else(|| label_of(set_b));
    let paired: Vec<String> = a.keys().filter(|k| b.contains_key(*k)).cloned().collect();
    let excluded: Vec<String> = a.keys().chain(b.keys()).filter(|k| !paired.contains(k)).cloned().collect();
    for id in &excluded {
        let side = if a.contains_key(id) { &label_b } else { &label_a };
        log::warn!("participant {id} has no trials under {side}; excluded");
    }
    if paired.is_empty() {
        return Err(anyhow!("no participant appears in both sets").into());
    }
    let metrics: BTreeSet<&String> = paired.iter().flat_map(|id| a[id].keys().chain(b[id].keys())).collect();
    let mut report = ComparisonReport::new(&label_a, &label_b, paired.clone(), excluded);
    for m in metrics {
        let (xs, ys): (Vec<f64>, Vec<f64>) = paired
            .iter()
            .filter_map(|id| Some((*a[id].get(m)?, *b[id].get(m)?)))
            .unzip();
        report.push_metric(m, &xs, &ys);
    }
    let refs = LoadedReferences::load(&s.config)?;
    let hash = refs.config_hash(&s.config, &format!("compare {label_a} {label_b}"));
    let mut json = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
    json.as_object_mut().expect("report is an object").insert("config_hash".into(), hash.clone().into());
    let mut text = serde_json::to_string_pretty(&json).map_err(anyhow::Error::from)?;
    text.push('\n');
    for (name, body) in [("comparison.csv", stamp(&hash, &report.to_csv())), ("comparison.json", text)] {
        let path = s.out.join(name);
        write_atomic(&path, &body).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut by_reason: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (metric, reason) in &report.skipped {
        by_reason.entry(reason).or_default().push(metric);
    }
    for (reason, metrics) in by_reason {
        log::warn!("not compared ({reason}): {}", metrics.join(", "));
    }
    Ok(())
}
