use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use terragait_core::ingest::{parse_trial, write_atomic};
use terragait_core::pipeline::{
    analyze_trial, angle_table, curve_table, divergence_table, event_table, moment_table, stiffness_table,
    stride_table, References, TrialAnalysis, TrialSummary,
};
use terragait_core::{Side, Terrain, TrialMeta};

use crate::config::{stamp, LoadedReferences};
use crate::{Failure, Settings};

pub fn run(trials: &[PathBuf], s: &Settings) -> Result<(), Failure> {
    let refs = LoadedReferences::load(&s.config)?;
    let hash = refs.config_hash(&s.config, &format!("terrain={:?}", s.terrain));
    let dirs = bundle_dirs(trials, &s.out);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut results = Vec::with_capacity(trials.len());
    for chunk in trials.chunks(workers) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|t| scope.spawn(|| analyze_one(t, s, &refs))).collect();
            results.extend(handles.into_iter().map(|h| h.join().expect("analysis thread panicked")));
        });
    }
    let mut first_failure = None;
    for ((trial, dir), result) in trials.iter().zip(&dirs).zip(results) {
        let outcome = result.and_then(|a| {
            for w in &a.warnings {
                log::warn!("{}: {w}", trial.display());
            }
            write_bundle(&a, dir, &hash).map_err(Failure::Input)
        });
        if let Err(f) = outcome {
            let f = match f {
                Failure::Input(e) => Failure::Input(e.context(format!("trial {}", trial.display()))),
                Failure::Numerical(e) => Failure::Numerical(e.context(format!("trial {}", trial.display()))),
            };
            if first_failure.is_none() {
                first_failure = Some(f);
            } else {
                let (Failure::Input(e) | Failure::Numerical(e)) = f;
                eprintln!("error: {e:#}");
            }
        }
    }
    first_failure.map_or(Ok(()), Err)
}

fn analyze_one(meta_path: &Path, s: &Settings, refs: &LoadedReferences) -> Result<TrialAnalysis, Failure> {
    let mut meta = TrialMeta::from_path(meta_path).map_err(anyhow::Error::from)?;
    if let Some(t) = s.terrain {
        meta.terrain = t;
        if t == Terrain::Solid {
            meta.sand_depth_cm = None;
        }
    }
    if let (Some(d), Terrain::Sand) = (s.config.sand_depth_cm, meta.terrain) {
        meta.sand_depth_cm = Some(d);
    }
    let base = meta_path.parent().unwrap_or_else(|| Path::new("."));
    let record = parse_trial(&base.join(&meta.markers), &base.join(&meta.grf), &meta, &refs.schema)
        .map_err(terragait_core::Error::from)?;
    let references = References {
        schema: &refs.schema,
        table: &refs.table,
        calibration: &refs.calibration,
    };
    Ok(analyze_trial(&record, references, &s.config.analysis)?)
}

/// One trial writes straight into `out`; several get one subdirectory each,
/// named after the metadata file (or its directory for `trial.toml`).
fn bundle_dirs(trials: &[PathBuf], out: &Path) -> Vec<PathBuf> {
    if trials.len() == 1 {
        return vec![out.to_path_buf()];
    }
    let mut used = BTreeSet::new();
    trials
        .iter()
        .map(|t| {
            let stem = t.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let base = if stem == "trial" {
                t.parent()
                    .and_then(|p| p.file_name())
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or(stem)
            } else {
                stem
            };
            let mut name = base.clone();
            let mut k = 2;
            while !used.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            out.join(name)
        })
        .collect()
}

/// Knee moment against knee angle over the instrumented stride.
fn knee_loop_table(a: &TrialAnalysis) -> String {
    let mut out = String::from("time,side,knee_deg,knee_nmkg\n");
    let Some((side, start, end)) = a.instrumented else {
        return out;
    };
    let (m, ang) = (&a.moments[&side], &a.angles[&side]);
    for (i, &t) in m.times.iter().enumerate() {
        if t < start || t > end || !a.moments_known(side, i) {
            continue;
        }
        let _ = writeln!(out, "{t},{side},{},{}", ang.knee[i], m.knee[i] / m.body_mass);
    }
    out
}

fn write_bundle(a: &TrialAnalysis, dir: &Path, hash: &str) -> anyhow::Result<()> {
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        write_atomic(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    let summary = TrialSummary::from_analysis(a);
    let mut json = serde_json::to_value(&summary)?;
    json.as_object_mut()
        .ok_or_else(|| anyhow!("summary is not an object"))?
        .insert("config_hash".into(), hash.into());
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    write("summary.json", &text)?;
    let tables: [(&str, String); 8] = [
        ("moments.csv", moment_table(a)),
        ("angles.csv", angle_table(a)),
        ("events.csv", event_table(a)),
        ("strides.csv", stride_table(a)),
        ("curves.csv", curve_table(a)),
        ("knee_loop.csv", knee_loop_table(a)),
        ("stiffness.csv", stiffness_table(a)),
        ("divergences.csv", divergence_table(a)),
    ];
    for (name, body) in &tables {
        write(name, &stamp(hash, body))?;
    }
    debug_assert!(Side::BOTH.iter().all(|s| a.moments.contains_key(s)));
    Ok(())
}
