use std::path::Path;

use anyhow::Context;
use terragait_core::dynamics::synth::{synthesize_gait, GaitProfile};
use terragait_core::dynamics::write_moment_table;
use terragait_core::forces::{fit_calibration, parse_calibration_samples};
use terragait_core::gaitseg::write_event_table;
use terragait_core::ingest::{write_atomic, write_grf, write_markers};
use terragait_core::{Constants, Terrain};

use crate::config::{stamp, LoadedReferences};
use crate::{Failure, Settings};

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    write_atomic(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn calibrate(samples: &Path, s: &Settings) -> Result<(), Failure> {
    let text = std::fs::read_to_string(samples).with_context(|| format!("reading {}", samples.display()))?;
    let parsed = parse_calibration_samples(&text, &samples.display().to_string()).map_err(anyhow::Error::from)?;
    let curve = fit_calibration(&parsed).map_err(anyhow::Error::from)?;
    let refs = LoadedReferences::load(&s.config)?;
    let hash = refs.config_hash(&s.config, &text);
    write(&s.out, "calibration.csv", &stamp(&hash, &curve.to_csv()))?;
    let summary = curve.summary();
    write(&s.out, "calibration_summary.txt", &stamp(&hash, &summary))?;
    print!("{summary}");
    Ok(())
}

pub fn simulate(profile: Option<&Path>, s: &Settings) -> Result<(), Failure> {
    let mut p = match profile {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            GaitProfile::parse(&text).map_err(anyhow::Error::from)?
        }
        None => GaitProfile::default(),
    };
    if let Some(t) = s.terrain {
        p.terrain = t;
        if t == Terrain::Solid {
            p.sand_depth_cm = None;
        }
    }
    if let (Some(d), Terrain::Sand) = (s.config.sand_depth_cm, p.terrain) {
        p.sand_depth_cm = Some(d);
    }
    let refs = LoadedReferences::load(&s.config)?;
    let constants = Constants::new(s.config.analysis.gravity).map_err(anyhow::Error::from)?;
    // An infeasible profile is a problem with the input, not the pipeline.
    let trial = synthesize_gait(&p, &refs.table, &refs.calibration, &constants).map_err(anyhow::Error::from)?;
    let hash = refs.config_hash(&s.config, &toml::to_string(&p).expect("profile serializes"));
    write(&s.out, "trial.toml", &stamp(&hash, &trial.meta.to_toml()))?;
    write(&s.out, "markers.csv", &stamp(&hash, &write_markers(&trial.markers)))?;
    write(&s.out, "grf.csv", &stamp(&hash, &write_grf(&trial.grf)))?;
    write(
        &s.out,
        "truth_moments.csv",
        &stamp(&hash, &write_moment_table(trial.truth.values(), |_, _| true)),
    )?;
    write(&s.out, "truth_events.csv", &stamp(&hash, &write_event_table(&trial.events)))?;
    log::info!("wrote synthetic trial to {}", s.out.display());
    Ok(())
}
