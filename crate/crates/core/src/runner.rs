//! Runs a configured scenario and reads and writes its output directory.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::Serialize;

use crate::bundle::BundleState;
use crate::config::RunConfig;
use crate::error::{FlowError, Result};
use crate::flow::{run, singularity_profile, RunOptions, SingularityProfile, Trajectory};
use crate::functionals::{
    conjugate_heat_backward, diameter_diagnostics, w_plus_series, ConjugateHeatField, DiagnosticsRecord, DiameterSample,
    CSV_COLUMNS,
};
use crate::holonomy::{classify_real, HolonomyClass};
use crate::scenario::{bundle_state, warped_state};
use crate::snapshot::{read_snapshots, write_snapshots, Snapshot};
use crate::spd::translation_length;
use crate::verify::{verify_bounds, RunMeta, VerificationReport};
use crate::warped::{SurfaceMetric, WarpedState};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const META_FILE: &str = "meta.json";
pub const CONFIG_FILE: &str = "config.ini";
pub const PROFILE_FILE: &str = "profile.json";
pub const REPORT_FILE: &str = "report.json";
pub const DIAMETER_FILE: &str = "diameter.json";

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub meta: RunMeta,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub profile: Option<SingularityProfile>,
    pub report: Option<VerificationReport>,
    /// Torus runs only.
    pub diameters: Vec<DiameterSample>,
}

/// Runs the scenario in memory; nothing is written.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let opts = RunOptions { snapshot_dt: cfg.snapshot_dt, full_diagnostics: cfg.full_diagnostics };
    let p = cfg.scenario;
    let mut meta = RunMeta {
        scenario: p.name().into(),
        topology: String::new(),
        mode: cfg.mode,
        euler_characteristic: None,
        holonomy_class: None,
        translation_length: None,
        t_start: 0.0,
        t_origin: 0.0,
        expected_stop: p.expected_stop(),
        stop_reason: p.expected_stop(),
        curvature_scale_invariant: p.curvature_scale_invariant(),
        conjugate_heat_mass_drift: None,
    };
    let mut diameters = Vec::new();
    let (records, snapshots, profile) = if p.is_bundle() {
        let init = bundle_state(p, cfg.n, &cfg.initial)?;
        let class = classify_real(&init.twist);
        meta.topology = "bundle".into();
        meta.holonomy_class = Some(class);
        meta.translation_length = (class == HolonomyClass::Hyperbolic).then(|| translation_length(&init.twist));
        let traj = run(init, &cfg.controller, cfg.mode, &opts)?;
        let mut records = traj.records.clone();
        if cfg.conjugate_heat {
            let (series, drift) = conjugate_heat_w_plus(&traj)?;
            meta.conjugate_heat_mass_drift = Some(drift);
            attach_w_plus(&mut records, &series);
        }
        meta.stop_reason = traj.stop_reason;
        let snaps = traj.snapshots.iter().map(Snapshot::from).collect();
        (records, snaps, None)
    } else {
        let init = warped_state(p, cfg.n, &cfg.initial)?;
        meta.topology = match init.metric {
            SurfaceMetric::Torus(_) => "torus".into(),
            SurfaceMetric::Sphere(_) => "sphere-rotsym".into(),
        };
        meta.euler_characteristic = Some(init.metric.euler_characteristic());
        let traj = run(init, &cfg.controller, cfg.mode, &opts)?;
        let profile = singularity_profile(&traj).ok();
        diameters = diameter_diagnostics(&traj)?;
        meta.stop_reason = traj.stop_reason;
        let snaps = traj.snapshots.iter().map(Snapshot::from).collect();
        (traj.records, snaps, profile)
    };
    let first = records.first().expect("a trajectory has its initial row");
    meta.t_start = first.t;
    meta.t_origin = match first.max_energy_density {
        Some(e) if p.is_bundle() => (first.t - 2.0 / e).max(0.0),
        _ => first.t,
    };
    let report = if cfg.verify.enabled {
        Some(verify_bounds(&records, &meta, &cfg.verify.checks, &cfg.verify.tolerances)?)
    } else {
        None
    };
    Ok(RunOutcome { config: cfg.clone(), meta, records, snapshots, profile, report, diameters })
}

/// `W₊` at every snapshot of a modified-flow bundle trajectory, paired with
/// the backward conjugate heat solution from `ũ = 1/L`, and the largest
/// relative mass drift of that solution.
pub fn conjugate_heat_w_plus(traj: &Trajectory<BundleState>) -> Result<(Vec<(f64, f64)>, f64)> {
    let terminal = ConjugateHeatField::terminal(traj.final_state());
    let fields = conjugate_heat_backward(traj, &terminal)?;
    let m_end = terminal.mass(&traj.final_state().gyy);
    let drift = traj
        .snapshots
        .iter()
        .zip(&fields)
        .map(|(s, u)| (u.mass(&s.gyy) - m_end).abs() / m_end)
        .fold(0.0, f64::max);
    Ok((w_plus_series(traj, &fields)?, drift))
}

fn attach_w_plus(records: &mut [DiagnosticsRecord], series: &[(f64, f64)]) {
    let mut i = 0;
    for &(t, w) in series {
        while i < records.len() && records[i].t < t {
            i += 1;
        }
        if i < records.len() && records[i].t == t {
            records[i].w_plus = Some(w);
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    std::io::Write::write_all(&mut f, b"\n")?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(FlowError::Format(format!("{} does not have the diagnostics columns", path.display())));
    }
    r.deserialize().map(|row| row.map_err(FlowError::from)).collect()
}

pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_diagnostics(&dir.join(DIAGNOSTICS_FILE), &outcome.records)?;
    write_snapshots(BufWriter::new(File::create(dir.join(SNAPSHOTS_FILE))?), &outcome.snapshots)?;
    write_json(&dir.join(META_FILE), &outcome.meta)?;
    fs::write(dir.join(CONFIG_FILE), outcome.config.to_text())?;
    if let Some(p) = &outcome.profile {
        write_json(&dir.join(PROFILE_FILE), p)?;
    }
    if let Some(r) = &outcome.report {
        write_json(&dir.join(REPORT_FILE), r)?;
    }
    if !outcome.diameters.is_empty() {
        write_json(&dir.join(DIAMETER_FILE), &outcome.diameters)?;
    }
    Ok(())
}

pub fn read_meta(dir: &Path) -> Result<RunMeta> {
    Ok(serde_json::from_reader(BufReader::new(File::open(dir.join(META_FILE))?))?)
}

pub fn read_snapshot_file(dir: &Path) -> Result<Vec<Snapshot>> {
    read_snapshots(BufReader::new(File::open(dir.join(SNAPSHOTS_FILE))?))
}

/// Rescales every stored snapshot and diagnostics row of a run directory.
pub fn rescale_outputs(src: &Path, dst: &Path, s: f64, kind: crate::flow::RescaleKind) -> Result<()> {
    use crate::flow::Rescale;
    let records = read_diagnostics(&src.join(DIAGNOSTICS_FILE))?;
    let snaps = read_snapshot_file(src)?;
    let rescaled: Vec<Snapshot> = snaps
        .iter()
        .map(|snap| match snap {
            Snapshot::Bundle { .. } => Ok(Snapshot::from(&BundleState::try_from(snap)?.rescale(s, kind)?)),
            _ => Ok(Snapshot::from(&WarpedState::try_from(snap)?.rescale(s, kind)?)),
        })
        .collect::<Result<_>>()?;
    let mut meta = read_meta(src)?;
    meta.t_start /= s;
    meta.t_origin /= s;
    meta.translation_length = meta.translation_length.map(|c| c / s.sqrt());
    fs::create_dir_all(dst)?;
    let rows: Vec<DiagnosticsRecord> = records.iter().map(|r| r.rescaled(s, kind)).collect();
    write_diagnostics(&dst.join(DIAGNOSTICS_FILE), &rows)?;
    write_snapshots(BufWriter::new(File::create(dst.join(SNAPSHOTS_FILE))?), &rescaled)?;
    write_json(&dst.join(META_FILE), &meta)?;
    Ok(())
}
