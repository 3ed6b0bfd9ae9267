use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyguard_core::activation::{threshold_sweep, ActivationState};
use polyguard_core::simulator::{ramp_levels, run_with, Policy, PolicySpec, SimConfig, Simulation};
use polyguard_core::{Point, Polygon, Scene};
use serde::Deserialize;

use crate::svg;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, unwritable output.
    Input(String),
    /// A checked property failed.
    Invariant(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Invariant(_) => 1,
            Self::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) => write!(f, "{m}"),
            Self::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn load_scene(path: &Path) -> Result<Scene, CliError> {
    let loaded = Polygon::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if loaded.reversed {
        eprintln!("note: {} is clockwise; vertex order reversed", path.display());
    }
    Scene::new(loaded.polygon).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("--{name} must be positive, got {v}")))
    }
}

pub fn deploy(input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let scene = load_scene(input)?;
    let report = scene.deployment.check(&scene.tri);
    let doc = serde_json::json!({
        "summary": {
            "n": report.n,
            "candidates": report.candidates,
            "candidate_bound": report.candidate_bound,
            "diagonal_guards": report.diagonals,
            "diagonal_bound": report.diagonal_bound,
            "vertex_guards": scene.vertex_guard_count(),
            "bounds_ok": report.ok(),
            "check": report,
        },
        "deployment": scene.deployment,
    });
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    match out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    eprintln!(
        "n={} |S_c|={} (bound {}) |S_h|={} (bound {}) vertex guards={} check={}",
        report.n,
        report.candidates,
        report.candidate_bound,
        report.diagonals,
        report.diagonal_bound,
        scene.vertex_guard_count(),
        if report.ok() { "ok" } else { "FAILED" }
    );
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("deployment check failed: {report:?}")))
    }
}

pub fn analyze(input: &Path, out: &Path, r_max: f64, r_step: f64, plot: bool) -> Result<(), CliError> {
    positive("r-step", r_step)?;
    if !(r_max.is_finite() && r_max >= 0.0) {
        return Err(CliError::Input(format!("--r-max must be non-negative, got {r_max}")));
    }
    let scene = load_scene(input)?;
    ensure_dir(out)?;
    let stairs = threshold_sweep(&scene, r_max, r_step);

    let mut csv = String::from("r,active_count\n");
    for p in &stairs.points {
        csv.push_str(&format!("{},{}\n", p.r, p.active));
    }
    write_file(&out.join("staircase.csv"), &csv)?;

    let mut events = String::new();
    for e in &stairs.events {
        events.push_str(&serde_json::to_string(e).expect("json"));
        events.push('\n');
    }
    write_file(&out.join("events.jsonl"), &events)?;

    let mut top = ActivationState::new(&scene, r_max);
    top.update_active_guards(&scene, r_max);
    let failing = top.model().failing(&scene);
    let labels = &top.model().classification.labels;
    let monotone = stairs.points.windows(2).all(|w| w[0].active <= w[1].active);
    let doc = serde_json::json!({
        "r_max": r_max,
        "r_step": r_step,
        "thresholds": stairs.thresholds,
        "saturation": stairs.saturation(),
        "vertex_guards": stairs.vertex_guards,
        "monotone": monotone,
        "failing_at_r_max": failing,
        "safe_at_r_max": labels.safe_count(),
        "triangles": scene.tri.triangle_count(),
    });
    write_file(&out.join("thresholds.json"), &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
    if plot {
        write_file(&out.join("staircase.svg"), &svg::staircase(&stairs, r_max))?;
    }
    for t in &stairs.thresholds {
        println!("r = {:.4} -> {} active", t.r, t.active);
    }
    println!("saturation {} of {} vertex guards", stairs.saturation(), stairs.vertex_guards);

    if !monotone {
        return Err(CliError::Invariant("staircase is not monotone".into()));
    }
    if stairs.saturation() > stairs.vertex_guards {
        return Err(CliError::Invariant("more active guards than vertex guards".into()));
    }
    if !failing.is_empty() {
        return Err(CliError::Invariant(format!("triangles {failing:?} fail at r = {r_max}")));
    }
    Ok(())
}

/// Policy file: a policy plus optional start position and initial ratio.
#[derive(Deserialize)]
struct PolicyFile {
    #[serde(flatten)]
    policy: PolicySpec,
    #[serde(default)]
    start: Option<Point>,
    #[serde(default)]
    r0: Option<f64>,
}

pub struct SimulateOptions {
    pub input: PathBuf,
    pub out: PathBuf,
    pub policy: Option<PathBuf>,
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
    pub r_max: f64,
}

pub fn simulate(o: &SimulateOptions) -> Result<(), CliError> {
    positive("dt", o.dt)?;
    if !(o.duration.is_finite() && o.duration >= 0.0) {
        return Err(CliError::Input(format!("--duration must be non-negative, got {}", o.duration)));
    }
    let scene = Arc::new(load_scene(&o.input)?);
    let file = match &o.policy {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => PolicyFile {
            policy: PolicySpec::Ramp {
                levels: ramp_levels(8, o.r_max, o.seed),
                phase_steps: 600,
                settle_steps: 30,
            },
            start: None,
            r0: None,
        },
    };
    let start = file.start.unwrap_or_else(|| scene.tri.centroid(&scene.polygon, 0));
    if !scene.polygon.contains(start) {
        return Err(CliError::Input(format!("start ({}, {}) lies outside the polygon", start.x, start.y)));
    }
    let config = SimConfig {
        dt: o.dt,
        ..SimConfig::default()
    };
    let mut policy = Policy::spawn(file.policy, o.seed).map_err(|e| CliError::Input(format!("policy: {e}")))?;
    let mut sim = Simulation::new(Arc::clone(&scene), config, start, file.r0.unwrap_or(0.0).max(0.0));

    ensure_dir(&o.out)?;
    let trace_path = o.out.join("trace.jsonl");
    let mut trace = BufWriter::new(File::create(&trace_path).map_err(|e| io_err(&trace_path, e))?);
    let mut write_error = None;
    let steps = (o.duration / o.dt).round() as u64;
    let report = run_with(&mut sim, &mut policy, steps, |rec| {
        if write_error.is_none() {
            let line = serde_json::to_string(rec).expect("json");
            if let Err(e) = writeln!(trace, "{line}") {
                write_error = Some(e);
            }
        }
    });
    if let Some(e) = write_error {
        return Err(io_err(&trace_path, e));
    }
    trace.flush().map_err(|e| io_err(&trace_path, e))?;
    write_file(
        &o.out.join("report.json"),
        &(serde_json::to_string_pretty(&report).expect("json") + "\n"),
    )?;
    println!(
        "{} steps, {} coverage and {} visibility violations, {} activations, {} deactivations",
        report.steps,
        report.coverage_violations,
        report.visibility_violations,
        report.activations,
        report.deactivations
    );
    if let Some(e) = policy.error {
        return Err(CliError::Input(format!("policy: {e}")));
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "{} coverage and {} visibility violations",
            report.coverage_violations, report.visibility_violations
        )))
    }
}
