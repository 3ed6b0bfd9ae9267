mod commands;
mod serve;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "polyguard", version, about = "Guard deployment, activation analysis and pursuit simulation in simple polygons")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deploy candidate vertices and diagonal guards and check the bounds.
    Deploy(DeployArgs),
    /// Sweep the speed ratio and report the activation staircase.
    Analyze(AnalyzeArgs),
    /// Run a headless pursuit simulation and audit every step.
    Simulate(SimulateArgs),
    /// Serve live sessions over websocket.
    Serve(ServeArgs),
}

#[derive(Args)]
struct DeployArgs {
    /// Polygon JSON file.
    #[arg(long, env = "POLYGUARD_INPUT")]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, env = "POLYGUARD_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, env = "POLYGUARD_INPUT")]
    input: PathBuf,
    /// Output directory.
    #[arg(long, env = "POLYGUARD_OUT", default_value = ".")]
    out: PathBuf,
    #[arg(long, env = "POLYGUARD_R_MAX", default_value_t = 2.0)]
    r_max: f64,
    #[arg(long, env = "POLYGUARD_R_STEP", default_value_t = 0.01)]
    r_step: f64,
    /// Also write the staircase plot as SVG.
    #[arg(long, env = "POLYGUARD_SVG")]
    svg: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, env = "POLYGUARD_INPUT")]
    input: PathBuf,
    /// Output directory.
    #[arg(long, env = "POLYGUARD_OUT", default_value = ".")]
    out: PathBuf,
    /// Policy JSON file; a seeded speed ramp when absent.
    #[arg(long, env = "POLYGUARD_POLICY")]
    policy: Option<PathBuf>,
    #[arg(long, env = "POLYGUARD_SEED", default_value_t = 0)]
    seed: u64,
    /// Simulated seconds.
    #[arg(long, env = "POLYGUARD_DURATION", default_value_t = 60.0)]
    duration: f64,
    #[arg(long, env = "POLYGUARD_DT", default_value_t = polyguard_core::simulator::DEFAULT_DT)]
    dt: f64,
    /// Largest ratio of the default ramp.
    #[arg(long, env = "POLYGUARD_R_MAX", default_value_t = 1.5)]
    r_max: f64,
}

#[derive(Args)]
struct ServeArgs {
    /// Polygon loaded into new sessions; the bundled 48-vertex example when absent.
    #[arg(long, env = "POLYGUARD_INPUT")]
    input: Option<PathBuf>,
    /// 0 picks a free port.
    #[arg(long, env = "POLYGUARD_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "POLYGUARD_DT", default_value_t = polyguard_core::simulator::DEFAULT_DT)]
    dt: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Deploy(a) => commands::deploy(&a.input, a.out.as_deref()),
        Cmd::Analyze(a) => commands::analyze(&a.input, &a.out, a.r_max, a.r_step, a.svg),
        Cmd::Simulate(a) => commands::simulate(&commands::SimulateOptions {
            input: a.input,
            out: a.out,
            policy: a.policy,
            seed: a.seed,
            duration: a.duration,
            dt: a.dt,
            r_max: a.r_max,
        }),
        Cmd::Serve(a) => serve::run(a.input.as_deref(), a.port, a.dt),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
