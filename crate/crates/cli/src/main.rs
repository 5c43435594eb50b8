use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chafem::config::RunConfig;
use chafem::estimators::{EstimatorKind, IndicatorMode};
use chafem::output::run_config;
use chafem::verify::{run_suite, SUITES};
use clap::{Parser, Subcommand};

/// Adaptive finite elements for the Cahn-Hilliard equation.
#[derive(Parser)]
#[command(name = "chafem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a preset (example1, example2, constant_one).
    Run {
        config: String,
        #[arg(long)]
        estimator: Option<EstimatorKind>,
        #[arg(long = "indicator-mode")]
        indicator_mode: Option<IndicatorMode>,
        /// Keep the initial mesh (no refinement or coarsening).
        #[arg(long)]
        fixed_mesh: bool,
        /// Use this constant step instead of time-step control.
        #[arg(long)]
        fixed_tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a verification battery: oracles, invariants, convergence, dominance.
    Verify { suite: String },
}

fn load(config: &str) -> Result<RunConfig, chafem::config::ConfigError> {
    let path = Path::new(config);
    if path.is_file() {
        RunConfig::load(path)
    } else {
        RunConfig::preset(config)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            estimator,
            indicator_mode,
            fixed_mesh,
            fixed_tau,
            out,
            set,
        } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let mut overrides: Vec<(String, String)> = Vec::new();
            if let Some(e) = estimator {
                overrides.push(("estimator".into(), e.to_string()));
            }
            if let Some(m) = indicator_mode {
                overrides.push(("mode".into(), m.to_string()));
            }
            if fixed_mesh {
                overrides.push(("fixed_mesh".into(), "true".into()));
            }
            if let Some(t) = fixed_tau {
                overrides.push(("fixed_tau".into(), t.to_string()));
            }
            if let Some(o) = out {
                overrides.push(("out".into(), o.display().to_string()));
            }
            for kv in &set {
                match kv.split_once('=') {
                    Some((k, v)) => overrides.push((k.trim().into(), v.trim().into())),
                    None => {
                        eprintln!("error: --set expects KEY=VALUE, got `{kv}`");
                        return ExitCode::from(2);
                    }
                }
            }
            for (k, v) in &overrides {
                if let Err(e) = cfg.apply(k, v) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            match run_config(&cfg) {
                Ok((s, _)) => {
                    println!("steps        {}", s.steps);
                    println!("final time   {:e}", s.final_time);
                    println!("energy       {:.10e} -> {:.10e}", s.initial_energy, s.final_energy);
                    println!("mesh         {} nodes, {} elements", s.nodes, s.elements);
                    println!("wall time    {:.3} s", s.wall_seconds);
                    println!("output       {}", cfg.out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Verify { suite } => {
            if !SUITES.contains(&suite.as_str()) {
                eprintln!("error: unknown suite `{suite}` (expected one of {})", SUITES.join(", "));
                return ExitCode::from(2);
            }
            let mut out = std::io::stdout();
            match run_suite(&suite, &mut out) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::FAILURE,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
