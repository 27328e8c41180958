//! `dampwave` command-line front end.
//!
//! Exit status: 0 success, 1 tolerance or physics failure, 2 usage or
//! configuration error. Several `--config` files run concurrently, each in
//! its own directory `<out>/<config stem>/<subcommand>/`.

mod commands;
mod manifest;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dampwave::model::{validate_scenario, ScenarioConfig};

use commands::{Failure, Options, Verdict};
use manifest::{unix_now, OutputLog, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "dampwave", version, about = "Quantized damped transversal waves: verification, evaluation and evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the generator potential and check H = H' = 0.
    CanonicalVerify {
        #[command(flatten)]
        run: RunArgs,
        /// Bound on max|H| relative to max(p2^2/2); defaults to canonical.tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Kick the admissible initial state off the H = 0 branch.
        #[arg(long)]
        negative_control: bool,
    },
    /// Sample a closed-form family on the scenario grid.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated times in [0, T].
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        times: Option<Vec<f64>>,
    },
    /// Residual of the state equation for the analytic families.
    Residual {
        #[command(flatten)]
        run: RunArgs,
        /// One residual family, or `all`.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        times: Option<Vec<f64>>,
        /// Residual budget for the certified families.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Airy phase variant: auto, as_printed or berry_balazs.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Split-step evolution with metrics and figure-source grids.
    Evolve {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario JSON; repeat to run several scenarios concurrently.
    /// Without it the built-in demo scenario is used.
    #[arg(long = "config", value_name = "PATH")]
    configs: Vec<PathBuf>,
    /// Output root.
    #[arg(long, value_name = "DIR", env = "DAMPWAVE_OUT", default_value = "dampwave_out")]
    out: PathBuf,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CanonicalVerify { .. } => "canonical-verify",
            Command::Evaluate { .. } => "evaluate",
            Command::Residual { .. } => "residual",
            Command::Evolve { .. } => "evolve",
        }
    }

    fn split(&self) -> (&RunArgs, Options) {
        match self {
            Command::CanonicalVerify {
                run,
                tolerance,
                negative_control,
            } => (
                run,
                Options {
                    tolerance: *tolerance,
                    negative_control: *negative_control,
                    ..Options::default()
                },
            ),
            Command::Evaluate { run, family, times } => (
                run,
                Options {
                    family: family.clone(),
                    times: times.clone(),
                    ..Options::default()
                },
            ),
            Command::Residual {
                run,
                family,
                times,
                tolerance,
                variant,
            } => (
                run,
                Options {
                    family: family.clone(),
                    times: times.clone(),
                    tolerance: *tolerance,
                    variant: variant.clone(),
                    ..Options::default()
                },
            ),
            Command::Evolve { run } => (run, Options::default()),
        }
    }
}

struct Job {
    config: Option<PathBuf>,
    dir: PathBuf,
}

/// One run directory per config, named after the file stem; clashing stems
/// get a numeric suffix.
fn plan_jobs(run: &RunArgs, subcommand: &str) -> Vec<Job> {
    if run.configs.is_empty() {
        return vec![Job {
            config: None,
            dir: run.out.join("default").join(subcommand),
        }];
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    run.configs
        .iter()
        .map(|path| {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into());
            let count = seen.entry(stem.clone()).or_insert(0);
            *count += 1;
            let name = if *count == 1 { stem } else { format!("{stem}-{count}") };
            Job {
                config: Some(path.clone()),
                dir: run.out.join(name).join(subcommand),
            }
        })
        .collect()
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, Failure> {
    let cfg = match path {
        Some(p) => ScenarioConfig::load(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => ScenarioConfig::default(),
    };
    validate_scenario(cfg).map_err(|e| Failure::Usage(format!("{}: {e}", path.map(|p| p.display().to_string()).unwrap_or_else(|| "default scenario".into()))))
}

fn dispatch(command: &Command, cfg: &ScenarioConfig, opts: &Options, log: &mut OutputLog) -> Result<Verdict, Failure> {
    match command {
        Command::CanonicalVerify { .. } => commands::canonical_verify(cfg, opts, log),
        Command::Evaluate { .. } => commands::evaluate(cfg, opts, log),
        Command::Residual { .. } => commands::residual(cfg, opts, log),
        Command::Evolve { .. } => commands::evolve(cfg, opts, log),
    }
}

fn run_job(command: &Command, opts: &Options, job: &Job, argv: &[String]) -> i32 {
    let label = job.config.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "default scenario".into());
    let started = unix_now();
    let cfg = match load_config(job.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{label}: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = std::fs::create_dir_all(&job.dir) {
        eprintln!("{label}: cannot create {}: {e}", job.dir.display());
        return 1;
    }
    let mut log = OutputLog::new(&job.dir);
    let code = match dispatch(command, &cfg, opts, &mut log) {
        Ok(v) => {
            println!("{} {label}: {} ({})", if v.passed { "PASS" } else { "FAIL" }, command.name(), v.summary);
            if v.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{label}: {} failed: {e}", command.name());
            e.exit_code()
        }
    };
    let manifest = log.entries().map(|files| RunManifest {
        tool: "dampwave".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: argv.to_vec(),
        subcommand: command.name().into(),
        config: job.config.as_ref().map(|p| p.display().to_string()),
        scenario: serde_json::to_value(&cfg).unwrap_or_default(),
        started_unix: started,
        finished_unix: unix_now(),
        exit_code: code,
        files,
    });
    match manifest.and_then(|m| m.write(&job.dir)) {
        Ok(_) => code,
        Err(e) => {
            eprintln!("{label}: writing manifest: {e:#}");
            code.max(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let (run, opts) = cli.command.split();
    let jobs = plan_jobs(run, cli.command.name());
    let codes: Vec<i32> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|job| s.spawn(|| run_job(&cli.command, &opts, job, &argv))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or(1)).collect()
    });
    ExitCode::from(codes.into_iter().max().unwrap_or(0) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clashing_stems_get_suffixes() {
        let run = RunArgs {
            configs: vec!["a/x.json".into(), "b/x.json".into(), "y.json".into()],
            out: "out".into(),
        };
        let dirs: Vec<_> = plan_jobs(&run, "evolve").into_iter().map(|j| j.dir).collect();
        assert_eq!(dirs, vec![PathBuf::from("out/x/evolve"), PathBuf::from("out/x-2/evolve"), PathBuf::from("out/y/evolve")]);
    }

    #[test]
    fn default_scenario_directory() {
        let run = RunArgs {
            configs: vec![],
            out: "o".into(),
        };
        assert_eq!(plan_jobs(&run, "residual")[0].dir, PathBuf::from("o/default/residual"));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
