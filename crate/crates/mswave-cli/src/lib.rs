//! Configuration, scenario orchestration and report emission for `mswave`.

pub mod config;
pub mod dump;
pub mod families;
pub mod identities;
pub mod report;
pub mod scenarios;

use clap::Parser;
use config::{split_overrides, ConfigError, RunConfig, Scenario};
use report::Status;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "mswave",
    about = "Modified wave operator runs for Maxwell-Schrodinger in Coulomb gauge"
)]
#[command(
    after_help = "Any key inside a section can be overridden as --section.key value, e.g. --grid.n 32 --time.t_max 1280"
)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// identities, fixed_point, decay_suite, finite_t0_crosscheck or energy_drift.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    out_dir: PathBuf,
    /// No per-iterate progress on stderr.
    #[arg(long)]
    quiet: bool,
}

fn reject(status: Status, reason: &str) -> i32 {
    let doc =
        serde_json::json!({ "status": status, "exit_code": status.exit_code(), "reason": reason });
    eprintln!("{doc}");
    status.exit_code()
}

fn config_status(e: &ConfigError) -> Status {
    match e {
        ConfigError::Read { .. } => Status::IoError,
        _ => Status::ConfigError,
    }
}

/// Parses the arguments, runs the scenario, writes the artifacts and
/// returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let (plain, overrides) = match split_overrides(&argv[1..]) {
        Ok(v) => v,
        Err(e) => return reject(Status::ConfigError, &e.to_string()),
    };
    let args = match Args::try_parse_from(std::iter::once(argv[0].clone()).chain(plain)) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::ConfigError.exit_code()
            } else {
                0
            };
        }
    };
    let mut cfg = match RunConfig::load(&args.config, &overrides) {
        Ok(c) => c,
        Err(e) => return reject(config_status(&e), &e.to_string()),
    };
    let Some(scenario) = Scenario::parse(&args.scenario) else {
        return reject(
            Status::ConfigError,
            &format!("unknown scenario {:?}", args.scenario),
        );
    };
    cfg.scenario = Some(scenario);
    cfg.out_dir = Some(args.out_dir.clone());
    if let Err(e) = cfg.validate() {
        return reject(Status::ConfigError, &e.to_string());
    }
    execute(&cfg, !args.quiet)
}

/// Runs a validated configuration and writes everything into its out_dir.
pub fn execute(cfg: &RunConfig, verbose: bool) -> i32 {
    let out_dir = cfg.out_dir.clone().expect("validated config has out_dir");
    if let Err(e) = std::fs::create_dir_all(&out_dir)
        .and_then(|_| std::fs::write(out_dir.join("config.toml"), cfg.to_toml()))
    {
        return reject(Status::IoError, &format!("{}: {e}", out_dir.display()));
    }
    let outcome = match scenarios::run_scenario(cfg, verbose) {
        Ok(o) => o,
        Err(e) => return reject(scenarios::status_of(&e), &e.to_string()),
    };
    if let (true, Some(traj)) = (cfg.checkpoints, &outcome.trajectory) {
        if let Err(e) = report::write_checkpoints(&out_dir.join("checkpoints"), cfg, traj) {
            return reject(Status::IoError, &e.to_string());
        }
    }
    if let Err(e) = report::emit(&out_dir, &outcome.report, &outcome.series) {
        return reject(Status::IoError, &format!("{}: {e}", out_dir.display()));
    }
    let _ = report::summary(&outcome.report, std::io::stdout().lock());
    outcome.report.exit_code
}
