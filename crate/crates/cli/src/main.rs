use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpj_cli::config::{self, ProfileSpec, RunConfig, SweepConfig};
use gpj_cli::{run, sweep, CliError};
use gpj_core::ProfileKind;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gpj", version, about = "Blow-up and global existence for the generalized Proudman-Johnson equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify, solve the clock ODE and write trajectory, snapshots and report.
    Simulate(RunArgs),
    /// Print the criteria report.
    Classify(RunArgs),
    /// Compare the Lagrangian solution with the Eulerian vorticity solver.
    Xcheck(RunArgs),
    /// Print the closed-form values that apply, evaluated at --t-end.
    Oracle(RunArgs),
    /// Regime map over several values of a and profiles.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long)]
    profile: Option<ProfileKind>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Labels per snapshot.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value = "gpj-out")]
    out: PathBuf,
    /// Run the Eulerian cross-check as part of `simulate`.
    #[arg(long)]
    xcheck: bool,
    /// Accepted for symmetry with `sweep`; single runs are sequential.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration; flags extend or override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Value of a; repeat for several.
    #[arg(long, allow_negative_numbers = true)]
    a: Vec<f64>,
    /// Profile kind; repeat for several.
    #[arg(long)]
    profile: Vec<ProfileKind>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value = "gpj-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn run_config(args: &RunArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &args.config {
        Some(path) => config::load::<RunConfig>(path)?,
        None => {
            let a = args.a.ok_or_else(|| CliError::Config("either --config or --a is required".into()))?;
            let spec = ProfileSpec { kind: ProfileKind::Parabola, gamma: 1.0, n_modes: None, samples_path: None };
            (RunConfig::new(a, spec, 1.0), PathBuf::new())
        }
    };
    if let Some(a) = args.a {
        cfg.a = a;
    }
    if let Some(kind) = args.profile {
        cfg.profile.kind = kind;
    }
    if let Some(g) = args.gamma {
        cfg.profile.gamma = g;
    }
    if let Some(n) = args.modes {
        cfg.profile.n_modes = Some(n);
    }
    if let Some(t) = args.t_end {
        cfg.t_end = t;
    }
    if let Some(n) = args.grid {
        cfg.grid_n = n;
    }
    if args.xcheck {
        cfg.xcheck.enabled = true;
    }
    Ok((cfg, base))
}

fn sweep_config(args: &SweepArgs) -> Result<(SweepConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &args.config {
        Some(path) => config::load::<SweepConfig>(path)?,
        None => (
            SweepConfig {
                a_values: Vec::new(),
                profiles: Vec::new(),
                t_end: 1.0,
                tolerances: Default::default(),
                n_improved: gpj_core::criteria::DEFAULT_N_IMPROVED,
            },
            PathBuf::new(),
        ),
    };
    if !args.a.is_empty() {
        cfg.a_values = args.a.clone();
    }
    if !args.profile.is_empty() {
        cfg.profiles = args
            .profile
            .iter()
            .map(|&kind| ProfileSpec { kind, gamma: args.gamma, n_modes: args.modes, samples_path: None })
            .collect();
    }
    if let Some(t) = args.t_end {
        cfg.t_end = t;
    }
    Ok((cfg, base))
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_text(text: &str) -> Result<(), CliError> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Config(format!("cannot write stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    print_text(&text)
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate(args) => {
            let (cfg, base) = run_config(&args)?;
            let report = run::simulate(&cfg, &base, &args.out)?;
            print_json(&report)?;
            Ok(report.exit_code())
        }
        Command::Classify(args) => {
            let (cfg, base) = run_config(&args)?;
            print_json(&run::classify_only(&cfg, &base)?)?;
            Ok(0)
        }
        Command::Xcheck(args) => {
            let (cfg, base) = run_config(&args)?;
            let rep = run::xcheck(&cfg, &base, &args.out)?;
            print_json(&rep)?;
            Ok(if rep.status == "numerical_failure" { gpj_cli::EXIT_NUMERICAL_FAILURE } else { 0 })
        }
        Command::Oracle(args) => {
            let (cfg, base) = run_config(&args)?;
            cfg.validate()?;
            let profile = cfg.profile.build(&base)?;
            print_json(&run::closed_forms(&profile, cfg.a, cfg.t_end)?)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let (cfg, base) = sweep_config(&args)?;
            let rows = sweep::sweep(&cfg, &base, args.workers)?;
            std::fs::create_dir_all(&args.out)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", args.out.display())))?;
            let path = Path::new(&args.out).join("regime_map.csv");
            sweep::write_rows(&path, &rows)?;
            print_text(&path.display().to_string())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GPJ_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(gpj_cli::EXIT_INVALID_CONFIG as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gpj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
