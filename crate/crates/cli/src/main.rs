use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use softguide_cli::config::Format;
use softguide_cli::output::{write_all, Render};
use softguide_cli::{commands, CliError, RunConfig, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "softguide", version, about = "Trapped states and resonances near a soft waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trap level, counted from the ground state.
    #[arg(long, global = true, default_value_t = 1)]
    n: usize,
    /// Format printed to stdout and written; overrides `output.formats`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bound states of the transverse profile.
    Modes,
    /// Bound states of the isolated trap.
    Trap,
    /// Resonance pole at the configured placement.
    Pole,
    /// Pole solves over the rho grid with decay fits.
    Sweep,
    /// Golden-rule width by three routes.
    Goldenrule,
}

fn workers() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let formats = cli.format.map_or_else(|| cfg.output.formats.clone(), |f| vec![f]);
    let shown = formats.first().copied().unwrap_or(Format::Json);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| -> Result<(), CliError> {
        let n = cli.n;
        match cli.command {
            Command::Modes => {
                let rows = commands::modes(&cfg)?;
                if rows.is_empty() {
                    eprintln!("warning: the profile binds no transverse modes");
                }
                emit(&rows, &out, "modes", &formats, shown)
            }
            Command::Trap => emit(&commands::trap(&cfg)?, &out, "trap", &formats, shown),
            Command::Pole => emit(&commands::pole(&cfg, n)?, &out, &format!("pole-n{n}"), &formats, shown),
            Command::Goldenrule => emit(&commands::golden_rule(&cfg, n)?, &out, &format!("goldenrule-n{n}"), &formats, shown),
            Command::Sweep => {
                let outcome = commands::sweep(&cfg, n, &out)?;
                match shown {
                    Format::Json => print!("{}", softguide_cli::output::json(&outcome.report)?),
                    Format::Csv => print!("{}", std::fs::read_to_string(&outcome.results)?),
                }
                eprintln!("results: {}", outcome.results.display());
                eprintln!("fit report: {}", outcome.report_path.display());
                Ok(())
            }
        }
    })
}

fn emit<R: Render + ?Sized>(value: &R, out: &std::path::Path, stem: &str, formats: &[Format], shown: Format) -> Result<(), CliError> {
    write_all(value, out, stem, formats)?;
    print!("{}", value.render(shown)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
