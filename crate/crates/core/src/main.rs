use clap::{Args, Parser, Subcommand};
use dplab::harness::{report_dir, run_scenario, HarnessError, Mode, Overrides, RunArtifact, ScenarioConfig, ScenarioKind};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Peakon stability lab for the Degasperis-Procesi equation.
///
/// Exit codes: 0 pass, 1 verdict fail, 2 usage or config error, 3 numeric failure.
#[derive(Parser, Debug)]
#[command(name = "dplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario named in the config.
    Simulate(RunArgs),
    /// Certificates on the initial data only; no time evolution.
    Verify(RunArgs),
    /// Run a `collision` scenario.
    Collide(RunArgs),
    /// Run a `blowup` scenario.
    Blowup(RunArgs),
    /// Rebuild plots and summary of an existing run directory.
    Report {
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    grid_l: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Reject unknown config keys (default).
    #[arg(long, overrides_with = "no_strict")]
    strict: bool,
    /// Warn about unknown config keys and ignore them.
    #[arg(long, overrides_with = "strict")]
    no_strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid_n: self.grid_n,
            grid_l: self.grid_l,
            seed: self.seed,
            t_end: self.t_end,
            out: self.out.clone(),
        }
    }
}

fn run(args: &RunArgs, mode: Mode, required: Option<ScenarioKind>) -> Result<RunArtifact, HarnessError> {
    let mut loaded = ScenarioConfig::load(&args.config, !args.no_strict)?;
    for key in &loaded.ignored {
        eprintln!("warning: ignoring unknown config key `{key}`");
    }
    if let Some(kind) = required {
        if loaded.config.kind != kind {
            return Err(HarnessError::Config(format!(
                "this subcommand runs `{}` scenarios, the config has `{}`",
                kind.name(),
                loaded.config.kind.name()
            )));
        }
    }
    loaded.config.apply(&args.overrides());
    run_scenario(&loaded, mode)
}

fn print_outcome(art: &RunArtifact, dir: &Path) {
    let word = match art.exit_code {
        0 => "pass",
        1 => "fail",
        _ => "numeric failure",
    };
    println!("{}: {word} -> {}", art.kind, dir.display());
    if !art.message.is_empty() {
        println!("{}", art.message);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run(a, Mode::Simulate, None).map(|art| (art, out_dir(a))),
        Command::Verify(a) => run(a, Mode::Verify, None).map(|art| (art, out_dir(a))),
        Command::Collide(a) => run(a, Mode::Simulate, Some(ScenarioKind::Collision)).map(|art| (art, out_dir(a))),
        Command::Blowup(a) => run(a, Mode::Simulate, Some(ScenarioKind::Blowup)).map(|art| (art, out_dir(a))),
        Command::Report { dir } => report_dir(dir).map(|art| (art, Some(dir.clone()))),
    };
    match result {
        Ok((art, dir)) => {
            print_outcome(&art, dir.as_deref().unwrap_or(Path::new(".")));
            ExitCode::from(art.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Output directory as the run resolved it; re-read so the message names the real path.
fn out_dir(a: &RunArgs) -> Option<PathBuf> {
    a.out.clone().or_else(|| ScenarioConfig::load(&a.config, false).ok().map(|l| l.config.output))
}
