use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use indoordim::engine::{dimension, scenario_ladder, DimensioningResult, SystemKind};
use indoordim::output::{write_deployment_csv, write_dimensioning_csv, write_manifest, Manifest};
use indoordim::scenario::{load_scenario, Scenario, PRESETS};
use indoordim::{oracle, Error, Result};

#[derive(Parser)]
#[command(
    name = "indoordim",
    version,
    about = "AP-density dimensioning for indoor wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every deployment on the grid ladder and write one row per (deployment, system).
    Run(RunArgs),
    /// Check a scenario file or preset and print the resolved configuration.
    Validate(ScenarioArgs),
    /// Write the minimum AP count per demand point for each system.
    Sweep(RunArgs),
    /// Run the brute-force reference checks and print the comparisons.
    Oracle {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: table1-open or table1-obstructed.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma-separated list of wifi-baseline, wifi-aggressive, static, zf-ideal, zf-erroneous.
    #[arg(long, value_delimiter = ',')]
    systems: Vec<String>,
    /// Output CSV path; `-` writes to stdout without a manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    snapshots: Option<usize>,
    /// Worker threads, or `auto`.
    #[arg(long, default_value = "auto")]
    threads: String,
}

fn resolve_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let base = match (&args.scenario, &args.preset) {
        (Some(path), _) => load_scenario(path)?,
        (None, Some(name)) => Scenario::preset(name)?,
        (None, None) => {
            return Err(Error::InvalidArgument(format!(
                "give --scenario <path> or --preset <{}>",
                PRESETS.join("|")
            )))
        }
    };
    base.with_env_overrides(std::env::vars())
}

fn parse_threads(s: &str) -> Result<usize> {
    if s == "auto" {
        return Ok(0);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::InvalidArgument(format!(
            "--threads expects a positive integer or `auto`, got `{s}`"
        ))),
    }
}

fn parse_systems(list: &[String]) -> Result<Vec<SystemKind>> {
    let systems: Vec<SystemKind> = list
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if systems.is_empty() {
        return Err(Error::InvalidArgument("--systems is empty".into()));
    }
    Ok(systems)
}

fn execute(args: &RunArgs, sweep: bool) -> Result<()> {
    let mut scenario = resolve_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.engine.seed = seed;
    }
    if let Some(n) = args.snapshots {
        scenario.engine.n_snapshots = n;
    }
    scenario.validate()?;
    let systems = parse_systems(&args.systems)?;
    let threads = parse_threads(&args.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let ladder = scenario_ladder(&scenario);
    let results: Vec<DimensioningResult> = pool.install(|| {
        systems
            .iter()
            .map(|&sys| dimension(&scenario, sys, &ladder, sweep))
            .collect::<Result<_>>()
    })?;

    let write = |w: &mut dyn Write| -> Result<()> {
        if sweep {
            write_dimensioning_csv(w, &scenario.name, &results)
        } else {
            write_deployment_csv(w, &scenario.name, &results)
        }
    };
    if args.out == Path::new("-") {
        let stdout = io::stdout();
        write(&mut stdout.lock())?;
        return Ok(());
    }
    let mut file = BufWriter::new(File::create(&args.out)?);
    write(&mut file)?;
    file.flush()?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: if sweep { "sweep" } else { "run" },
        systems: systems.iter().map(|s| s.to_string()).collect(),
        seed: scenario.engine.seed,
        n_snapshots: scenario.engine.n_snapshots,
        threads: pool.current_num_threads(),
        wall_clock_s: clock.elapsed().as_secs_f64(),
        started_unix_s: started,
        scenario: &scenario,
    };
    let path = write_manifest(&args.out, &manifest)?;
    eprintln!("wrote {} and {}", args.out.display(), path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => execute(args, false),
        Command::Sweep(args) => execute(args, true),
        Command::Validate(args) => resolve_scenario(args).and_then(|s| {
            s.validate()?;
            print!("{}", s.to_toml()?);
            Ok(())
        }),
        Command::Oracle { seed } => oracle::run_all(*seed)
            .map(|rows| {
                let mut failed = 0;
                for c in &rows {
                    let status = if c.passed() { "PASS" } else { "FAIL" };
                    if !c.passed() {
                        failed += 1;
                    }
                    println!(
                        "{status}  {:<52} oracle={:.6e} implementation={:.6e} tol={:.1e}",
                        c.name, c.oracle, c.implementation, c.tolerance
                    );
                }
                failed
            })
            .and_then(|failed| {
                if failed > 0 {
                    Err(Error::InvalidArgument(format!("{failed} oracle comparison(s) failed")))
                } else {
                    Ok(())
                }
            }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
